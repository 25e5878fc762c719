//! Synthetic wind measurements with Matern-correlated log speed.
//!
//! Stands in for measured data: each day draws a 24-hour log-wind profile
//! `log(mean_t) + sum_k sqrt(lambda_k) z_k f_k` from the full KL expansion of
//! a Matern covariance, then spreads every hourly mean over six 10-minute
//! readings whose average is exactly that mean.

use chrono::{Duration, NaiveDate};
use rand::Rng;
use rand_distr::StandardNormal;

use super::curve::PowerCurve;
use super::data::{WindRecord, HOURS};
use super::kl::kl_decompose;
use crate::error::{Error, Result};
use crate::forecast::MaternKernel;
use crate::linalg::Matrix;
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticWind {
    /// Mean hourly speed in m/s.
    pub mean_profile: Vec<f64>,
    pub kernel: MaternKernel,
    /// Relative size of the 10-minute fluctuation around each hourly mean.
    pub intraday_noise: f64,
    pub nameplate: f64,
    pub start: NaiveDate,
    pub seed: u64,
}

impl SyntheticWind {
    /// A diurnal profile around `level` m/s, windier in the afternoon.
    pub fn diurnal(level: f64, amplitude: f64) -> Vec<f64> {
        (0..HOURS)
            .map(|t| level * (1.0 + amplitude * (2.0 * std::f64::consts::PI * (t as f64 - 15.0) / 24.0).cos()))
            .collect()
    }

    /// `days x 24` matrix of log hourly mean speed.
    pub fn log_profiles(&self, days: usize) -> Result<Matrix> {
        if self.mean_profile.len() != HOURS || self.mean_profile.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::invalid("synthetic mean profile must be 24 positive speeds"));
        }
        let mean: Vec<f64> = self.mean_profile.iter().map(|w| w.ln()).collect();
        let basis = kl_decompose(&self.kernel.matrix(HOURS, 1.0), &mean)?;
        let mut out = Matrix::zeros(days, HOURS);
        let mut z = vec![0.0; HOURS];
        for d in 0..days {
            rng::fill_normal(&mut rng::stream(self.seed, d as u64), &mut z);
            let row = basis.reconstruct(&z, HOURS)?;
            for t in 0..HOURS {
                out[(d, t)] = row[t];
            }
        }
        Ok(out)
    }

    /// Ten-minute records for `days` consecutive days.
    pub fn records(&self, days: usize, curve: &PowerCurve) -> Result<Vec<WindRecord>> {
        let profiles = self.log_profiles(days)?;
        let mut out = Vec::with_capacity(days * 144);
        let noise_seed = rng::derive_seed(self.seed, &[0x6e6f697365]);
        for d in 0..days {
            let mut r = rng::stream(noise_seed, d as u64);
            let date = self.start + Duration::days(d as i64);
            for t in 0..HOURS {
                let hourly = profiles[(d, t)].exp();
                let mut eps = [0.0; 6];
                for e in &mut eps {
                    let z: f64 = r.sample(StandardNormal);
                    *e = (self.intraday_noise * z).clamp(-0.5, 0.5);
                }
                let shift = eps.iter().sum::<f64>() / 6.0;
                for (k, e) in eps.iter().enumerate() {
                    let speed = hourly * (1.0 + e - shift);
                    out.push(WindRecord {
                        timestamp: date.and_hms_opt(t as u32, 10 * k as u32, 0).expect("valid time"),
                        speed,
                        power: self.nameplate * curve.eval(speed),
                    });
                }
            }
        }
        Ok(out)
    }
}
