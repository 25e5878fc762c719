use std::collections::HashMap;
use std::io::{Read, Write};

use rayon::prelude::*;

use super::matern::MaternKernel;
use super::sigma::sigma_w_from_sigma_p;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng;
use crate::wind::{kl_decompose, KlBasis, PowerCurve, HOURS};

#[derive(Debug, Clone, PartialEq)]
pub struct SiteForecast {
    pub label: String,
    /// Day-ahead forecast speed per hour, m/s.
    pub mean_wind: Vec<f64>,
    /// Shape of the log-wind covariance; its `variance` is ignored in favour
    /// of the scale derived from `sigma_p`.
    pub kernel: MaternKernel,
    /// KL truncation.
    pub modes: usize,
    /// MW.
    pub nameplate: f64,
    pub curve: PowerCurve,
    /// Explicit `sigma_W`, bypassing the power-curve conversion.
    pub sigma_w: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSpec {
    pub sites: Vec<SiteForecast>,
    /// Relative hourly power uncertainty.
    pub sigma_p: f64,
    /// Groups of `(site index, mode index)` pairs, both 0-based, driven by
    /// one shared germ coordinate.
    pub shared: Vec<Vec<(usize, usize)>>,
}

impl ForecastSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_p > 0.0) || !self.sigma_p.is_finite() {
            return Err(Error::invalid(format!(
                "sigma_p must be positive, got {}",
                self.sigma_p
            )));
        }
        if self.sites.is_empty() {
            return Err(Error::invalid("forecast needs at least one site"));
        }
        for s in &self.sites {
            if s.mean_wind.len() != HOURS {
                return Err(Error::Dimension {
                    what: "forecast profile length",
                    expected: HOURS,
                    got: s.mean_wind.len(),
                });
            }
            if s.mean_wind.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
                return Err(Error::invalid(format!(
                    "site {}: forecast speeds must be positive",
                    s.label
                )));
            }
            if s.modes == 0 || s.modes > HOURS {
                return Err(Error::invalid(format!(
                    "site {}: mode count {} outside 1..=24",
                    s.label, s.modes
                )));
            }
            if !(s.nameplate >= 0.0) || !s.nameplate.is_finite() {
                return Err(Error::invalid(format!(
                    "site {}: nameplate must be nonnegative",
                    s.label
                )));
            }
            if let Some(w) = s.sigma_w {
                if !(w >= 0.0) || !w.is_finite() {
                    return Err(Error::invalid(format!("site {}: sigma_w must be nonnegative", s.label)));
                }
            }
        }
        let mut seen = HashMap::new();
        for (g, group) in self.shared.iter().enumerate() {
            if group.len() < 2 {
                return Err(Error::invalid(format!(
                    "dependence group {} has fewer than two members",
                    g + 1
                )));
            }
            for &(s, k) in group {
                let site = self
                    .sites
                    .get(s)
                    .ok_or_else(|| Error::invalid(format!("dependence group {} names unknown site {s}", g + 1)))?;
                if k >= site.modes {
                    return Err(Error::invalid(format!(
                        "dependence group {} uses mode {} of site {}, which keeps {} modes",
                        g + 1,
                        k + 1,
                        site.label,
                        site.modes
                    )));
                }
                if let Some(other) = seen.insert((s, k), g) {
                    return Err(Error::invalid(format!(
                        "site {} mode {} is in dependence groups {} and {}",
                        site.label,
                        k + 1,
                        other + 1,
                        g + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct SiteModel {
    label: String,
    log_mean: Vec<f64>,
    /// `modes x 24`, row `k` is `sqrt(lambda_k) f_k`.
    scaled_modes: Vec<Vec<f64>>,
    /// Germ coordinate driving each mode.
    coords: Vec<usize>,
    nameplate: f64,
    curve: PowerCurve,
    sigma_w: f64,
    basis: KlBasis,
}

/// A validated spec with its per-site KL bases and germ map resolved.
#[derive(Debug, Clone)]
pub struct ForecastModel {
    sites: Vec<SiteModel>,
    dims: usize,
}

impl ForecastModel {
    pub fn new(spec: &ForecastSpec) -> Result<Self> {
        spec.validate()?;
        let mut group_of = HashMap::new();
        for (g, group) in spec.shared.iter().enumerate() {
            for &pair in group {
                group_of.insert(pair, g);
            }
        }
        let mut group_coord: HashMap<usize, usize> = HashMap::new();
        let mut dims = 0;
        let mut sites = Vec::with_capacity(spec.sites.len());
        for (s, site) in spec.sites.iter().enumerate() {
            let sigma_w = match site.sigma_w {
                Some(w) => w,
                None => sigma_w_from_sigma_p(spec.sigma_p, &site.mean_wind, &site.curve)
                    .map_err(|e| Error::invalid(format!("site {}: {e}", site.label)))?,
            };
            let kernel = MaternKernel::new(site.kernel.length_scale, site.kernel.smoothness, sigma_w * sigma_w)?;
            let log_mean: Vec<f64> = site.mean_wind.iter().map(|w| w.ln()).collect();
            let basis = kl_decompose(&kernel.matrix(HOURS, 1.0), &log_mean)?.with_truncation(site.modes)?;
            let scaled_modes = (0..site.modes)
                .map(|k| {
                    let a = basis.eigenvalues[k].sqrt();
                    basis.mode(k).into_iter().map(|f| a * f).collect()
                })
                .collect();
            let coords = (0..site.modes)
                .map(|k| match group_of.get(&(s, k)) {
                    Some(g) => *group_coord.entry(*g).or_insert_with(|| {
                        dims += 1;
                        dims - 1
                    }),
                    None => {
                        dims += 1;
                        dims - 1
                    }
                })
                .collect();
            sites.push(SiteModel {
                label: site.label.clone(),
                log_mean,
                scaled_modes,
                coords,
                nameplate: site.nameplate,
                curve: site.curve.clone(),
                sigma_w,
                basis,
            });
        }
        Ok(ForecastModel { sites, dims })
    }

    /// Germ dimension.
    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn site_labels(&self) -> Vec<String> {
        self.sites.iter().map(|s| s.label.clone()).collect()
    }

    pub fn sigma_w(&self, site: usize) -> f64 {
        self.sites[site].sigma_w
    }

    pub fn basis(&self, site: usize) -> &KlBasis {
        &self.sites[site].basis
    }

    pub fn nameplate(&self, site: usize) -> f64 {
        self.sites[site].nameplate
    }

    /// Germ coordinates feeding the modes of `site`, in mode order.
    pub fn coordinates(&self, site: usize) -> &[usize] {
        &self.sites[site].coords
    }

    fn check(&self, germ: &[f64]) -> Result<()> {
        if germ.len() != self.dims {
            return Err(Error::Dimension {
                what: "germ dimension",
                expected: self.dims,
                got: germ.len(),
            });
        }
        Ok(())
    }

    /// Log-wind field of `site` for `germ`.
    pub fn log_wind(&self, site: usize, germ: &[f64]) -> Result<Vec<f64>> {
        self.check(germ)?;
        let s = &self.sites[site];
        let mut w = s.log_mean.clone();
        for (m, &c) in s.scaled_modes.iter().zip(&s.coords) {
            let z = germ[c];
            for (o, v) in w.iter_mut().zip(m) {
                *o += z * v;
            }
        }
        Ok(w)
    }

    /// Site-major `sites x 24` power in MW written into `out`.
    pub fn power_into(&self, germ: &[f64], out: &mut [f64]) -> Result<()> {
        if out.len() != self.sites.len() * HOURS {
            return Err(Error::Dimension {
                what: "power buffer length",
                expected: self.sites.len() * HOURS,
                got: out.len(),
            });
        }
        for (s, chunk) in out.chunks_mut(HOURS).enumerate() {
            let site = &self.sites[s];
            let w = self.log_wind(s, germ)?;
            for (o, lw) in chunk.iter_mut().zip(&w) {
                *o = site.nameplate * site.curve.eval(lw.exp());
            }
        }
        Ok(())
    }

    /// Per-site hourly power (MW) for one germ.
    pub fn power(&self, germ: &[f64]) -> Result<Vec<Vec<f64>>> {
        let mut flat = vec![0.0; self.sites.len() * HOURS];
        self.power_into(germ, &mut flat)?;
        Ok(flat.chunks(HOURS).map(|c| c.to_vec()).collect())
    }
}

/// Where scenario germs come from.
#[derive(Debug, Clone, PartialEq)]
pub enum GermSource {
    /// `count` iid standard-normal germs; germ `i` is drawn from its own
    /// stream so any subset can be regenerated alone.
    Normal { seed: u64, count: usize },
    /// Caller-supplied germs, e.g. quadrature nodes with their weights.
    Explicit { germs: Matrix, weights: Option<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet {
    pub site_labels: Vec<String>,
    /// `n x dims`.
    pub germs: Matrix,
    /// Scenario-major, then site, then hour: `n * sites * 24` MW values.
    pub power: Vec<f64>,
    pub weights: Option<Vec<f64>>,
}

pub const SCENARIO_MAGIC: &[u8; 8] = b"SEDSCN01";

impl ScenarioSet {
    pub fn len(&self) -> usize {
        self.germs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_sites(&self) -> usize {
        self.site_labels.len()
    }

    pub fn dims(&self) -> usize {
        self.germs.cols()
    }

    /// `sites x 24` block of scenario `s`.
    pub fn scenario(&self, s: usize) -> &[f64] {
        let w = self.num_sites() * HOURS;
        &self.power[s * w..(s + 1) * w]
    }

    pub fn site_power(&self, s: usize, site: usize) -> &[f64] {
        &self.scenario(s)[site * HOURS..(site + 1) * HOURS]
    }

    /// `scenario,site,hour,power_mw` with 0-based scenario and hour.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "scenario,site,hour,power_mw")?;
        for s in 0..self.len() {
            for (k, label) in self.site_labels.iter().enumerate() {
                for (t, p) in self.site_power(s, k).iter().enumerate() {
                    writeln!(out, "{s},{label},{t},{p:?}")?;
                }
            }
        }
        Ok(())
    }

    /// Little-endian columnar dump:
    ///
    /// ```text
    /// magic    8 bytes  "SEDSCN01"
    /// n        u64      scenarios
    /// sites    u64
    /// hours    u64      always 24
    /// dims     u64      germ dimension
    /// flags    u64      bit 0: weights present
    /// labels   sites x (u64 byte length, UTF-8 bytes)
    /// germs    n*dims f64, scenario-major
    /// power    n*sites*hours f64, scenario, site, hour
    /// weights  n f64 when flagged
    /// ```
    pub fn write_binary(&self, mut out: impl Write) -> std::io::Result<()> {
        out.write_all(SCENARIO_MAGIC)?;
        let flags = u64::from(self.weights.is_some());
        for v in [self.len(), self.num_sites(), HOURS, self.dims()] {
            out.write_all(&(v as u64).to_le_bytes())?;
        }
        out.write_all(&flags.to_le_bytes())?;
        for l in &self.site_labels {
            out.write_all(&(l.len() as u64).to_le_bytes())?;
            out.write_all(l.as_bytes())?;
        }
        let floats = self
            .germs
            .as_slice()
            .iter()
            .chain(&self.power)
            .chain(self.weights.iter().flatten());
        for v in floats {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)
        .map_err(|e| Error::data(format!("truncated scenario dump: {e}")))?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64s(r: &mut impl Read, n: usize) -> Result<Vec<f64>> {
    (0..n).map(|_| read_u64(r).map(f64::from_bits)).collect()
}

pub fn read_scenarios_binary(mut r: impl Read) -> Result<ScenarioSet> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)
        .map_err(|e| Error::data(format!("truncated scenario dump: {e}")))?;
    if &magic != SCENARIO_MAGIC {
        return Err(Error::data("not a scenario dump (bad magic)"));
    }
    let n = read_u64(&mut r)? as usize;
    let sites = read_u64(&mut r)? as usize;
    let hours = read_u64(&mut r)? as usize;
    let dims = read_u64(&mut r)? as usize;
    let flags = read_u64(&mut r)?;
    if hours != HOURS {
        return Err(Error::data(format!(
            "scenario dump has {hours} hours, expected {HOURS}"
        )));
    }
    let mut labels = Vec::with_capacity(sites);
    for _ in 0..sites {
        let len = read_u64(&mut r)? as usize;
        let mut b = vec![0u8; len];
        r.read_exact(&mut b)
            .map_err(|e| Error::data(format!("truncated scenario dump: {e}")))?;
        labels.push(String::from_utf8(b).map_err(|_| Error::data("site label is not UTF-8"))?);
    }
    let germs = Matrix::from_vec(n, dims, read_f64s(&mut r, n * dims)?);
    let power = read_f64s(&mut r, n * sites * HOURS)?;
    let weights = if flags & 1 == 1 {
        Some(read_f64s(&mut r, n)?)
    } else {
        None
    };
    Ok(ScenarioSet {
        site_labels: labels,
        germs,
        power,
        weights,
    })
}

/// Maps every germ of `source` to per-site hourly power.
pub fn generate_scenarios(model: &ForecastModel, source: &GermSource) -> Result<ScenarioSet> {
    let d = model.dims();
    let (germs, weights) = match source {
        GermSource::Normal { seed, count } => {
            let mut data = vec![0.0; count * d];
            if d > 0 {
                data.par_chunks_mut(d).enumerate().for_each(|(i, row)| {
                    rng::fill_normal(&mut rng::stream(*seed, i as u64), row);
                });
            }
            (Matrix::from_vec(*count, d, data), None)
        }
        GermSource::Explicit { germs, weights } => {
            if germs.cols() != d {
                return Err(Error::Dimension {
                    what: "germ dimension",
                    expected: d,
                    got: germs.cols(),
                });
            }
            if let Some(w) = weights {
                if w.len() != germs.rows() {
                    return Err(Error::Dimension {
                        what: "weight count",
                        expected: germs.rows(),
                        got: w.len(),
                    });
                }
            }
            (germs.clone(), weights.clone())
        }
    };
    let width = model.num_sites() * HOURS;
    let mut power = vec![0.0; germs.rows() * width];
    power
        .par_chunks_mut(width)
        .enumerate()
        .try_for_each(|(i, out)| model.power_into(germs.row(i), out))?;
    Ok(ScenarioSet {
        site_labels: model.site_labels(),
        germs,
        power,
        weights,
    })
}
