use crate::error::{Error, Result};
use crate::forecast::ForecastModel;
use crate::grid::GridCase;
use crate::lp::{LpStatus, Solver};
use crate::model::GermModel;
use crate::wind::HOURS;

use super::instance::{DispatchInstance, DispatchOptions, DispatchSolution};

/// `Q(x, xi)`: maps a germ through the forecast model to site power and
/// solves the dispatch LP.
///
/// Every evaluation starts from a copy of the solver state optimal for the
/// mean forecast and re-optimises with the dual simplex, so a result never
/// depends on which germs were evaluated before it or on which thread.
pub struct DispatchEvaluator {
    case: GridCase,
    forecast: ForecastModel,
    instance: DispatchInstance,
    /// Forecast site feeding each case renewable.
    site_map: Vec<usize>,
    base: Solver,
    base_objective: f64,
}

impl DispatchEvaluator {
    pub fn new(case: GridCase, forecast: ForecastModel, opts: &DispatchOptions) -> Result<Self> {
        if case.periods != HOURS {
            return Err(Error::data(format!(
                "case {} has {} periods; forecasts cover {HOURS} hours",
                case.name, case.periods
            )));
        }
        let labels = forecast.site_labels();
        let site_map = case
            .renewables
            .iter()
            .map(|r| {
                labels
                    .iter()
                    .position(|l| *l == r.label)
                    .ok_or_else(|| Error::data(format!("case renewable {} has no forecast", r.label)))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(extra) = labels.iter().find(|l| case.renewable_index(l).is_none()) {
            return Err(Error::data(format!(
                "forecast site {extra} is not a renewable in case {}",
                case.name
            )));
        }
        let instance = DispatchInstance::new(&case, opts)?;
        let mut ev = DispatchEvaluator {
            base: Solver::new(&instance.lp, opts.lp.clone())?,
            case,
            forecast,
            instance,
            site_map,
            base_objective: f64::NAN,
        };
        let mean = ev.renewable(&vec![0.0; ev.forecast.dims()])?;
        let mut base = ev.base.clone();
        ev.instance.apply_renewable(&mut base, &mean)?;
        let status = base.run()?;
        if status != LpStatus::Optimal {
            return Err(Error::numerical(format!(
                "dispatch at the mean forecast finished {status}"
            )));
        }
        ev.base_objective = base.objective();
        ev.base = base;
        Ok(ev)
    }

    pub fn case(&self) -> &GridCase {
        &self.case
    }

    pub fn forecast(&self) -> &ForecastModel {
        &self.forecast
    }

    pub fn instance(&self) -> &DispatchInstance {
        &self.instance
    }

    /// Optimal cost at the mean forecast (germ 0).
    pub fn mean_forecast_cost(&self) -> f64 {
        self.base_objective
    }

    /// Site-major renewable output (case site order x 24) for `germ`.
    pub fn renewable(&self, germ: &[f64]) -> Result<Vec<f64>> {
        let mut by_forecast = vec![0.0; self.forecast.num_sites() * HOURS];
        self.forecast.power_into(germ, &mut by_forecast)?;
        let mut out = Vec::with_capacity(self.site_map.len() * HOURS);
        for &f in &self.site_map {
            out.extend_from_slice(&by_forecast[f * HOURS..(f + 1) * HOURS]);
        }
        Ok(out)
    }

    fn run(&self, germ: &[f64]) -> Result<Solver> {
        let renewable = self.renewable(germ)?;
        let mut solver = self.base.clone();
        self.instance.apply_renewable(&mut solver, &renewable)?;
        match solver.run()? {
            LpStatus::Optimal => Ok(solver),
            status => Err(Error::numerical(format!("dispatch LP finished {status}"))),
        }
    }

    pub fn evaluate(&self, germ: &[f64]) -> Result<f64> {
        Ok(self.run(germ)?.objective())
    }

    pub fn solve(&self, germ: &[f64]) -> Result<DispatchSolution> {
        let solver = self.run(germ)?;
        Ok(self.instance.extract(&self.case, &solver.solution(LpStatus::Optimal)))
    }
}

impl GermModel for DispatchEvaluator {
    fn dims(&self) -> usize {
        self.forecast.dims()
    }

    fn eval(&self, germ: &[f64]) -> Result<f64> {
        self.evaluate(germ)
    }
}
