use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};

/// Load-shedding penalty in $/MWh.
pub const DEFAULT_SHED_PENALTY: f64 = 5000.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: usize,
    /// Demand per period, MW.
    pub load: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub from_bus: usize,
    pub to_bus: usize,
    /// Per-unit susceptance (1 / reactance) on the case MVA base.
    pub susceptance: f64,
    pub flow_min: f64,
    pub flow_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalGenerator {
    pub id: usize,
    pub bus: usize,
    pub p_min: f64,
    pub p_max: f64,
    /// No-load cost, $ per committed period.
    pub cost_a: f64,
    /// Linear cost, $/MWh.
    pub cost_b: f64,
    /// Quadratic cost, $/MW^2h.
    pub cost_c: f64,
    pub ramp_up: f64,
    pub ramp_down: f64,
    pub startup: f64,
    pub shutdown: f64,
    /// Commitment x_g^t per period, 0 or 1.
    pub commitment: Vec<u8>,
}

impl ThermalGenerator {
    pub fn is_on(&self, t: usize) -> bool {
        self.commitment[t] != 0
    }

    /// Quadratic production cost at output `p` in period `t`.
    pub fn cost(&self, t: usize, p: f64) -> f64 {
        let x = f64::from(self.commitment[t]);
        self.cost_a * x + self.cost_b * p + self.cost_c * p * p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenewableSite {
    pub label: String,
    pub bus: usize,
    /// Installed capacity in MW; power curves are normalised to this.
    pub nameplate: f64,
    /// Name of the power curve: `default` or a path to a curve CSV.
    pub curve: String,
}

/// A validated dispatch case.
///
/// Buses are kept sorted by id. Generators and sites keep file order.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCase {
    pub name: String,
    pub periods: usize,
    pub base_mva: f64,
    pub shed_penalty: f64,
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub generators: Vec<ThermalGenerator>,
    pub renewables: Vec<RenewableSite>,
}

impl GridCase {
    /// Checks every invariant and cross reference. Called by the parser; call it
    /// again after mutating a case by hand.
    pub fn validate(&self) -> Result<()> {
        if self.periods == 0 {
            return Err(Error::data("case must have at least one period"));
        }
        if !(self.shed_penalty > 0.0) {
            return Err(Error::data("shed penalty must be positive"));
        }
        if !(self.base_mva > 0.0) {
            return Err(Error::data("base MVA must be positive"));
        }
        if self.buses.is_empty() {
            return Err(Error::data("case has no buses"));
        }
        let mut ids = BTreeSet::new();
        for bus in &self.buses {
            if !ids.insert(bus.id) {
                return Err(Error::data(format!("duplicate bus id {}", bus.id)));
            }
            if bus.load.len() != self.periods {
                return Err(Error::data(format!(
                    "bus {} has {} load values, expected {}",
                    bus.id,
                    bus.load.len(),
                    self.periods
                )));
            }
            if bus.load.iter().any(|d| !d.is_finite() || *d < 0.0) {
                return Err(Error::data(format!("bus {} has a negative or non-finite load", bus.id)));
            }
        }
        let known = |bus: usize, what: &str| -> Result<()> {
            if ids.contains(&bus) {
                Ok(())
            } else {
                Err(Error::data(format!("{what} references unknown bus {bus}")))
            }
        };
        for (k, line) in self.lines.iter().enumerate() {
            known(line.from_bus, &format!("line {}", k + 1))?;
            known(line.to_bus, &format!("line {}", k + 1))?;
            if line.from_bus == line.to_bus {
                return Err(Error::data(format!("line {} is a self loop", k + 1)));
            }
            if !(line.susceptance > 0.0) || !line.susceptance.is_finite() {
                return Err(Error::data(format!("line {} needs positive susceptance", k + 1)));
            }
            if line.flow_min > line.flow_max || line.flow_min.is_nan() || line.flow_max.is_nan() {
                return Err(Error::data(format!("line {} has flow_min > flow_max", k + 1)));
            }
        }
        let mut gen_ids = BTreeSet::new();
        for g in &self.generators {
            if !gen_ids.insert(g.id) {
                return Err(Error::data(format!("duplicate generator id {}", g.id)));
            }
            known(g.bus, &format!("generator {}", g.id))?;
            if !(0.0 <= g.p_min && g.p_min <= g.p_max) || !g.p_max.is_finite() {
                return Err(Error::data(format!("generator {} needs 0 <= p_min <= p_max", g.id)));
            }
            if g.cost_c < 0.0 {
                return Err(Error::data(format!("generator {} has negative quadratic cost", g.id)));
            }
            if [g.ramp_up, g.ramp_down, g.startup, g.shutdown]
                .iter()
                .any(|r| !(*r >= 0.0))
            {
                return Err(Error::data(format!("generator {} has a negative ramp rate", g.id)));
            }
            if g.commitment.len() != self.periods || g.commitment.iter().any(|x| *x > 1) {
                return Err(Error::data(format!(
                    "generator {} commitment must be {} binary values",
                    g.id, self.periods
                )));
            }
        }
        let mut labels = BTreeSet::new();
        for r in &self.renewables {
            if !labels.insert(r.label.as_str()) {
                return Err(Error::data(format!("duplicate renewable label {}", r.label)));
            }
            known(r.bus, &format!("renewable {}", r.label))?;
            if !(r.nameplate > 0.0) {
                return Err(Error::data(format!("renewable {} needs positive nameplate", r.label)));
            }
        }
        Ok(())
    }

    /// Position of each bus id in `buses`.
    pub fn bus_index(&self) -> HashMap<usize, usize> {
        self.buses.iter().enumerate().map(|(k, b)| (b.id, k)).collect()
    }

    /// Lowest-id bus hosting a thermal generator, or the lowest-id bus when
    /// there are none.
    pub fn reference_bus(&self) -> usize {
        self.generators
            .iter()
            .map(|g| g.bus)
            .min()
            .unwrap_or_else(|| self.buses.iter().map(|b| b.id).min().unwrap_or(0))
    }

    /// Groups bus ids into connected islands of the line graph.
    pub fn islands(&self) -> Vec<Vec<usize>> {
        let mut adj: BTreeMap<usize, Vec<usize>> = self.buses.iter().map(|b| (b.id, Vec::new())).collect();
        for l in &self.lines {
            adj.entry(l.from_bus).or_default().push(l.to_bus);
            adj.entry(l.to_bus).or_default().push(l.from_bus);
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &start in adj.keys() {
            if !seen.insert(start) {
                continue;
            }
            let mut island = vec![start];
            let mut stack = vec![start];
            while let Some(b) = stack.pop() {
                for &n in &adj[&b] {
                    if seen.insert(n) {
                        island.push(n);
                        stack.push(n);
                    }
                }
            }
            island.sort_unstable();
            out.push(island);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.islands().len() <= 1
    }

    pub fn total_load(&self, t: usize) -> f64 {
        self.buses.iter().map(|b| b.load[t]).sum()
    }

    pub fn renewable_index(&self, label: &str) -> Option<usize> {
        self.renewables.iter().position(|r| r.label == label)
    }
}
