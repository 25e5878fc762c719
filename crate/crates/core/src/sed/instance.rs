use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::grid::{linearize_cost, GridCase, PiecewiseLinearCost, DEFAULT_SEGMENTS};
use crate::lp::{LinearProgram, LpOptions, LpSolution, LpStatus, Solver};

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchOptions {
    /// Piecewise-linear segments per generator cost curve.
    pub segments: usize,
    pub lp: LpOptions,
}

impl Default for DispatchOptions {
    fn default() -> Self {
        DispatchOptions {
            segments: DEFAULT_SEGMENTS,
            lp: LpOptions::default(),
        }
    }
}

/// Where each physical quantity lives in the LP.
///
/// Outer indices follow the case: generators and lines in file order, buses
/// sorted by id. `None` marks quantities that are constants (an uncommitted
/// unit's segments, a reference angle, shedding at a bus without load).
#[derive(Debug, Clone, PartialEq)]
pub struct VariableMap {
    /// `[gen][t]` segment columns; empty when the unit is off.
    pub segments: Vec<Vec<Vec<usize>>>,
    pub flows: Vec<Vec<usize>>,
    pub angles: Vec<Vec<Option<usize>>>,
    pub shed: Vec<Vec<Option<usize>>>,
    /// Renewable curtailment at buses hosting a site.
    pub spill: Vec<Vec<Option<usize>>>,
    /// `[bus][t]` power-balance rows.
    pub balance_rows: Vec<Vec<usize>>,
    pub flow_rows: Vec<Vec<usize>>,
    /// Ramp-up and ramp-down rows `[gen][t]` for `t >= 1`, where present.
    pub ramp_up_rows: Vec<Vec<Option<usize>>>,
    pub ramp_down_rows: Vec<Vec<Option<usize>>>,
}

/// The dispatch LP for one renewable scenario.
///
/// Generator output is `p_g^t = x_g^t P_min + sum_k s_gk^t` with segment
/// variables `0 <= s_gk^t <= width_k x_g^t` priced at the segment slope, so
/// the commitment-dependent constants sit in the right-hand sides and the
/// objective offset.
#[derive(Debug, Clone)]
pub struct DispatchInstance {
    pub lp: LinearProgram,
    pub map: VariableMap,
    pub costs: Vec<PiecewiseLinearCost>,
    /// Balance right-hand side before renewable injection, `[bus][t]`.
    base_rhs: Vec<Vec<f64>>,
    /// Bus position of each renewable site.
    site_bus: Vec<usize>,
    periods: usize,
}

/// Reference bus of every island: its lowest-id bus with a generator, or its
/// lowest-id bus.
fn reference_buses(case: &GridCase) -> Vec<usize> {
    let with_gen: std::collections::BTreeSet<usize> = case.generators.iter().map(|g| g.bus).collect();
    case.islands()
        .into_iter()
        .map(|island| {
            island
                .iter()
                .copied()
                .find(|b| with_gen.contains(b))
                .unwrap_or(island[0])
        })
        .collect()
}

impl DispatchInstance {
    /// Assembles the LP with zero renewable output; see
    /// [`DispatchInstance::set_renewable`].
    pub fn new(case: &GridCase, opts: &DispatchOptions) -> Result<Self> {
        case.validate()?;
        if !case.is_connected() {
            log::warn!("case {} has {} islands", case.name, case.islands().len());
        }
        let t_n = case.periods;
        let bus_pos = case.bus_index();
        let refs = reference_buses(case);
        let costs = case
            .generators
            .iter()
            .map(|g| linearize_cost(g, opts.segments))
            .collect::<Result<Vec<_>>>()?;
        let nb = case.buses.len();
        let mut lp = LinearProgram::new();

        let mut segments = Vec::with_capacity(case.generators.len());
        for (g, cost) in case.generators.iter().zip(&costs) {
            let widths: Vec<f64> = cost.widths().collect();
            segments.push(
                (0..t_n)
                    .map(|t| {
                        if g.is_on(t) {
                            lp.objective_offset += cost.base_cost;
                            widths
                                .iter()
                                .zip(&cost.slopes)
                                .map(|(w, s)| lp.add_var(*s, 0.0, *w))
                                .collect()
                        } else {
                            Vec::new()
                        }
                    })
                    .collect::<Vec<Vec<usize>>>(),
            );
        }
        let flows: Vec<Vec<usize>> = case
            .lines
            .iter()
            .map(|l| (0..t_n).map(|_| lp.add_var(0.0, l.flow_min, l.flow_max)).collect())
            .collect();
        let angles: Vec<Vec<Option<usize>>> = case
            .buses
            .iter()
            .map(|b| {
                (0..t_n)
                    .map(|_| (!refs.contains(&b.id)).then(|| lp.add_var(0.0, f64::NEG_INFINITY, f64::INFINITY)))
                    .collect()
            })
            .collect();
        let shed: Vec<Vec<Option<usize>>> = case
            .buses
            .iter()
            .map(|b| {
                b.load
                    .iter()
                    .map(|&d| (d > 0.0).then(|| lp.add_var(case.shed_penalty, 0.0, d)))
                    .collect()
            })
            .collect();
        let mut site_bus = Vec::with_capacity(case.renewables.len());
        let mut hosts = vec![false; nb];
        for r in &case.renewables {
            let k = bus_pos[&r.bus];
            site_bus.push(k);
            hosts[k] = true;
        }
        let spill: Vec<Vec<Option<usize>>> = (0..nb)
            .map(|k| (0..t_n).map(|_| hosts[k].then(|| lp.add_var(0.0, 0.0, 0.0))).collect())
            .collect();

        // Balance: gen - out + in + shed - spill = load - committed minimum - renewable.
        let mut entries: Vec<Vec<Vec<(usize, f64)>>> = vec![vec![Vec::new(); t_n]; nb];
        let mut base_rhs: Vec<Vec<f64>> = case.buses.iter().map(|b| b.load.clone()).collect();
        for (gi, g) in case.generators.iter().enumerate() {
            let k = bus_pos[&g.bus];
            for t in 0..t_n {
                if g.is_on(t) {
                    base_rhs[k][t] -= g.p_min;
                    entries[k][t].extend(segments[gi][t].iter().map(|&j| (j, 1.0)));
                }
            }
        }
        for (e, l) in case.lines.iter().enumerate() {
            let (i, j) = (bus_pos[&l.from_bus], bus_pos[&l.to_bus]);
            for t in 0..t_n {
                entries[i][t].push((flows[e][t], -1.0));
                entries[j][t].push((flows[e][t], 1.0));
            }
        }
        for k in 0..nb {
            for t in 0..t_n {
                if let Some(q) = shed[k][t] {
                    entries[k][t].push((q, 1.0));
                }
                if let Some(s) = spill[k][t] {
                    entries[k][t].push((s, -1.0));
                }
            }
        }
        let balance_rows: Vec<Vec<usize>> = (0..nb)
            .map(|k| {
                (0..t_n)
                    .map(|t| lp.add_row(base_rhs[k][t], base_rhs[k][t], &entries[k][t]))
                    .collect()
            })
            .collect();

        // Flow definition: base * B (theta_i - theta_j) - f = 0.
        let flow_rows: Vec<Vec<usize>> = case
            .lines
            .iter()
            .enumerate()
            .map(|(e, l)| {
                let b = case.base_mva * l.susceptance;
                let (i, j) = (bus_pos[&l.from_bus], bus_pos[&l.to_bus]);
                (0..t_n)
                    .map(|t| {
                        let mut row = vec![(flows[e][t], -1.0)];
                        if let Some(a) = angles[i][t] {
                            row.push((a, b));
                        }
                        if let Some(a) = angles[j][t] {
                            row.push((a, -b));
                        }
                        lp.add_row(0.0, 0.0, &row)
                    })
                    .collect()
            })
            .collect();

        // Ramping between consecutive periods. With p = x P_min + sum s the
        // rows are written on the segment sums and the P_min terms move right.
        let mut ramp_up_rows = Vec::with_capacity(case.generators.len());
        let mut ramp_down_rows = Vec::with_capacity(case.generators.len());
        for (gi, g) in case.generators.iter().enumerate() {
            let mut up = vec![None; t_n];
            let mut down = vec![None; t_n];
            for t in 1..t_n {
                let (x0, x1) = (f64::from(g.commitment[t - 1]), f64::from(g.commitment[t]));
                let now = &segments[gi][t];
                let prev = &segments[gi][t - 1];
                if now.is_empty() && prev.is_empty() {
                    continue;
                }
                let mut row: Vec<(usize, f64)> = now.iter().map(|&j| (j, 1.0)).collect();
                row.extend(prev.iter().map(|&j| (j, -1.0)));
                let shift = g.p_min * (x1 - x0);
                let rhs_up = g.ramp_up * x0 + g.startup * (x1 - x0) + g.p_max * (1.0 - x1) - shift;
                if rhs_up.is_finite() {
                    up[t] = Some(lp.add_row(f64::NEG_INFINITY, rhs_up, &row));
                }
                let rhs_down = g.ramp_down * x1 + g.shutdown * (x0 - x1) + g.p_max * (1.0 - x0) + shift;
                if rhs_down.is_finite() {
                    down[t] = Some(lp.add_row(-rhs_down, f64::INFINITY, &row));
                }
            }
            ramp_up_rows.push(up);
            ramp_down_rows.push(down);
        }

        Ok(DispatchInstance {
            lp,
            map: VariableMap {
                segments,
                flows,
                angles,
                shed,
                spill,
                balance_rows,
                flow_rows,
                ramp_up_rows,
                ramp_down_rows,
            },
            costs,
            base_rhs,
            site_bus,
            periods: t_n,
        })
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn num_sites(&self) -> usize {
        self.site_bus.len()
    }

    /// Bound changes that install `renewable` (sites x periods, MW): balance
    /// right-hand sides and curtailment limits at host buses. Each entry is
    /// `(column index in the combined [x, logicals] space, lower, upper)`.
    fn renewable_bounds(&self, renewable: &[f64]) -> Result<Vec<(Target, f64, f64)>> {
        let t_n = self.periods;
        if renewable.len() != self.site_bus.len() * t_n {
            return Err(Error::Dimension {
                what: "renewable values (sites x periods)",
                expected: self.site_bus.len() * t_n,
                got: renewable.len(),
            });
        }
        if let Some(bad) = renewable.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(Error::data(format!(
                "renewable output must be finite and >= 0, got {bad}"
            )));
        }
        let mut injected: HashMap<usize, Vec<f64>> = HashMap::new();
        for (s, &k) in self.site_bus.iter().enumerate() {
            let inj = injected.entry(k).or_insert_with(|| vec![0.0; t_n]);
            for t in 0..t_n {
                inj[t] += renewable[s * t_n + t];
            }
        }
        let mut out = Vec::with_capacity(2 * injected.len() * t_n);
        let mut buses: Vec<_> = injected.into_iter().collect();
        buses.sort_by_key(|(k, _)| *k);
        for (k, inj) in buses {
            for t in 0..t_n {
                let rhs = self.base_rhs[k][t] - inj[t];
                out.push((Target::Row(self.map.balance_rows[k][t]), rhs, rhs));
                let col = self.map.spill[k][t].expect("spill column at renewable bus");
                out.push((Target::Col(col), 0.0, inj[t]));
            }
        }
        Ok(out)
    }

    /// Writes `renewable` (site-major, sites x periods, MW) into the LP.
    pub fn set_renewable(&mut self, renewable: &[f64]) -> Result<()> {
        for (target, lo, hi) in self.renewable_bounds(renewable)? {
            match target {
                Target::Row(i) => {
                    self.lp.row_lower[i] = lo;
                    self.lp.row_upper[i] = hi;
                }
                Target::Col(j) => {
                    self.lp.col_lower[j] = lo;
                    self.lp.col_upper[j] = hi;
                }
            }
        }
        Ok(())
    }

    /// Same as [`DispatchInstance::set_renewable`] on a solver built from this
    /// instance's LP, keeping its basis for a warm start.
    pub fn apply_renewable(&self, solver: &mut Solver, renewable: &[f64]) -> Result<()> {
        for (target, lo, hi) in self.renewable_bounds(renewable)? {
            match target {
                Target::Row(i) => solver.set_row_bounds(i, lo, hi),
                Target::Col(j) => solver.set_col_bounds(j, lo, hi),
            }
        }
        Ok(())
    }

    /// Unpacks an LP solution into physical quantities.
    pub fn extract(&self, case: &GridCase, sol: &LpSolution) -> DispatchSolution {
        let x = &sol.x;
        let t_n = self.periods;
        let generation = case
            .generators
            .iter()
            .enumerate()
            .map(|(g, gen)| {
                (0..t_n)
                    .map(|t| {
                        let segs = &self.map.segments[g][t];
                        if segs.is_empty() {
                            0.0
                        } else {
                            gen.p_min + segs.iter().map(|&j| x[j]).sum::<f64>()
                        }
                    })
                    .collect()
            })
            .collect();
        let pick = |v: &Vec<Vec<Option<usize>>>| -> Vec<Vec<f64>> {
            v.iter()
                .map(|r| r.iter().map(|j| j.map_or(0.0, |j| x[j])).collect())
                .collect()
        };
        DispatchSolution {
            status: sol.status,
            objective: sol.objective,
            generation,
            flows: self
                .map
                .flows
                .iter()
                .map(|r| r.iter().map(|&j| x[j]).collect())
                .collect(),
            angles: pick(&self.map.angles),
            shed: pick(&self.map.shed),
            spill: pick(&self.map.spill),
        }
    }

    /// Solves from scratch.
    pub fn solve(&self, case: &GridCase, opts: &LpOptions) -> Result<DispatchSolution> {
        let mut solver = Solver::new(&self.lp, opts.clone())?;
        let sol = solver.solve()?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::numerical(format!("dispatch LP finished {}", sol.status)));
        }
        Ok(self.extract(case, &sol))
    }
}

#[derive(Debug, Clone, Copy)]
enum Target {
    Row(usize),
    Col(usize),
}

/// Builds the dispatch LP for one scenario; `renewable[s]` is the hourly
/// output (MW) of case site `s`.
pub fn build_instance(case: &GridCase, renewable: &[Vec<f64>], opts: &DispatchOptions) -> Result<DispatchInstance> {
    if renewable.len() != case.renewables.len() {
        return Err(Error::Dimension {
            what: "renewable sites",
            expected: case.renewables.len(),
            got: renewable.len(),
        });
    }
    if let Some(r) = renewable.iter().find(|r| r.len() != case.periods) {
        return Err(Error::Dimension {
            what: "renewable periods",
            expected: case.periods,
            got: r.len(),
        });
    }
    let mut inst = DispatchInstance::new(case, opts)?;
    inst.set_renewable(&renewable.concat())?;
    Ok(inst)
}

/// Physical dispatch, `[entity][t]` in case order.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchSolution {
    pub status: LpStatus,
    /// Q in $.
    pub objective: f64,
    pub generation: Vec<Vec<f64>>,
    pub flows: Vec<Vec<f64>>,
    pub angles: Vec<Vec<f64>>,
    pub shed: Vec<Vec<f64>>,
    pub spill: Vec<Vec<f64>>,
}

impl DispatchSolution {
    /// Piecewise-linear production cost recomputed from the schedule.
    pub fn production_cost(&self, case: &GridCase, costs: &[PiecewiseLinearCost]) -> f64 {
        let mut total = 0.0;
        for (g, gen) in case.generators.iter().enumerate() {
            for t in 0..case.periods {
                if gen.is_on(t) {
                    total += costs[g].eval(self.generation[g][t]);
                }
            }
        }
        total
    }

    pub fn shed_cost(&self, case: &GridCase) -> f64 {
        case.shed_penalty * self.shed.iter().flatten().sum::<f64>()
    }

    /// `kind,id,period,value` rows with 0-based periods. Generators and
    /// buses use case ids; lines use their 1-based position.
    pub fn write_csv(&self, case: &GridCase, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "kind,id,period,value")?;
        writeln!(out, "objective,0,0,{:?}", self.objective)?;
        let mut block = |kind: &str, ids: &mut dyn Iterator<Item = usize>, rows: &[Vec<f64>]| -> std::io::Result<()> {
            for (id, row) in ids.zip(rows) {
                for (t, v) in row.iter().enumerate() {
                    writeln!(out, "{kind},{id},{t},{v:?}")?;
                }
            }
            Ok(())
        };
        block(
            "generation",
            &mut case.generators.iter().map(|g| g.id),
            &self.generation,
        )?;
        block("flow", &mut (1..=case.lines.len()), &self.flows)?;
        block("angle", &mut case.buses.iter().map(|b| b.id), &self.angles)?;
        block("shed", &mut case.buses.iter().map(|b| b.id), &self.shed)?;
        block("spill", &mut case.buses.iter().map(|b| b.id), &self.spill)?;
        Ok(())
    }
}
