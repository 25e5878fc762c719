use std::sync::Arc;

use super::lu::LuFactor;
use super::sparse::CscMatrix;
use super::{Basis, LinearProgram, LpDiagnostics, LpOptions, LpSolution, LpStatus, VarStatus};
use crate::error::{Error, Result};

const NONE: usize = usize::MAX;
/// Smallest pivot magnitude accepted by either ratio test.
const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug)]
struct Shared {
    n: usize,
    m: usize,
    a: CscMatrix,
    /// `a` stored by rows.
    at: CscMatrix,
    /// Costs of structural then logical variables.
    cost: Vec<f64>,
    offset: f64,
}

/// Simplex state for one problem.
///
/// A solver can be re-solved after changing bounds; it then starts from the
/// final basis of the previous solve. Cloning is cheap relative to a solve
/// and gives an independent worker sharing the constraint matrix.
#[derive(Debug, Clone)]
pub struct Solver {
    sh: Arc<Shared>,
    opts: LpOptions,
    lower: Vec<f64>,
    upper: Vec<f64>,
    status: Vec<VarStatus>,
    head: Vec<usize>,
    x: Vec<f64>,
    d: Vec<f64>,
    y: Vec<f64>,
    lu: Option<LuFactor>,
    diag: LpDiagnostics,
    // Scratch buffers.
    col: Vec<f64>,
    rho: Vec<f64>,
    work: Vec<f64>,
    alpha_row: Vec<f64>,
    touched: Vec<usize>,
    marked: Vec<bool>,
}

enum Step {
    Done(LpStatus),
    Continue,
}

impl Solver {
    pub fn new(lp: &LinearProgram, opts: LpOptions) -> Result<Self> {
        lp.validate()?;
        let n = lp.num_vars();
        let m = lp.num_rows();
        let a = lp.matrix();
        let at = a.transpose();
        let mut cost = lp.objective.clone();
        cost.resize(n + m, 0.0);
        let mut lower = lp.col_lower.clone();
        lower.extend_from_slice(&lp.row_lower);
        let mut upper = lp.col_upper.clone();
        upper.extend_from_slice(&lp.row_upper);
        let mut s = Solver {
            sh: Arc::new(Shared {
                n,
                m,
                a,
                at,
                cost,
                offset: lp.objective_offset,
            }),
            opts,
            lower,
            upper,
            status: vec![VarStatus::AtLower; n + m],
            head: (n..n + m).collect(),
            x: vec![0.0; n + m],
            d: vec![0.0; n + m],
            y: vec![0.0; m],
            lu: None,
            diag: LpDiagnostics::default(),
            col: vec![0.0; m],
            rho: vec![0.0; m],
            work: vec![0.0; m],
            alpha_row: vec![0.0; n + m],
            touched: Vec::new(),
            marked: vec![false; n + m],
        };
        for j in 0..n {
            s.status[j] = s.cold_status(j);
        }
        for i in 0..m {
            s.status[n + i] = VarStatus::Basic;
        }
        Ok(s)
    }

    pub fn num_vars(&self) -> usize {
        self.sh.n
    }

    pub fn num_rows(&self) -> usize {
        self.sh.m
    }

    pub fn options(&self) -> &LpOptions {
        &self.opts
    }

    /// Nonbasic position for a cold start: the bound that makes the reduced
    /// cost `c_j` dual feasible when the basis is all-logical.
    fn cold_status(&self, j: usize) -> VarStatus {
        let (lo, hi) = (self.lower[j], self.upper[j]);
        let prefer_upper = self.sh.cost[j] < 0.0;
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => {
                if prefer_upper {
                    VarStatus::AtUpper
                } else {
                    VarStatus::AtLower
                }
            }
            (true, false) => VarStatus::AtLower,
            (false, true) => VarStatus::AtUpper,
            (false, false) => VarStatus::Zero,
        }
    }

    /// Re-validates a nonbasic status after a bound change.
    fn repair_status(&mut self, j: usize) {
        let st = self.status[j];
        let ok = match st {
            VarStatus::Basic => true,
            VarStatus::AtLower => self.lower[j].is_finite(),
            VarStatus::AtUpper => self.upper[j].is_finite(),
            VarStatus::Zero => !self.lower[j].is_finite() && !self.upper[j].is_finite(),
        };
        if !ok {
            self.status[j] = self.cold_status(j);
        }
    }

    pub fn set_row_bounds(&mut self, row: usize, lower: f64, upper: f64) {
        let j = self.sh.n + row;
        self.lower[j] = lower;
        self.upper[j] = upper;
        self.repair_status(j);
    }

    pub fn set_col_bounds(&mut self, col: usize, lower: f64, upper: f64) {
        self.lower[col] = lower;
        self.upper[col] = upper;
        self.repair_status(col);
    }

    pub fn basis(&self) -> Basis {
        Basis {
            status: self.status.clone(),
        }
    }

    pub fn load_basis(&mut self, basis: &Basis) -> Result<()> {
        let (n, m) = (self.sh.n, self.sh.m);
        if basis.status.len() != n + m {
            return Err(Error::Dimension {
                what: "basis length",
                expected: n + m,
                got: basis.status.len(),
            });
        }
        let head: Vec<usize> = (0..n + m).filter(|&j| basis.status[j] == VarStatus::Basic).collect();
        if head.len() != m {
            return Err(Error::invalid(format!(
                "basis has {} basic variables, expected {m}",
                head.len()
            )));
        }
        self.status = basis.status.clone();
        self.head = head;
        for j in 0..n + m {
            self.repair_status(j);
        }
        self.lu = None;
        Ok(())
    }

    fn column(&self, j: usize, rows: &mut Vec<usize>, vals: &mut Vec<f64>) {
        if j < self.sh.n {
            let (r, v) = self.sh.a.col(j);
            rows.extend_from_slice(r);
            vals.extend_from_slice(v);
        } else {
            rows.push(j - self.sh.n);
            vals.push(-1.0);
        }
    }

    fn scatter_column(&mut self, j: usize) {
        self.col.iter_mut().for_each(|v| *v = 0.0);
        if j < self.sh.n {
            let (r, v) = self.sh.a.col(j);
            for (i, a) in r.iter().zip(v) {
                self.col[*i] = *a;
            }
        } else {
            self.col[j - self.sh.n] = -1.0;
        }
    }

    fn refactor(&mut self) {
        let (lu, repairs) = {
            let head = &self.head;
            LuFactor::factor(self.sh.m, |k, r, v| self.column(head[k], r, v))
        };
        self.diag.refactorizations += 1;
        if !repairs.is_empty() {
            log::warn!(
                "basis is numerically singular: {} column(s) replaced by logicals",
                repairs.len()
            );
            self.diag.singular_repairs += repairs.len();
            for (pos, row) in repairs {
                let old = self.head[pos];
                let new = self.sh.n + row;
                self.head[pos] = new;
                self.status[new] = VarStatus::Basic;
                self.status[old] = self.nearest_bound(old);
            }
        }
        self.lu = Some(lu);
    }

    fn nearest_bound(&self, j: usize) -> VarStatus {
        let (lo, hi, v) = (self.lower[j], self.upper[j], self.x[j]);
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => {
                if (v - lo).abs() <= (hi - v).abs() {
                    VarStatus::AtLower
                } else {
                    VarStatus::AtUpper
                }
            }
            (true, false) => VarStatus::AtLower,
            (false, true) => VarStatus::AtUpper,
            (false, false) => VarStatus::Zero,
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.status[j] {
            VarStatus::AtLower => self.lower[j],
            VarStatus::AtUpper => self.upper[j],
            VarStatus::Zero => 0.0,
            VarStatus::Basic => self.x[j],
        }
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.lower[j] == self.upper[j]
    }

    fn compute_primal(&mut self) {
        let n = self.sh.n;
        self.col.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..n + self.sh.m {
            if self.status[j] == VarStatus::Basic {
                continue;
            }
            let v = self.nonbasic_value(j);
            self.x[j] = v;
            if v == 0.0 {
                continue;
            }
            if j < n {
                let (r, a) = self.sh.a.col(j);
                for (i, aij) in r.iter().zip(a) {
                    self.col[*i] -= aij * v;
                }
            } else {
                self.col[j - n] += v;
            }
        }
        let lu = self.lu.as_ref().expect("factorised");
        lu.ftran(&mut self.col, &mut self.work);
        for (pos, &j) in self.head.iter().enumerate() {
            self.x[j] = self.col[pos];
        }
    }

    /// `y = B^-T c_B` and `d = c - [A -I]' y` for the given basic costs.
    fn compute_duals_with(&mut self, basic_cost: impl Fn(&Self, usize) -> f64, phase_one: bool) {
        for pos in 0..self.sh.m {
            self.rho[pos] = basic_cost(self, pos);
        }
        let lu = self.lu.as_ref().expect("factorised");
        lu.btran(&mut self.rho, &mut self.work);
        self.y.copy_from_slice(&self.rho);
        let n = self.sh.n;
        for j in 0..n + self.sh.m {
            if self.status[j] == VarStatus::Basic {
                self.d[j] = 0.0;
                continue;
            }
            let c = if phase_one { 0.0 } else { self.sh.cost[j] };
            self.d[j] = if j < n {
                let (r, a) = self.sh.a.col(j);
                c - r.iter().zip(a).map(|(i, v)| self.y[*i] * v).sum::<f64>()
            } else {
                c + self.y[j - n]
            };
        }
    }

    fn compute_duals(&mut self) {
        self.compute_duals_with(|s, pos| s.sh.cost[s.head[pos]], false);
    }

    fn primal_infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        (self.lower[j] - v).max(v - self.upper[j]).max(0.0)
    }

    fn max_primal_infeasibility(&self) -> f64 {
        self.head.iter().fold(0.0, |m, &j| m.max(self.primal_infeasibility(j)))
    }

    fn dual_infeasibility(&self, j: usize) -> f64 {
        if self.is_fixed(j) {
            return 0.0;
        }
        let d = self.d[j];
        match self.status[j] {
            VarStatus::Basic => 0.0,
            VarStatus::AtLower => (-d).max(0.0),
            VarStatus::AtUpper => d.max(0.0),
            VarStatus::Zero => d.abs(),
        }
    }

    fn max_dual_infeasibility(&self) -> f64 {
        (0..self.sh.n + self.sh.m).fold(0.0, |m, j| m.max(self.dual_infeasibility(j)))
    }

    /// Moves boxed nonbasic variables to the bound their reduced cost
    /// prefers. Returns true if any moved.
    fn flip_to_dual_feasible(&mut self) -> bool {
        let tol = self.opts.opt_tol;
        let mut moved = false;
        for j in 0..self.sh.n + self.sh.m {
            if !(self.lower[j].is_finite() && self.upper[j].is_finite()) || self.is_fixed(j) {
                continue;
            }
            match self.status[j] {
                VarStatus::AtLower if self.d[j] < -tol => {
                    self.status[j] = VarStatus::AtUpper;
                    moved = true;
                }
                VarStatus::AtUpper if self.d[j] > tol => {
                    self.status[j] = VarStatus::AtLower;
                    moved = true;
                }
                _ => {}
            }
        }
        moved
    }

    fn refresh(&mut self) {
        self.refactor();
        self.compute_primal();
        self.compute_duals();
    }

    /// Solves from the current basis and returns the status only; use
    /// [`Solver::objective`] and friends to read the result.
    pub fn run(&mut self) -> Result<LpStatus> {
        self.diag = LpDiagnostics::default();
        if self.lu.is_none() {
            self.refactor();
        }
        self.compute_primal();
        self.compute_duals();
        let mut status = LpStatus::Optimal;
        for _round in 0..5 {
            if self.flip_to_dual_feasible() {
                self.compute_primal();
            }
            status = if self.max_dual_infeasibility() <= self.opts.opt_tol {
                self.dual_simplex()?
            } else {
                self.primal_simplex()?
            };
            if status != LpStatus::Optimal {
                break;
            }
            if self.lu.as_ref().is_some_and(|lu| lu.eta_count() > 0) {
                self.refresh();
            }
            if self.max_primal_infeasibility() <= self.opts.feas_tol
                && self.max_dual_infeasibility() <= self.opts.opt_tol
            {
                break;
            }
        }
        self.diag.max_primal_infeasibility = self.max_primal_infeasibility();
        self.diag.max_dual_infeasibility = self.max_dual_infeasibility();
        Ok(status)
    }

    /// Solves and packages the full result.
    pub fn solve(&mut self) -> Result<LpSolution> {
        let status = self.run()?;
        Ok(self.solution(status))
    }

    pub fn objective(&self) -> f64 {
        let n = self.sh.n;
        self.sh.offset
            + self.sh.cost[..n]
                .iter()
                .zip(&self.x[..n])
                .map(|(c, v)| c * v)
                .sum::<f64>()
    }

    pub fn primal(&self) -> &[f64] {
        &self.x[..self.sh.n]
    }

    pub fn diagnostics(&self) -> &LpDiagnostics {
        &self.diag
    }

    pub fn solution(&self, status: LpStatus) -> LpSolution {
        let n = self.sh.n;
        let x = self.x[..n].to_vec();
        LpSolution {
            status,
            objective: self.objective(),
            row_activity: self.sh.a.mul_vec(&x),
            x,
            row_duals: self.y.clone(),
            reduced_costs: self.d[..n].to_vec(),
            basis: self.basis(),
            diagnostics: self.diag.clone(),
        }
    }

    fn maybe_refactor(&mut self) -> bool {
        if self
            .lu
            .as_ref()
            .is_some_and(|lu| lu.wants_refactor(self.opts.refactor_interval))
        {
            self.refresh();
            true
        } else {
            false
        }
    }

    /// Pivot row `alpha_r = rho' [A -I]` over nonbasic, non-fixed columns.
    fn compute_pivot_row(&mut self) {
        for &j in &self.touched {
            self.alpha_row[j] = 0.0;
            self.marked[j] = false;
        }
        self.touched.clear();
        let n = self.sh.n;
        for i in 0..self.sh.m {
            let r = self.rho[i];
            if r == 0.0 {
                continue;
            }
            let (cols, vals) = self.sh.at.col(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if !self.marked[j] {
                    self.marked[j] = true;
                    self.touched.push(j);
                }
                self.alpha_row[j] += r * v;
            }
            let j = n + i;
            if !self.marked[j] {
                self.marked[j] = true;
                self.touched.push(j);
            }
            self.alpha_row[j] -= r;
        }
        self.touched.sort_unstable();
    }

    fn dual_simplex(&mut self) -> Result<LpStatus> {
        let mut recoveries = 0;
        loop {
            if self.diag.iterations >= self.opts.max_iterations {
                return Ok(LpStatus::IterationLimit);
            }
            if self.maybe_refactor() && self.max_dual_infeasibility() > self.opts.opt_tol {
                return Ok(LpStatus::Optimal); // caller re-checks and falls back to primal
            }
            match self.dual_iteration()? {
                Some(Step::Done(st)) => return Ok(st),
                Some(Step::Continue) => {}
                None => {
                    recoveries += 1;
                    if recoveries > 5 {
                        return Err(Error::numerical("dual simplex: repeated pivot inconsistency"));
                    }
                    self.refresh();
                }
            }
        }
    }

    /// One dual iteration. `None` signals numerical trouble.
    fn dual_iteration(&mut self) -> Result<Option<Step>> {
        let tol = self.opts.feas_tol;
        let mut r = NONE;
        let mut worst = tol;
        for (pos, &j) in self.head.iter().enumerate() {
            let inf = self.primal_infeasibility(j);
            if inf > worst {
                worst = inf;
                r = pos;
            }
        }
        if r == NONE {
            return Ok(Some(Step::Done(LpStatus::Optimal)));
        }
        let p = self.head[r];
        let to_lower = self.x[p] < self.lower[p];
        let sign = if to_lower { -1.0 } else { 1.0 };

        self.rho.iter_mut().for_each(|v| *v = 0.0);
        self.rho[r] = 1.0;
        self.lu
            .as_ref()
            .expect("factorised")
            .btran(&mut self.rho, &mut self.work);
        self.compute_pivot_row();

        // Harris two-pass ratio test on the reduced costs.
        let dtol = self.opts.opt_tol;
        let mut bound = f64::INFINITY;
        for &j in &self.touched {
            if self.status[j] == VarStatus::Basic || self.is_fixed(j) {
                continue;
            }
            let a = sign * self.alpha_row[j];
            let d = self.d[j];
            let st = self.status[j];
            if a > PIVOT_TOL && st != VarStatus::AtUpper {
                bound = bound.min((d.max(0.0) + dtol) / a);
            } else if a < -PIVOT_TOL && st != VarStatus::AtLower {
                bound = bound.min((d.min(0.0) - dtol) / a);
            }
        }
        if bound == f64::INFINITY {
            return Ok(Some(Step::Done(LpStatus::Infeasible)));
        }
        let mut q = NONE;
        let mut best = 0.0;
        for &j in &self.touched {
            if self.status[j] == VarStatus::Basic || self.is_fixed(j) {
                continue;
            }
            let a = sign * self.alpha_row[j];
            let st = self.status[j];
            let eligible = (a > PIVOT_TOL && st != VarStatus::AtUpper) || (a < -PIVOT_TOL && st != VarStatus::AtLower);
            if eligible && self.d[j] / a <= bound && a.abs() > best {
                best = a.abs();
                q = j;
            }
        }
        if q == NONE {
            return Ok(Some(Step::Done(LpStatus::Infeasible)));
        }

        self.scatter_column(q);
        self.lu
            .as_ref()
            .expect("factorised")
            .ftran(&mut self.col, &mut self.work);
        let arq = self.col[r];
        let arq_row = self.alpha_row[q];
        if (arq - arq_row).abs() > 1e-7 * (1.0 + arq.abs()) || arq.abs() < PIVOT_TOL {
            return Ok(None);
        }

        let theta = self.d[q] / arq_row;
        for &j in &self.touched {
            if self.status[j] != VarStatus::Basic {
                self.d[j] -= theta * self.alpha_row[j];
            }
        }
        self.d[q] = 0.0;
        self.d[p] = -theta;

        let target = if to_lower { self.lower[p] } else { self.upper[p] };
        let tp = (self.x[p] - target) / arq;
        for (pos, &j) in self.head.iter().enumerate() {
            self.x[j] -= tp * self.col[pos];
        }
        self.x[q] += tp;
        self.x[p] = target;

        self.lu.as_mut().expect("factorised").update(r, &self.col);
        self.head[r] = q;
        self.status[q] = VarStatus::Basic;
        self.status[p] = if to_lower {
            VarStatus::AtLower
        } else {
            VarStatus::AtUpper
        };
        self.diag.iterations += 1;
        self.diag.dual_iterations += 1;
        Ok(Some(Step::Continue))
    }

    fn primal_simplex(&mut self) -> Result<LpStatus> {
        let mut stall = 0usize;
        let mut recoveries = 0;
        loop {
            if self.diag.iterations >= self.opts.max_iterations {
                return Ok(LpStatus::IterationLimit);
            }
            self.maybe_refactor();
            let bland = stall > self.opts.stall_limit;
            match self.primal_iteration(bland)? {
                Some((Step::Done(st), _)) => return Ok(st),
                Some((Step::Continue, degenerate)) => {
                    stall = if degenerate { stall + 1 } else { 0 };
                }
                None => {
                    recoveries += 1;
                    if recoveries > 5 {
                        return Err(Error::numerical("primal simplex: no blocking variable in phase one"));
                    }
                    self.refresh();
                }
            }
        }
    }

    fn primal_iteration(&mut self, bland: bool) -> Result<Option<(Step, bool)>> {
        let ftol = self.opts.feas_tol;
        let phase_one = self.max_primal_infeasibility() > ftol;
        if phase_one {
            self.compute_duals_with(
                |s, pos| {
                    let j = s.head[pos];
                    if s.x[j] < s.lower[j] - ftol {
                        -1.0
                    } else if s.x[j] > s.upper[j] + ftol {
                        1.0
                    } else {
                        0.0
                    }
                },
                true,
            );
        } else {
            self.compute_duals();
        }

        let dtol = self.opts.opt_tol;
        let mut q = NONE;
        let mut best = 0.0;
        for j in 0..self.sh.n + self.sh.m {
            if self.status[j] == VarStatus::Basic || self.is_fixed(j) {
                continue;
            }
            let d = self.d[j];
            let eligible = match self.status[j] {
                VarStatus::AtLower => d < -dtol,
                VarStatus::AtUpper => d > dtol,
                VarStatus::Zero => d.abs() > dtol,
                VarStatus::Basic => false,
            };
            if !eligible {
                continue;
            }
            if bland {
                q = j;
                break;
            }
            if d.abs() > best {
                best = d.abs();
                q = j;
            }
        }
        if q == NONE {
            let st = if phase_one {
                LpStatus::Infeasible
            } else {
                LpStatus::Optimal
            };
            if phase_one {
                self.compute_duals();
            }
            return Ok(Some((Step::Done(st), false)));
        }
        let dir = if self.d[q] < 0.0 { 1.0 } else { -1.0 };

        self.scatter_column(q);
        self.lu
            .as_ref()
            .expect("factorised")
            .ftran(&mut self.col, &mut self.work);

        // Blocking candidates: (position, exact step, target value, rate).
        let mut tmax = f64::INFINITY;
        let flip = self.upper[q] - self.lower[q];
        if flip.is_finite() {
            tmax = flip;
        }
        let blocking = |s: &Self, pos: usize| -> Option<(f64, f64, f64)> {
            let a = s.col[pos];
            if a.abs() <= PIVOT_TOL {
                return None;
            }
            let rate = -dir * a;
            let j = s.head[pos];
            let (xi, lo, hi) = (s.x[j], s.lower[j], s.upper[j]);
            if rate < 0.0 {
                if xi > hi + ftol {
                    Some(((hi - xi) / rate, hi, 0.0))
                } else if xi >= lo - ftol && lo.is_finite() {
                    Some((((lo - xi) / rate).max(0.0), lo, ftol))
                } else {
                    None
                }
            } else if xi < lo - ftol {
                Some(((lo - xi) / rate, lo, 0.0))
            } else if xi <= hi + ftol && hi.is_finite() {
                Some((((hi - xi) / rate).max(0.0), hi, ftol))
            } else {
                None
            }
        };
        for pos in 0..self.sh.m {
            if let Some((step, _, slack)) = blocking(self, pos) {
                tmax = tmax.min(step + slack / (self.col[pos].abs()));
            }
        }
        let mut r = NONE;
        let mut r_step = 0.0;
        let mut r_target = 0.0;
        let mut best_rate = 0.0;
        for pos in 0..self.sh.m {
            if let Some((step, target, _)) = blocking(self, pos) {
                let rate = self.col[pos].abs();
                let better = if bland {
                    r == NONE || step < r_step || (step == r_step && self.head[pos] < self.head[r])
                } else {
                    rate > best_rate
                };
                if step <= tmax && better {
                    best_rate = rate;
                    r = pos;
                    r_step = step;
                    r_target = target;
                }
            }
        }
        if r == NONE && !flip.is_finite() {
            if phase_one {
                return Ok(None);
            }
            return Ok(Some((Step::Done(LpStatus::Unbounded), false)));
        }

        self.diag.iterations += 1;
        self.diag.primal_iterations += 1;
        if r == NONE || flip <= r_step {
            // Entering variable runs to its other bound; the basis is unchanged.
            for (pos, &j) in self.head.iter().enumerate() {
                self.x[j] -= dir * flip * self.col[pos];
            }
            self.status[q] = if dir > 0.0 {
                VarStatus::AtUpper
            } else {
                VarStatus::AtLower
            };
            self.x[q] = self.nonbasic_value(q);
            return Ok(Some((Step::Continue, false)));
        }

        let t = r_step;
        for (pos, &j) in self.head.iter().enumerate() {
            self.x[j] -= dir * t * self.col[pos];
        }
        self.x[q] += dir * t;
        let p = self.head[r];
        self.x[p] = r_target;
        self.lu.as_mut().expect("factorised").update(r, &self.col);
        self.head[r] = q;
        self.status[q] = VarStatus::Basic;
        self.status[p] = if r_target == self.lower[p] {
            VarStatus::AtLower
        } else {
            VarStatus::AtUpper
        };
        Ok(Some((Step::Continue, t <= 1e-12)))
    }
}
