//! Bounded-variable primal simplex on a sparse column representation.
//!
//! Constraints are turned into equalities with one slack column per row;
//! the slack bounds encode the sense (`<=` -> [0, inf), `>=` -> (-inf, 0],
//! `=` -> [0, 0]). The basis inverse is kept in product form (a list of
//! eta columns) and refactorized periodically. Phase 1 minimizes the sum
//! of bound infeasibilities with composite costs; both phases fall back to
//! Bland's rule when no progress is made, which guarantees termination.

use crate::milp::{MilpModel, ObjSense, Sense};

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { objective: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

#[derive(Debug, thiserror::Error)]
pub enum LpError {
    #[error("singular basis: {0}")]
    SingularBasis(String),
    #[error("iteration limit exceeded ({0} iterations)")]
    IterationLimit(usize),
}

/// An immutable standardized LP built once per model; per-call variable
/// bounds make it reusable across branch-and-bound nodes.
pub struct LpInstance {
    pub nstruct: usize,
    nrows: usize,
    /// Structural columns, row-scaled: per column a list of (row, value).
    cols: Vec<Vec<(u32, f64)>>,
    /// Minimization costs for structural columns.
    cost: Vec<f64>,
    /// Row scale factors applied to both matrix entries and the rhs.
    rhs: Vec<f64>,
    /// Slack bounds per row, from the constraint sense.
    slack_lo: Vec<f64>,
    slack_hi: Vec<f64>,
    /// +1 when the user objective maximizes (results are negated back).
    obj_flip: f64,
}

impl LpInstance {
    pub fn from_model(model: &MilpModel) -> Self {
        let nstruct = model.num_vars();
        let constraints = model.constraints();
        let nrows = constraints.len();
        let mut cols: Vec<Vec<(u32, f64)>> = vec![Vec::new(); nstruct];
        let mut rhs = Vec::with_capacity(nrows);
        let mut slack_lo = Vec::with_capacity(nrows);
        let mut slack_hi = Vec::with_capacity(nrows);
        for (r, c) in constraints.iter().enumerate() {
            let scale = c
                .terms
                .iter()
                .map(|&(v, _)| v.abs())
                .fold(0.0f64, f64::max)
                .max(1e-300);
            for &(coef, var) in &c.terms {
                cols[var as usize].push((r as u32, coef / scale));
            }
            rhs.push(c.rhs / scale);
            let (lo, hi) = match c.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            slack_lo.push(lo);
            slack_hi.push(hi);
        }
        let (obj, sense) = model.objective();
        let obj_flip = match sense {
            ObjSense::Maximize => -1.0,
            ObjSense::Minimize => 1.0,
        };
        let mut cost = vec![0.0; nstruct];
        for &(c, v) in obj {
            cost[v as usize] = obj_flip * c;
        }
        Self { nstruct, nrows, cols, cost, rhs, slack_lo, slack_hi, obj_flip }
    }

    pub fn num_rows(&self) -> usize {
        self.nrows
    }

    /// Solves with the given structural bounds. Slack bounds are fixed by
    /// the constraint senses.
    pub fn solve(&self, lo: &[f64], hi: &[f64], feas_tol: f64) -> Result<LpOutcome, LpError> {
        debug_assert_eq!(lo.len(), self.nstruct);
        debug_assert_eq!(hi.len(), self.nstruct);
        for j in 0..self.nstruct {
            if lo[j] > hi[j] {
                return Ok(LpOutcome::Infeasible);
            }
        }
        let mut state = Simplex::new(self, lo, hi, feas_tol);
        match state.run()? {
            RawStatus::Optimal => {
                let mut x = state.x;
                x.truncate(self.nstruct);
                for (j, v) in x.iter_mut().enumerate() {
                    *v = v.clamp(lo[j], hi[j]);
                }
                let raw: f64 = self.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
                Ok(LpOutcome::Optimal { objective: self.obj_flip * raw, x })
            }
            RawStatus::Infeasible => Ok(LpOutcome::Infeasible),
            RawStatus::Unbounded => Ok(LpOutcome::Unbounded),
        }
    }
}

enum RawStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColStatus {
    Basic(u32),
    AtLo,
    AtHi,
    Free,
}

struct Eta {
    pivot: u32,
    entries: Vec<(u32, f64)>,
}

/// Scatter workspace with epoch-stamped sparsity tracking.
struct Workspace {
    vals: Vec<f64>,
    stamp: Vec<u32>,
    epoch: u32,
    touched: Vec<u32>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self { vals: vec![0.0; n], stamp: vec![0; n], epoch: 0, touched: Vec::new() }
    }

    fn reset(&mut self) {
        self.epoch += 1;
        self.touched.clear();
    }

    fn get(&self, i: u32) -> f64 {
        if self.stamp[i as usize] == self.epoch {
            self.vals[i as usize]
        } else {
            0.0
        }
    }

    fn set(&mut self, i: u32, v: f64) {
        if self.stamp[i as usize] != self.epoch {
            self.stamp[i as usize] = self.epoch;
            self.touched.push(i);
        }
        self.vals[i as usize] = v;
    }

    fn add(&mut self, i: u32, v: f64) {
        let cur = self.get(i);
        self.set(i, cur + v);
    }
}

struct Simplex<'a> {
    inst: &'a LpInstance,
    ncols: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    status: Vec<ColStatus>,
    basis: Vec<u32>,
    x: Vec<f64>,
    etas: Vec<Eta>,
    ws: Workspace,
    feas_tol: f64,
    bland: bool,
    iterations: usize,
}

const REFRESH_INTERVAL: usize = 96;
const PIVOT_TOL: f64 = 1e-8;

impl<'a> Simplex<'a> {
    fn new(inst: &'a LpInstance, struct_lo: &[f64], struct_hi: &[f64], feas_tol: f64) -> Self {
        let ncols = inst.nstruct + inst.nrows;
        let mut lo = Vec::with_capacity(ncols);
        let mut hi = Vec::with_capacity(ncols);
        lo.extend_from_slice(struct_lo);
        hi.extend_from_slice(struct_hi);
        lo.extend_from_slice(&inst.slack_lo);
        hi.extend_from_slice(&inst.slack_hi);

        let mut status = Vec::with_capacity(ncols);
        let mut x = vec![0.0; ncols];
        for j in 0..inst.nstruct {
            let (l, h) = (lo[j], hi[j]);
            let st = if l.is_finite() && (!h.is_finite() || l.abs() <= h.abs()) {
                x[j] = l;
                ColStatus::AtLo
            } else if h.is_finite() {
                x[j] = h;
                ColStatus::AtHi
            } else {
                x[j] = 0.0;
                ColStatus::Free
            };
            status.push(st);
        }
        let mut basis = Vec::with_capacity(inst.nrows);
        for r in 0..inst.nrows {
            let j = inst.nstruct + r;
            status.push(ColStatus::Basic(r as u32));
            basis.push(j as u32);
        }
        let ws = Workspace::new(inst.nrows.max(1));
        let mut s = Self {
            inst,
            ncols,
            lo,
            hi,
            status,
            basis,
            x,
            etas: Vec::new(),
            ws,
            feas_tol,
            bland: false,
            iterations: 0,
        };
        s.recompute_basics();
        s
    }

    fn column(&self, j: usize) -> ColumnRef<'_> {
        if j < self.inst.nstruct {
            ColumnRef::Struct(&self.inst.cols[j])
        } else {
            ColumnRef::Slack((j - self.inst.nstruct) as u32)
        }
    }

    fn cost(&self, j: usize) -> f64 {
        if j < self.inst.nstruct {
            self.inst.cost[j]
        } else {
            0.0
        }
    }

    /// Rebuilds the eta file from the current basis and recomputes basic
    /// variable values exactly.
    fn refactorize(&mut self) -> Result<(), LpError> {
        self.etas.clear();
        let m = self.inst.nrows;
        if m == 0 {
            return Ok(());
        }
        // Install basis columns in increasing-nnz order; partial pivoting
        // over rows not yet assigned a pivot.
        let mut order: Vec<u32> = (0..m as u32).collect();
        let nnz = |r: usize| -> usize {
            match self.column(self.basis[r] as usize) {
                ColumnRef::Struct(c) => c.len(),
                ColumnRef::Slack(_) => 1,
            }
        };
        order.sort_by_key(|&r| (nnz(r as usize), r));
        let mut assigned = vec![false; m];
        let mut new_basis = self.basis.clone();
        for &slot in &order {
            let col = self.basis[slot as usize] as usize;
            self.ws.reset();
            if col < self.inst.nstruct {
                for &(r, v) in &self.inst.cols[col] {
                    self.ws.set(r, v);
                }
            } else {
                self.ws.set((col - self.inst.nstruct) as u32, 1.0);
            }
            apply_etas(&self.etas, &mut self.ws);
            let mut best: Option<(u32, f64)> = None;
            for &r in &self.ws.touched.clone() {
                if assigned[r as usize] {
                    continue;
                }
                let v = self.ws.get(r).abs();
                if v > best.map_or(0.0, |(_, b)| b) {
                    best = Some((r, v));
                }
            }
            let (pivot, mag) = best.ok_or_else(|| {
                LpError::SingularBasis(format!("no pivot for basis column {col}"))
            })?;
            if mag < 1e-11 {
                return Err(LpError::SingularBasis(format!(
                    "pivot magnitude {mag} for basis column {col}"
                )));
            }
            assigned[pivot as usize] = true;
            new_basis[pivot as usize] = col as u32;
            let mut entries: Vec<(u32, f64)> = self
                .ws
                .touched
                .iter()
                .map(|&r| (r, self.ws.get(r)))
                .filter(|&(_, v)| v != 0.0)
                .collect();
            entries.sort_by_key(|&(r, _)| r);
            self.etas.push(Eta { pivot, entries });
        }
        for (r, &col) in new_basis.iter().enumerate() {
            self.status[col as usize] = ColStatus::Basic(r as u32);
        }
        self.basis = new_basis;
        self.recompute_basics();
        Ok(())
    }

    /// Recomputes x_B = B^-1 (b - N x_N) through the current eta file.
    fn recompute_basics(&mut self) {
        let m = self.inst.nrows;
        if m == 0 {
            return;
        }
        let mut rhs = self.inst.rhs.clone();
        for j in 0..self.ncols {
            if matches!(self.status[j], ColStatus::Basic(_)) {
                continue;
            }
            let xj = self.x[j];
            if xj == 0.0 {
                continue;
            }
            match self.column(j) {
                ColumnRef::Struct(entries) => {
                    for &(r, v) in entries {
                        rhs[r as usize] -= v * xj;
                    }
                }
                ColumnRef::Slack(r) => rhs[r as usize] -= xj,
            }
        }
        self.ws.reset();
        for (r, &v) in rhs.iter().enumerate() {
            if v != 0.0 {
                self.ws.set(r as u32, v);
            }
        }
        apply_etas(&self.etas, &mut self.ws);
        for r in 0..m {
            self.x[self.basis[r] as usize] = self.ws.get(r as u32);
        }
    }

    /// y = B^-T c_B via the transposed eta file in reverse.
    fn btran(&self, cb: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let p = eta.pivot as usize;
            let mut acc = 0.0;
            let mut wp = 1.0;
            for &(r, v) in &eta.entries {
                if r as usize == p {
                    wp = v;
                } else {
                    acc += v * cb[r as usize];
                }
            }
            cb[p] = (cb[p] - acc) / wp;
        }
    }

    /// w = B^-1 a_j into the workspace.
    fn ftran_column(&mut self, j: usize) {
        self.ws.reset();
        if j < self.inst.nstruct {
            for &(r, v) in &self.inst.cols[j] {
                self.ws.set(r, v);
            }
        } else {
            self.ws.set((j - self.inst.nstruct) as u32, 1.0);
        }
        apply_etas(&self.etas, &mut self.ws);
    }

    fn phase1_cost(&self, col: u32) -> f64 {
        let j = col as usize;
        let v = self.x[j];
        if v < self.lo[j] - self.feas_tol {
            -1.0
        } else if v > self.hi[j] + self.feas_tol {
            1.0
        } else {
            0.0
        }
    }

    fn infeasibility(&self) -> f64 {
        let mut total = 0.0;
        for r in 0..self.inst.nrows {
            let j = self.basis[r] as usize;
            let v = self.x[j];
            if v < self.lo[j] {
                total += self.lo[j] - v;
            } else if v > self.hi[j] {
                total += v - self.hi[j];
            }
        }
        total
    }

    fn run(&mut self) -> Result<RawStatus, LpError> {
        self.refactorize()?;
        // Alternate phases; a phase-2 round that drifts out of feasibility
        // (numerical noise between refactorizations) sends us back to
        // phase 1 a bounded number of times.
        for _attempt in 0..4 {
            if self.infeasibility() > self.feas_tol {
                match self.iterate(true)? {
                    PhaseEnd::Converged => {
                        self.refactorize()?;
                        if self.infeasibility() > self.feas_tol * 16.0 {
                            continue;
                        }
                    }
                    PhaseEnd::Stuck => return Ok(RawStatus::Infeasible),
                    PhaseEnd::Unbounded => {
                        return Err(LpError::SingularBasis("unbounded phase-1 direction".into()))
                    }
                }
            }
            match self.iterate(false)? {
                PhaseEnd::Converged | PhaseEnd::Stuck => {
                    self.refactorize()?;
                    if self.infeasibility() > self.feas_tol * 16.0 {
                        continue;
                    }
                    return Ok(RawStatus::Optimal);
                }
                PhaseEnd::Unbounded => return Ok(RawStatus::Unbounded),
            }
        }
        Err(LpError::SingularBasis("failed to converge to a feasible optimum".into()))
    }

    fn iterate(&mut self, phase1: bool) -> Result<PhaseEnd, LpError> {
        let m = self.inst.nrows;
        let limit = 200 * (self.ncols + m) + 20_000;
        let mut since_refresh = 0usize;
        let mut stall = 0usize;
        let mut small_pivot_retries = 0usize;
        let mut last_merit = if phase1 { self.infeasibility() } else { self.objective_min() };
        self.bland = false;
        loop {
            self.iterations += 1;
            if self.iterations > limit {
                return Err(LpError::IterationLimit(self.iterations));
            }
            if phase1 && self.infeasibility() <= self.feas_tol {
                return Ok(PhaseEnd::Converged);
            }

            // Duals for the phase costs of the basic columns.
            let mut y = vec![0.0; m];
            for r in 0..m {
                y[r] = if phase1 {
                    self.phase1_cost(self.basis[r])
                } else {
                    self.cost(self.basis[r] as usize)
                };
            }
            self.btran(&mut y);

            let entering = self.price(&y, phase1);
            let Some((q, dir)) = entering else {
                return if phase1 {
                    if self.infeasibility() <= self.feas_tol {
                        Ok(PhaseEnd::Converged)
                    } else {
                        Ok(PhaseEnd::Stuck)
                    }
                } else {
                    Ok(PhaseEnd::Converged)
                };
            };

            self.ftran_column(q);
            let step = self.ratio_test(q, dir);
            match step {
                Step::Unbounded => return Ok(PhaseEnd::Unbounded),
                Step::BoundFlip { theta } => {
                    self.apply_step(q, dir, theta);
                    self.status[q] = match self.status[q] {
                        ColStatus::AtLo => ColStatus::AtHi,
                        ColStatus::AtHi => ColStatus::AtLo,
                        other => other,
                    };
                    self.x[q] = match self.status[q] {
                        ColStatus::AtLo => self.lo[q],
                        ColStatus::AtHi => self.hi[q],
                        _ => self.x[q],
                    };
                }
                Step::Pivot { theta, row, to_upper } => {
                    let wp = self.ws.get(row);
                    if wp.abs() < PIVOT_TOL && small_pivot_retries < 3 {
                        // Numerically fragile pivot: refactorize and retry;
                        // accept it if a clean factorization reproduces it.
                        small_pivot_retries += 1;
                        self.refactorize()?;
                        since_refresh = 0;
                        continue;
                    }
                    small_pivot_retries = 0;
                    self.apply_step(q, dir, theta);
                    let leaving = self.basis[row as usize] as usize;
                    self.status[leaving] = if to_upper { ColStatus::AtHi } else { ColStatus::AtLo };
                    self.x[leaving] = if to_upper { self.hi[leaving] } else { self.lo[leaving] };
                    self.basis[row as usize] = q as u32;
                    self.status[q] = ColStatus::Basic(row);
                    let mut entries: Vec<(u32, f64)> = self
                        .ws
                        .touched
                        .iter()
                        .map(|&r| (r, self.ws.get(r)))
                        .filter(|&(_, v)| v != 0.0)
                        .collect();
                    entries.sort_by_key(|&(r, _)| r);
                    self.etas.push(Eta { pivot: row, entries });
                    since_refresh += 1;
                    if since_refresh >= REFRESH_INTERVAL {
                        self.refactorize()?;
                        since_refresh = 0;
                    }
                }
            }

            let merit = if phase1 { self.infeasibility() } else { self.objective_min() };
            if merit < last_merit - 1e-12 * (1.0 + last_merit.abs()) {
                last_merit = merit;
                stall = 0;
                self.bland = false;
            } else {
                stall += 1;
                if stall > 2 * (m + 16) {
                    self.bland = true;
                }
            }
        }
    }

    fn objective_min(&self) -> f64 {
        (0..self.inst.nstruct).map(|j| self.inst.cost[j] * self.x[j]).sum()
    }

    /// Chooses the entering column and its direction of motion.
    fn price(&self, y: &[f64], phase1: bool) -> Option<(usize, f64)> {
        let dj_tol = 1e-9;
        let mut best: Option<(usize, f64, f64)> = None; // (col, dir, |d|)
        for j in 0..self.ncols {
            let st = self.status[j];
            if matches!(st, ColStatus::Basic(_)) {
                continue;
            }
            if self.lo[j] == self.hi[j] {
                continue; // fixed columns never move
            }
            let cj = if phase1 { 0.0 } else { self.cost(j) };
            let mut d = cj;
            match self.column(j) {
                ColumnRef::Struct(entries) => {
                    for &(r, v) in entries {
                        d -= v * y[r as usize];
                    }
                }
                ColumnRef::Slack(r) => d -= y[r as usize],
            }
            let dir = match st {
                ColStatus::AtLo if d < -dj_tol => 1.0,
                ColStatus::AtHi if d > dj_tol => -1.0,
                ColStatus::Free if d < -dj_tol => 1.0,
                ColStatus::Free if d > dj_tol => -1.0,
                _ => continue,
            };
            if self.bland {
                return Some((j, dir));
            }
            let score = d.abs();
            if best.map_or(true, |(_, _, s)| score > s) {
                best = Some((j, dir, score));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    /// First-breakpoint ratio test over the FTRANed entering column.
    fn ratio_test(&self, q: usize, dir: f64) -> Step {
        let tol = self.feas_tol;
        let mut theta = match (self.lo[q].is_finite(), self.hi[q].is_finite()) {
            (true, true) => self.hi[q] - self.lo[q],
            _ => f64::INFINITY,
        };
        let mut blocking: Option<(u32, bool, f64)> = None; // (row, to_upper, |w|)
        for &r in &self.ws.touched {
            let w = self.ws.get(r);
            if w.abs() < 1e-11 {
                continue;
            }
            let bj = self.basis[r as usize] as usize;
            let v = self.x[bj];
            let lo = self.lo[bj];
            let hi = self.hi[bj];
            let delta = -dir * w; // dv/dtheta
            let below = v < lo - tol;
            let above = v > hi + tol;
            let event: Option<(f64, bool)> = if below {
                if delta > 0.0 {
                    Some(((lo - v) / delta, false))
                } else {
                    None
                }
            } else if above {
                if delta < 0.0 {
                    Some(((hi - v) / delta, true))
                } else {
                    None
                }
            } else if delta > 0.0 && hi.is_finite() {
                Some((((hi - v).max(0.0)) / delta, true))
            } else if delta < 0.0 && lo.is_finite() {
                Some((((lo - v).min(0.0)) / delta, false))
            } else {
                None
            };
            if let Some((t, to_upper)) = event {
                let t = t.max(0.0);
                if t < theta - 1e-12 {
                    theta = t;
                    blocking = Some((r, to_upper, w.abs()));
                } else if t <= theta + 1e-12 {
                    // Tie: prefer the numerically largest pivot; under
                    // Bland's rule prefer the lowest leaving column index.
                    let replace = match blocking {
                        None => true,
                        Some((br, _, bw)) => {
                            if self.bland {
                                self.basis[r as usize] < self.basis[br as usize]
                            } else {
                                w.abs() > bw
                            }
                        }
                    };
                    if replace {
                        theta = theta.min(t);
                        blocking = Some((r, to_upper, w.abs()));
                    }
                }
            }
        }
        if theta.is_infinite() {
            return Step::Unbounded;
        }
        match blocking {
            None => Step::BoundFlip { theta },
            Some((row, to_upper, _)) => Step::Pivot { theta, row, to_upper },
        }
    }

    fn apply_step(&mut self, q: usize, dir: f64, theta: f64) {
        if theta != 0.0 {
            self.x[q] += dir * theta;
            for &r in &self.ws.touched {
                let w = self.ws.get(r);
                if w != 0.0 {
                    let bj = self.basis[r as usize] as usize;
                    self.x[bj] -= dir * theta * w;
                }
            }
        }
    }
}

enum PhaseEnd {
    Converged,
    Stuck,
    Unbounded,
}

enum Step {
    BoundFlip { theta: f64 },
    Pivot { theta: f64, row: u32, to_upper: bool },
    Unbounded,
}

enum ColumnRef<'a> {
    Struct(&'a [(u32, f64)]),
    Slack(u32),
}

fn apply_etas(etas: &[Eta], ws: &mut Workspace) {
    for eta in etas {
        let p = eta.pivot;
        let xp = ws.get(p);
        if xp == 0.0 {
            continue;
        }
        let mut wp = 1.0;
        for &(r, v) in &eta.entries {
            if r == p {
                wp = v;
                break;
            }
        }
        let scaled = xp / wp;
        ws.set(p, scaled);
        for &(r, v) in &eta.entries {
            if r != p {
                ws.add(r, -v * scaled);
            }
        }
    }
}
