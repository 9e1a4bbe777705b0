//! MBLP solving: branch-and-bound over the Boolean variables with an LP
//! relaxation per node, plus an exhaustive enumeration oracle for tiny
//! instances.
//!
//! The search is deterministic: fixed branching rules with lowest-index
//! tie-breaking, depth-first exploration with the rounded child first, and
//! no randomized components.

mod brute;
mod simplex;

pub use brute::brute_force_solve;
pub use simplex::{LpError, LpInstance, LpOutcome};

use crate::milp::{MilpModel, ObjSense, VarRef};
use std::time::Instant;
use thiserror::Error;

/// Integer feasibility tolerance: Boolean variables within this distance of
/// an integer are treated as integral and snapped on acceptance.
pub const INT_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("model is unbounded")]
    Unbounded,
    #[error("malformed model: {0}")]
    Malformed(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("too many Boolean variables for exhaustive search: {count} > {limit}")]
    TooManyBooleans { count: usize, limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchRule {
    /// Branch on the Boolean furthest from an integer; ties to lowest id.
    MostFractional,
    /// Branch on the lowest-id fractional Boolean.
    FirstIndex,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub time_limit_s: f64,
    /// Relative optimality gap at which a node is pruned.
    pub mip_gap: f64,
    /// Feasibility tolerance handed to the LP subsolver.
    pub lp_tolerance: f64,
    pub branch_rule: BranchRule,
    /// Reserved for randomized strategies; the default search ignores it.
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            time_limit_s: 600.0,
            mip_gap: 1e-6,
            lp_tolerance: 1e-9,
            branch_rule: BranchRule::MostFractional,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Objective proven optimal within the configured gap.
    Optimal,
    /// A feasible incumbent exists but the gap was not closed in time.
    Feasible,
    Infeasible,
    /// The time limit expired without any incumbent.
    TimeLimit,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub status: SolveStatus,
    /// Objective in the model's own sense; NaN when no incumbent exists.
    pub objective: f64,
    /// Value per variable index; empty when no incumbent exists.
    pub assignment: Vec<f64>,
    /// Number of explored branch-and-bound nodes (or enumerated leaves).
    pub node_count: u64,
    /// Incumbent objective after each improvement, in model sense.
    pub incumbents: Vec<f64>,
}

impl Solution {
    pub fn value(&self, var: VarRef) -> f64 {
        self.assignment[var.index()]
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::Feasible)
    }
}

fn validate(model: &MilpModel) -> Result<(), SolveError> {
    for i in 0..model.num_vars() {
        let (lo, hi) = model.bounds_by_index(i);
        if lo.is_nan() || hi.is_nan() {
            return Err(SolveError::Malformed(format!("variable {i} has NaN bounds")));
        }
    }
    Ok(())
}

fn bounds_arrays(model: &MilpModel) -> (Vec<f64>, Vec<f64>) {
    (0..model.num_vars()).map(|i| model.bounds_by_index(i)).unzip()
}

/// Objective value of the pure LP relaxation (Booleans relaxed to [0, 1]).
pub fn lp_bound(model: &MilpModel, opts: &SolveOptions) -> Result<f64, SolveError> {
    validate(model)?;
    let inst = LpInstance::from_model(model);
    let (lo, hi) = bounds_arrays(model);
    match inst.solve(&lo, &hi, opts.lp_tolerance).map_err(to_numerical)? {
        LpOutcome::Optimal { objective, .. } => Ok(objective),
        LpOutcome::Infeasible => Err(SolveError::Malformed("relaxation infeasible".into())),
        LpOutcome::Unbounded => Err(SolveError::Unbounded),
    }
}

fn to_numerical(e: LpError) -> SolveError {
    SolveError::Numerical(e.to_string())
}

struct Tree<'a> {
    model: &'a MilpModel,
    inst: LpInstance,
    opts: SolveOptions,
    /// Maximize => +1, minimize => -1; search works on `sign * objective`
    /// so that "better" always means larger.
    sign: f64,
    bool_vars: Vec<u32>,
    integral: bool,
    incumbent: Option<(f64, Vec<f64>)>,
    incumbents: Vec<f64>,
    node_count: u64,
    started: Instant,
}

struct Node {
    /// (variable, fixed value) decisions along the path from the root.
    fixes: Vec<(u32, f64)>,
}

enum NodeOutcome {
    Pruned,
    Branched(Node, Node),
}

impl<'a> Tree<'a> {
    fn better(&self, a: f64, b: f64) -> bool {
        a > b + 1e-12 * (1.0 + b.abs())
    }

    /// True when the node bound cannot beat the incumbent meaningfully.
    fn cutoff(&self, bound: f64) -> bool {
        let Some((inc, _)) = &self.incumbent else {
            return false;
        };
        if self.integral {
            // Integral objectives must improve by at least 1.
            if bound < inc.round() + 1.0 - 1e-6 {
                return true;
            }
        }
        bound <= inc + self.opts.mip_gap * (1.0 + inc.abs())
    }

    fn process(&mut self, node: &Node, lo: &mut [f64], hi: &mut [f64]) -> Result<NodeOutcome, SolveError> {
        self.node_count += 1;
        for &(v, val) in &node.fixes {
            lo[v as usize] = val;
            hi[v as usize] = val;
        }
        let outcome = self.inst.solve(lo, hi, self.opts.lp_tolerance).map_err(to_numerical)?;
        let (objective, x) = match outcome {
            LpOutcome::Infeasible => return Ok(NodeOutcome::Pruned),
            LpOutcome::Unbounded => return Err(SolveError::Unbounded),
            LpOutcome::Optimal { objective, x } => (objective, x),
        };
        let bound = self.sign * objective;
        if self.cutoff(bound) {
            return Ok(NodeOutcome::Pruned);
        }

        let fractional = self.pick_branch_var(&x, lo, hi);
        match fractional {
            None => {
                self.try_accept(&x, lo, hi)?;
                Ok(NodeOutcome::Pruned)
            }
            Some(v) => {
                let frac = x[v as usize];
                let preferred = if frac >= 0.5 { 1.0 } else { 0.0 };
                let mut near = node.fixes.clone();
                near.push((v, preferred));
                let mut far = node.fixes.clone();
                far.push((v, 1.0 - preferred));
                Ok(NodeOutcome::Branched(Node { fixes: near }, Node { fixes: far }))
            }
        }
    }

    fn pick_branch_var(&self, x: &[f64], lo: &[f64], hi: &[f64]) -> Option<u32> {
        let mut best: Option<(u32, f64)> = None;
        for &v in &self.bool_vars {
            let j = v as usize;
            if lo[j] == hi[j] {
                continue;
            }
            let dist = (x[j] - x[j].round()).abs();
            if dist <= INT_TOL {
                continue;
            }
            match self.opts.branch_rule {
                BranchRule::FirstIndex => return Some(v),
                BranchRule::MostFractional => {
                    if best.map_or(true, |(_, d)| dist > d) {
                        best = Some((v, dist));
                    }
                }
            }
        }
        best.map(|(v, _)| v)
    }

    /// Accepts an LP-integral point as incumbent, snapping Booleans and
    /// re-solving the continuous part when snapping disturbs feasibility.
    fn try_accept(&mut self, x: &[f64], lo: &[f64], hi: &[f64]) -> Result<(), SolveError> {
        let mut snapped = x.to_vec();
        for &v in &self.bool_vars {
            snapped[v as usize] = snapped[v as usize].round();
        }
        let check_tol = (self.opts.lp_tolerance * 100.0).max(1e-7);
        let clean = self.model.violated_constraints(&snapped, check_tol).is_empty()
            && self.model.violated_bounds(&snapped, check_tol).is_empty();
        let candidate = if clean {
            Some((self.model.objective_value(&snapped), snapped))
        } else {
            // Re-solve the continuous remainder with the Booleans pinned.
            let mut flo = lo.to_vec();
            let mut fhi = hi.to_vec();
            for &v in &self.bool_vars {
                let val = snapped[v as usize];
                flo[v as usize] = val;
                fhi[v as usize] = val;
            }
            match self.inst.solve(&flo, &fhi, self.opts.lp_tolerance).map_err(to_numerical)? {
                LpOutcome::Optimal { x, .. } => Some((self.model.objective_value(&x), x)),
                _ => None,
            }
        };
        if let Some((obj, x)) = candidate {
            let score = self.sign * obj;
            let improved = match &self.incumbent {
                None => true,
                Some((inc, _)) => self.better(score, *inc),
            };
            if improved {
                self.incumbent = Some((score, x));
                self.incumbents.push(obj);
            }
        }
        Ok(())
    }
}

/// Solves a mixed-Boolean linear program to optimality (within the
/// configured gap) by branch-and-bound.
pub fn solve(model: &MilpModel, opts: &SolveOptions) -> Result<Solution, SolveError> {
    validate(model)?;
    let (_, sense) = model.objective();
    let sign = match sense {
        ObjSense::Maximize => 1.0,
        ObjSense::Minimize => -1.0,
    };
    let bool_vars: Vec<u32> = (0..model.num_vars() as u32)
        .filter(|&i| model.kind_by_index(i as usize) == crate::milp::VarKind::Boolean)
        .collect();
    let integral = model.objective_integral || objective_is_integer_combination(model);

    let mut tree = Tree {
        model,
        inst: LpInstance::from_model(model),
        opts: opts.clone(),
        sign,
        bool_vars,
        integral,
        incumbent: None,
        incumbents: Vec::new(),
        node_count: 0,
        started: Instant::now(),
    };

    let (root_lo, root_hi) = bounds_arrays(model);
    let mut lo = root_lo.clone();
    let mut hi = root_hi.clone();
    let mut stack = vec![Node { fixes: Vec::new() }];
    let mut timed_out = false;
    while let Some(node) = stack.pop() {
        if tree.started.elapsed().as_secs_f64() > tree.opts.time_limit_s {
            timed_out = true;
            break;
        }
        lo.copy_from_slice(&root_lo);
        hi.copy_from_slice(&root_hi);
        match tree.process(&node, &mut lo, &mut hi)? {
            NodeOutcome::Pruned => {}
            NodeOutcome::Branched(near, far) => {
                stack.push(far);
                stack.push(near);
            }
        }
    }

    let node_count = tree.node_count;
    let incumbents = tree.incumbents;
    Ok(match tree.incumbent {
        Some((score, x)) => Solution {
            status: if timed_out { SolveStatus::Feasible } else { SolveStatus::Optimal },
            objective: sign * score,
            assignment: x,
            node_count,
            incumbents,
        },
        None => Solution {
            status: if timed_out { SolveStatus::TimeLimit } else { SolveStatus::Infeasible },
            objective: f64::NAN,
            assignment: Vec::new(),
            node_count,
            incumbents,
        },
    })
}

/// True when every objective term is an integer coefficient on a Boolean,
/// so every integer-feasible point has an integral objective.
fn objective_is_integer_combination(model: &MilpModel) -> bool {
    let (terms, _) = model.objective();
    terms.iter().all(|&(c, v)| {
        c.fract() == 0.0 && model.kind_by_index(v as usize) == crate::milp::VarKind::Boolean
    })
}
