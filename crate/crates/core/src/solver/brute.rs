//! Exhaustive ground-truth oracle: enumerate all Boolean assignments,
//! solving the continuous remainder as an LP per assignment.
//!
//! Partial assignments are pruned with interval arithmetic over each
//! constraint, which keeps the default 24-Boolean limit practical for the
//! logic-heavy models this crate produces.

use super::simplex::{LpInstance, LpOutcome};
use super::{to_numerical, SolveError, SolveStatus, Solution};
use crate::milp::{MilpModel, ObjSense, Sense, VarKind};

/// Default cap on the number of Boolean variables the oracle accepts.
pub const DEFAULT_BOOL_LIMIT: usize = 24;

struct ConstraintState {
    sense: Sense,
    rhs: f64,
    /// Achievable [min, max] of the left-hand side given current fixes and
    /// the bounds of everything unfixed.
    min: f64,
    max: f64,
}

impl ConstraintState {
    fn impossible(&self, tol: f64) -> bool {
        match self.sense {
            Sense::Le => self.min > self.rhs + tol,
            Sense::Ge => self.max < self.rhs - tol,
            Sense::Eq => self.min > self.rhs + tol || self.max < self.rhs - tol,
        }
    }
}

struct Search<'a> {
    model: &'a MilpModel,
    inst: LpInstance,
    bools: Vec<u32>,
    /// Per Boolean: list of (constraint index, coefficient).
    occurrences: Vec<Vec<(u32, f64)>>,
    constraints: Vec<ConstraintState>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    has_continuous: bool,
    sign: f64,
    best: Option<(f64, Vec<f64>)>,
    leaves: u64,
    tol: f64,
}

impl<'a> Search<'a> {
    fn descend(&mut self, depth: usize) -> Result<(), SolveError> {
        if depth == self.bools.len() {
            self.leaves += 1;
            return self.evaluate_leaf();
        }
        let v = self.bools[depth] as usize;
        let (vlo, vhi) = (self.lo[v], self.hi[v]);
        let candidates = [vlo, vhi];
        let values: &[f64] = if vlo == vhi { &candidates[..1] } else { &candidates };
        for &val in values {
            let mut deltas = Vec::with_capacity(self.occurrences[depth].len());
            let mut dead = false;
            for &(ci, coef) in &self.occurrences[depth] {
                let c = &mut self.constraints[ci as usize];
                // Replace the interval contribution of the variable's old
                // bounds with the point contribution of the fixed value.
                let a = coef * vlo;
                let b = coef * vhi;
                let d_min = coef * val - a.min(b);
                let d_max = coef * val - a.max(b);
                deltas.push((ci, d_min, d_max));
                c.min += d_min;
                c.max += d_max;
                if c.impossible(self.tol) {
                    dead = true;
                }
            }
            if !dead {
                let (slo, shi) = (self.lo[v], self.hi[v]);
                self.lo[v] = val;
                self.hi[v] = val;
                self.descend(depth + 1)?;
                self.lo[v] = slo;
                self.hi[v] = shi;
            }
            for &(ci, d_min, d_max) in deltas.iter().rev() {
                let c = &mut self.constraints[ci as usize];
                c.min -= d_min;
                c.max -= d_max;
            }
        }
        Ok(())
    }

    fn evaluate_leaf(&mut self) -> Result<(), SolveError> {
        if self.has_continuous {
            match self.inst.solve(&self.lo, &self.hi, 1e-9).map_err(to_numerical)? {
                LpOutcome::Optimal { objective, x } => self.offer(objective, x),
                LpOutcome::Infeasible => {}
                LpOutcome::Unbounded => return Err(SolveError::Unbounded),
            }
        } else {
            // Everything fixed: intervals collapse, so feasibility is already
            // established; evaluate the objective directly.
            let x: Vec<f64> = self.lo.clone();
            if self.model.violated_constraints(&x, 1e-9).is_empty() {
                let obj = self.model.objective_value(&x);
                self.offer(obj, x);
            }
        }
        Ok(())
    }

    fn offer(&mut self, objective: f64, x: Vec<f64>) {
        let score = self.sign * objective;
        let improved = match &self.best {
            None => true,
            Some((b, _)) => score > *b,
        };
        if improved {
            self.best = Some((score, x));
        }
    }
}

/// Enumerates all Boolean assignments (with interval pruning), solving the
/// continuous remainder exactly per assignment. The returned optimum is the
/// ground truth against which `solve` is validated.
pub fn brute_force_solve(model: &MilpModel, limit_bools: usize) -> Result<Solution, SolveError> {
    super::validate(model)?;
    let bools: Vec<u32> = (0..model.num_vars() as u32)
        .filter(|&i| model.kind_by_index(i as usize) == VarKind::Boolean)
        .collect();
    if bools.len() > limit_bools {
        return Err(SolveError::TooManyBooleans { count: bools.len(), limit: limit_bools });
    }
    let has_continuous =
        (0..model.num_vars()).any(|i| model.kind_by_index(i) == VarKind::Continuous);
    let (lo, hi) = super::bounds_arrays(model);

    let mut constraints = Vec::with_capacity(model.num_constraints());
    for c in model.constraints() {
        let mut min = 0.0;
        let mut max = 0.0;
        for &(coef, v) in &c.terms {
            let (vl, vh) = model.bounds_by_index(v as usize);
            let a = coef * vl;
            let b = coef * vh;
            min += a.min(b);
            max += a.max(b);
        }
        constraints.push(ConstraintState { sense: c.sense, rhs: c.rhs, min, max });
    }
    let mut occurrences: Vec<Vec<(u32, f64)>> = vec![Vec::new(); bools.len()];
    let index_of: std::collections::HashMap<u32, usize> =
        bools.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    for (ci, c) in model.constraints().iter().enumerate() {
        for &(coef, v) in &c.terms {
            if let Some(&k) = index_of.get(&v) {
                occurrences[k].push((ci as u32, coef));
            }
        }
    }

    let (_, sense) = model.objective();
    let sign = match sense {
        ObjSense::Maximize => 1.0,
        ObjSense::Minimize => -1.0,
    };
    let mut search = Search {
        model,
        inst: LpInstance::from_model(model),
        bools,
        occurrences,
        constraints,
        lo,
        hi,
        has_continuous,
        sign,
        best: None,
        leaves: 0,
        tol: 1e-9,
    };
    search.descend(0)?;

    Ok(match search.best {
        Some((score, x)) => Solution {
            status: SolveStatus::Optimal,
            objective: sign * score,
            assignment: x,
            node_count: search.leaves,
            incumbents: Vec::new(),
        },
        None => Solution {
            status: SolveStatus::Infeasible,
            objective: f64::NAN,
            assignment: Vec::new(),
            node_count: search.leaves,
            incumbents: Vec::new(),
        },
    })
}
