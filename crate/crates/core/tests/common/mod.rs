//! Shared helpers for integration tests: random model generation and an
//! independent vertex-enumeration LP oracle.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use v2v_rrm::milp::{MilpModel, ObjSense, Sense, VarRef};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub struct RandomModelConfig {
    pub max_bools: usize,
    pub max_continuous: usize,
    pub max_constraints: usize,
}

impl Default for RandomModelConfig {
    fn default() -> Self {
        Self { max_bools: 10, max_continuous: 4, max_constraints: 8 }
    }
}

/// A random mixed-Boolean model with finite bounds everywhere. Infeasible
/// instances are legitimate outputs.
pub fn random_model(rng: &mut ChaCha8Rng, cfg: &RandomModelConfig) -> MilpModel {
    let mut m = MilpModel::new();
    let nb = rng.gen_range(0..=cfg.max_bools);
    let nc = rng.gen_range(0..=cfg.max_continuous);
    let mut vars: Vec<VarRef> = Vec::new();
    for i in 0..nb {
        vars.push(m.add_bool(format!("b{i}")));
    }
    for i in 0..nc {
        let a = (rng.gen_range(-50..=50) as f64) / 10.0;
        let b = (rng.gen_range(-50..=50) as f64) / 10.0;
        vars.push(m.add_continuous(format!("c{i}"), a.min(b), a.max(b)).unwrap());
    }
    if vars.is_empty() {
        vars.push(m.add_bool("b0"));
    }
    let ncons = rng.gen_range(1..=cfg.max_constraints);
    for k in 0..ncons {
        let nterms = rng.gen_range(1..=vars.len().min(4));
        let mut picked: Vec<usize> = (0..vars.len()).collect();
        picked.shuffle(rng);
        picked.truncate(nterms);
        let terms: Vec<(f64, VarRef)> = picked
            .iter()
            .map(|&i| ((rng.gen_range(-40..=40) as f64) / 10.0, vars[i]))
            .collect();
        if terms.iter().all(|&(c, _)| c == 0.0) {
            continue;
        }
        // Equalities are rare so that a healthy share of models is feasible.
        let sense = match rng.gen_range(0..6) {
            0 | 1 | 2 => Sense::Le,
            3 | 4 => Sense::Ge,
            _ => Sense::Eq,
        };
        let rhs = match sense {
            Sense::Le => (rng.gen_range(0..=120) as f64) / 10.0,
            Sense::Ge => (rng.gen_range(-60..=30) as f64) / 10.0,
            Sense::Eq => (rng.gen_range(-30..=30) as f64) / 10.0,
        };
        m.add_constraint(format!("r{k}"), &terms, sense, rhs).unwrap();
    }
    let obj: Vec<(f64, VarRef)> = vars
        .iter()
        .map(|&v| ((rng.gen_range(-30..=30) as f64) / 10.0, v))
        .collect();
    let sense = if rng.gen_bool(0.5) { ObjSense::Maximize } else { ObjSense::Minimize };
    m.set_objective(&obj, sense).unwrap();
    m
}

/// Solves a dense n x n linear system with partial pivoting. Returns None
/// when the system is singular.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let (pivot, mag) = (col..n)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if mag < 1e-10 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[r][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                a[r][c] -= factor * a[col][c];
            }
            b[r] -= factor * b[col];
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Independent LP oracle: enumerates every candidate vertex (each choice of
/// n active constraints among rows-as-equalities and variable bounds),
/// checks feasibility, and returns the best objective. Only valid for
/// models whose variables all have finite bounds.
pub fn vertex_enumeration_lp(model: &MilpModel) -> Option<f64> {
    let n = model.num_vars();
    #[derive(Clone)]
    enum Active {
        Row(usize),
        VarAt(usize, f64),
    }
    let mut candidates: Vec<Active> = Vec::new();
    for r in 0..model.num_constraints() {
        candidates.push(Active::Row(r));
    }
    for v in 0..n {
        let (lo, hi) = model.bounds_by_index(v);
        candidates.push(Active::VarAt(v, lo));
        if hi != lo {
            candidates.push(Active::VarAt(v, hi));
        }
    }
    let (obj, sense) = model.objective();
    let sign = match sense {
        ObjSense::Maximize => 1.0,
        ObjSense::Minimize => -1.0,
    };

    let mut best: Option<f64> = None;
    let k = candidates.len();
    let mut choice: Vec<usize> = (0..n).collect();
    if n > k {
        return None;
    }
    loop {
        // Build the n x n active system.
        let mut a = vec![vec![0.0; n]; n];
        let mut b = vec![0.0; n];
        for (row, &ci) in choice.iter().enumerate() {
            match &candidates[ci] {
                Active::Row(r) => {
                    for &(coef, v) in &model.constraints()[*r].terms {
                        a[row][v as usize] = coef;
                    }
                    b[row] = model.constraints()[*r].rhs;
                }
                Active::VarAt(v, val) => {
                    a[row][*v] = 1.0;
                    b[row] = *val;
                }
            }
        }
        if let Some(x) = solve_dense(a, b) {
            let tol = 1e-7;
            if model.violated_constraints(&x, tol).is_empty()
                && model.violated_bounds(&x, tol).is_empty()
            {
                let val = model.objective_value(&x);
                let score = sign * val;
                if best.map_or(true, |b| score > sign * b) {
                    best = Some(val);
                }
            }
        }
        // Next combination of `n` candidate indices out of `k`.
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if choice[i] + (n - i) < k {
                choice[i] += 1;
                for j in i + 1..n {
                    choice[j] = choice[j - 1] + 1;
                }
                break;
            }
        }
    }
}
