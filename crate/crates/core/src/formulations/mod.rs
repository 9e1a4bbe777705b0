//! Builders for the optimization objectives (throughput, worst-case
//! throughput, connectivity, connectivity under AoI or latency
//! requirements), their scheduling-only / power-only / windowed variants,
//! and the probabilistic-requirement translations.

mod builder;

pub use builder::{build_model, BuiltModel, ModelScope};

use crate::dense::Tensor4;
use crate::model::Allocation;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormulationError {
    #[error("modeling error: {0}")]
    Milp(#[from] crate::milp::MilpError),
    #[error("message {0} has no generator in scope")]
    OrphanMessage(usize),
    #[error("window start {start} requires history covering earlier timeslots")]
    MissingHistory { start: usize },
    #[error("fixed schedule transmits outside the model's variable support at ({vue}, {message}, {freq}, {slot})")]
    FixedScheduleOutsideModel { vue: usize, message: usize, freq: usize, slot: usize },
    #[error("fragmentation requires at least one packet per message")]
    EmptyPacketSet,
    #[error("repetition count must be at least 1")]
    BadRepetitions,
    #[error("threshold {0} must be nonnegative")]
    NegativeThreshold(f64),
    #[error("scope is empty")]
    EmptyScope,
    #[error("probability must lie strictly between 0 and 1, got {0}")]
    BadProbability(f64),
    #[error("per-source message count must be at least 1")]
    NoMessages,
    #[error("error curve never reaches the required level {required}")]
    Unattainable { required: f64 },
    #[error("end-to-end error bound {0} is not below 1; repetitions cannot help")]
    HopErrorTooHigh(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Throughput,
    WorstThroughput,
    Connectivity,
    ConnectivityAoi,
    ConnectivityLatency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AoiMetric {
    TimeAverage,
    TimeMax,
}

/// Joint optimization, or the scheduling-only / power-only restrictions.
#[derive(Debug, Clone)]
pub enum Variant {
    Joint,
    /// Power is pinned to `power_mw` times the per-RB transmit indicator.
    SchedulingOnly { power_mw: f64 },
    /// The schedule is pinned; only powers are optimized.
    PowerOnly { schedule: Tensor4<bool> },
}

/// Windowed re-optimization: variables in timeslots before `start` are
/// pinned to the supplied history.
#[derive(Debug, Clone)]
pub struct Window {
    pub start: usize,
    pub history: Allocation,
}

/// Everything that selects one concrete optimization problem.
#[derive(Debug, Clone)]
pub struct FormulationSpec {
    pub objective: Objective,
    pub multihop: bool,
    pub variant: Variant,
    pub window: Option<Window>,
    pub half_duplex: bool,
    pub aoi_metric: AoiMetric,
    /// AoI metric threshold for [`Objective::ConnectivityAoi`].
    pub aoi_threshold: f64,
    /// Latency deadline for [`Objective::ConnectivityLatency`].
    pub latency_threshold: f64,
    /// When set, reception requires this many repeated deliveries and the
    /// first-reception constraints are replaced by the repetition family.
    pub repetitions: Option<usize>,
    /// Packets per message; `None` means one packet (no fragmentation).
    pub fragmentation: Option<Vec<usize>>,
}

impl Default for FormulationSpec {
    fn default() -> Self {
        Self {
            objective: Objective::Connectivity,
            multihop: true,
            variant: Variant::Joint,
            window: None,
            half_duplex: true,
            aoi_metric: AoiMetric::TimeMax,
            aoi_threshold: 0.0,
            latency_threshold: 0.0,
            repetitions: None,
            fragmentation: None,
        }
    }
}

/// A sampled 1-hop message error probability curve, nonincreasing in the
/// SINR.
#[derive(Debug, Clone)]
pub struct ErrorCurve {
    samples: Vec<(f64, f64)>,
}

impl ErrorCurve {
    pub fn new(mut samples: Vec<(f64, f64)>) -> Result<Self, FormulationError> {
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in samples.windows(2) {
            if w[1].1 > w[0].1 + 1e-12 {
                return Err(FormulationError::BadProbability(w[1].1));
            }
        }
        for &(_, e) in &samples {
            if !(0.0..=1.0).contains(&e) {
                return Err(FormulationError::BadProbability(e));
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }
}

/// Smallest sampled SINR threshold whose 1-hop error probability is low
/// enough that any path of at most `max_hops` hops meets `eps_req`
/// end-to-end.
pub fn gamma_from_epsilon(
    curve: &ErrorCurve,
    eps_req: f64,
    max_hops: usize,
) -> Result<f64, FormulationError> {
    if !(0.0 < eps_req && eps_req < 1.0) {
        return Err(FormulationError::BadProbability(eps_req));
    }
    if max_hops == 0 {
        return Err(FormulationError::NoMessages);
    }
    let required = eps_req / max_hops as f64;
    curve
        .samples
        .iter()
        .find(|&&(_, e)| e <= required)
        .map(|&(g, _)| g)
        .ok_or(FormulationError::Unattainable { required })
}

/// End-to-end error budget that guarantees a probabilistic latency
/// requirement: `1 - p_req`.
pub fn epsilon_req_latency(p_req: f64) -> Result<f64, FormulationError> {
    if !(0.0 < p_req && p_req < 1.0) {
        return Err(FormulationError::BadProbability(p_req));
    }
    Ok(1.0 - p_req)
}

/// End-to-end error budget that guarantees a probabilistic AoI requirement
/// when each source has `messages_per_source` messages:
/// `1 - p_req^(1/messages_per_source)`.
pub fn epsilon_req_aoi(p_req: f64, messages_per_source: usize) -> Result<f64, FormulationError> {
    if !(0.0 < p_req && p_req < 1.0) {
        return Err(FormulationError::BadProbability(p_req));
    }
    if messages_per_source == 0 {
        return Err(FormulationError::NoMessages);
    }
    Ok(1.0 - p_req.powf(1.0 / messages_per_source as f64))
}

/// Number of repeated end-to-end transmissions needed to push the error
/// probability below `eps_req` when one attempt fails with probability at
/// most `max_hops * eps_hop`.
pub fn repetitions_required(
    eps_req: f64,
    max_hops: usize,
    eps_hop: f64,
) -> Result<usize, FormulationError> {
    if !(0.0 < eps_req && eps_req < 1.0) {
        return Err(FormulationError::BadProbability(eps_req));
    }
    let attempt = max_hops as f64 * eps_hop;
    if attempt >= 1.0 {
        return Err(FormulationError::HopErrorTooHigh(attempt));
    }
    if attempt <= 0.0 {
        return Ok(1);
    }
    let rho = (eps_req.ln() / attempt.ln()).ceil();
    Ok((rho as usize).max(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_curve() -> ErrorCurve {
        // eps = 1 below gamma = 5, 1e-4 from gamma = 5 on.
        ErrorCurve::new(vec![(0.0, 1.0), (2.5, 1.0), (5.0, 1e-4), (8.0, 1e-4)]).unwrap()
    }

    #[test]
    fn gamma_threshold_on_step_curve() {
        let g = gamma_from_epsilon(&step_curve(), 1e-2, 10).unwrap();
        assert_eq!(g, 5.0);
    }

    #[test]
    fn gamma_threshold_single_hop() {
        // With one hop the bound is eps_req itself.
        let curve = ErrorCurve::new(vec![(1.0, 0.5), (2.0, 0.009)]).unwrap();
        assert_eq!(gamma_from_epsilon(&curve, 0.01, 1).unwrap(), 2.0);
    }

    #[test]
    fn gamma_threshold_unattainable() {
        let curve = ErrorCurve::new(vec![(1.0, 0.5), (2.0, 0.2)]).unwrap();
        assert!(matches!(
            gamma_from_epsilon(&curve, 1e-3, 4),
            Err(FormulationError::Unattainable { .. })
        ));
    }

    #[test]
    fn gamma_threshold_is_minimal_over_random_curves() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for _ in 0..200 {
            let n = rng.gen_range(2..20);
            let mut eps = 1.0f64;
            let samples: Vec<(f64, f64)> = (0..n)
                .map(|i| {
                    eps *= rng.gen_range(0.05..0.95);
                    (i as f64, eps)
                })
                .collect();
            let curve = ErrorCurve::new(samples.clone()).unwrap();
            let eps_req = rng.gen_range(0.001..0.5);
            let hops = rng.gen_range(1..16);
            match gamma_from_epsilon(&curve, eps_req, hops) {
                Ok(g) => {
                    let required = eps_req / hops as f64;
                    let idx = samples.iter().position(|&(x, _)| x == g).unwrap();
                    assert!(samples[idx].1 <= required);
                    if idx > 0 {
                        assert!(samples[idx - 1].1 > required);
                    }
                }
                Err(_) => {
                    assert!(samples.last().unwrap().1 > eps_req / hops as f64);
                }
            }
        }
    }

    #[test]
    fn epsilon_requirements() {
        assert!((epsilon_req_latency(0.99).unwrap() - 0.01).abs() < 1e-15);
        assert!((epsilon_req_aoi(0.99, 1).unwrap() - 0.01).abs() < 1e-12);
        let e = epsilon_req_aoi(0.99, 10).unwrap();
        assert!((e - (1.0 - 0.99f64.powf(0.1))).abs() < 1e-15);
        assert!((e - 1.005e-3).abs() < 5e-6);
        // The defining inequality: (1 - eps)^Mi >= p_req.
        assert!((1.0 - e).powi(10) >= 0.99 - 1e-12);
    }

    #[test]
    fn repetition_count_examples() {
        // eps_req exactly one attempt's bound: a single transmission works.
        assert_eq!(repetitions_required(0.2, 20, 0.01).unwrap(), 1);
        let rho = repetitions_required(1e-5, 20, 1e-2).unwrap();
        let expected = (1e-5f64.ln() / 0.2f64.ln()).ceil() as usize;
        assert_eq!(rho, expected);
        assert!(0.2f64.powi(rho as i32) <= 1e-5);
        assert!(0.2f64.powi(rho as i32 - 1) > 1e-5);
        assert!(matches!(
            repetitions_required(0.1, 10, 0.2),
            Err(FormulationError::HopErrorTooHigh(_))
        ));
    }

    #[test]
    fn repetition_bound_holds_on_random_inputs() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..1000 {
            let hops = rng.gen_range(1..40usize);
            let eps_hop = rng.gen_range(1e-8..(0.999 / hops as f64));
            let eps_req = rng.gen_range(1e-9..0.9999);
            let rho = repetitions_required(eps_req, hops, eps_hop).unwrap();
            assert!(rho >= 1);
            let attempt = hops as f64 * eps_hop;
            assert!(attempt.powi(rho as i32) <= eps_req * (1.0 + 1e-9));
        }
    }
}
