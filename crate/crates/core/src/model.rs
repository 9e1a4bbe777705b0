//! Domain types shared by all modules: network, channel, radio grid,
//! messages, and solved allocations.
//!
//! All powers and gains are stored in linear scale (mW and power ratios);
//! dB conversions happen only at configuration parsing and report
//! formatting. Every type is immutable after construction and safe to
//! share read-only across parallel workers.

use crate::dense::{Matrix, Tensor3, Tensor4};
use thiserror::Error;

/// Latency value reported for messages that are never received.
pub const NEVER_RECEIVED: f64 = 1e10;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("radio grid must have at least one frequency slot and one timeslot")]
    EmptyGrid,
    #[error("channel gain matrix must be {expected}x{expected}, got {rows}x{cols}")]
    GainShape { expected: usize, rows: usize, cols: usize },
    #[error("channel gain for link ({tx},{rx}) must be positive, got {gain}")]
    NonPositiveGain { tx: usize, rx: usize, gain: f64 },
    #[error("ACIR mask must have one entry per frequency slot ({expected}), got {got}")]
    AcirLength { expected: usize, got: usize },
    #[error("ACIR mask must start at 1 and be nonincreasing with offset")]
    AcirShape,
    #[error("noise power must be positive, got {0}")]
    NonPositiveNoise(f64),
    #[error("maximum transmit power must be positive, got {0}")]
    NonPositivePower(f64),
    #[error("SINR threshold must be nonnegative, got {0}")]
    NegativeSinrThreshold(f64),
    #[error("receiver set of VUE {vue} contains invalid entry {rx}")]
    BadReceiver { vue: usize, rx: usize },
    #[error("message {0} must have exactly one originating (VUE, timeslot) entry")]
    BadMessageOrigin(usize),
    #[error("relay processing delay must be at least one timeslot")]
    BadRelayDelay,
    #[error("generation time count {got} does not match message count {expected}")]
    GenTimeLength { expected: usize, got: usize },
    #[error("initial AoI matrix has wrong shape")]
    InitialAoiShape,
    #[error("allocation tensor dimensions do not match the scenario")]
    AllocationShape,
}

/// The time-frequency grid: `freqs` frequency slots by `slots` timeslots.
/// A resource block (RB) is uniquely identified by a pair `(f, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RadioGrid {
    freqs: usize,
    slots: usize,
}

impl RadioGrid {
    pub fn new(freqs: usize, slots: usize) -> Result<Self, ModelError> {
        if freqs == 0 || slots == 0 {
            return Err(ModelError::EmptyGrid);
        }
        Ok(Self { freqs, slots })
    }

    pub fn freqs(&self) -> usize {
        self.freqs
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    /// Iterates over all resource blocks in (f, t) lexicographic order.
    pub fn blocks(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let slots = self.slots;
        (0..self.freqs).flat_map(move |f| (0..slots).map(move |t| (f, t)))
    }
}

/// Returns `g / (1 + g)`, the factor that turns the SINR threshold into a
/// linear constraint on the desired received power.
pub fn gamma_bar(sinr_threshold: f64) -> f64 {
    sinr_threshold / (1.0 + sinr_threshold)
}

/// Converts a dB value to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear value to dB.
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Mutable staging area for [`Scenario`]; `build` validates all invariants.
#[derive(Debug, Clone)]
pub struct ScenarioBuilder {
    pub grid: RadioGrid,
    /// Average channel power gain from VUE i to VUE j (linear). The
    /// diagonal is ignored (self-links carry no signal).
    pub gain: Matrix<f64>,
    /// Inverse-ACIR per frequency offset; `acir[0]` must be 1.
    pub acir: Vec<f64>,
    /// Noise power per resource block, mW.
    pub noise_mw: f64,
    /// Maximum transmit power per VUE, mW.
    pub max_power_mw: f64,
    /// SINR threshold for a successful link, linear.
    pub sinr_threshold: f64,
    /// Intended receiver set per VUE.
    pub receivers: Vec<Vec<usize>>,
    /// `availability[(i, m, t)]` is true when VUE i generated message m and
    /// may transmit it from timeslot t onwards.
    pub availability: Tensor3<bool>,
    /// Generation time of each message, in timeslot units.
    pub gen_time: Vec<f64>,
    /// Minimum delay between generation and transmission, timeslot units.
    pub tx_delay: f64,
    /// Processing delay before a received message can be relayed, timeslots.
    pub relay_delay: usize,
    /// AoI of each (source, receiver) pair before the scheduling interval.
    pub initial_aoi: Matrix<f64>,
}

impl ScenarioBuilder {
    /// A scenario skeleton with unit gains, no ACI, and one message per VUE
    /// available at timeslot zero. Intended for tests and small examples.
    pub fn uniform(vues: usize, grid: RadioGrid) -> Self {
        let mut availability = Tensor3::filled(vues, vues, grid.slots(), false);
        for i in 0..vues {
            availability[(i, i, 0)] = true;
        }
        Self {
            grid,
            gain: Matrix::filled(vues, vues, 1.0),
            acir: std::iter::once(1.0)
                .chain(std::iter::repeat(0.0))
                .take(grid.freqs())
                .collect(),
            noise_mw: 1.0,
            max_power_mw: 1.0,
            sinr_threshold: 1.0,
            receivers: (0..vues)
                .map(|i| (0..vues).filter(|&j| j != i).collect())
                .collect(),
            availability,
            gen_time: vec![0.0; vues],
            tx_delay: 0.0,
            relay_delay: 1,
            initial_aoi: Matrix::filled(vues, vues, 0.0),
        }
    }

    pub fn build(self) -> Result<Scenario, ModelError> {
        let n = self.gain.rows();
        if self.gain.cols() != n || self.receivers.len() != n {
            return Err(ModelError::GainShape {
                expected: self.receivers.len(),
                rows: self.gain.rows(),
                cols: self.gain.cols(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && !(self.gain[(i, j)] > 0.0) {
                    return Err(ModelError::NonPositiveGain { tx: i, rx: j, gain: self.gain[(i, j)] });
                }
            }
        }
        if self.acir.len() != self.grid.freqs() {
            return Err(ModelError::AcirLength { expected: self.grid.freqs(), got: self.acir.len() });
        }
        if (self.acir[0] - 1.0).abs() > 1e-12 {
            return Err(ModelError::AcirShape);
        }
        for w in self.acir.windows(2) {
            if w[1] > w[0] + 1e-12 || w[1] < 0.0 {
                return Err(ModelError::AcirShape);
            }
        }
        if !(self.noise_mw > 0.0) {
            return Err(ModelError::NonPositiveNoise(self.noise_mw));
        }
        if !(self.max_power_mw > 0.0) {
            return Err(ModelError::NonPositivePower(self.max_power_mw));
        }
        if !(self.sinr_threshold >= 0.0) {
            return Err(ModelError::NegativeSinrThreshold(self.sinr_threshold));
        }
        for (i, rs) in self.receivers.iter().enumerate() {
            for &j in rs {
                if j >= n || j == i {
                    return Err(ModelError::BadReceiver { vue: i, rx: j });
                }
            }
        }
        let [an, msgs, slots] = self.availability.dims();
        if an != n || slots != self.grid.slots() {
            return Err(ModelError::AllocationShape);
        }
        if self.gen_time.len() != msgs {
            return Err(ModelError::GenTimeLength { expected: msgs, got: self.gen_time.len() });
        }
        let mut origin = vec![None; msgs];
        for m in 0..msgs {
            let mut count = 0;
            for i in 0..n {
                for t in 0..slots {
                    if self.availability[(i, m, t)] {
                        count += 1;
                        origin[m] = Some((i, t));
                    }
                }
            }
            if count != 1 {
                return Err(ModelError::BadMessageOrigin(m));
            }
        }
        if self.relay_delay == 0 {
            return Err(ModelError::BadRelayDelay);
        }
        if self.initial_aoi.rows() != n || self.initial_aoi.cols() != n {
            return Err(ModelError::InitialAoiShape);
        }
        let origin = origin.into_iter().map(Option::unwrap).collect();
        Ok(Scenario {
            grid: self.grid,
            gain: self.gain,
            acir: self.acir,
            noise_mw: self.noise_mw,
            max_power_mw: self.max_power_mw,
            sinr_threshold: self.sinr_threshold,
            receivers: self.receivers,
            availability: self.availability,
            gen_time: self.gen_time,
            tx_delay: self.tx_delay,
            relay_delay: self.relay_delay,
            initial_aoi: self.initial_aoi,
            origin,
        })
    }
}

/// A validated network instance: topology, channel gains, radio grid, and
/// message generation map.
#[derive(Debug, Clone)]
pub struct Scenario {
    grid: RadioGrid,
    gain: Matrix<f64>,
    acir: Vec<f64>,
    noise_mw: f64,
    max_power_mw: f64,
    sinr_threshold: f64,
    receivers: Vec<Vec<usize>>,
    availability: Tensor3<bool>,
    gen_time: Vec<f64>,
    tx_delay: f64,
    relay_delay: usize,
    initial_aoi: Matrix<f64>,
    /// Per message: the originating VUE and earliest transmission slot.
    origin: Vec<(usize, usize)>,
}

impl Scenario {
    pub fn vues(&self) -> usize {
        self.gain.rows()
    }

    pub fn messages(&self) -> usize {
        self.gen_time.len()
    }

    pub fn grid(&self) -> RadioGrid {
        self.grid
    }

    pub fn gain(&self, tx: usize, rx: usize) -> f64 {
        if tx == rx {
            0.0
        } else {
            self.gain[(tx, rx)]
        }
    }

    /// Inverse-ACIR for a given frequency offset.
    pub fn acir(&self, offset: usize) -> f64 {
        self.acir[offset]
    }

    pub fn noise_mw(&self) -> f64 {
        self.noise_mw
    }

    pub fn max_power_mw(&self) -> f64 {
        self.max_power_mw
    }

    pub fn sinr_threshold(&self) -> f64 {
        self.sinr_threshold
    }

    pub fn receivers(&self, vue: usize) -> &[usize] {
        &self.receivers[vue]
    }

    pub fn available(&self, vue: usize, message: usize, slot: usize) -> bool {
        self.availability[(vue, message, slot)]
    }

    /// True when `vue` generated `message` and may transmit it at `slot`.
    pub fn available_by(&self, vue: usize, message: usize, slot: usize) -> bool {
        let (o, t0) = self.origin[message];
        o == vue && t0 <= slot
    }

    pub fn gen_time(&self, message: usize) -> f64 {
        self.gen_time[message]
    }

    pub fn tx_delay(&self) -> f64 {
        self.tx_delay
    }

    pub fn relay_delay(&self) -> usize {
        self.relay_delay
    }

    pub fn initial_aoi(&self, src: usize, rx: usize) -> f64 {
        self.initial_aoi[(src, rx)]
    }

    /// Originating VUE of a message.
    pub fn origin(&self, message: usize) -> usize {
        self.origin[message].0
    }

    /// Earliest timeslot at which the originator may transmit the message.
    pub fn earliest_slot(&self, message: usize) -> usize {
        self.origin[message].1
    }

    /// Messages generated by a VUE.
    pub fn messages_of(&self, vue: usize) -> Vec<usize> {
        (0..self.messages()).filter(|&m| self.origin(m) == vue).collect()
    }

    /// Total received power at `rx` in RB `(f, t)`, including the desired
    /// signal, co-channel interference, and ACI-weighted leakage.
    pub fn received_power(&self, power: &Tensor3<f64>, rx: usize, f: usize, t: usize) -> f64 {
        let mut total = 0.0;
        for fp in 0..self.grid.freqs() {
            let mask = self.acir[fp.abs_diff(f)];
            if mask == 0.0 {
                continue;
            }
            for k in 0..self.vues() {
                total += power[(k, fp, t)] * self.gain(k, rx) * mask;
            }
        }
        total
    }

    /// SINR of link `(tx, rx)` in RB `(f, t)` under the given power tensor.
    pub fn sinr_for_power(
        &self,
        power: &Tensor3<f64>,
        tx: usize,
        rx: usize,
        f: usize,
        t: usize,
    ) -> f64 {
        let desired = power[(tx, f, t)] * self.gain(tx, rx);
        let received = self.received_power(power, rx, f, t);
        desired / (self.noise_mw + (received - desired).max(0.0))
    }
}

/// SINR of link `(tx, rx)` in RB `(f, t)` for a solved allocation.
pub fn sinr(alloc: &Allocation, scenario: &Scenario, tx: usize, rx: usize, f: usize, t: usize) -> f64 {
    scenario.sinr_for_power(&alloc.power, tx, rx, f, t)
}

/// A solved schedule: transmissions, powers, enforced link successes, and
/// first-time receptions, together with the metrics derived from them.
#[derive(Debug, Clone)]
pub struct Allocation {
    /// `schedule[(i, m, f, t)]`: VUE i transmits message m in RB (f, t).
    pub schedule: Tensor4<bool>,
    /// Transmit power of VUE i in RB (f, t), mW.
    pub power: Tensor3<f64>,
    /// `link_success[(i, j, f, t)]`: the SINR constraint is enforced for
    /// link (i, j) in RB (f, t).
    pub link_success: Tensor4<bool>,
    /// `reception[(j, m, t)]`: VUE j receives message m for the first time
    /// in timeslot t.
    pub reception: Tensor3<bool>,
    /// `connectivity[(i, j)]`: at least one of i's messages reaches its
    /// intended receiver j.
    pub connectivity: Matrix<bool>,
    /// Age of information of the (src, rx) pair at the end of each timeslot.
    pub aoi: Tensor3<f64>,
    /// Latency of message m upon reception by VUE j; [`NEVER_RECEIVED`]
    /// when it never arrives.
    pub latency: Matrix<f64>,
}

impl Allocation {
    pub fn new(
        schedule: Tensor4<bool>,
        power: Tensor3<f64>,
        link_success: Tensor4<bool>,
        reception: Tensor3<bool>,
        scenario: &Scenario,
    ) -> Result<Self, ModelError> {
        let n = scenario.vues();
        let msgs = scenario.messages();
        let f = scenario.grid().freqs();
        let t = scenario.grid().slots();
        if schedule.dims() != [n, msgs, f, t]
            || power.dims() != [n, f, t]
            || link_success.dims() != [n, n, f, t]
            || reception.dims() != [n, msgs, t]
        {
            return Err(ModelError::AllocationShape);
        }
        let connectivity = derive_connectivity(&reception, scenario);
        let aoi = derive_aoi(&reception, scenario);
        let latency = derive_latency(&reception, scenario);
        Ok(Self { schedule, power, link_success, reception, connectivity, aoi, latency })
    }

    /// The all-zero allocation: nothing scheduled, nothing received.
    pub fn empty(scenario: &Scenario) -> Self {
        let n = scenario.vues();
        let msgs = scenario.messages();
        let f = scenario.grid().freqs();
        let t = scenario.grid().slots();
        Self::new(
            Tensor4::filled(n, msgs, f, t, false),
            Tensor3::filled(n, f, t, 0.0),
            Tensor4::filled(n, n, f, t, false),
            Tensor3::filled(n, msgs, t, false),
            scenario,
        )
        .expect("empty allocation always matches the scenario")
    }

    /// Number of connected (source, intended receiver) pairs.
    pub fn connected_pairs(&self) -> usize {
        let mut count = 0;
        for i in 0..self.connectivity.rows() {
            for j in 0..self.connectivity.cols() {
                if self.connectivity[(i, j)] {
                    count += 1;
                }
            }
        }
        count
    }
}

fn derive_connectivity(reception: &Tensor3<bool>, scenario: &Scenario) -> Matrix<bool> {
    let n = scenario.vues();
    let mut z = Matrix::filled(n, n, false);
    for i in 0..n {
        for &j in scenario.receivers(i) {
            let connected = scenario.messages_of(i).iter().any(|&m| {
                (0..scenario.grid().slots()).any(|t| reception[(j, m, t)])
            });
            z[(i, j)] = connected;
        }
    }
    z
}

fn derive_aoi(reception: &Tensor3<bool>, scenario: &Scenario) -> Tensor3<f64> {
    let n = scenario.vues();
    let slots = scenario.grid().slots();
    let mut aoi = Tensor3::filled(n, n, slots, 0.0);
    for i in 0..n {
        let msgs = scenario.messages_of(i);
        for j in 0..n {
            if j == i {
                continue;
            }
            let init = scenario.initial_aoi(i, j);
            for t in 0..slots {
                let no_reception = 1.0 + t as f64 + init;
                let mut best = no_reception;
                for &m in &msgs {
                    let received = (0..=t).any(|tp| reception[(j, m, tp)]);
                    if received {
                        let v = no_reception - (scenario.gen_time(m) + init);
                        best = best.min(v);
                    }
                }
                aoi[(i, j, t)] = best;
            }
        }
    }
    aoi
}

fn derive_latency(reception: &Tensor3<bool>, scenario: &Scenario) -> Matrix<f64> {
    let n = scenario.vues();
    let msgs = scenario.messages();
    let mut latency = Matrix::filled(n, msgs, NEVER_RECEIVED);
    for j in 0..n {
        for m in 0..msgs {
            for t in 0..scenario.grid().slots() {
                if reception[(j, m, t)] {
                    latency[(j, m)] = t as f64 - scenario.gen_time(m);
                    break;
                }
            }
        }
    }
    latency
}

/// Options controlling which constraint families the auditor checks.
#[derive(Debug, Clone)]
pub struct AuditOptions {
    /// Whether relaying of received messages is allowed.
    pub multihop: bool,
    /// Enforce that a VUE with an enforced incoming link does not transmit
    /// in the same timeslot.
    pub half_duplex: bool,
    /// Relative slack when re-checking SINR against the threshold.
    pub sinr_tolerance: f64,
    /// Check that the reception tensor equals its recomputed value.
    pub check_reception: bool,
    /// Noise inflation factor used when re-checking SINR (1 + margin for
    /// clustered sub-problems; 1.0 for exact audits).
    pub noise_factor: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            multihop: true,
            half_duplex: true,
            sinr_tolerance: 1e-6,
            check_reception: true,
            noise_factor: 1.0,
        }
    }
}

/// One violated constraint instance found by the auditor.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// More than one message scheduled by a VUE in one RB.
    ScheduleOverlap { vue: usize, freq: usize, slot: usize, count: usize },
    /// Total transmit power of a VUE in a timeslot exceeds the budget.
    PowerBudget { vue: usize, slot: usize, total_mw: f64 },
    /// Power spent in an RB where nothing is scheduled (or negative power).
    PowerWithoutSchedule { vue: usize, freq: usize, slot: usize, power_mw: f64 },
    /// An enforced link whose recomputed SINR is below the threshold.
    LinkBelowThreshold { tx: usize, rx: usize, freq: usize, slot: usize, sinr: f64 },
    /// Reception tensor disagrees with the value recomputed from the
    /// schedule and enforced links.
    ReceptionMismatch { rx: usize, message: usize, slot: usize, expected: bool },
    /// A VUE transmitted a message it neither generated in time nor
    /// received early enough to relay.
    TransmitWithoutMessage { vue: usize, message: usize, freq: usize, slot: usize },
    /// An enforced incoming link while the receiver transmits in the slot.
    HalfDuplex { tx: usize, rx: usize, freq: usize, slot: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::ScheduleOverlap { vue, freq, slot, count } => {
                write!(f, "VUE {vue} schedules {count} messages in RB ({freq},{slot})")
            }
            Violation::PowerBudget { vue, slot, total_mw } => {
                write!(f, "VUE {vue} spends {total_mw} mW in timeslot {slot}")
            }
            Violation::PowerWithoutSchedule { vue, freq, slot, power_mw } => {
                write!(f, "VUE {vue} has power {power_mw} mW in unscheduled RB ({freq},{slot})")
            }
            Violation::LinkBelowThreshold { tx, rx, freq, slot, sinr } => {
                write!(f, "enforced link ({tx},{rx}) in RB ({freq},{slot}) has SINR {sinr}")
            }
            Violation::ReceptionMismatch { rx, message, slot, expected } => {
                write!(f, "reception[{rx},{message},{slot}] should be {expected}")
            }
            Violation::TransmitWithoutMessage { vue, message, freq, slot } => {
                write!(f, "VUE {vue} transmits message {message} in RB ({freq},{slot}) without holding it")
            }
            Violation::HalfDuplex { tx, rx, freq, slot } => {
                write!(f, "link ({tx},{rx}) enforced in RB ({freq},{slot}) while {rx} transmits")
            }
        }
    }
}

/// Outcome of [`audit_allocation`]; empty iff the allocation is feasible.
#[derive(Debug, Clone, Default)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }
}

impl std::fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "no violations");
        }
        writeln!(f, "{} violation(s):", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// Re-checks every scheduling, power, SINR, reception, and relay constraint
/// of an allocation from first principles (raw SINR, not big-M surrogates).
pub fn audit_allocation(
    alloc: &Allocation,
    scenario: &Scenario,
    opts: &AuditOptions,
) -> Result<ViolationReport, ModelError> {
    let n = scenario.vues();
    let msgs = scenario.messages();
    let freqs = scenario.grid().freqs();
    let slots = scenario.grid().slots();
    if alloc.schedule.dims() != [n, msgs, freqs, slots]
        || alloc.power.dims() != [n, freqs, slots]
        || alloc.link_success.dims() != [n, n, freqs, slots]
        || alloc.reception.dims() != [n, msgs, slots]
    {
        return Err(ModelError::AllocationShape);
    }

    let mut report = ViolationReport::default();
    let power_tol = 1e-9 * scenario.max_power_mw().max(1.0);

    // At most one message per VUE per RB, and power only where scheduled.
    for i in 0..n {
        for t in 0..slots {
            let mut slot_power = 0.0;
            for f in 0..freqs {
                let count = (0..msgs).filter(|&m| alloc.schedule[(i, m, f, t)]).count();
                if count > 1 {
                    report.violations.push(Violation::ScheduleOverlap { vue: i, freq: f, slot: t, count });
                }
                let p = alloc.power[(i, f, t)];
                slot_power += p;
                let cap = if count > 0 { scenario.max_power_mw() } else { 0.0 };
                if p < -power_tol || p > cap + power_tol {
                    report.violations.push(Violation::PowerWithoutSchedule { vue: i, freq: f, slot: t, power_mw: p });
                }
            }
            if slot_power > scenario.max_power_mw() + power_tol {
                report.violations.push(Violation::PowerBudget { vue: i, slot: t, total_mw: slot_power });
            }
        }
    }

    // Enforced links must achieve the SINR threshold with the noise margin.
    let threshold = scenario.sinr_threshold() * (1.0 - opts.sinr_tolerance);
    for i in 0..n {
        for j in 0..n {
            for f in 0..freqs {
                for t in 0..slots {
                    if !alloc.link_success[(i, j, f, t)] {
                        continue;
                    }
                    let desired = alloc.power[(i, f, t)] * scenario.gain(i, j);
                    let received = scenario.received_power(&alloc.power, j, f, t);
                    let noise = scenario.noise_mw() * opts.noise_factor;
                    let s = desired / (noise + (received - desired).max(0.0));
                    if s < threshold {
                        report.violations.push(Violation::LinkBelowThreshold { tx: i, rx: j, freq: f, slot: t, sinr: s });
                    }
                    if opts.half_duplex {
                        let transmitting = (0..freqs).any(|fp| (0..msgs).any(|m| alloc.schedule[(j, m, fp, t)]));
                        if transmitting {
                            report.violations.push(Violation::HalfDuplex { tx: i, rx: j, freq: f, slot: t });
                        }
                    }
                }
            }
        }
    }

    // Reception must equal its recomputed first-time value. Reception by a
    // message's own originator is not tracked.
    if opts.check_reception {
        for j in 0..n {
            for m in 0..msgs {
                if scenario.origin(m) == j {
                    continue;
                }
                let mut received_before = false;
                for t in 0..slots {
                    let hit = !received_before
                        && (0..n).any(|i| {
                            (0..freqs).any(|f| {
                                alloc.schedule[(i, m, f, t)] && alloc.link_success[(i, j, f, t)]
                            })
                        });
                    if alloc.reception[(j, m, t)] != hit {
                        report.violations.push(Violation::ReceptionMismatch { rx: j, message: m, slot: t, expected: hit });
                    }
                    received_before = received_before || hit;
                }
            }
        }
    }

    // A transmission requires either own generation in time or (with
    // multihop) a reception at least `relay_delay` slots earlier.
    for i in 0..n {
        for m in 0..msgs {
            for f in 0..freqs {
                for t in 0..slots {
                    if !alloc.schedule[(i, m, f, t)] {
                        continue;
                    }
                    let own = scenario.available_by(i, m, t);
                    let relayed = opts.multihop
                        && t >= scenario.relay_delay()
                        && (0..=t - scenario.relay_delay()).any(|tp| alloc.reception[(i, m, tp)]);
                    if !own && !relayed {
                        report.violations.push(Violation::TransmitWithoutMessage { vue: i, message: m, freq: f, slot: t });
                    }
                }
            }
        }
    }

    Ok(report)
}
