//! Language-neutral mixed-Boolean linear program modeling layer.
//!
//! Provides variable/constraint bookkeeping, the Boolean-logic-to-linear
//! encoders (OR, AND, min-selection), big-M helpers, and import/export in
//! the CPLEX LP interchange format so third-party solvers can cross-check
//! models.

use crate::model::{gamma_bar, Scenario};
use std::sync::atomic::{AtomicU64, Ordering};
use thiserror::Error;

static NEXT_MODEL_TAG: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Error)]
pub enum MilpError {
    #[error("variable belongs to a different model")]
    ForeignVariable,
    #[error("constraint must reference at least one variable")]
    EmptyConstraint,
    #[error("coefficient or bound is not finite")]
    NotFinite,
    #[error("variable bounds are inverted: lo {lo} > hi {hi}")]
    InvertedBounds { lo: f64, hi: f64 },
    #[error("encoder requires a nonempty list of Boolean variables")]
    EmptyEncoderInput,
    #[error("encoder inputs must be Boolean")]
    NonBooleanInput,
    #[error("min-selection constant {zeta} is too small for the operand range {range}")]
    ZetaTooSmall { zeta: f64, range: f64 },
    #[error("LP parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Boolean,
    Continuous,
}

/// Handle to a variable of a specific [`MilpModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarRef {
    model_tag: u64,
    index: u32,
    kind: VarKind,
}

impl VarRef {
    pub fn index(&self) -> usize {
        self.index as usize
    }

    pub fn kind(&self) -> VarKind {
        self.kind
    }

    pub fn is_boolean(&self) -> bool {
        self.kind == VarKind::Boolean
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn token(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

/// A linear constraint `sum(coefficient * var) sense rhs`.
#[derive(Debug, Clone)]
pub struct LinConstraint {
    pub name: String,
    /// Sorted by variable index with duplicates combined and zeros dropped.
    pub terms: Vec<(f64, u32)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjSense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone)]
struct VarData {
    name: String,
    kind: VarKind,
    lo: f64,
    hi: f64,
}

/// A mixed-Boolean linear program: variables with bounds, linear
/// constraints, and a linear objective.
#[derive(Debug, Clone)]
pub struct MilpModel {
    tag: u64,
    vars: Vec<VarData>,
    constraints: Vec<LinConstraint>,
    objective: Vec<(f64, u32)>,
    obj_sense: ObjSense,
    /// Hint that the optimal objective value is integral at every
    /// integer-feasible point; enables rounding-based pruning in search.
    pub objective_integral: bool,
}

impl Default for MilpModel {
    fn default() -> Self {
        Self::new()
    }
}

impl MilpModel {
    pub fn new() -> Self {
        Self {
            tag: NEXT_MODEL_TAG.fetch_add(1, Ordering::Relaxed),
            vars: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            obj_sense: ObjSense::Maximize,
            objective_integral: false,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn num_booleans(&self) -> usize {
        self.vars.iter().filter(|v| v.kind == VarKind::Boolean).count()
    }

    pub fn add_bool(&mut self, name: impl Into<String>) -> VarRef {
        let index = self.vars.len() as u32;
        self.vars.push(VarData { name: name.into(), kind: VarKind::Boolean, lo: 0.0, hi: 1.0 });
        VarRef { model_tag: self.tag, index, kind: VarKind::Boolean }
    }

    pub fn add_continuous(
        &mut self,
        name: impl Into<String>,
        lo: f64,
        hi: f64,
    ) -> Result<VarRef, MilpError> {
        if lo.is_nan() || hi.is_nan() {
            return Err(MilpError::NotFinite);
        }
        if lo > hi {
            return Err(MilpError::InvertedBounds { lo, hi });
        }
        let index = self.vars.len() as u32;
        self.vars.push(VarData { name: name.into(), kind: VarKind::Continuous, lo, hi });
        Ok(VarRef { model_tag: self.tag, index, kind: VarKind::Continuous })
    }

    pub fn var_by_index(&self, index: usize) -> VarRef {
        VarRef { model_tag: self.tag, index: index as u32, kind: self.vars[index].kind }
    }

    pub fn name(&self, var: VarRef) -> &str {
        &self.vars[var.index()].name
    }

    pub fn bounds(&self, var: VarRef) -> (f64, f64) {
        let v = &self.vars[var.index()];
        (v.lo, v.hi)
    }

    pub fn bounds_by_index(&self, index: usize) -> (f64, f64) {
        (self.vars[index].lo, self.vars[index].hi)
    }

    pub fn kind_by_index(&self, index: usize) -> VarKind {
        self.vars[index].kind
    }

    /// Tightens the bounds of a variable (used to pin variables in
    /// formulation variants).
    pub fn set_bounds(&mut self, var: VarRef, lo: f64, hi: f64) -> Result<(), MilpError> {
        self.check(var)?;
        if lo.is_nan() || hi.is_nan() {
            return Err(MilpError::NotFinite);
        }
        if lo > hi {
            return Err(MilpError::InvertedBounds { lo, hi });
        }
        let v = &mut self.vars[var.index()];
        v.lo = lo;
        v.hi = hi;
        Ok(())
    }

    /// Pins a variable to a single value.
    pub fn fix(&mut self, var: VarRef, value: f64) -> Result<(), MilpError> {
        self.set_bounds(var, value, value)
    }

    fn check(&self, var: VarRef) -> Result<(), MilpError> {
        if var.model_tag != self.tag || var.index() >= self.vars.len() {
            return Err(MilpError::ForeignVariable);
        }
        Ok(())
    }

    fn normalize_terms(&self, terms: &[(f64, VarRef)]) -> Result<Vec<(f64, u32)>, MilpError> {
        let mut out: Vec<(f64, u32)> = Vec::with_capacity(terms.len());
        for &(c, v) in terms {
            self.check(v)?;
            if !c.is_finite() {
                return Err(MilpError::NotFinite);
            }
            out.push((c, v.index));
        }
        out.sort_by_key(|&(_, i)| i);
        let mut combined: Vec<(f64, u32)> = Vec::with_capacity(out.len());
        for (c, i) in out {
            match combined.last_mut() {
                Some(last) if last.1 == i => last.0 += c,
                _ => combined.push((c, i)),
            }
        }
        combined.retain(|&(c, _)| c != 0.0);
        Ok(combined)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: &[(f64, VarRef)],
        sense: Sense,
        rhs: f64,
    ) -> Result<(), MilpError> {
        if !rhs.is_finite() {
            return Err(MilpError::NotFinite);
        }
        let terms = self.normalize_terms(terms)?;
        if terms.is_empty() {
            return Err(MilpError::EmptyConstraint);
        }
        self.constraints.push(LinConstraint { name: name.into(), terms, sense, rhs });
        Ok(())
    }

    pub fn set_objective(
        &mut self,
        terms: &[(f64, VarRef)],
        sense: ObjSense,
    ) -> Result<(), MilpError> {
        self.objective = self.normalize_terms(terms)?;
        self.obj_sense = sense;
        Ok(())
    }

    pub fn objective(&self) -> (&[(f64, u32)], ObjSense) {
        (&self.objective, self.obj_sense)
    }

    pub fn constraints(&self) -> &[LinConstraint] {
        &self.constraints
    }

    pub fn objective_value(&self, assignment: &[f64]) -> f64 {
        self.objective.iter().map(|&(c, i)| c * assignment[i as usize]).sum()
    }

    /// Indices of constraints violated by an assignment, with tolerance
    /// scaled by the constraint magnitude.
    pub fn violated_constraints(&self, assignment: &[f64], tol: f64) -> Vec<usize> {
        let mut out = Vec::new();
        for (idx, c) in self.constraints.iter().enumerate() {
            let mut lhs = 0.0;
            let mut scale = 1.0f64;
            for &(coef, i) in &c.terms {
                lhs += coef * assignment[i as usize];
                scale = scale.max(coef.abs() * assignment[i as usize].abs());
            }
            scale = scale.max(c.rhs.abs()).max(1.0);
            let slack = match c.sense {
                Sense::Le => c.rhs - lhs,
                Sense::Ge => lhs - c.rhs,
                Sense::Eq => -(lhs - c.rhs).abs(),
            };
            if slack < -tol * scale {
                out.push(idx);
            }
        }
        out
    }

    /// Bound violations of an assignment.
    pub fn violated_bounds(&self, assignment: &[f64], tol: f64) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, v) in self.vars.iter().enumerate() {
            let x = assignment[i];
            let scale = v.lo.abs().max(v.hi.abs()).max(1.0);
            if x < v.lo - tol * scale || x > v.hi + tol * scale {
                out.push(i);
            }
        }
        out
    }

    /// Adds a Boolean variable equal to the OR of the inputs in every
    /// feasible integer solution. A single input is returned unchanged.
    pub fn encode_or(&mut self, inputs: &[VarRef]) -> Result<VarRef, MilpError> {
        self.validate_boolean_inputs(inputs)?;
        if inputs.len() == 1 {
            return Ok(inputs[0]);
        }
        let y = self.add_bool(format!("OR_{}", self.vars.len()));
        self.encode_or_into(y, inputs)?;
        Ok(y)
    }

    /// Constrains an existing Boolean `y` to equal the OR of the inputs.
    pub fn encode_or_into(&mut self, y: VarRef, inputs: &[VarRef]) -> Result<(), MilpError> {
        self.validate_boolean_inputs(inputs)?;
        self.check(y)?;
        if !y.is_boolean() {
            return Err(MilpError::NonBooleanInput);
        }
        let base = self.name(y).to_string();
        for (k, &x) in inputs.iter().enumerate() {
            self.add_constraint(
                format!("{base}_ge{k}"),
                &[(1.0, y), (-1.0, x)],
                Sense::Ge,
                0.0,
            )?;
        }
        let mut terms: Vec<(f64, VarRef)> = vec![(1.0, y)];
        terms.extend(inputs.iter().map(|&x| (-1.0, x)));
        self.add_constraint(format!("{base}_le"), &terms, Sense::Le, 0.0)?;
        Ok(())
    }

    /// Adds a Boolean variable equal to the AND of the inputs in every
    /// feasible integer solution. A single input is returned unchanged.
    pub fn encode_and(&mut self, inputs: &[VarRef]) -> Result<VarRef, MilpError> {
        self.validate_boolean_inputs(inputs)?;
        if inputs.len() == 1 {
            return Ok(inputs[0]);
        }
        let y = self.add_bool(format!("AND_{}", self.vars.len()));
        self.encode_and_into(y, inputs)?;
        Ok(y)
    }

    /// Constrains an existing Boolean `y` to equal the AND of the inputs.
    pub fn encode_and_into(&mut self, y: VarRef, inputs: &[VarRef]) -> Result<(), MilpError> {
        self.validate_boolean_inputs(inputs)?;
        self.check(y)?;
        if !y.is_boolean() {
            return Err(MilpError::NonBooleanInput);
        }
        let base = self.name(y).to_string();
        for (k, &x) in inputs.iter().enumerate() {
            self.add_constraint(
                format!("{base}_le{k}"),
                &[(1.0, y), (-1.0, x)],
                Sense::Le,
                0.0,
            )?;
        }
        let mut terms: Vec<(f64, VarRef)> = vec![(1.0, y)];
        terms.extend(inputs.iter().map(|&x| (-1.0, x)));
        self.add_constraint(
            format!("{base}_ge"),
            &terms,
            Sense::Ge,
            -((inputs.len() as f64) - 1.0),
        )?;
        Ok(())
    }

    fn validate_boolean_inputs(&self, inputs: &[VarRef]) -> Result<(), MilpError> {
        if inputs.is_empty() {
            return Err(MilpError::EmptyEncoderInput);
        }
        for &x in inputs {
            self.check(x)?;
            if !x.is_boolean() {
                return Err(MilpError::NonBooleanInput);
            }
        }
        Ok(())
    }

    /// Adds selector Booleans and constraints so that, when `y` is pushed
    /// downward by the objective, `y = min_i z_i` at the optimum:
    /// `y >= z_i - zeta * (1 - w_i)` for each i and `sum w_i >= 1`.
    ///
    /// `zeta` must cover the spread of the operands: it is checked against
    /// `max_i hi(z_i) - min_i lo(z_i)`.
    pub fn encode_min_select(
        &mut self,
        y: VarRef,
        operands: &[VarRef],
        zeta: f64,
    ) -> Result<(), MilpError> {
        if operands.is_empty() {
            return Err(MilpError::EmptyEncoderInput);
        }
        if !zeta.is_finite() {
            return Err(MilpError::NotFinite);
        }
        self.check(y)?;
        let mut max_hi = f64::NEG_INFINITY;
        let mut min_lo = f64::INFINITY;
        for &z in operands {
            self.check(z)?;
            let (lo, hi) = self.bounds(z);
            max_hi = max_hi.max(hi);
            min_lo = min_lo.min(lo);
        }
        let range = max_hi - min_lo;
        if range.is_finite() && zeta < range - 1e-9 * range.abs().max(1.0) {
            return Err(MilpError::ZetaTooSmall { zeta, range });
        }
        let base = self.name(y).to_string();
        let mut selectors = Vec::with_capacity(operands.len());
        for k in 0..operands.len() {
            selectors.push(self.add_bool(format!("{base}_sel{k}")));
        }
        for (k, (&z, &w)) in operands.iter().zip(&selectors).enumerate() {
            // y >= z - zeta + zeta*w
            self.add_constraint(
                format!("{base}_min{k}"),
                &[(1.0, y), (-1.0, z), (-zeta, w)],
                Sense::Ge,
                -zeta,
            )?;
        }
        let terms: Vec<(f64, VarRef)> = selectors.iter().map(|&w| (1.0, w)).collect();
        self.add_constraint(format!("{base}_pick"), &terms, Sense::Ge, 1.0)?;
        Ok(())
    }
}

/// The sufficient big-M constant for the SINR indicator constraints,
/// computed from instance bounds: `gammaT * (noise + N * Pmax)`. The
/// `gammaT` factor is used rather than `gammaT / (1 + gammaT)` since it is
/// the larger of the two published sufficient values.
pub fn big_m_zeta_sinr(scenario: &Scenario) -> f64 {
    scenario.sinr_threshold()
        * (scenario.noise_mw() + scenario.vues() as f64 * scenario.max_power_mw())
}

/// A tighter per-receiver big-M for the same constraint family, derived
/// from the actual channel gains toward receiver `rx` of the candidate
/// transmitter set: interference can never exceed `Pmax * sum_k H_{k,rx}`.
pub fn zeta_sinr_for_receiver(
    scenario: &Scenario,
    rx: usize,
    transmitters: &[usize],
    noise_factor: f64,
) -> f64 {
    let gains: f64 = transmitters.iter().map(|&k| scenario.gain(k, rx)).sum();
    gamma_bar(scenario.sinr_threshold())
        * (scenario.noise_mw() * noise_factor + scenario.max_power_mw() * gains)
}

// ---------------------------------------------------------------------------
// CPLEX LP format interchange
// ---------------------------------------------------------------------------

fn fmt_num(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x }; // normalize -0.0
    if x == f64::INFINITY {
        "+infinity".to_string()
    } else if x == f64::NEG_INFINITY {
        "-infinity".to_string()
    } else {
        format!("{x}")
    }
}

fn write_terms(out: &mut String, terms: &[(f64, u32)], vars: &[VarData], rank: &[u32]) {
    let mut ordered: Vec<(f64, u32)> = terms.to_vec();
    ordered.sort_by_key(|&(_, i)| rank[i as usize]);
    for &(c, i) in &ordered {
        let (sign, mag) = if c < 0.0 { ('-', -c) } else { ('+', c) };
        out.push(' ');
        out.push(sign);
        out.push(' ');
        out.push_str(&fmt_num(mag));
        out.push(' ');
        out.push_str(&vars[i as usize].name);
    }
}

/// Variable order by first appearance in the emitted file: objective terms,
/// then constraints in order, then any remaining variables in id order.
/// Using this order for the Bounds/Binaries sections makes
/// export -> parse -> export byte-identical.
fn appearance_order(model: &MilpModel) -> Vec<u32> {
    let mut seen = vec![false; model.vars.len()];
    let mut order = Vec::with_capacity(model.vars.len());
    let push = |i: u32, seen: &mut Vec<bool>, order: &mut Vec<u32>| {
        if !seen[i as usize] {
            seen[i as usize] = true;
            order.push(i);
        }
    };
    for &(_, i) in &model.objective {
        push(i, &mut seen, &mut order);
    }
    for c in &model.constraints {
        for &(_, i) in &c.terms {
            push(i, &mut seen, &mut order);
        }
    }
    for i in 0..model.vars.len() as u32 {
        push(i, &mut seen, &mut order);
    }
    order
}

/// Serializes a model in CPLEX LP syntax. Variables appear in a canonical
/// order (first appearance), which makes export -> parse -> export
/// byte-identical.
pub fn write_lp(model: &MilpModel) -> String {
    let order = appearance_order(model);
    let mut rank = vec![0u32; model.vars.len()];
    for (k, &i) in order.iter().enumerate() {
        rank[i as usize] = k as u32;
    }
    let mut out = String::new();
    out.push_str(match model.obj_sense {
        ObjSense::Maximize => "Maximize\n",
        ObjSense::Minimize => "Minimize\n",
    });
    out.push_str(" obj:");
    write_terms(&mut out, &model.objective, &model.vars, &rank);
    out.push('\n');
    out.push_str("Subject To\n");
    for c in &model.constraints {
        out.push(' ');
        out.push_str(&c.name);
        out.push(':');
        write_terms(&mut out, &c.terms, &model.vars, &rank);
        out.push(' ');
        out.push_str(c.sense.token());
        out.push(' ');
        out.push_str(&fmt_num(c.rhs));
        out.push('\n');
    }
    out.push_str("Bounds\n");
    for &i in &order {
        let v = &model.vars[i as usize];
        let default_bounds = match v.kind {
            VarKind::Boolean => v.lo == 0.0 && v.hi == 1.0,
            VarKind::Continuous => false,
        };
        if default_bounds {
            continue;
        }
        if v.lo == v.hi {
            out.push_str(&format!(" {} = {}\n", v.name, fmt_num(v.lo)));
        } else if v.lo == f64::NEG_INFINITY && v.hi == f64::INFINITY {
            out.push_str(&format!(" {} free\n", v.name));
        } else {
            out.push_str(&format!(" {} <= {} <= {}\n", fmt_num(v.lo), v.name, fmt_num(v.hi)));
        }
    }
    let binaries: Vec<&str> = order
        .iter()
        .filter(|&&i| model.vars[i as usize].kind == VarKind::Boolean)
        .map(|&i| model.vars[i as usize].name.as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for name in binaries {
            out.push(' ');
            out.push_str(name);
            out.push('\n');
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LpSection {
    Objective(ObjSense),
    Constraints,
    Bounds,
    Binaries,
    End,
}

struct LpParser {
    model: MilpModel,
    names: std::collections::HashMap<String, u32>,
}

impl LpParser {
    fn var(&mut self, name: &str) -> VarRef {
        if let Some(&i) = self.names.get(name) {
            return self.model.var_by_index(i as usize);
        }
        // Variables default to continuous [0, +inf); Bounds/Binaries lines
        // seen later adjust kind and bounds.
        let v = self
            .model
            .add_continuous(name.to_string(), 0.0, f64::INFINITY)
            .expect("default bounds are valid");
        self.names.insert(name.to_string(), v.index);
        v
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.'
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Label(String),
    Plus,
    Minus,
    Le,
    Ge,
    Eq,
}

fn tokenize(line: &str, line_no: usize) -> Result<Vec<Tok>, MilpError> {
    let mut toks = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '\\' {
            break; // comment to end of line
        } else if c == '+' {
            toks.push(Tok::Plus);
            i += 1;
        } else if c == '-' {
            toks.push(Tok::Minus);
            i += 1;
        } else if c == '<' || c == '>' || c == '=' {
            let mut j = i + 1;
            if j < chars.len() && chars[j] == '=' {
                j += 1;
            }
            toks.push(match c {
                '<' => Tok::Le,
                '>' => Tok::Ge,
                _ => Tok::Eq,
            });
            i = j;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_digit()
                    || chars[i] == '.'
                    || chars[i] == 'e'
                    || chars[i] == 'E'
                    || ((chars[i] == '+' || chars[i] == '-')
                        && i > start
                        && (chars[i - 1] == 'e' || chars[i - 1] == 'E')))
            {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse::<f64>().map_err(|_| MilpError::Parse {
                line: line_no,
                message: format!("bad number `{s}`"),
            })?;
            toks.push(Tok::Num(v));
        } else if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident(chars[i]) {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            if i < chars.len() && chars[i] == ':' {
                i += 1;
                toks.push(Tok::Label(s));
            } else {
                toks.push(Tok::Ident(s));
            }
        } else {
            return Err(MilpError::Parse {
                line: line_no,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(toks)
}

fn ident_num(tok: &Tok) -> Option<f64> {
    match tok {
        Tok::Num(v) => Some(*v),
        Tok::Ident(s) => {
            let ls = s.to_ascii_lowercase();
            if ls == "infinity" || ls == "inf" {
                Some(f64::INFINITY)
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Parses `[label:] terms [sense rhs]`, returning the terms and optionally
/// the relation.
fn parse_expr(
    toks: &[Tok],
    parser: &mut LpParser,
    line_no: usize,
) -> Result<(Option<String>, Vec<(f64, VarRef)>, Option<(Sense, f64)>), MilpError> {
    let mut idx = 0;
    let label = if let Some(Tok::Label(name)) = toks.first() {
        idx = 1;
        Some(name.clone())
    } else {
        None
    };
    let mut terms: Vec<(f64, VarRef)> = Vec::new();
    let mut relation = None;
    while idx < toks.len() {
        match &toks[idx] {
            Tok::Le | Tok::Ge | Tok::Eq => {
                let sense = match toks[idx] {
                    Tok::Le => Sense::Le,
                    Tok::Ge => Sense::Ge,
                    _ => Sense::Eq,
                };
                idx += 1;
                let mut sign = 1.0;
                while idx < toks.len() && matches!(toks[idx], Tok::Plus | Tok::Minus) {
                    if toks[idx] == Tok::Minus {
                        sign = -sign;
                    }
                    idx += 1;
                }
                let rhs = toks
                    .get(idx)
                    .and_then(ident_num)
                    .ok_or_else(|| MilpError::Parse {
                        line: line_no,
                        message: "expected number after relation".into(),
                    })?;
                relation = Some((sense, sign * rhs));
                idx += 1;
                if idx != toks.len() {
                    return Err(MilpError::Parse {
                        line: line_no,
                        message: "trailing tokens after right-hand side".into(),
                    });
                }
                break;
            }
            _ => {
                let mut sign = 1.0;
                while idx < toks.len() && matches!(toks[idx], Tok::Plus | Tok::Minus) {
                    if toks[idx] == Tok::Minus {
                        sign = -sign;
                    }
                    idx += 1;
                }
                let coef = if let Some(Tok::Num(v)) = toks.get(idx) {
                    idx += 1;
                    *v
                } else {
                    1.0
                };
                match toks.get(idx) {
                    Some(Tok::Ident(name)) => {
                        let var = parser.var(name);
                        terms.push((sign * coef, var));
                        idx += 1;
                    }
                    _ => {
                        return Err(MilpError::Parse {
                            line: line_no,
                            message: "expected variable name".into(),
                        })
                    }
                }
            }
        }
    }
    Ok((label, terms, relation))
}

fn parse_bounds_line(
    toks: &[Tok],
    parser: &mut LpParser,
    line_no: usize,
) -> Result<(), MilpError> {
    // Forms: `lo <= x <= hi`, `x <= hi`, `x >= lo`, `x = v`, `x free`.
    let err = |message: &str| MilpError::Parse { line: line_no, message: message.into() };
    let read_num = |toks: &[Tok], idx: &mut usize| -> Option<f64> {
        let mut sign = 1.0;
        while matches!(toks.get(*idx), Some(Tok::Plus) | Some(Tok::Minus)) {
            if let Some(Tok::Minus) = toks.get(*idx) {
                sign = -sign;
            }
            *idx += 1;
        }
        let v = toks.get(*idx).and_then(ident_num)?;
        *idx += 1;
        Some(sign * v)
    };
    let mut idx = 0;
    if let Some(lo) = read_num(toks, &mut idx) {
        if !matches!(toks.get(idx), Some(Tok::Le)) {
            return Err(err("expected `<=` after lower bound"));
        }
        idx += 1;
        let name = match toks.get(idx) {
            Some(Tok::Ident(n)) => n.clone(),
            _ => return Err(err("expected variable name")),
        };
        idx += 1;
        if !matches!(toks.get(idx), Some(Tok::Le)) {
            return Err(err("expected `<=` after variable"));
        }
        idx += 1;
        let hi = read_num(toks, &mut idx).ok_or_else(|| err("expected upper bound"))?;
        let var = parser.var(&name);
        parser.model.set_bounds(var, lo, hi)?;
        return Ok(());
    }
    let name = match toks.get(idx) {
        Some(Tok::Ident(n)) => n.clone(),
        _ => return Err(err("expected variable name or bound")),
    };
    idx += 1;
    match toks.get(idx) {
        Some(Tok::Ident(kw)) if kw.eq_ignore_ascii_case("free") => {
            let var = parser.var(&name);
            parser.model.set_bounds(var, f64::NEG_INFINITY, f64::INFINITY)?;
            Ok(())
        }
        Some(Tok::Le) => {
            idx += 1;
            let hi = read_num(toks, &mut idx).ok_or_else(|| err("expected upper bound"))?;
            let var = parser.var(&name);
            let (lo, _) = parser.model.bounds(var);
            parser.model.set_bounds(var, lo, hi)?;
            Ok(())
        }
        Some(Tok::Ge) => {
            idx += 1;
            let lo = read_num(toks, &mut idx).ok_or_else(|| err("expected lower bound"))?;
            let var = parser.var(&name);
            let (_, hi) = parser.model.bounds(var);
            parser.model.set_bounds(var, lo, hi)?;
            Ok(())
        }
        Some(Tok::Eq) => {
            idx += 1;
            let v = read_num(toks, &mut idx).ok_or_else(|| err("expected value"))?;
            let var = parser.var(&name);
            parser.model.set_bounds(var, v, v)?;
            Ok(())
        }
        _ => Err(err("malformed bounds line")),
    }
}

/// Parses a model from CPLEX LP syntax.
pub fn parse_lp(text: &str) -> Result<MilpModel, MilpError> {
    let mut parser = LpParser { model: MilpModel::new(), names: Default::default() };
    let mut section: Option<LpSection> = None;
    let mut objective_terms: Vec<(f64, VarRef)> = Vec::new();
    let mut obj_sense = ObjSense::Maximize;
    let mut booleans: Vec<String> = Vec::new();
    let mut auto_constraint = 0usize;

    for (line_idx, raw) in text.lines().enumerate() {
        let line_no = line_idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('\\') {
            continue;
        }
        let lower = trimmed.to_ascii_lowercase();
        let new_section = match lower.as_str() {
            "maximize" | "max" | "maximise" => Some(LpSection::Objective(ObjSense::Maximize)),
            "minimize" | "min" | "minimise" => Some(LpSection::Objective(ObjSense::Minimize)),
            "subject to" | "such that" | "st" | "s.t." => Some(LpSection::Constraints),
            "bounds" | "bound" => Some(LpSection::Bounds),
            "binaries" | "binary" | "bin" => Some(LpSection::Binaries),
            "end" => Some(LpSection::End),
            "generals" | "general" | "integers" => {
                return Err(MilpError::Parse {
                    line: line_no,
                    message: "general integer variables are not supported".into(),
                })
            }
            _ => None,
        };
        if let Some(s) = new_section {
            if let Some(LpSection::Objective(sense)) = section {
                obj_sense = sense;
            }
            section = Some(s);
            continue;
        }
        let toks = tokenize(trimmed, line_no)?;
        if toks.is_empty() {
            continue;
        }
        match section {
            Some(LpSection::Objective(sense)) => {
                obj_sense = sense;
                let (_, mut terms, relation) = parse_expr(&toks, &mut parser, line_no)?;
                if relation.is_some() {
                    return Err(MilpError::Parse {
                        line: line_no,
                        message: "relation in objective".into(),
                    });
                }
                objective_terms.append(&mut terms);
            }
            Some(LpSection::Constraints) => {
                let (label, terms, relation) = parse_expr(&toks, &mut parser, line_no)?;
                let (sense, rhs) = relation.ok_or_else(|| MilpError::Parse {
                    line: line_no,
                    message: "constraint missing relation".into(),
                })?;
                let name = label.unwrap_or_else(|| {
                    let n = format!("c{auto_constraint}");
                    n
                });
                auto_constraint += 1;
                parser.model.add_constraint(name, &terms, sense, rhs)?;
            }
            Some(LpSection::Bounds) => parse_bounds_line(&toks, &mut parser, line_no)?,
            Some(LpSection::Binaries) => {
                for tok in &toks {
                    match tok {
                        Tok::Ident(name) => booleans.push(name.clone()),
                        _ => {
                            return Err(MilpError::Parse {
                                line: line_no,
                                message: "expected variable names".into(),
                            })
                        }
                    }
                }
            }
            Some(LpSection::End) | None => {
                return Err(MilpError::Parse {
                    line: line_no,
                    message: "content outside of any section".into(),
                })
            }
        }
    }

    parser.model.set_objective(&objective_terms, obj_sense)?;
    for name in booleans {
        let var = parser.var(&name);
        let idx = var.index();
        // Reclassify as Boolean; keep explicitly-set bounds, defaulting the
        // open upper bound to 1.
        let (lo, hi) = parser.model.bounds_by_index(idx);
        let hi = if hi == f64::INFINITY { 1.0 } else { hi };
        parser.model.vars[idx].kind = VarKind::Boolean;
        parser.model.vars[idx].lo = lo;
        parser.model.vars[idx].hi = hi;
    }
    Ok(parser.model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn or_encoding_forces_one() {
        let mut m = MilpModel::new();
        let xs: Vec<VarRef> = (0..3).map(|i| m.add_bool(format!("x{i}"))).collect();
        let y = m.encode_or(&xs).unwrap();
        m.fix(xs[0], 0.0).unwrap();
        m.fix(xs[1], 0.0).unwrap();
        m.fix(xs[2], 1.0).unwrap();
        // In any feasible integer solution y = 1: check by evaluating both
        // candidate values.
        let mut assign = vec![0.0, 0.0, 1.0, 1.0];
        assert!(m.violated_constraints(&assign, 1e-9).is_empty());
        assign[y.index()] = 0.0;
        assert!(!m.violated_constraints(&assign, 1e-9).is_empty());
    }

    #[test]
    fn and_encoding_truth_pairs() {
        let mut m = MilpModel::new();
        let a = m.add_bool("a");
        let b = m.add_bool("b");
        let y = m.encode_and(&[a, b]).unwrap();
        for (va, vb) in [(1.0, 1.0), (1.0, 0.0), (0.0, 1.0), (0.0, 0.0)] {
            let expected = if va == 1.0 && vb == 1.0 { 1.0 } else { 0.0 };
            let mut assign = vec![va, vb, expected];
            assert!(m.violated_constraints(&assign, 1e-9).is_empty());
            assign[y.index()] = 1.0 - expected;
            assert!(!m.violated_constraints(&assign, 1e-9).is_empty());
        }
    }

    #[test]
    fn single_input_encoders_return_input() {
        let mut m = MilpModel::new();
        let a = m.add_bool("a");
        assert_eq!(m.encode_or(&[a]).unwrap(), a);
        assert_eq!(m.encode_and(&[a]).unwrap(), a);
        assert_eq!(m.num_constraints(), 0);
    }

    #[test]
    fn min_select_rejects_small_zeta() {
        let mut m = MilpModel::new();
        let y = m.add_continuous("y", 0.0, 10.0).unwrap();
        let z1 = m.add_continuous("z1", 0.0, 10.0).unwrap();
        let z2 = m.add_continuous("z2", 0.0, 10.0).unwrap();
        assert!(matches!(
            m.encode_min_select(y, &[z1, z2], 5.0),
            Err(MilpError::ZetaTooSmall { .. })
        ));
        assert!(m.encode_min_select(y, &[z1, z2], 10.0).is_ok());
    }

    #[test]
    fn empty_encoder_input_rejected() {
        let mut m = MilpModel::new();
        assert!(matches!(m.encode_or(&[]), Err(MilpError::EmptyEncoderInput)));
        assert!(matches!(m.encode_and(&[]), Err(MilpError::EmptyEncoderInput)));
    }

    #[test]
    fn foreign_variable_rejected() {
        let mut m1 = MilpModel::new();
        let mut m2 = MilpModel::new();
        let x = m1.add_bool("x");
        assert!(matches!(
            m2.add_constraint("c", &[(1.0, x)], Sense::Le, 1.0),
            Err(MilpError::ForeignVariable)
        ));
    }

    #[test]
    fn duplicate_terms_combined() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, 1.0).unwrap();
        m.add_constraint("c", &[(1.0, x), (2.0, x)], Sense::Le, 3.0).unwrap();
        assert_eq!(m.constraints()[0].terms, vec![(3.0, x.index)]);
    }

    #[test]
    fn big_m_zeta_plug_in() {
        use crate::model::{RadioGrid, ScenarioBuilder};
        let grid = RadioGrid::new(1, 1).unwrap();
        let s = ScenarioBuilder::uniform(2, grid).build().unwrap();
        // gammaT=1, noise=1, N=2, Pmax=1 -> 1 * (1 + 2) = 3.
        assert!((big_m_zeta_sinr(&s) - 3.0).abs() < 1e-12);
        let mut b = ScenarioBuilder::uniform(2, grid);
        b.sinr_threshold = 0.0;
        let s0 = b.build().unwrap();
        assert_eq!(big_m_zeta_sinr(&s0), 0.0);
    }

    #[test]
    fn lp_round_trip_is_byte_identical() {
        let mut m = MilpModel::new();
        let x = m.add_bool("X_0_0_0_0");
        let p = m.add_continuous("P_0_0_0", 0.0, 251.18864315095797).unwrap();
        let z = m.add_continuous("Z_0_1", 0.0, 1.0).unwrap();
        m.add_constraint("power", &[(1.0, p)], Sense::Le, 251.18864315095797).unwrap();
        m.add_constraint("link", &[(1.0, p), (-251.18864315095797, x)], Sense::Le, 0.0).unwrap();
        m.add_constraint("conn", &[(1.0, z), (-1.0, x)], Sense::Le, 0.0).unwrap();
        m.set_objective(&[(1.0, z)], ObjSense::Maximize).unwrap();
        let first = write_lp(&m);
        let parsed = parse_lp(&first).unwrap();
        let second = write_lp(&parsed);
        assert_eq!(first, second);
        let third = write_lp(&parse_lp(&second).unwrap());
        assert_eq!(second, third);
    }

    #[test]
    fn lp_parse_reads_fixed_and_free_bounds() {
        let text = "Minimize\n obj: + 1 x + 1 y\nSubject To\n c0: + 1 x + 1 y >= 2\nBounds\n x = 1\n y free\nEnd\n";
        let m = parse_lp(text).unwrap();
        let (_, sense) = m.objective();
        assert_eq!(sense, ObjSense::Minimize);
        assert_eq!(m.bounds_by_index(0), (1.0, 1.0));
        assert_eq!(m.bounds_by_index(1), (f64::NEG_INFINITY, f64::INFINITY));
    }
}
