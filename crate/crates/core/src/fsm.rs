//! In-memory model of a clocked Moore machine with transition pulses.
//!
//! A machine is a list of states, each carrying its Moore output
//! assignments and an ordered list of guarded transitions. Transitions may
//! emit pulse outputs, which are asserted only during the cycle in which the
//! transition fires. An optional reset input overrides every guard and
//! forces the initial state with no pulses.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

/// Above this many inputs exhaustive validation is refused.
pub const MAX_ENUMERATED_INPUTS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("guard references unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state `{state}` has {matches} enabled transitions for {valuation}; expected exactly one")]
    ContractViolation {
        state: String,
        valuation: InputValuation,
        matches: usize,
    },
}

/// Boolean guard over input signals.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GuardExpr {
    Const(bool),
    Var(String),
    Not(Box<GuardExpr>),
    And(Box<GuardExpr>, Box<GuardExpr>),
    Or(Box<GuardExpr>, Box<GuardExpr>),
}

impl GuardExpr {
    pub fn var(name: impl Into<String>) -> Self {
        GuardExpr::Var(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: GuardExpr) -> Self {
        GuardExpr::Not(Box::new(e))
    }

    pub fn and(a: GuardExpr, b: GuardExpr) -> Self {
        GuardExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: GuardExpr, b: GuardExpr) -> Self {
        GuardExpr::Or(Box::new(a), Box::new(b))
    }

    /// Visits every variable leaf, left to right.
    pub fn for_each_var<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            GuardExpr::Const(_) => {}
            GuardExpr::Var(v) => f(v),
            GuardExpr::Not(e) => e.for_each_var(f),
            GuardExpr::And(a, b) | GuardExpr::Or(a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
        }
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.for_each_var(&mut |v| {
            out.insert(v);
        });
        out
    }
}

/// Assignment of a bit to every declared input.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct InputValuation(BTreeMap<String, bool>);

impl InputValuation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, bool)>,
        S: Into<String>,
    {
        InputValuation(pairs.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    /// Bit `i` of `bits` drives `names[i]`.
    pub fn from_bits(names: &[String], bits: u64) -> Self {
        InputValuation(
            names
                .iter()
                .enumerate()
                .map(|(i, n)| (n.clone(), (bits >> i) & 1 == 1))
                .collect(),
        )
    }

    pub fn set(&mut self, name: impl Into<String>, value: bool) {
        self.0.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<bool> {
        self.0.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, bool)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Every valuation of `names`, in binary counting order with `names[0]`
    /// as the least significant bit.
    pub fn enumerate(names: &[String]) -> impl Iterator<Item = InputValuation> + '_ {
        assert!(names.len() < 64, "too many inputs to enumerate");
        (0..1u64 << names.len()).map(move |bits| InputValuation::from_bits(names, bits))
    }
}

impl fmt::Display for InputValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}={}", k, u8::from(*v))?;
        }
        f.write_str("}")
    }
}

pub fn eval_guard(expr: &GuardExpr, v: &InputValuation) -> Result<bool, ModelError> {
    Ok(match expr {
        GuardExpr::Const(b) => *b,
        GuardExpr::Var(name) => v
            .get(name)
            .ok_or_else(|| ModelError::UnknownVariable(name.clone()))?,
        GuardExpr::Not(e) => !eval_guard(e, v)?,
        GuardExpr::And(a, b) => eval_guard(a, v)? & eval_guard(b, v)?,
        GuardExpr::Or(a, b) => eval_guard(a, v)? | eval_guard(b, v)?,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub guard: GuardExpr,
    pub destination: String,
    pub pulses: BTreeSet<String>,
}

impl Transition {
    pub fn new(guard: GuardExpr, destination: impl Into<String>) -> Self {
        Transition {
            guard,
            destination: destination.into(),
            pulses: BTreeSet::new(),
        }
    }

    pub fn emit(mut self, pulse: impl Into<String>) -> Self {
        self.pulses.insert(pulse.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateDef {
    pub name: String,
    /// Outputs not listed here are 0 while in this state.
    pub moore_assignments: BTreeMap<String, bool>,
    pub transitions: Vec<Transition>,
}

impl StateDef {
    pub fn new(name: impl Into<String>) -> Self {
        StateDef {
            name: name.into(),
            moore_assignments: BTreeMap::new(),
            transitions: Vec::new(),
        }
    }

    pub fn assign(mut self, output: impl Into<String>, value: bool) -> Self {
        self.moore_assignments.insert(output.into(), value);
        self
    }

    pub fn transition(mut self, t: Transition) -> Self {
        self.transitions.push(t);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FsmSpec {
    pub name: String,
    pub inputs: Vec<String>,
    pub moore_outputs: Vec<String>,
    pub pulse_outputs: Vec<String>,
    pub states: Vec<StateDef>,
    pub initial_state: String,
    pub reset_input: Option<String>,
}

/// Result of stepping a machine by one clock edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub next: String,
    pub pulses: BTreeSet<String>,
}

impl FsmSpec {
    pub fn state(&self, name: &str) -> Option<&StateDef> {
        self.states.iter().find(|s| s.name == name)
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s.name == name)
    }

    pub fn state_names(&self) -> impl Iterator<Item = &str> {
        self.states.iter().map(|s| s.name.as_str())
    }

    pub fn transition_count(&self) -> usize {
        self.states.iter().map(|s| s.transitions.len()).sum()
    }

    fn reset_asserted(&self, v: &InputValuation) -> bool {
        self.reset_input
            .as_deref()
            .and_then(|r| v.get(r))
            .unwrap_or(false)
    }

    /// Advances the machine one cycle from `current` under `v`.
    ///
    /// The reset input, when asserted, wins over every guard. Otherwise
    /// exactly one guard must hold; anything else means the machine was not
    /// validated and is reported as a contract violation.
    pub fn step(&self, current: &str, v: &InputValuation) -> Result<Step, ModelError> {
        let state = self
            .state(current)
            .ok_or_else(|| ModelError::UnknownState(current.to_string()))?;
        if self.reset_asserted(v) {
            return Ok(Step {
                next: self.initial_state.clone(),
                pulses: BTreeSet::new(),
            });
        }
        let mut matched = None;
        let mut matches = 0;
        for t in &state.transitions {
            if eval_guard(&t.guard, v)? {
                matches += 1;
                matched.get_or_insert(t);
            }
        }
        match (matches, matched) {
            (1, Some(t)) => Ok(Step {
                next: t.destination.clone(),
                pulses: t.pulses.clone(),
            }),
            _ => Err(ModelError::ContractViolation {
                state: current.to_string(),
                valuation: v.clone(),
                matches,
            }),
        }
    }

    /// Moore outputs of `state` in declaration order. Takes no input
    /// valuation: outputs depend on the state alone.
    pub fn moore_output(&self, state: &str) -> Result<Vec<(String, bool)>, ModelError> {
        let def = self
            .state(state)
            .ok_or_else(|| ModelError::UnknownState(state.to_string()))?;
        Ok(self
            .moore_outputs
            .iter()
            .map(|o| (o.clone(), def.moore_assignments.get(o).copied().unwrap_or(false)))
            .collect())
    }

    /// Moore outputs as a bit vector aligned with `moore_outputs`.
    pub fn moore_bits(&self, state: &str) -> Result<Vec<bool>, ModelError> {
        Ok(self.moore_output(state)?.into_iter().map(|(_, b)| b).collect())
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }
}

pub fn step_spec(spec: &FsmSpec, current: &str, v: &InputValuation) -> Result<Step, ModelError> {
    spec.step(current, v)
}

pub fn moore_output(spec: &FsmSpec, state: &str) -> Result<Vec<(String, bool)>, ModelError> {
    spec.moore_output(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FindingKind {
    Overlap,
    Gap,
    Structural,
}

impl fmt::Display for FindingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FindingKind::Overlap => "overlap",
            FindingKind::Gap => "gap",
            FindingKind::Structural => "structural",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub kind: FindingKind,
    pub state: Option<String>,
    pub valuation: Option<InputValuation>,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if let Some(s) = &self.state {
            write!(f, " state={}", s)?;
        }
        if let Some(v) = &self.valuation {
            write!(f, " valuation={}", v)?;
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn count(&self, kind: FindingKind) -> usize {
        self.findings.iter().filter(|f| f.kind == kind).count()
    }

    fn structural(&mut self, state: Option<&str>, message: String) {
        self.findings.push(Finding {
            kind: FindingKind::Structural,
            state: state.map(str::to_string),
            valuation: None,
            message,
        });
    }
}

/// Checks structure, then enumerates every input valuation per state to
/// confirm exactly one guard holds. Valuations with reset asserted are
/// skipped since reset overrides the guards.
pub fn validate(spec: &FsmSpec) -> ValidationReport {
    let mut report = ValidationReport::default();

    let mut seen = HashSet::new();
    for s in &spec.states {
        if !seen.insert(s.name.as_str()) {
            report.structural(Some(&s.name), format!("duplicate state name `{}`", s.name));
        }
    }
    let mut signals = HashSet::new();
    for sig in spec
        .inputs
        .iter()
        .chain(&spec.moore_outputs)
        .chain(&spec.pulse_outputs)
    {
        if !signals.insert(sig.as_str()) {
            report.structural(None, format!("duplicate signal name `{}`", sig));
        }
    }
    if spec.state(&spec.initial_state).is_none() {
        report.structural(
            None,
            format!("initial state `{}` is not declared", spec.initial_state),
        );
    }
    if let Some(r) = &spec.reset_input {
        if !spec.inputs.contains(r) {
            report.structural(None, format!("reset input `{}` is not a declared input", r));
        }
    }

    let mut guards_ok = true;
    for s in &spec.states {
        for out in s.moore_assignments.keys() {
            if !spec.moore_outputs.contains(out) {
                report.structural(Some(&s.name), format!("assignment to undeclared output `{}`", out));
            }
        }
        for t in &s.transitions {
            if spec.state(&t.destination).is_none() {
                report.structural(
                    Some(&s.name),
                    format!("transition to undeclared state `{}`", t.destination),
                );
            }
            for p in &t.pulses {
                if !spec.pulse_outputs.contains(p) {
                    report.structural(Some(&s.name), format!("emits undeclared pulse `{}`", p));
                }
            }
            for v in t.guard.variables() {
                if !spec.inputs.iter().any(|i| i == v) {
                    guards_ok = false;
                    report.structural(Some(&s.name), format!("guard references undeclared input `{}`", v));
                }
            }
        }
    }

    if spec.inputs.len() > MAX_ENUMERATED_INPUTS {
        report.structural(
            None,
            format!(
                "{} inputs exceed the enumeration limit of {}",
                spec.inputs.len(),
                MAX_ENUMERATED_INPUTS
            ),
        );
        return report;
    }
    if !guards_ok {
        return report;
    }

    for s in &spec.states {
        for v in InputValuation::enumerate(&spec.inputs) {
            if spec.reset_asserted(&v) {
                continue;
            }
            let enabled = s
                .transitions
                .iter()
                .filter(|t| eval_guard(&t.guard, &v).unwrap_or(false))
                .count();
            let kind = match enabled {
                1 => continue,
                0 => FindingKind::Gap,
                _ => FindingKind::Overlap,
            };
            report.findings.push(Finding {
                kind,
                state: Some(s.name.clone()),
                valuation: Some(v),
                message: format!("{} transitions enabled", enabled),
            });
        }
    }
    report
}
