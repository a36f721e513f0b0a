//! Cycle-accurate simulation of a machine, alone or closed-loop with the
//! interval timer.
//!
//! Each closed-loop tick runs in a fixed order:
//!
//! 1. read the external `c` and `reset` bits;
//! 2. derive `ts`/`tl` from the timer count as it stood before this tick;
//! 3. step the machine with `{reset, c, ts, tl}`;
//! 4. record the tick with the *current* state's Moore outputs;
//! 5. commit the next state and advance (or restart, on `st`) the timer.
//!
//! New lights therefore appear one tick after the guard that caused them,
//! as with registered outputs.

use std::collections::{HashSet, VecDeque};
use std::io::{self, Write};

use thiserror::Error;
use vcd::{IdCode, TimescaleUnit, Value};

use crate::fsm::{FsmSpec, InputValuation, ModelError};
use crate::itlc::LightOutputs;
use crate::timer::{timer_commit, timer_outputs, TimerConfig, TimerState};

/// Inputs a machine must declare, in any order, to run closed-loop.
pub const CLOSED_LOOP_INPUTS: [&str; 4] = ["reset", "c", "ts", "tl"];
pub const START_PULSE: &str = "st";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ExternalInputs {
    pub c: bool,
    pub reset: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stimulus(Vec<ExternalInputs>);

impl Stimulus {
    pub fn new(ticks: Vec<ExternalInputs>) -> Result<Self, SimError> {
        if ticks.is_empty() {
            return Err(SimError::Config("stimulus must cover at least one tick".into()));
        }
        Ok(Stimulus(ticks))
    }

    /// `horizon` ticks with the sensor held at `c` and reset low.
    pub fn constant(horizon: usize, c: bool) -> Result<Self, SimError> {
        Self::new(vec![ExternalInputs { c, reset: false }; horizon])
    }

    pub fn ticks(&self) -> &[ExternalInputs] {
        &self.0
    }

    pub fn horizon(&self) -> usize {
        self.0.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct StimulusError {
    pub line: usize,
    pub message: String,
}

/// Parses the `.stim` format:
///
/// ```text
/// horizon <n>
/// <tick> c=<bit> [reset=<bit>]
/// ```
///
/// Ticks must be strictly increasing and below the horizon. Values hold
/// until the next listed tick; both start at 0.
pub fn parse_stimulus(text: &str) -> Result<Stimulus, StimulusError> {
    let err = |line: usize, message: String| StimulusError { line, message };
    let mut horizon: Option<usize> = None;
    let mut events: Vec<(usize, Option<bool>, Option<bool>)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let first = fields.next().unwrap_or_default();
        if first == "horizon" {
            if horizon.is_some() {
                return Err(err(line_no, "duplicate horizon line".into()));
            }
            let n: usize = fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| err(line_no, "expected `horizon <n>`".into()))?;
            if fields.next().is_some() {
                return Err(err(line_no, "unexpected text after horizon".into()));
            }
            if n == 0 {
                return Err(err(line_no, "horizon must be at least 1".into()));
            }
            horizon = Some(n);
            continue;
        }
        let Some(h) = horizon else {
            return Err(err(line_no, "tick line before `horizon`".into()));
        };
        let tick: usize = first
            .parse()
            .map_err(|_| err(line_no, format!("`{}` is not a tick number", first)))?;
        if let Some((prev, ..)) = events.last() {
            if tick <= *prev {
                return Err(err(
                    line_no,
                    format!("non-monotonic tick {} after {}", tick, prev),
                ));
            }
        }
        if tick >= h {
            return Err(err(line_no, format!("tick {} is beyond horizon {}", tick, h)));
        }
        let (mut c, mut reset) = (None, None);
        for field in fields {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| err(line_no, format!("expected key=bit, found `{}`", field)))?;
            let bit = match value {
                "0" => false,
                "1" => true,
                _ => return Err(err(line_no, format!("`{}` is not a bit", value))),
            };
            let slot = match key {
                "c" => &mut c,
                "reset" => &mut reset,
                _ => return Err(err(line_no, format!("unknown signal `{}`", key))),
            };
            if slot.replace(bit).is_some() {
                return Err(err(line_no, format!("`{}` given twice", key)));
            }
        }
        if c.is_none() && reset.is_none() {
            return Err(err(line_no, "tick line sets no signals".into()));
        }
        events.push((tick, c, reset));
    }

    let horizon = horizon.ok_or_else(|| err(1, "missing `horizon <n>` line".into()))?;
    let mut ticks = Vec::with_capacity(horizon);
    let mut current = ExternalInputs::default();
    let mut pending = events.into_iter().peekable();
    for t in 0..horizon {
        if let Some((_, c, reset)) = pending.next_if(|(tick, ..)| *tick == t) {
            current.c = c.unwrap_or(current.c);
            current.reset = reset.unwrap_or(current.reset);
        }
        ticks.push(current);
    }
    Ok(Stimulus(ticks))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TickRecord {
    pub tick: u64,
    pub state: String,
    /// Aligned with [`Trace::inputs`].
    pub inputs: Vec<bool>,
    /// Aligned with [`Trace::moore_outputs`].
    pub moore: Vec<bool>,
    /// Aligned with [`Trace::pulse_outputs`].
    pub pulses: Vec<bool>,
    /// Timer count before this tick's commit; `None` in open-loop runs.
    pub timer_count: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub spec_name: String,
    pub timer: Option<TimerConfig>,
    pub state_names: Vec<String>,
    pub inputs: Vec<String>,
    pub moore_outputs: Vec<String>,
    pub pulse_outputs: Vec<String>,
    pub records: Vec<TickRecord>,
}

impl Trace {
    fn empty(spec: &FsmSpec, timer: Option<TimerConfig>) -> Self {
        Trace {
            spec_name: spec.name.clone(),
            timer,
            state_names: spec.states.iter().map(|s| s.name.clone()).collect(),
            inputs: spec.inputs.clone(),
            moore_outputs: spec.moore_outputs.clone(),
            pulse_outputs: spec.pulse_outputs.clone(),
            records: Vec::new(),
        }
    }

    /// Value of any input, Moore output or pulse in `rec`.
    pub fn value(&self, rec: &TickRecord, name: &str) -> Option<bool> {
        let find = |names: &[String], bits: &[bool]| {
            names.iter().position(|n| n == name).map(|i| bits[i])
        };
        find(&self.inputs, &rec.inputs)
            .or_else(|| find(&self.moore_outputs, &rec.moore))
            .or_else(|| find(&self.pulse_outputs, &rec.pulses))
    }

    pub fn lights(&self, rec: &TickRecord) -> LightOutputs {
        LightOutputs::from_named(
            self.moore_outputs
                .iter()
                .map(String::as_str)
                .zip(rec.moore.iter().copied()),
        )
    }

    pub fn states(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.state.as_str())
    }

    /// One line per tick: `<tick> <state> c=<b> ts=<b> tl=<b> st=<b> <lights>`,
    /// where lights are the Moore outputs in declaration order.
    pub fn log(&self) -> String {
        let mut out = String::new();
        for rec in &self.records {
            let bit = |n: &str| u8::from(self.value(rec, n).unwrap_or(false));
            let lights: String = rec.moore.iter().map(|b| if *b { '1' } else { '0' }).collect();
            out.push_str(&format!(
                "{} {} c={} ts={} tl={} st={} {}\n",
                rec.tick,
                rec.state,
                bit("c"),
                bit("ts"),
                bit("tl"),
                bit(START_PULSE),
                lights
            ));
        }
        out
    }
}

fn check_closed_loop(spec: &FsmSpec) -> Result<(), SimError> {
    let mut declared: Vec<&str> = spec.inputs.iter().map(String::as_str).collect();
    declared.sort_unstable();
    let mut want = CLOSED_LOOP_INPUTS;
    want.sort_unstable();
    if declared != want {
        return Err(SimError::Config(format!(
            "closed-loop simulation needs inputs {{{}}}, machine `{}` declares {{{}}}",
            CLOSED_LOOP_INPUTS.join(","),
            spec.name,
            spec.inputs.join(",")
        )));
    }
    if !spec.pulse_outputs.iter().any(|p| p == START_PULSE) {
        return Err(SimError::Config(format!(
            "closed-loop simulation needs pulse output `{}`",
            START_PULSE
        )));
    }
    check_valid(spec)
}

fn check_valid(spec: &FsmSpec) -> Result<(), SimError> {
    let report = spec.validate();
    match report.findings.first() {
        None => Ok(()),
        Some(first) => Err(SimError::Config(format!(
            "machine `{}` has {} validation finding(s), first: {}",
            spec.name,
            report.findings.len(),
            first
        ))),
    }
}

/// Stepwise closed-loop engine: the machine plus its interval timer.
#[derive(Debug, Clone)]
pub struct ClosedLoop<'a> {
    spec: &'a FsmSpec,
    cfg: TimerConfig,
    state: String,
    timer: TimerState,
    tick: u64,
}

impl<'a> ClosedLoop<'a> {
    pub fn new(spec: &'a FsmSpec, cfg: TimerConfig) -> Result<Self, SimError> {
        check_closed_loop(spec)?;
        Ok(Self::at(spec, cfg, spec.initial_state.clone(), TimerState::default()))
    }

    fn at(spec: &'a FsmSpec, cfg: TimerConfig, state: String, timer: TimerState) -> Self {
        ClosedLoop {
            spec,
            cfg,
            state,
            timer,
            tick: 0,
        }
    }

    pub fn state(&self) -> &str {
        &self.state
    }

    pub fn timer(&self) -> TimerState {
        self.timer
    }

    pub fn tick(&mut self, ext: ExternalInputs) -> Result<TickRecord, SimError> {
        let timer_out = timer_outputs(&self.cfg, self.timer);
        let mut v = InputValuation::new();
        v.set("reset", ext.reset);
        v.set("c", ext.c);
        v.set("ts", timer_out.ts);
        v.set("tl", timer_out.tl);
        let step = self.spec.step(&self.state, &v)?;
        let st = step.pulses.contains(START_PULSE);
        let rec = TickRecord {
            tick: self.tick,
            state: self.state.clone(),
            inputs: self
                .spec
                .inputs
                .iter()
                .map(|n| v.get(n).unwrap_or(false))
                .collect(),
            moore: self.spec.moore_bits(&self.state)?,
            pulses: self
                .spec
                .pulse_outputs
                .iter()
                .map(|p| step.pulses.contains(p))
                .collect(),
            timer_count: Some(self.timer.count),
        };
        self.state = step.next;
        self.timer = timer_commit(&self.cfg, self.timer, st);
        self.tick += 1;
        Ok(rec)
    }
}

/// Runs the machine closed-loop with the interval timer over `stim`.
pub fn simulate(spec: &FsmSpec, cfg: TimerConfig, stim: &Stimulus) -> Result<Trace, SimError> {
    let mut engine = ClosedLoop::new(spec, cfg)?;
    let mut trace = Trace::empty(spec, Some(cfg));
    trace.records.reserve(stim.horizon());
    for ext in stim.ticks() {
        trace.records.push(engine.tick(*ext)?);
    }
    Ok(trace)
}

/// Runs the machine with every input supplied externally, one valuation per
/// tick.
pub fn simulate_open_loop(spec: &FsmSpec, stim: &[InputValuation]) -> Result<Trace, SimError> {
    check_valid(spec)?;
    if stim.is_empty() {
        return Err(SimError::Config("stimulus must cover at least one tick".into()));
    }
    for (tick, v) in stim.iter().enumerate() {
        let exact = v.len() == spec.inputs.len() && spec.inputs.iter().all(|i| v.get(i).is_some());
        if !exact {
            return Err(SimError::Config(format!(
                "tick {}: valuation {} does not match inputs {{{}}}",
                tick,
                v,
                spec.inputs.join(",")
            )));
        }
    }
    let mut trace = Trace::empty(spec, None);
    let mut state = spec.initial_state.clone();
    for (tick, v) in stim.iter().enumerate() {
        let step = spec.step(&state, v)?;
        trace.records.push(TickRecord {
            tick: tick as u64,
            state: state.clone(),
            inputs: spec.inputs.iter().map(|n| v.get(n).unwrap_or(false)).collect(),
            moore: spec.moore_bits(&state)?,
            pulses: spec
                .pulse_outputs
                .iter()
                .map(|p| step.pulses.contains(p))
                .collect(),
            timer_count: None,
        });
        state = step.next;
    }
    Ok(trace)
}

/// A closed-loop configuration: machine state plus timer count.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub state: String,
    pub count: u32,
}

/// Breadth-first enumeration of every configuration reachable from reset
/// under arbitrary `c` and `reset`, in discovery order.
pub fn reachable_configurations(
    spec: &FsmSpec,
    cfg: TimerConfig,
) -> Result<Vec<Configuration>, SimError> {
    check_closed_loop(spec)?;
    let start = Configuration {
        state: spec.initial_state.clone(),
        count: 0,
    };
    let mut seen = HashSet::from([start.clone()]);
    let mut order = vec![start.clone()];
    let mut queue = VecDeque::from([start]);
    while let Some(conf) = queue.pop_front() {
        for (c, reset) in [(false, false), (true, false), (false, true), (true, true)] {
            let mut engine =
                ClosedLoop::at(spec, cfg, conf.state.clone(), TimerState { count: conf.count });
            engine.tick(ExternalInputs { c, reset })?;
            let next = Configuration {
                state: engine.state.clone(),
                count: engine.timer.count,
            };
            if seen.insert(next.clone()) {
                order.push(next.clone());
                queue.push_back(next);
            }
        }
    }
    Ok(order)
}

fn state_width(n: usize) -> u32 {
    let mut w = 1;
    while (1usize << w) < n {
        w += 1;
    }
    w
}

fn state_bits(index: usize, width: u32) -> impl Iterator<Item = Value> {
    (0..width)
        .rev()
        .map(move |b| if (index >> b) & 1 == 1 { Value::V1 } else { Value::V0 })
}

/// Writes `trace` as a Value Change Dump. One tick is one nanosecond.
///
/// Variables are declared in the order inputs, pulses, Moore outputs, then a
/// binary-encoded `state` vector; identifier codes follow that order starting
/// at `!`.
pub fn write_vcd_to<W: Write>(trace: &Trace, out: W) -> io::Result<()> {
    let mut w = vcd::Writer::new(out);
    w.timescale(1, TimescaleUnit::NS)?;
    w.add_module(&trace.spec_name)?;
    let mut ids: Vec<IdCode> = Vec::new();
    for name in trace
        .inputs
        .iter()
        .chain(&trace.pulse_outputs)
        .chain(&trace.moore_outputs)
    {
        ids.push(w.add_wire(1, name)?);
    }
    let width = state_width(trace.state_names.len());
    let state_id = w.add_wire(width, "state")?;
    w.upscope()?;
    w.enddefinitions()?;

    let index_of = |s: &str| trace.state_names.iter().position(|n| n == s).unwrap_or(0);
    let scalars = |r: &TickRecord| -> Vec<bool> {
        r.inputs
            .iter()
            .chain(&r.pulses)
            .chain(&r.moore)
            .copied()
            .collect()
    };

    let mut prev: Option<(Vec<bool>, usize)> = None;
    for rec in &trace.records {
        let bits = scalars(rec);
        let state = index_of(&rec.state);
        match &prev {
            None => {
                w.timestamp(rec.tick)?;
                w.begin(vcd::SimulationCommand::Dumpvars)?;
                for (id, b) in ids.iter().zip(&bits) {
                    w.change_scalar(*id, *b)?;
                }
                w.change_vector(state_id, state_bits(state, width))?;
                w.end()?;
            }
            Some((pbits, pstate)) => {
                let changed: Vec<usize> = (0..bits.len()).filter(|&i| bits[i] != pbits[i]).collect();
                if changed.is_empty() && state == *pstate {
                    continue;
                }
                w.timestamp(rec.tick)?;
                for i in changed {
                    w.change_scalar(ids[i], bits[i])?;
                }
                if state != *pstate {
                    w.change_vector(state_id, state_bits(state, width))?;
                }
            }
        }
        prev = Some((bits, state));
    }
    w.flush()
}

pub fn write_vcd(trace: &Trace) -> Vec<u8> {
    let mut buf = Vec::new();
    write_vcd_to(trace, &mut buf).expect("writing to a Vec cannot fail");
    buf
}
