//! Toolkit for clocked Moore machines with transition pulses.
//!
//! Machines are written in a small line-oriented DSL ([`dsl`]), checked for
//! determinism by exhaustive enumeration ([`fsm::validate`]), simulated
//! cycle by cycle against an interval timer ([`sim`]), exercised by a
//! stochastic side-road traffic model ([`env`]), and turned into Verilog
//! and UCF pin constraints ([`emit`]).
//!
//! The flagship machine is the four-state intelligent traffic light
//! controller in [`itlc`], shipped as `designs/itlc.fsm`.

pub mod dsl;
pub mod emit;
pub mod env;
pub mod fsm;
pub mod itlc;
pub mod sim;
pub mod timer;

pub use dsl::{parse, serialize, ParseError, ParseErrorKind, SourceSpan};
pub use emit::{emit_ucf, emit_verilog, parse_pins, EmitError, EmitOptions, PinKind, PinMap, StateEncoding};
pub use env::{run_env, Aggregate, EnvRun, Metrics, TrafficModel};
pub use fsm::{
    eval_guard, moore_output, step_spec, validate, Finding, FindingKind, FsmSpec, GuardExpr,
    InputValuation, ModelError, StateDef, Step, Transition, ValidationReport,
};
pub use itlc::{bundled_spec, reference_next, reference_output, ControllerState, ItlcInputs, LightOutputs};
pub use sim::{parse_stimulus, simulate, simulate_open_loop, write_vcd, SimError, Stimulus, TickRecord, Trace};
pub use timer::{timer_commit, timer_outputs, TimerConfig, TimerState};
