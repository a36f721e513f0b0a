//! Acceptance criteria. Runs without the libtest harness so that each
//! criterion prints exactly one `PASS`/`FAIL` line; exits non-zero if any
//! criterion fails.

mod common;

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::test_runner::{Config, TestRunner};

use tlc_core::itlc::{
    bundled_spec, default_pin_map, reference_next, reference_output, ControllerState, ItlcInputs,
    LightOutputs, SCENARIO_STIMULUS,
};
use tlc_core::sim::reachable_configurations;
use tlc_core::{
    emit_ucf, emit_verilog, parse, parse_stimulus, run_env, serialize, simulate, validate,
    write_vcd, EmitOptions, Stimulus, TimerConfig, TrafficModel,
};

const ITLC_V: &str = include_str!("../../../golden/itlc.v");
const ITLC_UCF: &str = include_str!("../../../golden/itlc.ucf");
const SCENARIO_VCD: &[u8] = include_bytes!("../../../golden/paper_fig7_10.vcd");

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {:?}, limit {:?}", took, limit))
}

/// Exit rule and lights per state, restated as a table independent of both
/// the DSL file and the hand-coded reference.
fn rule_table(state: &str, i: ItlcInputs) -> (&'static str, bool, &'static str) {
    let (fire, dest, lights) = match state {
        "S0" => (i.tl && i.c, "S1", "100001"),
        "S1" => (i.ts, "S2", "010001"),
        "S2" => (i.tl || !i.c, "S3", "001100"),
        "S3" => (i.ts, "S0", "001010"),
        _ => unreachable!(),
    };
    let own: &'static str = match state {
        "S0" => "S0",
        "S1" => "S1",
        "S2" => "S2",
        _ => "S3",
    };
    if i.reset {
        ("S0", false, lights)
    } else if fire {
        (dest, true, lights)
    } else {
        (own, false, lights)
    }
}

fn conformance() -> Outcome {
    let start = Instant::now();
    let spec = bundled_spec();
    let mut cases = 0;
    for s in ControllerState::ALL {
        let moore = spec.moore_output(s.name()).map_err(|e| e.to_string())?;
        let dsl_lights = LightOutputs::from_named(moore.iter().map(|(n, b)| (n.as_str(), *b)));
        for i in ItlcInputs::all() {
            let step = spec.step(s.name(), &i.to_valuation()).map_err(|e| e.to_string())?;
            let (ref_next, ref_st) = reference_next(s, i);
            let (rule_next, rule_st, rule_lights) = rule_table(s.name(), i);
            let got = (step.next.as_str(), step.pulses.contains("st"), dsl_lights.to_string());
            let oracle = (ref_next.name(), ref_st, reference_output(s).to_string());
            let rules = (rule_next, rule_st, rule_lights.to_string());
            ensure(got == oracle && oracle == rules, || {
                format!("{s} {i:?}: dsl {got:?} reference {oracle:?} rules {rules:?}")
            })?;
            cases += 1;
        }
    }
    ensure(cases == 64, || format!("{cases} cases"))?;
    within(start, Duration::from_secs(1))?;
    Ok(format!("{cases} cases agree"))
}

fn safety() -> Outcome {
    let spec = bundled_spec();
    let mut total = 0;
    let mut slowest = Duration::ZERO;
    for long in 2..=64u32 {
        for short in 1..long {
            let start = Instant::now();
            let cfg = TimerConfig::new(short, long).map_err(|e| e.to_string())?;
            let confs = reachable_configurations(&spec, cfg).map_err(|e| e.to_string())?;
            for conf in &confs {
                let moore = spec.moore_output(&conf.state).map_err(|e| e.to_string())?;
                let lights = LightOutputs::from_named(moore.iter().map(|(n, b)| (n.as_str(), *b)));
                ensure(lights.is_safe(), || format!("{cfg:?} {conf:?} shows {lights}"))?;
            }
            let states: std::collections::BTreeSet<_> = confs.iter().map(|c| c.state.as_str()).collect();
            ensure(states.len() == 4, || format!("{cfg:?}: only {states:?} reachable"))?;
            within(start, Duration::from_secs(1))?;
            slowest = slowest.max(start.elapsed());
            total += confs.len();
        }
    }
    Ok(format!(
        "{total} reachable configurations safe across all short<long<=64, slowest {slowest:?}"
    ))
}

fn scenario() -> Outcome {
    let spec = bundled_spec();
    let stim = parse_stimulus(SCENARIO_STIMULUS).map_err(|e| e.to_string())?;
    let trace = simulate(&spec, TimerConfig::default(), &stim).map_err(|e| e.to_string())?;
    let mut runs: Vec<(String, String, usize)> = Vec::new();
    for rec in &trace.records {
        let lights = trace.lights(rec).to_string();
        match runs.last_mut() {
            Some((s, _, n)) if *s == rec.state => *n += 1,
            _ => runs.push((rec.state.clone(), lights, 1)),
        }
    }
    let got: Vec<(&str, &str)> = runs.iter().map(|(s, l, _)| (s.as_str(), l.as_str())).collect();
    let want = [
        ("S0", "100001"),
        ("S1", "010001"),
        ("S2", "001100"),
        ("S3", "001010"),
        ("S0", "100001"),
    ];
    ensure(got == want, || format!("phases {got:?}"))?;
    let entry = trace
        .records
        .windows(2)
        .find(|w| w[0].state == "S0" && w[1].state == "S1")
        .map(|w| &w[0])
        .ok_or("no S0 to S1 edge")?;
    let v = |n| trace.value(entry, n).unwrap_or(false);
    ensure(v("c") && v("tl") && v("st"), || format!("S1 entered without c, tl, st at tick {}", entry.tick))?;
    Ok(format!("S0 -> S1 -> S2 -> S3 -> S0, S1 entered at tick {}", entry.tick + 1))
}

fn idle() -> Outcome {
    let spec = bundled_spec();
    let model = TrafficModel::new(0.0, 1, 10_000).map_err(|e| e.to_string())?;
    let run = run_env(&spec, TimerConfig::default(), &model).map_err(|e| e.to_string())?;
    let m = run.metrics;
    ensure(m.main_green_share == 1.0 && m.cycles_completed == 0, || format!("{m}"))?;
    Ok(format!("{m}"))
}

/// Longest delay from any tick to the next side-green tick under a
/// permanently asserted sensor, from a closed loop built on the reference
/// step function and plain counter arithmetic.
fn side_green_delay_bound(cfg: TimerConfig, horizon: u64) -> u64 {
    let mut state = ControllerState::S0;
    let mut count = 0u32;
    let mut green = Vec::new();
    for _ in 0..horizon {
        let input = ItlcInputs {
            reset: false,
            c: true,
            ts: count >= cfg.short_ticks(),
            tl: count >= cfg.long_ticks(),
        };
        green.push(reference_output(state).sg);
        let (next, st) = reference_next(state, input);
        count = if st { 0 } else { (count + 1).min(cfg.long_ticks()) };
        state = next;
    }
    let mut bound = 0;
    let mut next_green: Option<u64> = None;
    for t in (0..horizon).rev() {
        if green[t as usize] {
            next_green = Some(t);
        }
        if let Some(g) = next_green {
            bound = bound.max(g - t);
        }
    }
    bound
}

fn bounded_wait() -> Outcome {
    let start = Instant::now();
    let spec = bundled_spec();
    let cfg = TimerConfig::new(4, 16).map_err(|e| e.to_string())?;
    let horizon = 10_000;
    let bound = side_green_delay_bound(cfg, horizon);
    let walk = u64::from(2 * cfg.long_ticks() + 2 * cfg.short_ticks() + 4);
    ensure(bound <= walk, || format!("oracle bound {bound} exceeds dwell walk {walk}"))?;
    // Two approaches arrive every tick; a queue never holds more than the
    // arrivals since the previous green, so this rate empties it each green.
    let service = u32::try_from(2 * (bound + 1)).map_err(|e| e.to_string())?;
    let mut worst = 0;
    for seed in 1..=20 {
        let model = TrafficModel::new(1.0, seed, horizon)
            .and_then(|m| m.with_service_rate(service))
            .map_err(|e| e.to_string())?;
        let run = run_env(&spec, cfg, &model).map_err(|e| e.to_string())?;
        let m = run.metrics;
        ensure(m.max_side_wait <= bound, || format!("seed {seed}: max_side_wait {} > {bound}", m.max_side_wait))?;
        worst = worst.max(m.max_side_wait);
    }
    within(start, Duration::from_secs(5))?;
    Ok(format!("max_side_wait {worst} <= bound {bound} (walk {walk}) over 20 seeds"))
}

fn determinism() -> Outcome {
    let spec = bundled_spec();
    let cfg = TimerConfig::default();
    let stim = parse_stimulus(SCENARIO_STIMULUS).map_err(|e| e.to_string())?;
    let a = simulate(&spec, cfg, &stim).map_err(|e| e.to_string())?;
    let b = simulate(&spec, cfg, &stim).map_err(|e| e.to_string())?;
    ensure(a == b, || "simulate differs".into())?;
    let busy = simulate(&spec, cfg, &Stimulus::constant(500, true).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    ensure(write_vcd(&busy) == write_vcd(&busy), || "vcd differs".into())?;
    ensure(write_vcd(&a) == SCENARIO_VCD, || "scenario vcd differs from golden".into())?;

    let model = TrafficModel::new(0.3, 7, 2_000).map_err(|e| e.to_string())?;
    let r1 = run_env(&spec, cfg, &model).map_err(|e| e.to_string())?;
    let r2 = run_env(&spec, cfg, &model).map_err(|e| e.to_string())?;
    ensure(r1.metrics == r2.metrics && r1.trace == r2.trace, || "run_env differs".into())?;

    let opts = EmitOptions::for_spec(&spec);
    let v1 = emit_verilog(&spec, &opts).map_err(|e| e.to_string())?;
    let v2 = emit_verilog(&spec, &opts).map_err(|e| e.to_string())?;
    ensure(v1 == v2 && v1 == ITLC_V, || "verilog differs from golden".into())?;
    let u1 = emit_ucf(&default_pin_map());
    ensure(u1 == emit_ucf(&default_pin_map()) && u1 == ITLC_UCF, || "ucf differs from golden".into())?;
    Ok("simulate, run_env, vcd, verilog and ucf are byte-stable and match golden files".into())
}

fn round_trip() -> Outcome {
    let start = Instant::now();
    let mut runner = TestRunner::new(Config {
        cases: 100,
        failure_persistence: None,
        ..Config::default()
    });
    let shapes = RefCell::new(BTreeMap::new());
    runner
        .run(&common::arb_validated_machine(), |spec| {
            *shapes.borrow_mut().entry((spec.states.len(), spec.inputs.len())).or_insert(0) += 1;
            let text = serialize(&spec);
            let back = parse(&text).map_err(|e| {
                proptest::test_runner::TestCaseError::fail(format!("{e:?}\n{text}"))
            })?;
            proptest::prop_assert_eq!(&back, &spec);
            proptest::prop_assert_eq!(validate(&back), validate(&spec));
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    within(start, Duration::from_secs(10))?;
    Ok(format!("100 machines, {} distinct (states, inputs) shapes", shapes.borrow().len()))
}

fn ucf() -> Outcome {
    let text = emit_ucf(&default_pin_map());
    let want = [
        ("c", "N17"),
        ("ts", "H18"),
        ("tl", "L14"),
        ("mr", "F9"),
        ("my", "E9"),
        ("mg", "D11"),
        ("sr", "F11"),
        ("sy", "E11"),
        ("sg", "E12"),
    ];
    let lines: Vec<&str> = text.lines().collect();
    ensure(lines.len() == want.len(), || format!("{} lines", lines.len()))?;
    for (signal, pin) in want {
        let line = format!("NET \"{signal}\" LOC = \"{pin}\";");
        ensure(lines.contains(&line.as_str()), || format!("missing {line}"))?;
    }
    Ok("9 pin constraints".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("exhaustive conformance", conformance),
        ("safety model check", safety),
        ("scenario ordering", scenario),
        ("idle main-road priority", idle),
        ("bounded side-road wait", bounded_wait),
        ("determinism and golden outputs", determinism),
        ("dsl round trip", round_trip),
        ("ucf pin constraints", ucf),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("{} of 8 criteria passed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
