//! Stochastic side-road traffic closing the loop through the sensor.
//!
//! Each tick, one Bernoulli draw per approach (north, then south) decides
//! whether a vehicle arrives. Both approaches feed one FIFO queue, and the
//! sensor reads `c = 1` whenever that queue is non-empty. While the side road
//! shows green, up to `service_rate` vehicles leave per tick.
//!
//! Random draws come from SplitMix64 seeded directly with the model seed. A
//! draw `x` counts as an arrival when `(x >> 11) * 2^-53 < arrival_prob`, or
//! always when `arrival_prob == 1`. Both draws happen every tick regardless
//! of probability, so the stream is identical across platforms.

use std::collections::VecDeque;
use std::fmt;

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use thiserror::Error;

use crate::fsm::FsmSpec;
use crate::sim::{ClosedLoop, ExternalInputs, SimError, Trace};
use crate::timer::TimerConfig;

pub const DEFAULT_HORIZON: u64 = 1000;
pub const DEFAULT_SERVICE_RATE: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrafficModelError {
    #[error("arrival probability must lie in [0, 1], got {0}")]
    Probability(f64),
    #[error("horizon must be at least 1")]
    Horizon,
    #[error("service rate must be at least 1")]
    ServiceRate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficModel {
    /// Per tick, per approach.
    pub arrival_prob: f64,
    pub seed: u64,
    pub horizon: u64,
    /// Vehicles leaving per side-green tick.
    pub service_rate: u32,
}

impl TrafficModel {
    pub fn new(arrival_prob: f64, seed: u64, horizon: u64) -> Result<Self, TrafficModelError> {
        TrafficModel {
            arrival_prob,
            seed,
            horizon,
            service_rate: DEFAULT_SERVICE_RATE,
        }
        .checked()
    }

    pub fn with_service_rate(mut self, service_rate: u32) -> Result<Self, TrafficModelError> {
        self.service_rate = service_rate;
        self.checked()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn checked(self) -> Result<Self, TrafficModelError> {
        if !(0.0..=1.0).contains(&self.arrival_prob) {
            return Err(TrafficModelError::Probability(self.arrival_prob));
        }
        if self.horizon == 0 {
            return Err(TrafficModelError::Horizon);
        }
        if self.service_rate == 0 {
            return Err(TrafficModelError::ServiceRate);
        }
        Ok(self)
    }
}

/// Field order of [`Metrics::to_record`].
pub const RECORD_FIELDS: [&str; 5] = [
    "mean_side_wait",
    "max_side_wait",
    "main_green_share",
    "side_vehicles_served",
    "cycles_completed",
];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Metrics {
    /// Mean ticks between arrival and departure over served vehicles.
    pub mean_side_wait: f64,
    pub max_side_wait: u64,
    /// Fraction of ticks with the main road green.
    pub main_green_share: f64,
    pub side_vehicles_served: u64,
    /// Returns to the initial state other than by reset.
    pub cycles_completed: u64,
}

impl Metrics {
    /// `key=value` lines in [`RECORD_FIELDS`] order.
    pub fn to_kv_block(&self) -> String {
        RECORD_FIELDS
            .iter()
            .zip(self.values())
            .map(|(k, v)| format!("{}={}\n", k, v))
            .collect()
    }

    /// Comma-separated values in [`RECORD_FIELDS`] order.
    pub fn to_record(&self) -> String {
        self.values().join(",")
    }

    fn values(&self) -> [String; 5] {
        [
            format!("{:.3}", self.mean_side_wait),
            self.max_side_wait.to_string(),
            format!("{:.3}", self.main_green_share),
            self.side_vehicles_served.to_string(),
            self.cycles_completed.to_string(),
        ]
    }
}

impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in RECORD_FIELDS.iter().zip(self.values()).enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}={}", k, v)?;
        }
        Ok(())
    }
}

/// Means of each metric over a set of replicas.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Aggregate {
    pub replicas: usize,
    pub mean_side_wait: f64,
    pub max_side_wait: f64,
    pub main_green_share: f64,
    pub side_vehicles_served: f64,
    pub cycles_completed: f64,
}

impl Aggregate {
    /// Sums in slice order so the result does not depend on how replicas
    /// were scheduled.
    pub fn of(metrics: &[Metrics]) -> Self {
        let n = metrics.len();
        if n == 0 {
            return Aggregate::default();
        }
        let mean = |f: fn(&Metrics) -> f64| metrics.iter().map(f).sum::<f64>() / n as f64;
        Aggregate {
            replicas: n,
            mean_side_wait: mean(|m| m.mean_side_wait),
            max_side_wait: mean(|m| m.max_side_wait as f64),
            main_green_share: mean(|m| m.main_green_share),
            side_vehicles_served: mean(|m| m.side_vehicles_served as f64),
            cycles_completed: mean(|m| m.cycles_completed as f64),
        }
    }
}

impl fmt::Display for Aggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "seeds={} mean_side_wait={:.3} max_side_wait={:.3} main_green_share={:.3} \
             side_vehicles_served={:.3} cycles_completed={:.3}",
            self.replicas,
            self.mean_side_wait,
            self.max_side_wait,
            self.main_green_share,
            self.side_vehicles_served,
            self.cycles_completed
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvRun {
    pub metrics: Metrics,
    pub trace: Trace,
    /// Total vehicles that arrived on either approach.
    pub arrivals: u64,
    /// Vehicles still queued at the horizon.
    pub backlog: u64,
    /// Ticks at which at least one vehicle departed.
    pub service_ticks: Vec<u64>,
}

fn arrives(rng: &mut SplitMix64, p: f64) -> bool {
    let x = rng.next_u64();
    if p >= 1.0 {
        return true;
    }
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    ((x >> 11) as f64) * SCALE < p
}

fn output_index(spec: &FsmSpec, name: &str) -> Result<usize, SimError> {
    spec.moore_outputs
        .iter()
        .position(|o| o == name)
        .ok_or_else(|| SimError::Config(format!("traffic model needs Moore output `{}`", name)))
}

pub fn run_env(spec: &FsmSpec, cfg: TimerConfig, model: &TrafficModel) -> Result<EnvRun, SimError> {
    let mg = output_index(spec, "mg")?;
    let sg = output_index(spec, "sg")?;
    let mut engine = ClosedLoop::new(spec, cfg)?;
    let mut rng = SplitMix64::seed_from_u64(model.seed);

    let mut trace = Trace {
        spec_name: spec.name.clone(),
        timer: Some(cfg),
        state_names: spec.states.iter().map(|s| s.name.clone()).collect(),
        inputs: spec.inputs.clone(),
        moore_outputs: spec.moore_outputs.clone(),
        pulse_outputs: spec.pulse_outputs.clone(),
        records: Vec::with_capacity(model.horizon as usize),
    };
    let mut queue: VecDeque<u64> = VecDeque::new();
    let mut arrivals = 0u64;
    let mut served = 0u64;
    let mut wait_total = 0u64;
    let mut wait_max = 0u64;
    let mut main_green = 0u64;
    let mut cycles = 0u64;
    let mut service_ticks = Vec::new();

    for tick in 0..model.horizon {
        for _approach in ["north", "south"] {
            if arrives(&mut rng, model.arrival_prob) {
                queue.push_back(tick);
                arrivals += 1;
            }
        }
        let c = !queue.is_empty();
        let rec = engine.tick(ExternalInputs { c, reset: false })?;
        if rec.moore[mg] {
            main_green += 1;
        }
        if rec.moore[sg] {
            let mut departed = 0;
            while departed < model.service_rate {
                let Some(arrived) = queue.pop_front() else { break };
                let wait = tick - arrived;
                wait_total += wait;
                wait_max = wait_max.max(wait);
                served += 1;
                departed += 1;
            }
            if departed > 0 {
                service_ticks.push(tick);
            }
        }
        if engine.state() == spec.initial_state && rec.state != spec.initial_state {
            cycles += 1;
        }
        trace.records.push(rec);
    }

    let metrics = Metrics {
        mean_side_wait: if served == 0 {
            0.0
        } else {
            wait_total as f64 / served as f64
        },
        max_side_wait: wait_max,
        main_green_share: main_green as f64 / model.horizon as f64,
        side_vehicles_served: served,
        cycles_completed: cycles,
    };
    Ok(EnvRun {
        metrics,
        trace,
        arrivals,
        backlog: queue.len() as u64,
        service_ticks,
    })
}

/// Runs one replica per seed in parallel; results come back in seed order.
pub fn sweep(
    spec: &FsmSpec,
    cfg: TimerConfig,
    model: &TrafficModel,
    seeds: &[u64],
) -> Result<Vec<Metrics>, SimError> {
    seeds
        .par_iter()
        .map(|&seed| run_env(spec, cfg, &model.with_seed(seed)).map(|r| r.metrics))
        .collect()
}

pub fn sweep_serial(
    spec: &FsmSpec,
    cfg: TimerConfig,
    model: &TrafficModel,
    seeds: &[u64],
) -> Result<Vec<Metrics>, SimError> {
    seeds
        .iter()
        .map(|&seed| run_env(spec, cfg, &model.with_seed(seed)).map(|r| r.metrics))
        .collect()
}
