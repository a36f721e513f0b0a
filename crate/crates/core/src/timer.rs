//! Interval timer producing the short (TS) and long (TL) expiry levels.
//!
//! One saturating counter serves both thresholds. A start pulse clears it;
//! otherwise it counts up once per tick and stops at `long_ticks`.

use thiserror::Error;

pub const DEFAULT_SHORT_TICKS: u32 = 4;
pub const DEFAULT_LONG_TICKS: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimerConfigError {
    #[error("short_ticks must be positive")]
    ZeroShort,
    #[error("short_ticks must be < long_ticks (got {short} and {long})")]
    NotOrdered { short: u32, long: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimerConfig {
    short_ticks: u32,
    long_ticks: u32,
}

impl TimerConfig {
    pub fn new(short_ticks: u32, long_ticks: u32) -> Result<Self, TimerConfigError> {
        if short_ticks == 0 {
            return Err(TimerConfigError::ZeroShort);
        }
        if short_ticks >= long_ticks {
            return Err(TimerConfigError::NotOrdered {
                short: short_ticks,
                long: long_ticks,
            });
        }
        Ok(TimerConfig {
            short_ticks,
            long_ticks,
        })
    }

    pub fn short_ticks(&self) -> u32 {
        self.short_ticks
    }

    pub fn long_ticks(&self) -> u32 {
        self.long_ticks
    }
}

impl Default for TimerConfig {
    fn default() -> Self {
        TimerConfig {
            short_ticks: DEFAULT_SHORT_TICKS,
            long_ticks: DEFAULT_LONG_TICKS,
        }
    }
}

/// Cycles since the last start pulse, saturating at `long_ticks`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct TimerState {
    pub count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct TimerOutputs {
    pub ts: bool,
    pub tl: bool,
}

pub fn timer_outputs(cfg: &TimerConfig, t: TimerState) -> TimerOutputs {
    TimerOutputs {
        ts: t.count >= cfg.short_ticks,
        tl: t.count >= cfg.long_ticks,
    }
}

pub fn timer_commit(cfg: &TimerConfig, t: TimerState, st: bool) -> TimerState {
    if st {
        TimerState { count: 0 }
    } else {
        TimerState {
            count: (t.count + 1).min(cfg.long_ticks),
        }
    }
}
