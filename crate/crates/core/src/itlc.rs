//! The four-state intelligent traffic light controller.
//!
//! [`reference_next`] and [`reference_output`] are written out by hand from
//! the controller's rules and serve as the oracle for the DSL-driven
//! machine returned by [`bundled_spec`].

use std::fmt;
use std::sync::OnceLock;

use crate::dsl;
use crate::emit::{PinKind, PinMap};
use crate::fsm::{FsmSpec, InputValuation};

/// Source of `designs/itlc.fsm`, embedded at build time.
pub const ITLC_SOURCE: &str = include_str!("../../../designs/itlc.fsm");

/// Source of `designs/paper_fig7_10.stim`.
pub const SCENARIO_STIMULUS: &str = include_str!("../../../designs/paper_fig7_10.stim");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ControllerState {
    /// Main green, side red.
    S0,
    /// Main amber, side red.
    S1,
    /// Main red, side green.
    S2,
    /// Main red, side amber.
    S3,
}

impl ControllerState {
    pub const ALL: [ControllerState; 4] = [
        ControllerState::S0,
        ControllerState::S1,
        ControllerState::S2,
        ControllerState::S3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ControllerState::S0 => "S0",
            ControllerState::S1 => "S1",
            ControllerState::S2 => "S2",
            ControllerState::S3 => "S3",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

impl Default for ControllerState {
    fn default() -> Self {
        ControllerState::S0
    }
}

impl fmt::Display for ControllerState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ItlcInputs {
    pub reset: bool,
    /// Side-road sensor.
    pub c: bool,
    /// Short interval elapsed.
    pub ts: bool,
    /// Long interval elapsed.
    pub tl: bool,
}

impl ItlcInputs {
    /// All 16 combinations, with `reset` as the most significant bit.
    pub fn all() -> impl Iterator<Item = ItlcInputs> {
        (0u8..16).map(|b| ItlcInputs {
            reset: b & 8 != 0,
            c: b & 4 != 0,
            ts: b & 2 != 0,
            tl: b & 1 != 0,
        })
    }

    pub fn to_valuation(self) -> InputValuation {
        InputValuation::from_pairs([
            ("reset", self.reset),
            ("c", self.c),
            ("ts", self.ts),
            ("tl", self.tl),
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct LightOutputs {
    pub mg: bool,
    pub my: bool,
    pub mr: bool,
    pub sg: bool,
    pub sy: bool,
    pub sr: bool,
}

impl LightOutputs {
    pub const NAMES: [&'static str; 6] = ["mg", "my", "mr", "sg", "sy", "sr"];

    pub fn bits(&self) -> [bool; 6] {
        [self.mg, self.my, self.mr, self.sg, self.sy, self.sr]
    }

    /// Builds lights from named Moore outputs; missing names read as 0.
    pub fn from_named<'a>(outputs: impl IntoIterator<Item = (&'a str, bool)>) -> Self {
        let mut l = LightOutputs::default();
        for (name, v) in outputs {
            match name {
                "mg" => l.mg = v,
                "my" => l.my = v,
                "mr" => l.mr = v,
                "sg" => l.sg = v,
                "sy" => l.sy = v,
                "sr" => l.sr = v,
                _ => {}
            }
        }
        l
    }

    /// One lamp lit per road and at least one road held at red.
    pub fn is_safe(&self) -> bool {
        let one = |a: bool, b: bool, c: bool| u8::from(a) + u8::from(b) + u8::from(c) == 1;
        one(self.mg, self.my, self.mr) && one(self.sg, self.sy, self.sr) && (self.mr || self.sr)
    }
}

impl fmt::Display for LightOutputs {
    /// Six-character string in `mg my mr sg sy sr` order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Next state and start-timer pulse for one clock edge.
pub fn reference_next(state: ControllerState, input: ItlcInputs) -> (ControllerState, bool) {
    use ControllerState::*;
    if input.reset {
        return (S0, false);
    }
    let (fire, dest) = match state {
        S0 => (input.tl && input.c, S1),
        S1 => (input.ts, S2),
        S2 => (input.tl || !input.c, S3),
        S3 => (input.ts, S0),
    };
    if fire {
        (dest, true)
    } else {
        (state, false)
    }
}

pub fn reference_output(state: ControllerState) -> LightOutputs {
    let mut l = LightOutputs::default();
    match state {
        ControllerState::S0 => {
            l.mg = true;
            l.sr = true;
        }
        ControllerState::S1 => {
            l.my = true;
            l.sr = true;
        }
        ControllerState::S2 => {
            l.mr = true;
            l.sg = true;
        }
        ControllerState::S3 => {
            l.mr = true;
            l.sy = true;
        }
    }
    l
}

/// The parsed and validated controller from [`ITLC_SOURCE`].
pub fn bundled_spec() -> FsmSpec {
    static SPEC: OnceLock<FsmSpec> = OnceLock::new();
    SPEC.get_or_init(|| {
        let spec = dsl::parse(ITLC_SOURCE).expect("bundled itlc.fsm parses");
        let report = spec.validate();
        assert!(report.is_clean(), "bundled itlc.fsm has findings: {:?}", report.findings);
        spec
    })
    .clone()
}

/// Board mapping for the Spartan-3E starter kit. ST is left out because it
/// is a controller output, not a board input.
pub fn default_pin_map() -> PinMap {
    use PinKind::*;
    PinMap::new([
        ("c", "N17", Input),
        ("ts", "H18", Input),
        ("tl", "L14", Input),
        ("mr", "F9", Output),
        ("my", "E9", Output),
        ("mg", "D11", Output),
        ("sr", "F11", Output),
        ("sy", "E11", Output),
        ("sg", "E12", Output),
    ])
    .expect("default pin map has unique signals")
}
