//! Strategies shared by the property and acceptance suites.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::sample::select;

use tlc_core::{FsmSpec, GuardExpr, StateDef, Transition};

pub fn arb_guard(inputs: Vec<String>) -> BoxedStrategy<GuardExpr> {
    let leaf = if inputs.is_empty() {
        any::<bool>().prop_map(GuardExpr::Const).boxed()
    } else {
        prop_oneof![
            1 => any::<bool>().prop_map(GuardExpr::Const),
            4 => select(inputs).prop_map(GuardExpr::Var),
        ]
        .boxed()
    };
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(GuardExpr::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| GuardExpr::and(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| GuardExpr::or(a, b)),
        ]
    })
    .boxed()
}

#[derive(Debug, Clone)]
struct StatePlan {
    assignments: Vec<Option<bool>>,
    split: u8,
    g: GuardExpr,
    h: GuardExpr,
    destinations: Vec<usize>,
    pulses: Vec<Vec<bool>>,
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Machines with up to 6 states and 4 inputs whose guards partition the
/// input space by construction (1, 2 or 3 transitions per state), so every
/// generated machine validates.
pub fn arb_validated_machine() -> impl Strategy<Value = FsmSpec> {
    (0usize..=4, 1usize..=6, 0usize..=3, 0usize..=2, any::<bool>()).prop_flat_map(
        |(n_in, n_states, n_out, n_pulse, with_reset)| {
            let inputs = names("i", n_in);
            let plan = (
                proptest::collection::vec(proptest::option::of(any::<bool>()), n_out),
                0u8..3,
                arb_guard(inputs.clone()),
                arb_guard(inputs.clone()),
                proptest::collection::vec(0..n_states, 3),
                proptest::collection::vec(proptest::collection::vec(any::<bool>(), n_pulse), 3),
            )
                .prop_map(|(assignments, split, g, h, destinations, pulses)| StatePlan {
                    assignments,
                    split,
                    g,
                    h,
                    destinations,
                    pulses,
                });
            (
                proptest::collection::vec(plan, n_states),
                0..n_states,
                Just((inputs, n_out, n_pulse, with_reset)),
            )
        },
    )
    .prop_map(|(plans, initial, (inputs, n_out, n_pulse, with_reset))| {
        let outputs = names("o", n_out);
        let pulses = names("p", n_pulse);
        let state_names = names("S", plans.len());
        let states = plans
            .into_iter()
            .enumerate()
            .map(|(i, plan)| {
                let mut s = StateDef::new(state_names[i].clone());
                for (o, a) in outputs.iter().zip(&plan.assignments) {
                    if let Some(bit) = a {
                        s = s.assign(o.clone(), *bit);
                    }
                }
                let guards = match plan.split {
                    0 => vec![GuardExpr::Const(true)],
                    1 => vec![plan.g.clone(), GuardExpr::not(plan.g)],
                    _ => vec![
                        GuardExpr::and(plan.g.clone(), plan.h.clone()),
                        GuardExpr::and(plan.g.clone(), GuardExpr::not(plan.h)),
                        GuardExpr::not(plan.g),
                    ],
                };
                for (k, guard) in guards.into_iter().enumerate() {
                    let mut t = Transition::new(guard, state_names[plan.destinations[k]].clone());
                    for (p, on) in pulses.iter().zip(&plan.pulses[k]) {
                        if *on {
                            t = t.emit(p.clone());
                        }
                    }
                    s = s.transition(t);
                }
                s
            })
            .collect();
        FsmSpec {
            name: "rand".into(),
            reset_input: (with_reset && !inputs.is_empty()).then(|| inputs[0].clone()),
            inputs,
            moore_outputs: outputs,
            pulse_outputs: pulses,
            states,
            initial_state: state_names[initial].clone(),
        }
    })
}
