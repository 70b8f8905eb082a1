//! Small reference models used throughout the tests and the CLI.
//!
//! State names are the printed labels ("0", "1", ...); action names are
//! `solid` and `dashed` unless stated otherwise.

use alloc::vec;

use crate::model::{Model, ModelBuilder};
use crate::options::OptionSet;

const ACTIONS: [&str; 2] = ["solid", "dashed"];
const SOLID: usize = 0;
const DASHED: usize = 1;

/// Unichain, `r* = 1`. State 1 offers only `dashed`.
pub fn ex2_1a() -> Model {
    let mut b = ModelBuilder::new("ex2_1a", &["1", "2"], &ACTIONS);
    b.add(0, DASHED, 1, 0.0, 1.0);
    b.add(1, SOLID, 1, 1.0, 1.0);
    b.add(1, DASHED, 0, 0.0, 1.0);
    b.build().expect("well formed")
}

/// Communicating but not unichain, `r* = 0`.
pub fn ex2_1b() -> Model {
    let mut b = ModelBuilder::new("ex2_1b", &["1", "2"], &ACTIONS);
    b.add(0, SOLID, 0, -1.0, 1.0);
    b.add(0, DASHED, 1, 0.0, 1.0);
    b.add(1, SOLID, 1, 0.0, 1.0);
    b.add(1, DASHED, 0, 0.0, 1.0);
    b.build().expect("well formed")
}

fn swap_pair(name: &str) -> Model {
    let mut b = ModelBuilder::new(name, &["1", "2"], &ACTIONS);
    b.add(0, SOLID, 0, 1.0, 1.0);
    b.add(0, DASHED, 1, 0.0, 1.0);
    b.add(1, SOLID, 1, 1.0, 1.0);
    b.add(1, DASHED, 0, 0.0, 1.0);
    b.build().expect("well formed")
}

/// Two degrees of freedom, `r* = 1`.
pub fn ex2_1c() -> Model {
    swap_pair("ex2_1c")
}

/// Communicating two-state model; same kernel as [`ex2_1c`].
pub fn fig7a() -> Model {
    swap_pair("fig7a")
}

/// [`fig7a`] plus a transient entry state "0" with reward -5.
pub fn fig7b() -> Model {
    let mut b = ModelBuilder::new("fig7b", &["0", "1", "2"], &ACTIONS);
    b.add(0, SOLID, 0, -5.0, 0.9).add(0, SOLID, 1, -5.0, 0.1);
    b.add(0, DASHED, 0, -5.0, 0.9).add(0, DASHED, 2, -5.0, 0.1);
    b.add(1, SOLID, 1, 1.0, 1.0);
    b.add(1, DASHED, 2, 0.0, 1.0);
    b.add(2, SOLID, 2, 1.0, 1.0);
    b.add(2, DASHED, 1, 0.0, 1.0);
    b.build().expect("well formed")
}

/// Three-state communicating model with a nonconvex constrained solution set.
pub fn ex5_1() -> Model {
    let mut b = ModelBuilder::new("ex5_1", &["1", "2", "3"], &ACTIONS);
    b.add(0, SOLID, 0, 0.0, 1.0);
    b.add(0, DASHED, 1, -2.0, 1.0);
    b.add(1, SOLID, 1, 0.0, 1.0);
    b.add(1, DASHED, 2, 0.0, 1.0);
    b.add(2, SOLID, 1, -1.0, 1.0);
    b.add(2, DASHED, 0, 0.0, 1.0);
    b.build().expect("well formed")
}

/// Three-state MDP whose entry state "0" is transient under every policy.
/// Actions are `stay` and `switch`.
pub fn options_mdp() -> Model {
    let mut b = ModelBuilder::new("options3", &["0", "1", "2"], &["stay", "switch"]);
    b.add(0, 0, 0, 0.0, 0.5).add(0, 0, 1, 0.0, 0.5);
    b.add(0, 1, 0, 0.0, 0.5).add(0, 1, 2, 0.0, 0.5);
    b.add(1, 0, 1, 1.0, 0.8).add(1, 0, 2, 0.0, 0.2);
    b.add(1, 1, 2, 0.0, 1.0);
    b.add(2, 0, 2, 0.5, 0.8).add(2, 0, 1, 0.0, 0.2);
    b.add(2, 1, 1, 0.0, 1.0);
    b.build().expect("well formed")
}

/// Two options over [`options_mdp`]: each mostly repeats one action and
/// terminates with probability 1/2 after every step.
pub fn options_set() -> OptionSet {
    let m = options_mdp();
    let stay = vec![0.9, 0.1];
    let switch = vec![0.1, 0.9];
    OptionSet::from_action_weights(
        &m,
        &["stay", "switch"],
        &[stay, switch],
        &[vec![0.5; 3], vec![0.5; 3]],
    )
    .expect("well formed")
}
