//! Names of the reference models shipped with the crate.

use anyhow::{anyhow, Result};
use arl_core::oracle::{self, SolutionSetOracle};
use arl_core::{examples, FFunction, Model};

pub const EXAMPLE_NAMES: [&str; 7] = ["ex2_1a", "ex2_1b", "ex2_1c", "fig7a", "fig7b", "ex5_1", "options3"];

pub fn example_model(name: &str) -> Option<Model> {
    Some(match name {
        "ex2_1a" => examples::ex2_1a(),
        "ex2_1b" => examples::ex2_1b(),
        "ex2_1c" => examples::ex2_1c(),
        "fig7a" => examples::fig7a(),
        "fig7b" => examples::fig7b(),
        "ex5_1" => examples::ex5_1(),
        "options3" => examples::options_mdp(),
        _ => return None,
    })
}

/// Solution-set oracle of a named example under `f`.
pub fn example_oracle(name: &str, f: FFunction) -> Result<SolutionSetOracle> {
    let o = match name {
        "ex2_1a" => oracle::ex2_1a_oracle(f),
        "ex2_1b" => oracle::ex2_1b_oracle(f),
        "ex2_1c" => oracle::ex2_1c_oracle(f),
        "fig7a" => oracle::fig7a_oracle(f),
        "ex5_1" => oracle::ex5_1_oracle(f, 1e-3),
        _ => return Err(anyhow!("no solution-set oracle for {name:?}")),
    };
    o.map_err(|e| anyhow!("oracle {name}: {e}"))
}
