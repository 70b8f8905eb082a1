//! JSON views of the core analyses, keyed by state and action names.

use std::collections::BTreeMap;

use anyhow::{anyhow, Result};
use arl_core::chain::{self, Communication};
use arl_core::options::{self, OptionSet};
use arl_core::solvers::{self, RviParams, RviReference};
use arl_core::structure::{self, DimensionReport};
use arl_core::{DeterministicPolicy, FFunction, Model, TabularQ};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bundled;

fn names(m: &Model, states: &[usize]) -> Vec<String> {
    states.iter().map(|&s| m.state_names()[s].clone()).collect()
}

fn policy_names(m: &Model, pi: &DeterministicPolicy) -> BTreeMap<String, String> {
    (0..m.n_states())
        .map(|s| (m.state_names()[s].clone(), m.action_names()[m.pair_action(pi.pair(m.layout(), s))].clone()))
        .collect()
}

fn q_map(m: &Model, q: &[f64]) -> BTreeMap<String, BTreeMap<String, f64>> {
    let mut out: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for (p, &v) in q.iter().enumerate() {
        out.entry(m.state_names()[m.pair_state(p)].clone())
            .or_default()
            .insert(m.action_names()[m.pair_action(p)].clone(), v);
    }
    out
}

#[derive(Debug, Serialize)]
pub struct ClassifyJson {
    pub model: String,
    pub communication: &'static str,
    pub unichain: Option<bool>,
    pub closed_class: Option<Vec<String>>,
}

pub fn classify(m: &Model) -> Result<ClassifyJson> {
    let c = chain::classify(m).or_else(|e| match e {
        arl_core::Error::CapExceeded { .. } => Ok(chain::classify_structure(m)),
        e => Err(e),
    });
    let c = c.map_err(|e| anyhow!("{e}"))?;
    Ok(ClassifyJson {
        model: m.name().to_string(),
        communication: match c.communication {
            Communication::Communicating => "communicating",
            Communication::WeaklyCommunicating => "weakly_communicating",
            Communication::General => "general",
        },
        unichain: c.unichain,
        closed_class: c.closed_class.as_deref().map(|s| names(m, s)),
    })
}

#[derive(Debug, Serialize)]
pub struct GainJson {
    pub model: String,
    pub r_star: f64,
    pub constant: bool,
    pub per_state_gain: BTreeMap<String, f64>,
    pub optimal_policies: Vec<BTreeMap<String, String>>,
}

pub fn gain(m: &Model) -> Result<GainJson> {
    let g = solvers::optimal_gain(m).map_err(|e| anyhow!("{e}"))?;
    Ok(GainJson {
        model: m.name().to_string(),
        r_star: g.r_star,
        constant: g.constant,
        per_state_gain: m.state_names().iter().cloned().zip(g.per_state_gain.iter().copied()).collect(),
        optimal_policies: g.optimal_det_policies.iter().map(|p| policy_names(m, p)).collect(),
    })
}

#[derive(Debug, Serialize)]
pub struct StructureJson {
    pub model: String,
    pub r_star_states: Vec<String>,
    pub n_star: usize,
    pub classes: Vec<Vec<String>>,
    pub k_star: BTreeMap<String, Vec<String>>,
    pub optimal_gain: f64,
}

pub fn structure(m: &Model) -> Result<StructureJson> {
    let r = structure::compute_structure(m).map_err(|e| anyhow!("{e}"))?;
    let k_star = r
        .r_star
        .iter()
        .map(|&s| {
            let start = m.layout().pairs(s).start;
            let acts = r.k_star[s].iter().map(|&a| m.action_names()[m.pair_action(start + a)].clone()).collect();
            (m.state_names()[s].clone(), acts)
        })
        .collect();
    Ok(StructureJson {
        model: m.name().to_string(),
        r_star_states: names(m, &r.r_star),
        n_star: r.n_star,
        classes: r.classes.iter().map(|c| names(m, c)).collect(),
        k_star,
        optimal_gain: r.r_opt,
    })
}

#[derive(Debug, Serialize)]
pub struct SolveJson {
    pub model: String,
    pub method: &'static str,
    pub f_limit: f64,
    pub r_star: f64,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    pub q: BTreeMap<String, BTreeMap<String, f64>>,
}

/// Relative value iteration from zero with the reference pair `(state, action)`.
pub fn solve(m: &Model, reference: Option<(&str, &str)>, alpha: Option<f64>, schweitzer: bool) -> Result<SolveJson> {
    let pair = match reference {
        Some((s, a)) => m.pair_by_name(s, a).ok_or_else(|| anyhow!("no pair ({s}, {a})"))?,
        None => 0,
    };
    let min_l = (0..m.n_pairs())
        .flat_map(|p| m.outcomes(p).iter().map(|o| o.holding))
        .fold(f64::INFINITY, f64::min);
    let default_alpha = if schweitzer { 0.5 * min_l.min(1.0) } else { 0.5 };
    let params = RviParams { alpha: alpha.unwrap_or(default_alpha), ..RviParams::default() };
    let q0 = TabularQ::zeros(m.n_pairs());
    let out = if schweitzer {
        solvers::schweitzer_rvi(m, pair, params, &q0)
    } else {
        solvers::classical_rvi(m, &RviReference::FixedPair(pair), params, &q0)
    }
    .map_err(|e| anyhow!("{e}"))?;
    let r_star = solvers::optimal_gain(m).map_err(|e| anyhow!("{e}"))?.r_star;
    Ok(SolveJson {
        model: m.name().to_string(),
        method: if schweitzer { "schweitzer" } else { "classical" },
        f_limit: out.f_limit(),
        r_star,
        iterations: out.iterations,
        converged: out.converged,
        residual: solvers::optimality_residual(m, out.q.as_slice(), out.f_limit()),
        q: q_map(m, out.q.as_slice()),
    })
}

#[derive(Debug, Serialize)]
pub struct DimcheckJson {
    pub model: String,
    pub n_star: usize,
    pub expected_dimension: usize,
    pub estimated_dimension: usize,
    pub samples: usize,
    pub neighbours: usize,
    pub rank_tolerance: f64,
    pub max_member_norm: f64,
    pub passed: bool,
}

/// Empirical dimension of `Q_s` for a bundled example (matched by model name).
pub fn dimcheck(m: &Model, samples: usize, seed: u64) -> Result<DimcheckJson> {
    let s = structure::compute_structure(m).map_err(|e| anyhow!("{e}"))?;
    let oracle = bundled::example_oracle(m.name(), FFunction::mean(m.n_pairs()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r: DimensionReport = structure::verify_dimension_claim(&s, &oracle, samples, &mut rng);
    Ok(DimcheckJson {
        model: m.name().to_string(),
        n_star: s.n_star,
        expected_dimension: r.expected,
        estimated_dimension: r.estimated,
        samples: r.samples,
        neighbours: r.neighbours,
        rank_tolerance: r.rank_tol,
        max_member_norm: r.max_member_norm,
        passed: r.passed(),
    })
}

#[derive(Debug, Serialize)]
pub struct InducedJson {
    pub termination_ok: bool,
    pub never_terminating_from: Vec<(String, String)>,
    pub r_hat: Vec<f64>,
    pub l_hat: Vec<f64>,
    pub communication: Option<&'static str>,
    pub r_hat_star: Option<f64>,
}

/// Termination audit and exact quantities of the SMDP induced by `opts`.
pub fn induced(m: &Model, opts: &OptionSet) -> Result<InducedJson> {
    let audit = options::audit_termination(m, opts);
    let never = audit
        .failing
        .iter()
        .map(|&(o, s)| (opts.names()[o].clone(), m.state_names()[s].clone()))
        .collect();
    if !audit.passed() {
        return Ok(InducedJson {
            termination_ok: false,
            never_terminating_from: never,
            r_hat: vec![],
            l_hat: vec![],
            communication: None,
            r_hat_star: None,
        });
    }
    let q = options::exact_option_quantities(m, opts).map_err(|e| anyhow!("{e}"))?;
    let sm = q.to_model(m, opts);
    let c = classify(&sm)?;
    let r = solvers::optimal_gain(&sm).map_err(|e| anyhow!("{e}"))?.r_star;
    Ok(InducedJson {
        termination_ok: true,
        never_terminating_from: never,
        r_hat: q.r_hat.clone(),
        l_hat: q.l_hat.clone(),
        communication: Some(c.communication),
        r_hat_star: Some(r),
    })
}
