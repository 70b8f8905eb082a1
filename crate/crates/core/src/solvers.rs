//! Model-based computations: expected quantities, optimality residuals,
//! brute-force optimal gains and relative value iteration.

use alloc::vec;
use alloc::vec::Vec;

use crate::chain::{self, DEFAULT_POLICY_CAP};
use crate::error::{Error, Result};
use crate::linalg::span;
use crate::model::{DeterministicPolicy, Layout, Model, StationaryPolicy, TabularQ};
use crate::reference::FFunction;

/// Tolerance used to decide which policies attain the optimal gain.
pub const GAIN_TOL: f64 = 1e-10;

/// Expected one-step quantities per pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedQuantities {
    pub layout: Layout,
    pub r_sa: Vec<f64>,
    pub l_sa: Vec<f64>,
    /// Row-major `n_pairs x n_states`.
    pub p: Vec<f64>,
    n_states: usize,
}

impl ExpectedQuantities {
    pub fn new(layout: Layout, r_sa: Vec<f64>, l_sa: Vec<f64>, p: Vec<f64>) -> Self {
        let n_states = layout.n_states();
        ExpectedQuantities { layout, r_sa, l_sa, p, n_states }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_pairs(&self) -> usize {
        self.layout.n_pairs()
    }

    pub fn p_row(&self, pair: usize) -> &[f64] {
        &self.p[pair * self.n_states..(pair + 1) * self.n_states]
    }

    /// `sum_{s'} p(s'|pair) v(s')`.
    pub fn expect(&self, pair: usize, v: &[f64]) -> f64 {
        self.p_row(pair).iter().zip(v).map(|(p, x)| p * x).sum()
    }

    /// `g(q)(pair) = sum_{s'} p(s'|pair) max_a q(s', a)`.
    pub fn g(&self, q: &[f64], out: &mut [f64]) {
        let v = self.layout.state_values(q);
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.expect(i, &v);
        }
    }
}

pub fn expected_quantities(model: &Model) -> ExpectedQuantities {
    let n = model.n_states();
    let np = model.n_pairs();
    let mut r = vec![0.0; np];
    let mut l = vec![0.0; np];
    let mut p = vec![0.0; np * n];
    for i in 0..np {
        for o in model.outcomes(i) {
            r[i] += o.prob * o.reward;
            l[i] += o.prob * o.holding;
            p[i * n + o.next] += o.prob;
        }
    }
    ExpectedQuantities::new(model.layout().clone(), r, l, p)
}

/// `max_{(s,a)} |q(s,a) - (r_sa - rbar l_sa + sum p max q)|`.
pub fn optimality_residual(model: &Model, q: &[f64], rbar: f64) -> f64 {
    residual_with(&expected_quantities(model), q, rbar)
}

pub fn residual_with(eq: &ExpectedQuantities, q: &[f64], rbar: f64) -> f64 {
    let v = eq.layout.state_values(q);
    (0..eq.n_pairs()).fold(0.0, |m, i| {
        let t = eq.r_sa[i] - rbar * eq.l_sa[i] + eq.expect(i, &v);
        f64::max(m, (q[i] - t).abs())
    })
}

/// Per-state gain of a stationary policy: reward rate of each recurrent
/// class, averaged by absorption probabilities for transient states.
pub fn policy_gain(model: &Model, policy: &StationaryPolicy) -> Result<Vec<f64>> {
    let eq = expected_quantities(model);
    let p = chain::policy_matrix(model, policy);
    let n = model.n_states();
    let mut r_pi = vec![0.0; n];
    let mut l_pi = vec![0.0; n];
    for s in 0..n {
        for pair in model.layout().pairs(s) {
            r_pi[s] += policy.prob(pair) * eq.r_sa[pair];
            l_pi[s] += policy.prob(pair) * eq.l_sa[pair];
        }
    }
    gain_from_chain(&p, &r_pi, &l_pi)
}

pub fn deterministic_gain(model: &Model, policy: &DeterministicPolicy) -> Result<Vec<f64>> {
    policy_gain(model, &policy.to_stationary(model.layout()))
}

fn gain_from_chain(p: &nalgebra::DMatrix<f64>, r: &[f64], l: &[f64]) -> Result<Vec<f64>> {
    let a = chain::analyze_chain(p);
    let class_gain: Vec<f64> = a
        .recurrent_classes
        .iter()
        .zip(&a.stationary_dists)
        .map(|(c, pi)| {
            let num: f64 = c.iter().zip(pi).map(|(&s, w)| w * r[s]).sum();
            let den: f64 = c.iter().zip(pi).map(|(&s, w)| w * l[s]).sum();
            num / den
        })
        .collect();
    let b = a.absorption(p)?;
    Ok(b.iter().map(|row| row.iter().zip(&class_gain).map(|(w, g)| w * g).sum()).collect())
}

/// Brute-force optimal gain.
#[derive(Debug, Clone, PartialEq)]
pub struct GainResult {
    /// Largest optimal gain over states; equal to every entry of
    /// `per_state_gain` when `constant` holds.
    pub r_star: f64,
    pub per_state_gain: Vec<f64>,
    pub constant: bool,
    pub optimal_det_policies: Vec<DeterministicPolicy>,
}

impl GainResult {
    pub fn is_optimal(&self, policy: &DeterministicPolicy) -> bool {
        self.optimal_det_policies.contains(policy)
    }
}

pub fn optimal_gain(model: &Model) -> Result<GainResult> {
    optimal_gain_with_cap(model, DEFAULT_POLICY_CAP)
}

pub fn optimal_gain_with_cap(model: &Model, cap: u64) -> Result<GainResult> {
    let count = model.layout().policy_count();
    if count > cap as u128 {
        return Err(Error::CapExceeded { count, cap });
    }
    let n = model.n_states();
    let mut all = Vec::new();
    let mut best = vec![f64::NEG_INFINITY; n];
    for pi in DeterministicPolicy::enumerate(model.layout()) {
        let g = deterministic_gain(model, &pi)?;
        for s in 0..n {
            best[s] = best[s].max(g[s]);
        }
        all.push((pi, g));
    }
    let optimal = all
        .into_iter()
        .filter(|(_, g)| g.iter().zip(&best).all(|(x, b)| *x >= b - GAIN_TOL))
        .map(|(pi, _)| pi)
        .collect();
    let r_star = best.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = best.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(GainResult {
        r_star,
        constant: r_star - lo <= GAIN_TOL,
        per_state_gain: best,
        optimal_det_policies: optimal,
    })
}

/// Reference term subtracted by relative value iteration.
#[derive(Debug, Clone, PartialEq)]
pub enum RviReference {
    /// `f(Q) = (r + sum p max Q - Q)` at a fixed pair, divided by its
    /// expected holding time.
    FixedPair(usize),
    Function(FFunction),
}

/// Result of a synchronous RVI run.
#[derive(Debug, Clone, PartialEq)]
pub struct RviOutcome {
    pub q: TabularQ,
    /// `f(Q_n)` for `n = 0..=iterations`.
    pub f_trace: Vec<f64>,
    /// `span(Q_{n+1} - Q_n)` for each iteration.
    pub span_trace: Vec<f64>,
    pub iterations: usize,
    /// False when `max_iter` was reached first.
    pub converged: bool,
    pub weakly_communicating: bool,
}

impl RviOutcome {
    pub fn f_limit(&self) -> f64 {
        *self.f_trace.last().unwrap_or(&f64::NAN)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RviParams {
    pub alpha: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RviParams {
    fn default() -> Self {
        RviParams { alpha: 0.5, tol: 1e-12, max_iter: 1_000_000 }
    }
}

fn reference_value(eq: &ExpectedQuantities, reference: &RviReference, q: &[f64], v: &[f64]) -> f64 {
    match reference {
        RviReference::FixedPair(i) => (eq.r_sa[*i] + eq.expect(*i, v) - q[*i]) / eq.l_sa[*i],
        RviReference::Function(f) => f.eval(q),
    }
}

fn rvi_loop(model: &Model, reference: &RviReference, params: RviParams, q0: &TabularQ, scaled: bool) -> Result<RviOutcome> {
    let eq = expected_quantities(model);
    let np = model.n_pairs();
    if q0.len() != np {
        return Err(Error::DimensionMismatch { expected: np, got: q0.len() });
    }
    if let RviReference::FixedPair(i) = reference {
        if *i >= np {
            return Err(Error::IndexOutOfRange { what: "pairs", index: *i, len: np });
        }
    }
    let wc = chain::classify_structure(model).is_weakly_communicating();
    let mut q = q0.as_slice().to_vec();
    let mut next = vec![0.0; np];
    let mut delta = vec![0.0; np];
    let mut f_trace = Vec::new();
    let mut span_trace = Vec::new();
    let mut converged = false;
    let mut it = 0;
    while it < params.max_iter {
        let v = eq.layout.state_values(&q);
        let f = reference_value(&eq, reference, &q, &v);
        f_trace.push(f);
        for i in 0..np {
            let pm = eq.expect(i, &v);
            next[i] = if scaled {
                q[i] + params.alpha * ((eq.r_sa[i] - eq.l_sa[i] * f + pm - q[i]) / eq.l_sa[i])
            } else {
                q[i] + params.alpha * (eq.r_sa[i] - f + pm - q[i])
            };
            delta[i] = next[i] - q[i];
        }
        core::mem::swap(&mut q, &mut next);
        it += 1;
        let sp = span(&delta);
        span_trace.push(sp);
        if !sp.is_finite() {
            break;
        }
        if sp <= params.tol {
            converged = true;
            break;
        }
    }
    let v = eq.layout.state_values(&q);
    f_trace.push(reference_value(&eq, reference, &q, &v));
    Ok(RviOutcome {
        q: TabularQ::from_vec(q),
        f_trace,
        span_trace,
        iterations: it,
        converged,
        weakly_communicating: wc,
    })
}

/// Synchronous RVI for MDPs: `Q += alpha (r - f(Q) + P max Q - Q)`.
pub fn classical_rvi(model: &Model, reference: &RviReference, params: RviParams, q0: &TabularQ) -> Result<RviOutcome> {
    if !(params.alpha > 0.0 && params.alpha < 1.0) {
        return Err(Error::InvalidAlpha { alpha: params.alpha, bound: 1.0 });
    }
    if !model.is_mdp() {
        return Err(Error::InvalidParameter("classical RVI needs unit holding times".into()));
    }
    rvi_loop(model, reference, params, q0, false)
}

/// Schweitzer's SMDP form: updates are divided by `l_sa` and the fixed-pair
/// reference is divided by `l` at that pair. Requires `alpha < min l_sa`.
pub fn schweitzer_rvi(model: &Model, ref_pair: usize, params: RviParams, q0: &TabularQ) -> Result<RviOutcome> {
    let eq = expected_quantities(model);
    let lmin = eq.l_sa.iter().copied().fold(f64::INFINITY, f64::min);
    if !(params.alpha > 0.0 && params.alpha < lmin) {
        return Err(Error::InvalidAlpha { alpha: params.alpha, bound: lmin });
    }
    rvi_loop(model, &RviReference::FixedPair(ref_pair), params, q0, true)
}
