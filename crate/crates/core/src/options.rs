//! Options over an MDP, the induced SMDP, and the inter-/intra-option
//! learning algorithms.
//!
//! State-option pairs use the layout `s * n_options + o`.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{Layout, Model, ModelBuilder, StationaryPolicy, TabularQ};
use crate::reference::FFunction;
use crate::schedule::StepSchedule;
use crate::solvers::{self, ExpectedQuantities};

/// Default cap on the number of primitive steps of one option execution.
pub const DEFAULT_EXECUTION_CAP: u64 = 1_000_000;

/// Stationary options: `pi[o]` is a pair-indexed policy of the base model,
/// `beta[o][s]` the termination probability on entering `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionSet {
    names: Vec<String>,
    pi: Vec<StationaryPolicy>,
    beta: Vec<Vec<f64>>,
}

impl OptionSet {
    pub fn new(model: &Model, names: Vec<String>, pi: Vec<StationaryPolicy>, beta: Vec<Vec<f64>>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::InvalidParameter("option set is empty".into()));
        }
        if pi.len() != names.len() || beta.len() != names.len() {
            return Err(Error::DimensionMismatch { expected: names.len(), got: pi.len().min(beta.len()) });
        }
        for b in &beta {
            if b.len() != model.n_states() {
                return Err(Error::DimensionMismatch { expected: model.n_states(), got: b.len() });
            }
            if b.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(Error::InvalidParameter("termination probability outside [0, 1]".into()));
            }
        }
        for p in &pi {
            // re-validate against this model's layout
            StationaryPolicy::new(model.layout(), p.probs().to_vec())?;
        }
        Ok(OptionSet { names, pi, beta })
    }

    /// Options from per-global-action weights (renormalised in each state).
    pub fn from_action_weights<S: AsRef<str>>(model: &Model, names: &[S], weights: &[Vec<f64>], beta: &[Vec<f64>]) -> Result<Self> {
        let pi = weights
            .iter()
            .map(|w| StationaryPolicy::from_action_weights(model, w))
            .collect::<Result<Vec<_>>>()?;
        Self::new(model, names.iter().map(|n| n.as_ref().to_string()).collect(), pi, beta.to_vec())
    }

    /// One option per action, terminating after one step.
    pub fn primitive(model: &Model) -> Result<Self> {
        let na = model.action_names().len();
        let weights: Vec<Vec<f64>> = (0..na).map(|a| (0..na).map(|b| if a == b { 1.0 } else { 0.0 }).collect()).collect();
        Self::from_action_weights(model, model.action_names(), &weights, &vec![vec![1.0; model.n_states()]; na])
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn policy(&self, o: usize) -> &StationaryPolicy {
        &self.pi[o]
    }

    pub fn beta(&self, o: usize, s: usize) -> f64 {
        self.beta[o][s]
    }

    pub fn layout(&self, model: &Model) -> Layout {
        Layout::uniform(model.n_states(), self.len())
    }
}

/// States from which an option cannot terminate within `|S|` steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerminationAudit {
    /// `(option, state)` pairs failing the check.
    pub failing: Vec<(usize, usize)>,
}

impl TerminationAudit {
    pub fn passed(&self) -> bool {
        self.failing.is_empty()
    }
}

/// Backward reachability of termination on each option's chain.
pub fn audit_termination(model: &Model, opts: &OptionSet) -> TerminationAudit {
    let n = model.n_states();
    let mut failing = Vec::new();
    for o in 0..opts.len() {
        let succ: Vec<Vec<usize>> = (0..n)
            .map(|s| {
                let mut v: Vec<usize> = model
                    .layout()
                    .pairs(s)
                    .filter(|&p| opts.pi[o].prob(p) > 0.0)
                    .flat_map(|p| model.outcomes(p).iter().filter(|x| x.prob > 0.0).map(|x| x.next))
                    .collect();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect();
        let mut ok = vec![false; n];
        for _ in 0..n {
            let prev = ok.clone();
            for s in 0..n {
                ok[s] = succ[s].iter().any(|&t| opts.beta[o][t] > 0.0 || prev[t]);
            }
        }
        failing.extend((0..n).filter(|&s| !ok[s]).map(|s| (o, s)));
    }
    TerminationAudit { failing }
}

/// One execution of an option.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionRollout {
    pub final_state: usize,
    pub cum_reward: f64,
    /// Sum of primitive holding times (the step count for MDPs).
    pub duration: f64,
    pub steps: u64,
    /// `(state, pair, reward)` per primitive step; empty unless requested.
    pub trace: Vec<(usize, usize, f64)>,
}

fn run_option<R: RngCore + ?Sized>(
    model: &Model,
    opts: &OptionSet,
    s: usize,
    o: usize,
    rng: &mut R,
    cap: u64,
    record: bool,
) -> Result<OptionRollout> {
    let mut state = s;
    let mut out = OptionRollout { final_state: s, cum_reward: 0.0, duration: 0.0, steps: 0, trace: Vec::new() };
    loop {
        if out.steps >= cap {
            return Err(Error::TerminationCapExceeded { option: o, state: s, cap });
        }
        let pair = opts.pi[o].sample(model.layout(), state, rng);
        let t = model.sample_pair(pair, rng);
        out.cum_reward += t.reward;
        out.duration += t.holding;
        out.steps += 1;
        if record {
            out.trace.push((state, pair, t.reward));
        }
        state = t.next;
        let b = opts.beta[o][state];
        if b >= 1.0 || (b > 0.0 && rng.random::<f64>() < b) {
            out.final_state = state;
            return Ok(out);
        }
    }
}

/// Executes option `o` from `s` until termination, recording the trace.
pub fn execute_option<R: RngCore + ?Sized>(model: &Model, opts: &OptionSet, s: usize, o: usize, rng: &mut R, cap: u64) -> Result<OptionRollout> {
    run_option(model, opts, s, o, rng, cap, true)
}

/// Expected reward `r̂`, duration `l̂` and termination-state law `p̂` of the
/// induced SMDP.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedSmdpQuantities {
    pub n_states: usize,
    pub n_options: usize,
    pub r_hat: Vec<f64>,
    pub l_hat: Vec<f64>,
    /// Row-major `(s * n_options + o) x n_states`.
    pub p_hat: Vec<f64>,
}

impl InducedSmdpQuantities {
    pub fn layout(&self) -> Layout {
        Layout::uniform(self.n_states, self.n_options)
    }

    pub fn p_row(&self, pair: usize) -> &[f64] {
        &self.p_hat[pair * self.n_states..(pair + 1) * self.n_states]
    }

    pub fn to_expected(&self) -> ExpectedQuantities {
        ExpectedQuantities::new(self.layout(), self.r_hat.clone(), self.l_hat.clone(), self.p_hat.clone())
    }

    /// SMDP over options whose rows are `(s', r̂, l̂)` with probability `p̂`.
    /// Sufficient for gains, residuals and classification.
    pub fn to_model(&self, base: &Model, opts: &OptionSet) -> Model {
        let mut b = ModelBuilder::new(&alloc::format!("{}/options", base.name()), base.state_names(), opts.names()).holding_floor(1.0 - 1e-9);
        for s in 0..self.n_states {
            for o in 0..self.n_options {
                let i = s * self.n_options + o;
                for (t, &p) in self.p_row(i).iter().enumerate() {
                    if p > 0.0 {
                        b.add_smdp(s, o, t, self.r_hat[i], self.l_hat[i], p);
                    }
                }
            }
        }
        b.build_unchecked().expect("indices in range")
    }
}

/// Solves the first-step equations `(I - C_o) x = b` of every option, where
/// `C_o(s, s') = sum_a pi(a|s,o) p(s'|s,a) (1 - beta(s', o))`.
pub fn exact_option_quantities(model: &Model, opts: &OptionSet) -> Result<InducedSmdpQuantities> {
    let eq = solvers::expected_quantities(model);
    let n = model.n_states();
    let no = opts.len();
    let mut r_hat = vec![0.0; n * no];
    let mut l_hat = vec![0.0; n * no];
    let mut p_hat = vec![0.0; n * no * n];
    for o in 0..no {
        let mut a = DMatrix::identity(n, n);
        let mut b = DMatrix::zeros(n, n + 2);
        for s in 0..n {
            for pair in model.layout().pairs(s) {
                let w = opts.pi[o].prob(pair);
                if w == 0.0 {
                    continue;
                }
                b[(s, n)] += w * eq.r_sa[pair];
                b[(s, n + 1)] += w * eq.l_sa[pair];
                for (t, &p) in eq.p_row(pair).iter().enumerate() {
                    let beta = opts.beta[o][t];
                    a[(s, t)] -= w * p * (1.0 - beta);
                    b[(s, t)] += w * p * beta;
                }
            }
        }
        let x = linalg::solve(&a, &b)?;
        for s in 0..n {
            let i = s * no + o;
            for t in 0..n {
                p_hat[i * n + t] = x[(s, t)];
            }
            r_hat[i] = x[(s, n)];
            l_hat[i] = x[(s, n + 1)];
        }
    }
    Ok(InducedSmdpQuantities { n_states: n, n_options: no, r_hat, l_hat, p_hat })
}

/// Data of the intra-option equation: `r(s,o) = sum_a pi r_sa` and the
/// one-step law `P_o(s, s') = sum_a pi(a|s,o) p(s'|s,a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntraForm {
    pub n_states: usize,
    pub n_options: usize,
    pub r: Vec<f64>,
    pub p: Vec<f64>,
    /// `beta[o][s]`.
    pub beta: Vec<Vec<f64>>,
}

impl IntraForm {
    pub fn new(model: &Model, opts: &OptionSet) -> Self {
        let eq = solvers::expected_quantities(model);
        let n = model.n_states();
        let no = opts.len();
        let mut r = vec![0.0; n * no];
        let mut p = vec![0.0; n * no * n];
        for s in 0..n {
            for o in 0..no {
                let i = s * no + o;
                for pair in model.layout().pairs(s) {
                    let w = opts.pi[o].prob(pair);
                    r[i] += w * eq.r_sa[pair];
                    for (t, &x) in eq.p_row(pair).iter().enumerate() {
                        p[i * n + t] += w * x;
                    }
                }
            }
        }
        IntraForm { n_states: n, n_options: no, r, p, beta: opts.beta.clone() }
    }

    /// `U[q](s', o) = (1 - beta(s',o)) q(s',o) + beta(s',o) max_o' q(s',o')`.
    pub fn u(&self, q: &[f64], s: usize, o: usize, vmax: f64) -> f64 {
        let b = self.beta[o][s];
        (1.0 - b) * q[s * self.n_options + o] + b * vmax
    }

    /// `g(q)(s,o) = sum_s' P_o(s,s') U[q](s',o)`.
    pub fn g(&self, q: &[f64], out: &mut [f64]) {
        let no = self.n_options;
        let vmax: Vec<f64> = (0..self.n_states).map(|s| q[s * no..(s + 1) * no].iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect();
        for s in 0..self.n_states {
            for o in 0..no {
                let i = s * no + o;
                let row = &self.p[i * self.n_states..(i + 1) * self.n_states];
                out[i] = row.iter().enumerate().filter(|(_, &w)| w != 0.0).map(|(t, w)| w * self.u(q, t, o, vmax[t])).sum();
            }
        }
    }
}

/// `(inter, intra)` residuals of the two option-value optimality equations.
pub fn option_residuals(quant: &InducedSmdpQuantities, intra: &IntraForm, q: &[f64], rbar: f64) -> (f64, f64) {
    let inter = solvers::residual_with(&quant.to_expected(), q, rbar);
    let mut g = vec![0.0; q.len()];
    intra.g(q, &mut g);
    let intra_res = (0..q.len()).fold(0.0, |m, i| f64::max(m, (q[i] - (intra.r[i] - rbar + g[i])).abs()));
    (inter, intra_res)
}

/// State of the inter-option algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct InterOptionLearner {
    pub q: TabularQ,
    /// Duration estimates `L_n`.
    pub l_est: Vec<f64>,
    pub counts: Vec<u64>,
    pub n: u64,
    /// `min(1, min L_0)`, a lower bound on every `L_n`.
    pub l_floor: f64,
}

impl InterOptionLearner {
    pub fn new(q0: TabularQ, l0: Vec<f64>) -> Result<Self> {
        if l0.len() != q0.len() {
            return Err(Error::DimensionMismatch { expected: q0.len(), got: l0.len() });
        }
        if l0.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::InvalidParameter("initial duration estimates must be positive".into()));
        }
        let floor = l0.iter().copied().fold(1.0, f64::min);
        let n = q0.len();
        Ok(InterOptionLearner { q: q0, l_est: l0, counts: vec![0; n], n: 0, l_floor: floor })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterStepInfo {
    pub f_value: f64,
    pub rollouts: Vec<(usize, OptionRollout)>,
}

/// One inter-option iteration over the pairs `ys`:
/// `Q += alpha_nu (R - L f(Q_n) + max Q_n(S', .) - Q) / L`, then
/// `L += beta_nu (tau - L)`.
#[allow(clippy::too_many_arguments)]
pub fn inter_option_step<R: RngCore + ?Sized>(
    learner: &mut InterOptionLearner,
    model: &Model,
    opts: &OptionSet,
    f: &FFunction,
    sched: &StepSchedule,
    beta_sched: &StepSchedule,
    ys: &[usize],
    rng: &mut R,
    cap: u64,
) -> Result<InterStepInfo> {
    if ys.is_empty() {
        return Err(Error::EmptyUpdateSet);
    }
    let no = opts.len();
    let np = model.n_states() * no;
    if let Some(&bad) = ys.iter().find(|&&i| i >= np) {
        return Err(Error::IndexOutOfRange { what: "state-option pairs", index: bad, len: np });
    }
    let layout = opts.layout(model);
    let fq = f.eval(learner.q.as_slice());
    let mut rollouts = Vec::with_capacity(ys.len());
    let mut incs = Vec::with_capacity(ys.len());
    for &i in ys {
        let r = run_option(model, opts, i / no, i % no, rng, cap, false)?;
        let l = learner.l_est[i];
        let q = learner.q.as_slice();
        incs.push((r.cum_reward - l * fq + layout.max_at(q, r.final_state) - q[i]) / l);
        rollouts.push((i, r));
    }
    for ((i, r), d) in rollouts.iter().zip(incs) {
        learner.counts[*i] += 1;
        let k = learner.counts[*i];
        learner.q[*i] += sched.alpha(k) * d;
        learner.l_est[*i] += beta_sched.alpha(k) * (r.duration - learner.l_est[*i]);
    }
    learner.n += 1;
    Ok(InterStepInfo { f_value: fq, rollouts })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntraStepInfo {
    pub f_value: f64,
    /// Largest importance ratio applied.
    pub max_rho: f64,
}

/// Checks absolute continuity and the `epsilon` floor at the states `xs`.
pub fn check_behavior(model: &Model, opts: &OptionSet, behavior: &StationaryPolicy, xs: &[usize], epsilon: f64) -> Result<()> {
    for &s in xs {
        for p in model.layout().pairs(s) {
            let b = behavior.prob(p);
            if b > 0.0 && b < epsilon {
                return Err(Error::BehaviorBelowEpsilon { state: s, action: model.pair_action(p), prob: b, epsilon });
            }
            if b == 0.0 {
                if let Some(o) = (0..opts.len()).find(|&o| opts.pi[o].prob(p) > 0.0) {
                    return Err(Error::AbsContinuityViolation { state: s, option: o, action: model.pair_action(p) });
                }
            }
        }
    }
    Ok(())
}

/// One intra-option iteration: for each `s` in `xs`, one behavior action and
/// transition update every option at `s` with ratio `pi(A|s,o) / b(A|s)`.
#[allow(clippy::too_many_arguments)]
pub fn intra_option_step<R: RngCore + ?Sized>(
    q: &mut TabularQ,
    counts: &mut [u64],
    model: &Model,
    opts: &OptionSet,
    intra: &IntraForm,
    f: &FFunction,
    sched: &StepSchedule,
    behavior: &StationaryPolicy,
    xs: &[usize],
    epsilon: f64,
    rng: &mut R,
) -> Result<IntraStepInfo> {
    if xs.is_empty() {
        return Err(Error::EmptyUpdateSet);
    }
    check_behavior(model, opts, behavior, xs, epsilon)?;
    let no = opts.len();
    let q_n = q.as_slice().to_vec();
    let fq = f.eval(&q_n);
    let mut max_rho: f64 = 0.0;
    for &s in xs {
        let pair = behavior.sample(model.layout(), s, rng);
        let t = model.sample_pair(pair, rng);
        let vmax = q_n[t.next * no..(t.next + 1) * no].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for o in 0..no {
            let i = s * no + o;
            let rho = opts.pi[o].prob(pair) / behavior.prob(pair);
            max_rho = max_rho.max(rho);
            counts[i] += 1;
            let td = t.reward - fq + intra.u(&q_n, t.next, o, vmax) - q_n[i];
            q[i] += sched.alpha(counts[i]) * rho * td;
        }
    }
    Ok(IntraStepInfo { f_value: fq, max_rho })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one_state(beta: f64) -> (Model, OptionSet) {
        let mut b = ModelBuilder::new("one", &["s"], &["a"]);
        b.add(0, 0, 0, 1.0, 1.0);
        let m = b.build().unwrap();
        let o = OptionSet::from_action_weights(&m, &["o"], &[vec![1.0]], &[vec![beta]]).unwrap();
        (m, o)
    }

    #[test]
    fn geometric_duration_exact() {
        let (m, o) = one_state(0.5);
        let q = exact_option_quantities(&m, &o).unwrap();
        assert!((q.l_hat[0] - 2.0).abs() < 1e-12);
        assert!((q.r_hat[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn never_terminating_option_is_rejected() {
        let (m, o) = one_state(0.0);
        assert!(!audit_termination(&m, &o).passed());
        assert!(matches!(exact_option_quantities(&m, &o), Err(Error::SingularSystem(_))));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            execute_option(&m, &o, 0, 0, &mut rng, 1000),
            Err(Error::TerminationCapExceeded { cap: 1000, .. })
        ));
    }

    #[test]
    fn immediate_termination_is_one_step() {
        let m = examples::options_mdp();
        let o = OptionSet::primitive(&m).unwrap();
        let q = exact_option_quantities(&m, &o).unwrap();
        assert!(q.l_hat.iter().all(|&l| (l - 1.0).abs() < 1e-12));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(execute_option(&m, &o, 1, 0, &mut rng, 10).unwrap().steps, 1);
        }
    }

    #[test]
    fn rollout_reward_is_trace_sum() {
        let m = examples::options_mdp();
        let o = examples::options_set();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let r = execute_option(&m, &o, 0, 1, &mut rng, DEFAULT_EXECUTION_CAP).unwrap();
            assert!(r.duration >= 1.0);
            assert_eq!(r.trace.iter().map(|t| t.2).sum::<f64>(), r.cum_reward);
        }
    }

    #[test]
    fn primitive_options_reduce_to_mdp_residual() {
        let m = examples::ex5_1();
        let o = OptionSet::primitive(&m).unwrap();
        let intra = IntraForm::new(&m, &o);
        let quant = exact_option_quantities(&m, &o).unwrap();
        let q = [0.3, -0.7, 1.1, 0.2, -0.4, 0.9];
        let (inter, intra_r) = option_residuals(&quant, &intra, &q, 0.25);
        let direct = solvers::optimality_residual(&m, &q, 0.25);
        assert!((intra_r - direct).abs() < 1e-12);
        assert!((inter - direct).abs() < 1e-12);
    }

    #[test]
    fn on_policy_ratio_is_one_and_bounded() {
        let m = examples::options_mdp();
        let o = examples::options_set();
        let intra = IntraForm::new(&m, &o);
        let b = StationaryPolicy::uniform(m.layout());
        let f = FFunction::mean(6);
        let mut q = TabularQ::zeros(6);
        let mut c = vec![0; 6];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let info = intra_option_step(&mut q, &mut c, &m, &o, &intra, &f, &StepSchedule::default(), &b, &[0, 1, 2], 0.1, &mut rng).unwrap();
            assert!(info.max_rho <= 1.0 / 0.1);
        }
        let on = o.policy(0).clone();
        let info = intra_option_step(&mut q, &mut c, &m, &o, &intra, &f, &StepSchedule::default(), &on, &[1], 0.05, &mut rng).unwrap();
        assert!(info.max_rho >= 1.0);
    }

    #[test]
    fn absolute_continuity_violation() {
        let m = examples::options_mdp();
        let o = examples::options_set();
        let b = StationaryPolicy::from_action_weights(&m, &[1.0, 0.0]).unwrap();
        assert!(matches!(
            check_behavior(&m, &o, &b, &[0], 0.1),
            Err(Error::AbsContinuityViolation { option: 0, .. })
        ));
    }

    #[test]
    fn duration_estimates_stay_above_floor() {
        let m = examples::options_mdp();
        let o = examples::options_set();
        let mut l = InterOptionLearner::new(TabularQ::zeros(6), vec![0.5; 6]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 0..2000 {
            let ys = [n % 6];
            inter_option_step(&mut l, &m, &o, &FFunction::mean(6), &StepSchedule::default(), &StepSchedule::one_over_n(), &ys, &mut rng, DEFAULT_EXECUTION_CAP).unwrap();
            assert!(l.l_est.iter().all(|&x| x >= l.l_floor));
        }
    }

    #[test]
    fn u_operator_boundary_case() {
        let m = examples::options_mdp();
        let o = OptionSet::from_action_weights(&m, &["a", "b"], &[vec![0.5, 0.5], vec![1.0, 0.0]], &[vec![1.0; 3], vec![1.0; 3]]).unwrap();
        let intra = IntraForm::new(&m, &o);
        let q = [1.0, 3.0, -1.0, 2.0, 0.0, 0.0];
        assert_eq!(intra.u(&q, 0, 0, 3.0), 3.0);
    }
}
