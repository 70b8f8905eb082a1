//! Asynchronous RVI Q-learning and Differential Q-learning.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::model::{Model, StationaryPolicy, TabularQ, Transition};
use crate::reference::FFunction;
use crate::schedule::StepSchedule;
use crate::solvers::ExpectedQuantities;

/// Iterate, visit counts and (for Differential Q-learning) the rate estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerState {
    pub q: TabularQ,
    /// `nu_n(s, a)`.
    pub counts: Vec<u64>,
    pub rbar: Option<f64>,
    /// Number of completed iterations.
    pub n: u64,
}

impl LearnerState {
    pub fn new(q0: TabularQ) -> Self {
        let n = q0.len();
        LearnerState { q: q0, counts: vec![0; n], rbar: None, n: 0 }
    }

    pub fn with_rbar(q0: TabularQ, rbar0: f64) -> Self {
        LearnerState { rbar: Some(rbar0), ..Self::new(q0) }
    }
}

pub type SubsetFn = dyn FnMut(u64, &mut dyn RngCore) -> Vec<usize> + Send;

/// How the set `Y_n` of updated pairs is chosen.
pub enum UpdateSource {
    /// Every pair, every iteration.
    Synchronous,
    /// Caller-supplied generator receiving the iteration index.
    Subset(Box<SubsetFn>),
    /// One pair per iteration along a trajectory of the behavior policy.
    OffPolicy { behavior: StationaryPolicy, state: usize },
}

impl core::fmt::Debug for UpdateSource {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            UpdateSource::Synchronous => write!(f, "Synchronous"),
            UpdateSource::Subset(_) => write!(f, "Subset(..)"),
            UpdateSource::OffPolicy { state, .. } => write!(f, "OffPolicy {{ state: {state} }}"),
        }
    }
}

impl UpdateSource {
    /// Current state of an off-policy stream.
    pub fn current_state(&self) -> Option<usize> {
        match self {
            UpdateSource::OffPolicy { state, .. } => Some(*state),
            _ => None,
        }
    }
}

/// What happened during one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    /// `f(Q_n)`, or `R̄_n` for Differential Q-learning.
    pub f_value: f64,
    pub updates: Vec<(usize, Transition)>,
}

fn select_pairs<R: RngCore>(model: &Model, src: &mut UpdateSource, n: u64, rng: &mut R) -> Result<Vec<usize>> {
    let ys = match src {
        UpdateSource::Synchronous => (0..model.n_pairs()).collect(),
        UpdateSource::Subset(g) => g(n, rng),
        UpdateSource::OffPolicy { behavior, state } => vec![behavior.sample(model.layout(), *state, rng)],
    };
    if ys.is_empty() {
        return Err(Error::EmptyUpdateSet);
    }
    if let Some(&bad) = ys.iter().find(|&&p| p >= model.n_pairs()) {
        return Err(Error::IndexOutOfRange { what: "pairs", index: bad, len: model.n_pairs() });
    }
    Ok(ys)
}

/// Samples transitions for `Y_n` and returns the TD errors
/// `R - rate + max Q_n(S', .) - Q_n(s, a)`, all from the pre-update iterate.
fn sample_and_td<R: RngCore>(
    model: &Model,
    q: &[f64],
    rate: f64,
    ys: &[usize],
    rng: &mut R,
) -> (Vec<(usize, Transition)>, Vec<f64>) {
    let mut updates = Vec::with_capacity(ys.len());
    let mut td = Vec::with_capacity(ys.len());
    for &p in ys {
        let t = model.sample_pair(p, rng);
        td.push(t.reward - rate + model.layout().max_at(q, t.next) - q[p]);
        updates.push((p, t));
    }
    (updates, td)
}

fn advance_stream(src: &mut UpdateSource, updates: &[(usize, Transition)]) {
    if let UpdateSource::OffPolicy { state, .. } = src {
        *state = updates[0].1.next;
    }
}

/// One iteration of RVI Q-learning:
/// `Q(s,a) += alpha_nu (R - f(Q_n) + max Q_n(S', .) - Q_n(s,a))` for `(s,a)` in `Y_n`.
pub fn step<R: RngCore>(
    learner: &mut LearnerState,
    model: &Model,
    f: &FFunction,
    sched: &StepSchedule,
    src: &mut UpdateSource,
    rng: &mut R,
) -> Result<StepInfo> {
    let ys = select_pairs(model, src, learner.n, rng)?;
    let fq = f.eval(learner.q.as_slice());
    let (updates, td) = sample_and_td(model, learner.q.as_slice(), fq, &ys, rng);
    for (&p, d) in ys.iter().zip(&td) {
        learner.counts[p] += 1;
        learner.q[p] += sched.alpha(learner.counts[p]) * d;
    }
    learner.n += 1;
    advance_stream(src, &updates);
    Ok(StepInfo { f_value: fq, updates })
}

/// One iteration of Differential Q-learning; `learner.rbar` must be set.
pub fn differential_q_step<R: RngCore>(
    learner: &mut LearnerState,
    model: &Model,
    eta: f64,
    sched: &StepSchedule,
    src: &mut UpdateSource,
    rng: &mut R,
) -> Result<StepInfo> {
    let rbar = learner.rbar.ok_or_else(|| Error::InvalidParameter("differential learner needs rbar".into()))?;
    let ys = select_pairs(model, src, learner.n, rng)?;
    let (updates, td) = sample_and_td(model, learner.q.as_slice(), rbar, &ys, rng);
    let mut total = 0.0;
    for (&p, d) in ys.iter().zip(&td) {
        learner.counts[p] += 1;
        let inc = sched.alpha(learner.counts[p]) * d;
        learner.q[p] += inc;
        total += inc;
    }
    learner.rbar = Some(rbar + eta * total);
    learner.n += 1;
    advance_stream(src, &updates);
    Ok(StepInfo { f_value: rbar, updates })
}

/// Noise split of one sampled update: `m` is the martingale part and `eps`
/// the bias part, zero for RVI Q-learning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseDecomposition {
    pub m: f64,
    pub eps: f64,
}

/// `m = (R - r_sa) + (max_a' q(S', a') - sum_s'' p(s''|s,a) max_a' q(s'', a'))`.
pub fn decompose_noise(eq: &ExpectedQuantities, q: &[f64], pair: usize, sample: &Transition) -> NoiseDecomposition {
    let v = eq.layout.state_values(q);
    let m = (sample.reward - eq.r_sa[pair]) + (v[sample.next] - eq.expect(pair, &v));
    NoiseDecomposition { m, eps: 0.0 }
}

/// Runs `steps` iterations of off-policy learning and returns the learner.
/// Convenience for callers that do not record traces.
pub fn run_off_policy<R: RngCore>(
    model: &Model,
    f: &FFunction,
    sched: &StepSchedule,
    behavior: StationaryPolicy,
    start: usize,
    q0: TabularQ,
    steps: u64,
    rng: &mut R,
) -> Result<LearnerState> {
    let mut learner = LearnerState::new(q0);
    let mut src = UpdateSource::OffPolicy { behavior, state: start };
    for _ in 0..steps {
        step(&mut learner, model, f, sched, &mut src, rng)?;
    }
    Ok(learner)
}

/// Random subset generator: each pair independently with probability
/// `prob`, resampled until nonempty.
pub fn bernoulli_subsets(n_pairs: usize, prob: f64) -> Box<SubsetFn> {
    Box::new(move |_, rng: &mut dyn RngCore| loop {
        let ys: Vec<usize> = (0..n_pairs).filter(|_| rng.random::<f64>() < prob).collect();
        if !ys.is_empty() {
            return ys;
        }
    })
}
