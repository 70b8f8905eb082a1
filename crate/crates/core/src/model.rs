//! Finite MDP/SMDP models, policies and tabular value tables.
//!
//! A [`Model`] is an SMDP; an MDP is the special case where every holding
//! time equals one. Actions may differ between states, so state-action pairs
//! are numbered contiguously state by state and described by a [`Layout`].

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut, Range};

use rand::Rng;

use crate::error::{Error, Result};

/// Row-sum tolerance for kernels and policies.
pub const PROB_TOL: f64 = 1e-12;

/// Default lower bound on holding times.
pub const DEFAULT_HOLDING_FLOOR: f64 = 1e-9;

/// Contiguous numbering of state-action pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    offsets: Vec<usize>,
}

impl Layout {
    /// Layout with `counts[s]` actions in state `s`.
    pub fn from_counts(counts: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(counts.len() + 1);
        offsets.push(0);
        let mut acc = 0;
        for &c in counts {
            acc += c;
            offsets.push(acc);
        }
        Layout { offsets }
    }

    /// Layout with the same number of actions in every state.
    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        Self::from_counts(&vec![n_actions; n_states])
    }

    pub fn n_states(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn n_pairs(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn pairs(&self, s: usize) -> Range<usize> {
        self.offsets[s]..self.offsets[s + 1]
    }

    pub fn n_actions(&self, s: usize) -> usize {
        self.offsets[s + 1] - self.offsets[s]
    }

    pub fn state_of(&self, pair: usize) -> usize {
        match self.offsets.binary_search(&pair) {
            Ok(mut i) => {
                // skip states without actions
                while self.offsets[i + 1] == pair {
                    i += 1;
                }
                i
            }
            Err(i) => i - 1,
        }
    }

    /// Number of deterministic policies, saturating.
    pub fn policy_count(&self) -> u128 {
        (0..self.n_states()).fold(1u128, |acc, s| acc.saturating_mul(self.n_actions(s) as u128))
    }

    /// `max_{a} q(s, a)`.
    pub fn max_at(&self, q: &[f64], s: usize) -> f64 {
        q[self.pairs(s)].iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest local action index attaining the maximum.
    pub fn argmax_at(&self, q: &[f64], s: usize) -> usize {
        let row = &q[self.pairs(s)];
        let mut best = 0;
        for (k, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = k;
            }
        }
        best
    }

    /// State values `v(s) = max_a q(s, a)`.
    pub fn state_values(&self, q: &[f64]) -> Vec<f64> {
        (0..self.n_states()).map(|s| self.max_at(q, s)).collect()
    }

    /// Deterministic policy greedy w.r.t. `q`.
    pub fn greedy(&self, q: &[f64]) -> DeterministicPolicy {
        DeterministicPolicy::new((0..self.n_states()).map(|s| self.argmax_at(q, s)).collect())
    }
}

/// One support point of a kernel row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub next: usize,
    pub reward: f64,
    pub holding: f64,
    pub prob: f64,
}

/// A sampled transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub next: usize,
    pub reward: f64,
    pub holding: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ViolationKind {
    ProbabilitySum { sum: f64 },
    NegativeProbability { prob: f64 },
    HoldingBelowFloor { holding: f64, floor: f64 },
    NonFinite,
    EmptyRow,
    NoActions,
}

/// A failed model invariant; `action` is `None` for state-level checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub state: usize,
    pub action: Option<usize>,
    pub kind: ViolationKind,
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self.action {
            Some(a) => write!(f, "(state {}, action {}): ", self.state, a)?,
            None => write!(f, "state {}: ", self.state)?,
        }
        match self.kind {
            ViolationKind::ProbabilitySum { sum } => write!(f, "probabilities sum to {sum}"),
            ViolationKind::NegativeProbability { prob } => write!(f, "negative probability {prob}"),
            ViolationKind::HoldingBelowFloor { holding, floor } => {
                write!(f, "holding time {holding} below the bound {floor}")
            }
            ViolationKind::NonFinite => write!(f, "non-finite reward, holding time or probability"),
            ViolationKind::EmptyRow => write!(f, "empty kernel row"),
            ViolationKind::NoActions => write!(f, "no available actions"),
        }
    }
}

/// Finite SMDP with per-state action sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    name: String,
    state_names: Vec<String>,
    action_names: Vec<String>,
    layout: Layout,
    /// Global action id of each pair.
    pair_action: Vec<usize>,
    kernel: Vec<Vec<Outcome>>,
    holding_floor: f64,
}

/// Incremental model construction. A pair exists iff at least one
/// transition was added for it.
#[derive(Debug, Clone)]
pub struct ModelBuilder {
    name: String,
    state_names: Vec<String>,
    action_names: Vec<String>,
    rows: Vec<Vec<Vec<Outcome>>>,
    holding_floor: f64,
}

impl ModelBuilder {
    pub fn new<S: AsRef<str>>(name: &str, states: &[S], actions: &[S]) -> Self {
        ModelBuilder {
            name: name.to_string(),
            state_names: states.iter().map(|s| s.as_ref().to_string()).collect(),
            action_names: actions.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: vec![vec![Vec::new(); actions.len()]; states.len()],
            holding_floor: DEFAULT_HOLDING_FLOOR,
        }
    }

    pub fn holding_floor(mut self, floor: f64) -> Self {
        self.holding_floor = floor;
        self
    }

    /// Adds an MDP transition (holding time 1).
    pub fn add(&mut self, s: usize, a: usize, next: usize, reward: f64, prob: f64) -> &mut Self {
        self.add_smdp(s, a, next, reward, 1.0, prob)
    }

    pub fn add_smdp(
        &mut self,
        s: usize,
        a: usize,
        next: usize,
        reward: f64,
        holding: f64,
        prob: f64,
    ) -> &mut Self {
        self.rows[s][a].push(Outcome { next, reward, holding, prob });
        self
    }

    /// Builds without checking kernel invariants; index errors still fail.
    pub fn build_unchecked(self) -> Result<Model> {
        let n = self.state_names.len();
        let mut counts = Vec::with_capacity(n);
        let mut pair_action = Vec::new();
        let mut kernel = Vec::new();
        for row in self.rows {
            let mut c = 0;
            for (a, outcomes) in row.into_iter().enumerate() {
                if outcomes.is_empty() {
                    continue;
                }
                for o in &outcomes {
                    if o.next >= n {
                        return Err(Error::IndexOutOfRange { what: "states", index: o.next, len: n });
                    }
                }
                pair_action.push(a);
                kernel.push(outcomes);
                c += 1;
            }
            counts.push(c);
        }
        Ok(Model {
            name: self.name,
            state_names: self.state_names,
            action_names: self.action_names,
            layout: Layout::from_counts(&counts),
            pair_action,
            kernel,
            holding_floor: self.holding_floor,
        })
    }

    /// Builds and rejects models that fail [`Model::validate`].
    pub fn build(self) -> Result<Model> {
        let m = self.build_unchecked()?;
        let v = m.validate();
        if v.is_empty() {
            Ok(m)
        } else {
            Err(Error::InvalidModel(v))
        }
    }
}

impl Model {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn action_names(&self) -> &[String] {
        &self.action_names
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn n_states(&self) -> usize {
        self.layout.n_states()
    }

    pub fn n_pairs(&self) -> usize {
        self.layout.n_pairs()
    }

    pub fn holding_floor(&self) -> f64 {
        self.holding_floor
    }

    /// Global action id of a pair.
    pub fn pair_action(&self, pair: usize) -> usize {
        self.pair_action[pair]
    }

    pub fn pair_state(&self, pair: usize) -> usize {
        self.layout.state_of(pair)
    }

    /// Pair index of `(s, a)` with `a` a global action id.
    pub fn pair(&self, s: usize, a: usize) -> Option<usize> {
        if s >= self.n_states() {
            return None;
        }
        self.layout.pairs(s).find(|&p| self.pair_action[p] == a)
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.state_names.iter().position(|n| n == name)
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.action_names.iter().position(|n| n == name)
    }

    /// Pair index from state and action names.
    pub fn pair_by_name(&self, state: &str, action: &str) -> Option<usize> {
        self.pair(self.state_index(state)?, self.action_index(action)?)
    }

    pub fn outcomes(&self, pair: usize) -> &[Outcome] {
        &self.kernel[pair]
    }

    /// True iff every holding time equals one.
    pub fn is_mdp(&self) -> bool {
        self.kernel.iter().flatten().all(|o| o.holding == 1.0)
    }

    /// All invariant violations; empty iff the model is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for s in 0..self.n_states() {
            if self.layout.n_actions(s) == 0 {
                out.push(Violation { state: s, action: None, kind: ViolationKind::NoActions });
            }
            for p in self.layout.pairs(s) {
                let a = Some(self.pair_action[p]);
                let row = &self.kernel[p];
                if row.is_empty() {
                    out.push(Violation { state: s, action: a, kind: ViolationKind::EmptyRow });
                    continue;
                }
                let mut sum = 0.0;
                for o in row {
                    if !(o.prob.is_finite() && o.reward.is_finite() && o.holding.is_finite()) {
                        out.push(Violation { state: s, action: a, kind: ViolationKind::NonFinite });
                        continue;
                    }
                    if o.prob < 0.0 {
                        out.push(Violation {
                            state: s,
                            action: a,
                            kind: ViolationKind::NegativeProbability { prob: o.prob },
                        });
                    }
                    if o.holding < self.holding_floor {
                        out.push(Violation {
                            state: s,
                            action: a,
                            kind: ViolationKind::HoldingBelowFloor {
                                holding: o.holding,
                                floor: self.holding_floor,
                            },
                        });
                    }
                    sum += o.prob;
                }
                if (sum - 1.0).abs() > PROB_TOL {
                    out.push(Violation {
                        state: s,
                        action: a,
                        kind: ViolationKind::ProbabilitySum { sum },
                    });
                }
            }
        }
        out
    }

    /// Draws one outcome of pair `pair` by inverse-CDF over the kernel row.
    pub fn sample_pair<R: Rng + ?Sized>(&self, pair: usize, rng: &mut R) -> Transition {
        let row = &self.kernel[pair];
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for o in row {
            acc += o.prob;
            if u < acc {
                return Transition { next: o.next, reward: o.reward, holding: o.holding };
            }
        }
        // rounding slack: last outcome with positive probability
        let o = row.iter().rev().find(|o| o.prob > 0.0).unwrap_or(&row[row.len() - 1]);
        Transition { next: o.next, reward: o.reward, holding: o.holding }
    }

    /// Samples `(s', r, l)` for state `s` and global action `a`.
    pub fn sample_transition<R: Rng + ?Sized>(&self, s: usize, a: usize, rng: &mut R) -> Result<Transition> {
        let p = self.pair(s, a).ok_or(Error::UnknownStateAction { state: s, action: a })?;
        Ok(self.sample_pair(p, rng))
    }

    /// Copy of the model with every reward set to zero.
    pub fn with_zero_rewards(&self) -> Model {
        let mut m = self.clone();
        for o in m.kernel.iter_mut().flatten() {
            o.reward = 0.0;
        }
        m
    }

    /// Copy with holding times multiplied by `scale`, rewards unchanged.
    pub fn with_holding_scaled(&self, scale: f64) -> Model {
        let mut m = self.clone();
        for o in m.kernel.iter_mut().flatten() {
            o.holding *= scale;
        }
        m
    }

    /// Copy with rewards and holding times multiplied by `scale`.
    pub fn time_scaled(&self, scale: f64) -> Model {
        let mut m = self.clone();
        for o in m.kernel.iter_mut().flatten() {
            o.reward *= scale;
            o.holding *= scale;
        }
        m
    }
}

/// Dense value table over the pairs of a [`Layout`].
#[derive(Debug, Clone, PartialEq)]
pub struct TabularQ {
    values: Vec<f64>,
}

impl TabularQ {
    pub fn zeros(n: usize) -> Self {
        TabularQ { values: vec![0.0; n] }
    }

    pub fn from_vec(values: Vec<f64>) -> Self {
        TabularQ { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn shifted(&self, c: f64) -> Self {
        TabularQ { values: self.values.iter().map(|v| v + c).collect() }
    }
}

impl Index<usize> for TabularQ {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl IndexMut<usize> for TabularQ {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.values[i]
    }
}

/// Stationary randomized policy stored per pair of a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryPolicy {
    probs: Vec<f64>,
}

impl StationaryPolicy {
    /// Checks that each state's row is a distribution.
    pub fn new(layout: &Layout, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != layout.n_pairs() {
            return Err(Error::DimensionMismatch { expected: layout.n_pairs(), got: probs.len() });
        }
        for s in 0..layout.n_states() {
            let row = &probs[layout.pairs(s)];
            let sum: f64 = row.iter().sum();
            if row.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > PROB_TOL {
                return Err(Error::InvalidPolicy { state: s });
            }
        }
        Ok(StationaryPolicy { probs })
    }

    /// Uniform over the available actions of each state.
    pub fn uniform(layout: &Layout) -> Self {
        let mut probs = vec![0.0; layout.n_pairs()];
        for s in 0..layout.n_states() {
            let k = layout.n_actions(s) as f64;
            for p in layout.pairs(s) {
                probs[p] = 1.0 / k;
            }
        }
        StationaryPolicy { probs }
    }

    /// Same local-action distribution in every state; each state takes the
    /// entries of `weights` indexed by its global action ids, renormalised
    /// over the available actions.
    pub fn from_action_weights(model: &Model, weights: &[f64]) -> Result<Self> {
        let layout = model.layout();
        let mut probs = vec![0.0; layout.n_pairs()];
        for s in 0..layout.n_states() {
            let total: f64 = layout.pairs(s).map(|p| weights[model.pair_action(p)]).sum();
            if !(total > 0.0) {
                return Err(Error::InvalidPolicy { state: s });
            }
            for p in layout.pairs(s) {
                probs[p] = weights[model.pair_action(p)] / total;
            }
        }
        Ok(StationaryPolicy { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, pair: usize) -> f64 {
        self.probs[pair]
    }

    /// Samples a pair index of state `s`.
    pub fn sample<R: Rng + ?Sized>(&self, layout: &Layout, s: usize, rng: &mut R) -> usize {
        let r = layout.pairs(s);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for p in r.clone() {
            acc += self.probs[p];
            if u < acc {
                return p;
            }
        }
        r.rev().find(|&p| self.probs[p] > 0.0).unwrap_or(layout.pairs(s).start)
    }
}

/// Deterministic policy as one local action index per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeterministicPolicy {
    choice: Vec<usize>,
}

impl DeterministicPolicy {
    pub fn new(choice: Vec<usize>) -> Self {
        DeterministicPolicy { choice }
    }

    pub fn choices(&self) -> &[usize] {
        &self.choice
    }

    /// Pair chosen in state `s`.
    pub fn pair(&self, layout: &Layout, s: usize) -> usize {
        layout.pairs(s).start + self.choice[s]
    }

    pub fn to_stationary(&self, layout: &Layout) -> StationaryPolicy {
        let mut probs = vec![0.0; layout.n_pairs()];
        for s in 0..layout.n_states() {
            probs[self.pair(layout, s)] = 1.0;
        }
        StationaryPolicy { probs }
    }

    /// Iterates over every deterministic policy of `layout` in
    /// lexicographic order (state 0 varies slowest).
    pub fn enumerate(layout: &Layout) -> PolicyIter<'_> {
        let n = layout.n_states();
        let done = (0..n).any(|s| layout.n_actions(s) == 0);
        PolicyIter { layout, next: vec![0; n], done }
    }
}

pub struct PolicyIter<'a> {
    layout: &'a Layout,
    next: Vec<usize>,
    done: bool,
}

impl Iterator for PolicyIter<'_> {
    type Item = DeterministicPolicy;

    fn next(&mut self) -> Option<DeterministicPolicy> {
        if self.done {
            return None;
        }
        let out = DeterministicPolicy::new(self.next.clone());
        let mut s = self.next.len();
        loop {
            if s == 0 {
                self.done = true;
                break;
            }
            s -= 1;
            self.next[s] += 1;
            if self.next[s] < self.layout.n_actions(s) {
                break;
            }
            self.next[s] = 0;
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_state() -> Model {
        let mut b = ModelBuilder::new("t", &["a", "b"], &["x", "y"]);
        b.add(0, 0, 0, 1.0, 0.5).add(0, 0, 1, 0.0, 0.5).add(0, 1, 1, 2.0, 1.0);
        b.add(1, 1, 0, -1.0, 1.0);
        b.build().unwrap()
    }

    #[test]
    fn layout_numbering() {
        let m = two_state();
        assert_eq!(m.n_pairs(), 3);
        assert_eq!(m.pair(0, 1), Some(1));
        assert_eq!(m.pair(1, 0), None);
        assert_eq!(m.pair(1, 1), Some(2));
        assert_eq!(m.pair_state(2), 1);
        assert_eq!(m.layout().policy_count(), 2);
        let l = Layout::from_counts(&[2, 0, 1]);
        assert_eq!(l.state_of(1), 0);
        assert_eq!(l.state_of(2), 2);
    }

    #[test]
    fn row_sum_violation_names_pair() {
        let mut b = ModelBuilder::new("bad", &["a"], &["x"]);
        b.add(0, 0, 0, 0.0, 0.9);
        let m = b.build_unchecked().unwrap();
        let v = m.validate();
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].state, v[0].action), (0, Some(0)));
        assert!(matches!(v[0].kind, ViolationKind::ProbabilitySum { .. }));
    }

    #[test]
    fn zero_holding_time_violation() {
        let mut b = ModelBuilder::new("bad", &["a"], &["x"]);
        b.add_smdp(0, 0, 0, 0.0, 0.0, 1.0);
        let v = b.build_unchecked().unwrap().validate();
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0].kind, ViolationKind::HoldingBelowFloor { .. }));
    }

    #[test]
    fn sampling_is_deterministic_and_point_mass_exact() {
        let m = two_state();
        let mut r1 = ChaCha8Rng::seed_from_u64(7);
        let mut r2 = ChaCha8Rng::seed_from_u64(7);
        let a: Vec<_> = (0..50).map(|_| m.sample_pair(0, &mut r1)).collect();
        let b: Vec<_> = (0..50).map(|_| m.sample_pair(0, &mut r2)).collect();
        assert_eq!(a, b);
        let t = m.sample_transition(1, 1, &mut r1).unwrap();
        assert_eq!((t.next, t.reward), (0, -1.0));
        assert!(matches!(
            m.sample_transition(1, 0, &mut r1),
            Err(Error::UnknownStateAction { state: 1, action: 0 })
        ));
    }

    #[test]
    fn policy_enumeration_order() {
        let l = Layout::from_counts(&[2, 1, 3]);
        let all: Vec<_> = DeterministicPolicy::enumerate(&l).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0].choices(), &[0, 0, 0]);
        assert_eq!(all[5].choices(), &[1, 0, 2]);
    }

    #[test]
    fn greedy_breaks_ties_to_smallest_index() {
        let l = Layout::uniform(1, 3);
        assert_eq!(l.argmax_at(&[1.0, 2.0, 2.0], 0), 1);
    }
}
