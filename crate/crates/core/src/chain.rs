//! Induced Markov chains, recurrent classes and model classification.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{DeterministicPolicy, Model, StationaryPolicy};

/// Default cap on the number of deterministic policies enumerated.
pub const DEFAULT_POLICY_CAP: u64 = 1_000_000;

/// Recurrent structure of a finite Markov chain.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChainAnalysis {
    pub recurrent_classes: Vec<Vec<usize>>,
    pub transient_states: Vec<usize>,
    /// Per class, aligned with the class's state list.
    pub stationary_dists: Vec<Vec<f64>>,
}

impl MarkovChainAnalysis {
    pub fn n_classes(&self) -> usize {
        self.recurrent_classes.len()
    }

    pub fn class_of(&self, s: usize) -> Option<usize> {
        self.recurrent_classes.iter().position(|c| c.contains(&s))
    }

    /// Recurrent states in increasing order.
    pub fn recurrent_states(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.recurrent_classes.iter().flatten().copied().collect();
        v.sort_unstable();
        v
    }

    /// `b[s][j]`: probability of absorption into class `j` from state `s`.
    pub fn absorption(&self, p: &DMatrix<f64>) -> Result<Vec<Vec<f64>>> {
        let n = p.nrows();
        let k = self.n_classes();
        let mut out = vec![vec![0.0; k]; n];
        for (j, c) in self.recurrent_classes.iter().enumerate() {
            for &s in c {
                out[s][j] = 1.0;
            }
        }
        let t = &self.transient_states;
        if t.is_empty() || k == 0 {
            return Ok(out);
        }
        let m = t.len();
        let mut a = DMatrix::identity(m, m);
        let mut b = DMatrix::zeros(m, k);
        for (i, &s) in t.iter().enumerate() {
            for (i2, &s2) in t.iter().enumerate() {
                a[(i, i2)] -= p[(s, s2)];
            }
            for (j, c) in self.recurrent_classes.iter().enumerate() {
                b[(i, j)] = c.iter().map(|&s2| p[(s, s2)]).sum();
            }
        }
        let x = linalg::solve(&a, &b)?;
        for (i, &s) in t.iter().enumerate() {
            for j in 0..k {
                out[s][j] = x[(i, j)];
            }
        }
        Ok(out)
    }
}

/// Strongly connected components of the digraph `adj` (iterative Tarjan).
/// Components come out in reverse topological order.
pub fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&(v, next)) = call.last() {
            if next < adj[v].len() {
                let w = adj[v][next];
                call.last_mut().unwrap().1 += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

fn positive_digraph(p: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = p.nrows();
    (0..n).map(|s| (0..n).filter(|&t| p[(s, t)] > 0.0).collect()).collect()
}

/// Closed SCCs of the positive-probability digraph, sorted by first state.
pub fn recurrent_classes(p: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let adj = positive_digraph(p);
    let comps = strongly_connected_components(&adj);
    let mut comp_of = vec![0; adj.len()];
    for (i, c) in comps.iter().enumerate() {
        for &s in c {
            comp_of[s] = i;
        }
    }
    let mut closed: Vec<Vec<usize>> = comps
        .iter()
        .enumerate()
        .filter(|(i, c)| c.iter().all(|&s| adj[s].iter().all(|&t| comp_of[t] == *i)))
        .map(|(_, c)| c.clone())
        .collect();
    closed.sort_by_key(|c| c[0]);
    closed
}

/// Recurrent classes, transient states and stationary distributions.
pub fn analyze_chain(p: &DMatrix<f64>) -> MarkovChainAnalysis {
    let n = p.nrows();
    let classes = recurrent_classes(p);
    let mut recurrent = vec![false; n];
    let mut dists = Vec::with_capacity(classes.len());
    for c in &classes {
        for &s in c {
            recurrent[s] = true;
        }
        let sub = DMatrix::from_fn(c.len(), c.len(), |i, j| p[(c[i], c[j])]);
        // closed irreducible blocks always have a unique stationary law
        let pi = linalg::stationary(&sub).expect("irreducible block has a stationary distribution");
        dists.push(pi);
    }
    MarkovChainAnalysis {
        recurrent_classes: classes,
        transient_states: (0..n).filter(|&s| !recurrent[s]).collect(),
        stationary_dists: dists,
    }
}

/// `P(s, s') = sum_a pi(a|s) p(s'|s, a)`.
pub fn policy_matrix(model: &Model, policy: &StationaryPolicy) -> DMatrix<f64> {
    let n = model.n_states();
    let mut p = DMatrix::zeros(n, n);
    for s in 0..n {
        for pair in model.layout().pairs(s) {
            let w = policy.prob(pair);
            if w == 0.0 {
                continue;
            }
            for o in model.outcomes(pair) {
                p[(s, o.next)] += w * o.prob;
            }
        }
    }
    p
}

pub fn deterministic_matrix(model: &Model, policy: &DeterministicPolicy) -> DMatrix<f64> {
    let n = model.n_states();
    let mut p = DMatrix::zeros(n, n);
    for s in 0..n {
        for o in model.outcomes(policy.pair(model.layout(), s)) {
            p[(s, o.next)] += o.prob;
        }
    }
    p
}

pub fn induce_chain(model: &Model, policy: &StationaryPolicy) -> MarkovChainAnalysis {
    analyze_chain(&policy_matrix(model, policy))
}

/// Communication structure of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Communication {
    Communicating,
    WeaklyCommunicating,
    /// Neither communicating nor weakly communicating.
    General,
}

/// Classification result. `unichain` is `None` when the check was skipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdpClass {
    pub communication: Communication,
    pub unichain: Option<bool>,
    /// The unique closed communicating class `S^o`, when weakly communicating.
    pub closed_class: Option<Vec<usize>>,
}

impl MdpClass {
    pub fn is_communicating(&self) -> bool {
        self.communication == Communication::Communicating
    }

    /// True for communicating models too.
    pub fn is_weakly_communicating(&self) -> bool {
        self.communication != Communication::General
    }

    pub fn is_unichain(&self) -> bool {
        self.unichain == Some(true)
    }

    pub fn is_multichain(&self) -> bool {
        self.unichain == Some(false)
    }
}

/// Communication structure without the unichain check; never fails.
///
/// `S^o` is the unique recurrent class of the all-positive policy. Outside
/// it, a state is recurrent under some policy iff it lies in a nonempty set
/// that some action choice keeps closed; the greatest such set is found by
/// pruning.
pub fn classify_structure(model: &Model) -> MdpClass {
    let uniform = StationaryPolicy::uniform(model.layout());
    let chain = induce_chain(model, &uniform);
    let n = model.n_states();
    if chain.n_classes() != 1 {
        return MdpClass { communication: Communication::General, unichain: None, closed_class: None };
    }
    let so = chain.recurrent_classes[0].clone();
    if so.len() == n {
        return MdpClass { communication: Communication::Communicating, unichain: None, closed_class: Some(so) };
    }
    let mut inside: Vec<bool> = (0..n).map(|s| !so.contains(&s)).collect();
    loop {
        let mut changed = false;
        for s in 0..n {
            if !inside[s] {
                continue;
            }
            let keeps = model
                .layout()
                .pairs(s)
                .any(|p| model.outcomes(p).iter().all(|o| o.prob == 0.0 || inside[o.next]));
            if !keeps {
                inside[s] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if inside.iter().any(|&b| b) {
        MdpClass { communication: Communication::General, unichain: None, closed_class: None }
    } else {
        MdpClass { communication: Communication::WeaklyCommunicating, unichain: None, closed_class: Some(so) }
    }
}

pub fn classify(model: &Model) -> Result<MdpClass> {
    classify_with_cap(model, DEFAULT_POLICY_CAP)
}

/// Full classification; the unichain property is decided by enumerating
/// deterministic policies when it is not settled structurally.
pub fn classify_with_cap(model: &Model, cap: u64) -> Result<MdpClass> {
    let mut c = classify_structure(model);
    if !c.is_weakly_communicating() {
        c.unichain = Some(false);
        return Ok(c);
    }
    let count = model.layout().policy_count();
    if count > cap as u128 {
        return Err(Error::CapExceeded { count, cap });
    }
    let multi = DeterministicPolicy::enumerate(model.layout())
        .any(|pi| recurrent_classes(&deterministic_matrix(model, &pi)).len() > 1);
    c.unichain = Some(!multi);
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;

    #[test]
    fn tarjan_on_cycle_and_tail() {
        let adj = vec![vec![1], vec![2], vec![1], vec![0]];
        let comps = strongly_connected_components(&adj);
        assert_eq!(comps.len(), 3);
        assert!(comps.contains(&vec![1, 2]));
    }

    #[test]
    fn identity_chain_has_singleton_classes() {
        let a = analyze_chain(&DMatrix::identity(3, 3));
        assert_eq!(a.recurrent_classes, vec![vec![0], vec![1], vec![2]]);
        assert!(a.transient_states.is_empty());
    }

    #[test]
    fn fig7a_always_solid_has_two_classes() {
        let m = examples::fig7a();
        let solid = m.action_index("solid").unwrap();
        let w: Vec<f64> = (0..2).map(|a| if a == solid { 1.0 } else { 0.0 }).collect();
        let pi = StationaryPolicy::from_action_weights(&m, &w).unwrap();
        let a = induce_chain(&m, &pi);
        assert_eq!(a.recurrent_classes, vec![vec![0], vec![1]]);
    }

    #[test]
    fn ex21b_uniform_policy_single_class() {
        let m = examples::ex2_1b();
        let a = induce_chain(&m, &StationaryPolicy::uniform(m.layout()));
        assert_eq!(a.recurrent_classes, vec![vec![0, 1]]);
    }

    #[test]
    fn bundled_classifications() {
        let a = classify(&examples::ex2_1a()).unwrap();
        assert!(a.is_unichain());
        let b = classify(&examples::ex2_1b()).unwrap();
        assert!(b.is_communicating() && b.is_multichain());
        let w = classify(&examples::fig7b()).unwrap();
        assert_eq!(w.communication, Communication::WeaklyCommunicating);
        assert_eq!(w.closed_class, Some(vec![1, 2]));
    }

    #[test]
    fn two_absorbing_states_are_not_weakly_communicating() {
        let mut b = crate::model::ModelBuilder::new("m", &["a", "b"], &["x"]);
        b.add(0, 0, 0, 0.0, 1.0).add(1, 0, 1, 0.0, 1.0);
        let c = classify(&b.build().unwrap()).unwrap();
        assert_eq!(c.communication, Communication::General);
    }

    #[test]
    fn cap_exceeded_is_reported() {
        let m = examples::ex2_1b();
        assert!(matches!(classify_with_cap(&m, 2), Err(Error::CapExceeded { count: 4, cap: 2 })));
    }
}
