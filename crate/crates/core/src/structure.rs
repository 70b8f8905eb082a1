//! Recurrence structure of optimal policies and the empirical dimension of
//! the constrained solution set.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::Rng;

use crate::chain::{self, DEFAULT_POLICY_CAP};
use crate::error::{Error, Result};
use crate::linalg::{max_dist, rank};
use crate::model::{Model, StationaryPolicy};
use crate::oracle::SolutionSetOracle;
use crate::solvers;

#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    /// States recurrent under some optimal deterministic policy.
    pub r_star: Vec<usize>,
    pub n_star: usize,
    /// Recurrent classes of the canonical optimal policy; a partition of `r_star`.
    pub classes: Vec<Vec<usize>>,
    /// `k_star[s]`: actions (local indices) chosen at `s` by some optimal
    /// deterministic policy with `s` recurrent. Empty off `r_star`.
    pub k_star: Vec<Vec<usize>>,
    pub r_opt: f64,
    pub n_optimal_policies: usize,
}

impl StructureReport {
    pub fn in_r_star(&self, s: usize) -> bool {
        self.r_star.contains(&s)
    }
}

pub fn compute_structure(model: &Model) -> Result<StructureReport> {
    compute_structure_with_cap(model, DEFAULT_POLICY_CAP)
}

pub fn compute_structure_with_cap(model: &Model, cap: u64) -> Result<StructureReport> {
    if !chain::classify_structure(model).is_weakly_communicating() {
        return Err(Error::NotWeaklyCommunicating);
    }
    let gain = solvers::optimal_gain_with_cap(model, cap)?;
    let n = model.n_states();
    let layout = model.layout();
    let mut k_star = vec![Vec::new(); n];
    for pi in &gain.optimal_det_policies {
        let rec = chain::recurrent_classes(&chain::deterministic_matrix(model, pi));
        for s in rec.into_iter().flatten() {
            let a = pi.choices()[s];
            if !k_star[s].contains(&a) {
                k_star[s].push(a);
            }
        }
    }
    for k in &mut k_star {
        k.sort_unstable();
    }
    let r_star: Vec<usize> = (0..n).filter(|&s| !k_star[s].is_empty()).collect();

    let mut probs = vec![0.0; layout.n_pairs()];
    for s in 0..n {
        let range = layout.pairs(s);
        if k_star[s].is_empty() {
            let w = 1.0 / range.len() as f64;
            range.for_each(|p| probs[p] = w);
        } else {
            let w = 1.0 / k_star[s].len() as f64;
            for &a in &k_star[s] {
                probs[range.start + a] = w;
            }
        }
    }
    let canonical = StationaryPolicy::new(layout, probs)?;
    let classes = chain::induce_chain(model, &canonical).recurrent_classes;
    let covered: usize = classes.iter().map(Vec::len).sum();
    if covered != r_star.len() || !classes.iter().flatten().all(|s| r_star.contains(s)) {
        return Err(Error::InvalidParameter("canonical optimal policy does not recur on R*".into()));
    }
    Ok(StructureReport {
        n_star: classes.len(),
        classes,
        k_star,
        r_star,
        r_opt: gain.r_star,
        n_optimal_policies: gain.optimal_det_policies.len(),
    })
}

/// Relative singular-value cutoff used by [`verify_dimension_claim`].
pub const DIM_RANK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionReport {
    pub expected: usize,
    /// Most frequent local rank.
    pub estimated: usize,
    pub local_ranks: Vec<usize>,
    pub samples: usize,
    pub neighbours: usize,
    pub rank_tol: f64,
    /// Largest norm of a sampled member of `Q_s`.
    pub max_member_norm: f64,
}

impl DimensionReport {
    pub fn passed(&self) -> bool {
        self.estimated == self.expected
    }
}

/// Estimates the local dimension of `Q_s` from oracle members: at each
/// member, the rank of the differences to its nearest neighbours.
pub fn verify_dimension_claim<R: Rng + ?Sized>(
    structure: &StructureReport,
    oracle: &SolutionSetOracle,
    samples: usize,
    rng: &mut R,
) -> DimensionReport {
    let members = oracle.members(samples, rng);
    let k = members.len().saturating_sub(1).min(6);
    let dim = oracle.dim();
    let mut local_ranks = Vec::with_capacity(members.len());
    for (i, m) in members.iter().enumerate() {
        if k == 0 {
            local_ranks.push(0);
            continue;
        }
        let mut d: Vec<(f64, usize)> =
            members.iter().enumerate().filter(|(j, _)| *j != i).map(|(j, x)| (max_dist(m, x), j)).collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0));
        let diffs = DMatrix::from_fn(dim, k, |r, c| members[d[c].1][r] - m[r]);
        local_ranks.push(rank(&diffs, DIM_RANK_TOL));
    }
    let mut freq = vec![0usize; dim + 1];
    for &r in &local_ranks {
        freq[r] += 1;
    }
    let estimated = (0..=dim).max_by_key(|&r| (freq[r], core::cmp::Reverse(r))).unwrap_or(0);
    DimensionReport {
        expected: structure.n_star - 1,
        estimated,
        local_ranks,
        samples: members.len(),
        neighbours: k,
        rank_tol: DIM_RANK_TOL,
        max_member_norm: members.iter().flatten().fold(0.0, |a, v| a.max(v.abs())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;

    #[test]
    fn n_star_of_bundled_examples() {
        assert_eq!(compute_structure(&examples::ex2_1a()).unwrap().n_star, 1);
        assert_eq!(compute_structure(&examples::ex2_1b()).unwrap().n_star, 1);
        let c = compute_structure(&examples::ex2_1c()).unwrap();
        assert_eq!(c.n_star, 2);
        assert_eq!(c.classes, vec![vec![0], vec![1]]);
        assert_eq!(c.k_star, vec![vec![0], vec![0]]);
        assert_eq!(compute_structure(&examples::ex5_1()).unwrap().n_star, 2);
    }

    #[test]
    fn zero_reward_gives_closed_class() {
        let m = examples::fig7b().with_zero_rewards();
        let r = compute_structure(&m).unwrap();
        assert_eq!(r.n_star, 1);
        assert_eq!(r.r_star, chain::classify_structure(&m).closed_class.unwrap());
    }

    #[test]
    fn non_wc_is_rejected() {
        let mut b = crate::model::ModelBuilder::new("two-loops", &["a", "b"], &["x"]);
        b.add(0, 0, 0, 0.0, 1.0).add(1, 0, 1, 0.0, 1.0);
        let m = b.build().unwrap();
        assert_eq!(compute_structure(&m), Err(Error::NotWeaklyCommunicating));
    }
}
