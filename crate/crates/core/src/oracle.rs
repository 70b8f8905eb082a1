//! Hand-encoded solution sets of the bundled examples and sup-norm
//! distances to them.
//!
//! Every solution set `Q` is invariant under shifts along `1`, and the
//! constrained slice `Q_s = {q in Q : f(q) = r*}` meets each shift line
//! once. Distances to `Q` therefore reduce to `min_m span(q - m) / 2` over
//! members `m` of `Q_s`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::examples;
use crate::linalg::{dist_mod_constant, max_dist};
use crate::model::Model;
use crate::reference::FFunction;
use crate::solvers;

/// Verification tolerance for oracle members.
pub const MEMBER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleKind {
    /// `Q = { base + c 1 }`.
    ParamLine { base: Vec<f64> },
    /// Two-state swap region over the pairs `[(1,s), (1,d), (2,s), (2,d)]`:
    /// `|q(1,s) - q(2,s)| <= kappa`, `q(1,d) = q(2,s) - kappa`,
    /// `q(2,d) = q(1,s) - kappa`.
    IneqRegion { pairs: [usize; 4], kappa: f64 },
    /// Finite sample of `Q_s`; distances are upper bounds at `resolution`.
    ExplicitList { members: Vec<Vec<f64>>, resolution: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSetOracle {
    pub kind: OracleKind,
    pub f: FFunction,
    pub r_star: f64,
    dim: usize,
    /// Components of a larger iterate this oracle describes.
    components: Option<Vec<usize>>,
}

/// Grid size used for constrained distances to an [`OracleKind::IneqRegion`].
const REGION_GRID: usize = 20_000;

impl SolutionSetOracle {
    /// Builds the oracle and checks members against `model` at `r_star`.
    pub fn new(kind: OracleKind, model: &Model, f: FFunction, r_star: f64) -> Result<Self> {
        let dim = model.n_pairs();
        f.validate(dim)?;
        let o = SolutionSetOracle { kind, f, r_star, dim, components: None };
        for m in o.verification_points() {
            let res = solvers::optimality_residual(model, &m, r_star);
            if res > MEMBER_TOL {
                return Err(Error::InvalidOracle(format!("member residual {res:e}")));
            }
            let fg = (o.f.eval(&m) - r_star).abs();
            if fg > MEMBER_TOL {
                return Err(Error::InvalidOracle(format!("member misses f(q) = r* by {fg:e}")));
            }
        }
        Ok(o)
    }

    /// Applies the oracle to the listed components of a larger vector.
    pub fn embedded(mut self, components: Vec<usize>) -> Self {
        self.components = Some(components);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn restrict(&self, q: &[f64]) -> Vec<f64> {
        match &self.components {
            Some(c) => c.iter().map(|&i| q[i]).collect(),
            None => q.to_vec(),
        }
    }

    /// Shifts `m` along `1` onto `f = r*`.
    pub fn project(&self, m: &[f64]) -> Vec<f64> {
        let c = (self.r_star - self.f.eval(m)) / self.f.u();
        m.iter().map(|v| v + c).collect()
    }

    fn region_point(&self, pairs: &[usize; 4], kappa: f64, d: f64) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        m[pairs[0]] = d;
        m[pairs[1]] = -kappa;
        m[pairs[2]] = 0.0;
        m[pairs[3]] = d - kappa;
        self.project(&m)
    }

    fn verification_points(&self) -> Vec<Vec<f64>> {
        match &self.kind {
            OracleKind::ParamLine { base } => vec![self.project(base)],
            OracleKind::IneqRegion { pairs, kappa } => {
                (0..=100).map(|k| self.region_point(pairs, *kappa, -kappa + 2.0 * kappa * k as f64 / 100.0)).collect()
            }
            OracleKind::ExplicitList { members, .. } => members.clone(),
        }
    }

    /// Members of `Q_s`: the single point of a line, `count` uniform draws
    /// from a region, or the stored list.
    pub fn members<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
        match &self.kind {
            OracleKind::ParamLine { base } => vec![self.project(base)],
            OracleKind::IneqRegion { pairs, kappa } => {
                (0..count).map(|_| self.region_point(pairs, *kappa, rng.random_range(-*kappa..=*kappa))).collect()
            }
            OracleKind::ExplicitList { members, .. } => members.clone(),
        }
    }

    /// Sup-norm distance of `q` to `Q` (or to `Q_s` when `constrained`).
    pub fn distance(&self, q: &[f64], constrained: bool) -> f64 {
        let q = self.restrict(q);
        match (&self.kind, constrained) {
            (OracleKind::ParamLine { base }, false) => dist_mod_constant(&q, base),
            (OracleKind::ParamLine { base }, true) => max_dist(&q, &self.project(base)),
            (OracleKind::IneqRegion { pairs, kappa }, false) => {
                let [a, b, c, e] = pairs.map(|i| q[i]);
                let k = *kappa;
                let (hi_a, lo_a) = (a.max(e + k), a.min(e + k));
                let (hi_b, lo_b) = (c.max(b + k), c.min(b + k));
                [0.0, (a - e - k).abs() / 2.0, (c - b - k).abs() / 2.0, (hi_a - lo_b - k) / 2.0, (hi_b - lo_a - k) / 2.0]
                    .into_iter()
                    .fold(0.0, f64::max)
            }
            (OracleKind::IneqRegion { pairs, kappa }, true) => (0..=REGION_GRID)
                .map(|k| {
                    let d = -kappa + 2.0 * kappa * k as f64 / REGION_GRID as f64;
                    max_dist(&q, &self.region_point(pairs, *kappa, d))
                })
                .fold(f64::INFINITY, f64::min),
            (OracleKind::ExplicitList { members, .. }, false) => {
                members.iter().map(|m| dist_mod_constant(&q, m)).fold(f64::INFINITY, f64::min)
            }
            (OracleKind::ExplicitList { members, .. }, true) => {
                members.iter().map(|m| max_dist(&q, m)).fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Additive slack of [`distance`](Self::distance) from sampling.
    pub fn resolution(&self, constrained: bool) -> f64 {
        match (&self.kind, constrained) {
            (OracleKind::ExplicitList { resolution, .. }, _) => *resolution,
            (OracleKind::IneqRegion { kappa, .. }, true) => 2.0 * kappa / REGION_GRID as f64,
            _ => 0.0,
        }
    }
}

fn pairs4(m: &Model) -> [usize; 4] {
    [
        m.pair_by_name("1", "solid").unwrap(),
        m.pair_by_name("1", "dashed").unwrap(),
        m.pair_by_name("2", "solid").unwrap(),
        m.pair_by_name("2", "dashed").unwrap(),
    ]
}

/// `q = (q(1,d), q(2,s), q(2,d)) = (c - 1, c, c - 2)`, `r* = 1`.
pub fn ex2_1a_oracle(f: FFunction) -> Result<SolutionSetOracle> {
    SolutionSetOracle::new(OracleKind::ParamLine { base: vec![-1.0, 0.0, -2.0] }, &examples::ex2_1a(), f, 1.0)
}

/// `q = (c - 1, c, c, c)` over `(1,s), (1,d), (2,s), (2,d)`, `r* = 0`.
pub fn ex2_1b_oracle(f: FFunction) -> Result<SolutionSetOracle> {
    SolutionSetOracle::new(OracleKind::ParamLine { base: vec![-1.0, 0.0, 0.0, 0.0] }, &examples::ex2_1b(), f, 0.0)
}

/// Swap region with `kappa = 1`, `r* = 1`; also the solution set of the
/// communicating two-state model `fig7a`.
pub fn ex2_1c_oracle(f: FFunction) -> Result<SolutionSetOracle> {
    let m = examples::ex2_1c();
    SolutionSetOracle::new(OracleKind::IneqRegion { pairs: pairs4(&m), kappa: 1.0 }, &m, f, 1.0)
}

pub fn fig7a_oracle(f: FFunction) -> Result<SolutionSetOracle> {
    let m = examples::fig7a();
    SolutionSetOracle::new(OracleKind::IneqRegion { pairs: pairs4(&m), kappa: 1.0 }, &m, f, 1.0)
}

/// Action values of `ex5_1` from state values `v`.
pub fn ex5_1_q_from_v(v: &[f64; 3]) -> Vec<f64> {
    vec![v[0], v[1] - 2.0, v[1], v[2], v[1] - 1.0, v[0]]
}

/// `V = { v2 - 2 <= v1 <= v2, v3 = max(v1, v2 - 1) }`, sampled along
/// `d = v1 - v2` in `[-2, 0]` at step `resolution`, `r* = 0`.
pub fn ex5_1_oracle(f: FFunction, resolution: f64) -> Result<SolutionSetOracle> {
    let steps = libm::ceil(2.0 / resolution) as usize;
    let f2 = f.clone();
    let members = (0..=steps)
        .map(|k| {
            let d = -2.0 + 2.0 * k as f64 / steps as f64;
            let q = ex5_1_q_from_v(&[d, 0.0, d.max(-1.0)]);
            let c = -f2.eval(&q) / f2.u();
            q.iter().map(|x| x + c).collect()
        })
        .collect();
    SolutionSetOracle::new(
        OracleKind::ExplicitList { members, resolution: 2.0 / steps as f64 },
        &examples::ex5_1(),
        f,
        0.0,
    )
}
