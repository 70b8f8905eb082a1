//! Reference functions `f` subtracted by RVI Q-learning.
//!
//! Every kind is Lipschitz in the max-norm, satisfies
//! `f(x + c 1) = f(x) + c u` for some `u > 0`, and is positively homogeneous
//! about `f(0)`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum FFunction {
    /// `nu . x + bias`.
    Linear { weights: Vec<f64>, bias: f64 },
    /// `scale * max_i x_i + bias`.
    MaxBased { scale: f64, bias: f64 },
    /// `coeff * x[index] + bias`.
    ComponentRef { index: usize, coeff: f64, bias: f64 },
    /// `eta (sum x - q0_sum) + rbar0`, the implicit rate of Differential Q-learning.
    DifferentialQ { eta: f64, q0_sum: f64, rbar0: f64, dim: usize },
}

impl FFunction {
    /// Mean of all components.
    pub fn mean(dim: usize) -> Self {
        FFunction::Linear { weights: vec![1.0 / dim as f64; dim], bias: 0.0 }
    }

    /// Sum of all components plus `bias`.
    pub fn sum(dim: usize, bias: f64) -> Self {
        FFunction::Linear { weights: vec![1.0; dim], bias }
    }

    pub fn component(index: usize) -> Self {
        FFunction::ComponentRef { index, coeff: 1.0, bias: 0.0 }
    }

    pub fn differential(eta: f64, q0: &[f64], rbar0: f64) -> Self {
        FFunction::DifferentialQ { eta, q0_sum: q0.iter().sum(), rbar0, dim: q0.len() }
    }

    /// Checks parameters against the contract (`u > 0`, finite values).
    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        match self {
            FFunction::Linear { weights, bias } => {
                if weights.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: weights.len() });
                }
                if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
                    return bad("non-finite linear weights");
                }
            }
            FFunction::MaxBased { scale, bias } => {
                if !(*scale > 0.0) || !bias.is_finite() {
                    return bad("max-based f needs scale > 0");
                }
            }
            FFunction::ComponentRef { index, coeff, bias } => {
                if *index >= dim {
                    return Err(Error::IndexOutOfRange { what: "pairs", index: *index, len: dim });
                }
                if !(*coeff > 0.0) || !bias.is_finite() {
                    return bad("component f needs coeff > 0");
                }
            }
            FFunction::DifferentialQ { eta, dim: d, .. } => {
                if *d != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: *d });
                }
                if !(*eta > 0.0) {
                    return bad("differential f needs eta > 0");
                }
            }
        }
        if !(self.u() > 0.0) {
            return bad("f(x + c1) - f(x) = c u needs u > 0");
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            FFunction::Linear { weights, bias } => weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + bias,
            FFunction::MaxBased { scale, bias } => scale * x.iter().copied().fold(f64::NEG_INFINITY, f64::max) + bias,
            FFunction::ComponentRef { index, coeff, bias } => coeff * x[*index] + bias,
            FFunction::DifferentialQ { eta, q0_sum, rbar0, .. } => eta * (x.iter().sum::<f64>() - q0_sum) + rbar0,
        }
    }

    /// The shift constant `u`.
    pub fn u(&self) -> f64 {
        match self {
            FFunction::Linear { weights, .. } => weights.iter().sum(),
            FFunction::MaxBased { scale, .. } => *scale,
            FFunction::ComponentRef { coeff, .. } => *coeff,
            FFunction::DifferentialQ { eta, dim, .. } => eta * *dim as f64,
        }
    }

    /// A max-norm Lipschitz constant.
    pub fn lipschitz(&self) -> f64 {
        match self {
            FFunction::Linear { weights, .. } => weights.iter().map(|w| w.abs()).sum(),
            FFunction::MaxBased { scale, .. } => *scale,
            FFunction::ComponentRef { coeff, .. } => *coeff,
            FFunction::DifferentialQ { eta, dim, .. } => eta * *dim as f64,
        }
    }
}

/// Outcome of [`ffunction_property_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct FPropertyReport {
    pub u: f64,
    pub lipschitz: f64,
    /// Largest `|f(x) - f(y)| - L ||x - y||` seen (nonpositive when fine).
    pub worst_lipschitz_excess: f64,
    pub worst_shift_error: f64,
    pub worst_homogeneity_error: f64,
    pub tolerance: f64,
}

impl FPropertyReport {
    pub fn lipschitz_ok(&self) -> bool {
        self.worst_lipschitz_excess <= self.tolerance
    }

    pub fn shift_ok(&self) -> bool {
        self.worst_shift_error <= self.tolerance
    }

    pub fn homogeneity_ok(&self) -> bool {
        self.worst_homogeneity_error <= self.tolerance
    }

    pub fn passed(&self) -> bool {
        self.u > 0.0 && self.lipschitz_ok() && self.shift_ok() && self.homogeneity_ok()
    }
}

/// Randomized audit of the reference-function contract on `dim`-vectors
/// with entries in `[-10, 10]`; errors are relative to `1 + |value|`.
pub fn ffunction_property_check<R: Rng + ?Sized>(f: &FFunction, dim: usize, trials: usize, rng: &mut R) -> FPropertyReport {
    let tol = 1e-9;
    let u = f.u();
    let lip = f.lipschitz();
    let f0 = f.eval(&vec![0.0; dim]);
    let mut rep = FPropertyReport {
        u,
        lipschitz: lip,
        worst_lipschitz_excess: f64::NEG_INFINITY,
        worst_shift_error: 0.0,
        worst_homogeneity_error: 0.0,
        tolerance: tol,
    };
    let draw = |rng: &mut R| -> Vec<f64> { (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect() };
    for _ in 0..trials {
        let x = draw(rng);
        let y = draw(rng);
        let fx = f.eval(&x);
        let fy = f.eval(&y);
        let excess = (fx - fy).abs() - lip * crate::linalg::max_dist(&x, &y);
        rep.worst_lipschitz_excess = rep.worst_lipschitz_excess.max(excess / (1.0 + fx.abs()));

        let c: f64 = rng.random_range(-10.0..10.0);
        let xs: Vec<f64> = x.iter().map(|v| v + c).collect();
        let shift = (f.eval(&xs) - fx - c * u).abs() / (1.0 + fx.abs() + (c * u).abs());
        rep.worst_shift_error = rep.worst_shift_error.max(shift);

        let k: f64 = rng.random_range(0.0..10.0);
        let xk: Vec<f64> = x.iter().map(|v| v * k).collect();
        let hom = (f.eval(&xk) - f0 - k * (fx - f0)).abs() / (1.0 + (k * (fx - f0)).abs());
        rep.worst_homogeneity_error = rep.worst_homogeneity_error.max(hom);
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn all_kinds(dim: usize) -> Vec<FFunction> {
        vec![
            FFunction::Linear { weights: vec![1.0; dim], bias: -12.0 },
            FFunction::MaxBased { scale: 2.0, bias: 0.0 },
            FFunction::ComponentRef { index: 1, coeff: 3.0, bias: 0.5 },
            FFunction::differential(1.0, &vec![1.0; dim], 0.0),
        ]
    }

    #[test]
    fn u_values() {
        let k = all_kinds(6);
        assert_eq!(k[0].u(), 6.0);
        assert_eq!(k[1].u(), 2.0);
        assert_eq!(k[2].u(), 3.0);
        assert_eq!(k[3].u(), 6.0);
    }

    #[test]
    fn property_check_passes_for_every_kind() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for f in all_kinds(5) {
            assert!(f.validate(5).is_ok());
            let rep = ffunction_property_check(&f, 5, 500, &mut rng);
            assert!(rep.passed(), "{f:?}: {rep:?}");
        }
    }

    #[test]
    fn property_check_flags_a_nonhomogeneous_function() {
        // ComponentRef with zero coefficient violates u > 0
        let f = FFunction::ComponentRef { index: 0, coeff: 0.0, bias: 0.0 };
        assert!(f.validate(2).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(!ffunction_property_check(&f, 2, 10, &mut rng).passed());
    }

    #[test]
    fn differential_f_on_fig7_initial_values() {
        let q0 = [0.0, 0.0, 4.0, 4.0, 2.0, 2.0];
        let f = FFunction::differential(1.0, &q0, 0.0);
        assert_eq!(f.eval(&[0.0; 6]), -12.0);
        assert_eq!(f.eval(&q0), 0.0);
    }
}
