//! Mean-field ODEs of the abstract RVI iteration
//! `r(i) - rbar + g(q)(i) - q(i) = 0` and numerical checks of their
//! stability properties.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{max_dist, max_norm, span};
use crate::model::{Model, TabularQ};
use crate::options::{InducedSmdpQuantities, IntraForm, OptionSet};
use crate::reference::FFunction;
use crate::solvers::{self, ExpectedQuantities};

/// The nonexpansive operator `g`.
#[derive(Debug, Clone, PartialEq)]
pub enum GOperator {
    /// `g(q)(s,a) = sum p max q`.
    Mdp(ExpectedQuantities),
    /// `g(q)(s,o) = (1/l̂) sum p̂ max q + (1 - 1/l̂) q(s,o)`.
    InterOption(ExpectedQuantities),
    /// `g(q)(s,o) = sum_a pi sum_s' p U[q](s',o)`.
    IntraOption(IntraForm),
}

impl GOperator {
    pub fn apply(&self, q: &[f64], out: &mut [f64]) {
        match self {
            GOperator::Mdp(eq) => eq.g(q, out),
            GOperator::InterOption(eq) => {
                eq.g(q, out);
                for i in 0..out.len() {
                    let l = eq.l_sa[i];
                    out[i] = out[i] / l + (1.0 - 1.0 / l) * q[i];
                }
            }
            GOperator::IntraOption(form) => form.g(q, out),
        }
    }

    /// Convexity weights `1 - 1/l̂` of the inter-option form (empty otherwise).
    pub fn self_weights(&self) -> Vec<f64> {
        match self {
            GOperator::InterOption(eq) => eq.l_sa.iter().map(|l| 1.0 - 1.0 / l).collect(),
            _ => Vec::new(),
        }
    }
}

/// Configuration `(r, g, f, r_#)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AbstractRvi {
    pub r: Vec<f64>,
    pub g: GOperator,
    pub f: FFunction,
    pub r_sharp: f64,
}

/// Which vector field to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    /// `h(q) = r - f(q) 1 + g(q) - q`.
    H,
    /// `h'(q) = r - r_# 1 + g(q) - q`.
    HPrime,
    /// `h_inf(q) = f(0) 1 - f(q) 1 + g(q) - q`.
    HInf,
}

impl AbstractRvi {
    /// MDP form; `r_sharp` must come from the optimal-gain oracle.
    pub fn mdp(model: &Model, f: FFunction, r_sharp: f64) -> Self {
        let eq = solvers::expected_quantities(model);
        AbstractRvi { r: eq.r_sa.clone(), g: GOperator::Mdp(eq), f, r_sharp }
    }

    /// Scaled SMDP form of the inter-option algorithm.
    pub fn inter_option(quant: &InducedSmdpQuantities, f: FFunction, r_sharp: f64) -> Self {
        let eq = quant.to_expected();
        let r = eq.r_sa.iter().zip(&eq.l_sa).map(|(r, l)| r / l).collect();
        AbstractRvi { r, g: GOperator::InterOption(eq), f, r_sharp }
    }

    /// Intra-option form.
    pub fn intra_option(model: &Model, opts: &OptionSet, f: FFunction, r_sharp: f64) -> Self {
        let form = IntraForm::new(model, opts);
        AbstractRvi { r: form.r.clone(), g: GOperator::IntraOption(form), f, r_sharp }
    }

    /// Same operator with `r = 0`, `r_# = 0` and the bias of `f` removed, so
    /// that `h` coincides with `h_inf`.
    pub fn zero_reward(&self) -> Self {
        let f = match &self.f {
            FFunction::Linear { weights, .. } => FFunction::Linear { weights: weights.clone(), bias: 0.0 },
            FFunction::MaxBased { scale, .. } => FFunction::MaxBased { scale: *scale, bias: 0.0 },
            FFunction::ComponentRef { index, coeff, .. } => FFunction::ComponentRef { index: *index, coeff: *coeff, bias: 0.0 },
            FFunction::DifferentialQ { eta, dim, .. } => FFunction::DifferentialQ { eta: *eta, q0_sum: 0.0, rbar0: 0.0, dim: *dim },
        };
        AbstractRvi { r: vec![0.0; self.r.len()], g: self.g.clone(), f, r_sharp: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.r.len()
    }

    pub fn eval(&self, field: Field, q: &[f64], out: &mut [f64]) {
        self.g.apply(q, out);
        let shift = match field {
            Field::H => self.f.eval(q),
            Field::HPrime => self.r_sharp,
            Field::HInf => self.f.eval(q) - self.f.eval(&vec![0.0; q.len()]),
        };
        let r_on = !matches!(field, Field::HInf);
        for i in 0..out.len() {
            let r = if r_on { self.r[i] } else { 0.0 };
            out[i] = r - shift + out[i] - q[i];
        }
    }

    /// `max |r - r_# + g(q) - q|`: zero iff `q` solves the optimality equation.
    pub fn residual(&self, q: &[f64]) -> f64 {
        let mut out = vec![0.0; q.len()];
        self.eval(Field::HPrime, q, &mut out);
        max_norm(&out)
    }

    /// Synchronous damped iteration `q += alpha h(q)` (explicit Euler on h).
    pub fn iterate(&self, alpha: f64, q0: &[f64], tol: f64, max_iter: usize) -> (Vec<f64>, bool) {
        let mut q = q0.to_vec();
        let mut h = vec![0.0; q.len()];
        for _ in 0..max_iter {
            self.eval(Field::H, &q, &mut h);
            for (x, d) in q.iter_mut().zip(&h) {
                *x += alpha * d;
            }
            if max_norm(&h) * alpha <= tol {
                return (q, true);
            }
        }
        (q, false)
    }
}

/// Fixed-step RK4 trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub dt: f64,
    pub scheme: &'static str,
}

impl OdeTrajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectory has the initial state")
    }
}

/// Integrates `x' = field(x)` with classical RK4 on `[0, t_end]`.
pub fn integrate<F: Fn(&[f64], &mut [f64])>(field: F, x0: &[f64], t_end: f64, dt: f64) -> Result<OdeTrajectory> {
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidParameter("integration needs dt > 0 and t_end >= 0".into()));
    }
    let steps = libm::round(t_end / dt) as usize;
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(x.clone());
    for k in 0..steps {
        field(&x, &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * dt * k1[i];
        }
        field(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * dt * k2[i];
        }
        field(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + dt * k3[i];
        }
        field(&tmp, &mut k4);
        for i in 0..n {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t = (k + 1) as f64 * dt;
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteState { time: t });
        }
        times.push(t);
        states.push(x.clone());
    }
    Ok(OdeTrajectory { times, states, dt, scheme: "rk4" })
}

impl AbstractRvi {
    pub fn integrate(&self, field: Field, x0: &[f64], t_end: f64, dt: f64) -> Result<OdeTrajectory> {
        integrate(|x, out| self.eval(field, x, out), x0, t_end, dt)
    }
}

/// Outcome of [`check_shift_lemma`].
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftLemmaReport {
    /// `max_t span(x(t) - y(t))`.
    pub max_gap_span: f64,
    /// `max_t |gap(t) - z(t)|` with `z` integrated alongside `y`.
    pub max_z_error: f64,
    pub final_gap: f64,
    pub final_z: f64,
    pub span_tol: f64,
    pub z_tol: f64,
}

impl ShiftLemmaReport {
    pub fn passed(&self) -> bool {
        self.max_gap_span <= self.span_tol && self.max_z_error <= self.z_tol
    }
}

/// Integrates `h` and `h'` from `x0` and compares `x(t) - y(t)` with
/// `z(t) = int_0^t exp(u (tau - t)) (r_# - f(y(tau))) dtau`. `z` is carried
/// along with `y` as the solution of `z' = -u z + r_# - f(y)`.
pub fn check_shift_lemma(cfg: &AbstractRvi, x0: &[f64], t_end: f64, dt: f64) -> Result<ShiftLemmaReport> {
    let d = x0.len();
    let u = cfg.f.u();
    let x = cfg.integrate(Field::H, x0, t_end, dt)?;
    let mut yz0 = x0.to_vec();
    yz0.push(0.0);
    let yz = integrate(
        |v, out| {
            cfg.eval(Field::HPrime, &v[..d], &mut out[..d]);
            out[d] = -u * v[d] + cfg.r_sharp - cfg.f.eval(&v[..d]);
        },
        &yz0,
        t_end,
        dt,
    )?;
    let mut rep = ShiftLemmaReport {
        max_gap_span: 0.0,
        max_z_error: 0.0,
        final_gap: 0.0,
        final_z: 0.0,
        span_tol: 1e-6,
        z_tol: 1e-5,
    };
    let mut diff = vec![0.0; d];
    for (xs, ys) in x.states.iter().zip(&yz.states) {
        for i in 0..d {
            diff[i] = xs[i] - ys[i];
        }
        let gap = diff.iter().sum::<f64>() / d as f64;
        rep.max_gap_span = rep.max_gap_span.max(span(&diff));
        rep.max_z_error = rep.max_z_error.max((gap - ys[d]).abs());
        rep.final_gap = gap;
        rep.final_z = ys[d];
    }
    Ok(rep)
}

/// Outcome of [`check_lyapunov`] for one start.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovReport {
    /// Largest increase of `||y(t) - q*||` between grid points.
    pub max_increase: f64,
    /// `max_t ||x(t) - q*||` over the bound `(1 + L) ||x0 - q*||`.
    pub bound_ratio: f64,
    pub increase_tol: f64,
}

impl LyapunovReport {
    pub fn passed(&self) -> bool {
        self.max_increase <= self.increase_tol && self.bound_ratio <= 1.0 + 1e-12
    }
}

/// Distance to `q_star` along `h'` must be nonincreasing and along `h`
/// bounded by `(1 + L) ||x0 - q*||`. `q_star` must solve the optimality
/// equation with `f(q_star) = r_#`.
pub fn check_lyapunov(cfg: &AbstractRvi, x0: &[f64], q_star: &[f64], t_end: f64, dt: f64) -> Result<LyapunovReport> {
    let res = cfg.residual(q_star);
    let fgap = (cfg.f.eval(q_star) - cfg.r_sharp).abs();
    if res > 1e-10 || fgap > 1e-10 {
        return Err(Error::InvalidParameter(alloc::format!(
            "q_star is not in the constrained solution set (residual {res:e}, |f - r| {fgap:e})"
        )));
    }
    let y = cfg.integrate(Field::HPrime, x0, t_end, dt)?;
    let x = cfg.integrate(Field::H, x0, t_end, dt)?;
    let mut max_increase: f64 = 0.0;
    let mut prev = max_dist(&y.states[0], q_star);
    for s in &y.states[1..] {
        let d = max_dist(s, q_star);
        max_increase = max_increase.max(d - prev);
        prev = d;
    }
    let d0 = max_dist(x0, q_star);
    let bound = (1.0 + cfg.f.lipschitz()) * d0;
    let worst = x.states.iter().map(|s| max_dist(s, q_star)).fold(0.0, f64::max);
    let bound_ratio = if bound == 0.0 { if worst == 0.0 { 0.0 } else { f64::INFINITY } } else { worst / bound };
    Ok(LyapunovReport { max_increase, bound_ratio, increase_tol: 1e-7 })
}

/// Random probes of `||g(x) - g(y)|| <= ||x - y||`, shift and positive
/// homogeneity. Returns the worst violation of each.
pub fn probe_g<R: Rng + ?Sized>(g: &GOperator, dim: usize, trials: usize, rng: &mut R) -> (f64, f64, f64) {
    let (mut ne, mut sh, mut ho) = (f64::NEG_INFINITY, 0.0f64, 0.0f64);
    let (mut gx, mut gy) = (vec![0.0; dim], vec![0.0; dim]);
    for _ in 0..trials {
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect();
        let y: Vec<f64> = (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect();
        g.apply(&x, &mut gx);
        g.apply(&y, &mut gy);
        ne = ne.max(max_dist(&gx, &gy) - max_dist(&x, &y));
        let c: f64 = rng.random_range(-10.0..10.0);
        let xs: Vec<f64> = x.iter().map(|v| v + c).collect();
        g.apply(&xs, &mut gy);
        sh = sh.max((0..dim).map(|i| (gy[i] - gx[i] - c).abs()).fold(0.0, f64::max));
        let k: f64 = rng.random_range(0.0..10.0);
        let xk: Vec<f64> = x.iter().map(|v| v * k).collect();
        g.apply(&xk, &mut gy);
        ho = ho.max((0..dim).map(|i| (gy[i] - k * gx[i]).abs()).fold(0.0, f64::max));
    }
    (ne, sh, ho)
}

/// `max_i |h(c q)/c - h_inf(q)|` for each scale `c`.
pub fn scaling_defects(cfg: &AbstractRvi, q: &[f64], scales: &[f64]) -> Vec<f64> {
    let mut hinf = vec![0.0; q.len()];
    cfg.eval(Field::HInf, q, &mut hinf);
    let mut h = vec![0.0; q.len()];
    scales
        .iter()
        .map(|&c| {
            let cq: Vec<f64> = q.iter().map(|v| c * v).collect();
            cfg.eval(Field::H, &cq, &mut h);
            (0..q.len()).map(|i| (h[i] / c - hinf[i]).abs()).fold(0.0, f64::max)
        })
        .collect()
}

/// A point of the constrained solution set reached by damped iteration.
pub fn solve_constrained(cfg: &AbstractRvi, q0: &TabularQ) -> Option<Vec<f64>> {
    let (q, ok) = cfg.iterate(0.5 / (1.0 + cfg.f.lipschitz()), q0.as_slice(), 1e-14, 2_000_000);
    ok.then_some(q)
}
