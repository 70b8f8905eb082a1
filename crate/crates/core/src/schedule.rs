//! Step-size sequences and a finite-horizon audit of their conditions.
//!
//! Sequences are indexed from 1: a component updated for the `k`-th time
//! uses `alpha(k)`.

use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub enum StepSchedule {
    /// `c / (n + d)`.
    Harmonic { c: f64, d: f64 },
    /// `c / ((n + 1) ln(n + 1))`.
    LogHarmonic { c: f64 },
    /// `c / (n + d)^p`.
    Power { c: f64, p: f64, d: f64 },
    /// Explicit table; the last entry repeats past its end.
    Custom(Vec<f64>),
}

impl Default for StepSchedule {
    fn default() -> Self {
        StepSchedule::Harmonic { c: 1.0, d: 1.0 }
    }
}

impl StepSchedule {
    /// `1/n`.
    pub fn one_over_n() -> Self {
        StepSchedule::Harmonic { c: 1.0, d: 0.0 }
    }

    pub fn alpha(&self, n: u64) -> f64 {
        let x = n.max(1) as f64;
        match self {
            StepSchedule::Harmonic { c, d } => c / (x + d),
            StepSchedule::LogHarmonic { c } => c / ((x + 1.0) * libm::log(x + 1.0)),
            StepSchedule::Power { c, p, d } => c / libm::pow(x + d, *p),
            StepSchedule::Custom(t) => {
                let i = (n.max(1) - 1) as usize;
                t[i.min(t.len() - 1)]
            }
        }
    }
}

/// Numeric audit of a step-size sequence over `1..=horizon`.
///
/// Series behaviour is judged from dyadic block sums
/// `B_k = sum_{2^k <= n < 2^{k+1}} a_n`: the series diverges when the last
/// block ratio `B_K / B_{K-1}` stays at least 0.9, and converges when it is
/// at most 0.75.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleReport {
    pub horizon: u64,
    pub positive: bool,
    pub eventually_nonincreasing: bool,
    pub sum_block_ratio: f64,
    pub sum_sq_block_ratio: f64,
    pub sum_diverges: bool,
    pub sum_sq_converges: bool,
    /// `max alpha_{floor(n/2)} / alpha_n` over the last two dyadic blocks.
    pub half_ratio: (f64, f64),
    pub half_ratio_bounded: bool,
    pub failures: Vec<String>,
}

impl ScheduleReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub const DIVERGENCE_RATIO: f64 = 0.9;
pub const CONVERGENCE_RATIO: f64 = 0.75;

pub fn check_step_schedule(sched: &StepSchedule, horizon: u64) -> ScheduleReport {
    let horizon = horizon.max(16);
    let k_max = 63 - horizon.leading_zeros() as u64; // 2^k_max <= horizon
    let mut blocks = Vec::new();
    let mut blocks_sq = Vec::new();
    let mut half_max = Vec::new();
    let mut positive = true;
    let mut nonincreasing = true;
    for k in 0..k_max {
        let (lo, hi) = (1u64 << k, 1u64 << (k + 1));
        let (mut b, mut b2, mut hm) = (0.0, 0.0, 0.0f64);
        for n in lo..hi {
            let a = sched.alpha(n);
            positive &= a > 0.0 && a.is_finite();
            b += a;
            b2 += a * a;
            if n >= 2 {
                hm = hm.max(sched.alpha(n / 2) / a);
            }
            if n > horizon / 2 && sched.alpha(n + 1) > a * (1.0 + 1e-12) {
                nonincreasing = false;
            }
        }
        blocks.push(b);
        blocks_sq.push(b2);
        half_max.push(hm);
    }
    let last = blocks.len() - 1;
    let sum_ratio = blocks[last] / blocks[last - 1];
    let sq_ratio = blocks_sq[last] / blocks_sq[last - 1];
    let half_ratio = (half_max[last - 1], half_max[last]);
    let half_bounded = half_ratio.1.is_finite() && half_ratio.1 <= 1.05 * half_ratio.0;
    let mut failures = Vec::new();
    if !positive {
        failures.push("alpha_n must be positive and finite".into());
    }
    if !nonincreasing {
        failures.push("alpha_n is not nonincreasing on the second half of the horizon".into());
    }
    if !(sum_ratio >= DIVERGENCE_RATIO) {
        failures.push(alloc::format!("sum alpha_n looks convergent (block ratio {sum_ratio:.4})"));
    }
    if !(sq_ratio <= CONVERGENCE_RATIO) {
        failures.push(alloc::format!("sum alpha_n^2 looks divergent (block ratio {sq_ratio:.4})"));
    }
    if !half_bounded {
        failures.push(alloc::format!(
            "alpha_[n/2] / alpha_n keeps growing ({:.4} -> {:.4})",
            half_ratio.0,
            half_ratio.1
        ));
    }
    ScheduleReport {
        horizon,
        positive,
        eventually_nonincreasing: nonincreasing,
        sum_block_ratio: sum_ratio,
        sum_sq_block_ratio: sq_ratio,
        sum_diverges: sum_ratio >= DIVERGENCE_RATIO,
        sum_sq_converges: sq_ratio <= CONVERGENCE_RATIO,
        half_ratio,
        half_ratio_bounded: half_bounded,
        failures,
    }
}

/// `sum_{k = nu_n(i)}^{nu_{N(n,x)}(i)} alpha_k / x` for every component
/// `i`, where `N(n, x) = min { m > n : sum_{k=n}^{m} alpha_k >= x }`.
///
/// `counts[t][i]` is the update count of component `i` after iteration `t`
/// (`t = 1..counts.len()`; index 0 holds the initial counts). Returns `None`
/// if the trajectory ends before `N(n, x)`.
pub fn local_clock_ratios(sched: &StepSchedule, counts: &[Vec<u64>], n: usize, x: f64) -> Option<Vec<f64>> {
    let mut acc = 0.0;
    let mut m = n;
    loop {
        acc += sched.alpha(m as u64);
        if acc >= x && m > n {
            break;
        }
        m += 1;
        if m >= counts.len() {
            return None;
        }
    }
    let dim = counts[n].len();
    Some(
        (0..dim)
            .map(|i| {
                let (a, b) = (counts[n][i], counts[m][i]);
                (a..=b).map(|k| sched.alpha(k)).sum::<f64>() / x
            })
            .collect(),
    )
}
