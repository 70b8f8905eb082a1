//! `arl ode`: integrates the mean-field vector fields of a model and checks
//! the shift, Lyapunov, zero-reward and equilibrium properties.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, ensure, Context, Result};
use arl_core::ode::{self, AbstractRvi, Field, LyapunovReport, OdeTrajectory, ShiftLemmaReport};
use arl_core::linalg::max_norm;
use arl_core::options;
use arl_core::solvers;
use arl_core::TabularQ;
use serde::{Deserialize, Serialize};

use crate::format::{self, FSpec};
use crate::run::random_vector;

/// Norm bound reached by zero-reward trajectories.
pub const ZERO_REWARD_TOL: f64 = 1e-4;
/// Equilibrium tolerance for the end of an `h` trajectory.
pub const EQUILIBRIUM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OdeAlgo {
    Mdp,
    Inter,
    Intra,
}

impl std::str::FromStr for OdeAlgo {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "mdp" => OdeAlgo::Mdp,
            "inter" => OdeAlgo::Inter,
            "intra" => OdeAlgo::Intra,
            _ => bail!("unknown algorithm {s:?} (expected mdp, inter or intra)"),
        })
    }
}

/// Initial point: `"zero"`, `"random:<seed>"` (uniform on `[-10, 10]`),
/// a path to a JSON array, or an inline array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum X0Spec {
    Named(String),
    Vector(Vec<f64>),
}

impl Default for X0Spec {
    fn default() -> Self {
        X0Spec::Named("zero".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeConfig {
    pub model: PathBuf,
    #[serde(default)]
    pub options: Option<PathBuf>,
    pub algo: OdeAlgo,
    pub f: FSpec,
    #[serde(default)]
    pub x0: X0Spec,
    pub t_end: f64,
    pub dt: f64,
    /// Time horizon of the zero-reward check.
    #[serde(default = "default_zero_t")]
    pub zero_reward_t_end: f64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_zero_t() -> f64 {
    100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeReport {
    pub algo: OdeAlgo,
    pub dim: usize,
    pub r_sharp: f64,
    pub u: f64,
    pub shift: ShiftJson,
    pub lyapunov: Option<LyapunovJson>,
    pub zero_reward_final_norm: f64,
    pub final_residual: f64,
    pub final_f_gap: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftJson {
    pub max_gap_span: f64,
    pub max_z_error: f64,
    pub final_gap: f64,
    pub final_z: f64,
    pub passed: bool,
}

impl From<&ShiftLemmaReport> for ShiftJson {
    fn from(r: &ShiftLemmaReport) -> Self {
        ShiftJson {
            max_gap_span: r.max_gap_span,
            max_z_error: r.max_z_error,
            final_gap: r.final_gap,
            final_z: r.final_z,
            passed: r.passed(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovJson {
    pub q_star: Vec<f64>,
    pub max_increase: f64,
    pub bound_ratio: f64,
    pub passed: bool,
}

impl LyapunovJson {
    fn new(q_star: Vec<f64>, r: &LyapunovReport) -> Self {
        LyapunovJson { q_star, max_increase: r.max_increase, bound_ratio: r.bound_ratio, passed: r.passed() }
    }
}

pub fn build_config(cfg: &OdeConfig, base: &Path) -> Result<AbstractRvi> {
    let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
    let model = format::load_model(&resolve(&cfg.model))?;
    match cfg.algo {
        OdeAlgo::Mdp => {
            ensure!(cfg.options.is_none(), "the mdp field takes no options file");
            let r = solvers::optimal_gain(&model).map_err(|e| anyhow!("{e}"))?.r_star;
            let f = cfg.f.build(model.n_pairs(), |s, a| model.pair_by_name(s, a))?;
            Ok(AbstractRvi::mdp(&model, f, r))
        }
        OdeAlgo::Inter | OdeAlgo::Intra => {
            let path = cfg.options.as_ref().ok_or_else(|| anyhow!("option fields need an options file"))?;
            let opts = format::load_options(&resolve(path), &model)?;
            let quant = options::exact_option_quantities(&model, &opts).map_err(|e| anyhow!("{e}"))?;
            let r = solvers::optimal_gain(&quant.to_model(&model, &opts)).map_err(|e| anyhow!("{e}"))?.r_star;
            let no = opts.len();
            let f = cfg.f.build(model.n_states() * no, |s, o| {
                Some(model.state_index(s)? * no + opts.names().iter().position(|n| n == o)?)
            })?;
            Ok(match cfg.algo {
                OdeAlgo::Inter => AbstractRvi::inter_option(&quant, f, r),
                _ => AbstractRvi::intra_option(&model, &opts, f, r),
            })
        }
    }
}

pub fn initial_point(spec: &X0Spec, dim: usize, base: &Path) -> Result<Vec<f64>> {
    let x = match spec {
        X0Spec::Vector(v) => v.clone(),
        X0Spec::Named(s) if s == "zero" => vec![0.0; dim],
        X0Spec::Named(s) if s.starts_with("random:") => {
            let seed: u64 = s["random:".len()..].parse().with_context(|| format!("x0 {s:?}"))?;
            random_vector(dim, 10.0, seed)
        }
        X0Spec::Named(path) => {
            let p = Path::new(path);
            format::read_json::<Vec<f64>>(&if p.is_absolute() { p.to_path_buf() } else { base.join(p) })?
        }
    };
    ensure!(x.len() == dim, "x0 has {} entries, expected {dim}", x.len());
    Ok(x)
}

/// Runs all checks from `x0` and returns the `h` trajectory with the report.
pub fn analyze(cfg: &AbstractRvi, algo: OdeAlgo, x0: &[f64], t_end: f64, dt: f64, zero_t: f64) -> Result<(OdeTrajectory, OdeReport)> {
    let traj = cfg.integrate(Field::H, x0, t_end, dt).map_err(|e| anyhow!("{e}"))?;
    let shift = ode::check_shift_lemma(cfg, x0, t_end, dt).map_err(|e| anyhow!("{e}"))?;
    let lyapunov = match ode::solve_constrained(cfg, &TabularQ::from_vec(x0.to_vec())) {
        Some(q) if cfg.residual(&q) <= 1e-10 && (cfg.f.eval(&q) - cfg.r_sharp).abs() <= 1e-10 => {
            let r = ode::check_lyapunov(cfg, x0, &q, t_end, dt).map_err(|e| anyhow!("{e}"))?;
            Some(LyapunovJson::new(q, &r))
        }
        _ => None,
    };
    let zero = cfg.zero_reward().integrate(Field::H, x0, zero_t, dt).map_err(|e| anyhow!("{e}"))?;
    let zero_norm = max_norm(zero.last());
    let end = traj.last();
    let final_residual = cfg.residual(end);
    let final_f_gap = (cfg.f.eval(end) - cfg.r_sharp).abs();
    let passed = shift.passed()
        && lyapunov.as_ref().is_some_and(|l| l.passed)
        && zero_norm <= ZERO_REWARD_TOL
        && final_residual <= EQUILIBRIUM_TOL
        && final_f_gap <= EQUILIBRIUM_TOL;
    let report = OdeReport {
        algo,
        dim: cfg.dim(),
        r_sharp: cfg.r_sharp,
        u: cfg.f.u(),
        shift: (&shift).into(),
        lyapunov,
        zero_reward_final_norm: zero_norm,
        final_residual,
        final_f_gap,
        passed,
    };
    Ok((traj, report))
}

pub fn write_trajectory<W: std::io::Write>(traj: &OdeTrajectory, mut out: W) -> Result<()> {
    writeln!(out, "# arl-ode v1")?;
    let mut w = csv::Writer::from_writer(out);
    let dim = traj.states.first().map_or(0, Vec::len);
    let mut header = vec!["t".to_string()];
    header.extend((0..dim).map(|i| format!("x{i}")));
    w.write_record(&header)?;
    for (t, x) in traj.times.iter().zip(&traj.states) {
        let mut rec = vec![format!("{t}")];
        rec.extend(x.iter().map(|v| format!("{v}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
