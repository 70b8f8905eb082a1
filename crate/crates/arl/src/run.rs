//! Configuration-driven learning experiments: one trace per seed plus a
//! cross-seed summary.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, ensure, Context, Result};
use arl_core::chain;
use arl_core::learning::{self, LearnerState, UpdateSource};
use arl_core::options::{self, InducedSmdpQuantities, InterOptionLearner, IntraForm, OptionSet};
use arl_core::oracle::SolutionSetOracle;
use arl_core::solvers::{self, GainResult};
use arl_core::{FFunction, Layout, Model, StationaryPolicy, StepSchedule, TabularQ};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundled;
use crate::format::{self, FSpec, PerState, ScheduleSpec};

pub const TRACE_HEADER: &str = "# arl-trace v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgorithmSpec {
    /// RVI Q-learning along one behavior trajectory.
    Rvi { f: FSpec },
    /// Differential Q-learning along one behavior trajectory.
    Diffq {
        eta: f64,
        #[serde(default)]
        rbar0: f64,
    },
    /// Inter-option Q-learning; each iteration executes options from
    /// `pairs_per_step` uniformly drawn state-option pairs.
    Inter {
        f: FSpec,
        #[serde(default = "one")]
        l0: f64,
        #[serde(default)]
        beta_schedule: ScheduleSpec,
        #[serde(default = "one_usize")]
        pairs_per_step: usize,
    },
    /// Intra-option Q-learning with every state updated each iteration.
    Intra { f: FSpec, epsilon: f64 },
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

fn default_pass_fraction() -> f64 {
    0.9
}

/// Initial values: one value per state (shared by its actions or options)
/// or an explicit vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Q0Spec {
    PerState(PerState<f64>),
    Vector(Vec<f64>),
}

/// Maps the states of a bundled example onto states of the run's model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleRef {
    pub example: String,
    pub states: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    /// Paths are relative to the config file.
    pub model: PathBuf,
    #[serde(default)]
    pub options: Option<PathBuf>,
    pub algorithm: AlgorithmSpec,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    /// Action weights of the behavior policy, the same at every state.
    #[serde(default)]
    pub behavior: Option<BTreeMap<String, f64>>,
    pub q0: Q0Spec,
    pub start: String,
    pub steps: u64,
    pub record_every: u64,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub oracle: Option<OracleRef>,
    /// Bound on the final distance to the oracle and on `|f - r*|`.
    pub tolerance: f64,
    #[serde(default = "default_pass_fraction")]
    pub pass_fraction: f64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: RunConfig = format::read_json(path)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

enum Learner {
    Rvi { f: FFunction },
    Diffq { eta: f64, rbar0: f64 },
    Inter { f: FFunction, l0: f64, beta: StepSchedule, pairs: usize },
    Intra { f: FFunction, epsilon: f64, form: IntraForm },
}

/// Everything a seed needs, built once from the config.
pub struct Prepared {
    pub cfg: RunConfig,
    pub model: Model,
    pub options: Option<OptionSet>,
    induced: Option<(InducedSmdpQuantities, Model)>,
    learner: Learner,
    sched: StepSchedule,
    behavior: Option<StationaryPolicy>,
    q0: Vec<f64>,
    start: usize,
    pub r_star: f64,
    gain: GainResult,
    oracle: Option<SolutionSetOracle>,
    closed_class: Option<Vec<usize>>,
    pub columns: Vec<String>,
}

impl Prepared {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        ensure!(!cfg.seeds.is_empty(), "no seeds");
        let mut seen = cfg.seeds.clone();
        seen.sort_unstable();
        seen.dedup();
        ensure!(seen.len() == cfg.seeds.len(), "seeds must be distinct");
        ensure!(cfg.record_every > 0, "record_every must be positive");
        ensure!(cfg.steps % cfg.record_every == 0, "steps must be a multiple of record_every");
        ensure!(cfg.tolerance > 0.0, "tolerance must be positive");

        let model = format::load_model(&cfg.resolve(&cfg.model))?;
        let options = match &cfg.options {
            Some(p) => Some(format::load_options(&cfg.resolve(p), &model)?),
            None => None,
        };
        let option_algo = matches!(cfg.algorithm, AlgorithmSpec::Inter { .. } | AlgorithmSpec::Intra { .. });
        ensure!(option_algo == options.is_some(), "option learners need an options file and MDP learners must not have one");

        let induced = match &options {
            Some(o) => {
                let audit = options::audit_termination(&model, o);
                ensure!(audit.passed(), "options may never terminate from {:?}", audit.failing);
                let q = options::exact_option_quantities(&model, o).map_err(|e| anyhow!("{e}"))?;
                let sm = q.to_model(&model, o);
                Some((q, sm))
            }
            None => None,
        };
        let solved = induced.as_ref().map(|(_, m)| m).unwrap_or(&model);
        let class = chain::classify_structure(solved);
        ensure!(class.is_weakly_communicating(), "model is not weakly communicating");
        let gain = solvers::optimal_gain(solved).map_err(|e| anyhow!("{e}"))?;

        let (dim, columns, pair_of): (usize, Vec<String>, Box<dyn Fn(&str, &str) -> Option<usize>>) = match &options {
            None => {
                let cols = (0..model.n_pairs())
                    .map(|p| format!("q:{}:{}", model.state_names()[model.pair_state(p)], model.action_names()[model.pair_action(p)]))
                    .collect();
                let m = model.clone();
                (model.n_pairs(), cols, Box::new(move |s, a| m.pair_by_name(s, a)))
            }
            Some(o) => {
                let no = o.len();
                let cols = (0..model.n_states() * no)
                    .map(|i| format!("q:{}:{}", model.state_names()[i / no], o.names()[i % no]))
                    .collect();
                let (m, names) = (model.clone(), o.names().to_vec());
                let lookup = move |s: &str, a: &str| Some(m.state_index(s)? * no + names.iter().position(|n| n == a)?);
                (model.n_states() * no, cols, Box::new(lookup))
            }
        };

        let q0 = match &cfg.q0 {
            Q0Spec::Vector(v) => {
                ensure!(v.len() == dim, "q0 has {} entries, expected {dim}", v.len());
                v.clone()
            }
            Q0Spec::PerState(t) => {
                for k in t.keys() {
                    ensure!(k == "*" || model.state_index(k).is_some(), "q0: unknown state {k:?}");
                }
                (0..dim)
                    .map(|i| {
                        let s = match &options {
                            None => model.pair_state(i),
                            Some(o) => i / o.len(),
                        };
                        let name = &model.state_names()[s];
                        t.get(name).or_else(|| t.get("*")).copied().ok_or_else(|| anyhow!("q0: no value for state {name:?}"))
                    })
                    .collect::<Result<_>>()?
            }
        };

        let behavior = match &cfg.behavior {
            Some(w) => {
                let mut weights = vec![0.0; model.action_names().len()];
                for (a, &p) in w {
                    let i = model.action_index(a).ok_or_else(|| anyhow!("behavior: unknown action {a:?}"))?;
                    weights[i] = p;
                }
                Some(StationaryPolicy::from_action_weights(&model, &weights).map_err(|e| anyhow!("behavior: {e}"))?)
            }
            None => None,
        };

        let learner = match &cfg.algorithm {
            AlgorithmSpec::Rvi { f } => Learner::Rvi { f: f.build(dim, &pair_of)? },
            AlgorithmSpec::Diffq { eta, rbar0 } => {
                ensure!(*eta > 0.0, "eta must be positive");
                Learner::Diffq { eta: *eta, rbar0: *rbar0 }
            }
            AlgorithmSpec::Inter { f, l0, beta_schedule, pairs_per_step } => {
                ensure!(*pairs_per_step >= 1 && *pairs_per_step <= dim, "pairs_per_step must be in 1..={dim}");
                Learner::Inter { f: f.build(dim, &pair_of)?, l0: *l0, beta: beta_schedule.build(), pairs: *pairs_per_step }
            }
            AlgorithmSpec::Intra { f, epsilon } => {
                let o = options.as_ref().expect("checked above");
                let b = behavior.as_ref().ok_or_else(|| anyhow!("intra-option learning needs a behavior policy"))?;
                let all: Vec<usize> = (0..model.n_states()).collect();
                options::check_behavior(&model, o, b, &all, *epsilon).map_err(|e| anyhow!("{e}"))?;
                Learner::Intra { f: f.build(dim, &pair_of)?, epsilon: *epsilon, form: IntraForm::new(&model, o) }
            }
        };
        if matches!(learner, Learner::Rvi { .. } | Learner::Diffq { .. }) {
            ensure!(behavior.is_some(), "MDP learners need a behavior policy");
        }
        let start = model.state_index(&cfg.start).ok_or_else(|| anyhow!("unknown start state {:?}", cfg.start))?;

        let oracle = match &cfg.oracle {
            Some(r) => {
                ensure!(options.is_none(), "oracles are only available for MDP runs");
                Some(embed_oracle(r, &model)?)
            }
            None => None,
        };

        Ok(Prepared {
            sched: cfg.schedule.build(),
            r_star: gain.r_star,
            closed_class: class.closed_class,
            cfg,
            model,
            options,
            induced,
            learner,
            behavior,
            q0,
            start,
            gain,
            oracle,
            columns,
        })
    }

    fn layout(&self) -> Layout {
        match &self.induced {
            Some((q, _)) => q.layout(),
            None => self.model.layout().clone(),
        }
    }

    fn residual(&self, q: &[f64]) -> f64 {
        match &self.induced {
            Some((_, sm)) => solvers::optimality_residual(sm, q, self.r_star),
            None => solvers::optimality_residual(&self.model, q, self.r_star),
        }
    }

    fn snapshot(&self, step: u64, state: Option<usize>, f_value: f64, q: &[f64]) -> Row {
        Row {
            step,
            state,
            f_value,
            residual: self.residual(q),
            distance: self.oracle.as_ref().map(|o| o.distance(q, false)),
            greedy_optimal: self.gain.is_optimal(&self.layout().greedy(q)),
            q: q.to_vec(),
        }
    }
}

/// Builds the named example's oracle and maps its pairs onto the run model.
fn embed_oracle(r: &OracleRef, model: &Model) -> Result<SolutionSetOracle> {
    let ex = bundled::example_model(&r.example).ok_or_else(|| anyhow!("unknown example {:?}", r.example))?;
    ensure!(r.states.len() == ex.n_states(), "oracle {:?} needs {} states", r.example, ex.n_states());
    let mut comps = Vec::with_capacity(ex.n_pairs());
    for p in 0..ex.n_pairs() {
        let s = &r.states[ex.pair_state(p)];
        let a = &ex.action_names()[ex.pair_action(p)];
        comps.push(model.pair_by_name(s, a).ok_or_else(|| anyhow!("oracle pair ({s}, {a}) missing from the model"))?);
    }
    Ok(bundled::example_oracle(&r.example, FFunction::mean(ex.n_pairs()))?.embedded(comps))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub step: u64,
    pub state: Option<usize>,
    pub f_value: f64,
    pub residual: f64,
    pub distance: Option<f64>,
    pub greedy_optimal: bool,
    pub q: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub final_f: f64,
    pub f_error: f64,
    pub final_residual: f64,
    pub final_distance: Option<f64>,
    pub greedy_final_optimal: bool,
    /// Share of recorded snapshots in the last 10% with an optimal greedy policy.
    pub greedy_tail_fraction: f64,
    /// First trace row with a non-finite value.
    pub nan_row: Option<usize>,
    /// Last iteration whose state lay outside the closed class.
    pub last_outside_closed_class: Option<u64>,
    /// Components of states outside the closed class did not change after
    /// the update made from that state.
    pub transient_frozen: Option<bool>,
    /// `max |L - l_hat|` at the end of an inter-option run.
    pub final_l_error: Option<f64>,
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedRun {
    pub rows: Vec<Row>,
    pub summary: SeedSummary,
}

/// Runs one seed. The RNG is ChaCha8 seeded with the seed value.
pub fn run_seed(p: &Prepared, seed: u64) -> Result<SeedRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = &p.cfg;
    let mut rows = Vec::with_capacity((cfg.steps / cfg.record_every + 1) as usize);
    let outside = |s: usize| p.closed_class.as_ref().is_some_and(|c| !c.contains(&s));
    let mut last_outside = outside(p.start).then_some(0u64);
    let mut frozen_at: Option<Vec<f64>> = None;
    let mut final_l_error = None;
    let q_final: Vec<f64>;
    let f_final: f64;

    match &p.learner {
        Learner::Rvi { .. } | Learner::Diffq { .. } => {
            let behavior = p.behavior.clone().expect("checked in Prepared::new");
            let mut src = UpdateSource::OffPolicy { behavior, state: p.start };
            let (mut l, f) = match &p.learner {
                Learner::Rvi { f } => (LearnerState::new(TabularQ::from_vec(p.q0.clone())), f.clone()),
                Learner::Diffq { eta, rbar0 } => (
                    LearnerState::with_rbar(TabularQ::from_vec(p.q0.clone()), *rbar0),
                    FFunction::differential(*eta, &p.q0, *rbar0),
                ),
                _ => unreachable!(),
            };
            let fval = |l: &LearnerState| l.rbar.unwrap_or_else(|| f.eval(l.q.as_slice()));
            rows.push(p.snapshot(0, Some(p.start), fval(&l), l.q.as_slice()));
            for n in 1..=cfg.steps {
                let before = src.current_state().expect("off-policy source");
                match &p.learner {
                    Learner::Diffq { eta, .. } => learning::differential_q_step(&mut l, &p.model, *eta, &p.sched, &mut src, &mut rng),
                    _ => learning::step(&mut l, &p.model, &f, &p.sched, &mut src, &mut rng),
                }
                .map_err(|e| anyhow!("seed {seed}, step {n}: {e}"))?;
                if outside(before) {
                    frozen_at = Some(l.q.as_slice().to_vec());
                }
                let s = src.current_state().expect("off-policy source");
                if outside(s) {
                    last_outside = Some(n);
                }
                if n % cfg.record_every == 0 {
                    rows.push(p.snapshot(n, Some(s), fval(&l), l.q.as_slice()));
                }
            }
            f_final = fval(&l);
            q_final = l.q.into_vec();
        }
        Learner::Inter { f, l0, beta, pairs } => {
            let (quant, _) = p.induced.as_ref().expect("option run");
            let dim = p.q0.len();
            let mut l = InterOptionLearner::new(TabularQ::from_vec(p.q0.clone()), vec![*l0; dim]).map_err(|e| anyhow!("{e}"))?;
            rows.push(p.snapshot(0, None, f.eval(l.q.as_slice()), l.q.as_slice()));
            let opts = p.options.as_ref().expect("option run");
            for n in 1..=cfg.steps {
                let ys: Vec<usize> = if *pairs == dim {
                    (0..dim).collect()
                } else {
                    rand::seq::index::sample(&mut rng, dim, *pairs).into_vec()
                };
                options::inter_option_step(&mut l, &p.model, opts, f, &p.sched, beta, &ys, &mut rng, options::DEFAULT_EXECUTION_CAP)
                    .map_err(|e| anyhow!("seed {seed}, step {n}: {e}"))?;
                if n % cfg.record_every == 0 {
                    rows.push(p.snapshot(n, None, f.eval(l.q.as_slice()), l.q.as_slice()));
                }
            }
            final_l_error = Some(l.l_est.iter().zip(&quant.l_hat).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
            f_final = f.eval(l.q.as_slice());
            q_final = l.q.into_vec();
        }
        Learner::Intra { f, epsilon, form } => {
            let opts = p.options.as_ref().expect("option run");
            let behavior = p.behavior.as_ref().expect("checked in Prepared::new");
            let xs: Vec<usize> = (0..p.model.n_states()).collect();
            let mut q = TabularQ::from_vec(p.q0.clone());
            let mut counts = vec![0u64; q.len()];
            rows.push(p.snapshot(0, None, f.eval(q.as_slice()), q.as_slice()));
            for n in 1..=cfg.steps {
                options::intra_option_step(&mut q, &mut counts, &p.model, opts, form, f, &p.sched, behavior, &xs, *epsilon, &mut rng)
                    .map_err(|e| anyhow!("seed {seed}, step {n}: {e}"))?;
                if n % cfg.record_every == 0 {
                    rows.push(p.snapshot(n, None, f.eval(q.as_slice()), q.as_slice()));
                }
            }
            f_final = f.eval(q.as_slice());
            q_final = q.into_vec();
        }
    }

    let last = p.snapshot(cfg.steps, None, f_final, &q_final);
    let tail_start = rows.len() - (rows.len() / 10).max(1);
    let tail = &rows[tail_start..];
    let greedy_tail_fraction = tail.iter().filter(|r| r.greedy_optimal).count() as f64 / tail.len() as f64;
    let nan_row = rows.iter().position(|r| !(r.f_value.is_finite() && r.q.iter().all(|v| v.is_finite())));
    let transient_frozen = match (&p.closed_class, last_outside) {
        (Some(c), Some(_)) if p.options.is_none() => {
            let at_exit = frozen_at.as_deref().unwrap_or(&q_final);
            Some((0..q_final.len()).filter(|&i| !c.contains(&p.model.pair_state(i))).all(|i| q_final[i] == at_exit[i]))
        }
        _ => None,
    };
    let f_error = f_final - p.r_star;
    let within_tolerance = nan_row.is_none()
        && f_error.abs() <= cfg.tolerance
        && last.distance.map_or(true, |d| d <= cfg.tolerance);
    let summary = SeedSummary {
        seed,
        final_f: f_final,
        f_error,
        final_residual: last.residual,
        final_distance: last.distance,
        greedy_final_optimal: last.greedy_optimal,
        greedy_tail_fraction,
        nan_row,
        last_outside_closed_class: last_outside,
        transient_frozen,
        final_l_error,
        within_tolerance,
    };
    Ok(SeedRun { rows, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl Spread {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
        Some(Spread { min: v[0], median, max: v[n - 1] })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub r_star: f64,
    pub tolerance: f64,
    pub pass_fraction: f64,
    pub seeds: Vec<SeedSummary>,
    pub final_distance: Option<Spread>,
    pub abs_f_error: Option<Spread>,
    pub fraction_within_tolerance: f64,
    pub passed: bool,
}

pub fn summarize(p: &Prepared, runs: &[SeedRun]) -> Summary {
    let seeds: Vec<SeedSummary> = runs.iter().map(|r| r.summary.clone()).collect();
    let dists: Vec<f64> = seeds.iter().filter_map(|s| s.final_distance).collect();
    let ferr: Vec<f64> = seeds.iter().map(|s| s.f_error.abs()).collect();
    let ok = seeds.iter().filter(|s| s.within_tolerance).count();
    let frac = if seeds.is_empty() { 0.0 } else { ok as f64 / seeds.len() as f64 };
    Summary {
        name: p.cfg.name.clone(),
        r_star: p.r_star,
        tolerance: p.cfg.tolerance,
        pass_fraction: p.cfg.pass_fraction,
        final_distance: Spread::of(&dists),
        abs_f_error: Spread::of(&ferr),
        fraction_within_tolerance: frac,
        passed: !seeds.is_empty() && frac >= p.cfg.pass_fraction,
        seeds,
    }
}

/// Runs every seed in parallel; results are in config order.
pub fn run_experiment(p: &Prepared) -> Result<(Vec<SeedRun>, Summary)> {
    let runs = p.cfg.seeds.par_iter().map(|&s| run_seed(p, s)).collect::<Result<Vec<_>>>()?;
    let summary = summarize(p, &runs);
    Ok((runs, summary))
}

fn fmt_f(x: f64) -> String {
    format!("{x}")
}

pub fn write_trace<W: Write>(p: &Prepared, rows: &[Row], mut out: W) -> Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> =
        ["step", "state", "f", "residual", "distance", "greedy_optimal"].iter().map(|s| s.to_string()).collect();
    header.extend(p.columns.iter().cloned());
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.step.to_string(),
            r.state.map(|s| p.model.state_names()[s].clone()).unwrap_or_default(),
            fmt_f(r.f_value),
            fmt_f(r.residual),
            r.distance.map(fmt_f).unwrap_or_default(),
            (r.greedy_optimal as u8).to_string(),
        ];
        rec.extend(r.q.iter().map(|&v| fmt_f(v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<name>_seed<k>.csv` per seed and `summary.json` into `dir`.
pub fn write_outputs(p: &Prepared, runs: &[SeedRun], summary: &Summary, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for r in runs {
        let path = dir.join(format!("{}_seed{}.csv", p.cfg.name, r.summary.seed));
        let f = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        write_trace(p, &r.rows, std::io::BufWriter::new(f))?;
    }
    let path = dir.join("summary.json");
    std::fs::write(&path, serde_json::to_string_pretty(summary)? + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Uniform draw helper kept here so callers need not depend on `rand`.
pub fn random_vector(dim: usize, half_width: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| rng.random_range(-half_width..=half_width)).collect()
}

pub fn load_and_prepare(path: &Path, seeds_override: Option<Vec<u64>>) -> Result<Prepared> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(s) = seeds_override {
        cfg.seeds = s;
    }
    Prepared::new(cfg).with_context(|| format!("config {}", path.display()))
}

pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
        if b < a {
            bail!("empty seed range {s:?}");
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|x| x.trim().parse::<u64>().map_err(|e| anyhow!("seed {x:?}: {e}"))).collect()
}
