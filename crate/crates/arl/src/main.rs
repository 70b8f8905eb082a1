use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use arl::format::{self, FSpec};
use arl::ode::{self as odecmd, OdeAlgo, OdeConfig, X0Spec};
use arl::{report, run};
use clap::{Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "arl", version, about = "Average-reward RVI Q-learning experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a learning experiment: one CSV trace per seed plus summary.json.
    Run {
        config: PathBuf,
        /// Seeds as `1,2,3` or `1..10`.
        #[arg(long)]
        seeds_override: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Communication structure and unichain property.
    Classify { model: PathBuf },
    /// Optimal gain and optimal deterministic policies by enumeration.
    Gain { model: PathBuf },
    /// R*, n*, the recurrent classes and K*.
    Structure { model: PathBuf },
    /// Relative value iteration.
    Solve {
        model: PathBuf,
        /// Reference pair `state:action`.
        #[arg(long = "ref")]
        reference: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        /// Use the holding-time scaled update.
        #[arg(long)]
        schweitzer: bool,
    },
    /// Empirical dimension of the constrained solution set (bundled examples).
    Dimcheck {
        model: PathBuf,
        #[arg(long, default_value_t = 400)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Termination audit and exact quantities of an option set.
    Induced { model: PathBuf, options: PathBuf },
    /// Integrate the mean-field ODE and check its properties.
    Ode {
        config: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        options: Option<PathBuf>,
        /// mean, sum, max or component:<state>:<action>
        #[arg(long)]
        f: Option<String>,
        /// mdp, inter or intra
        #[arg(long)]
        algo: Option<OdeAlgo>,
        /// zero, random:<seed> or a JSON file
        #[arg(long)]
        x0: Option<String>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn cmd_run(config: &Path, seeds: Option<String>, out: Option<PathBuf>) -> Result<bool> {
    let seeds = seeds.as_deref().map(run::parse_seeds).transpose()?;
    let p = run::load_and_prepare(config, seeds)?;
    let (runs, summary) = run::run_experiment(&p)?;
    let dir = out
        .or_else(|| p.cfg.output.as_ref().map(|o| p.cfg.resolve(o)))
        .unwrap_or_else(|| PathBuf::from("out").join(&p.cfg.name));
    run::write_outputs(&p, &runs, &summary, &dir)?;
    for s in &summary.seeds {
        let d = s.final_distance.map_or("-".to_string(), |d| format!("{d:.4}"));
        println!("seed {:>4}  f-r* {:+.4}  dist {d}  {}", s.seed, s.f_error, if s.within_tolerance { "ok" } else { "FAIL" });
    }
    println!(
        "{}: {:.0}% of seeds within {} (need {:.0}%) -> {}",
        summary.name,
        100.0 * summary.fraction_within_tolerance,
        summary.tolerance,
        100.0 * summary.pass_fraction,
        if summary.passed { "pass" } else { "fail" }
    );
    println!("wrote {}", dir.display());
    Ok(summary.passed)
}

#[allow(clippy::too_many_arguments)]
fn cmd_ode(
    config: Option<PathBuf>,
    model: Option<PathBuf>,
    options: Option<PathBuf>,
    f: Option<String>,
    algo: Option<OdeAlgo>,
    x0: Option<String>,
    t_end: Option<f64>,
    dt: Option<f64>,
    out: Option<PathBuf>,
) -> Result<bool> {
    let (mut cfg, base) = match &config {
        Some(p) => (format::read_json::<OdeConfig>(p)?, p.parent().map(Path::to_path_buf).unwrap_or_default()),
        None => {
            let model = model.clone().ok_or_else(|| anyhow!("give a config file or --model"))?;
            let cfg = OdeConfig {
                model,
                options: None,
                algo: OdeAlgo::Mdp,
                f: FSpec::Mean { bias: 0.0 },
                x0: X0Spec::default(),
                t_end: 20.0,
                dt: 0.01,
                zero_reward_t_end: 100.0,
                output: None,
            };
            (cfg, PathBuf::new())
        }
    };
    if let Some(m) = model {
        cfg.model = m;
    }
    if options.is_some() {
        cfg.options = options;
    }
    if let Some(f) = f {
        cfg.f = FSpec::parse(&f)?;
    }
    if let Some(a) = algo {
        cfg.algo = a;
    }
    if let Some(x) = x0 {
        cfg.x0 = X0Spec::Named(x);
    }
    cfg.t_end = t_end.unwrap_or(cfg.t_end);
    cfg.dt = dt.unwrap_or(cfg.dt);
    let abstract_rvi = odecmd::build_config(&cfg, &base)?;
    let x0 = odecmd::initial_point(&cfg.x0, abstract_rvi.dim(), &base)?;
    let (traj, rep) = odecmd::analyze(&abstract_rvi, cfg.algo, &x0, cfg.t_end, cfg.dt, cfg.zero_reward_t_end)?;
    let dir = out.or_else(|| cfg.output.as_ref().map(|o| base.join(o))).unwrap_or_else(|| PathBuf::from("out/ode"));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let f = std::fs::File::create(dir.join("trajectory.csv"))?;
    odecmd::write_trajectory(&traj, std::io::BufWriter::new(f))?;
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&rep)? + "\n")?;
    print_json(&rep)?;
    Ok(rep.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Run { config, seeds_override, out } => cmd_run(&config, seeds_override, out),
        Cmd::Classify { model } => format::load_model(&model).and_then(|m| report::classify(&m)).and_then(|r| print_json(&r)).map(|_| true),
        Cmd::Gain { model } => format::load_model(&model).and_then(|m| report::gain(&m)).and_then(|r| print_json(&r)).map(|_| true),
        Cmd::Structure { model } => {
            format::load_model(&model).and_then(|m| report::structure(&m)).and_then(|r| print_json(&r)).map(|_| true)
        }
        Cmd::Solve { model, reference, alpha, schweitzer } => (|| {
            let m = format::load_model(&model)?;
            let r = reference
                .as_deref()
                .map(|s| s.split_once(':').ok_or_else(|| anyhow!("--ref expects state:action")))
                .transpose()?;
            let out = report::solve(&m, r, alpha, schweitzer)?;
            print_json(&out)?;
            Ok(out.converged)
        })(),
        Cmd::Dimcheck { model, samples, seed } => (|| {
            let r = report::dimcheck(&format::load_model(&model)?, samples, seed)?;
            print_json(&r)?;
            Ok(r.passed)
        })(),
        Cmd::Induced { model, options } => (|| {
            let m = format::load_model(&model)?;
            let o = format::load_options(&options, &m)?;
            let r = report::induced(&m, &o)?;
            print_json(&r)?;
            Ok(r.termination_ok)
        })(),
        Cmd::Ode { config, model, options, f, algo, x0, t_end, dt, out } => {
            cmd_ode(config, model, options, f, algo, x0, t_end, dt, out)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
