use std::path::{Path, PathBuf};

use arl::bundled::{example_model, EXAMPLE_NAMES};
use arl::format::{self, ModelFile, OptionsFile};
use arl::run::{self, load_and_prepare, run_experiment, write_trace, Prepared, RunConfig, TRACE_HEADER};
use arl_core::examples;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn config(name: &str) -> PathBuf {
    crate_dir().join("configs").join(format!("{name}.json"))
}

fn trace_bytes(p: &Prepared, seed: u64) -> Vec<u8> {
    let r = run::run_seed(p, seed).unwrap();
    let mut out = Vec::new();
    write_trace(p, &r.rows, &mut out).unwrap();
    out
}

#[test]
fn bundled_model_files_match_constructors() {
    for name in EXAMPLE_NAMES {
        let path = crate_dir().join("models").join(format!("{name}.json"));
        let on_disk: ModelFile = format::read_json(&path).unwrap();
        let built = example_model(name).unwrap();
        assert_eq!(on_disk, ModelFile::from_model(&built), "{name}");
        assert_eq!(ModelFile::from_model(&on_disk.to_model().unwrap()), on_disk, "{name}");
    }
}

#[test]
fn options_file_round_trip() {
    let m = examples::options_mdp();
    let opts = format::load_options(&crate_dir().join("models/options3_options.json"), &m).unwrap();
    assert_eq!(opts, examples::options_set());
    let file = OptionsFile::from_options(&m, &opts);
    let text = serde_json::to_string(&file).unwrap();
    let back: OptionsFile = serde_json::from_str(&text).unwrap();
    assert_eq!(back.to_options(&m).unwrap(), opts);
}

#[test]
fn model_file_errors_name_the_transition() {
    let mut f = ModelFile::from_model(&examples::ex2_1a());
    f.transitions[1].next = "nowhere".into();
    let err = format!("{:#}", f.to_model().unwrap_err());
    assert!(err.contains("transition 1"), "{err}");
}

#[test]
fn traces_are_deterministic_per_seed() {
    for name in ["diffq_weakly", "rvi_communicating", "intra_options3"] {
        let p = load_and_prepare(&config(name), Some(vec![7])).unwrap();
        let a = trace_bytes(&p, 7);
        assert_eq!(a, trace_bytes(&p, 7), "{name}");
        assert!(a.starts_with(TRACE_HEADER.as_bytes()));
        assert_ne!(a, trace_bytes(&p, 8), "{name}");
    }
}

#[test]
fn zero_steps_records_only_the_start() {
    let mut cfg = RunConfig::load(&config("diffq_communicating")).unwrap();
    cfg.steps = 0;
    cfg.seeds = vec![1];
    let p = Prepared::new(cfg).unwrap();
    let r = run::run_seed(&p, 1).unwrap();
    assert_eq!(r.rows.len(), 1);
    assert_eq!(r.rows[0].step, 0);
    assert_eq!(r.rows[0].q, vec![4.0, 4.0, 2.0, 2.0]);
}

#[test]
fn identical_seed_runs_have_no_spread() {
    let p = load_and_prepare(&config("diffq_communicating"), Some(vec![3])).unwrap();
    let (runs, _) = run_experiment(&p).unwrap();
    let again = run::summarize(&p, &[runs[0].clone(), run::run_seed(&p, 3).unwrap()]);
    let d = again.final_distance.unwrap();
    assert_eq!(d.min, d.max);
    let f = again.abs_f_error.unwrap();
    assert_eq!(f.min, f.max);
}

#[test]
fn divergent_runs_are_flagged() {
    let mut cfg = RunConfig::load(&config("diffq_communicating")).unwrap();
    cfg.schedule = format::ScheduleSpec::Harmonic { c: 1e300, d: 0.0 };
    cfg.steps = 100;
    cfg.seeds = vec![1];
    let p = Prepared::new(cfg).unwrap();
    let (_, s) = run_experiment(&p).unwrap();
    assert!(s.seeds[0].nan_row.is_some());
    assert!(!s.seeds[0].within_tolerance);
    assert!(!s.passed);
}

#[test]
fn configs_reject_bad_shapes() {
    let mut cfg = RunConfig::load(&config("diffq_communicating")).unwrap();
    cfg.steps = 15;
    assert!(Prepared::new(cfg.clone()).is_err());
    cfg.steps = 20;
    cfg.seeds = vec![1, 1];
    assert!(Prepared::new(cfg).is_err());
    assert_eq!(run::parse_seeds("1..4").unwrap(), vec![1, 2, 3, 4]);
    assert_eq!(run::parse_seeds("5,2").unwrap(), vec![5, 2]);
}

#[test]
fn outputs_land_in_the_directory() {
    let dir = tempfile::tempdir().unwrap();
    let p = load_and_prepare(&config("rvi_communicating"), Some(vec![1, 2])).unwrap();
    let (runs, s) = run_experiment(&p).unwrap();
    run::write_outputs(&p, &runs, &s, dir.path()).unwrap();
    for k in [1, 2] {
        assert!(dir.path().join(format!("rvi_communicating_seed{k}.csv")).is_file());
    }
    let back: run::Summary = format::read_json(&dir.path().join("summary.json")).unwrap();
    assert_eq!(back.seeds.len(), 2);
    let _: &Path = dir.path();
}
