use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gphl_cli::config::{Params, PotentialSpec};
use gphl_cli::error::CliError;
use gphl_cli::{validate, Experiment, ExperimentConfig, Overrides};
use gphl_core::manybody::read_checkpoint;
use gphl_core::{Error, WaveFunction};
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gphl"));
    c.env_remove(gphl_cli::BUDGET_ENV);
    c
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg("run").arg(cfg).arg("--out-dir").arg(out).args(extra).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn error_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|_| panic!("stderr is not JSON: {}", String::from_utf8_lossy(&o.stderr)))
}

fn parse(text: &str) -> Result<ExperimentConfig, CliError> {
    ExperimentConfig::from_json(text)
}

// ---------------------------------------------------------------- config

#[test]
fn defaults_are_resolved() {
    let cfg = parse(r#"{"schema_version": 1, "experiment": "chaos"}"#).unwrap();
    assert_eq!(cfg.experiment, Experiment::Chaos);
    assert_eq!((cfg.seed, cfg.workers), (0, 1));
    let Params::Chaos(p) = &cfg.params else { panic!("wrong params") };
    assert_eq!(p.n_list, vec![2, 3, 4, 5]);
    assert_eq!((p.beta, p.t_final, p.points), (0.3, 0.5, 16));
    assert!(matches!(cfg.potential, PotentialSpec::Gaussian { .. }));
    let born = parse(r#"{"schema_version": 1, "experiment": "born-limit"}"#).unwrap();
    assert_eq!(born.potential, PotentialSpec::SquareBarrier { height: 2.0, radius: 1.0 });
}

#[test]
fn every_experiment_name_parses() {
    for e in Experiment::ALL {
        let cfg = parse(&format!(r#"{{"schema_version": 1, "experiment": "{}"}}"#, e.as_str())).unwrap();
        assert_eq!(cfg.experiment, e);
        assert_eq!(Experiment::parse(e.as_str()), Some(e));
    }
}

#[test]
fn unknown_fields_are_rejected() {
    let top = parse(r#"{"schema_version": 1, "experiment": "dyadic", "sed": 3}"#).unwrap_err();
    assert!(top.to_string().contains("sed"));
    let nested = parse(r#"{"schema_version": 1, "experiment": "dyadic", "params": {"beta": [0.5], "epsilom": 0.1}}"#);
    assert!(nested.unwrap_err().to_string().contains("epsilom"));
    let pot = parse(r#"{"schema_version": 1, "experiment": "born-limit", "potential": {"kind": "zero", "height": 1}}"#);
    assert!(pot.is_err());
    // params of another experiment are unknown here
    assert!(parse(r#"{"schema_version": 1, "experiment": "dyadic", "params": {"n_list": [2]}}"#).is_err());
}

#[test]
fn schema_version_is_checked() {
    let e = parse(r#"{"schema_version": 2, "experiment": "dyadic"}"#).unwrap_err();
    assert!(e.to_string().contains("schema_version"));
    assert_eq!(e.exit_code(), 2);
    assert!(parse(r#"{"experiment": "dyadic"}"#).is_err());
}

#[test]
fn unknown_experiment_lists_valid_names() {
    let e = parse(r#"{"schema_version": 1, "experiment": "chaoss"}"#).unwrap_err().to_string();
    for name in Experiment::ALL {
        assert!(e.contains(name.as_str()), "{e}");
    }
}

#[test]
fn parameter_ranges() {
    let bad = [
        r#""experiment": "born-limit", "params": {"beta": [1.5]}"#,
        r#""experiment": "born-limit", "params": {"n_list": [100, 10]}"#,
        r#""experiment": "chaos", "params": {"points": 12}"#,
        r#""experiment": "chaos", "params": {"t_final": 0.5, "dt": 0.3}"#,
        r#""experiment": "bbgky-residual", "params": {"k_list": [3]}"#,
        r#""experiment": "boardgame", "params": {"q_max_maps": 9}"#,
        r#""experiment": "dyadic", "params": {"epsilon": 0.5}"#,
        r#""experiment": "probes", "params": {"probes": ["str_4body"]}"#,
        r#""experiment": "probes", "params": {"coarse_points": 5}"#,
        r#""experiment": "nls-norms", "params": {"dimension": 2}"#,
        r#""experiment": "scattering-scan", "potential": {"kind": "square_barrier", "height": -1, "radius": 1}"#,
        r#""experiment": "scattering-scan", "potential": {"kind": "gaussian", "amplitude": 1, "width": 0}"#,
        r#""experiment": "dyadic", "workers": 0"#,
    ];
    for body in bad {
        let e = parse(&format!(r#"{{"schema_version": 1, {body}}}"#));
        assert!(matches!(e, Err(CliError::Schema(_))), "accepted: {body}");
    }
}

#[test]
fn hash_tracks_parameters_but_not_location() {
    let a = parse(r#"{"schema_version": 1, "experiment": "dyadic"}"#).unwrap();
    let b = parse(r#"{"schema_version": 1, "experiment": "dyadic", "output_dir": "/elsewhere", "memory_budget_bytes": 5}"#).unwrap();
    let explicit = parse(r#"{"schema_version": 1, "experiment": "dyadic", "seed": 0, "params": {"epsilon": 0.1}}"#).unwrap();
    let c = parse(r#"{"schema_version": 1, "experiment": "dyadic", "seed": 1}"#).unwrap();
    assert_eq!(a.hash(), b.hash());
    assert_eq!(a.hash(), explicit.hash());
    assert_ne!(a.hash(), c.hash());
    assert_eq!(a.hash().len(), 64);
}

#[test]
fn exit_code_mapping() {
    assert_eq!(CliError::Schema("x".into()).exit_code(), 2);
    assert_eq!(CliError::Core(Error::Domain("x".into())).exit_code(), 2);
    assert_eq!(CliError::Core(Error::MemoryBudget { required: 2, budget: 1 }).exit_code(), 3);
    assert_eq!(CliError::Core(Error::SizeRefusal { count: 2, limit: 1 }).exit_code(), 3);
    assert_eq!(CliError::Core(Error::Numerical("x".into())).exit_code(), 4);
    assert_eq!(CliError::Core(Error::Divergent("x".into())).exit_code(), 4);
    assert_eq!(CliError::Core(Error::SingularDressing { distance: 0.0, value: 0.0 }).exit_code(), 4);
    let j = CliError::Core(Error::MemoryBudget { required: 2, budget: 1 }).to_json();
    assert_eq!(j["error"]["kind"], "memory_budget");
    assert_eq!(j["error"]["required_bytes"], 2);
}

// ---------------------------------------------------------------- validate

#[test]
fn validate_reports_ok_with_resources() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"schema_version": 1, "experiment": "chaos"}"#);
    let text = validate(&cfg, &Overrides::default());
    assert!(text.starts_with("ok\n"), "{text}");
    assert!(text.contains("propagator N=5"));
    let o = bin().arg("validate").arg(&cfg).output().unwrap();
    assert!(o.status.success());
    assert!(stdout(&o).contains("predicted_peak_bytes: "));
}

#[test]
fn validate_refuses_oversized_grid() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"schema_version": 1, "experiment": "chaos", "params": {"points": 64, "n_list": [6]}}"#,
    );
    let o = bin().arg("validate").arg(&cfg).output().unwrap();
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("refused: memory budget exceeded"), "{text}");
    // 3 arrays of 64^6 complex doubles plus a 64² kernel
    let expected = 3 * 16 * 64u64.pow(6) + 16 * 64 * 64;
    assert!(text.contains(&expected.to_string()), "{text}");
    // no output is produced by validate
    assert!(!dir.path().join("results").exists());
}

#[test]
fn validate_names_valid_experiments() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"schema_version": 1, "experiment": "nope"}"#);
    let o = bin().arg("validate").arg(&cfg).output().unwrap();
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("invalid: "));
    assert!(text.contains("scattering-scan") && text.contains("nls-norms"), "{text}");
    let missing = bin().arg("validate").arg(dir.path().join("absent.json")).output().unwrap();
    assert!(missing.status.success());
    assert!(stdout(&missing).starts_with("invalid: "));
}

#[test]
fn validate_honours_budget_env() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"schema_version": 1, "experiment": "bbgky-residual"}"#);
    let o = bin().arg("validate").arg(&cfg).env(gphl_cli::BUDGET_ENV, "1000").output().unwrap();
    assert!(stdout(&o).starts_with("refused: "), "{}", stdout(&o));
    assert!(stdout(&o).contains("budget_bytes: 1000"));
}

// ---------------------------------------------------------------- run

#[test]
fn zero_potential_scan_is_a_table_of_zeros() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"schema_version": 1, "experiment": "scattering-scan", "potential": {"kind": "zero"}}"#,
    );
    let out = dir.path().join("out");
    let o = run(&cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("scattering-scan.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# config_sha256="));
    assert_eq!(lines.next().unwrap(), "screening,a0,w0_origin,support,residual");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5);
    for r in rows {
        let cells: Vec<&str> = r.split(',').collect();
        // a0, w0(0) and the residual; the support column is the solver's nominal radius
        for i in [1, 2, 4] {
            assert!(cells[i].parse::<f64>().unwrap() == 0.0 && !cells[i].starts_with('-'), "{r}");
        }
    }
}

#[test]
fn outputs_carry_the_config_hash() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"schema_version": 1, "experiment": "born-limit", "workers": 2}"#);
    let out = dir.path().join("out");
    assert!(run(&cfg, &out, &[]).status.success());
    let meta: Value = serde_json::from_str(&fs::read_to_string(out.join("born-limit.json")).unwrap()).unwrap();
    let hash = meta["config_hash"].as_str().unwrap();
    let csv = fs::read_to_string(out.join("born-limit.csv")).unwrap();
    assert!(csv.starts_with(&format!("# config_sha256={hash} experiment=born-limit version=")));
    assert_eq!(meta["workers"], 2);
    assert_eq!(meta["row_count"], 6);
    assert_eq!(meta["columns"][0], "N");
    assert!(meta["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    assert_eq!(meta["config"]["params"]["n_list"][2], 1_000_000);
    let header = csv.lines().nth(1).unwrap();
    assert!(header.starts_with("N,beta,value,residual"));
}

#[test]
fn overrides_change_seed_and_workers() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"schema_version": 1, "experiment": "boardgame", "params": {"q_max_maps": 4, "q_max_classes": 4, "q_max_orbits": 3}}"#);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run(&cfg, &a, &[]).status.success());
    assert!(run(&cfg, &b, &["--seed-override", "9", "--workers", "3"]).status.success());
    let ma: Value = serde_json::from_str(&fs::read_to_string(a.join("boardgame.json")).unwrap()).unwrap();
    let mb: Value = serde_json::from_str(&fs::read_to_string(b.join("boardgame.json")).unwrap()).unwrap();
    assert_ne!(ma["config_hash"], mb["config_hash"]);
    assert_eq!(mb["config"]["seed"], 9);
    assert_eq!(mb["workers"], 3);
}

#[test]
fn boardgame_rows_follow_the_documented_columns() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"schema_version": 1, "experiment": "boardgame", "params": {"q_max_maps": 5, "q_max_classes": 4, "q_max_orbits": 3}}"#);
    let out = dir.path().join("out");
    assert!(run(&cfg, &out, &[]).status.success());
    let csv = fs::read_to_string(out.join("boardgame.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[1].starts_with("k,q,admissible_count,class_count,bound_4q"));
    assert_eq!(lines[2], "1,1,1,1,4,1,true");
    assert_eq!(lines[6], "1,5,120,,1024,120,");
    let meta: Value = serde_json::from_str(&fs::read_to_string(out.join("boardgame.json")).unwrap()).unwrap();
    assert_eq!(meta["summary"]["all_hold"], true);
    assert!(meta["summary"]["canonical_forms"][0]["mu"].is_array());
}

#[test]
fn chaos_rows_per_particle_count_and_time() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"schema_version": 1, "experiment": "chaos",
            "params": {"n_list": [2, 3, 4, 5], "t_final": 0.05, "dt": 0.0025, "report_every": 10, "checkpoints": true}}"#,
    );
    let out = dir.path().join("out");
    let o = run(&cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("chaos.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(2)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(csv.lines().nth(1).unwrap(), "N,t,hs_distance");
    assert_eq!(rows.len(), 4 * 3);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0] as usize, 2 + i / 3);
        assert!((r[1] - 0.025 * (i % 3) as f64).abs() < 1e-12);
        assert!(r[2] >= 0.0 && r[2] < 1.0);
    }
    // product datum: no distance at t = 0
    assert!(rows.iter().filter(|r| r[1] == 0.0).all(|r| r[2] < 1e-12));
    let psi: WaveFunction = read_checkpoint(&mut fs::File::open(out.join("chaos_N3.ckpt")).unwrap()).unwrap();
    assert_eq!(psi.n, 3);
    assert!((psi.time - 0.05).abs() < 1e-12);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"schema_version": 1, "experiment": "nls-norms", "seed": 3, "workers": 2, "params": {"steps": 200, "every": 50, "ensemble": 2}}"#,
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run(&cfg, &a, &[]).status.success());
    assert!(run(&cfg, &b, &[]).status.success());
    assert_eq!(fs::read(a.join("nls-norms.csv")).unwrap(), fs::read(b.join("nls-norms.csv")).unwrap());
    let strip = |p: PathBuf| -> Value {
        let mut v: Value = serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("wall_time_seconds");
        v
    };
    assert_eq!(strip(a.join("nls-norms.json")), strip(b.join("nls-norms.json")));
}

#[test]
fn schema_violation_exits_2_with_error_json() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"schema_version": 1, "experiment": "dyadic", "bogus": true}"#);
    let out = dir.path().join("out");
    let o = run(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = error_json(&o);
    assert_eq!(err["error"]["kind"], "schema");
    assert_eq!(err["error"]["exit_code"], 2);
    let on_disk: Value = serde_json::from_str(&fs::read_to_string(out.join("error.json")).unwrap()).unwrap();
    assert_eq!(on_disk, err);
    assert!(!out.join("dyadic.csv").exists());
}

#[test]
fn memory_refusal_exits_3() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"schema_version": 1, "experiment": "chaos"}"#);
    let out = dir.path().join("out");
    let o = bin()
        .arg("run")
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&out)
        .env(gphl_cli::BUDGET_ENV, "100000")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    let err = error_json(&o);
    assert_eq!(err["error"]["kind"], "memory_budget");
    assert_eq!(err["error"]["budget_bytes"], 100000);
    assert!(!out.join("chaos.csv").exists());
    // the config field is used when the variable is absent
    let cfg2 = write_config(dir.path(), "d.json", r#"{"schema_version": 1, "experiment": "chaos", "memory_budget_bytes": 1000}"#);
    assert_eq!(run(&cfg2, &out, &[]).status.code(), Some(3));
}

#[test]
fn malformed_budget_env_is_a_schema_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"schema_version": 1, "experiment": "dyadic"}"#);
    let o = bin()
        .arg("run")
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.path().join("out"))
        .env(gphl_cli::BUDGET_ENV, "lots")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_dir_from_config() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("from-config");
    let text = format!(
        r#"{{"schema_version": 1, "experiment": "dyadic", "output_dir": {}}}"#,
        serde_json::to_string(target.to_str().unwrap()).unwrap()
    );
    let cfg = write_config(dir.path(), "c.json", &text);
    let o = bin().arg("run").arg(&cfg).output().unwrap();
    assert!(o.status.success());
    assert!(target.join("dyadic.csv").exists());
    assert!(stdout(&o).contains("dyadic.json"));
}

#[test]
fn identity_check_reports_all_three_checks() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"schema_version": 1, "experiment": "identity-check", "params": {"configs": 10, "decomposition_k_max": 2}}"#);
    let out = dir.path().join("out");
    assert!(run(&cfg, &out, &[]).status.success());
    let csv = fs::read_to_string(out.join("identity-check.csv")).unwrap();
    for check in ["wave_operator", "b_decomposition", "b_many_degenerate"] {
        assert!(csv.lines().any(|l| l.starts_with(check)), "{check} missing");
    }
    assert!(csv.lines().skip(2).all(|l| l.ends_with(",true")));
}
