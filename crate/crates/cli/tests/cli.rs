use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_impatient"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("impatient-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

const EXCURSIONS: &str = r#"
experiment = "excursions"
seed = 11

[kernel]
kind = "drift"
domain = "half-line"
right = { kind = "constant", b = -0.5 }

[schedule]
kind = "power"
alpha = 2.0

[budget]
replicas = 2000
step_cap = 100000
"#;

#[test]
fn missing_seed_is_a_config_error() {
    let out = run(&["phase-sweep"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn bad_config_exits_two() {
    let dir = scratch("bad");
    let p = dir.join("bad.toml");
    std::fs::write(&p, EXCURSIONS.replace("b = -0.5", "b = -1.5")).unwrap();
    let out = run(&["excursions", "--config", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["classify", "--config", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn excursions_are_byte_identical_across_runs() {
    let dir = scratch("det");
    let cfg = dir.join("ex.toml");
    std::fs::write(&cfg, EXCURSIONS).unwrap();
    let mut outputs = Vec::new();
    for fmt in ["json", "json", "csv", "csv"] {
        let o = dir.join(format!("out.{fmt}"));
        let st = run(&["excursions", "--config", cfg.to_str().unwrap(), "--format", fmt, "--out", o.to_str().unwrap()]);
        assert_eq!(st.status.code(), Some(0), "{}", String::from_utf8_lossy(&st.stderr));
        outputs.push(std::fs::read(&o).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[2], outputs[3]);
    let csv = String::from_utf8(outputs[2].clone()).unwrap();
    assert!(csv.starts_with("seed,config_hash,statistic,value,stderr,analytic,z\n11,"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn seed_flag_overrides_config() {
    let dir = scratch("seed");
    let cfg = dir.join("ex.toml");
    std::fs::write(&cfg, EXCURSIONS).unwrap();
    let a = run(&["excursions", "--config", cfg.to_str().unwrap(), "--seed", "12"]);
    let b = run(&["excursions", "--config", cfg.to_str().unwrap()]);
    assert_ne!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["seed"], 12);
    assert_eq!(v["config"]["seed"], 12);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn classify_prints_closed_form_verdict() {
    let dir = scratch("classify");
    let cfg = dir.join("c.toml");
    std::fs::write(
        &cfg,
        "experiment = \"classify\"\nseed = 1\n[kernel]\nkind = \"lattice\"\nlattice = \"z1\"\n[schedule]\nkind = \"power\"\nalpha = 5.0\n",
    )
    .unwrap();
    let out = run(&["classify", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().contains(",null-recurrent,closed-form,"), "{text}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn mismatched_subcommand_is_rejected() {
    let dir = scratch("mismatch");
    let cfg = dir.join("ex.toml");
    std::fs::write(&cfg, EXCURSIONS).unwrap();
    assert_eq!(run(&["range", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn trace_is_written() {
    let dir = scratch("trace");
    let cfg = dir.join("ex.toml");
    std::fs::write(&cfg, EXCURSIONS.replace("replicas = 2000", "replicas = 10")).unwrap();
    let tr = dir.join("trace.csv");
    let out = run(&["excursions", "--config", cfg.to_str().unwrap(), "--trace", tr.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&tr).unwrap();
    assert!(text.starts_with("step,vertex,actual_time\n0,0,0\n"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn uniform_test_small() {
    let dir = scratch("uniform");
    let cfg = dir.join("u.toml");
    std::fs::write(
        &cfg,
        "experiment = \"uniform-test\"\nseed = 5\n[uniform]\nn = 1000\nreplicas = 20000\ncontrol_n = 1000\ncontrol_replicas = 2000\n",
    )
    .unwrap();
    let out = run(&["uniform-test", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains(",control_fails_bound,true,"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn shipped_configs_validate() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            impatient::harness::ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 6);
}
