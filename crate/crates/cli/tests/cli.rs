//! End-to-end runs of the `landau` binary on small grids.

use std::path::Path;
use std::process::{Command, Output};

fn landau(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_landau"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) {
    std::fs::write(dir.join(name), body).unwrap();
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL_EVOLVE: &str = "[grid]\nn = 12\nvmax = 6.0\n[evolve]\nt_end = 0.02\noutputs = 4\n";

#[test]
fn help_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(landau(dir.path(), &["--help"]).status.code(), Some(0));
    let dump = landau(dir.path(), &["--dump-defaults"]);
    assert_eq!(dump.status.code(), Some(0));
    let text = String::from_utf8(dump.stdout).unwrap();
    assert!(text.contains("[evolve]") && text.contains("gamma = 1.0"));
    // the dump parses back as a config
    write(dir.path(), "d.toml", &text);
    let o = landau(dir.path(), &["--config", "d.toml", "--quick", "kernel-check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(landau(dir.path(), &[]).status.code(), Some(2));
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.toml", "[grid]\nn = 12\nsize = 3\n");
    let o = landau(dir.path(), &["--config", "c.toml", "evolve"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("size"), "{}", stderr(&o));
}

#[test]
fn inadmissible_weight_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.toml", "[[weights]]\nkind = \"stretched_exp\"\nr = 0.3\ns = 2.0\np = 2.0\n");
    let o = landau(dir.path(), &["--config", "c.toml", "dissipativity"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn oversized_spectrum_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.toml", "[spectrum]\nn = 64\n");
    let o = landau(dir.path(), &["--config", "c.toml", "spectrum"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("refused"), "{}", stderr(&o));
    assert!(!dir.path().join("out/spectrum/report.json").exists());
}

#[test]
fn quick_spectrum_has_five_invariants() {
    let dir = tempfile::tempdir().unwrap();
    let o = landau(dir.path(), &["--quick", "spectrum"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/spectrum/report.json")).unwrap()).unwrap();
    assert_eq!(report["metrics"]["null_count"], 5);
    let gap = report["metrics"]["lambda0"].as_f64().unwrap();
    assert!(gap > 20.0 && gap < 30.0, "{gap}");
    assert!(dir.path().join("out/spectrum/manifest.json").exists());
}

#[test]
fn maxwellian_start_stays_put() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.toml", &format!("{SMALL_EVOLVE}initial = \"maxwellian\"\n[decay]\nlambda0 = 25.0\n"));
    let o = landau(dir.path(), &["--config", "c.toml", "evolve"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("out/evolve/trace.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "L1(1)").unwrap();
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r[col] == 0.0));
    // nothing to fit on an equilibrium trace
    let o = landau(dir.path(), &["--config", "c.toml", "decay-fit"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn evolve_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.toml", SMALL_EVOLVE);
    let mut runs = Vec::new();
    for out in ["a", "b"] {
        let o = landau(dir.path(), &["--config", "c.toml", "--out", out, "evolve"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let read = |f: &str| std::fs::read(dir.path().join(out).join("evolve").join(f)).unwrap();
        runs.push((read("trace.csv"), read("report.json"), read("final.bin")));
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn kernel_check_passes_with_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let o = landau(dir.path(), &["kernel-check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["j_alpha.csv", "ell.csv", "bar_identities.csv", "phi_asymptotics.csv", "report.json"] {
        assert!(dir.path().join("out/kernel-check").join(f).exists(), "{f}");
    }
}

#[test]
fn polynomial_weight_is_dissipative() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "c.toml",
        "[[weights]]\nkind = \"polynomial\"\nk = 5.0\np = 1.0\n\
         [dissipativity]\nn = 12\nt_end = 0.2\noutputs = 10\nsamples = 2\n",
    );
    let o = landau(dir.path(), &["--config", "c.toml", "dissipativity"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("out/dissipativity/envelope_poly_k5_p1.csv").exists());
}
