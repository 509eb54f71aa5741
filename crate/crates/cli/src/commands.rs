//! Subcommand implementations. Each one writes its tables, reports and a
//! manifest under `<out>/<subcommand>/` and returns a verdict.

use crate::config::{ConfigError, InitialKind, RunConfig};
use crate::setup;
use crate::suite::Suite;
use landau::diagnostics::report::combine;
use landau::diagnostics::{
    bootstrap_from_trace, entropy_dissipation_monitor, fit_exponential, BootstrapConfig, NormSpec, Report,
    Verdict,
};
use landau::kernel::{
    bar_fields, bracket, ell, j_alpha, j_alpha_bound, phi, phi_far_field, CollisionKernel, PhiParams,
};
use landau::linop::{
    assemble_symmetrized, certify_split, default_target, evolve_semigroup, spectral_gap_of, Generator,
    LinearisedOperator, SpectralReport, SplitParams,
};
use landau::nonlinear::{ckp_check, evolve_with, CollisionOperator, EvolutionTrace};
use landau::vgrid::io::write_snapshot;
use landau::vgrid::{GridField, VelocityGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// Failure modes, mapped to exit codes by [`CliError::exit_code`].
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Run(landau::Error),
}

impl CliError {
    /// `2` for configuration and feasibility errors, `1` for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(e) => match e {
                landau::Error::InvalidParam(_)
                | landau::Error::Domain(_)
                | landau::Error::TooLarge(..)
                | landau::Error::GridMismatch
                | landau::Error::IllConditioned(_)
                | landau::Error::Config(_)
                | landau::Error::Io(_) => 2,
                _ => 1,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(s) => write!(f, "config error: {s}"),
            CliError::Run(landau::Error::TooLarge(n, lim)) => write!(
                f,
                "dense eigensolve refused: {n} unknowns exceed the limit of {lim}; lower spectrum.n"
            ),
            CliError::Run(e) => write!(f, "{e}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<landau::Error> for CliError {
    fn from(e: landau::Error) -> Self {
        CliError::Run(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Run(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Writes files into one subcommand directory and records them for the manifest.
pub struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    pub fn new(root: &Path, command: &str) -> CliResult<Self> {
        let dir = root.join(command);
        fs::create_dir_all(&dir)?;
        Ok(Self { dir, files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn text(&mut self, name: &str, body: &str) -> CliResult<()> {
        fs::write(self.dir.join(name), body)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.text(name, &s)
    }

    pub fn snapshot(&mut self, name: &str, field: &GridField) -> CliResult<()> {
        let file = fs::File::create(self.dir.join(name))?;
        write_snapshot(field, std::io::BufWriter::new(file))?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Writes `manifest.json` with the resolved config, seed and file list.
    pub fn finish(mut self, command: &str, cfg: &RunConfig, verdict: Verdict) -> CliResult<Verdict> {
        let manifest = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": cfg.seed,
            "config": cfg,
            "files": self.files,
            "verdict": verdict,
        });
        self.json("manifest.json", &manifest)?;
        Ok(verdict)
    }
}

fn csv_row(values: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{v:.12e}");
    }
    s.push('\n');
    s
}

fn verdict(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Radii probed for the far-field behaviour of `φ`.
const PHI_RADII: [f64; 12] = [1.0, 2.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 48.0, 64.0, 96.0];
/// `|φ/φ_far − 1|` allowed beyond `V*`.
const PHI_RATIO_TOL: f64 = 0.25;

/// Smallest probed radius beyond which every ratio stays within tolerance.
fn v_star(radii: &[f64], ratios: &[f64]) -> Option<f64> {
    let mut star = None;
    for (r, q) in radii.iter().zip(ratios).rev() {
        if (q - 1.0).abs() <= PHI_RATIO_TOL {
            star = Some(*r);
        } else {
            break;
        }
    }
    star
}

pub fn kernel_check(cfg: &RunConfig) -> CliResult<Verdict> {
    let k = cfg.kernel()?;
    let gamma = k.gamma();
    let mut out = Output::new(&cfg.out, "kernel-check")?;
    let mut verdicts = Vec::new();

    let mut table = String::from("rho,alpha,j,bound,excess\n");
    let mut worst_j = f64::NEG_INFINITY;
    for rho in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0] {
        for alpha in [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0] {
            let j = j_alpha(&[rho, 0.0, 0.0], alpha)?;
            let b = j_alpha_bound(rho, alpha)?;
            let excess = (j - b) / b;
            worst_j = worst_j.max(if alpha == 0.0 || alpha == 2.0 { excess.abs() } else { excess });
            table.push_str(&csv_row(&[rho, alpha, j, b, excess]));
        }
    }
    out.text("j_alpha.csv", &table)?;
    verdicts.push(verdict(worst_j <= 1e-8));

    let mut table = String::from("rho,ell1,ell2,ell1_over_2bracket_gamma,ell2_over_bracket_gamma_plus_2\n");
    let mut ell_min = f64::INFINITY;
    for rho in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
        let (l1, l2) = ell(&[rho, 0.0, 0.0], &k);
        let b = bracket(&[rho, 0.0, 0.0]);
        ell_min = ell_min.min(l1.min(l2));
        table.push_str(&csv_row(&[rho, l1, l2, l1 / (2.0 * b.powf(gamma)), l2 / b.powf(gamma + 2.0)]));
    }
    out.text("ell.csv", &table)?;
    verdicts.push(verdict(ell_min > 0.0));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut table = String::from("v1,v2,v3,abar_trace_err,bbar_err,cbar_err,quadratic_form_err\n");
    let mut ok = true;
    for _ in 0..50 {
        let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-6.0..6.0));
        let xi: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let rho = landau::kernel::norm(&v);
        let bar = bar_fields(&v, &k);
        let tr = bar.a[0][0] + bar.a[1][1] + bar.a[2][2];
        let e_a = (tr - 2.0 * j_alpha(&v, gamma + 2.0)?).abs() / (1.0 + rho).powf(gamma + 2.0);
        let e_b = (0..3).map(|i| (bar.b[i] + bar.ell1 * v[i]).powi(2)).sum::<f64>().sqrt() / (1.0 + rho).powf(gamma + 1.0);
        let e_c = (bar.c + 2.0 * (gamma + 3.0) * j_alpha(&v, gamma)?).abs() / (1.0 + rho).powf(gamma);
        let mut form = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                form += bar.a[i][j] * xi[i] * xi[j];
            }
        }
        let along = landau::kernel::dot(&v, &xi) / rho;
        let xi2 = landau::kernel::dot(&xi, &xi);
        let split = bar.ell1 * along * along + bar.ell2 * (xi2 - along * along);
        let e_q = (form - split).abs() / ((1.0 + rho).powf(gamma + 2.0) * xi2);
        ok &= e_a <= 1e-6 && e_b <= 1e-6 && e_c <= 1e-6 && e_q <= 1e-6;
        table.push_str(&csv_row(&[v[0], v[1], v[2], e_a, e_b, e_c, e_q]));
    }
    out.text("bar_identities.csv", &table)?;
    verdicts.push(verdict(ok));

    let mut phi_rows = Vec::new();
    let mut table = String::from("weight,radius,phi,far_field,ratio\n");
    for (spec, w) in cfg.weights.iter().zip(cfg.weights()?) {
        let params = PhiParams::standard(&w);
        let mut ratios = Vec::new();
        for r in PHI_RADII {
            let v = [r, 0.0, 0.0];
            let p = phi(&w, &params, &v, &k);
            let f = phi_far_field(&w, &k, &v);
            ratios.push(p / f);
            let _ = writeln!(table, "{},{r},{p:.12e},{f:.12e},{:.6}", spec.label(), p / f);
        }
        let star = v_star(&PHI_RADII, &ratios);
        verdicts.push(verdict(star.is_some()));
        phi_rows.push(json!({ "weight": spec, "v_star": star }));
    }
    out.text("phi_asymptotics.csv", &table)?;

    let v = combine(&verdicts);
    let metrics = json!({
        "j_alpha_worst_excess": worst_j,
        "ell_min": ell_min,
        "bar_identities_ok": ok,
        "phi": phi_rows,
    });
    out.json("report.json", &Report::new("kernel-check", &json!({ "gamma": gamma, "seed": cfg.seed, "weights": cfg.weights }), &metrics, v)?)?;
    println!("kernel-check: {:?}; worst J excess {worst_j:.2e}, min ell {ell_min:.4}", v);
    out.finish("kernel-check", cfg, v)
}

fn spectral_report(grid: VelocityGrid, k: CollisionKernel, residuals: bool) -> CliResult<SpectralReport> {
    let op = LinearisedOperator::new(grid, k, SplitParams::none())?;
    let sym = assemble_symmetrized(&op)?;
    Ok(spectral_gap_of(&sym, residuals))
}

pub fn spectrum(cfg: &RunConfig) -> CliResult<Verdict> {
    let k = cfg.kernel()?;
    let s = &cfg.spectrum;
    let grid = VelocityGrid::new(s.n, s.vmax)?;
    if grid.len() > landau::linop::DENSE_LIMIT {
        return Err(landau::Error::TooLarge(grid.len(), landau::linop::DENSE_LIMIT).into());
    }
    let mut out = Output::new(&cfg.out, "spectrum")?;
    let report = spectral_report(grid, k, true)?;
    let mut table = String::from("index,eigenvalue\n");
    for (i, e) in report.leading(s.leading).iter().enumerate() {
        let _ = writeln!(table, "{i},{e:.12e}");
    }
    out.text("eigenvalues.csv", &table)?;
    let mut ok = report.resolved();
    let mut compare = Value::Null;
    if s.compare_n != 0 {
        let fine = spectral_report(VelocityGrid::new(s.compare_n, s.vmax)?, k, false)?;
        let drift = (fine.lambda0 - report.lambda0).abs() / report.lambda0;
        ok &= drift < 0.1;
        compare = json!({ "n": s.compare_n, "lambda0": fine.lambda0, "null_count": fine.null_count, "drift": drift });
    }
    let metrics = json!({
        "lambda0": report.lambda0,
        "null_count": report.null_count,
        "nonnull_negative": report.nonnull_negative,
        "asymmetry": report.asymmetry,
        "gap_tol": report.gap_tol,
        "leading": report.leading(s.leading),
        "residuals": report.residuals,
        "compare": compare,
    });
    let v = verdict(ok);
    let inputs = json!({ "gamma": k.gamma(), "n": s.n, "vmax": s.vmax, "compare_n": s.compare_n });
    out.json("report.json", &Report::new("spectrum", &inputs, &metrics, v)?)?;
    println!("spectrum: null_count {}, lambda0 {:.6}", report.null_count, report.lambda0);
    out.finish("spectrum", cfg, v)
}

/// `λ0` from the config, from an earlier spectrum report in the output
/// directory, or from a fresh eigensolve.
pub fn reference_gap(cfg: &RunConfig) -> CliResult<f64> {
    if let Some(l) = cfg.decay.lambda0.value() {
        return Ok(l);
    }
    let path = cfg.out.join("spectrum").join("report.json");
    if let Ok(text) = fs::read_to_string(&path) {
        let report: Report = serde_json::from_str(&text)?;
        let same = report.inputs["n"] == json!(cfg.spectrum.n)
            && report.inputs["vmax"] == json!(cfg.spectrum.vmax)
            && report.inputs["gamma"] == json!(cfg.kernel.gamma);
        if let (true, Some(l)) = (same, report.metrics["lambda0"].as_f64()) {
            return Ok(l);
        }
    }
    let grid = VelocityGrid::new(cfg.spectrum.n, cfg.spectrum.vmax)?;
    Ok(spectral_report(grid, cfg.kernel()?, false)?.lambda0)
}

pub fn dissipativity(cfg: &RunConfig) -> CliResult<Verdict> {
    let k = cfg.kernel()?;
    let d = &cfg.dissipativity;
    let grid = VelocityGrid::new(d.n, d.vmax)?;
    let base = LinearisedOperator::new(grid, k, SplitParams::none())?;
    let mut out = Output::new(&cfg.out, "dissipativity")?;
    let lambda0 = match cfg.split.target.value() {
        Some(_) => None,
        None => Some(reference_gap(cfg)?),
    };
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    for (spec, w) in cfg.weights.iter().zip(cfg.weights()?) {
        let a = match cfg.split.target.value() {
            Some(a) => a,
            None => default_target(&base, &w, lambda0.expect("computed for auto")),
        };
        let cert = certify_split(&base, &w, &PhiParams::standard(&w), a)?;
        let label = spec.label();
        let mut table = String::from("radius,phi\n");
        for p in &cert.probes {
            table.push_str(&csv_row(&[p.radius, p.phi]));
        }
        out.text(&format!("phi_probes_{label}.csv"), &table)?;
        let Some(split) = cert.suggested.or(if cert.ok { Some(*base.split()) } else { None }) else {
            println!("dissipativity {label}: no (M, R) on the ladder reaches a = {a}");
            verdicts.push(Verdict::Fail);
            rows.push(json!({ "weight": spec, "target": a, "certified": false }));
            continue;
        };
        let op = base.clone().with_split(split);
        let spec_norm = NormSpec::from_weight(&w);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut table = String::from("sample,worst_ratio\n");
        let mut worst = 0.0f64;
        for i in 0..d.samples {
            let f = setup::random_bump(grid, &mut rng);
            let tr = evolve_semigroup(&op, Generator::B, &f, d.t_end, op.stable_dt(), &[spec_norm], d.outputs)?;
            let n0 = tr.norms[0][0];
            let r = tr.times.iter().zip(&tr.norms[0]).map(|(t, x)| x / ((a * t).exp() * n0)).fold(0.0, f64::max);
            worst = worst.max(r);
            let _ = writeln!(table, "{i},{r:.12e}");
        }
        out.text(&format!("envelope_{label}.csv"), &table)?;
        let ok = worst <= d.slack;
        verdicts.push(verdict(ok));
        println!(
            "dissipativity {label}: a = {a}, M = {}, R = {}, worst envelope ratio {worst:.4} ({})",
            split.m(),
            split.r(),
            if ok { "pass" } else { "fail" }
        );
        rows.push(json!({
            "weight": spec,
            "target": a,
            "certified": true,
            "m": split.m(),
            "r": split.r(),
            "worst_margin": cert.worst_margin,
            "envelope_worst_ratio": worst,
            "envelope_ok": ok,
        }));
    }
    let v = combine(&verdicts);
    let inputs = json!({ "gamma": k.gamma(), "grid": [d.n as f64, d.vmax], "split": cfg.split, "seed": cfg.seed, "samples": d.samples, "t_end": d.t_end });
    out.json("report.json", &Report::new("dissipativity", &inputs, &json!({ "weights": rows }), v)?)?;
    out.finish("dissipativity", cfg, v)
}

fn initial_state(cfg: &RunConfig, op: &CollisionOperator) -> CliResult<GridField> {
    Ok(match cfg.evolve.initial {
        InitialKind::Maxwellian => GridField::maxwellian(*op.grid()),
        InitialKind::Anisotropic => setup::anisotropic_gaussian(op.linear().projector(), cfg.evolve.t1)?,
    })
}

fn bootstrap_config(cfg: &RunConfig, lambda0: f64) -> BootstrapConfig {
    let b = &cfg.bootstrap;
    BootstrapConfig { ell: b.ell, k: b.k, threshold: b.threshold, lambda0 }
}

/// Runs the nonlinear evolution and writes trace, snapshots and report.
fn run_evolution(cfg: &RunConfig) -> CliResult<(EvolutionTrace, Verdict)> {
    let k = cfg.kernel()?;
    let op = CollisionOperator::new(cfg.grid.build()?, k)?;
    let f0 = initial_state(cfg, &op)?;
    let mut ecfg = cfg.evolve.evolve_config()?;
    ecfg.norms = vec![NormSpec::plain(1.0).map_err(CliError::Run)?];
    for spec in [NormSpec::l1_poly(cfg.bootstrap.ell)?, NormSpec::l1_poly(cfg.bootstrap.k)?] {
        if !ecfg.norms.contains(&spec) {
            ecfg.norms.push(spec);
        }
    }
    let mut out = Output::new(&cfg.out, "evolve")?;
    let tr = evolve_with(&op, &f0, &ecfg)?;
    out.text("trace.csv", &tr.to_csv())?;
    let mu = GridField::maxwellian(*op.grid());
    let mut ckp_ok = true;
    for (i, h) in tr.snapshots.iter().enumerate() {
        let f = h.add(&mu)?;
        ckp_ok &= ckp_check(&f)?.ok;
        out.snapshot(&format!("snapshot_{i:04}.bin"), &f)?;
    }
    let last = tr.final_state.clone().expect("evolution stores its final state");
    out.snapshot("final.bin", &last)?;
    let ckp_final = ckp_check(&last)?;
    ckp_ok &= ckp_final.ok;
    let h0 = tr.relative_entropy[0].abs().max(f64::MIN_POSITIVE);
    let monotone = tr.relative_entropy.windows(2).all(|w| w[1] <= w[0] + 1e-10 * h0);
    let drift = tr.conservation_drift();
    let monitor = entropy_dissipation_monitor(&tr, k.gamma());
    // small negative values are a resolution artifact; they are reported, not failed on
    let ok = monotone && drift <= 1e-6 && ckp_ok;
    let v = verdict(ok);
    let metrics = json!({
        "dt": tr.dt,
        "steps": tr.steps,
        "conservation_drift": drift,
        "entropy_monotone": monotone,
        "relative_entropy_final": tr.relative_entropy.last(),
        "l1_final": tr.norms[0].1.last(),
        "ckp_final": ckp_final,
        "ckp_all_outputs": ckp_ok,
        "negativity": tr.negativity,
        "entropy_dissipation": monitor,
    });
    let inputs = json!({ "gamma": k.gamma(), "grid": cfg.grid, "evolve": cfg.evolve, "bootstrap": cfg.bootstrap });
    out.json("report.json", &Report::new("evolve", &inputs, &metrics, v)?)?;
    println!(
        "evolve: {} steps of dt {:.3e}; H(f|mu) {:.3e} -> {:.3e}; drift {drift:.1e}",
        tr.steps,
        tr.dt,
        tr.relative_entropy[0],
        tr.relative_entropy.last().copied().unwrap_or(0.0)
    );
    if let Some((t, min)) = tr.negativity {
        eprintln!("warning: f went negative at t = {t} (min f = {min:.2e}); refine the grid");
    }
    let v = out.finish("evolve", cfg, v)?;
    Ok((tr, v))
}

pub fn evolve(cfg: &RunConfig) -> CliResult<Verdict> {
    run_evolution(cfg).map(|(_, v)| v)
}

/// Columns of a trace CSV written by `evolve`.
fn read_trace_csv(path: &Path) -> CliResult<Vec<(String, Vec<f64>)>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| CliError::Config(format!("{} is empty", path.display())))?;
    let mut cols: Vec<(String, Vec<f64>)> = header.split(',').map(|h| (h.to_string(), Vec::new())).collect();
    for (row, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(CliError::Config(format!("{}: row {} has {} fields", path.display(), row + 1, fields.len())));
        }
        for (c, f) in cols.iter_mut().zip(fields) {
            let x = f.parse().map_err(|_| CliError::Config(format!("{}: bad number '{f}'", path.display())))?;
            c.1.push(x);
        }
    }
    Ok(cols)
}

pub fn decay_fit(cfg: &RunConfig) -> CliResult<Verdict> {
    let lambda0 = reference_gap(cfg)?;
    let trace_path = cfg.out.join("evolve").join("trace.csv");
    if !trace_path.exists() {
        run_evolution(cfg)?;
    }
    let cols = read_trace_csv(&trace_path)?;
    let column = |name: &str| cols.iter().find(|(n, _)| n == name).map(|(_, v)| v.clone());
    let times = column("t").ok_or_else(|| CliError::Config("trace has no t column".into()))?;
    let tag = NormSpec::plain(1.0)?.tag();
    let l1 = column(&tag).ok_or_else(|| CliError::Config(format!("trace has no {tag} column")))?;
    let t_end = *times.last().ok_or_else(|| CliError::Config("empty trace".into()))?;
    let window = (cfg.decay.window_start * t_end, t_end);
    let mut out = Output::new(&cfg.out, "decay-fit")?;
    let in_window = times.iter().zip(&l1).filter(|(t, _)| **t >= window.0 && **t <= window.1);
    if in_window.clone().all(|(_, x)| *x <= 0.0) {
        // the trace sits on the equilibrium: there is nothing to fit
        let v = Verdict::Inconclusive;
        let inputs = json!({ "trace": "evolve/trace.csv", "window": window, "lambda0": lambda0 });
        let metrics = json!({ "fit": null, "reason": "distance to equilibrium is zero in the fit window" });
        out.json("report.json", &Report::new("decay-fit", &inputs, &metrics, v)?)?;
        println!("decay-fit: the trace is already at equilibrium -> {v:?}");
        return out.finish("decay-fit", cfg, v);
    }
    let fit = fit_exponential(&times, &l1, Some(window), lambda0)?;

    // the bootstrap reads the weighted series straight from the CSV columns
    let boot_cfg = bootstrap_config(cfg, lambda0);
    let mut trace = EvolutionTrace { times: times.clone(), ..Default::default() };
    for spec in landau::diagnostics::bootstrap_norms(&boot_cfg)? {
        if let Some(v) = column(&spec.tag()) {
            trace.norms.push((spec.tag(), v));
        }
    }
    let boot = bootstrap_from_trace(&trace, &boot_cfg).ok();
    let v = fit.verdict;
    let metrics = json!({ "fit": fit, "lambda0": lambda0, "bootstrap": boot });
    let inputs = json!({ "trace": "evolve/trace.csv", "window": window, "lambda0": lambda0, "bootstrap": cfg.bootstrap });
    out.json("report.json", &Report::new("decay-fit", &inputs, &metrics, v)?)?;
    println!(
        "decay-fit: rate {:.4} vs lambda0 {lambda0:.4} (r2 {:.5}) -> {:?}",
        fit.fitted_rate, fit.r_squared, v
    );
    out.finish("decay-fit", cfg, v)
}

pub fn verify_all(cfg: &RunConfig) -> CliResult<Verdict> {
    let mut out = Output::new(&cfg.out, "verify-all")?;
    let mut suite = Suite::new(cfg.seed);
    let mut outcomes = Vec::new();
    let mut table = String::from("criterion,name,pass\n");
    for id in 1..=10 {
        let o = suite.run(id);
        println!("{}", o.line());
        let _ = writeln!(table, "{},{},{}", o.id, o.name, o.pass);
        outcomes.push(o);
    }
    out.text("criteria.csv", &table)?;
    let v = combine(&outcomes.iter().map(|o| o.verdict()).collect::<Vec<_>>());
    out.json("report.json", &Report::new("verify-all", &json!({ "seed": cfg.seed }), &outcomes, v)?)?;
    out.finish("verify-all", cfg, v)
}
