//! The four subcommands. Each writes its artifacts under `output.dir` and
//! prints a short summary on standard output.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use bnsf_shock::shooting::{read_csv, write_csv};
use bnsf_shock::slow_fast::{g_derivative_check, h_derivative_check, DerivReport};
use bnsf_shock::verify::{resolution_check, ResolutionReport};
use bnsf_shock::{
    normalize_phase, shoot, verify_profile, EstimateReport, ShockData, SweepReport, SweepTemplate,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::Failure;

pub const SHOCK_JSON: &str = "shock.json";
pub const SWEEP_JSON: &str = "sweep.json";
pub const DERIVCHECK_JSON: &str = "derivcheck.json";
pub const THREADS_VAR: &str = "BNSF_SHOCK_THREADS";

fn output_path(cfg: &RunConfig, name: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(&cfg.output.dir)
        .map_err(|e| Failure::Io(format!("cannot create {}: {e}", cfg.output.dir.display())))?;
    Ok(cfg.output.dir.join(name))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Io(format!("cannot create {}: {e}", path.display())))
}

fn write_json<T: Serialize>(cfg: &RunConfig, name: &str, value: &T) -> Result<PathBuf, Failure> {
    let path = output_path(cfg, name)?;
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| Failure::Io(e.to_string()))?;
    Ok(path)
}

pub fn profile(cfg: &RunConfig) -> Result<(), Failure> {
    let setup = cfg.setup()?;
    let field = setup.field(cfg.shock.eps)?;
    let p = shoot(&field, &setup.options).and_then(|p| normalize_phase(&p)).map_err(Failure::solver)?;
    let csv_path = output_path(cfg, &cfg.output.profile_csv)?;
    write_csv(&p, create(&csv_path)?).map_err(Failure::solver)?;
    let shock_path = write_json(cfg, SHOCK_JSON, &p.shock)?;
    println!(
        "profile: {} samples, endpoint error {:.2e}, written to {} and {}",
        p.len(),
        p.solver_meta.endpoint_error,
        csv_path.display(),
        shock_path.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    shock: &'a ShockData,
    report: &'a EstimateReport,
    resolution: &'a ResolutionReport,
    passed: bool,
}

pub fn verify(cfg: &RunConfig, csv: Option<&Path>) -> Result<(), Failure> {
    let setup = cfg.setup()?;
    let field = setup.field(cfg.shock.eps)?;
    let p = match csv {
        Some(path) => {
            let f =
                File::open(path).map_err(|e| Failure::Io(format!("cannot open {}: {e}", path.display())))?;
            read_csv(BufReader::new(f), field.shock.clone()).map_err(Failure::solver)?
        }
        None => shoot(&field, &setup.options).and_then(|p| normalize_phase(&p)).map_err(Failure::solver)?,
    };
    let a = field.tail_constant();
    let report = verify_profile(&p, &field.gas, a).map_err(Failure::solver)?;
    let resolution = resolution_check(&p, &field.gas, a, 4).map_err(Failure::solver)?;
    let checks = [
        ("finite constants", report.finite()),
        ("derivative signs", report.sign_ok),
        ("exponential decay envelope", report.derivdecay_ok),
        ("derivative equivalence", report.equivalence_ok),
        ("resolution", resolution.resolved),
    ];
    let passed = checks.iter().all(|(_, ok)| *ok);
    let out = VerifyOutput { shock: &p.shock, report: &report, resolution: &resolution, passed };
    let path = write_json(cfg, &cfg.output.report_json, &out)?;
    for (name, c) in report.constants() {
        println!("{name:>10} = {c:.6e}");
    }
    println!(
        "decay rates {:.6e} / {:.6e} (|A| eps = {:.6e}), report written to {}",
        report.decay_rate_left,
        report.decay_rate_right,
        report.decay_rate_expected,
        path.display()
    );
    if passed {
        Ok(())
    } else {
        let failed: Vec<&str> = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
        Err(Failure::ChecksFailed(format!("checks failed: {}", failed.join(", "))))
    }
}

fn thread_cap() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_VAR) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Config(format!("{THREADS_VAR} must be a positive integer, got `{s}`"))),
        },
        Err(_) => Ok(None),
    }
}

pub fn sweep(cfg: &RunConfig, eps: &[f64]) -> Result<(), Failure> {
    let setup = cfg.setup()?;
    if eps.windows(2).any(|w| w[1] >= w[0] || w[1].is_nan()) {
        return Err(Failure::Config(format!("--eps must be strictly descending, got {eps:?}")));
    }
    for e in eps {
        setup.field(*e)?;
    }
    let threads = thread_cap()?;
    let template = SweepTemplate {
        left: setup.left,
        family: setup.family,
        gas: setup.gas,
        coeffs: setup.coeffs.clone(),
        options: setup.options,
    };
    let report: SweepReport = bnsf_shock::sweep(&template, eps, threads).map_err(Failure::solver)?;
    let path = write_json(cfg, SWEEP_JSON, &report)?;
    for (name, r) in &report.max_ratio {
        println!("{name:>10}: max halving ratio {r:.4}");
    }
    println!("sweep over {} amplitudes written to {}", eps.len(), path.display());
    if report.uniform {
        Ok(())
    } else {
        Err(Failure::ChecksFailed("constants are not uniform in eps".into()))
    }
}

pub fn derivcheck(cfg: &RunConfig) -> Result<(), Failure> {
    let setup = cfg.setup()?;
    let field = setup.field(cfg.shock.eps)?;
    let mut report: DerivReport = h_derivative_check(&field).map_err(Failure::solver)?;
    report.extend(g_derivative_check(&field).map_err(Failure::solver)?);
    let path = write_json(cfg, DERIVCHECK_JSON, &report)?;
    println!(
        "{} entries, max relative error {:.2e} (first order), {:.2e} (second order), written to {}",
        report.entries.len(),
        report.max_rel_err(1),
        report.max_rel_err(2),
        path.display()
    );
    let failed: Vec<String> = report.failures().map(|e| format!("{}[{}]", e.matrix_name, e.entry)).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::ChecksFailed(format!("derivative mismatches: {}", failed.join(", "))))
    }
}
