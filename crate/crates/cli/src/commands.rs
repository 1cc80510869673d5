//! The four subcommands. Each returns the process exit code.

use std::fs;
use std::io::Write;
use std::path::Path;

use ma_couple::analysis::{threshold_bracket, verify_bounds};
use ma_couple::operators::{ProblemSpec, Regime};
use ma_couple::{
    certify, principal_constant, single_equation_eigen, solve_system, Grid, InitialProfile,
    RadialProfile, SolveConfig, Status,
};
use rayon::prelude::*;

use crate::args::{Command, EigenArgs, NumericArgs, SolveArgs, SweepArgs, VerifyArgs};
use crate::error::{exit, CliError};
use crate::export::{profile_csv, sweep_csv, SweepRow};
use crate::record::{CrossCheck, EigenRecord, RunRecord, SCHEMA_VERSION};

pub const GRID_ENV: &str = "MA_COUPLE_GRID";
pub const DEFAULT_GRID: usize = 2048;
/// Allowed `|C - λ₁^{2N}| / C`.
pub const CROSS_CHECK_TOL: f64 = 1e-4;
/// Relative agreement required between stored and recomputed numbers.
pub const REPLAY_TOL: f64 = 1e-9;
/// Relative mismatch `|λμ^{α/N} - C| / C` above which nonexistence holds.
pub const NONEXISTENCE_TOL: f64 = 1e-6;

pub fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Eigen(a) => cmd_eigen(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Verify(a) => cmd_verify(&a),
    }
}

/// Grid size from the flag, then `$MA_COUPLE_GRID`, then the default.
pub fn resolve_grid(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var(GRID_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{GRID_ENV}={s:?} is not a node count"))),
        Err(_) => Ok(DEFAULT_GRID),
    }
}

fn build_config(numeric: &NumericArgs) -> Result<SolveConfig, CliError> {
    let cfg = SolveConfig::new(resolve_grid(numeric.grid)?)?
        .with_tol(numeric.tol)
        .with_max_iter(numeric.max_iter);
    cfg.validate()?;
    Ok(cfg)
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn emit_record(record: &RunRecord, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => record.save(p),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(record.to_json().as_bytes())
                .map_err(|source| CliError::Write {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

pub fn status_exit_code(status: Status) -> u8 {
    match status {
        Status::Converged => exit::OK,
        Status::NonexistenceCertified => exit::NONEXISTENCE,
        Status::MaxIterExceeded | Status::Uncertified | Status::Diverged => exit::NOT_CONVERGED,
    }
}

pub fn cmd_solve(args: &SolveArgs) -> Result<u8, CliError> {
    let spec = ProblemSpec::scaled(args.dim, args.alpha, args.beta, args.lambda, args.mu)?;
    let init: InitialProfile = args.init.parse()?;
    let cfg = build_config(&args.numeric)?
        .with_initial(init)
        .with_trace(args.trace)
        .with_bound_checks(args.check_bounds);
    let result = solve_system(&spec, &cfg)?;
    let record = RunRecord::from_solve(&spec, &cfg, &result).with_timestamp(args.timestamp);
    emit_record(&record, args.out.as_deref())?;

    if let Some(path) = &args.csv {
        match (&result.v1, &result.v2) {
            (Some(v1), Some(v2)) => write_text(path, &profile_csv(v1, v2)?)?,
            _ => eprintln!("no profile pair to export; {} not written", path.display()),
        }
    }
    eprintln!(
        "{} ({}), {} iterations: {}",
        record.status,
        record.regime.as_str(),
        record.iterations,
        record.verdict
    );
    Ok(status_exit_code(result.status))
}

fn cross_check(dim: u32, c: f64, cfg: &SolveConfig) -> Result<CrossCheck, CliError> {
    let lambda1 = single_equation_eigen(dim, cfg)?;
    let rel = (c - lambda1.powi(2 * dim as i32)).abs() / c;
    Ok(CrossCheck {
        lambda1,
        relative_difference: rel,
        tolerance: CROSS_CHECK_TOL,
        passed: rel <= CROSS_CHECK_TOL,
    })
}

fn eigen_record(
    spec: &ProblemSpec,
    cfg: &SolveConfig,
    with_cross: bool,
) -> Result<EigenRecord, CliError> {
    let e = principal_constant(spec.dim, spec.alpha, cfg)?;
    let cross = if with_cross {
        Some(cross_check(spec.dim, e.c, cfg)?)
    } else {
        None
    };
    Ok(EigenRecord {
        summary: e.summary(),
        threshold_product: spec.threshold_product(),
        bracket: threshold_bracket(spec.dim, spec.alpha),
        cross_check: cross,
    })
}

pub fn cmd_eigen(args: &EigenArgs) -> Result<u8, CliError> {
    let n = args.dim as f64;
    let spec = ProblemSpec::new(args.dim, args.alpha, n * n / args.alpha)?;
    if args.cross_check && args.alpha != n {
        return Err(CliError::Usage("--cross-check requires alpha = N".into()));
    }
    let cfg = build_config(&args.numeric)?;
    let eigen = eigen_record(&spec, &cfg, args.cross_check)?;
    let in_bracket = eigen.bracket.contains(eigen.summary.c);
    let cross_ok = eigen.cross_check.is_none_or(|x| x.passed);

    eprintln!("kappa = {:.12e}", eigen.summary.kappa);
    eprintln!("C     = {:.12e}", eigen.summary.c);
    eprintln!("R*    = {:.12e}", eigen.summary.critical_radius);
    eprintln!(
        "bracket [{}, {:.6e}] {}",
        eigen.bracket.lower,
        eigen.bracket.upper,
        if in_bracket { "contains C" } else { "VIOLATED" }
    );
    if let Some(x) = eigen.cross_check {
        eprintln!(
            "lambda1 = {:.12e}, |C - lambda1^(2N)|/C = {:.3e} ({})",
            x.lambda1,
            x.relative_difference,
            if x.passed { "ok" } else { "FAILED" }
        );
    }
    let record = RunRecord::from_eigen(&spec, &cfg, eigen).with_timestamp(args.timestamp);
    emit_record(&record, args.out.as_deref())?;
    Ok(if in_bracket && cross_ok {
        exit::OK
    } else {
        exit::GATE_FAILED
    })
}

fn check_values(name: &str, values: &[f64]) -> Result<(), CliError> {
    if values.is_empty() {
        return Err(CliError::Usage(format!(
            "--{name} needs at least one value"
        )));
    }
    if let Some(bad) = values.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(CliError::Usage(format!(
            "--{name} values must be positive and finite, got {bad}"
        )));
    }
    Ok(())
}

fn sweep_row(dim: u32, alpha: f64, beta: f64, cfg: &SolveConfig) -> SweepRow {
    let mut row = SweepRow {
        alpha,
        beta,
        regime: None,
        status: None,
        v1_norm: None,
        residual: None,
        iterations: None,
        c: None,
        error: None,
    };
    let spec = match ProblemSpec::new(dim, alpha, beta) {
        Ok(s) => s,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.regime = Some(spec.regime());
    match solve_system(&spec, cfg) {
        Ok(r) => {
            row.status = Some(r.status);
            row.v1_norm = r.v1.as_ref().map(RadialProfile::sup_norm);
            row.residual = r.residual_sup;
            row.iterations = Some(r.iterations);
            row.c = r.eigen.as_ref().map(|e| e.c);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Solve every `(α, β)` pair, `α` outer. Row order never depends on `jobs`.
pub fn sweep_rows(
    dim: u32,
    alphas: &[f64],
    betas: &[f64],
    cfg: &SolveConfig,
    jobs: Option<usize>,
) -> Result<Vec<SweepRow>, CliError> {
    let pairs: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| betas.iter().map(move |&b| (a, b)))
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| {
        pairs
            .par_iter()
            .map(|&(a, b)| sweep_row(dim, a, b, cfg))
            .collect()
    }))
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<u8, CliError> {
    check_values("alphas", &args.alphas)?;
    check_values("betas", &args.betas)?;
    ProblemSpec::new(args.dim, 1.0, 1.0)?;
    let cfg = build_config(&args.numeric)?;
    let rows = sweep_rows(args.dim, &args.alphas, &args.betas, &cfg, args.jobs)?;
    let table = sweep_csv(&rows);
    match &args.out {
        Some(p) => write_text(p, &table)?,
        None => print!("{table}"),
    }
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    eprintln!("{} rows, {failed} with errors", rows.len());
    Ok(exit::OK)
}

/// Outcome of one named verification gate.
#[derive(Debug, Clone, PartialEq)]
pub struct GateResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl GateResult {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        GateResult {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn replay(name: &str, stored: f64, fresh: f64) -> GateResult {
    let d = rel_diff(stored, fresh);
    GateResult::new(
        name,
        d <= REPLAY_TOL,
        format!("stored {stored:.10e}, recomputed {fresh:.10e}"),
    )
}

fn verify_pair(
    rec: &RunRecord,
    cfg: &SolveConfig,
    gates: &mut Vec<GateResult>,
) -> Result<(), CliError> {
    let Some(p) = &rec.profiles else {
        gates.push(GateResult::new("profiles", false, "record has no profiles"));
        return Ok(());
    };
    let n = rec.config.grid;
    if p.v1.len() != n || p.v2.len() != n {
        gates.push(GateResult::new(
            "profiles",
            false,
            format!("expected {n} values, got {} and {}", p.v1.len(), p.v2.len()),
        ));
        return Ok(());
    }
    let grid = Grid::uniform(n)?;
    let v1 = RadialProfile::new(grid.clone(), p.v1.clone());
    let v2 = RadialProfile::new(grid, p.v2.clone());
    let (v1, v2) = match (v1, v2) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            gates.push(GateResult::new("profiles", false, e.to_string()));
            return Ok(());
        }
    };
    gates.push(GateResult::new("profiles", true, format!("{n} nodes")));

    let cert = certify(&rec.spec, cfg.tol_fixpoint, &v1, &v2)?;
    let res = &cert.residuals;
    let details = [
        ("nonzero", format!("sup v1 = {:.6e}", v1.sup_norm())),
        (
            "fixed_point",
            format!(
                "{:.3e} vs gate {:.3e}",
                cert.fixed_point_defect, cert.fixed_point_gate
            ),
        ),
        (
            "ode_residual",
            format!(
                "{:.3e} vs gate {:.3e}",
                res.ode_residual_sup, cert.residual_gate
            ),
        ),
        (
            "pde_residual",
            format!(
                "{:.3e} vs gate {:.3e}",
                res.pde_residual_sup, cert.residual_gate
            ),
        ),
        (
            "boundary",
            format!(
                "relative {:.3e}, {:.3e}",
                res.boundary_relative[0], res.boundary_relative[1]
            ),
        ),
        (
            "cone",
            format!(
                "harnack {:.4}, {:.4}",
                cert.cone_v1.harnack_ratio, cert.cone_v2.harnack_ratio
            ),
        ),
    ];
    for (name, detail) in details {
        let failed = cert.failed_gates.iter().any(|g| g == name);
        gates.push(GateResult::new(name, !failed, detail));
    }
    let bounds = verify_bounds(&v1, &rec.spec)?;
    gates.push(GateResult::new(
        "bounds",
        bounds.passes(),
        format!("upper margin {:.3e}", bounds.upper_margin),
    ));
    if let Some(norms) = rec.norms {
        gates.push(replay("recorded_norm", norms.v1, v1.sup_norm()));
    }
    if let Some(r) = rec.residuals {
        gates.push(replay("recorded_residual", r.ode, res.ode_residual_sup));
    }
    Ok(())
}

fn verify_eigen(
    rec: &RunRecord,
    cfg: &SolveConfig,
    gates: &mut Vec<GateResult>,
) -> Result<(), CliError> {
    let Some(stored) = &rec.eigen else {
        gates.push(GateResult::new(
            "eigen",
            false,
            "record has no eigen section",
        ));
        return Ok(());
    };
    let fresh = eigen_record(&rec.spec, cfg, stored.cross_check.is_some())?;
    let c = fresh.summary.c;
    gates.push(replay("threshold_constant", stored.summary.c, c));
    gates.push(replay(
        "critical_radius",
        stored.summary.critical_radius,
        fresh.summary.critical_radius,
    ));
    gates.push(GateResult::new(
        "bracket",
        fresh.bracket.contains(c),
        format!(
            "C = {c:.6e} in [{}, {:.6e}]",
            fresh.bracket.lower, fresh.bracket.upper
        ),
    ));
    if let Some(x) = fresh.cross_check {
        gates.push(GateResult::new(
            "cross_check",
            x.passed,
            format!("{:.3e} vs {:.0e}", x.relative_difference, x.tolerance),
        ));
    }
    if rec.command == "solve" {
        let tp = rec.spec.threshold_product();
        let mismatch = (tp - c).abs() / c;
        gates.push(GateResult::new(
            "nonexistence",
            mismatch > NONEXISTENCE_TOL,
            format!("lambda*mu^(alpha/N) = {tp:.6e}, C = {c:.6e}"),
        ));
    }
    Ok(())
}

/// Recompute every gate a record claims to pass.
pub fn verify_record(rec: &RunRecord) -> Result<Vec<GateResult>, CliError> {
    let mut gates = vec![GateResult::new(
        "schema",
        rec.schema_version == SCHEMA_VERSION,
        format!("version {}", rec.schema_version),
    )];
    if let Err(e) = rec.spec.validate() {
        gates.push(GateResult::new("spec", false, e.to_string()));
        return Ok(gates);
    }
    let hash = rec.expected_hash();
    gates.push(GateResult::new("input_hash", hash == rec.input_hash, hash));
    gates.push(GateResult::new(
        "regime",
        rec.regime == rec.spec.regime(),
        rec.spec.regime().as_str(),
    ));
    let cfg = match rec.config.to_config() {
        Ok(c) => c,
        Err(e) => {
            gates.push(GateResult::new("config", false, e.to_string()));
            return Ok(gates);
        }
    };
    match (rec.command.as_str(), rec.status) {
        ("solve", Status::Converged) => verify_pair(rec, &cfg, &mut gates)?,
        ("solve", Status::NonexistenceCertified) | ("eigen", Status::Converged) => {
            if rec.spec.regime() == Regime::Balanced {
                verify_eigen(rec, &cfg, &mut gates)?;
            } else {
                gates.push(GateResult::new(
                    "regime",
                    false,
                    "constant needs the balanced regime",
                ));
            }
        }
        (cmd, status) => gates.push(GateResult::new(
            "status",
            false,
            format!("{cmd} record with status {status} certifies nothing"),
        )),
    }
    Ok(gates)
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<u8, CliError> {
    let rec = RunRecord::load(&args.record)?;
    let gates = verify_record(&rec)?;
    let mut ok = true;
    for g in &gates {
        println!(
            "{} {}: {}",
            if g.passed { "PASS" } else { "FAIL" },
            g.name,
            g.detail
        );
        ok &= g.passed;
    }
    let failed: Vec<&str> = gates
        .iter()
        .filter(|g| !g.passed)
        .map(|g| g.name.as_str())
        .collect();
    if ok {
        println!("verified: {} gates passed", gates.len());
        Ok(exit::OK)
    } else {
        println!("verification failed: {}", failed.join(", "));
        Ok(exit::GATE_FAILED)
    }
}
