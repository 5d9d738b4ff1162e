use std::fs::File;
use std::io::{self, BufWriter, Write};

use fss_core::measure::DEFAULT_ATOM_BUDGET;
use fss_core::renorm::arithmetic::{DEFAULT_ARITH_TOL, DEFAULT_K_MAX};
use fss_core::renorm::renormalization::log_grid;
use fss_core::renorm::sigma::{max_resolvable_k, period_grid, DEFAULT_SIGMA_GRID};
use fss_core::renorm::{self, trusted_limit, ArithmeticStructure, Arithmeticity, AuditConfig};
use fss_core::small_ball::functional::{default_quad, eps_window};
use fss_core::small_ball::{self, default_omegas};
use fss_core::{BoundaryConditions, Error, LadderSpec, StringProblem};
use serde::Serialize;
use serde_json::{json, Value};

use crate::{Audit, Command, Failure, Format, Global, ProblemArgs};

type Run = std::result::Result<(), Failure>;

const FOURIER_TOL: f64 = 1e-8;

pub fn run(g: &Global, cmd: &Command) -> Run {
    let spec = match &g.spec {
        Some(path) => LadderSpec::from_json_file(path)?,
        None => LadderSpec::classical_cantor(),
    };
    let cfg = AuditConfig { placement: g.placement, rel_tol: g.tol, atom_budget: atom_budget()? };
    let depth = g.depth as usize;
    match cmd {
        Command::Validate { require_arithmetic } => validate(g, &spec, *require_arithmetic),
        Command::EvalLadder => {
            let n = g.grid.unwrap_or(101).max(2);
            let ts: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
            let fs = ts.iter().map(|&t| spec.eval_ladder(t, depth)).collect::<fss_core::Result<Vec<f64>>>()?;
            emit_table(g, &["t", "F"], ts.iter().zip(&fs).map(|(t, f)| vec![*t, *f]), json!({ "depth": depth }))
        }
        Command::Spectrum { problem, lambda_max } => {
            let p = build_problem(&spec, depth, problem, &cfg)?;
            let s = match lambda_max {
                Some(l) => p.spectrum_below(*l, g.tol)?,
                None => p.spectrum(g.tol)?,
            };
            let rows = s.values.iter().enumerate().map(|(n, &l)| vec![n as f64, l]);
            emit_table(g, &["n", "lambda"], rows, json!({ "fingerprint": s.fingerprint }))
        }
        Command::Counting { problem, lambda_min, lambda_max } => {
            let p = build_problem(&spec, depth, problem, &cfg)?;
            let hi = match lambda_max {
                Some(l) => *l,
                None => trusted_limit(&p, g.tol)?,
            };
            if !(*lambda_min > 0.0 && hi > *lambda_min) {
                return Err(Error::Range(format!("counting grid needs 0 < lambda_min < lambda_max, got {lambda_min}, {hi}")).into());
            }
            let grid = log_grid(*lambda_min, hi, g.grid.unwrap_or(100));
            let counts = grid.iter().map(|&l| p.count_below(l)).collect::<fss_core::Result<Vec<usize>>>()?;
            let rows = grid.iter().zip(&counts).map(|(&l, &c)| vec![l, c as f64]);
            emit_table(g, &["lambda", "N"], rows, json!({ "fingerprint": p.fingerprint() }))
        }
        Command::Verify { audit } => verify(g, &spec, depth, audit, &cfg),
        Command::Sigma { k_lo, k_hi } => sigma(g, &spec, depth, *k_lo, *k_hi, &cfg),
        Command::Smallball { n_lo } => smallball(g, &spec, depth, *n_lo, &cfg),
        Command::FourierCheck => fourier(g, &spec),
    }
}

fn atom_budget() -> fss_core::Result<usize> {
    match std::env::var("FSS_ATOM_BUDGET") {
        Ok(v) => v.trim().parse().map_err(|_| Error::Range(format!("FSS_ATOM_BUDGET must be a positive integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_ATOM_BUDGET),
    }
}

fn structure(spec: &LadderSpec) -> std::result::Result<ArithmeticStructure, Failure> {
    Ok(renorm::detect_arithmetic(spec, DEFAULT_ARITH_TOL, DEFAULT_K_MAX)?.into_structure()?)
}

fn build_problem(spec: &LadderSpec, depth: usize, args: &ProblemArgs, cfg: &AuditConfig) -> fss_core::Result<StringProblem> {
    let mut measure = cfg.discretize(spec, depth)?;
    if let Some(iv) = &args.interval {
        let (a, b) = (iv[0], iv[1]);
        if !(a < b) {
            return Err(Error::Range(format!("interval needs a < b, got [{a}, {b}]")));
        }
        measure = measure.restrict(a, b);
    }
    let bc = match &args.robin {
        Some(r) => BoundaryConditions::robin(r[0], r[1])?,
        None => BoundaryConditions::NEUMANN,
    };
    StringProblem::new(measure, bc)
}

fn writer(g: &Global) -> io::Result<Box<dyn Write>> {
    Ok(match &g.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(g: &Global, mut value: Value) -> Run {
    value["schema"] = json!(1);
    let mut w = writer(g).map_err(Error::from)?;
    serde_json::to_writer_pretty(&mut w, &value).map_err(Error::from)?;
    writeln!(w).and_then(|_| w.flush()).map_err(Error::from)?;
    Ok(())
}

/// A numeric table as CSV, or as JSON with `meta` merged in.
fn emit_table(g: &Global, header: &[&str], rows: impl Iterator<Item = Vec<f64>>, meta: Value) -> Run {
    let rows: Vec<Vec<f64>> = rows.collect();
    match g.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(writer(g).map_err(Error::from)?);
            w.write_record(header).map_err(Error::from)?;
            for r in &rows {
                w.write_record(r.iter().map(|v| v.to_string())).map_err(Error::from)?;
            }
            w.flush().map_err(Error::from)?;
            Ok(())
        }
        Format::Json => {
            let mut v = meta;
            v["columns"] = json!(header);
            v["rows"] = json!(rows);
            write_json(g, v)
        }
    }
}

/// CSV table to `--out` with the summary on stdout, or everything as one
/// JSON document.
fn emit_with_summary<F>(g: &Global, summary: Value, write_csv: F, full: Value) -> Run
where
    F: FnOnce(Box<dyn Write>) -> fss_core::Result<()>,
{
    match g.format {
        Format::Json => {
            let mut v = full;
            v["summary"] = summary;
            write_json(g, v)
        }
        Format::Csv => {
            write_csv(writer(g).map_err(Error::from)?)?;
            if g.out.is_some() {
                let mut s = summary;
                s["schema"] = json!(1);
                writeln!(io::stdout(), "{s}").map_err(Error::from)?;
            }
            Ok(())
        }
    }
}

fn validate(g: &Global, spec: &LadderSpec, require_arithmetic: bool) -> Run {
    let arith = renorm::detect_arithmetic(spec, DEFAULT_ARITH_TOL, DEFAULT_K_MAX)?;
    let value = json!({
        "spec": spec.to_raw(),
        "m": spec.m(),
        "strict_gap": spec.strict_gap(),
        "arithmeticity": arith,
    });
    write_json(g, value)?;
    match arith {
        Arithmeticity::NonArithmetic { .. } if require_arithmetic => {
            Err(Failure::NonArithmetic("log scale factors are not commensurable".into()))
        }
        _ => Ok(()),
    }
}

fn report<R: Serialize>(g: &Global, audit: &str, r: &R, violations: Vec<String>) -> Run {
    let mut v = serde_json::to_value(r).map_err(Error::from)?;
    v["audit"] = json!(audit);
    v["ok"] = json!(violations.is_empty());
    write_json(g, v)?;
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Violations(violations))
    }
}

fn verify(g: &Global, spec: &LadderSpec, depth: usize, audit: &Audit, cfg: &AuditConfig) -> Run {
    match audit {
        Audit::Lemma1 { n_max } => {
            let reports = (0..spec.m())
                .map(|i| renorm::lemma1_audit(spec, depth, i, *n_max, cfg))
                .collect::<fss_core::Result<Vec<_>>>()?;
            let bound = 10.0 * cfg.rel_tol;
            let violations = reports
                .iter()
                .filter(|r| r.max_rel_error > bound)
                .map(|r| format!("segment {}: relative error {:e} above {bound:e}", r.segment, r.max_rel_error))
                .collect();
            report(g, "lemma1", &json!({ "depth": depth, "bound": bound, "segments": reports }), violations)
        }
        Audit::Interlace { split, lambda_max } => {
            let lambda_max = match lambda_max {
                Some(l) => *l,
                None => trusted_limit(&StringProblem::neumann(cfg.discretize(spec, depth)?), cfg.rel_tol)?,
            };
            let r = renorm::interlacing_audit(spec, depth, split[0], split[1], lambda_max, cfg)?;
            let violations = r.violations.clone();
            report(g, "interlace", &r, violations)
        }
        Audit::Renorm { n_max } => {
            let p = StringProblem::neumann(cfg.discretize(spec, depth)?);
            let grid = log_grid(1.0, trusted_limit(&p, cfg.rel_tol)?, g.grid.unwrap_or(1000));
            let r = renorm::renormalization_check(spec, depth, *n_max, &grid, cfg)?;
            let violations = r.counting_violations.iter().map(|l| format!("counting defect outside {{0, 1}} at lambda = {l:e}")).collect();
            report(g, "renorm", &r, violations)
        }
        Audit::Th51 { split, n_max } => {
            let r = renorm::th51_logsum(spec, depth, split[0], split[1], *n_max, cfg)?;
            let violations = r.violations.clone();
            report(g, "th51", &r, violations)
        }
        Audit::Fj { j } => {
            let arith = structure(spec)?;
            let grid = period_grid(arith.period, g.grid.unwrap_or(64));
            let r = renorm::fj_difference_audit(spec, depth, *j, &grid, cfg)?;
            let mut violations: Vec<String> =
                r.bound_violations.iter().map(|t| format!("defect outside [-(m-1), 0] at t = {t}")).collect();
            if r.lemma1_mismatches > 0 {
                violations.push(format!("{} scaled-count mismatch(es)", r.lemma1_mismatches));
            }
            if r.max_identity_residual > 1e-9 {
                violations.push(format!("identity residual {:e}", r.max_identity_residual));
            }
            report(g, "fj", &r, violations)
        }
    }
}

fn sigma(g: &Global, spec: &LadderSpec, depth: usize, k_lo: Option<u32>, k_hi: Option<u32>, cfg: &AuditConfig) -> Run {
    let arith = structure(spec)?;
    let p = StringProblem::neumann(cfg.discretize(spec, depth)?);
    let limit = trusted_limit(&p, cfg.rel_tol)?;
    let k_hi = match k_hi.or_else(|| max_resolvable_k(&arith, limit)) {
        Some(k) if k >= 1 => k,
        _ => return Err(Error::Resolution { lambda: arith.tau.powi(-2), limit }.into()),
    };
    let k_lo = k_lo.unwrap_or(k_hi.saturating_sub(2));
    let grid = period_grid(arith.period, g.grid.unwrap_or(DEFAULT_SIGMA_GRID));
    let table = renorm::sigma_estimate(spec, depth, k_lo, k_hi, &grid, cfg)?;
    let summary = json!({
        "d": arith.d,
        "period": arith.period,
        "depth": depth,
        "k_lo": k_lo,
        "k_hi": k_hi,
        "summary": table.summary(),
    });
    let full = serde_json::to_value(&table).map_err(Error::from)?;
    emit_with_summary(g, summary, |w| table.write_csv(w), full)
}

fn smallball(g: &Global, spec: &LadderSpec, depth: usize, n_lo: usize, cfg: &AuditConfig) -> Run {
    let arith = structure(spec)?;
    let p = StringProblem::neumann(cfg.discretize(spec, depth)?);
    let spectrum = p.spectrum(cfg.rel_tol)?;
    let n_hi = renorm::trusted_index(spectrum.len());
    let phi = small_ball::phi_from_spectrum(&spectrum, &arith, n_lo, n_hi)?;
    let quad = default_quad();
    let (lo, hi) = eps_window(&phi, &quad)?;
    let n = g.grid.unwrap_or(32).max(2);
    let eps: Vec<f64> = (0..n).map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp()).collect();
    let curve = small_ball::zeta_curve(&eps, &phi, &quad)?;
    let summary = json!({
        "d": arith.d,
        "period": arith.period,
        "zeta_period": curve.zeta_period,
        "eps_window": [lo, hi],
        "mean_zeta": curve.mean_zeta,
        "zeta_oscillation": curve.oscillation(),
        "period_residual": curve.period_residual,
        "phi_noise": phi.noise,
        "phi_range": [phi.min_value(), phi.max_value()],
    });
    let full = json!({ "phi": phi, "curve": curve });
    emit_with_summary(g, summary, |w| curve.write_csv(w), full)
}

fn fourier(g: &Global, spec: &LadderSpec) -> Run {
    let arith = structure(spec)?;
    let omegas = match g.grid {
        Some(n) if n >= 2 => (0..n).map(|i| -20.0 + 40.0 * i as f64 / (n - 1) as f64).collect(),
        _ => default_omegas(),
    };
    let r = small_ball::g1hat_check(arith.d, &omegas, 1e-12)?;
    let summary = json!({
        "d": r.d,
        "max_rel_error": r.max_rel_error,
        "conjugate_error": r.conjugate_error,
        "min_abs": r.min_abs,
        "g1hat_0": small_ball::g1hat_closed_form(arith.d, 0.0).re,
    });
    let full = serde_json::to_value(&r).map_err(Error::from)?;
    let csv_rows = r.rows.clone();
    emit_with_summary(
        g,
        summary,
        |w| {
            let mut w = csv::Writer::from_writer(w);
            for row in &csv_rows {
                w.serialize(row)?;
            }
            w.flush()?;
            Ok(())
        },
        full,
    )?;
    if r.max_rel_error > FOURIER_TOL {
        return Err(Failure::Violations(vec![format!("max relative error {:e} above {FOURIER_TOL:e}", r.max_rel_error)]));
    }
    Ok(())
}
