//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use fss_core::renorm::arithmetic::{solve_exponent, DEFAULT_ARITH_TOL, DEFAULT_K_MAX};
use fss_core::renorm::renormalization::log_grid;
use fss_core::renorm::sigma::{max_resolvable_k, period_grid, DEFAULT_SIGMA_GRID};
use fss_core::renorm::{
    detect_arithmetic, interlacing_audit, lemma1_audit, renormalization_check, sigma_estimate, th51_logsum,
    trusted_limit, ArithmeticStructure, AuditConfig,
};
use fss_core::small_ball::functional::{
    default_quad, derivative_identity_residual, eta_theta, eta_theta_constant, eps_window, zeta_curve,
};
use fss_core::small_ball::{default_omegas, g1hat_check, g1hat_closed_form, phi_from_spectrum, PhiModel};
use fss_core::{discretize, LadderSpec, Placement, StringProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn cantor() -> LadderSpec {
    LadderSpec::classical_cantor()
}

/// `rho l = (1/4, 1/8)`: `tau = 1/2`, `k = (2, 3)`.
fn two_three() -> LadderSpec {
    LadderSpec::new(vec![(0.0, 0.5), (0.75, 1.0)], vec![0.5, 0.5], vec![false, false]).unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

fn spectral_exponent() -> Outcome {
    let t0 = Instant::now();
    let d_cantor = detect_arithmetic(&cantor(), DEFAULT_ARITH_TOL, DEFAULT_K_MAX)
        .map_err(|e| e.to_string())?
        .into_structure()
        .map_err(|e| e.to_string())?
        .d;
    let d23 = solve_exponent(0.5, &[2, 3]).map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed();
    // Newton on x^2 + x^3 = 1, then D = -log2 x
    let mut x = 0.7f64;
    for _ in 0..50 {
        x -= (x * x + x * x * x - 1.0) / (2.0 * x + 3.0 * x * x);
    }
    let d23_oracle = -x.log2();
    let d_cantor_exact = 2f64.ln() / 6f64.ln();
    let e1 = (d_cantor - d_cantor_exact).abs();
    let e2 = (d23 - d23_oracle).abs();
    check(
        e1 <= 1e-12 && e2 <= 1e-12 && within(elapsed, Duration::from_millis(1)),
        format!("cantor D = {d_cantor:.13} (err {e1:.1e}), (2,3) D = {d23:.13} (err {e2:.1e}), {elapsed:?}"),
    )
}

fn solver_oracle() -> Outcome {
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    let mut problems = 0;
    let mut zero_mismatch = 0;
    for measure in common::corpus() {
        for bc in common::boundary_conditions() {
            let p = StringProblem::new(measure.clone(), bc).map_err(|e| e.to_string())?;
            let got = p.spectrum(1e-13).map_err(|e| e.to_string())?.values;
            let want = common::dense_eigenvalues(&measure, bc);
            if got.len() != want.len() {
                return Err(format!("dimension mismatch {} vs {}", got.len(), want.len()));
            }
            let scale = want.iter().cloned().fold(1.0, f64::max);
            for (n, (g, w)) in got.iter().zip(&want).enumerate() {
                let err = if bc.is_neumann() && n == 0 { g.abs().max(w.abs()) / scale } else { (g - w).abs() / w.abs() };
                worst = worst.max(err);
                if p.eigenfunction_zero_count(n, 1e-13).map_err(|e| e.to_string())? != n {
                    zero_mismatch += 1;
                }
            }
            problems += 1;
        }
    }
    let elapsed = t0.elapsed();
    check(
        worst <= 1e-9 && zero_mismatch == 0 && within(elapsed, Duration::from_secs(1)),
        format!("{problems} problems, max rel err {worst:.1e}, zero-count mismatches {zero_mismatch}, {elapsed:?}"),
    )
}

fn lemma1() -> Outcome {
    let cfg = AuditConfig::default();
    let bound = 10.0 * cfg.rel_tol;
    let mut worst: f64 = 0.0;
    let mut depth6 = Duration::ZERO;
    for depth in 2..=6 {
        let t0 = Instant::now();
        for i in 0..2 {
            for spec in [cantor(), two_three()] {
                let r = lemma1_audit(&spec, depth, i, 50, &cfg).map_err(|e| e.to_string())?;
                worst = worst.max(r.max_rel_error);
            }
        }
        if depth == 6 {
            depth6 = t0.elapsed();
        }
    }
    check(
        worst <= bound && within(depth6, Duration::from_secs(30)),
        format!("max rel err {worst:.1e} (bound {bound:.0e}), depth 6 in {depth6:?}"),
    )
}

fn interlacing() -> Outcome {
    let cfg = AuditConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let t0 = Instant::now();
    let mut splits = 0;
    let mut violations = 0;
    let mut events = 0;
    for spec in [cantor(), two_three()] {
        for _ in 0..12 {
            let depth = rng.gen_range(2..=8);
            let mu = cfg.discretize(&spec, depth).map_err(|e| e.to_string())?;
            let xs = mu.positions();
            let j = rng.gen_range(0..xs.len() - 1);
            let (lo, hi) = (xs[j], xs[j + 1]);
            let mut d1 = lo + (hi - lo) * rng.gen_range(0.01..0.99);
            let mut c2 = lo + (hi - lo) * rng.gen_range(0.01..0.99);
            if d1 > c2 {
                std::mem::swap(&mut d1, &mut c2);
            }
            if rng.gen_bool(0.25) {
                c2 = d1;
            }
            let limit = trusted_limit(&StringProblem::neumann(mu), cfg.rel_tol).map_err(|e| e.to_string())?;
            let r = interlacing_audit(&spec, depth, d1, c2, limit, &cfg).map_err(|e| e.to_string())?;
            violations += r.violations.len();
            events += r.events.len();
            splits += 1;
        }
    }
    let elapsed = t0.elapsed();
    check(
        violations == 0 && splits >= 20 && within(elapsed, Duration::from_secs(120)),
        format!("{splits} splits, {events} events, {violations} violations, {elapsed:?}"),
    )
}

fn renormalization() -> Outcome {
    let cfg = AuditConfig::default();
    let spec = cantor();
    let mut defects = [0usize; 2];
    let mut outside = 0;
    let mut literal_misses = 0;
    for depth in 3..=7 {
        let grid = log_grid(0.5, 6f64.powi(depth as i32 + 1), 1000);
        let r = renormalization_check(&spec, depth, 0, &grid, &cfg).map_err(|e| e.to_string())?;
        defects[0] += r.defect_counts[0];
        defects[1] += r.defect_counts[1];
        outside += r.counting_violations.len();
        // N_d(lambda / tau) - 2 N_{d-1}(lambda) in {0, 1}, as literally stated, fails wherever the defect is 1
        literal_misses += r.defect_counts[1];
    }
    // eigenvalue-level residual across depths where 2n <= trusted index for n <= 20
    let mut residuals: Vec<Vec<f64>> = Vec::new();
    for depth in 8..=12 {
        let r = renormalization_check(&spec, depth, 20, &[], &cfg).map_err(|e| e.to_string())?;
        let row: Option<Vec<f64>> = r.rows.iter().map(|row| row.residual).collect();
        residuals.push(row.ok_or_else(|| format!("residual missing at depth {depth}"))?);
    }
    let mut monotone = true;
    for w in residuals.windows(2) {
        for (a, b) in w[0].iter().zip(&w[1]) {
            monotone &= b < a;
        }
    }
    let first = residuals[0].iter().cloned().fold(0.0, f64::max);
    let last = residuals[residuals.len() - 1].iter().cloned().fold(0.0, f64::max);
    check(
        outside == 0 && monotone,
        format!(
            "5000 grid points: 2N_(d-1)(l) - N_d(l/tau) = 0 at {}, 1 at {}, other {outside} \
             (literal sign fails at {literal_misses}); residual n<=20 decreasing over depths 8-12: {monotone} \
             (max {first:.2e} -> {last:.2e})",
            defects[0], defects[1]
        ),
    )
}

fn sigma() -> Outcome {
    let cfg = AuditConfig::default();
    let spec = cantor();
    let arith = ArithmeticStructure::new(1.0 / 6.0, vec![1, 1]).map_err(|e| e.to_string())?;
    let depth = 12;
    let limit = trusted_limit(&StringProblem::neumann(cfg.discretize(&spec, depth).map_err(|e| e.to_string())?), cfg.rel_tol)
        .map_err(|e| e.to_string())?;
    let k_hi = max_resolvable_k(&arith, limit).ok_or("no resolvable k")?;
    let t = period_grid(arith.period, DEFAULT_SIGMA_GRID);
    let table = sigma_estimate(&spec, depth, k_hi - 2, k_hi, &t, &cfg).map_err(|e| e.to_string())?;
    let s = table.summary();
    check(
        s.period_residual <= s.noise_bound && s.monotonicity_defect <= s.noise_bound && s.nonconstant,
        format!(
            "depth {depth}, k {}..{}: |s(0)-s(T)| = {:.1e}, monotonicity defect {:.1e}, osc(s) = {:.4} vs 3*noise = {:.4}",
            table.k_lo,
            table.k_hi,
            s.period_residual,
            s.monotonicity_defect,
            s.oscillation,
            3.0 * s.noise_bound
        ),
    )
}

fn th51() -> Outcome {
    let cfg = AuditConfig::default();
    let mut notes = Vec::new();
    let mut ok = true;
    for depth in [6, 8, 10] {
        let r = th51_logsum(&cantor(), depth, 1.0 / 3.0, 2.0 / 3.0, None, &cfg).map_err(|e| e.to_string())?;
        let blocks: Vec<f64> = r.dyadic_blocks.iter().map(|b| b.1).collect();
        let decreasing = blocks.len() >= 2 && blocks.windows(2).all(|w| w[1] < w[0]);
        ok &= decreasing && r.is_ok();
        notes.push(format!(
            "d{depth}: {} blocks decreasing={decreasing}, {} sandwich rows, {} violations",
            blocks.len(),
            r.rows.len(),
            r.violations.len()
        ));
    }
    check(ok, notes.join("; "))
}

fn small_ball() -> Outcome {
    let quad = default_quad();
    let d = 2f64.ln() / 6f64.ln();
    let period = 6f64.ln();
    let c = 0.37;
    let flat = PhiModel::constant(c, d, period).map_err(|e| e.to_string())?;
    let (eta_c, theta_c) = eta_theta_constant(c, d);
    let zeta_c = eta_c * theta_c.powf(d / (1.0 - d));
    let mut closed_err: f64 = 0.0;
    for u in [3.0, 50.0, 2e3, 1e6] {
        let (eta, theta) = eta_theta(u, &flat, &quad).map_err(|e| e.to_string())?;
        closed_err = closed_err.max((eta / eta_c - 1.0).abs()).max((theta / theta_c - 1.0).abs());
    }
    let eps: Vec<f64> = [0.02, 0.05, 0.1, 0.3].to_vec();
    let flat_curve = zeta_curve(&eps, &flat, &quad).map_err(|e| e.to_string())?;
    for z in &flat_curve.zeta {
        closed_err = closed_err.max((z / zeta_c - 1.0).abs());
    }

    let spec = cantor();
    let arith = ArithmeticStructure::new(1.0 / 6.0, vec![1, 1]).map_err(|e| e.to_string())?;
    let p = StringProblem::neumann(discretize(&spec, 8, Placement::Midpoint).map_err(|e| e.to_string())?);
    let spectrum = p.spectrum(1e-12).map_err(|e| e.to_string())?;
    let phi = phi_from_spectrum(&spectrum, &arith, 4, 64).map_err(|e| e.to_string())?;
    let mut identity: f64 = 0.0;
    for model in [&flat, &phi] {
        for x in [2.5, 4.0, 6.3] {
            identity = identity.max(derivative_identity_residual(x, 2e-3, model, &quad).map_err(|e| e.to_string())?.abs());
        }
    }
    let (lo, hi) = eps_window(&phi, &quad).map_err(|e| e.to_string())?;
    let n = 24;
    let grid: Vec<f64> = (0..n).map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp()).collect();
    let curve = zeta_curve(&grid, &phi, &quad).map_err(|e| e.to_string())?;
    check(
        closed_err <= 1e-8 && identity <= 1e-4 && curve.period_residual < 1e-3,
        format!(
            "closed-form rel err {closed_err:.1e}, derivative identity {identity:.1e}, \
             zeta period {:.4} residual {:.1e} x mean, osc(zeta) {:.2e}",
            curve.zeta_period,
            curve.period_residual,
            curve.oscillation()
        ),
    )
}

fn fourier() -> Outcome {
    let d = 2f64.ln() / 6f64.ln();
    let r = g1hat_check(d, &default_omegas(), 1e-12).map_err(|e| e.to_string())?;
    let at_zero = g1hat_closed_form(d, 0.0).re;
    let quad_zero = r.rows.iter().find(|row| row.omega == 0.0).map(|row| row.quad_re).ok_or("omega = 0 missing")?;
    let formula = std::f64::consts::PI * 2f64.powf(d - 1.0) / (std::f64::consts::PI * d).sin();
    check(
        r.rows.len() == 41 && r.max_rel_error <= 1e-8 && (quad_zero - formula).abs() <= 1e-8 * formula,
        format!(
            "41 points, max rel err {:.1e}, g1hat(0): quadrature {quad_zero:.10}, closed form {at_zero:.10}",
            r.max_rel_error
        ),
    )
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_fss");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let k23 = dir.path().join("k23.json");
    std::fs::write(&k23, r#"{"segments":[[0,0.5],[0.75,1]],"weights":[0.5,0.5]}"#).map_err(|e| e.to_string())?;
    let k23 = k23.to_str().unwrap().to_string();
    let runs: Vec<Vec<&str>> = vec![
        vec!["validate", "--format", "json"],
        vec!["spectrum", "--depth", "7"],
        vec!["counting", "--depth", "7", "--format", "json"],
        vec!["verify", "interlace", "--depth", "6", "--split", "0.4", "0.6"],
        vec!["verify", "lemma1", "--spec", &k23, "--depth", "5"],
        vec!["sigma", "--depth", "10"],
        vec!["smallball", "--depth", "7", "--grid", "6", "--format", "json"],
        vec!["fourier-check"],
    ];
    let mut bytes = 0;
    for args in &runs {
        let run = || Command::new(bin).args(args).output().map_err(|e| e.to_string());
        let (a, b) = (run()?, run()?);
        if !a.status.success() {
            return Err(format!("fss {} exited {:?}", args.join(" "), a.status.code()));
        }
        if a.stdout != b.stdout || a.stderr != b.stderr {
            return Err(format!("fss {} differs between runs", args.join(" ")));
        }
        bytes += a.stdout.len();
    }
    Ok(format!("{} commands run twice, {bytes} bytes identical", runs.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("spectral exponent", spectral_exponent),
        ("solver vs dense oracle", solver_oracle),
        ("segment scaling exactness", lemma1),
        ("interlacing", interlacing),
        ("renormalization", renormalization),
        ("sigma extraction", sigma),
        ("log-sum bound", th51),
        ("small-ball functionals", small_ball),
        ("fourier check", fourier),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
