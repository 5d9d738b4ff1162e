use serde::Serialize;

use super::arithmetic::{detect_arithmetic, DEFAULT_ARITH_TOL, DEFAULT_K_MAX};
use super::{trusted_index, AuditConfig};
use crate::error::{Error, Result};
use crate::measure::LadderSpec;
use crate::string_solver::StringProblem;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenormRow {
    pub n: usize,
    pub tau_lambda_2n: f64,
    /// `lambda_n` one level coarser; agrees with `tau * lambda_2n` exactly.
    pub lambda_n_coarse: f64,
    /// `lambda_n` at the same depth, for the convergence residual.
    pub lambda_n: f64,
    pub exact_rel_error: f64,
    /// `|tau lambda_2n - lambda_n| / lambda_n`; only present when `2n` is
    /// inside the trusted index range.
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenormReport {
    pub depth: usize,
    pub tau: f64,
    pub grid_points: usize,
    /// Occurrences of `2 N_{d-1}(lambda) - N_d(lambda / tau)` equal to 0 and to 1.
    pub defect_counts: [usize; 2],
    /// Grid points where the defect left `{0, 1}`.
    pub counting_violations: Vec<f64>,
    pub rows: Vec<RenormRow>,
    pub max_exact_rel_error: f64,
}

impl RenormReport {
    pub fn is_ok(&self) -> bool {
        self.counting_violations.is_empty()
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
        }
    }
}

/// Two-map ladders with `k = (1, 1)`: the depth-`d` string is two copies of
/// the depth-`(d-1)` string scaled by `tau`, so the whole-interval spectrum
/// interlaces with the doubled coarse spectrum. Checks this on the counting
/// functions over `grid` and on eigenvalues `n = 1..=n_max`.
pub fn renormalization_check(
    spec: &LadderSpec,
    depth: usize,
    n_max: usize,
    grid: &[f64],
    cfg: &AuditConfig,
) -> Result<RenormReport> {
    let arith = detect_arithmetic(spec, DEFAULT_ARITH_TOL, DEFAULT_K_MAX)?.into_structure()?;
    if arith.k != [1, 1] {
        return Err(Error::Structure(format!("renormalization needs m = 2 and k = (1, 1), found k = {:?}", arith.k)));
    }
    if depth < 2 {
        return Err(Error::Range(format!("renormalization check needs depth >= 2, got {depth}")));
    }
    let tau = arith.tau;
    let fine = StringProblem::neumann(cfg.discretize(spec, depth)?);
    let coarse = StringProblem::neumann(cfg.discretize(spec, depth - 1)?);

    let mut defect_counts = [0; 2];
    let mut counting_violations = Vec::new();
    for &lambda in grid {
        let defect = 2 * coarse.count_below(lambda)? as i64 - fine.count_below(lambda / tau)? as i64;
        match defect {
            0 | 1 => defect_counts[defect as usize] += 1,
            _ => counting_violations.push(lambda),
        }
    }

    let n_max = n_max.min(coarse.dimension() - 1);
    let trusted = trusted_index(fine.dimension());
    let rows: Vec<RenormRow> = (1..=n_max)
        .map(|n| -> Result<RenormRow> {
            let tau_lambda_2n = tau * fine.eigenvalue(2 * n, cfg.rel_tol)?;
            let lambda_n_coarse = coarse.eigenvalue(n, cfg.rel_tol)?;
            let lambda_n = fine.eigenvalue(n, cfg.rel_tol)?;
            Ok(RenormRow {
                n,
                tau_lambda_2n,
                lambda_n_coarse,
                lambda_n,
                exact_rel_error: (tau_lambda_2n - lambda_n_coarse).abs() / lambda_n_coarse,
                residual: (2 * n <= trusted).then(|| (tau_lambda_2n - lambda_n).abs() / lambda_n),
            })
        })
        .collect::<Result<_>>()?;
    let max_exact_rel_error = rows.iter().map(|r| r.exact_rel_error).fold(0.0, f64::max);

    Ok(RenormReport {
        depth,
        tau,
        grid_points: grid.len(),
        defect_counts,
        counting_violations,
        rows,
        max_exact_rel_error,
    })
}
