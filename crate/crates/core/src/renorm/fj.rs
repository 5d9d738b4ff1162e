use serde::Serialize;

use super::arithmetic::{detect_arithmetic, ArithmeticStructure, DEFAULT_ARITH_TOL, DEFAULT_K_MAX};
use super::{trusted_limit, AuditConfig};
use crate::error::{Error, Result};
use crate::measure::LadderSpec;
use crate::string_solver::StringProblem;

/// Weights making `f_j(t) = C tau^{jD} sum_i C_i N(tau^{-i-j} e^t)`
/// telescope onto the counting defect and converge to `sigma(t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FjCoefficients {
    pub c: f64,
    /// `C_0, ..., C_{kappa_p - 1}`.
    pub c_i: Vec<f64>,
}

impl FjCoefficients {
    /// `f_j(t)` for an arbitrary counting function `count`.
    pub fn f<N: Fn(f64) -> Result<usize>>(&self, arith: &ArithmeticStructure, count: N, j: usize, t: f64) -> Result<f64> {
        let mut sum = 0.0;
        for (i, ci) in self.c_i.iter().enumerate() {
            sum += ci * count(arith.tau.powi(-((i + j) as i32)) * t.exp())? as f64;
        }
        Ok(self.c * arith.tau.powf(j as f64 * arith.d) * sum)
    }
}

pub fn fj_coefficients(arith: &ArithmeticStructure) -> FjCoefficients {
    let (tau, d) = (arith.tau, arith.d);
    let kp = *arith.kappa.last().expect("structure has at least one exponent");
    let c_i: Vec<f64> = (0..kp)
        .map(|i| {
            let r = kp - i;
            let partial: f64 = arith
                .kappa
                .iter()
                .zip(&arith.l)
                .filter(|(&kj, _)| kj < r)
                .map(|(&kj, &lj)| lj as f64 * tau.powf(kj as f64 * d))
                .sum();
            tau.powf(-(r as f64) * d) * (1.0 - partial)
        })
        .collect();
    let norm: f64 = c_i.iter().enumerate().map(|(i, ci)| ci * tau.powf(-(i as f64) * d)).sum();
    FjCoefficients { c: 1.0 / norm, c_i }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FjRow {
    pub t: f64,
    pub lambda: f64,
    pub f_j: f64,
    pub f_j1: f64,
    /// `N(lambda) - sum_i N(lambda, I_i)` one level finer, the exact form of
    /// the normalized difference.
    pub defect: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FjReport {
    pub depth: usize,
    pub j: usize,
    pub coefficients: FjCoefficients,
    pub lambda_range: (f64, f64),
    pub trusted_limit: f64,
    pub rows: Vec<FjRow>,
    /// Largest `|f_{j+1} - f_j - C tau^{jD} (N(lambda) - sum l N(tau^kappa lambda))|`
    /// in units of `C tau^{jD}`.
    pub max_identity_residual: f64,
    /// Largest `|f_{j+1} - f_j| / (C tau^{jD})`.
    pub max_normalized_difference: f64,
    /// `t` values where the exact defect left `[-(m-1), 0]`.
    pub bound_violations: Vec<f64>,
    /// Points where `sum_q l_q N_d(tau^kappa_q lambda)` differed from
    /// `sum_i N_{d+1}(lambda, I_i)`.
    pub lemma1_mismatches: usize,
    /// Points where the depth `d` and `d + 1` counts at `lambda` differ.
    pub discretization_mismatches: usize,
}

impl FjReport {
    pub fn is_ok(&self) -> bool {
        self.bound_violations.is_empty() && self.lemma1_mismatches == 0 && self.max_identity_residual <= 1e-9
    }
}

/// Evaluates `f_j` and `f_{j+1}` on `t_grid` from depth-`depth` counts and
/// checks the telescoping identity and the bound on its right-hand side.
pub fn fj_difference_audit(
    spec: &LadderSpec,
    depth: usize,
    j: usize,
    t_grid: &[f64],
    cfg: &AuditConfig,
) -> Result<FjReport> {
    let arith = detect_arithmetic(spec, DEFAULT_ARITH_TOL, DEFAULT_K_MAX)?.into_structure()?;
    let coefficients = fj_coefficients(&arith);
    let kp = *arith.kappa.last().expect("nonempty") as i32;
    let tau = arith.tau;

    let coarse = StringProblem::neumann(cfg.discretize(spec, depth)?);
    let fine_measure = cfg.discretize(spec, depth + 1)?;
    let halves: Vec<StringProblem> = spec
        .segments()
        .iter()
        .map(|&(a, b)| StringProblem::neumann(fine_measure.restrict(a, b)))
        .collect();
    let fine = StringProblem::neumann(fine_measure);

    let limit = trusted_limit(&coarse, cfg.rel_tol)?;
    let lambda_range = (tau.powi(-kp - j as i32), tau.powi(-kp - j as i32 - 1));
    if lambda_range.1 > limit {
        return Err(Error::Resolution { lambda: lambda_range.1, limit });
    }

    let scale = coefficients.c * tau.powf(j as f64 * arith.d);
    let count = |x: f64| coarse.count_below(x);
    let m = spec.m() as i64;
    let mut report = FjReport {
        depth,
        j,
        coefficients: coefficients.clone(),
        lambda_range,
        trusted_limit: limit,
        rows: Vec::with_capacity(t_grid.len()),
        max_identity_residual: 0.0,
        max_normalized_difference: 0.0,
        bound_violations: Vec::new(),
        lemma1_mismatches: 0,
        discretization_mismatches: 0,
    };
    for &t in t_grid {
        let lambda = lambda_range.0 * t.exp();
        let f_j = coefficients.f(&arith, count, j, t)?;
        let f_j1 = coefficients.f(&arith, count, j + 1, t)?;
        let whole = coarse.count_below(lambda)?;
        let mut scaled = 0;
        for (&kq, &lq) in arith.kappa.iter().zip(&arith.l) {
            scaled += lq as usize * coarse.count_below(tau.powi(kq as i32) * lambda)?;
        }
        let rhs = scale * (whole as f64 - scaled as f64);
        report.max_identity_residual = report.max_identity_residual.max((f_j1 - f_j - rhs).abs() / scale);
        report.max_normalized_difference = report.max_normalized_difference.max((f_j1 - f_j).abs() / scale);

        let fine_whole = fine.count_below(lambda)?;
        let mut fine_parts = 0;
        for h in &halves {
            fine_parts += h.count_below(lambda)?;
        }
        if fine_parts != scaled {
            report.lemma1_mismatches += 1;
        }
        if fine_whole != whole {
            report.discretization_mismatches += 1;
        }
        let defect = fine_whole as i64 - fine_parts as i64;
        if !(-(m - 1)..=0).contains(&defect) {
            report.bound_violations.push(t);
        }
        report.rows.push(FjRow { t, lambda, f_j, f_j1, defect });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients_two_three() {
        let a = ArithmeticStructure::new(0.5, vec![2, 3]).unwrap();
        let c = fj_coefficients(&a);
        let p = |e: f64| 0.5f64.powf(e * a.d);
        assert_eq!(c.c_i.len(), 3);
        assert!((c.c_i[0] - p(-3.0) * (1.0 - p(2.0))).abs() < 1e-14);
        assert!((c.c_i[1] - p(-2.0)).abs() < 1e-14);
        assert!((c.c_i[2] - p(-1.0)).abs() < 1e-14);
        let norm = c.c_i[0] + c.c_i[1] * p(-1.0) + c.c_i[2] * p(-2.0);
        assert!((c.c * norm - 1.0).abs() < 1e-14);
    }

    #[test]
    fn coefficients_single_exponent() {
        let a = ArithmeticStructure::new(1.0 / 6.0, vec![1, 1]).unwrap();
        let c = fj_coefficients(&a);
        assert_eq!(c.c_i.len(), 1);
        assert!((c.c_i[0] - (1.0f64 / 6.0).powf(-a.d)).abs() < 1e-14);
        assert!((c.c * c.c_i[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_holds_for_any_counting_function() {
        // f_{j+1} - f_j telescopes for every N; use a smooth stand-in
        let a = ArithmeticStructure::new(0.5, vec![2, 3, 3]).unwrap();
        let c = fj_coefficients(&a);
        let n = |x: f64| -> Result<usize> { Ok((x.sqrt() * 10.0) as usize) };
        let kp = 3;
        for j in 0..4 {
            for t in [0.0, 0.2, 0.5] {
                let lambda = a.tau.powi(-kp - j as i32) * f64::exp(t);
                let lhs = c.f(&a, n, j + 1, t).unwrap() - c.f(&a, n, j, t).unwrap();
                let mut rhs = n(lambda).unwrap() as f64;
                for (&kq, &lq) in a.kappa.iter().zip(&a.l) {
                    rhs -= lq as f64 * n(a.tau.powi(kq as i32) * lambda).unwrap() as f64;
                }
                rhs *= c.c * a.tau.powf(j as f64 * a.d);
                assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0), "j={j} t={t}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn cantor_audit() {
        let cfg = AuditConfig::default();
        let spec = LadderSpec::classical_cantor();
        let grid: Vec<f64> = (0..64).map(|i| 6f64.ln() * i as f64 / 63.0).collect();
        let r = fj_difference_audit(&spec, 8, 2, &grid, &cfg).unwrap();
        assert!(r.is_ok(), "{r:?}");
        assert!(r.max_normalized_difference <= 1.0 + 1e-9);
        assert!(r.rows.iter().all(|row| row.defect == 0 || row.defect == -1));
    }

    #[test]
    fn resolution_is_enforced() {
        let cfg = AuditConfig::default();
        let err = fj_difference_audit(&LadderSpec::classical_cantor(), 4, 6, &[0.0], &cfg).unwrap_err();
        assert_eq!(err.kind(), "resolution");
    }
}
