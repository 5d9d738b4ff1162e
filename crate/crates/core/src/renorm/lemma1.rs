use serde::Serialize;

use super::AuditConfig;
use crate::error::{Error, Result};
use crate::measure::LadderSpec;
use crate::string_solver::StringProblem;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Row {
    pub n: usize,
    pub on_segment: f64,
    pub scaled_full: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Report {
    pub depth: usize,
    pub segment: usize,
    pub scale: f64,
    pub rows: Vec<Lemma1Row>,
    pub max_rel_error: f64,
}

/// Compares `lambda_n(I_i)` at depth `d` with `lambda_n([0,1]) / (rho_i l_i)`
/// at depth `d - 1`, for `n <= n_max`. The depth-`d` atoms on `I_i` are the
/// exact image of the depth-`(d-1)` atoms, so the two agree up to solver
/// tolerance.
pub fn lemma1_audit(
    spec: &LadderSpec,
    depth: usize,
    segment: usize,
    n_max: usize,
    cfg: &AuditConfig,
) -> Result<Lemma1Report> {
    if depth < 2 {
        return Err(Error::Range(format!("lemma1 audit needs depth >= 2, got {depth}")));
    }
    if segment >= spec.m() {
        return Err(Error::Range(format!("segment {segment} out of range for m = {}", spec.m())));
    }
    let (a, b) = spec.segments()[segment];
    let on_segment = StringProblem::neumann(cfg.discretize(spec, depth)?.restrict(a, b));
    let full = StringProblem::neumann(cfg.discretize(spec, depth - 1)?);
    let scale = spec.scale_factor(segment);
    let count = (n_max + 1).min(full.dimension());
    let lhs = on_segment.eigenvalues(count, cfg.rel_tol)?;
    let rhs = full.eigenvalues(count, cfg.rel_tol)?;
    let rows: Vec<Lemma1Row> = lhs
        .iter()
        .zip(&rhs)
        .enumerate()
        .map(|(n, (&l, &r))| {
            let scaled = r / scale;
            let rel_error = if scaled == 0.0 && l == 0.0 { 0.0 } else { (l - scaled).abs() / scaled.abs().max(l.abs()) };
            Lemma1Row { n, on_segment: l, scaled_full: scaled, rel_error }
        })
        .collect();
    let max_rel_error = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    Ok(Lemma1Report { depth, segment, scale, rows, max_rel_error })
}
