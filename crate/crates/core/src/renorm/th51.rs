use serde::Serialize;

use super::{trusted_index, AuditConfig};
use crate::error::{Error, Result};
use crate::measure::LadderSpec;
use crate::string_solver::{BoundaryConditions, StringProblem};

/// Relative slack granted to the eigenvalue comparisons.
const SANDWICH_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichRow {
    pub n: usize,
    pub lambda: f64,
    pub mu: f64,
    /// 1 or 2: the half whose Robin problem brackets `lambda`.
    pub side: u8,
    pub k: usize,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Th51Report {
    pub depth: usize,
    pub d1: f64,
    pub c2: f64,
    pub gamma: f64,
    pub n_max: usize,
    /// `|ln lambda_n - ln mu_n|` for `n = 2..=n_max`.
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// `(N, sum over n in [N, 2N))` for dyadic `N >= 2` with `2N - 1 <= n_max`.
    pub dyadic_blocks: Vec<(usize, f64)>,
    /// Last dyadic block strictly below the previous one.
    pub tail_decreasing: bool,
    pub rows: Vec<SandwichRow>,
    pub violations: Vec<String>,
}

impl Th51Report {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn merged_halves(left: &[f64], right: &[f64]) -> Vec<f64> {
    let mut mu: Vec<f64> = left.iter().chain(right).cloned().collect();
    mu.sort_by(f64::total_cmp);
    mu
}

/// Partial sums of `|ln lambda_n(J) - ln mu_n(J)|` over the trusted index
/// range, with the Robin sandwich `lambda_k(J_i) <= mu_n <= lambda_n <= nu_k^(i)`
/// checked for every `n`.
pub fn th51_logsum(
    spec: &LadderSpec,
    depth: usize,
    d1: f64,
    c2: f64,
    n_max: Option<usize>,
    cfg: &AuditConfig,
) -> Result<Th51Report> {
    if !(c2 > d1) {
        return Err(Error::Precondition(format!("log-sum bound needs c2 > d1, got d1 = {d1}, c2 = {c2}")));
    }
    let mu_measure = cfg.discretize(spec, depth)?;
    let (a, b) = mu_measure.carrier();
    if !(a < d1 && c2 < b) {
        return Err(Error::Precondition(format!("split [{d1}, {c2}] must lie inside ({a}, {b})")));
    }
    if let Some(x) = mu_measure.positions().iter().find(|&&x| d1 <= x && x <= c2) {
        return Err(Error::Precondition(format!("atom at {x} lies in the split gap [{d1}, {c2}]")));
    }
    let gamma = 2.0 / (c2 - d1);
    let left_measure = mu_measure.restrict(a, d1);
    let right_measure = mu_measure.restrict(c2, b);
    if left_measure.is_empty() || right_measure.is_empty() {
        return Err(Error::Precondition("both halves of the split must carry atoms".into()));
    }
    let whole = StringProblem::neumann(mu_measure);
    let left = StringProblem::neumann(left_measure.clone());
    let right = StringProblem::neumann(right_measure.clone());
    let robin_left = StringProblem::new(left_measure, BoundaryConditions::robin(0.0, gamma)?)?;
    let robin_right = StringProblem::new(right_measure, BoundaryConditions::robin(gamma, 0.0)?)?;

    let n_max = n_max.unwrap_or_else(|| trusted_index(whole.dimension())).min(whole.dimension() - 1);
    let tol = cfg.rel_tol;
    let lambda = whole.eigenvalues(n_max + 1, tol)?;
    let left_spec = left.spectrum(tol)?.values;
    let right_spec = right.spectrum(tol)?.values;
    let nu_left = robin_left.spectrum(tol)?.values;
    let nu_right = robin_right.spectrum(tol)?.values;
    let mu = merged_halves(&left_spec, &right_spec);

    let mut violations = Vec::new();
    let le = |x: f64, y: f64| x <= y + SANDWICH_SLACK * y.abs().max(x.abs());
    for n in 0..=n_max {
        if !le(mu[n], lambda[n]) || (n + 1 < mu.len() && !le(lambda[n], mu[n + 1])) {
            violations.push(format!("interlacing mu_n <= lambda_n <= mu_(n+1) fails at n = {n}"));
        }
    }

    let mut rows = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let shot = whole.shoot(lambda[n]);
        let (y1, dy) = shot.eval(d1);
        let (y2, _) = shot.eval(c2);
        // the slope is constant across the massless gap
        let r1 = -dy / y1;
        let r2 = dy / y2;
        let (side, k, lower, upper) = if y1 != 0.0 && (0.0..=gamma).contains(&r1) {
            let k = shot.zeros_in(a, d1);
            (1u8, k, left_spec.get(k), nu_left.get(k))
        } else if y2 != 0.0 && (0.0..=gamma).contains(&r2) {
            let k = shot.zeros_in(c2, b);
            (2u8, k, right_spec.get(k), nu_right.get(k))
        } else {
            violations.push(format!("n = {n}: neither boundary ratio ({r1:e}, {r2:e}) lies in [0, {gamma}]"));
            continue;
        };
        let (Some(&lower), Some(&upper)) = (lower, upper) else {
            violations.push(format!("n = {n}: zero count {k} exceeds the half spectrum"));
            continue;
        };
        if !(le(lower, mu[n]) && le(mu[n], lambda[n]) && le(lambda[n], upper)) {
            violations.push(format!(
                "n = {n}: sandwich {lower:e} <= {:e} <= {:e} <= {upper:e} fails on side {side}",
                mu[n], lambda[n]
            ));
        }
        rows.push(SandwichRow { n, lambda: lambda[n], mu: mu[n], side, k, lower, upper });
    }

    let terms: Vec<f64> = (2..=n_max).map(|n| (lambda[n].ln() - mu[n].ln()).abs()).collect();
    let partial_sums = terms
        .iter()
        .scan(0.0, |acc, t| {
            *acc += t;
            Some(*acc)
        })
        .collect();
    let term = |n: usize| terms[n - 2];
    let mut dyadic_blocks = Vec::new();
    let mut big_n = 2;
    while 2 * big_n - 1 <= n_max {
        dyadic_blocks.push((big_n, (big_n..2 * big_n).map(term).sum()));
        big_n *= 2;
    }
    let tail_decreasing = match dyadic_blocks.as_slice() {
        [.., (_, prev), (_, last)] => last < prev,
        _ => false,
    };

    Ok(Th51Report {
        depth,
        d1,
        c2,
        gamma,
        n_max,
        terms,
        partial_sums,
        dyadic_blocks,
        tail_decreasing,
        rows,
        violations,
    })
}
