use std::io::Write;

use serde::Serialize;

use super::arithmetic::{detect_arithmetic, ArithmeticStructure, DEFAULT_ARITH_TOL, DEFAULT_K_MAX};
use super::{trusted_limit, AuditConfig};
use crate::error::{Error, Result};
use crate::measure::LadderSpec;
use crate::string_solver::StringProblem;

/// Default number of grid points on `[0, T]`.
pub const DEFAULT_SIGMA_GRID: usize = 256;

/// `sigma(t) ~ tau^{kD} N(tau^{-k} e^t)` and `s(t) = e^{-Dt} sigma(t)` on a
/// grid over one period.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaTable {
    pub depth: usize,
    pub k_lo: u32,
    pub k_hi: u32,
    pub d: f64,
    pub period: f64,
    pub grid: Vec<f64>,
    pub sigma: Vec<f64>,
    pub s: Vec<f64>,
    /// `|sigma_{k_hi}(t) - sigma_{k_hi - 1}(t)|`.
    pub noise: Vec<f64>,
    pub noise_bound: f64,
    #[serde(skip)]
    pub sigma_by_k: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaSummary {
    pub oscillation: f64,
    pub noise_bound: f64,
    pub nonconstant: bool,
    /// `|s(0) - s(T)|`; zero when the grid does not span the period.
    pub period_residual: f64,
    /// Largest decrease of `sigma` between neighbouring grid points.
    pub monotonicity_defect: f64,
}

impl SigmaTable {
    pub fn summary(&self) -> SigmaSummary {
        let max = self.s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = self.s.iter().cloned().fold(f64::INFINITY, f64::min);
        let oscillation = max - min;
        let spans = self.grid.len() > 1
            && self.grid[0] == 0.0
            && (self.grid[self.grid.len() - 1] - self.period).abs() <= 1e-12 * self.period;
        let period_residual = if spans { (self.s[0] - self.s[self.s.len() - 1]).abs() } else { 0.0 };
        let monotonicity_defect = self.sigma.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
        SigmaSummary {
            oscillation,
            noise_bound: self.noise_bound,
            nonconstant: oscillation > 3.0 * self.noise_bound,
            period_residual,
            monotonicity_defect,
        }
    }

    /// Writes `t,sigma,s,noise` CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            t: f64,
            sigma: f64,
            s: f64,
            noise: f64,
        }
        let mut w = csv::Writer::from_writer(out);
        for i in 0..self.grid.len() {
            w.serialize(Row { t: self.grid[i], sigma: self.sigma[i], s: self.s[i], noise: self.noise[i] })?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `n` equispaced points on `[0, period]`, both ends included.
pub fn period_grid(period: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..n).map(|i| if i == n - 1 { period } else { period * i as f64 / (n - 1) as f64 }).collect(),
    }
}

/// Largest `k` with `tau^{-k-1} <= limit`, i.e. `N(tau^{-k} e^t)` trusted on
/// the whole period.
pub fn max_resolvable_k(arith: &ArithmeticStructure, limit: f64) -> Option<u32> {
    let fits = |k: i32| arith.tau.powi(-k - 1) <= limit;
    let mut k = ((limit.ln() / arith.period).floor() - 1.0).max(-1.0) as i32;
    while fits(k + 1) {
        k += 1;
    }
    while k >= 0 && !fits(k) {
        k -= 1;
    }
    (k >= 0).then_some(k as u32)
}

/// Builds the table from `k_lo..=k_hi` at the given depth; `k_hi` must keep
/// `tau^{-k_hi} e^T` inside the trusted range.
pub fn sigma_estimate(
    spec: &LadderSpec,
    depth: usize,
    k_lo: u32,
    k_hi: u32,
    t_grid: &[f64],
    cfg: &AuditConfig,
) -> Result<SigmaTable> {
    if k_hi <= k_lo {
        return Err(Error::Range(format!("sigma needs k_lo < k_hi, got {k_lo}..={k_hi}")));
    }
    let arith = detect_arithmetic(spec, DEFAULT_ARITH_TOL, DEFAULT_K_MAX)?.into_structure()?;
    let problem = StringProblem::neumann(cfg.discretize(spec, depth)?);
    let limit = trusted_limit(&problem, cfg.rel_tol)?;
    let top = arith.tau.powi(-(k_hi as i32) - 1);
    if top > limit {
        return Err(Error::Resolution { lambda: top, limit });
    }
    let (tau, d) = (arith.tau, arith.d);
    let sigma_by_k: Vec<Vec<f64>> = (k_lo..=k_hi)
        .map(|k| {
            let w = tau.powf(k as f64 * d);
            let base = tau.powi(-(k as i32));
            t_grid.iter().map(|&t| Ok(w * problem.count_below(base * t.exp())? as f64)).collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let last = &sigma_by_k[sigma_by_k.len() - 1];
    let prev = &sigma_by_k[sigma_by_k.len() - 2];
    let noise: Vec<f64> = last.iter().zip(prev).map(|(a, b)| (a - b).abs()).collect();
    let noise_bound = noise.iter().cloned().fold(0.0, f64::max);
    let s = last.iter().zip(t_grid).map(|(sig, &t)| (-d * t).exp() * sig).collect();
    Ok(SigmaTable {
        depth,
        k_lo,
        k_hi,
        d,
        period: arith.period,
        grid: t_grid.to_vec(),
        sigma: last.clone(),
        s,
        noise,
        noise_bound,
        sigma_by_k,
    })
}
