use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::LadderSpec;

/// Default bound on the integer exponents tried by [`detect_arithmetic`].
pub const DEFAULT_K_MAX: u32 = 64;

/// Default relative tolerance for matching `ln(rho_i * l_i)` to `k_i * ln(tau)`.
pub const DEFAULT_ARITH_TOL: f64 = 1e-9;

/// `rho_i * (b_i - a_i) = tau^{k_i}` with `gcd(k) = 1`, plus the derived
/// period `T = -ln(tau)` and exponent `D` solving `sum_i tau^{k_i D} = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArithmeticStructure {
    pub tau: f64,
    pub k: Vec<u32>,
    /// Distinct exponents, ascending.
    pub kappa: Vec<u32>,
    /// Multiplicity of each `kappa`.
    pub l: Vec<u32>,
    pub period: f64,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Arithmeticity {
    Arithmetic(ArithmeticStructure),
    NonArithmetic { logs: Vec<f64> },
}

impl Arithmeticity {
    pub fn structure(&self) -> Option<&ArithmeticStructure> {
        match self {
            Arithmeticity::Arithmetic(a) => Some(a),
            Arithmeticity::NonArithmetic { .. } => None,
        }
    }

    pub fn into_structure(self) -> Result<ArithmeticStructure> {
        match self {
            Arithmeticity::Arithmetic(a) => Ok(a),
            Arithmeticity::NonArithmetic { logs } => {
                Err(Error::Structure(format!("ladder is not arithmetic: log scale factors {logs:?}")))
            }
        }
    }
}

pub fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl ArithmeticStructure {
    pub fn new(tau: f64, k: Vec<u32>) -> Result<Self> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::Structure(format!("tau = {tau} must lie in (0, 1)")));
        }
        if k.is_empty() || k.contains(&0) {
            return Err(Error::Structure(format!("exponents {k:?} must be positive")));
        }
        if k.iter().fold(0, |g, &x| gcd(g, x)) != 1 {
            return Err(Error::Structure(format!("exponents {k:?} are not coprime")));
        }
        let d = solve_exponent(tau, &k)?;
        let mut kappa = k.clone();
        kappa.sort_unstable();
        kappa.dedup();
        let l = kappa.iter().map(|&v| k.iter().filter(|&&x| x == v).count() as u32).collect();
        Ok(ArithmeticStructure { tau, k, kappa, l, period: -tau.ln(), d })
    }

    pub fn m(&self) -> usize {
        self.k.len()
    }

    /// `sum_i tau^{k_i D} - 1`, zero up to rounding.
    pub fn exponent_residual(&self) -> f64 {
        self.k.iter().map(|&k| self.tau.powf(k as f64 * self.d)).sum::<f64>() - 1.0
    }
}

/// Root of `sum_i tau^{k_i D} = 1` in `(0, 1)`, by bisection.
pub fn solve_exponent(tau: f64, k: &[u32]) -> Result<f64> {
    let g = |d: f64| k.iter().map(|&ki| tau.powf(ki as f64 * d)).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if !(g(lo) > 0.0 && g(hi) < 0.0) {
        return Err(Error::Structure(format!("sum tau^(k D) - 1 has no sign change on (0, 1) for tau = {tau}, k = {k:?}")));
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Looks for integers `k_i <= k_max` with `ln(rho_i l_i) = k_i ln(tau)`.
///
/// Candidates are generated from the first segment's exponent `k_1`, scanned
/// upwards, so the first consistent vector is the coprime one.
pub fn detect_arithmetic(spec: &LadderSpec, tol: f64, k_max: u32) -> Result<Arithmeticity> {
    let logs: Vec<f64> = (0..spec.m()).map(|i| -spec.scale_factor(i).ln()).collect();
    for k1 in 1..=k_max {
        let t = logs[0] / k1 as f64;
        let k: Option<Vec<u32>> = logs
            .iter()
            .map(|&l| {
                let ki = (l / t).round();
                let ok = ki >= 1.0 && ki <= k_max as f64 && (l - ki * t).abs() <= tol * l;
                ok.then_some(ki as u32)
            })
            .collect();
        let Some(k) = k else { continue };
        if k.iter().fold(0, |g, &x| gcd(g, x)) != 1 {
            continue;
        }
        // least-squares period over all segments
        let num: f64 = k.iter().zip(&logs).map(|(&ki, &l)| ki as f64 * l).sum();
        let den: f64 = k.iter().map(|&ki| (ki as f64).powi(2)).sum();
        let tau = (-num / den).exp();
        return Ok(Arithmeticity::Arithmetic(ArithmeticStructure::new(tau, k)?));
    }
    Ok(Arithmeticity::NonArithmetic { logs })
}
