use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadConfig};

/// Default check grid: 41 points on `[-20, 20]`.
pub fn default_omegas() -> Vec<f64> {
    (0..41).map(|i| -20.0 + i as f64).collect()
}

/// Residue-sum closed form of `g1hat(omega) = int F1(e^{-x}) e^{Dx - i x omega} dx`,
/// branch by branch.
pub fn g1hat_closed_form(d: f64, omega: f64) -> Complex64 {
    let i = Complex64::i();
    let a = Complex64::new(d, -omega);
    let ln2 = 2f64.ln();
    if omega > 0.0 {
        PI * i * (a * Complex64::new(ln2, -PI)).exp() / (1.0 - (-2.0 * PI * i * a).exp())
    } else if omega < 0.0 {
        -PI * i * (a * Complex64::new(ln2, PI)).exp() / (1.0 - (2.0 * PI * i * a).exp())
    } else {
        Complex64::new(PI * 2f64.powf(d - 1.0) / (PI * d).sin(), 0.0)
    }
}

/// Quadrature of `g1hat(omega) = int e^{(D - i omega) z} / (e^z + 2) dz`.
///
/// The contour is moved to `Im z = -sign(omega) beta` with
/// `beta = pi |omega| / (1 + |omega|)`, short of the poles at `Im z = +-pi`;
/// the factor `e^{-|omega| beta}` is taken out analytically so the
/// exponentially small values keep their relative accuracy.
pub fn g1hat_quadrature(d: f64, omega: f64, tol: f64) -> Result<Complex64> {
    if !(d > 0.0 && d < 1.0) {
        return Err(Error::Domain(format!("g1hat needs D in (0, 1), got {d}")));
    }
    let sigma = if omega == 0.0 { 0.0 } else { omega.signum() };
    let beta = PI * omega.abs() / (1.0 + omega.abs());
    let rot = Complex64::from_polar(1.0, -sigma * beta);
    // |integrand| <= e^{Ds} on the left, <= 2 e^{(D-1)s} beyond ln 4
    let s_lo = (tol * d).ln() / d;
    let s_hi = (tol * (1.0 - d) / 2.0).ln() / (d - 1.0);
    let phase = -sigma * d * beta;
    let cfg = QuadConfig { abs_tol: tol, rel_tol: tol, max_evals: 5_000_000 };
    let r = integrate(
        |s| {
            let num = Complex64::from_polar((d * s).exp(), phase - omega * s);
            let v = num / (s.exp() * rot + 2.0);
            [v.re, v.im]
        },
        &[s_lo, 0.0, 2f64.ln(), s_hi],
        &cfg,
    )?;
    let scale = Complex64::from_polar((-omega.abs() * beta).exp(), 0.0);
    Ok(scale * Complex64::new(r.value[0], r.value[1]))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourierRow {
    pub omega: f64,
    pub closed_re: f64,
    pub closed_im: f64,
    pub quad_re: f64,
    pub quad_im: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourierReport {
    pub d: f64,
    pub rows: Vec<FourierRow>,
    pub max_rel_error: f64,
    /// `max |g1hat(-omega) - conj g1hat(omega)| / |g1hat(omega)|` over grid pairs.
    pub conjugate_error: f64,
    pub min_abs: f64,
}

pub fn g1hat_check(d: f64, omegas: &[f64], tol: f64) -> Result<FourierReport> {
    let rows: Vec<FourierRow> = omegas
        .par_iter()
        .map(|&omega| {
            let c = g1hat_closed_form(d, omega);
            let q = g1hat_quadrature(d, omega, tol)?;
            Ok(FourierRow {
                omega,
                closed_re: c.re,
                closed_im: c.im,
                quad_re: q.re,
                quad_im: q.im,
                rel_error: (q - c).norm() / c.norm(),
            })
        })
        .collect::<Result<_>>()?;
    let max_rel_error = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    let min_abs = rows.iter().map(|r| Complex64::new(r.quad_re, r.quad_im).norm()).fold(f64::INFINITY, f64::min);
    let mut conjugate_error: f64 = 0.0;
    for r in &rows {
        if let Some(m) = rows.iter().find(|s| s.omega == -r.omega) {
            let a = Complex64::new(r.quad_re, r.quad_im);
            let b = Complex64::new(m.quad_re, m.quad_im);
            conjugate_error = conjugate_error.max((b - a.conj()).norm() / a.norm());
        }
    }
    Ok(FourierReport { d, rows, max_rel_error, conjugate_error, min_abs })
}
