use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::functions::{big_f, big_f1};
use super::phi::PhiModel;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadConfig};

/// Tail truncation target, relative to `u^D`.
const TAIL_TOL: f64 = 1e-13;

/// Lower end of the declared `u` window.
pub const U_MIN: f64 = 10.0;

pub fn default_quad() -> QuadConfig {
    QuadConfig { abs_tol: 0.0, rel_tol: 1e-11, max_evals: 20_000_000 }
}

/// `2^{D-1} pi / sin(pi D)`, the value of `int_0^inf w^{D-1} / (w + 2) dw`.
pub fn beta_constant(d: f64) -> f64 {
    2f64.powf(d - 1.0) * PI / (PI * d).sin()
}

/// Closed forms for `phi == c`: `(eta, theta)`.
pub fn eta_theta_constant(c: f64, d: f64) -> (f64, f64) {
    let k = c.powf(d) * beta_constant(d);
    ((1.0 - d) * k, d * k)
}

/// `(eta(ln u), theta(ln u))`, from
/// `eta u^D = int_0^inf F(u psi(x)) dx` and the same with `F1` for `theta`.
///
/// Integrates in `v = ln x` with breakpoints at every knot of `phi`, and
/// truncates where analytic tail bounds fall below `1e-13 u^D`.
pub fn eta_theta(u: f64, phi: &PhiModel, quad: &QuadConfig) -> Result<(f64, f64)> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::Domain(format!("eta/theta need u > 0, got {u}")));
    }
    let d = phi.d;
    let scale = u.powf(d);
    let eps = TAIL_TOL * scale;
    let a_max = (u * phi.max_value()).ln();
    // uphi e^{-v/D} = 1 here
    let centre = d * (u * phi.min_value()).ln();

    // F <= ln(3X) / 2 for X >= 1 and F1 <= 1/2 on the left
    let left_tail = |v: f64| 0.5 * (3f64.ln() + a_max - v / d + 1.0 / d) * v.exp();
    let mut v_lo = centre - 1.0;
    while left_tail(v_lo) > eps {
        v_lo -= 1.0;
    }
    // F <= F1 <= X for X <= 1 on the right
    let right_tail = |v: f64| (a_max + (1.0 - 1.0 / d) * v).exp() / (1.0 / d - 1.0);
    let mut v_hi = d * a_max + 1.0;
    while right_tail(v_hi) > eps {
        v_hi += 1.0;
    }

    let mut points = vec![v_lo];
    if phi.knots.len() > 1 {
        let p = phi.log_period();
        let first = (v_lo / p).floor() as i64;
        let last = (v_hi / p).ceil() as i64;
        for j in first..=last {
            for &k in &phi.knots {
                let x = k + j as f64 * p;
                if x > v_lo && x < v_hi {
                    points.push(x);
                }
            }
        }
        points.sort_by(f64::total_cmp);
    }
    points.push(v_hi);

    let r = integrate(
        |v| {
            let x = u * phi.eval(v) * (-v / d).exp();
            let w = v.exp();
            [big_f(x) * w, big_f1(x) * w]
        },
        &points,
        quad,
    )?;
    Ok((r.value[0] / scale, r.value[1] / scale))
}

/// Residual of `eta' + D eta + theta' - (1 - D) theta = 0` at `x = ln u`,
/// derivatives by central differences of step `h`.
pub fn derivative_identity_residual(x: f64, h: f64, phi: &PhiModel, quad: &QuadConfig) -> Result<f64> {
    let (e0, t0) = eta_theta(x.exp(), phi, quad)?;
    let (ep, tp) = eta_theta((x + h).exp(), phi, quad)?;
    let (em, tm) = eta_theta((x - h).exp(), phi, quad)?;
    let de = (ep - em) / (2.0 * h);
    let dt = (tp - tm) / (2.0 * h);
    Ok(de + phi.d * e0 + dt - (1.0 - phi.d) * t0)
}

/// Solves `r = u^{D-1} theta(ln u)` for `u`.
///
/// Works in `x = ln u` on `g(x) = (D-1) x + ln theta(x) - ln r`, which must
/// decrease; the bracket is checked for monotonicity before returning.
pub fn u_of_r(r: f64, phi: &PhiModel, quad: &QuadConfig) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("u(r) needs r > 0, got {r}")));
    }
    let d = phi.d;
    let g = |x: f64| -> Result<f64> {
        let (_, theta) = eta_theta(x.exp(), phi, quad)?;
        Ok((d - 1.0) * x + theta.ln() - r.ln())
    };
    // start from the constant-profile inversion with the mean level
    let (_, theta_c) = eta_theta_constant(0.5 * (phi.max_value() + phi.min_value()), d);
    let guess = (r / theta_c).ln() / (d - 1.0);
    let (mut lo, mut hi) = (guess - 0.5, guess + 0.5);
    let (mut g_lo, mut g_hi) = (g(lo)?, g(hi)?);
    let mut grow = 1.0;
    while g_lo <= 0.0 {
        grow *= 2.0;
        lo -= grow;
        g_lo = g(lo)?;
    }
    while g_hi >= 0.0 {
        grow *= 2.0;
        hi += grow;
        g_hi = g(hi)?;
    }
    let (bracket_lo, bracket_hi, g_bracket_lo, g_bracket_hi) = (lo, hi, g_lo, g_hi);

    // Illinois false position
    let mut side = 0;
    let mut x = lo;
    for _ in 0..200 {
        x = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let gx = g(x)?;
        if gx == 0.0 || hi - lo <= 1e-14 * x.abs().max(1.0) {
            break;
        }
        if gx > 0.0 {
            lo = x;
            g_lo = gx;
            if side == 1 {
                g_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = x;
            g_hi = gx;
            if side == -1 {
                g_lo *= 0.5;
            }
            side = -1;
        }
        if (hi - lo).abs() <= 1e-13 * x.abs().max(1.0) {
            break;
        }
    }

    let samples = 8;
    let mut prev = g_bracket_lo;
    for i in 1..=samples {
        let xi = bracket_lo + (bracket_hi - bracket_lo) * i as f64 / samples as f64;
        let gi = if i == samples { g_bracket_hi } else { g(xi)? };
        if gi > prev {
            return Err(Error::NonMonotone {
                lo: bracket_lo.exp(),
                hi: bracket_hi.exp(),
                f_lo: g_bracket_lo,
                f_hi: g_bracket_hi,
            });
        }
        prev = gi;
    }
    Ok(x.exp())
}

/// `zeta = eta theta^{D/(1-D)}` and `ln P ~ -eps^{-2D/(1-D)} zeta` sampled
/// along `eps_grid`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallBallCurve {
    pub d: f64,
    /// Period of `zeta` in `ln(1/eps)`: `T (1 - D) / 2`.
    pub zeta_period: f64,
    pub eps: Vec<f64>,
    pub u: Vec<f64>,
    pub eta: Vec<f64>,
    pub theta: Vec<f64>,
    pub zeta: Vec<f64>,
    pub ln_p: Vec<f64>,
    pub mean_zeta: f64,
    /// `max |zeta(x + period) - zeta(x)| / mean(zeta)` over the grid.
    pub period_residual: f64,
}

impl SmallBallCurve {
    pub fn oscillation(&self) -> f64 {
        let max = self.zeta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = self.zeta.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min
    }

    /// Writes `eps,u,eta,theta,zeta,lnP` CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["eps", "u", "eta", "theta", "zeta", "lnP"])?;
        for i in 0..self.eps.len() {
            w.write_record(
                [self.eps[i], self.u[i], self.eta[i], self.theta[i], self.zeta[i], self.ln_p[i]].map(|v| v.to_string()),
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `eps` range whose `u(eps^2)` stays in `[U_MIN, lambda_max]`.
pub fn eps_window(phi: &PhiModel, quad: &QuadConfig) -> Result<(f64, f64)> {
    let u_max = phi.lambda_max.min(1e12);
    if !(u_max > U_MIN) {
        return Err(Error::Range(format!("profile only covers u up to {u_max}")));
    }
    let r_at = |u: f64| -> Result<f64> { Ok(u.powf(phi.d - 1.0) * eta_theta(u, phi, quad)?.1) };
    Ok((r_at(u_max)?.sqrt(), r_at(U_MIN)?.sqrt()))
}

fn zeta_at(eps: f64, phi: &PhiModel, quad: &QuadConfig) -> Result<[f64; 5]> {
    let d = phi.d;
    let u = u_of_r(eps * eps, phi, quad)?;
    let (eta, theta) = eta_theta(u, phi, quad)?;
    let zeta = eta * theta.powf(d / (1.0 - d));
    let ln_p = -eps.powf(-2.0 * d / (1.0 - d)) * zeta;
    Ok([u, eta, theta, zeta, ln_p])
}

/// Samples the curve on `eps_grid` and measures the periodicity of `zeta` at
/// the points whose shift by one period stays inside the grid's range.
pub fn zeta_curve(eps_grid: &[f64], phi: &PhiModel, quad: &QuadConfig) -> Result<SmallBallCurve> {
    if eps_grid.is_empty() || eps_grid.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::Domain("eps grid must be nonempty with positive finite entries".into()));
    }
    let d = phi.d;
    let zeta_period = phi.period * (1.0 - d) / 2.0;
    let rows: Vec<[f64; 5]> = eps_grid.par_iter().map(|&e| zeta_at(e, phi, quad)).collect::<Result<_>>()?;
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
    let zeta = col(3);
    let mean_zeta = zeta.iter().sum::<f64>() / zeta.len() as f64;

    // x = ln(1/eps) + period  <=>  eps e^{-period}
    let x_min = eps_grid.iter().map(|e| -e.ln()).fold(f64::INFINITY, f64::min);
    let x_max = eps_grid.iter().map(|e| -e.ln()).fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<(f64, f64)> = eps_grid
        .iter()
        .zip(&zeta)
        .filter(|(e, _)| -e.ln() + zeta_period <= x_max && -e.ln() >= x_min)
        .map(|(&e, &z)| (e * (-zeta_period).exp(), z))
        .collect();
    let residuals: Vec<f64> = shifted
        .par_iter()
        .map(|&(e, z)| Ok((zeta_at(e, phi, quad)?[3] - z).abs()))
        .collect::<Result<_>>()?;
    let period_residual = residuals.iter().cloned().fold(0.0, f64::max) / mean_zeta;

    Ok(SmallBallCurve {
        d,
        zeta_period,
        eps: eps_grid.to_vec(),
        u: col(0),
        eta: col(1),
        theta: col(2),
        zeta,
        ln_p: col(4),
        mean_zeta,
        period_residual,
    })
}
