use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::renorm::{trusted_index, ArithmeticStructure};
use crate::string_solver::Spectrum;

/// Periodic profile `phi` with `1 / lambda_n ~ phi(ln n) / n^{1/D}`,
/// piecewise linear on one period of length `T D` in `ln n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiModel {
    pub d: f64,
    pub period: f64,
    /// Knot abscissae folded into `[0, T D)`, ascending.
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest deviation of window points outside the knot period from the model.
    pub noise: f64,
    /// Index window `(n_lo, n_hi)` the model was built from.
    pub window: (usize, usize),
    /// Largest eigenvalue used; bounds the `u` range where the model is meaningful.
    pub lambda_max: f64,
}

impl PhiModel {
    /// `phi == c`.
    pub fn constant(c: f64, d: f64, period: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!("constant profile needs c > 0, got {c}")));
        }
        if !(d > 0.0 && d < 1.0 && period > 0.0) {
            return Err(Error::Domain(format!("bad exponent {d} or period {period}")));
        }
        Ok(PhiModel {
            d,
            period,
            knots: vec![0.0],
            values: vec![c],
            noise: 0.0,
            window: (0, 0),
            lambda_max: f64::INFINITY,
        })
    }

    /// Period length `T D` in the `ln n` variable.
    pub fn log_period(&self) -> f64 {
        self.period * self.d
    }

    pub fn eval(&self, x: f64) -> f64 {
        let p = self.log_period();
        let n = self.knots.len();
        if n == 1 {
            return self.values[0];
        }
        let y = x.rem_euclid(p);
        let i = self.knots.partition_point(|&k| k <= y);
        // neighbours across the seam wrap by one period
        let (x0, v0, x1, v1) = if i == 0 {
            (self.knots[n - 1] - p, self.values[n - 1], self.knots[0], self.values[0])
        } else if i == n {
            (self.knots[n - 1], self.values[n - 1], self.knots[0] + p, self.values[0])
        } else {
            (self.knots[i - 1], self.values[i - 1], self.knots[i], self.values[i])
        };
        v0 + (v1 - v0) * (y - x0) / (x1 - x0)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|&v| v == self.values[0])
    }

    /// `psi(x) = phi(ln x) / x^{1/D}`.
    pub fn psi(&self, x: f64) -> f64 {
        self.eval(x.ln()) * x.powf(-1.0 / self.d)
    }

    /// Writes `lnn_mod_TD,phi` CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["lnn_mod_TD", "phi"])?;
        for (x, v) in self.knots.iter().zip(&self.values) {
            w.write_record([x.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Builds the profile from eigenvalues `n_lo..=n_hi` of `spectrum`.
///
/// Knots come from the top period `(n_hi e^{-TD}, n_hi]`; the remaining
/// window points measure how far the data are from periodic.
pub fn phi_from_spectrum(
    spectrum: &Spectrum,
    arith: &ArithmeticStructure,
    n_lo: usize,
    n_hi: usize,
) -> Result<PhiModel> {
    let len = spectrum.len();
    let trusted = trusted_index(len);
    if n_hi > trusted {
        return Err(Error::Resolution {
            lambda: spectrum.values.get(n_hi).copied().unwrap_or(f64::INFINITY),
            limit: spectrum.values.get(trusted).copied().unwrap_or(0.0),
        });
    }
    if n_lo < 1 || n_lo >= n_hi {
        return Err(Error::Range(format!("phi window needs 1 <= n_lo < n_hi, got {n_lo}..={n_hi}")));
    }
    let (d, period) = (arith.d, arith.period);
    let p = period * d;
    let sample = |n: usize| -> Result<f64> {
        let lambda = spectrum.values[n];
        if !(lambda > 0.0) {
            return Err(Error::Domain(format!("eigenvalue {n} is {lambda}, phi needs positive values")));
        }
        Ok((n as f64).powf(1.0 / d) / lambda)
    };
    // margin keeps n_hi e^{-TD} out when it is an integer up to rounding
    let cut = n_hi as f64 * (-p).exp() * (1.0 + 1e-9);
    let mut knots = Vec::new();
    for n in n_lo..=n_hi {
        if n as f64 > cut {
            knots.push(((n as f64).ln().rem_euclid(p), sample(n)?));
        }
    }
    if knots.len() < 2 {
        return Err(Error::Range(format!("top period of window {n_lo}..={n_hi} holds fewer than two indices")));
    }
    knots.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut model = PhiModel {
        d,
        period,
        knots: knots.iter().map(|k| k.0).collect(),
        values: knots.iter().map(|k| k.1).collect(),
        noise: 0.0,
        window: (n_lo, n_hi),
        lambda_max: spectrum.values[n_hi],
    };
    let mut noise: f64 = 0.0;
    for n in n_lo..=n_hi {
        if n as f64 <= cut {
            noise = noise.max((sample(n)? - model.eval((n as f64).ln())).abs());
        }
    }
    model.noise = noise;
    Ok(model)
}
