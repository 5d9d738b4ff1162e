//! Eigenvalues of the string `-y'' = lambda * mu * y` with an atomic weight.
//!
//! Between atoms a solution is linear; crossing an atom at `x` with mass `m`
//! the slope jumps by `-lambda * m * y(x)`. Propagating `(y, y')` from the
//! left end and counting sign changes gives the number of eigenvalues below
//! `lambda` exactly: the sign pattern of consecutive nodal values is the
//! inertia of the tridiagonal pencil `K - lambda M`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::AtomicMeasure;

/// Smallest relative tolerance accepted by the bisection routines.
pub const MIN_REL_TOL: f64 = 64.0 * f64::EPSILON;

/// Default relative tolerance for eigenvalue bisection.
pub const DEFAULT_REL_TOL: f64 = 1e-12;

const ABS_FLOOR: f64 = 1e-290;

/// Robin coefficients in `y'(a) - g0 y(a) = 0`, `y'(b) + g1 y(b) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConditions {
    pub gamma0: f64,
    pub gamma1: f64,
}

impl BoundaryConditions {
    pub const NEUMANN: BoundaryConditions = BoundaryConditions { gamma0: 0.0, gamma1: 0.0 };

    pub fn robin(gamma0: f64, gamma1: f64) -> Result<Self> {
        for (name, g) in [("gamma0", gamma0), ("gamma1", gamma1)] {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::Range(format!("{name} = {g} must be finite and nonnegative")));
            }
        }
        Ok(BoundaryConditions { gamma0, gamma1 })
    }

    pub fn is_neumann(&self) -> bool {
        self.gamma0 == 0.0 && self.gamma1 == 0.0
    }
}

impl Default for BoundaryConditions {
    fn default() -> Self {
        BoundaryConditions::NEUMANN
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StringProblem {
    measure: AtomicMeasure,
    bc: BoundaryConditions,
}

/// Ascending eigenvalues of a [`StringProblem`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub fingerprint: u64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Writes `n,lambda` CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            n: usize,
            lambda: f64,
        }
        let mut w = csv::Writer::from_writer(out);
        for (n, &lambda) in self.values.iter().enumerate() {
            w.serialize(Row { n, lambda })?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Piecewise-linear solution of the initial value problem at a fixed lambda.
///
/// Values are renormalized atom by atom, so only signs and ratios are
/// meaningful across segments; within a segment `(value, slope)` is exact.
#[derive(Debug, Clone)]
pub struct Shot {
    start: (f64, f64),
    carrier: (f64, f64),
    positions: Vec<f64>,
    /// `y(x_i)` in the normalization of segment `i`.
    values: Vec<f64>,
    /// `y'` on `(x_i, x_{i+1})`.
    slopes: Vec<f64>,
}

impl Shot {
    /// `(y, y')` at `x`, in the local normalization of the segment holding
    /// `x`. At an atom the right-hand slope is returned.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let k = self.positions.partition_point(|&p| p <= x);
        if k == 0 {
            let (y, dy) = self.start;
            (y + (x - self.carrier.0) * dy, dy)
        } else {
            let i = k - 1;
            (self.values[i] + (x - self.positions[i]) * self.slopes[i], self.slopes[i])
        }
    }

    /// Number of zeros of the solution in `(lo, hi]`, counted as sign changes
    /// over the atoms in that range and the endpoint `hi`. A value that is
    /// exactly zero counts as a zero and flips the sign state.
    pub fn zeros_in(&self, lo: f64, hi: f64) -> usize {
        let mut state = sign(self.eval(lo).0);
        let mut zeros = 0;
        let first = self.positions.partition_point(|&p| p <= lo);
        let last = self.positions.partition_point(|&p| p < hi);
        let samples = self.values[first..last].iter().cloned().chain(std::iter::once(self.eval(hi).0));
        for y in samples {
            step_sign(&mut state, &mut zeros, y);
        }
        zeros
    }
}

fn sign(y: f64) -> f64 {
    if y < 0.0 {
        -1.0
    } else {
        1.0
    }
}

fn step_sign(state: &mut f64, count: &mut usize, y: f64) {
    if y == 0.0 {
        *count += 1;
        *state = -*state;
    } else if sign(y) != *state {
        *count += 1;
        *state = sign(y);
    }
}

impl StringProblem {
    pub fn new(measure: AtomicMeasure, bc: BoundaryConditions) -> Result<Self> {
        let bc = BoundaryConditions::robin(bc.gamma0, bc.gamma1)?;
        Ok(StringProblem { measure, bc })
    }

    pub fn neumann(measure: AtomicMeasure) -> Self {
        StringProblem { measure, bc: BoundaryConditions::NEUMANN }
    }

    pub fn measure(&self) -> &AtomicMeasure {
        &self.measure
    }

    pub fn bc(&self) -> BoundaryConditions {
        self.bc
    }

    /// Number of eigenvalues; equals the atom count.
    pub fn dimension(&self) -> usize {
        self.measure.len()
    }

    /// FNV-1a hash of the atoms, carrier and boundary coefficients.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |x: f64| {
            for b in x.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        let (a, b) = self.measure.carrier();
        feed(a);
        feed(b);
        feed(self.bc.gamma0);
        feed(self.bc.gamma1);
        for (&x, &m) in self.measure.positions().iter().zip(self.measure.masses()) {
            feed(x);
            feed(m);
        }
        h
    }

    fn check_nondegenerate(&self) -> Result<()> {
        if self.measure.is_empty() && !self.bc.is_neumann() {
            return Err(Error::Degenerate(
                "string without mass under Robin conditions has no discrete spectrum".into(),
            ));
        }
        Ok(())
    }

    /// `N(lambda) = #{n : lambda_n < lambda}`.
    pub fn count_below(&self, lambda: f64) -> Result<usize> {
        self.check_nondegenerate()?;
        Ok(self.count_unchecked(lambda))
    }

    fn count_unchecked(&self, lambda: f64) -> usize {
        // gamma0, gamma1 >= 0 makes the pencil positive semidefinite
        if lambda.is_nan() || lambda <= 0.0 || self.measure.is_empty() {
            return 0;
        }
        let xs = self.measure.positions();
        let ms = self.measure.masses();
        let (a, b) = self.measure.carrier();
        let n = xs.len();

        let mut dy = self.bc.gamma0;
        let mut y = 1.0 + (xs[0] - a) * dy;
        let mut state = 1.0;
        let mut count = 0;
        for i in 0..n {
            dy -= lambda * ms[i] * y;
            let s = y.abs().max(dy.abs());
            if s > 0.0 {
                y /= s;
                dy /= s;
            }
            if i + 1 < n {
                y += (xs[i + 1] - xs[i]) * dy;
                step_sign(&mut state, &mut count, y);
            }
        }
        let g1 = self.bc.gamma1;
        let boundary = dy * (1.0 + g1 * (b - xs[n - 1])) + g1 * y;
        if boundary * state < 0.0 {
            count += 1;
        }
        count
    }

    /// Solution of the initial value problem `y(a) = 1, y'(a) = gamma0`.
    pub fn shoot(&self, lambda: f64) -> Shot {
        let xs = self.measure.positions();
        let ms = self.measure.masses();
        let a = self.measure.carrier().0;
        let mut values = Vec::with_capacity(xs.len());
        let mut slopes = Vec::with_capacity(xs.len());
        let mut dy = self.bc.gamma0;
        let mut y = 1.0 + xs.first().map_or(0.0, |&x| (x - a) * dy);
        for i in 0..xs.len() {
            dy -= lambda * ms[i] * y;
            let s = y.abs().max(dy.abs());
            if s > 0.0 {
                y /= s;
                dy /= s;
            }
            values.push(y);
            slopes.push(dy);
            if i + 1 < xs.len() {
                y += (xs[i + 1] - xs[i]) * dy;
            }
        }
        Shot {
            start: (1.0, self.bc.gamma0),
            carrier: self.measure.carrier(),
            positions: xs.to_vec(),
            values,
            slopes,
        }
    }

    fn scale_estimate(&self) -> f64 {
        let xs = self.measure.positions();
        let (a, b) = self.measure.carrier();
        let m_min = self.measure.masses().iter().cloned().fold(f64::INFINITY, f64::min);
        let g_min = xs
            .windows(2)
            .map(|w| w[1] - w[0])
            .filter(|&g| g > 0.0)
            .fold(f64::INFINITY, f64::min);
        let g = if g_min.is_finite() { g_min } else { b - a };
        1.0 / (m_min * g)
    }

    /// `lambda_n`, bisected on [`count_below`](Self::count_below) until the
    /// bracket's relative width is at most `rel_tol`.
    pub fn eigenvalue(&self, n: usize, rel_tol: f64) -> Result<f64> {
        if !(rel_tol >= MIN_REL_TOL) {
            return Err(Error::Tolerance { tol: rel_tol, min: MIN_REL_TOL });
        }
        self.check_nondegenerate()?;
        let len = self.dimension();
        if n >= len {
            return Err(Error::Index { n, len });
        }
        if n == 0 && self.bc.is_neumann() {
            return Ok(0.0);
        }
        let mut lo = 0.0;
        let mut hi = self.scale_estimate();
        while self.count_unchecked(hi) <= n {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::Degenerate(format!("no bracket found for eigenvalue {n}")));
            }
        }
        loop {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= rel_tol * hi || hi <= ABS_FLOOR || mid <= lo || mid >= hi {
                return Ok(mid);
            }
            if self.count_unchecked(mid) <= n {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }

    /// `lambda_0, ..., lambda_{count-1}`, computed in parallel.
    pub fn eigenvalues(&self, count: usize, rel_tol: f64) -> Result<Vec<f64>> {
        let count = count.min(self.dimension());
        (0..count).into_par_iter().map(|n| self.eigenvalue(n, rel_tol)).collect()
    }

    pub fn spectrum(&self, rel_tol: f64) -> Result<Spectrum> {
        Ok(Spectrum { values: self.eigenvalues(self.dimension(), rel_tol)?, fingerprint: self.fingerprint() })
    }

    /// All eigenvalues strictly below `lambda_max`.
    pub fn spectrum_below(&self, lambda_max: f64, rel_tol: f64) -> Result<Spectrum> {
        let count = self.count_below(lambda_max)?;
        Ok(Spectrum { values: self.eigenvalues(count, rel_tol)?, fingerprint: self.fingerprint() })
    }

    /// Nodal values `y(x_i)` of the `n`-th eigenfunction, scaled so the
    /// entry of largest modulus is 1.
    ///
    /// Computed by inverse iteration on the tridiagonal pencil `K - lambda M`
    /// (Robin ends condensed into the corner entries). Shooting at the same
    /// `lambda` is unreliable for localized modes: past the peak it picks up
    /// the growing solution in proportion to the eigenvalue error.
    pub fn eigenvector(&self, n: usize, rel_tol: f64) -> Result<Vec<f64>> {
        let lambda = self.eigenvalue(n, rel_tol)?;
        let xs = self.measure.positions();
        let ms = self.measure.masses();
        let (a, b) = self.measure.carrier();
        let len = xs.len();
        let spring = |g: f64, h: f64| g / (1.0 + g * h);
        let mut diag = vec![0.0; len];
        let mut off = vec![0.0; len.saturating_sub(1)];
        for i in 0..len.saturating_sub(1) {
            let w = 1.0 / (xs[i + 1] - xs[i]);
            diag[i] += w;
            diag[i + 1] += w;
            off[i] = -w;
        }
        diag[0] += spring(self.bc.gamma0, xs[0] - a);
        diag[len - 1] += spring(self.bc.gamma1, b - xs[len - 1]);
        for i in 0..len {
            diag[i] -= lambda * ms[i];
        }
        let norm = diag.iter().chain(&off).fold(0.0f64, |m, v| m.max(v.abs()));
        // a lone atom under Neumann conditions gives the zero matrix
        let tiny = f64::EPSILON * if norm > 0.0 { norm } else { 1.0 };
        let mut v = vec![1.0; len];
        for _ in 0..3 {
            let rhs: Vec<f64> = v.iter().zip(ms).map(|(y, m)| y * m).collect();
            v = solve_tridiagonal(&diag, &off, rhs, tiny);
            let scale = v.iter().fold(0.0f64, |m, y| m.max(y.abs()));
            v.iter_mut().for_each(|y| *y /= scale);
        }
        let peak = v.iter().cloned().fold(0.0f64, |m, y| if y.abs() > m.abs() { y } else { m });
        v.iter_mut().for_each(|y| *y /= peak);
        Ok(v)
    }

    /// Zeros of the `n`-th eigenfunction inside the carrier.
    ///
    /// With `gamma >= 0` an eigenfunction keeps its sign on the massless end
    /// pieces, so the zeros are the sign changes of the nodal values.
    pub fn eigenfunction_zero_count(&self, n: usize, rel_tol: f64) -> Result<usize> {
        let v = self.eigenvector(n, rel_tol)?;
        let mut state = sign(v[0]);
        let mut zeros = 0;
        for &y in &v[1..] {
            step_sign(&mut state, &mut zeros, y);
        }
        Ok(zeros)
    }
}

/// Solves the symmetric tridiagonal system by elimination with partial
/// pivoting; zero pivots are replaced by `tiny`, as inverse iteration wants.
fn solve_tridiagonal(diag: &[f64], off: &[f64], mut rhs: Vec<f64>, tiny: f64) -> Vec<f64> {
    let n = diag.len();
    // row i holds u[i][i], u[i][i+1], u[i][i+2]
    let mut u = vec![[0.0f64; 3]; n];
    let mut lower = diag[0];
    let mut upper = off.first().copied().unwrap_or(0.0);
    for i in 0..n {
        let (sub, d_next, o_next) = if i + 1 < n {
            (off[i], diag[i + 1], off.get(i + 1).copied().unwrap_or(0.0))
        } else {
            (0.0, 0.0, 0.0)
        };
        // rows: [lower, upper, 0 | rhs_i] and [sub, d_next, o_next | rhs_{i+1}]
        if sub.abs() > lower.abs() {
            u[i] = [sub, d_next, o_next];
            let f = lower / sub;
            let (r0, r1) = (rhs[i], rhs[i + 1]);
            rhs[i] = r1;
            rhs[i + 1] = r0 - f * r1;
            lower = upper - f * d_next;
            upper = -f * o_next;
        } else {
            let p = if lower == 0.0 { tiny } else { lower };
            u[i] = [p, upper, 0.0];
            if i + 1 < n {
                let f = sub / p;
                rhs[i + 1] -= f * rhs[i];
                lower = d_next - f * upper;
                upper = o_next;
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        if i + 1 < n {
            acc -= u[i][1] * x[i + 1];
        }
        if i + 2 < n {
            acc -= u[i][2] * x[i + 2];
        }
        let p = if u[i][0] == 0.0 { tiny } else { u[i][0] };
        x[i] = acc / p;
    }
    x
}
