//! Adaptive Gauss-Kronrod (10/21 point) integration over finite intervals
//! for vector-valued integrands, with user-supplied breakpoints.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { abs_tol: 1e-12, rel_tol: 1e-12, max_evals: 2_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub evals: usize,
}

struct Piece<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
    key: f64,
}

impl<const N: usize> PartialEq for Piece<N> {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}
impl<const N: usize> Eq for Piece<N> {}
impl<const N: usize> PartialOrd for Piece<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Piece<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.total_cmp(&other.key)
    }
}

fn rule<const N: usize, F: Fn(f64) -> [f64; N]>(f: &F, a: f64, b: f64) -> Piece<N> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = [0.0; N];
    let mut gauss = [0.0; N];
    for k in 0..N {
        kron[k] = WGK[10] * fc[k];
    }
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        for k in 0..N {
            let s = f1[k] + f2[k];
            kron[k] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * s;
            }
        }
    }
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    let mut key: f64 = 0.0;
    for k in 0..N {
        value[k] = kron[k] * h;
        error[k] = ((kron[k] - gauss[k]) * h).abs();
        key = key.max(error[k]);
    }
    Piece { a, b, value, error, key }
}

/// Integrates `f` over `[points[0], points[last]]`, starting from the pieces
/// delimited by `points` (which must be ascending and finite).
///
/// Refinement stops once every component satisfies
/// `error <= max(abs_tol, rel_tol * |value|)`.
pub fn integrate<const N: usize, F>(f: F, points: &[f64], cfg: &QuadConfig) -> Result<Integral<N>>
where
    F: Fn(f64) -> [f64; N],
{
    if points.len() < 2 || points.iter().any(|p| !p.is_finite()) || points.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("quadrature breakpoints must be finite, ascending and at least two".into()));
    }
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(rule(&f, w[0], w[1]));
            evals += 21;
        }
    }
    let totals = |heap: &BinaryHeap<Piece<N>>| {
        let mut value = [0.0; N];
        let mut error = [0.0; N];
        for p in heap.iter() {
            for k in 0..N {
                value[k] += p.value[k];
                error[k] += p.error[k];
            }
        }
        (value, error)
    };
    let (mut value, mut error) = totals(&heap);
    let converged =
        |v: &[f64; N], e: &[f64; N]| (0..N).all(|k| e[k] <= cfg.abs_tol.max(cfg.rel_tol * v[k].abs()));
    loop {
        if converged(&value, &error) {
            // running sums drift; confirm on exact totals
            (value, error) = totals(&heap);
            if converged(&value, &error) {
                return Ok(Integral { value, error, evals });
            }
        }
        let Some(worst) = heap.pop() else {
            return Ok(Integral { value, error, evals });
        };
        let mid = 0.5 * (worst.a + worst.b);
        if evals + 42 > cfg.max_evals || mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            (value, error) = totals(&heap);
            let achieved = error.iter().cloned().fold(0.0, f64::max);
            let target = (0..N)
                .map(|k| cfg.abs_tol.max(cfg.rel_tol * value[k].abs()))
                .fold(f64::INFINITY, f64::min);
            return Err(Error::Quadrature { achieved, target, evals });
        }
        let left = rule(&f, worst.a, mid);
        let right = rule(&f, mid, worst.b);
        for k in 0..N {
            value[k] += left.value[k] + right.value[k] - worst.value[k];
            error[k] += left.error[k] + right.error[k] - worst.error[k];
        }
        heap.push(left);
        heap.push(right);
        evals += 42;
    }
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F: Fn(f64) -> f64>(f: F, points: &[f64], cfg: &QuadConfig) -> Result<(f64, f64)> {
    let r = integrate(|x| [f(x)], points, cfg)?;
    Ok((r.value[0], r.error[0]))
}
