//! Generalized Cantor ladders and their atomic discretizations.
//!
//! A ladder is the fixed point of the operator built from `m` affine maps
//! `S_i` contracting `[0, 1]` onto disjoint segments `I_i = [a_i, b_i]`, with
//! weights `rho_i` and orientation flags `e_i`. Its distributional derivative
//! is a singular self-similar probability measure; [`discretize`] replaces it
//! by `m^depth` point masses, one per level-`depth` cell.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on the weight sum and on the endpoint conditions.
pub const SPEC_TOLERANCE: f64 = 1e-12;

/// Default cap on the number of atoms a discretization may produce.
pub const DEFAULT_ATOM_BUDGET: usize = 10_000_000;

/// Validated IFS parameters of a generalized Cantor ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderSpec {
    segments: Vec<(f64, f64)>,
    weights: Vec<f64>,
    orientations: Vec<bool>,
    strict_gap: bool,
}

/// Unvalidated ladder description as read from JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawLadder {
    pub segments: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    #[serde(default, deserialize_with = "de_flags")]
    pub orientations: Vec<bool>,
}

fn de_flags<'de, D>(de: D) -> std::result::Result<Vec<bool>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Flag {
        Bool(bool),
        Int(u8),
    }
    let raw: Vec<Flag> = Vec::deserialize(de)?;
    raw.into_iter()
        .map(|f| match f {
            Flag::Bool(b) => Ok(b),
            Flag::Int(0) => Ok(false),
            Flag::Int(1) => Ok(true),
            Flag::Int(other) => Err(serde::de::Error::custom(format!(
                "orientation flag must be 0 or 1, got {other}"
            ))),
        })
        .collect()
}

impl LadderSpec {
    /// Validates and normalizes a ladder. Weights are rescaled to sum to
    /// exactly one, and the outer endpoints are snapped to 0 and 1.
    pub fn new(segments: Vec<(f64, f64)>, weights: Vec<f64>, orientations: Vec<bool>) -> Result<Self> {
        let m = segments.len();
        if m < 2 {
            return Err(Error::Range(format!("a ladder needs at least 2 segments, got {m}")));
        }
        if weights.len() != m {
            return Err(Error::Weight(format!("{} weights for {m} segments", weights.len())));
        }
        let orientations = if orientations.is_empty() { vec![false; m] } else { orientations };
        if orientations.len() != m {
            return Err(Error::Range(format!("{} orientation flags for {m} segments", orientations.len())));
        }

        let mut segments = segments;
        for (i, &(a, b)) in segments.iter().enumerate() {
            if !(a.is_finite() && b.is_finite()) {
                return Err(Error::Range(format!("segment {} has a non-finite endpoint", i + 1)));
            }
            if a < -SPEC_TOLERANCE || b > 1.0 + SPEC_TOLERANCE {
                return Err(Error::Range(format!("segment {} = [{a}, {b}] leaves [0, 1]", i + 1)));
            }
            if a >= b {
                return Err(Error::Range(format!("segment {} = [{a}, {b}] is degenerate", i + 1)));
            }
        }
        for i in 0..m - 1 {
            let (_, end) = segments[i];
            let (start, _) = segments[i + 1];
            if end > start {
                return Err(Error::Overlap { index: i + 1, next: i + 2, end, start });
            }
        }
        if segments[0].0.abs() > SPEC_TOLERANCE {
            return Err(Error::Range(format!("first segment must start at 0, got {}", segments[0].0)));
        }
        if (segments[m - 1].1 - 1.0).abs() > SPEC_TOLERANCE {
            return Err(Error::Range(format!("last segment must end at 1, got {}", segments[m - 1].1)));
        }
        segments[0].0 = 0.0;
        segments[m - 1].1 = 1.0;

        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Weight(format!("weight {} = {} is not positive", i + 1, weights[i])));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SPEC_TOLERANCE {
            return Err(Error::Weight(format!("weights sum to {total}, expected 1")));
        }
        let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();

        let strict_gap = segments.windows(2).all(|w| w[1].0 - w[0].1 > 0.0);
        Ok(LadderSpec { segments, weights, orientations, strict_gap })
    }

    pub fn from_raw(raw: RawLadder) -> Result<Self> {
        let segments = raw.segments.into_iter().map(|[a, b]| (a, b)).collect();
        LadderSpec::new(segments, raw.weights, raw.orientations)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        LadderSpec::from_raw(serde_json::from_str(s)?)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        LadderSpec::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_raw(&self) -> RawLadder {
        RawLadder {
            segments: self.segments.iter().map(|&(a, b)| [a, b]).collect(),
            weights: self.weights.clone(),
            orientations: self.orientations.clone(),
        }
    }

    /// The classical middle-thirds Cantor ladder.
    pub fn classical_cantor() -> Self {
        LadderSpec::new(vec![(0.0, 1.0 / 3.0), (2.0 / 3.0, 1.0)], vec![0.5, 0.5], vec![false, false])
            .expect("classical Cantor ladder is valid")
    }

    pub fn m(&self) -> usize {
        self.segments.len()
    }

    pub fn segments(&self) -> &[(f64, f64)] {
        &self.segments
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn orientations(&self) -> &[bool] {
        &self.orientations
    }

    /// True when every intermediate interval `(b_i, a_{i+1})` is non-empty.
    pub fn strict_gap(&self) -> bool {
        self.strict_gap
    }

    pub fn length(&self, i: usize) -> f64 {
        let (a, b) = self.segments[i];
        b - a
    }

    /// `rho_i * (b_i - a_i)`, the factor by which `S_i` rescales eigenvalues.
    pub fn scale_factor(&self, i: usize) -> f64 {
        self.weights[i] * self.length(i)
    }

    /// Lipschitz constant of the ladder operator in the sup norm.
    pub fn contraction_factor(&self) -> f64 {
        self.weights.iter().cloned().fold(0.0, f64::max)
    }

    /// `S_i(t)`.
    pub fn map(&self, i: usize, t: f64) -> f64 {
        let (a, b) = self.segments[i];
        if self.orientations[i] {
            b - (b - a) * t
        } else {
            a + (b - a) * t
        }
    }

    /// `S_i^{-1}(x)` for `x` in `I_i`.
    pub fn unmap(&self, i: usize, x: f64) -> f64 {
        let (a, b) = self.segments[i];
        if self.orientations[i] {
            (b - x) / (b - a)
        } else {
            (x - a) / (b - a)
        }
    }

    /// `(S^depth f)(t)` with `f(t) = t`; converges uniformly to the ladder.
    pub fn eval_ladder(&self, t: f64, depth: usize) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Range(format!("ladder argument {t} outside [0, 1]")));
        }
        let mut t = t;
        let mut base = 0.0;
        let mut mult = 1.0;
        for _ in 0..depth {
            match self.segments.iter().position(|&(a, b)| a <= t && t <= b) {
                Some(i) => {
                    let below: f64 = self.weights[..i].iter().sum();
                    let rho = self.weights[i];
                    if self.orientations[i] {
                        base += mult * (below + rho);
                        mult *= -rho;
                    } else {
                        base += mult * below;
                        mult *= rho;
                    }
                    t = self.unmap(i, t).clamp(0.0, 1.0);
                }
                None => {
                    let below: f64 = self
                        .segments
                        .iter()
                        .zip(&self.weights)
                        .filter(|((_, b), _)| *b < t)
                        .map(|(_, w)| w)
                        .sum();
                    return Ok(base + mult * below);
                }
            }
        }
        Ok(base + mult * t)
    }

    /// Anchor point inside `[0, 1]` whose images become atom positions.
    pub fn anchor(&self, placement: Placement) -> f64 {
        match placement {
            Placement::Midpoint => 0.5,
            Placement::Barycenter => {
                // b = sum rho_i (alpha_i + beta_i b) with S_i(t) = alpha_i + beta_i t
                let (mut num, mut den) = (0.0, 1.0);
                for i in 0..self.m() {
                    let alpha = self.map(i, 0.0);
                    let beta = self.map(i, 1.0) - alpha;
                    num += self.weights[i] * alpha;
                    den -= self.weights[i] * beta;
                }
                num / den
            }
        }
    }

    /// All level-`depth` cell addresses in left-to-right order.
    pub fn cells(&self, depth: usize) -> Vec<CellAddress> {
        let mut level = vec![CellAddress::root()];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(level.len() * self.m());
            for i in 0..self.m() {
                let order: Box<dyn Iterator<Item = &CellAddress>> = if self.orientations[i] {
                    Box::new(level.iter().rev())
                } else {
                    Box::new(level.iter())
                };
                for cell in order {
                    let mut word = Vec::with_capacity(cell.word.len() + 1);
                    word.push(i);
                    word.extend_from_slice(&cell.word);
                    next.push(CellAddress { word });
                }
            }
            level = next;
        }
        level
    }
}

/// Word `(i_1, ..., i_n)` naming the cell `S_{i_1} o ... o S_{i_n}([0, 1])`.
/// Indices are zero-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellAddress {
    pub word: Vec<usize>,
}

impl CellAddress {
    pub fn root() -> Self {
        CellAddress { word: Vec::new() }
    }

    pub fn depth(&self) -> usize {
        self.word.len()
    }

    /// Image of `t` under the composed map.
    pub fn map(&self, spec: &LadderSpec, t: f64) -> f64 {
        self.word.iter().rev().fold(t, |x, &i| spec.map(i, x))
    }

    pub fn interval(&self, spec: &LadderSpec) -> (f64, f64) {
        let (x, y) = (self.map(spec, 0.0), self.map(spec, 1.0));
        (x.min(y), x.max(y))
    }

    pub fn mass(&self, spec: &LadderSpec) -> f64 {
        self.word.iter().map(|&i| spec.weights()[i]).product()
    }
}

/// Where inside each cell the cell's mass is placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    #[default]
    Midpoint,
    /// First moment of the measure restricted to the cell.
    Barycenter,
}

impl std::str::FromStr for Placement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midpoint" => Ok(Placement::Midpoint),
            "barycenter" => Ok(Placement::Barycenter),
            other => Err(Error::Range(format!("unknown placement {other:?}"))),
        }
    }
}

/// Finite sum of point masses on a carrier interval `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    positions: Vec<f64>,
    masses: Vec<f64>,
    carrier: (f64, f64),
}

#[derive(Debug, Serialize, Deserialize)]
struct AtomRow {
    position: f64,
    mass: f64,
}

impl AtomicMeasure {
    pub fn new(positions: Vec<f64>, masses: Vec<f64>, carrier: (f64, f64)) -> Result<Self> {
        let (a, b) = carrier;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Range(format!("carrier [{a}, {b}] is not a proper interval")));
        }
        if positions.len() != masses.len() {
            return Err(Error::Range(format!(
                "{} positions but {} masses",
                positions.len(),
                masses.len()
            )));
        }
        if let Some(w) = positions.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Range(format!("atom positions not strictly increasing at {}", w[1])));
        }
        if let Some(x) = positions.iter().find(|&&x| x < a || x > b) {
            return Err(Error::Range(format!("atom at {x} outside carrier [{a}, {b}]")));
        }
        if let Some(m) = masses.iter().find(|&&m| !(m.is_finite() && m > 0.0)) {
            return Err(Error::Range(format!("atom mass {m} is not positive")));
        }
        Ok(AtomicMeasure { positions, masses, carrier })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn carrier(&self) -> (f64, f64) {
        self.carrier
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Atoms lying in `[c, d]`, re-carried on `[c, d]`.
    pub fn restrict(&self, c: f64, d: f64) -> AtomicMeasure {
        debug_assert!(c < d, "restrict needs c < d");
        let lo = self.positions.partition_point(|&x| x < c);
        let hi = self.positions.partition_point(|&x| x <= d);
        AtomicMeasure {
            positions: self.positions[lo..hi].to_vec(),
            masses: self.masses[lo..hi].to_vec(),
            carrier: (c, d),
        }
    }

    /// Image under `x -> offset + scale * x` with masses multiplied by `weight`.
    /// A negative `scale` reverses the atom order.
    pub fn affine_image(&self, offset: f64, scale: f64, weight: f64) -> AtomicMeasure {
        let f = |x: f64| offset + scale * x;
        let (ca, cb) = (f(self.carrier.0), f(self.carrier.1));
        let mut atoms: Vec<(f64, f64)> =
            self.positions.iter().zip(&self.masses).map(|(&x, &m)| (f(x), m * weight)).collect();
        if scale < 0.0 {
            atoms.reverse();
        }
        AtomicMeasure {
            positions: atoms.iter().map(|a| a.0).collect(),
            masses: atoms.iter().map(|a| a.1).collect(),
            carrier: (ca.min(cb), ca.max(cb)),
        }
    }

    /// Writes `position,mass` CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for (&position, &mass) in self.positions.iter().zip(&self.masses) {
            w.serialize(AtomRow { position, mass })?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads `position,mass` CSV; the carrier must be supplied separately.
    pub fn read_csv<R: Read>(input: R, carrier: (f64, f64)) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut positions = Vec::new();
        let mut masses = Vec::new();
        for row in r.deserialize() {
            let row: AtomRow = row?;
            positions.push(row.position);
            masses.push(row.mass);
        }
        AtomicMeasure::new(positions, masses, carrier)
    }
}

/// Point-mass approximation of the ladder measure with one atom per
/// level-`depth` cell.
pub fn discretize(spec: &LadderSpec, depth: usize, placement: Placement) -> Result<AtomicMeasure> {
    discretize_with_budget(spec, depth, placement, DEFAULT_ATOM_BUDGET)
}

pub fn discretize_with_budget(
    spec: &LadderSpec,
    depth: usize,
    placement: Placement,
    budget: usize,
) -> Result<AtomicMeasure> {
    if depth == 0 {
        return Err(Error::Range("discretization depth must be at least 1".into()));
    }
    let atoms = atom_count(spec.m(), depth);
    if atoms > budget as u128 {
        return Err(Error::Depth { depth, atoms, budget });
    }

    let mut positions = vec![spec.anchor(placement)];
    let mut masses = vec![1.0];
    for _ in 0..depth {
        let n = positions.len();
        let mut next_pos = Vec::with_capacity(n * spec.m());
        let mut next_mass = Vec::with_capacity(n * spec.m());
        for i in 0..spec.m() {
            let rho = spec.weights()[i];
            let start = next_pos.len();
            next_pos.extend(positions.iter().map(|&x| spec.map(i, x)));
            next_mass.extend(masses.iter().map(|&w| w * rho));
            if spec.orientations()[i] {
                next_pos[start..].reverse();
                next_mass[start..].reverse();
            }
        }
        positions = next_pos;
        masses = next_mass;
    }
    AtomicMeasure::new(positions, masses, (0.0, 1.0))
}

pub fn atom_count(m: usize, depth: usize) -> u128 {
    (m as u128).checked_pow(depth as u32).unwrap_or(u128::MAX)
}
