//! Dense generalized eigensolver and a seeded corpus of small strings,
//! shared by the oracle and acceptance targets.
#![allow(dead_code)]

use fss_core::{discretize, AtomicMeasure, BoundaryConditions, LadderSpec, Placement};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Eigenvalues of `K y = lambda M y` built from scratch: nodes at the carrier
/// ends (massless, Robin springs) and at every atom, massless nodes removed by
/// a Schur complement, then `M^{-1/2} K M^{-1/2}` diagonalized.
pub fn dense_eigenvalues(measure: &AtomicMeasure, bc: BoundaryConditions) -> Vec<f64> {
    dense_eigen(measure, bc).into_iter().map(|(l, _)| l).collect()
}

/// Eigenpairs, vectors as nodal values at the atoms with the entry of largest
/// modulus equal to 1.
pub fn dense_eigen(measure: &AtomicMeasure, bc: BoundaryConditions) -> Vec<(f64, Vec<f64>)> {
    let (a, b) = measure.carrier();
    let mut xs = vec![a];
    let mut ms = vec![0.0];
    xs.extend_from_slice(measure.positions());
    ms.extend_from_slice(measure.masses());
    xs.push(b);
    ms.push(0.0);
    // merge an end node into an atom sitting on the boundary
    let mut nodes: Vec<(f64, f64)> = Vec::new();
    for (x, m) in xs.into_iter().zip(ms) {
        match nodes.last_mut() {
            Some(last) if last.0 == x => last.1 += m,
            _ => nodes.push((x, m)),
        }
    }
    let n = nodes.len();
    let mut k = DMatrix::<f64>::zeros(n, n);
    for i in 0..n - 1 {
        let w = 1.0 / (nodes[i + 1].0 - nodes[i].0);
        k[(i, i)] += w;
        k[(i + 1, i + 1)] += w;
        k[(i, i + 1)] -= w;
        k[(i + 1, i)] -= w;
    }
    k[(0, 0)] += bc.gamma0;
    k[(n - 1, n - 1)] += bc.gamma1;

    let heavy: Vec<usize> = (0..n).filter(|&i| nodes[i].1 > 0.0).collect();
    let light: Vec<usize> = (0..n).filter(|&i| nodes[i].1 == 0.0).collect();
    let pick = |rows: &[usize], cols: &[usize]| DMatrix::from_fn(rows.len(), cols.len(), |r, c| k[(rows[r], cols[c])]);
    let mut kc = pick(&heavy, &heavy);
    if !light.is_empty() {
        let k00 = pick(&light, &light);
        let k0m = pick(&light, &heavy);
        let inv = k00.try_inverse().expect("massless block is positive definite");
        kc -= k0m.transpose() * inv * k0m;
    }
    let s = DMatrix::from_fn(heavy.len(), heavy.len(), |r, c| {
        kc[(r, c)] / (nodes[heavy[r]].1 * nodes[heavy[c]].1).sqrt()
    });
    let eig = SymmetricEigen::new(s);
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..heavy.len())
        .map(|j| {
            let mut y: Vec<f64> = (0..heavy.len()).map(|r| eig.eigenvectors[(r, j)] / nodes[heavy[r]].1.sqrt()).collect();
            let scale = y.iter().cloned().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
            y.iter_mut().for_each(|v| *v /= scale);
            (eig.eigenvalues[j], y)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

fn random_measure(rng: &mut ChaCha8Rng) -> AtomicMeasure {
    let n = rng.gen_range(1..=12);
    let mut xs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let ms: Vec<f64> = xs.iter().map(|_| rng.gen_range(0.01..1.0)).collect();
    AtomicMeasure::new(xs, ms, (0.0, 1.0)).unwrap()
}

pub fn corpus() -> Vec<AtomicMeasure> {
    let cantor = LadderSpec::classical_cantor();
    let k23 = LadderSpec::new(vec![(0.0, 0.5), (0.75, 1.0)], vec![0.5, 0.5], vec![false, false]).unwrap();
    let flipped = LadderSpec::new(vec![(0.0, 0.25), (0.5, 1.0)], vec![0.3, 0.7], vec![true, false]).unwrap();
    let mut out = Vec::new();
    for spec in [&cantor, &k23, &flipped] {
        for depth in 1..=3 {
            for placement in [Placement::Midpoint, Placement::Barycenter] {
                out.push(discretize(spec, depth, placement).unwrap());
            }
        }
    }
    out.push(discretize(&cantor, 3, Placement::Midpoint).unwrap().restrict(0.0, 1.0 / 3.0));
    out.push(AtomicMeasure::new(vec![0.0, 1.0], vec![0.5, 0.5], (0.0, 1.0)).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    out.extend((0..60).map(|_| random_measure(&mut rng)));
    out
}

pub fn boundary_conditions() -> [BoundaryConditions; 4] {
    [
        BoundaryConditions::NEUMANN,
        BoundaryConditions::robin(1.0, 0.0).unwrap(),
        BoundaryConditions::robin(0.0, 3.0).unwrap(),
        BoundaryConditions::robin(2.0, 0.5).unwrap(),
    ]
}
