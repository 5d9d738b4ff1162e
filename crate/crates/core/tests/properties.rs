use fss_core::measure::atom_count;
use fss_core::renorm::arithmetic::{detect_arithmetic, gcd, ArithmeticStructure, DEFAULT_ARITH_TOL, DEFAULT_K_MAX};
use fss_core::renorm::sigma::{period_grid, sigma_estimate};
use fss_core::renorm::{fj_coefficients, interlacing_audit, trusted_limit, AuditConfig};
use fss_core::small_ball::functional::{default_quad, eta_theta, zeta_curve};
use fss_core::small_ball::PhiModel;
use fss_core::{discretize, AtomicMeasure, BoundaryConditions, LadderSpec, Placement, StringProblem};
use proptest::prelude::*;

fn ladder() -> impl Strategy<Value = LadderSpec> {
    (2usize..=3)
        .prop_flat_map(|m| {
            (
                proptest::collection::vec(0.05f64..1.0, 2 * m - 1),
                proptest::collection::vec(0.1f64..1.0, m),
                proptest::collection::vec(any::<bool>(), m),
            )
        })
        .prop_map(|(pieces, raw_w, flips)| {
            // alternate segment / gap lengths, normalized to fill [0, 1]
            let total: f64 = pieces.iter().sum();
            let mut x = 0.0;
            let mut segments = Vec::new();
            for (j, p) in pieces.iter().enumerate() {
                let next = x + p / total;
                if j % 2 == 0 {
                    segments.push((x, next));
                }
                x = next;
            }
            let last = segments.len() - 1;
            segments[last].1 = 1.0;
            let wsum: f64 = raw_w.iter().sum();
            let weights = raw_w.iter().map(|w| w / wsum).collect();
            LadderSpec::new(segments, weights, flips).unwrap()
        })
}

fn placement() -> impl Strategy<Value = Placement> {
    prop_oneof![Just(Placement::Midpoint), Just(Placement::Barycenter)]
}

/// Up to `n` atoms with gaps of at least 0.01 and masses in `[0.2, 1]`.
fn spread_measure(n: usize) -> impl Strategy<Value = AtomicMeasure> {
    proptest::collection::vec((0.01f64..0.2, 0.2f64..1.0), 1..=n).prop_map(|atoms| {
        let mut x = 0.0;
        let mut xs = Vec::new();
        let mut ms = Vec::new();
        for (gap, m) in atoms {
            x += gap;
            xs.push(x);
            ms.push(m);
        }
        let end = x + 0.05;
        AtomicMeasure::new(xs, ms, (0.0, end)).unwrap()
    })
}

fn close(a: f64, b: f64, ulps: f64) -> bool {
    (a - b).abs() <= ulps * f64::EPSILON * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn discretization_is_self_similar(spec in ladder(), depth in 1usize..=5, p in placement()) {
        let fine = discretize(&spec, depth + 1, p).unwrap();
        let coarse = discretize(&spec, depth, p).unwrap();
        for (i, &(a, b)) in spec.segments().iter().enumerate() {
            let part = fine.restrict(a, b);
            let mut want: Vec<(f64, f64)> = coarse
                .positions()
                .iter()
                .zip(coarse.masses())
                .map(|(&x, &m)| (spec.map(i, x), spec.weights()[i] * m))
                .collect();
            want.sort_by(|u, v| u.0.total_cmp(&v.0));
            prop_assert_eq!(part.len(), want.len());
            for ((x, m), (wx, wm)) in part.positions().iter().zip(part.masses()).zip(&want) {
                prop_assert!(close(*x, *wx, 4.0), "position {} vs {}", x, wx);
                prop_assert!(close(*m, *wm, 4.0), "mass {} vs {}", m, wm);
            }
        }
    }

    #[test]
    fn discretization_has_unit_mass(spec in ladder(), depth in 1usize..=7, p in placement()) {
        let mu = discretize(&spec, depth, p).unwrap();
        prop_assert!((mu.total_mass() - 1.0).abs() <= atom_count(spec.m(), depth) as f64 * f64::EPSILON);
    }

    #[test]
    fn ladder_is_monotone_and_contracts(spec in ladder(), depth in 0usize..=8, mut ts in proptest::collection::vec(0.0f64..=1.0, 2..40)) {
        ts.sort_by(f64::total_cmp);
        let c = spec.contraction_factor();
        let mut prev = f64::NEG_INFINITY;
        for &t in &ts {
            let f = spec.eval_ladder(t, depth).unwrap();
            prop_assert!(f >= prev - 1e-15, "not monotone at t = {}", t);
            prev = f;
            let g = spec.eval_ladder(t, depth + 1).unwrap();
            prop_assert!((g - f).abs() <= c.powi(depth as i32) + 1e-15);
        }
    }

    #[test]
    fn count_steps_by_one_at_each_eigenvalue(mu in spread_measure(24)) {
        let p = StringProblem::neumann(mu);
        let values = p.spectrum(1e-13).unwrap().values;
        prop_assert_eq!(p.count_below(1e-300).unwrap(), 1);
        let mut last = 0;
        for (n, &l) in values.iter().enumerate().skip(1) {
            let below = p.count_below(l * (1.0 - 1e-10)).unwrap();
            let above = p.count_below(l * (1.0 + 1e-10)).unwrap();
            prop_assert_eq!(below, n);
            prop_assert_eq!(above, n + 1);
            prop_assert!(below >= last);
            last = above;
        }
    }

    #[test]
    fn robin_raises_every_eigenvalue(mu in spread_measure(16), g in (0.0f64..5.0, 0.0f64..5.0), dg in (0.0f64..5.0, 0.0f64..5.0)) {
        let lo = StringProblem::new(mu.clone(), BoundaryConditions::robin(g.0, g.1).unwrap()).unwrap();
        let hi = StringProblem::new(mu, BoundaryConditions::robin(g.0 + dg.0, g.1 + dg.1).unwrap()).unwrap();
        let a = lo.spectrum(1e-13).unwrap().values;
        let b = hi.spectrum(1e-13).unwrap().values;
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(*y >= x * (1.0 - 1e-12), "{} < {}", y, x);
        }
    }

    #[test]
    fn scaling_divides_eigenvalues(mu in spread_measure(16), h in 0.1f64..10.0, w in 0.1f64..10.0, offset in -3.0f64..3.0, flip in any::<bool>()) {
        let s = if flip { -h } else { h };
        let base = StringProblem::neumann(mu.clone()).spectrum(1e-13).unwrap().values;
        let moved = StringProblem::neumann(mu.affine_image(offset, s, w)).spectrum(1e-13).unwrap().values;
        for (x, y) in base.iter().zip(&moved).skip(1) {
            prop_assert!((y * h * w - x).abs() <= 1e-11 * x, "{} vs {}", y * h * w, x);
        }
    }

    #[test]
    fn interlacing_holds_on_random_gaps(depth in 1usize..=5, pick in 0.0f64..1.0, s in 0.0f64..1.0, u in 0.0f64..1.0, equal in any::<bool>()) {
        let spec = LadderSpec::classical_cantor();
        let cfg = AuditConfig::default();
        let mu = cfg.discretize(&spec, depth).unwrap();
        let xs = mu.positions();
        let j = ((pick * (xs.len() - 1) as f64) as usize).min(xs.len() - 2);
        let (lo, hi) = (xs[j], xs[j + 1]);
        let d1 = lo + (hi - lo) * (0.01 + 0.98 * s.min(u));
        let c2 = if equal { d1 } else { lo + (hi - lo) * (0.01 + 0.98 * s.max(u)) };
        let limit = trusted_limit(&StringProblem::neumann(mu.clone()), cfg.rel_tol).unwrap();
        let r = interlacing_audit(&spec, depth, d1, c2, limit.max(1.0), &cfg).unwrap();
        prop_assert!(r.is_ok(), "{:?}", r.violations);
    }

    #[test]
    fn renormalization_counting_defect(depth in 2usize..=7, x in 0.0f64..1.0) {
        let spec = LadderSpec::classical_cantor();
        let fine = StringProblem::neumann(discretize(&spec, depth, Placement::Midpoint).unwrap());
        let coarse = StringProblem::neumann(discretize(&spec, depth - 1, Placement::Midpoint).unwrap());
        let lambda = (x * (6f64.powi(depth as i32)).ln()).exp();
        let defect = 2 * coarse.count_below(lambda).unwrap() as i64 - fine.count_below(6.0 * lambda).unwrap() as i64;
        prop_assert!(defect == 0 || defect == 1, "defect {} at {}", defect, lambda);
    }

    #[test]
    fn two_map_fj_is_scaled_count(j in 0usize..5, t in 0.0f64..1.79) {
        let a = ArithmeticStructure::new(1.0 / 6.0, vec![1, 1]).unwrap();
        let c = fj_coefficients(&a);
        let p = StringProblem::neumann(discretize(&LadderSpec::classical_cantor(), 8, Placement::Midpoint).unwrap());
        let count = |x: f64| p.count_below(x);
        let f = c.f(&a, count, j, t).unwrap();
        let direct = a.tau.powf(j as f64 * a.d) * p.count_below(a.tau.powi(-(j as i32)) * t.exp()).unwrap() as f64;
        prop_assert!((f - direct).abs() <= 1e-12 * direct.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, max_global_rejects: 100_000, .. ProptestConfig::default() })]

    #[test]
    fn fj_weights_are_positive(tau in 0.05f64..0.9, k in proptest::collection::vec(1u32..8, 2..5)) {
        let g = k.iter().fold(0, |acc, &x| gcd(acc, x));
        let k: Vec<u32> = k.iter().map(|x| x / g).collect();
        // an exponent in (0, 1) exists iff sum tau^k < 1
        prop_assume!(k.iter().map(|&x| tau.powi(x as i32)).sum::<f64>() < 1.0 - 1e-9);
        let a = ArithmeticStructure::new(tau, k).unwrap();
        let c = fj_coefficients(&a);
        prop_assert!(c.c > 0.0);
        prop_assert!(c.c_i.iter().all(|&x| x > 0.0), "{:?}", c.c_i);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn detection_returns_reduced_exponents(g in 1u32..4, k in proptest::collection::vec(1u32..5, 2..4), tau in 0.3f64..0.6, raw_w in proptest::collection::vec(0.2f64..1.0, 4)) {
        // rho_i l_i = tau^{g k_i} for scrambled weights; lengths must fit in [0, 1]
        let m = k.len();
        let wsum: f64 = raw_w[..m].iter().sum();
        let weights: Vec<f64> = raw_w[..m].iter().map(|w| w / wsum).collect();
        let lengths: Vec<f64> = (0..m).map(|i| tau.powi((g * k[i]) as i32) / weights[i]).collect();
        let used: f64 = lengths.iter().sum();
        prop_assume!(used < 0.95 && lengths.iter().all(|&l| l > 1e-3));
        let gap = (1.0 - used) / (m - 1) as f64;
        let mut x = 0.0;
        let mut segments = Vec::new();
        for (i, l) in lengths.iter().enumerate() {
            segments.push((x, if i == m - 1 { 1.0 } else { x + l }));
            x += l + gap;
        }
        let spec = LadderSpec::new(segments, weights, vec![]).unwrap();
        let a = detect_arithmetic(&spec, DEFAULT_ARITH_TOL, DEFAULT_K_MAX).unwrap().into_structure().unwrap();
        let h = k.iter().fold(0, |acc, &x| gcd(acc, x));
        let want: Vec<u32> = k.iter().map(|x| x / h).collect();
        prop_assert_eq!(a.k.iter().fold(0, |acc, &x| gcd(acc, x)), 1);
        prop_assert_eq!(&a.k, &want);
        prop_assert!((a.tau - tau.powi((g * h) as i32)).abs() <= 1e-9 * a.tau);
    }
}

#[test]
fn sigma_tables_stabilize_across_depths() {
    let cfg = AuditConfig::default();
    let spec = LadderSpec::classical_cantor();
    let t = period_grid(6f64.ln(), 256);
    let tables: Vec<_> = (7..=11).map(|d| sigma_estimate(&spec, d, 2, 4, &t, &cfg).unwrap()).collect();
    let devs: Vec<f64> = tables
        .windows(2)
        .map(|w| w[0].sigma.iter().zip(&w[1].sigma).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .collect();
    assert!(devs.len() >= 3);
    for w in devs.windows(2) {
        assert!(w[1] <= w[0], "{devs:?}");
    }
    assert!(devs.iter().all(|&d| d <= tables[0].noise_bound), "{devs:?}");
}

fn wavy(amplitude: f64) -> PhiModel {
    let d = 2f64.ln() / 6f64.ln();
    let mut phi = PhiModel::constant(0.3, d, 6f64.ln()).unwrap();
    let p = phi.log_period();
    phi.knots = (0..16).map(|i| p * i as f64 / 16.0).collect();
    phi.values = phi.knots.iter().map(|x| 0.3 * (1.0 + amplitude * (std::f64::consts::TAU * x / p).sin())).collect();
    phi
}

#[test]
fn eta_theta_second_differences_stay_bounded() {
    let phi = wavy(0.2);
    let q = default_quad();
    let x = 4.0;
    let second = |h: f64| {
        let f = |y: f64| eta_theta(y.exp(), &phi, &q).unwrap();
        let (a, b, c) = (f(x - h), f(x), f(x + h));
        ((a.0 - 2.0 * b.0 + c.0) / (h * h), (a.1 - 2.0 * b.1 + c.1) / (h * h))
    };
    let coarse = second(0.2);
    for h in [0.1, 0.05, 0.025] {
        let fine = second(h);
        assert!(fine.0.abs() <= 2.0 * coarse.0.abs() + 1e-3, "{fine:?} vs {coarse:?}");
        assert!(fine.1.abs() <= 2.0 * coarse.1.abs() + 1e-3, "{fine:?} vs {coarse:?}");
    }
}

#[test]
fn zeta_oscillates_iff_profile_does() {
    let q = default_quad();
    let d = 2f64.ln() / 6f64.ln();
    let period = 6f64.ln() * (1.0 - d) / 2.0;
    let eps: Vec<f64> = (0..8).map(|i| (-3.0 - period * i as f64 / 8.0).exp()).collect();
    let flat = zeta_curve(&eps, &wavy(0.0), &q).unwrap();
    let bumpy = zeta_curve(&eps, &wavy(0.2), &q).unwrap();
    assert!(flat.oscillation() <= 1e-9 * flat.mean_zeta, "{}", flat.oscillation());
    assert!(bumpy.oscillation() > 1e-6 * bumpy.mean_zeta, "{}", bumpy.oscillation());
}
