use harmonic_explorer::loewner::{
    evaluate_map, extract_driving, hausdorff, sle_path, slit_forward, slit_inverse, trace_points, zigzag_fixture,
    DrivingFunction, HCurve, Metric, SlitStep,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn sup_norm(d: &DrivingFunction) -> f64 {
    d.values().iter().fold(0.0, |m, w| m.max(w.abs()))
}

/// Largest gap between two driving functions, read in the middle of each
/// step of `a` so that rounding of the step ends does not matter.
fn sup_error(a: &DrivingFunction, b: &DrivingFunction) -> f64 {
    a.times().windows(2).zip(&a.values()[1..]).map(|(t, w)| (b.value_at(0.5 * (t[0] + t[1])) - w).abs()).fold(0.0, f64::max)
}

/// A smooth curve leaning right with a gentle wiggle.
fn wiggle(n: usize) -> Vec<Complex64> {
    (0..=n)
        .map(|k| {
            let s = k as f64 / n as f64;
            Complex64::new(0.3 * s + 0.05 * (6.0 * s).sin(), s)
        })
        .collect()
}

#[test]
fn vertical_segment_fixture() {
    for height in [0.5, 1.0, 3.0] {
        let pts: Vec<Complex64> = (0..=100).map(|k| Complex64::new(0.0, height * k as f64 / 100.0)).collect();
        let d = extract_driving(&HCurve::new(pts).unwrap(), 1e-3).unwrap();
        assert!(sup_norm(&d) <= 1e-6);
        assert!((d.horizon() - height * height / 4.0).abs() <= 1e-4);
    }
}

#[test]
fn zigzag_driving_shrinks_with_eps() {
    let norms: Vec<f64> = [0.2, 0.1, 0.05, 0.025]
        .iter()
        .map(|&eps| {
            let count = (1.0 / eps) as usize;
            sup_norm(&extract_driving(&zigzag_fixture(eps, count), 1e-4).unwrap())
        })
        .collect();
    for pair in norms.windows(2) {
        assert!(pair[1] < pair[0], "{norms:?}");
    }
}

#[test]
fn extraction_scales_covariantly() {
    let c = zigzag_fixture(0.1, 10);
    for lambda in [0.5, 3.0] {
        let a = extract_driving(&c, 1e-4).unwrap();
        let b = extract_driving(&c.scaled(lambda), 1e-4 * lambda * lambda).unwrap();
        assert_eq!(a.len(), b.len());
        for k in 0..a.len() {
            assert!((b.times()[k] - lambda * lambda * a.times()[k]).abs() <= 1e-6);
            assert!((b.values()[k] - lambda * a.values()[k]).abs() <= 1e-6);
        }
    }
}

#[test]
fn capacity_is_additive_over_halves() {
    let pts = wiggle(60);
    // A large step bound keeps bisection out of the way, so both routes
    // see the same points.
    let dt_max = 10.0;
    let full = extract_driving(&HCurve::new(pts.clone()).unwrap(), dt_max).unwrap();
    let first = extract_driving(&HCurve::new(pts[..=30].to_vec()).unwrap(), dt_max).unwrap();
    let t1 = first.horizon();
    let w1 = first.value_at(t1);
    let mut image = vec![Complex64::new(0.0, 0.0)];
    for &z in &pts[31..] {
        image.push(evaluate_map(&first, t1, z).unwrap() - w1);
    }
    let second = extract_driving(&HCurve::new(image).unwrap(), dt_max).unwrap();
    assert!((first.horizon() + second.horizon() - full.horizon()).abs() <= 1e-6);
    let joined: Vec<SlitStep> =
        first.steps().chain(second.steps().map(|s| SlitStep { w: s.w + w1, dt: s.dt })).collect();
    let full: Vec<SlitStep> = full.steps().collect();
    assert_eq!(joined.len(), full.len());
    for (a, b) in joined.iter().zip(&full) {
        assert!((a.w - b.w).abs() <= 1e-6 && (a.dt - b.dt).abs() <= 1e-6);
    }
}

#[test]
fn sle_round_trip_stays_within_two_percent() {
    let (kappa, horizon) = (4.0f64, 0.5f64);
    for seed in [1, 2, 3] {
        let (d, trace) = sle_path(kappa, 1e-4, horizon, seed).unwrap();
        let back = extract_driving(&trace, 1e-3).unwrap();
        let worst = sup_error(&d, &back);
        assert!(worst <= 0.02 * (kappa * horizon).sqrt(), "seed {seed}: {worst}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn slit_maps_invert(x in -3.0f64..3.0, y in 0.01f64..3.0, w in -1.0f64..1.0, dt in 1e-4f64..0.5) {
        let s = SlitStep { w, dt };
        let z = Complex64::new(x, y);
        let g = slit_forward(z, s).unwrap();
        prop_assert!(g.im > 0.0);
        prop_assert!((slit_inverse(g, s) - z).norm() <= 1e-9 * (1.0 + z.norm()));
    }

    #[test]
    fn traced_steps_are_recovered(ws in prop::collection::vec(-0.05f64..0.05, 5..40)) {
        let mut acc = 0.0;
        let mut t = vec![0.0];
        let mut w = vec![0.0];
        for (k, dw) in ws.iter().enumerate() {
            acc += dw;
            t.push((k + 1) as f64 * 1e-3);
            w.push(acc);
        }
        let d = DrivingFunction::new(t, w).unwrap();
        let back = extract_driving(&HCurve::new(trace_points(&d)).unwrap(), 1e-3 * (1.0 + 1e-9)).unwrap();
        prop_assert!((back.horizon() - d.horizon()).abs() <= 1e-9);
        prop_assert!(sup_error(&d, &back) <= 1e-7);
    }

    #[test]
    fn hausdorff_is_a_metric_on_samples(
        a in prop::collection::vec((-2.0f64..2.0, 0.0f64..2.0), 1..12),
        b in prop::collection::vec((-2.0f64..2.0, 0.0f64..2.0), 1..12),
        c in prop::collection::vec((-2.0f64..2.0, 0.0f64..2.0), 1..12),
    ) {
        let to = |v: &[(f64, f64)]| v.iter().map(|&(x, y)| Complex64::new(x, y)).collect::<Vec<_>>();
        let (a, b, c) = (to(&a), to(&b), to(&c));
        for metric in [Metric::Euclidean, Metric::DStar] {
            let ab = hausdorff(&a, &b, metric).unwrap();
            prop_assert_eq!(ab, hausdorff(&b, &a, metric).unwrap());
            prop_assert_eq!(hausdorff(&a, &a, metric).unwrap(), 0.0);
            let ac = hausdorff(&a, &c, metric).unwrap();
            let cb = hausdorff(&c, &b, metric).unwrap();
            prop_assert!(ab <= ac + cb + 1e-12);
        }
    }
}
