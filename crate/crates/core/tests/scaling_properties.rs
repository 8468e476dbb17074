//! Property checks for the weight function and the six scalers.

use metascale::robust::{cell_weight, mad, median, row_weights, RobustParams};
use metascale::scaling::{
    auto_scale_row, pareto_scale_row, range_scale_row, weighted_scale_row, ScalingKind,
};
use metascale::{scale, MetaboliteMatrix, ScalingMethod};
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Φ(z) by composite Simpson quadrature of the density on [0, z].
fn normal_cdf_quadrature(z: f64) -> f64 {
    let n = 20_000;
    let h = z / n as f64;
    let mut s = normal_pdf(0.0) + normal_pdf(z);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * normal_pdf(i as f64 * h);
    }
    0.5 + s * h / 3.0
}

#[test]
fn critical_value_matches_quadrature_oracle() {
    for alpha in [0.01, 0.025, 0.05, 0.1, 0.2, 0.4] {
        let p = RobustParams::new(0.6754, alpha).unwrap();
        let z = p.z_alpha();
        // one Newton step against the quadrature CDF gives the oracle root
        let z_oracle = z - (normal_cdf_quadrature(z) - (1.0 - alpha)) / normal_pdf(z);
        assert!(
            (z - z_oracle).abs() < 1e-9,
            "alpha {alpha}: {z} vs {z_oracle}"
        );
    }
}

#[test]
fn outlier_fixture_weight() {
    let p = RobustParams::default();
    let row = [1.0, 2.0, 3.0, 4.0, 100.0];
    let med = median(&row).unwrap();
    let m = mad(&row, &p).unwrap();
    assert_eq!(med, 3.0);
    let d = (100.0 - med) / m;
    let oracle = p.z_alpha().powi(2) / (d * d);
    let w = row_weights(&row, &p).unwrap();
    assert!((w.as_slice()[4] - oracle).abs() / oracle < 1e-6);
    assert!((oracle - 6.304e-4).abs() < 1e-6);
    assert_eq!(&w.as_slice()[..4], &[1.0; 4]);
}

fn random_row(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Vec<f64> {
    let n = rng.random_range(3..40);
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

#[test]
fn auto_and_range_unit_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let row = random_row(&mut rng, -50.0, 500.0);
        let a = auto_scale_row(&row);
        assert!(!a.constant);
        let n = a.values.len() as f64;
        let mean = a.values.iter().sum::<f64>() / n;
        let sd = (a.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!(mean.abs() < 1e-9);
        assert!((sd - 1.0).abs() < 1e-9);
        let r = range_scale_row(&row);
        let max = r.values.iter().copied().fold(f64::MIN, f64::max);
        let min = r.values.iter().copied().fold(f64::MAX, f64::min);
        assert!((max - min - 1.0).abs() < 1e-9);
    }
}

#[test]
fn weighted_reduces_to_population_sd_autoscaling_on_clean_rows() {
    let p = RobustParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checked = 0;
    while checked < 1000 {
        let row = random_row(&mut rng, 0.0, 100.0);
        let med = median(&row).unwrap();
        let m = mad(&row, &p).unwrap();
        if row.iter().any(|x| (x - med).abs() / m > p.z_alpha()) {
            continue;
        }
        let n = row.len() as f64;
        let factor = (n / (n - 1.0)).sqrt();
        let w = weighted_scale_row(&row, &p);
        let a = auto_scale_row(&row);
        for (x, y) in w.values.iter().zip(&a.values) {
            assert!((x - y * factor).abs() < 1e-10);
        }
        checked += 1;
    }
}

#[test]
fn pareto_equals_auto_when_sd_is_one() {
    for start in [-3.0, 0.0, 1.0, 17.0, 1000.0] {
        let row = [start, start + 1.0, start + 2.0];
        assert_eq!(pareto_scale_row(&row).values, auto_scale_row(&row).values);
    }
}

#[test]
fn weighted_scaling_resists_a_growing_outlier() {
    let p = RobustParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let clean: Vec<f64> = (0..49).map(|_| rng.random_range(10.0..20.0)).collect();
    let max = clean.iter().copied().fold(f64::MIN, f64::max);
    let with = |m: f64| {
        let mut r = clean.clone();
        r.push(m);
        r
    };
    let w1 = weighted_scale_row(&with(10.0 * max), &p);
    let w2 = weighted_scale_row(&with(100.0 * max), &p);
    for (a, b) in w1.values[..49].iter().zip(&w2.values[..49]) {
        assert!((a - b).abs() < 1e-2, "{a} vs {b}");
    }
    let peak = |v: &[f64]| v[..49].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let a1 = auto_scale_row(&with(10.0 * max));
    let a2 = auto_scale_row(&with(100.0 * max));
    assert!(peak(&a2.values) <= 0.5 * peak(&a1.values));
}

#[test]
fn every_method_preserves_shape_and_row_independence() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let v = Array2::from_shape_fn((12, 9), |_| rng.random_range(1.0..50.0));
    let full = MetaboliteMatrix::from_array(v.clone()).unwrap();
    let sub = MetaboliteMatrix::from_array(v.slice(ndarray::s![3..7, ..]).to_owned()).unwrap();
    for kind in ScalingKind::ALL {
        let method = ScalingMethod::new(kind);
        let s = scale(&full, &method);
        assert_eq!(s.values.dim(), (12, 9));
        let part = scale(&sub, &method);
        for (a, b) in part
            .values
            .iter()
            .zip(s.values.slice(ndarray::s![3..7, ..]).iter())
        {
            assert_eq!(a.to_bits(), b.to_bits(), "{kind}");
        }
    }
}

proptest! {
    #[test]
    fn weights_are_affine_invariant(
        row in prop::collection::vec(-100.0f64..100.0, 3..30),
        a in 0.01f64..100.0,
        b in -1e3f64..1e3,
    ) {
        let p = RobustParams::default();
        let moved: Vec<f64> = row.iter().map(|x| a * x + b).collect();
        let w0 = row_weights(&row, &p).unwrap();
        let w1 = row_weights(&moved, &p).unwrap();
        for (x, y) in w0.as_slice().iter().zip(w1.as_slice()) {
            prop_assert!((x - y).abs() <= 1e-12, "{} vs {}", x, y);
        }
    }

    #[test]
    fn weights_in_unit_interval(x in -1e300f64..1e300, med in -1e300f64..1e300, m in 0.0f64..1e300) {
        let w = cell_weight(x, med, m, &RobustParams::default());
        prop_assert!(w > 0.0 && w <= 1.0);
    }
}
