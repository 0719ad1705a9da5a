use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use proptest::prelude::*;
use surplus_consensus::delay::lambert_w;

const REFERENCE: &str = include_str!("data/lambert_reference.txt");

#[test]
fn matches_reference_branch_values() {
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for line in REFERENCE.lines().filter(|l| !l.starts_with('#')) {
        let f: Vec<&str> = line.split_whitespace().collect();
        let z = Complex64::new(f[0].parse().unwrap(), f[1].parse().unwrap());
        let k: i32 = f[2].parse().unwrap();
        let expected = Complex64::new(f[3].parse().unwrap(), f[4].parse().unwrap());
        match lambert_w(z, k) {
            Ok(w) if (w - expected).norm() <= 1e-10 * expected.norm().max(1.0) => {
                assert!((w * w.exp() - z).norm() <= 1e-12 * z.norm().max(1.0));
            }
            other => mismatches.push(format!("z={z} k={k}: got {other:?}, expected {expected}")),
        }
        checked += 1;
    }
    assert!(checked > 300);
    assert!(mismatches.is_empty(), "{}", mismatches.join("\n"));
}

proptest! {
    #[test]
    fn residual_on_left_half_plane(r in 1e-3f64..8.0, angle in FRAC_PI_2..(3.0 * FRAC_PI_2), k in -5i32..=5) {
        let z = Complex64::from_polar(r, angle);
        let w = lambert_w(z, k).unwrap();
        prop_assert!((w * w.exp() - z).norm() <= 1e-12 * z.norm().max(1.0));
    }

    #[test]
    fn residual_anywhere(re in -20.0f64..20.0, im in -20.0f64..20.0, k in -3i32..=3) {
        prop_assume!(re.abs() + im.abs() > 1e-9);
        let z = Complex64::new(re, im);
        let w = lambert_w(z, k).unwrap();
        prop_assert!((w * w.exp() - z).norm() <= 1e-12 * z.norm().max(1.0));
    }
}
