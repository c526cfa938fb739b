use arnav::stats::{normal_cdf, two_sided_p, z_test};
use arnav_oracles::normal_cdf_simpson;
use proptest::prelude::*;

#[test]
fn cdf_agrees_with_quadrature() {
    for i in -80..=80 {
        let z = i as f64 * 0.1;
        assert!((normal_cdf(z) - normal_cdf_simpson(z)).abs() < 1e-13, "z = {z}: {} {}", normal_cdf(z), normal_cdf_simpson(z));
    }
}

#[test]
fn reference_comparisons() {
    let a = z_test(6.98, 3.04, 48, 11.99, 2.99, 48).unwrap();
    assert!((a.z - 8.140312937).abs() < 1e-8);
    assert!(a.p_two_sided < 1e-3);
    let b = z_test(11.99, 2.99, 48, 12.75, 2.94, 48).unwrap();
    assert!((b.z - 1.255680293).abs() < 1e-8);
    assert!((b.p_two_sided - 2.0 * (1.0 - normal_cdf_simpson(b.z))).abs() < 1e-10);
}

proptest! {
    #[test]
    fn symmetric_in_sample_order(m1 in -50.0..50.0f64, s1 in 0.1..10.0f64, n1 in 2usize..200,
                                 m2 in -50.0..50.0f64, s2 in 0.1..10.0f64, n2 in 2usize..200) {
        let a = z_test(m1, s1, n1, m2, s2, n2).unwrap();
        let b = z_test(m2, s2, n2, m1, s1, n1).unwrap();
        prop_assert!((a.z - b.z).abs() < 1e-12);
        prop_assert!(a.z >= 0.0);
        prop_assert!((0.0..=1.0).contains(&a.p_two_sided));
        prop_assert!((two_sided_p(a.z) - a.p_two_sided).abs() == 0.0);
    }

    #[test]
    fn p_decreases_with_z(z1 in 0.0..8.0f64, dz in 0.0..2.0f64) {
        prop_assert!(two_sided_p(z1 + dz) <= two_sided_p(z1));
    }
}
