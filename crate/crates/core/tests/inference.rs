use rand::Rng;
use rand_distr::{Distribution, StudentT};

use odm::inference::{boundary_test, memberships, newey_west_variance};
use odm::simulate::rng_for;
use odm::special::{normal_cdf, normal_quantile};

#[test]
fn bartlett_variance_is_never_negative() {
    let mut rng = rng_for(10_000, 0);
    let heavy = StudentT::new(1.5).unwrap();
    for case in 0..10_000 {
        let n = rng.random_range(2..200);
        let m = rng.random_range(0..n);
        let x: Vec<f64> = (0..n)
            .map(|i| match case % 3 {
                0 => heavy.sample(&mut rng),
                1 => (if i % 2 == 0 { 1.0 } else { -1.0 }) * rng.random_range(0.5..1.5),
                _ => rng.random_range(-1e3..1e3),
            })
            .collect();
        let s2 = newey_west_variance(&x, m).unwrap();
        assert!(s2 >= 0.0, "case {case}: {s2}");
    }
}

#[test]
fn cdf_symmetry() {
    let mut rng = rng_for(11, 0);
    for _ in 0..1000 {
        let x: f64 = rng.random_range(-8.0..8.0);
        assert!((normal_cdf(-x) - (1.0 - normal_cdf(x))).abs() < 1e-14);
    }
    assert!((normal_quantile(0.975_f64).unwrap() - 1.959964).abs() < 1e-5);
}

#[test]
fn lower_membership_implies_upper() {
    let mut rng = rng_for(12, 0);
    for _ in 0..1000 {
        let t = rng.random_range(-10.0..10.0);
        let a = rng.random_range(0.001..0.5);
        let (up, lo) = memberships(t, a).unwrap();
        assert!(!lo || up);
    }
    assert_eq!(memberships(-10.0, 0.05).unwrap(), (true, true));
    assert_eq!(memberships(0.0, 0.05).unwrap(), (true, false));
}

#[test]
fn p_values_are_complementary() {
    let mut rng = rng_for(13, 0);
    for _ in 0..200 {
        let x: Vec<f64> = (0..300).map(|_| rng.random_range(-1.0..0.8)).collect();
        let r = boundary_test(&x, None).unwrap();
        assert!((r.p_left + r.p_right - 1.0).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&r.p_two_sided));
    }
}
