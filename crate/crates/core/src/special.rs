//! Log-gamma, Student-t normalizers and the standard normal distribution.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7, nine terms).
///
/// Arguments below 1/2 go through the reflection formula. Returns NaN for
/// non-positive integers and non-finite input.
pub fn ln_gamma<T: Scalar>(x: T) -> T {
    if !x.is_finite() {
        return if x == T::infinity() { x } else { T::nan() };
    }
    let half = T::lit(0.5);
    if x < half {
        let pi = T::PI();
        let s = (pi * x).sin().abs();
        if s == T::zero() {
            return T::nan();
        }
        return (pi / s).ln() - ln_gamma(T::one() - x);
    }
    let z = x - T::one();
    let mut acc = T::lit(LANCZOS_COEF[0]);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (z + T::from_usize_lossy(i));
    }
    let t = z + T::lit(LANCZOS_G) + half;
    half * (T::lit(2.0) * T::PI()).ln() + (z + half) * t.ln() - t + acc.ln()
}

/// `ln Γ((v+1)/2) − ln Γ(v/2)`, the gamma part of every Student-t normalizer.
pub fn ln_gamma_half_ratio<T: Scalar>(v: T) -> T {
    let half = T::lit(0.5);
    ln_gamma(half * (v + T::one())) - ln_gamma(half * v)
}

/// Log-density of the standard (unit-scale) Student-t with `v` degrees of freedom.
pub fn student_t_log_pdf<T: Scalar>(x: T, v: T) -> T {
    ln_gamma_half_ratio(v) - T::lit(0.5) * (v * T::PI()).ln()
        - T::lit(0.5) * (v + T::one()) * (x * x / v).ln_1p()
}

/// Standard normal CDF.
///
/// Double-precision rational approximation (Hart 5666 as arranged by West);
/// both tails are computed from the same expression so `Φ(−x) = 1 − Φ(x)`
/// holds to rounding.
pub fn normal_cdf<T: Scalar>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    let ax = x.abs();
    let tail = if ax > T::lit(37.0) {
        T::zero()
    } else {
        let e = (-ax * ax * T::lit(0.5)).exp();
        if ax < T::lit(7.071_067_811_865_47) {
            let num = [
                3.526_249_659_989_11e-2,
                0.700_383_064_443_688,
                6.373_962_203_531_65,
                33.912_866_078_383,
                112.079_291_497_871,
                221.213_596_169_931,
                220.206_867_912_376,
            ];
            let den = [
                8.838_834_764_831_84e-2,
                1.755_667_163_182_64,
                16.064_177_579_207,
                86.780_732_202_946_1,
                296.564_248_779_674,
                637.333_633_378_831,
                793.826_512_519_948,
                440.413_735_824_752,
            ];
            let p = num.iter().fold(T::zero(), |acc, &c| acc * ax + T::lit(c));
            let q = den.iter().fold(T::zero(), |acc, &c| acc * ax + T::lit(c));
            e * p / q
        } else {
            let mut b = ax + T::lit(0.65);
            for k in [4.0, 3.0, 2.0, 1.0] {
                b = ax + T::lit(k) / b;
            }
            e / b / T::lit(2.506_628_274_631)
        }
    };
    if x > T::zero() {
        T::one() - tail
    } else {
        tail
    }
}

/// Standard normal quantile `z_p`, for `p` in the open unit interval.
///
/// Acklam's rational approximation followed by one Halley step against
/// [`normal_cdf`].
pub fn normal_quantile<T: Scalar>(p: T) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::Domain(format!(
            "normal quantile requires 0 < p < 1, got {p}"
        )));
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_690e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let horner = |coef: &[f64], x: T| coef.iter().fold(T::zero(), |acc, &c| acc * x + T::lit(c));
    let p_low = T::lit(0.02425);
    let one = T::one();
    let x = if p < p_low {
        let q = (T::lit(-2.0) * p.ln()).sqrt();
        horner(&C, q) / (horner(&D, q) * q + one)
    } else if p <= one - p_low {
        let q = p - T::lit(0.5);
        let r = q * q;
        horner(&A, r) * q / (horner(&B, r) * r + one)
    } else {
        let q = (T::lit(-2.0) * (one - p).ln()).sqrt();
        -horner(&C, q) / (horner(&D, q) * q + one)
    };
    let e = normal_cdf(x) - p;
    let u = e * (T::lit(2.0) * T::PI()).sqrt() * (x * x * T::lit(0.5)).exp();
    Ok(x - u / (one + x * u * T::lit(0.5)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact_ln_gamma_half_integer(twice: u32) -> f64 {
        // Γ(n/2) from Γ(1/2) = √π and Γ(1) = 1 by repeated x·Γ(x).
        let (mut x, mut lg) = if twice % 2 == 1 {
            (0.5_f64, 0.5 * std::f64::consts::PI.ln())
        } else {
            (1.0_f64, 0.0)
        };
        while (2.0 * x) < twice as f64 {
            lg += x.ln();
            x += 1.0;
        }
        lg
    }

    #[test]
    fn ln_gamma_matches_half_integer_table() {
        for twice in 1..=200u32 {
            let x = twice as f64 / 2.0;
            let exact = exact_ln_gamma_half_integer(twice);
            let got = ln_gamma(x);
            let err = (got - exact).abs() / exact.abs().max(1.0);
            assert!(err < 1e-12, "x={x}: {got} vs {exact}");
        }
    }

    #[test]
    fn ln_gamma_reflection_and_f32() {
        // Γ(0.25)·Γ(0.75) = π√2
        let lhs = ln_gamma(0.25_f64) + ln_gamma(0.75_f64);
        let rhs = (std::f64::consts::PI * 2f64.sqrt()).ln();
        assert!((lhs - rhs).abs() < 1e-13);
        assert!((ln_gamma(4.5_f32) - 2.453_736_6_f32).abs() < 1e-5);
        assert!(ln_gamma(0.0_f64).is_nan());
    }

    #[test]
    fn student_t_density_integrates_to_one() {
        for v in [2.5_f64, 4.0, 7.0, 30.0] {
            let h = 1e-3;
            let mut s = 0.0;
            let mut x = -2000.0_f64;
            while x < 2000.0 {
                s += student_t_log_pdf(x + 0.5 * h, v).exp() * h;
                x += h;
            }
            // slowly decaying tails beyond ±2000 are below the tolerance for v ≥ 2.5
            assert!((s - 1.0).abs() < 1e-5, "v={v}: {s}");
        }
    }

    #[test]
    fn normal_quantile_values() {
        assert_eq!(normal_quantile(0.5_f64).unwrap(), 0.0);
        assert!((normal_quantile(0.975_f64).unwrap() - 1.959_963_984_540_054).abs() < 1e-9);
        assert!((normal_quantile(0.05_f64).unwrap() + 1.644_853_626_951_472_2).abs() < 1e-9);
        assert!(normal_quantile(0.0_f64).is_err());
        assert!(normal_quantile(1.0_f64).is_err());
        assert!(normal_quantile(f64::NAN).is_err());
    }

    #[test]
    fn normal_quantile_inverts_cdf() {
        let mut p = 1e-12_f64;
        while p < 1.0 {
            let z = normal_quantile(p).unwrap();
            assert!((normal_cdf(z) - p).abs() < 1e-10, "p={p}");
            p = if p < 0.01 { p * 3.0 } else { p + 0.0071 };
        }
    }

    #[test]
    fn normal_cdf_reference_points() {
        // values from a high-precision reference
        assert!((normal_cdf(1.0_f64) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((normal_cdf(-2.0_f64) - 0.022_750_131_948_179_2).abs() < 1e-15);
        assert!((normal_cdf(-5.0_f64) / 2.866_515_718_791_933e-7 - 1.0).abs() < 1e-9);
        assert_eq!(normal_cdf(-40.0_f64), 0.0);
        assert_eq!(normal_cdf(40.0_f64), 1.0);
    }
}
