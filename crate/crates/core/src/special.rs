//! Normal distribution special functions.

use crate::num::Real;

// Chebyshev coefficients for erfc on [0, inf) after the map t = 2/(2+z).
const ERFC_COF: [f64; 28] = [
    -1.3026537197817094,
    6.419_697_923_564_902e-1,
    1.9476473204185836e-2,
    -9.561_514_786_808_63e-3,
    -9.46595344482036e-4,
    3.66839497852761e-4,
    4.2523324806907e-5,
    -2.0278578112534e-5,
    -1.624290004647e-6,
    1.303655835580e-6,
    1.5626441722e-8,
    -8.5238095915e-8,
    6.529054439e-9,
    5.059343495e-9,
    -9.91364156e-10,
    -2.27365122e-10,
    9.6467911e-11,
    2.394038e-12,
    -6.886027e-12,
    8.94487e-13,
    3.13092e-13,
    -1.12708e-13,
    3.81e-16,
    7.106e-15,
    -1.523e-15,
    -9.4e-17,
    1.21e-16,
    -2.8e-17,
];

fn erfc_nonneg<T: Real>(z: T) -> T {
    let two = T::lit(2.0);
    let t = two / (two + z);
    let ty = T::lit(4.0) * t - two;
    let mut d = T::zero();
    let mut dd = T::zero();
    for &c in ERFC_COF[1..].iter().rev() {
        let tmp = d;
        d = ty * d - dd + T::lit(c);
        dd = tmp;
    }
    t * (-z * z + T::lit(0.5) * (T::lit(ERFC_COF[0]) + ty * d) - dd).exp()
}

/// Complementary error function.
pub fn erfc<T: Real>(x: T) -> T {
    if x >= T::zero() {
        erfc_nonneg(x)
    } else {
        T::lit(2.0) - erfc_nonneg(-x)
    }
}

/// Standard normal density.
pub fn normal_pdf<T: Real>(x: T) -> T {
    (-x * x / T::lit(2.0)).exp() / (T::TAU()).sqrt()
}

/// Standard normal distribution function.
pub fn normal_cdf<T: Real>(x: T) -> T {
    T::lit(0.5) * erfc(-x / T::SQRT_2())
}

/// Upper tail `1 - Phi(x)`, accurate for large positive `x`.
pub fn normal_sf<T: Real>(x: T) -> T {
    T::lit(0.5) * erfc(x / T::SQRT_2())
}

// Acklam's rational approximation, relative error about 1.2e-9 before polishing.
const A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383_577_518_672_69e2,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];

fn horner<T: Real>(coefs: &[f64], x: T) -> T {
    coefs.iter().fold(T::zero(), |acc, &c| acc * x + T::lit(c))
}

fn acklam<T: Real>(p: T) -> T {
    let p_low = T::lit(0.02425);
    let half = T::lit(0.5);
    if p < p_low {
        let q = (T::lit(-2.0) * p.ln()).sqrt();
        horner(&C, q) / (horner(&D, q) * q + T::one())
    } else if p <= T::one() - p_low {
        let q = p - half;
        let r = q * q;
        horner(&A, r) * q / (horner(&B, r) * r + T::one())
    } else {
        let q = (T::lit(-2.0) * (T::one() - p).ln()).sqrt();
        -horner(&C, q) / (horner(&D, q) * q + T::one())
    }
}

/// Inverse of the standard normal distribution function.
///
/// Returns `-inf`/`+inf` at 0 and 1 and NaN outside `[0, 1]`.
pub fn normal_quantile<T: Real>(p: T) -> T {
    if p.is_nan() || p < T::zero() || p > T::one() {
        return T::nan();
    }
    if p == T::zero() {
        return T::neg_infinity();
    }
    if p == T::one() {
        return T::infinity();
    }
    // Work in the lower half so the residual is computed without cancellation.
    if p > T::lit(0.5) {
        return -lower_quantile(T::one() - p);
    }
    lower_quantile(p)
}

/// Solves `1 - Phi(x) = tail`, i.e. `x = Phi^{-1}(1 - tail)`, without forming `1 - tail`.
pub fn normal_upper_quantile<T: Real>(tail: T) -> T {
    if tail.is_nan() || tail < T::zero() || tail > T::one() {
        return T::nan();
    }
    if tail == T::zero() {
        return T::infinity();
    }
    if tail == T::one() {
        return T::neg_infinity();
    }
    if tail <= T::lit(0.5) {
        -lower_quantile(tail)
    } else {
        lower_quantile(T::one() - tail)
    }
}

fn lower_quantile<T: Real>(p: T) -> T {
    if p == T::lit(0.5) {
        return T::zero();
    }
    let mut x = acklam(p);
    // Halley steps on Phi(x) - p.
    for _ in 0..3 {
        let e = normal_cdf(x) - p;
        let u = e * T::TAU().sqrt() * (x * x / T::lit(2.0)).exp();
        let step = u / (T::one() + x * u / T::lit(2.0));
        if !step.is_finite() {
            break;
        }
        x = x - step;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from mpmath at 30 digits.
    const ERFC_REF: [(f64, f64); 8] = [
        (0.0, 1.0),
        (0.1, 0.887_537_083_981_715),
        (0.5, 0.479_500_122_186_953_5),
        (1.0, 0.15729920705028513),
        (2.0, 0.004677734981047266),
        (3.5, 7.430_983_723_414_128e-7),
        (6.0, 2.1519736712498913e-17),
        (-1.5, 1.9661051464753108),
    ];

    #[test]
    fn erfc_matches_reference() {
        for &(x, want) in ERFC_REF.iter() {
            let got = erfc(x);
            assert!(
                ((got - want) / want).abs() < 2e-15,
                "erfc({x}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &p in &[1e-100, 1e-12, 0.001, 0.02425, 0.1, 0.3, 0.5, 0.75, 0.975, 0.999999] {
            let x: f64 = normal_quantile(p);
            let back = normal_cdf(x);
            assert!(((back - p) / p).abs() < 1e-13, "p={p} x={x} back={back}");
        }
        assert_eq!(normal_quantile(0.5_f64), 0.0);
    }

    #[test]
    fn known_quantiles() {
        // mpmath: sqrt(2)*erfinv(2p-1)
        assert!((normal_quantile(0.975_f64) - 1.959963984540054).abs() < 1e-14);
        assert!((normal_quantile(0.75_f64) - 0.6744897501960817).abs() < 1e-14);
        assert!((normal_upper_quantile(0.15865525393145707_f64) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn single_precision_is_usable() {
        let x: f32 = normal_quantile(0.975_f32);
        assert!((x - 1.959964).abs() < 1e-4);
        assert!((normal_cdf(1.0_f32) - 0.841_344_7).abs() < 1e-6);
    }

    #[test]
    fn edge_arguments() {
        assert_eq!(normal_quantile(0.0_f64), f64::NEG_INFINITY);
        assert!(normal_quantile(1.5_f64).is_nan());
        assert_eq!(normal_cdf(50.0_f64), 1.0);
        assert_eq!(normal_sf(50.0_f64), 0.0);
    }
}
