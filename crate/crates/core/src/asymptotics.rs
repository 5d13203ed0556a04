//! Closed-form predictions for `n(eps, d)` as `d` grows.

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::{big_ln, Real};
use crate::special::{normal_cdf, normal_pdf, normal_upper_quantile};
use crate::spectrum::{LatticeStructure, SpectralSummary};

/// Largest `log_n_hat` for which `n_hat` itself is reported.
pub const OVERFLOW_LOG: f64 = 700.0;

/// `q = sigma Phi^{-1}(1 - eps^2)`.
pub fn normal_quantile_q<T: Real>(eps: T, sigma: T) -> Result<T> {
    if !(eps > T::zero() && eps < T::one()) {
        return Err(Error::EpsOutOfRange(eps.to_f64_lossy()));
    }
    if !(sigma > T::zero()) {
        return Err(Error::DegenerateSigma);
    }
    Ok(sigma * normal_upper_quantile(eps * eps))
}

/// `K = h / (sigma (1 - e^{-2h}))` on a lattice of span `h`, `1/(2 sigma)` otherwise.
pub fn k_constant<T: Real>(lattice: &LatticeStructure<T>, sigma: T) -> Result<T> {
    if !(sigma > T::zero()) {
        return Err(Error::DegenerateSigma);
    }
    Ok(match lattice.span() {
        Some(h) => h / (sigma * -(-T::lit(2.0) * h).exp_m1()),
        None => T::one() / (T::lit(2.0) * sigma),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticPrediction<T> {
    pub q: T,
    #[serde(rename = "K")]
    pub k: T,
    /// `ln(K phi(q/sigma) E^d e^{2 q sqrt d} d^{-1/2})`.
    pub log_n_hat: T,
    /// Present only when `log_n_hat < 700`.
    pub n_hat: Option<T>,
    /// Limit `2q` of the log-scale statistic.
    pub r_limit: T,
}

fn check_summary<T: Real>(summary: &SpectralSummary<T>) -> Result<()> {
    if !summary.moment_ok {
        return Err(Error::MomentConditionViolated);
    }
    summary.require_nondegenerate()
}

/// `n_hat = K phi(q/sigma) E^d e^{2 q sqrt d} / sqrt d`, composed in the log domain.
pub fn predict_cardinality<T: Real>(
    summary: &SpectralSummary<T>,
    lattice: &LatticeStructure<T>,
    eps: T,
    d: usize,
) -> Result<AsymptoticPrediction<T>> {
    check_summary(summary)?;
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    let sigma = summary.sigma();
    let q = normal_quantile_q(eps, sigma)?;
    let k = k_constant(lattice, sigma)?;
    let dd = T::from_count(d);
    let x = q / sigma;
    let log_phi = -x * x / T::lit(2.0) - T::TAU().ln() / T::lit(2.0);
    let log_n_hat = k.ln() + log_phi + dd * summary.explosion.ln() + T::lit(2.0) * q * dd.sqrt() - dd.ln() / T::lit(2.0);
    let n_hat = (log_n_hat < T::lit(OVERFLOW_LOG)).then(|| log_n_hat.exp());
    Ok(AsymptoticPrediction {
        q,
        k,
        log_n_hat,
        n_hat,
        r_limit: T::lit(2.0) * q,
    })
}

/// `(ln n - d ln E) / sqrt d`, with `ln n` taken from the exact integer.
pub fn log_scale_statistic<T: Real>(n: &BigUint, d: usize, explosion: T) -> T {
    let dd = T::from_count(d);
    (T::lit(big_ln(n)) - dd * explosion.ln()) / dd.sqrt()
}

/// Same statistic from `ln n`.
pub fn log_scale_statistic_ln<T: Real>(log_n: T, d: usize, explosion: T) -> T {
    let dd = T::from_count(d);
    (log_n - dd * explosion.ln()) / dd.sqrt()
}

/// `S(x) = [x] - x + 1/2`, with arguments within `1e-9` of an integer snapped onto it.
pub fn sawtooth<T: Real>(x: T) -> T {
    let r = x.round();
    let x = if (x - r).abs() <= T::lit(1e-9) * T::one().max(x.abs()) { r } else { x };
    x.floor() - x + T::lit(0.5)
}

/// One-term Edgeworth approximation of `F_d(z) = P(Z_d <= z)`.
pub fn edgeworth_cdf<T: Real>(z: T, d: usize, summary: &SpectralSummary<T>, lattice: &LatticeStructure<T>) -> Result<T> {
    check_summary(summary)?;
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    let sigma = summary.sigma();
    let dd = T::from_count(d);
    let sd = dd.sqrt();
    let skew = summary.third_central * (z * z - T::one()) / (T::lit(6.0) * sigma.powi(3) * sd);
    let lattice_term = match lattice.lattice() {
        Some(l) => {
            let a = l.offset(summary.mean);
            l.span / sigma * sawtooth((z * sigma * sd - dd * a) / l.span) / sd
        }
        None => T::zero(),
    };
    let value = normal_cdf(z) + normal_pdf(z) * (lattice_term - skew);
    Ok(value)
}

/// Integrals from the tail expansion around `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefinedTerms<T> {
    pub i1: T,
    pub i2: T,
    pub i3: T,
    pub i4: T,
    pub i2_minus_i3_minus_i4: T,
    /// Lattice discrete part; `theta` is expected to be a grid point of `Z_d`.
    pub j3: Option<T>,
}

#[allow(clippy::too_many_arguments)]
fn simpson<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, fa: T, fm: T, fb: T, whole: T, tol: T, depth: u32) -> T {
    let two = T::lit(2.0);
    let m = (a + b) / two;
    let lm = (a + m) / two;
    let rm = (m + b) / two;
    let flm = f(lm);
    let frm = f(rm);
    let six = T::lit(6.0);
    let left = (m - a) * (fa + T::lit(4.0) * flm + fm) / six;
    let right = (b - m) * (fm + T::lit(4.0) * frm + fb) / six;
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= T::lit(15.0) * tol {
        return left + right + delta / T::lit(15.0);
    }
    simpson(f, a, m, fa, flm, fm, left, tol / two, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / two, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> T {
    // split first so narrow features near the origin are not skipped
    let pieces = 16;
    let h = (b - a) / T::from_count(pieces);
    let mut total = T::zero();
    for i in 0..pieces {
        let lo = a + T::from_count(i) * h;
        let hi = lo + h;
        let (flo, fhi) = (f(lo), f(hi));
        let fm = f((lo + hi) / T::lit(2.0));
        let whole = (hi - lo) * (flo + T::lit(4.0) * fm + fhi) / T::lit(6.0);
        total = total + simpson(&f, lo, hi, flo, fm, fhi, whole, tol / T::from_count(pieces), 48);
    }
    total
}

/// `I_1`, `I_2`, `I_3`, `I_4` and, on a lattice, `J_3`.
pub fn refined_tail_terms<T: Real>(theta: T, sigma: T, alpha3: T, d: usize, lattice: &LatticeStructure<T>) -> RefinedTerms<T> {
    let dd = T::from_count(d);
    let sd = dd.sqrt();
    let two = T::lit(2.0);
    let root = (T::TAU() * dd).sqrt();
    let upper = T::lit(20.0) / sigma;
    let tol = T::lit(1e-15).max(T::epsilon() * T::lit(10.0));
    let gauss = |y: T| {
        let x = theta - y / sd;
        (-x * x / two).exp()
    };
    let base = |y: T| gauss(y) * (-two * sigma * y).exp();
    let weighted = |y: T| {
        let x = theta - y / sd;
        x * x * base(y)
    };
    let i1 = integrate(base, T::zero(), upper, tol) / root;
    let (i2, i3, i4) = if alpha3 == T::zero() {
        (T::zero(), T::zero(), T::zero())
    } else {
        let pre = alpha3 / (T::lit(3.0) * sigma * sigma * root);
        let i2 = pre * integrate(weighted, T::zero(), upper, tol);
        let i3 = pre * integrate(base, T::zero(), upper, tol);
        let i4 = alpha3 / (T::lit(6.0) * sigma.powi(3) * root) * (theta * theta - T::one()) * (-theta * theta / two).exp();
        (i2, i3, i4)
    };
    let j3 = lattice.span().map(|h| lattice_series(theta, sigma, d, h));
    RefinedTerms {
        i1,
        i2,
        i3,
        i4,
        i2_minus_i3_minus_i4: i2 - i3 - i4,
        j3,
    }
}

/// `J_3 = h/(sigma sqrt(2 pi d)) sum_{l >= 0} e^{-2hl} exp(-(theta - l h/(sigma sqrt d))^2/2)`.
fn lattice_series<T: Real>(theta: T, sigma: T, d: usize, h: T) -> T {
    let dd = T::from_count(d);
    let sd = sigma * dd.sqrt();
    let two = T::lit(2.0);
    let pre = h / (sigma * (T::TAU() * dd).sqrt());
    let term = |x: T| {
        // x = l h
        let g = theta - x / sd;
        (-two * x).exp() * (-g * g / two).exp()
    };
    let terms_needed = (T::lit(40.0) / (two * h)).to_f64_lossy();
    if terms_needed > 1.0e6 {
        // fine grid: the sum is an integral plus the half end term
        let integral = integrate(term, T::zero(), T::lit(20.0), T::lit(1e-15)) / h;
        return pre * (integral + term(T::zero()) / two);
    }
    let mut sum = T::zero();
    let mut l = 0usize;
    loop {
        let x = T::from_count(l) * h;
        let t = term(x);
        sum = sum + t;
        if (-two * x).exp() < T::lit(1e-16) * sum {
            break;
        }
        l += 1;
    }
    pre * sum
}

/// `ln` of the pre-limit expression `E^d e^{2 sigma sqrt d theta} (J_3 + I_2 - I_3 - I_4)`,
/// with `I_1` in place of `J_3` off the lattice, evaluated at the exact `theta`.
pub fn log_n_pre_limit<T: Real>(summary: &SpectralSummary<T>, lattice: &LatticeStructure<T>, theta: T, d: usize) -> Result<T> {
    check_summary(summary)?;
    let sigma = summary.sigma();
    let dd = T::from_count(d);
    let terms = refined_tail_terms(theta, sigma, summary.third_central, d, lattice);
    let main = terms.j3.unwrap_or(terms.i1) + terms.i2_minus_i3_minus_i4;
    if !(main > T::zero()) {
        return Err(Error::InvalidArgument(format!("pre-limit expression {main} is not positive")));
    }
    Ok(dd * summary.explosion.ln() + T::lit(2.0) * sigma * dd.sqrt() * theta + main.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{spectral_summary, Lattice, SpectrumSpec};
    use std::f64::consts::{LN_2, PI};

    fn lattice(h: f64) -> LatticeStructure<f64> {
        LatticeStructure::Lattice(Lattice {
            span: h,
            shift: 0.0,
            indices: vec![],
            advisory: false,
        })
    }

    const NON: LatticeStructure<f64> = LatticeStructure::NonLattice { advisory: false };

    #[test]
    fn quantile_examples() {
        assert!(normal_quantile_q(0.5f64.sqrt(), 1.0).unwrap().abs() < 1e-15);
        let eps = 0.15865525393145707f64.sqrt();
        assert!((normal_quantile_q(eps, 1.0).unwrap() - 1.0).abs() < 1e-6);
        assert!((normal_quantile_q(eps, 2.0).unwrap() - 2.0).abs() < 1e-6);
        assert!(matches!(normal_quantile_q(1.2, 1.0), Err(Error::EpsOutOfRange(_))));
        assert!(matches!(normal_quantile_q(0.5, 0.0), Err(Error::DegenerateSigma)));
    }

    #[test]
    fn k_examples() {
        assert_eq!(k_constant(&NON, 2.0).unwrap(), 0.25);
        let k = k_constant(&lattice(LN_2 / 2.0), LN_2 / 2f64.sqrt()).unwrap();
        assert!((k - 2f64.sqrt()).abs() < 1e-14);
        let k = k_constant(&lattice(1e-8), 1.0).unwrap();
        assert!((k - 0.5).abs() < 1e-7);
        for h in [1e-3, 5e-3, 1e-2] {
            let sigma = 0.7;
            assert!((k_constant(&lattice(h), sigma).unwrap() - 0.5 / sigma).abs() <= h / sigma);
        }
    }

    #[test]
    fn prediction_example() {
        let s = spectral_summary::<f64>(&SpectrumSpec::catalog("geometric_half"), 1e-13).unwrap();
        let p = predict_cardinality(&s, &lattice(LN_2 / 2.0), 0.5f64.sqrt(), 4).unwrap();
        let want = 256.0 / (4.0 * PI).sqrt();
        assert!((p.n_hat.unwrap() - want).abs() < 1e-10);
        assert!(p.r_limit.abs() < 1e-15);
        let single = spectral_summary::<f64>(&SpectrumSpec::explicit([0.5]), 1e-13).unwrap();
        assert!(matches!(predict_cardinality(&single, &NON, 0.5, 4), Err(Error::DegenerateSpectrum(_))));
    }

    #[test]
    fn overflow_reports_only_log() {
        let s = spectral_summary::<f64>(&SpectrumSpec::catalog("geometric_half"), 1e-13).unwrap();
        let p = predict_cardinality(&s, &lattice(LN_2 / 2.0), 0.5, 1000).unwrap();
        assert!(p.n_hat.is_none() && p.log_n_hat > 700.0);
    }

    #[test]
    fn statistic_examples() {
        let e = 4.0f64;
        for d in [1usize, 5, 20] {
            let n = BigUint::from(4u8).pow(d as u32);
            assert!(log_scale_statistic(&n, d, e).abs() < 1e-12);
            assert!((log_scale_statistic(&BigUint::from(1u8), d, e) + (d as f64).sqrt() * e.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn sawtooth_convention() {
        assert_eq!(sawtooth(0.0), 0.5);
        assert!((sawtooth(0.25f64) - 0.25).abs() < 1e-15);
        assert!((sawtooth(0.999f64) + 0.499).abs() < 1e-12);
        assert_eq!(sawtooth(2.0 - 1e-12), 0.5);
        assert!((sawtooth(-0.25f64) + 0.25).abs() < 1e-15);
    }

    #[test]
    fn edgeworth_reduces_to_normal() {
        let mut s = spectral_summary::<f64>(&SpectrumSpec::catalog("geometric_half"), 1e-13).unwrap();
        s.third_central = 0.0;
        for z in [-2.0, 0.0, 1.3] {
            assert!((edgeworth_cdf(z, 9, &s, &NON).unwrap() - normal_cdf(z)).abs() < 1e-15);
        }
        assert!((edgeworth_cdf(50.0, 9, &s, &lattice(0.3)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn integrals_reach_their_limits() {
        let d = 1_000_000;
        let root = (2.0 * PI * d as f64).sqrt();
        let t = refined_tail_terms(0.0, 1.0, 0.0, d, &NON);
        assert!((root * t.i1 - 0.5).abs() < 1e-3);
        assert_eq!(t.i2_minus_i3_minus_i4, 0.0);
        let t = refined_tail_terms(0.0, 1.0, 1.0, d, &lattice(LN_2));
        let want = LN_2 / (1.0 - (-2.0 * LN_2).exp()) / (2.0 * PI).sqrt();
        assert!(((d as f64).sqrt() * t.j3.unwrap() - want).abs() < 1e-3);
    }

    #[test]
    fn skew_terms_vanish_faster() {
        let (sigma, alpha3, theta) = (0.8, 1.1, 0.4);
        let scaled: Vec<f64> = [100usize, 10_000, 1_000_000]
            .iter()
            .map(|&d| (d as f64).sqrt() * refined_tail_terms(theta, sigma, alpha3, d, &NON).i2_minus_i3_minus_i4.abs())
            .collect();
        assert!(scaled[0] > scaled[1] && scaled[1] > scaled[2], "{scaled:?}");
    }

    #[test]
    fn fine_lattice_series_uses_integral() {
        let coarse = lattice_series(0.3f64, 1.0, 100, 1e-4);
        let fine = lattice_series(0.3, 1.0, 100, 1e-7);
        // sum_l h e^{-2hl} ... -> integral as h -> 0
        assert!((coarse - fine).abs() < 1e-4 * fine);
    }
}
