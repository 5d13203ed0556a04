//! Sums of `x^{-a} (ln x)^k` over shifted integers with certified remainders.
//!
//! The infinite tail is evaluated with the Euler-Maclaurin formula; the first
//! omitted correction term serves as the error bound.

use crate::num::{CompensatedSum, Real};

// B_{2p} / (2p)! for p = 1..=5.
const EM_COEF: [f64; 5] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
];

/// `x^{-b} * P(ln x)` with `P` given by ascending coefficients.
#[derive(Debug, Clone)]
struct LogPowerTerm<T> {
    b: T,
    poly: Vec<T>,
}

impl<T: Real> LogPowerTerm<T> {
    fn new(a: T, k: usize) -> Self {
        let mut poly = vec![T::zero(); k + 1];
        poly[k] = T::one();
        Self { b: a, poly }
    }

    fn derivative(&self) -> Self {
        // d/dx [x^{-b} P(L)] = x^{-b-1} (-b P(L) + P'(L))
        let mut poly: Vec<T> = self.poly.iter().map(|&c| -self.b * c).collect();
        for (j, &c) in self.poly.iter().enumerate().skip(1) {
            poly[j - 1] = poly[j - 1] + T::from_count(j) * c;
        }
        Self {
            b: self.b + T::one(),
            poly,
        }
    }

    fn eval(&self, x: T) -> T {
        let l = x.ln();
        let p = self.poly.iter().rev().fold(T::zero(), |acc, &c| acc * l + c);
        x.powf(-self.b) * p
    }
}

/// `f_k(x) = x^{-a} (ln x)^k`.
#[inline]
pub fn log_power<T: Real>(x: T, a: T, k: usize) -> T {
    let l = x.ln();
    x.powf(-a) * l.powi(k as i32)
}

/// `int_{x0}^inf x^{-a} (ln x)^k dx` for `a > 1`, `x0 >= 1`.
pub fn log_power_integral<T: Real>(x0: T, a: T, k: usize) -> T {
    let b = a - T::one();
    let t = x0.ln();
    let mut acc = CompensatedSum::new();
    // sum_{j=0}^k k!/(k-j)! t^{k-j} / b^{j+1}
    let mut falling = T::one();
    for j in 0..=k {
        if j > 0 {
            falling = falling * T::from_count(k + 1 - j);
        }
        acc.add(falling * t.powi((k - j) as i32) / b.powi((j + 1) as i32));
    }
    (-b * t).exp() * acc.value()
}

/// `sum_{m>=0} f_k(x0 + m)` with an error bound, for `a > 1` and `x0` large
/// enough that the Euler-Maclaurin corrections decay.
pub fn log_power_tail<T: Real>(x0: T, a: T, k: usize) -> (T, T) {
    let mut acc = CompensatedSum::new();
    acc.add(log_power_integral(x0, a, k));
    acc.add(log_power(x0, a, k) / T::lit(2.0));
    let mut term = LogPowerTerm::new(a, k).derivative();
    let mut err = T::zero();
    for (p, &coef) in EM_COEF.iter().enumerate() {
        let contribution = T::lit(coef) * term.eval(x0);
        if p + 1 == EM_COEF.len() {
            err = contribution.abs();
        } else {
            acc.add(-contribution);
        }
        term = term.derivative().derivative();
    }
    (acc.value(), err)
}

/// Direct compensated sum `sum_{i=lo}^{hi} f_k(i + shift)`.
pub fn log_power_partial<T: Real>(lo: usize, hi: usize, shift: T, a: T, k: usize) -> T {
    (lo..=hi)
        .map(|i| log_power(T::from_count(i) + shift, a, k))
        .collect::<CompensatedSum<T>>()
        .value()
}

/// Sums `S_k = sum_{i>=1} f_k(i + shift)` for `k = 0..=3` with error bounds.
#[derive(Debug, Clone)]
pub struct LogPowerSums<T> {
    pub sums: [T; 4],
    pub errors: [T; 4],
    pub cutoff: usize,
}

/// Splits the series at an adaptively chosen cutoff so that every remainder
/// error is below `tol * max(1, |S_k|)`; `None` if that cannot be certified.
pub fn log_power_sums<T: Real>(shift: T, a: T, tol: T) -> Option<LogPowerSums<T>> {
    let mut cutoff = 32usize;
    let rounding = T::epsilon() * T::lit(8.0);
    while cutoff <= 1 << 22 {
        let x0 = T::from_count(cutoff + 1) + shift;
        let mut sums = [T::zero(); 4];
        let mut errors = [T::zero(); 4];
        let mut ok = true;
        for k in 0..4 {
            let head = log_power_partial(1, cutoff, shift, a, k);
            let (tail, err) = log_power_tail(x0, a, k);
            sums[k] = head + tail;
            errors[k] = err + rounding * sums[k].abs();
            if err > tol * T::one().max(sums[k].abs()) {
                ok = false;
            }
        }
        if ok {
            return Some(LogPowerSums {
                sums,
                errors,
                cutoff,
            });
        }
        cutoff *= 4;
    }
    None
}

/// `sum_{i>n} f_0(i + shift)` for the tail of a power spectrum.
pub fn power_tail_from<T: Real>(n: usize, shift: T, a: T) -> T {
    const DIRECT: usize = 256;
    if n >= DIRECT {
        return log_power_tail(T::from_count(n + 1) + shift, a, 0).0;
    }
    let head = log_power_partial(n + 1, DIRECT, shift, a, 0);
    head + log_power_tail(T::from_count(DIRECT + 1) + shift, a, 0).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_two_and_its_log_derivative() {
        let s = log_power_sums(0.0_f64, 2.0, 1e-14).unwrap();
        let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((s.sums[0] - pi2_6).abs() < 1e-14);
        // -zeta'(2) from mpmath
        assert!((s.sums[1] - 0.937_548_254_315_843_8).abs() < 1e-14);
        // zeta''(2)
        assert!((s.sums[2] - 1.989_280_234_298_901).abs() < 1e-13);
    }

    #[test]
    fn half_shift_matches_closed_form() {
        // sum (i - 1/2)^{-2} = pi^2 / 2
        let s = log_power_sums(-0.5_f64, 2.0, 1e-14).unwrap();
        assert!((s.sums[0] - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-13);
    }

    #[test]
    fn tail_agrees_with_brute_force() {
        let direct = log_power_partial(11, 2_000_000, 0.0_f64, 2.0, 0);
        let rest = 1.0 / 2_000_000.5;
        let tail = power_tail_from(10, 0.0_f64, 2.0);
        assert!((tail - (direct + rest)).abs() < 1e-12);
    }

    #[test]
    fn derivative_of_log_power_term() {
        let t = LogPowerTerm::new(2.0_f64, 2).derivative();
        let x = 3.7;
        let h = 1e-5;
        let numeric = (log_power(x + h, 2.0, 2) - log_power(x - h, 2.0, 2)) / (2.0 * h);
        assert!((t.eval(x) - numeric).abs() < 1e-9);
    }
}
