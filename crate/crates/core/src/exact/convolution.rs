//! Exact d-fold convolutions with big-integer level counts.

use num_bigint::BigUint;
use num_traits::Zero;

use super::Level;
use crate::error::{Error, Result};
use crate::num::{big_ln, Real};
use crate::spectrum::{same_level, AtomDistribution, Lattice};

/// Product of two count polynomials, keeping the first `len` coefficients.
fn poly_mul(a: &[BigUint], b: &[BigUint], len: usize) -> Vec<BigUint> {
    let n = (a.len() + b.len() - 1).min(len);
    let mut out = vec![BigUint::zero(); n];
    for (i, x) in a.iter().enumerate().take(n) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n - i) {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

fn poly_pow(base: Vec<BigUint>, mut d: usize, len: usize) -> Vec<BigUint> {
    let mut result: Option<Vec<BigUint>> = None;
    let mut base = base;
    base.truncate(len);
    loop {
        if d & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => poly_mul(&r, &base, len),
            });
        }
        d >>= 1;
        if d == 0 {
            break;
        }
        base = poly_mul(&base, &base, len);
    }
    result.expect("d >= 1")
}

/// Mass of a level holding `count` products at `S_d = s`.
pub(crate) fn level_mass<T: Real>(count: &BigUint, s: T, log_lambda_power: T) -> T {
    (T::lit(big_ln(count)) - T::lit(2.0) * s - log_lambda_power).exp()
}

/// Levels of `S_d` on the lattice grid, up to `max_steps` grid steps above the minimum.
pub(crate) fn lattice_levels<T: Real>(
    atoms: &AtomDistribution<T>,
    lattice: &Lattice<T>,
    d: usize,
    max_steps: Option<usize>,
    budget: usize,
) -> Result<Vec<Level<T>>> {
    let nu_min = *lattice.indices.iter().min().expect("non-empty atoms");
    let nu_max = *lattice.indices.iter().max().expect("non-empty atoms");
    let full = d
        .checked_mul((nu_max - nu_min) as usize)
        .ok_or(Error::UnsupportedDimension { d, size: usize::MAX, budget })?;
    let steps = max_steps.map_or(full, |m| m.min(full));
    if steps + 1 > budget {
        return Err(Error::UnsupportedDimension { d, size: steps + 1, budget });
    }
    let width = ((nu_max - nu_min) as usize).min(steps) + 1;
    let mut factor = vec![BigUint::zero(); width];
    for (atom, &nu) in atoms.atoms.iter().zip(&lattice.indices) {
        let k = (nu - nu_min) as usize;
        if k < width {
            factor[k] += atom.multiplicity;
        }
    }
    let counts = poly_pow(factor, d, steps + 1);
    let log_power = T::from_count(d) * atoms.lambda_total.ln();
    let base = nu_min * d as i64;
    let dd = T::from_count(d);
    Ok(counts
        .into_iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(m, count)| {
            let nu = base + m as i64;
            let s = dd * lattice.shift + T::from_i64(nu).expect("index fits") * lattice.span;
            Level {
                s,
                mass: level_mass(&count, s, log_power),
                count,
                nu: Some(nu),
            }
        })
        .collect())
}

/// Levels of `S_d` over real support points, merging coincident sums.
///
/// Only levels below `cap` are kept, which is exact because every atom is non-negative
/// relative to the smallest one.
pub(crate) fn sparse_levels<T: Real>(atoms: &AtomDistribution<T>, d: usize, cap: Option<T>, budget: usize) -> Result<Vec<Level<T>>> {
    let u_min = atoms.atoms[0].u;
    let mut levels: Vec<(T, BigUint)> = vec![(T::zero(), BigUint::from(1u8))];
    for step in 1..=d {
        // remaining factors contribute at least u_min each
        let room = cap.map(|c| c - T::from_count(d - step) * u_min);
        let mut next: Vec<(T, BigUint)> = Vec::with_capacity(levels.len() * atoms.len());
        for (s, c) in &levels {
            for atom in &atoms.atoms {
                let v = *s + atom.u;
                if room.is_some_and(|r| v > r && !same_level(v, r)) {
                    break;
                }
                next.push((v, c * atom.multiplicity));
            }
        }
        next.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite levels"));
        levels.clear();
        for (s, c) in next {
            match levels.last_mut() {
                Some((last, acc)) if same_level(*last, s) => *acc += c,
                _ => levels.push((s, c)),
            }
        }
        if levels.len() > budget {
            return Err(Error::UnsupportedDimension { d, size: levels.len(), budget });
        }
    }
    let log_power = T::from_count(d) * atoms.lambda_total.ln();
    Ok(levels
        .into_iter()
        .map(|(s, count)| Level {
            s,
            mass: level_mass(&count, s, log_power),
            count,
            nu: None,
        })
        .collect())
}

/// Upper bound on the number of distinct sums of `d` draws from `k` atoms.
pub(crate) fn multiset_count(k: usize, d: usize) -> Option<usize> {
    // C(d + k - 1, k - 1), computed incrementally with overflow checks
    let mut acc: u128 = 1;
    for i in 1..k {
        acc = acc * (d + i) as u128 / i as u128;
        if acc > usize::MAX as u128 {
            return None;
        }
    }
    Some(acc as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[u32]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn polynomial_power_matches_binomials() {
        let p = poly_pow(big(&[1, 1]), 5, 100);
        assert_eq!(p, big(&[1, 5, 10, 10, 5, 1]));
        let truncated = poly_pow(big(&[1, 1]), 5, 3);
        assert_eq!(truncated, big(&[1, 5, 10]));
    }

    #[test]
    fn multiset_counts() {
        assert_eq!(multiset_count(3, 2), Some(6));
        assert_eq!(multiset_count(1, 50), Some(1));
        assert_eq!(multiset_count(4, 6), Some(84));
    }
}
