//! Binned convolution with lower and upper envelopes.
//!
//! Each atom is moved down to the grid point below it (law of `S-`) and up to
//! the grid point above it (law of `S+`), so `S- <= S_d <= S+` holds pointwise
//! and distribution functions and counts of `S_d` are bracketed by those of the
//! two shifted sums. Counts are carried tilted by `e^{-2x}` so that every array
//! is a sub-probability vector and FFT rounding is controlled in absolute terms.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::num::{big_from_ln, CompensatedSum, Real, Rounding};
use crate::spectrum::{AtomDistribution, Spectrum};
use num_bigint::BigUint;

/// One array with a bound on the absolute error of each entry.
#[derive(Debug, Clone)]
struct Tracked<T> {
    values: Vec<T>,
    error: T,
}

impl<T: Real> Tracked<T> {
    fn exact(values: Vec<T>) -> Self {
        Self {
            values,
            error: T::zero(),
        }
    }

    fn norms(&self) -> (T, T) {
        let l1 = self.values.iter().copied().collect::<CompensatedSum<T>>().value();
        let l2 = self.values.iter().map(|v| *v * *v).collect::<CompensatedSum<T>>().value().sqrt();
        let n = T::from_count(self.values.len());
        (l1 + n * self.error, l2 + n.sqrt() * self.error)
    }
}

struct Convolver<T: Real> {
    planner: FftPlanner<T>,
    len: usize,
}

impl<T: Real> Convolver<T> {
    fn transform(&mut self, v: &[T], n: usize) -> Vec<Complex<T>> {
        let mut buf: Vec<Complex<T>> = v.iter().map(|&x| Complex::new(x, T::zero())).collect();
        buf.resize(n, Complex::new(T::zero(), T::zero()));
        self.planner.plan_fft_forward(n).process(&mut buf);
        buf
    }

    fn product(&mut self, a: &Tracked<T>, b: &Tracked<T>) -> Tracked<T> {
        let out_len = (a.values.len() + b.values.len() - 1).min(self.len);
        let n = (a.values.len() + b.values.len() - 1).next_power_of_two();
        let fa = self.transform(&a.values, n);
        let mut prod = if std::ptr::eq(a, b) {
            fa.iter().map(|x| x * x).collect::<Vec<_>>()
        } else {
            let fb = self.transform(&b.values, n);
            fa.iter().zip(&fb).map(|(x, y)| x * y).collect::<Vec<_>>()
        };
        self.planner.plan_fft_inverse(n).process(&mut prod);
        let scale = T::one() / T::from_count(n);
        let values: Vec<T> = prod[..out_len].iter().map(|c| (c.re * scale).max(T::zero())).collect();
        let (a1, a2) = a.norms();
        let (b1, b2) = b.norms();
        let unit = T::epsilon() / T::lit(2.0);
        let log_n = T::from_count(n).log2().max(T::one());
        let rounding = T::lit(10.0) * unit * log_n * a2 * b2;
        let error = a.error * b1 + b.error * a1 + a.error * b.error + rounding;
        Tracked { values, error }
    }

    fn power(&mut self, base: Tracked<T>, mut d: usize) -> Tracked<T> {
        let mut result: Option<Tracked<T>> = None;
        let mut base = base;
        loop {
            if d & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => self.product(&r, &base),
                });
            }
            d >>= 1;
            if d == 0 {
                break;
            }
            base = self.product(&base, &base);
        }
        result.expect("d >= 1")
    }
}

/// Per-factor arrays on the grid `g0 + j w`, `j < len`.
#[derive(Debug, Clone)]
pub(crate) struct FactorBins<T> {
    origin: T,
    width: T,
    mass_lower: Vec<T>,
    mass_upper: Vec<T>,
    count_lower: Vec<T>,
    count_upper: Vec<T>,
    lambda_total: T,
}

impl<T: Real> FactorBins<T> {
    fn empty(origin: T, width: T, len: usize, lambda_total: T) -> Self {
        Self {
            origin,
            width,
            mass_lower: vec![T::zero(); len],
            mass_upper: vec![T::zero(); len],
            count_lower: vec![T::zero(); len],
            count_upper: vec![T::zero(); len],
            lambda_total,
        }
    }

    fn position(&self, j: usize) -> T {
        self.origin + T::from_count(j) * self.width
    }

    /// Adds `count` eigenvalues of total mass `mass` located in `[x_j, x_{j+1})`,
    /// or exactly at `x_j` when `on_grid`.
    fn deposit(&mut self, j: usize, count: T, mass: T, on_grid: bool) {
        let len = self.mass_lower.len();
        if j >= len {
            return;
        }
        let two = T::lit(2.0);
        let tilt = |x: T| (-two * x).exp() / self.lambda_total;
        let lower_tilt = tilt(self.position(j));
        self.mass_lower[j] = self.mass_lower[j] + mass;
        self.count_lower[j] = self.count_lower[j] + count * lower_tilt;
        let up = if on_grid { j } else { j + 1 };
        if up < len {
            let upper_tilt = tilt(self.position(up));
            self.mass_upper[up] = self.mass_upper[up] + mass;
            self.count_upper[up] = self.count_upper[up] + count * upper_tilt;
        }
    }

    /// Bins from an explicit atom list.
    pub(crate) fn from_atoms(atoms: &AtomDistribution<T>, width: T, len: usize) -> Self {
        let origin = atoms.atoms[0].u;
        let mut bins = Self::empty(origin, width, len, atoms.lambda_total);
        for atom in &atoms.atoms {
            let x = (atom.u - origin) / width;
            let j = x.floor();
            let on_grid = (x - x.round()).abs() <= T::lit(1e-9);
            let j = if on_grid { x.round() } else { j };
            let j = j.to_usize().unwrap_or(usize::MAX);
            bins.deposit(j, T::from_u64(atom.multiplicity).expect("count"), atom.mass, on_grid);
        }
        bins
    }

    /// Bins straight from the sequence, covering every eigenvalue with `u < g0 + len w`.
    pub(crate) fn from_spectrum(spectrum: &Spectrum<T>, lambda_total: T, width: T, len: usize) -> Self {
        let origin = spectrum.atom(1);
        let mut bins = Self::empty(origin, width, len, lambda_total);
        let two = T::lit(2.0);
        // the first eigenvalue sits exactly on the grid origin
        let mass1 = (two * spectrum.ln_lambda(1)).exp() / lambda_total;
        bins.deposit(0, T::one(), mass1, true);
        let mut below = 1u64;
        for j in 0..len {
            let edge = bins.position(j + 1);
            let next = spectrum.count_atoms_below(edge).max(below);
            if next > below {
                let count = T::from_u64(next - below).expect("count");
                let mass = spectrum.lambda_sq_range(below as usize, next as usize) / lambda_total;
                bins.deposit(j, count, mass, false);
            }
            below = next;
        }
        bins
    }
}

/// Envelope laws of `S-` and `S+` on the grid `x_j = origin + j w`.
#[derive(Debug, Clone)]
pub struct BinnedEnvelope<T> {
    pub d: usize,
    /// Grid point `x_0 = d g0`.
    pub origin: T,
    pub width: T,
    /// `P(S- = x_j)`.
    pub mass_lower: Vec<T>,
    /// `P(S+ = x_j)`.
    pub mass_upper: Vec<T>,
    /// `#{k : S-_k = x_j} e^{-2 x_j} / Lambda^d`.
    pub count_lower: Vec<T>,
    /// `#{k : S+_k = x_j} e^{-2 x_j} / Lambda^d`.
    pub count_upper: Vec<T>,
    /// Absolute error bound on each mass entry.
    pub mass_error: T,
    /// Absolute error bound on each tilted count entry.
    pub count_error: T,
    pub log_lambda_power: T,
    cum_lower: Vec<T>,
    cum_upper: Vec<T>,
}

/// Bracket `[j_lo, j_hi]` of the grid index of the quantile level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridBracket {
    pub lo: usize,
    pub hi: usize,
}

fn cumulative<T: Real>(v: &[T]) -> Vec<T> {
    let mut acc = CompensatedSum::new();
    v.iter()
        .map(|&x| {
            acc.add(x);
            acc.value()
        })
        .collect()
}

impl<T: Real> BinnedEnvelope<T> {
    pub(crate) fn build(factor: FactorBins<T>, d: usize, len: usize) -> Self {
        let mut conv = Convolver {
            planner: FftPlanner::new(),
            len,
        };
        let mut run = |v: Vec<T>| conv.power(Tracked::exact(v), d);
        let ml = run(factor.mass_lower);
        let mu = run(factor.mass_upper);
        let cl = run(factor.count_lower);
        let cu = run(factor.count_upper);
        let cum_lower = cumulative(&ml.values);
        let cum_upper = cumulative(&mu.values);
        Self {
            d,
            origin: T::from_count(d) * factor.origin,
            width: factor.width,
            mass_error: ml.error.max(mu.error),
            count_error: cl.error.max(cu.error),
            mass_lower: ml.values,
            mass_upper: mu.values,
            count_lower: cl.values,
            count_upper: cu.values,
            log_lambda_power: T::from_count(d) * factor.lambda_total.ln(),
            cum_lower,
            cum_upper,
        }
    }

    pub fn len(&self) -> usize {
        self.mass_lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass_lower.is_empty()
    }

    pub fn position(&self, j: usize) -> T {
        self.origin + T::from_count(j) * self.width
    }

    fn cum_error(&self, j: usize) -> T {
        T::from_count(j + 1) * self.mass_error
    }

    /// Certified bounds on `P(S_d <= x_j)`.
    pub fn cdf_bounds_at(&self, j: usize) -> (T, T) {
        let j = j.min(self.len() - 1);
        let lo = (self.cum_upper[j] - self.cum_error(j)).max(T::zero());
        let hi = (self.cum_lower[j] + self.cum_error(j)).min(T::one());
        (lo, hi)
    }

    /// Certified bounds on `P(S_d <= t)` for any real `t`.
    pub fn cdf_bounds(&self, t: T) -> (T, T) {
        let x = (t - self.origin) / self.width;
        if x < T::zero() {
            return (T::zero(), T::zero());
        }
        let j = x.floor().to_usize().unwrap_or(usize::MAX);
        if j >= self.len() {
            // beyond the represented range only the lower bound is certified
            return (self.cdf_bounds_at(self.len() - 1).0, T::one());
        }
        self.cdf_bounds_at(j)
    }

    /// Total represented mass of each envelope.
    pub fn total_mass(&self) -> (T, T) {
        (*self.cum_lower.last().unwrap_or(&T::zero()), *self.cum_upper.last().unwrap_or(&T::zero()))
    }

    /// Grid bracket of the smallest level `s` with `P(S_d > s) <= eps2`.
    pub fn quantile_bracket(&self, eps2: T) -> Option<GridBracket> {
        let target = T::one() - eps2;
        let lo = (0..self.len()).find(|&j| self.cum_lower[j] + self.cum_error(j) >= target)?;
        let hi = (lo..self.len()).find(|&j| self.cum_upper[j] - self.cum_error(j) >= target)?;
        Some(GridBracket { lo, hi })
    }

    fn log_count(&self, counts: &[T], upto: usize, inclusive: bool, err_sign: T) -> T {
        let end = if inclusive { upto + 1 } else { upto };
        if end == 0 {
            return T::neg_infinity();
        }
        let top = end - 1;
        // sum c_J e^{2 x_J} = e^{2 x_top} sum c_J e^{-2 (top - J) w}
        let two_w = T::lit(2.0) * self.width;
        let mut acc = CompensatedSum::new();
        for (back, &c) in counts[..end].iter().rev().enumerate() {
            let weight = (-two_w * T::from_count(back)).exp();
            if weight < T::lit(1e-300) {
                break;
            }
            acc.add((c + err_sign * self.count_error).max(T::zero()) * weight);
        }
        let sum = acc.value();
        if sum <= T::zero() {
            return T::neg_infinity();
        }
        sum.ln() + T::lit(2.0) * self.position(top) + self.log_lambda_power
    }

    /// `ln` of a lower bound on `#{k : S_k < x_j}`.
    pub fn log_count_below_lower(&self, j: usize) -> T {
        self.log_count(&self.count_upper, j, false, -T::one())
    }

    /// `ln` of an upper bound on `#{k : S_k <= x_j}`.
    pub fn log_count_upto_upper(&self, j: usize) -> T {
        self.log_count(&self.count_lower, j, true, T::one())
    }
}

/// Certified bracket on counts and quantile level from an envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedBracket<T> {
    pub n_lo: BigUint,
    pub n_hi: BigUint,
    pub log_n_lo: T,
    pub log_n_hi: T,
    /// Bracket on `-ln zeta`.
    pub level_lo: T,
    pub level_hi: T,
    /// Certified upper bound on the tail mass beyond `level_hi`.
    pub tail_upper: T,
}

pub(crate) fn bracket_from<T: Real>(env: &BinnedEnvelope<T>, eps2: T) -> Option<BinnedBracket<T>> {
    let grid = env.quantile_bracket(eps2)?;
    let log_n_lo = env.log_count_below_lower(grid.lo);
    let log_n_hi = env.log_count_upto_upper(grid.hi);
    let n_lo = big_from_ln(log_n_lo.to_f64_lossy(), Rounding::Down);
    let n_hi = big_from_ln(log_n_hi.to_f64_lossy(), Rounding::Up);
    let tail_upper = T::one() - env.cdf_bounds_at(grid.hi).0;
    Some(BinnedBracket {
        n_lo,
        n_hi,
        log_n_lo,
        log_n_hi,
        level_lo: env.position(grid.lo),
        level_hi: env.position(grid.hi),
        tail_upper,
    })
}

/// Default grid width for dimension `d`.
pub fn default_bin_width<T: Real>(sigma: T, d: usize) -> T {
    let dd = T::from_count(d);
    (sigma * dd.sqrt() / T::lit(4096.0)).min(T::lit(0.0025) / dd)
}

/// Number of grid points needed to reach level `cap` from `d g0`.
pub(crate) fn grid_len<T: Real>(cap: T, d: usize, g0: T, width: T, budget: usize) -> Result<usize> {
    let span = ((cap - T::from_count(d) * g0) / width).ceil().to_f64_lossy().max(1.0) + 1.0;
    if span > budget as f64 {
        return Err(Error::UnsupportedDimension {
            d,
            size: span.min(usize::MAX as f64) as usize,
            budget,
        });
    }
    Ok(span as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{atoms_of, SpectrumSpec};

    #[test]
    fn fft_product_matches_direct() {
        let mut conv = Convolver::<f64> {
            planner: FftPlanner::new(),
            len: 100,
        };
        let a = Tracked::exact(vec![0.5, 0.25, 0.25]);
        let b = Tracked::exact(vec![0.1, 0.9]);
        let c = conv.product(&a, &b);
        let want = [0.05, 0.475, 0.25, 0.225];
        for (x, y) in c.values.iter().zip(want) {
            assert!((x - y).abs() <= c.error + 1e-17);
        }
        assert!(c.error < 1e-14);
    }

    #[test]
    fn envelopes_bracket_exact_law() {
        let spec = SpectrumSpec::explicit([1.0, 0.6, 0.3]);
        let spectrum = Spectrum::<f64>::from_spec(&spec).unwrap();
        let atoms = atoms_of(&spectrum, 3);
        let width = 0.01;
        let d = 4;
        // exact law by brute force
        let us: Vec<f64> = atoms.atoms.iter().map(|a| a.u).collect();
        let ps: Vec<f64> = atoms.atoms.iter().map(|a| a.mass).collect();
        let mut exact = vec![(0.0, 1.0)];
        for _ in 0..d {
            exact = exact
                .iter()
                .flat_map(|&(s, p)| us.iter().zip(&ps).map(move |(&u, &q)| (s + u, p * q)))
                .collect();
        }
        let len = (4.0 * us[2] / width) as usize + d + 2;
        let env = BinnedEnvelope::build(FactorBins::from_atoms(&atoms, width, len), d, len);
        for j in 0..len {
            let t = env.position(j);
            let f: f64 = exact.iter().filter(|(s, _)| *s <= t + 1e-12).map(|(_, p)| p).sum();
            let (lo, hi) = env.cdf_bounds_at(j);
            assert!(lo <= f + 1e-12 && f <= hi + 1e-12, "j={j} {lo} {f} {hi}");
        }
        let (ml, mu) = env.total_mass();
        assert!((ml - 1.0).abs() < 1e-10 && (mu - 1.0).abs() < 1e-10);
    }

    #[test]
    fn spectrum_bins_conserve_mass() {
        let spec = SpectrumSpec::catalog("brownian_motion");
        let spectrum = Spectrum::<f64>::from_spec(&spec).unwrap();
        let total = spectrum.lambda_total();
        let width = 0.01;
        let len = 2000;
        let bins = FactorBins::from_spectrum(&spectrum, total, width, len);
        let edge = bins.position(len);
        let n = spectrum.count_atoms_below(edge) as usize;
        let represented: f64 = bins.mass_lower.iter().sum();
        let want = 1.0 - spectrum.lambda_sq_tail(n) / total;
        assert!((represented - want).abs() < 1e-12, "{represented} {want}");
        let upper: f64 = bins.mass_upper.iter().sum();
        assert!(upper <= represented + 1e-15);
    }
}
