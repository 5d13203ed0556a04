//! One-dimensional eigenvalue sequences and the induced law of `U = -log lambda(I)`.
//!
//! A sequence `lambda(i)`, `i >= 1`, induces a discrete distribution putting
//! mass `lambda(i)^2 / Lambda` on `-log lambda(i)`. Sums of independent copies
//! of that law encode the tensor-product eigenvalue array.

mod lattice;
pub mod series;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::catalog;
use crate::error::{Error, Result};
use crate::num::{CompensatedSum, Real};

pub use lattice::{detect_lattice, lattice_for, Lattice, LatticeStructure, DEFAULT_LATTICE_TOL};

/// Symbolic description of an eigenvalue sequence as it appears in configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SpectrumSpec {
    /// `lambda(i) = C r^i`.
    Geometric {
        #[serde(rename = "C")]
        c: f64,
        r: f64,
    },
    /// `lambda(i) = scale (i + shift)^{-s}`.
    Power {
        #[serde(default = "one")]
        scale: f64,
        s: f64,
        #[serde(default, skip_serializing_if = "is_zero")]
        shift: f64,
    },
    /// A finite list of eigenvalues; order is irrelevant.
    Explicit { lambdas: Vec<f64> },
    /// A named entry of the built-in catalog.
    Catalog {
        name: String,
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        params: BTreeMap<String, f64>,
    },
}

fn one() -> f64 {
    1.0
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl SpectrumSpec {
    pub fn geometric(c: f64, r: f64) -> Self {
        SpectrumSpec::Geometric { c, r }
    }

    pub fn power(scale: f64, s: f64) -> Self {
        SpectrumSpec::Power {
            scale,
            s,
            shift: 0.0,
        }
    }

    pub fn explicit(lambdas: impl Into<Vec<f64>>) -> Self {
        SpectrumSpec::Explicit {
            lambdas: lambdas.into(),
        }
    }

    pub fn catalog(name: impl Into<String>) -> Self {
        SpectrumSpec::Catalog {
            name: name.into(),
            params: BTreeMap::new(),
        }
    }

    /// Replaces every catalog reference by the spec it stands for.
    pub fn resolve(&self) -> Result<SpectrumSpec> {
        match self {
            SpectrumSpec::Catalog { name, params } => catalog::catalog_lookup(name, params),
            other => Ok(other.clone()),
        }
    }

    /// The spec of `c * lambda(i)`.
    pub fn scaled(&self, factor: f64) -> Result<SpectrumSpec> {
        Ok(match self.resolve()? {
            SpectrumSpec::Geometric { c, r } => SpectrumSpec::Geometric { c: c * factor, r },
            SpectrumSpec::Power { scale, s, shift } => SpectrumSpec::Power {
                scale: scale * factor,
                s,
                shift,
            },
            SpectrumSpec::Explicit { lambdas } => SpectrumSpec::Explicit {
                lambdas: lambdas.iter().map(|l| l * factor).collect(),
            },
            SpectrumSpec::Catalog { .. } => unreachable!("resolved above"),
        })
    }
}

/// A validated eigenvalue sequence, non-increasing in `i`.
#[derive(Debug, Clone, PartialEq)]
pub enum Spectrum<T> {
    Geometric { scale: T, ratio: T },
    Power { scale: T, shift: T, exponent: T },
    /// Strictly positive eigenvalues in non-increasing order.
    Explicit { lambdas: Vec<T> },
}

impl<T: Real> Spectrum<T> {
    pub fn from_spec(spec: &SpectrumSpec) -> Result<Self> {
        match spec.resolve()? {
            SpectrumSpec::Geometric { c, r } => {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::InvalidSpectrum(format!("geometric scale C={c} must be positive")));
                }
                if !(r > 0.0 && r < 1.0) {
                    return Err(Error::DivergentSpectrum(format!("geometric ratio r={r} must lie in (0, 1)")));
                }
                Ok(Spectrum::Geometric {
                    scale: T::lit(c),
                    ratio: T::lit(r),
                })
            }
            SpectrumSpec::Power { scale, s, shift } => {
                if !(scale > 0.0 && scale.is_finite()) {
                    return Err(Error::InvalidSpectrum(format!("power scale {scale} must be positive")));
                }
                if !(shift > -1.0 && shift.is_finite()) {
                    return Err(Error::InvalidSpectrum(format!("power shift {shift} must exceed -1")));
                }
                if !(s > 0.5 && s.is_finite()) {
                    return Err(Error::DivergentSpectrum(format!(
                        "sum of (i{shift:+})^(-2s) diverges for s={s} <= 1/2"
                    )));
                }
                Ok(Spectrum::Power {
                    scale: T::lit(scale),
                    shift: T::lit(shift),
                    exponent: T::lit(s),
                })
            }
            SpectrumSpec::Explicit { lambdas } => {
                if let Some(bad) = lambdas.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
                    return Err(Error::InvalidSpectrum(format!("eigenvalue {bad} must be finite and non-negative")));
                }
                let mut positive: Vec<f64> = lambdas.into_iter().filter(|l| *l > 0.0).collect();
                if positive.is_empty() {
                    return Err(Error::DegenerateSpectrum("no strictly positive eigenvalue".into()));
                }
                positive.sort_by(|a, b| b.total_cmp(a));
                Ok(Spectrum::Explicit {
                    lambdas: positive.into_iter().map(T::lit).collect(),
                })
            }
            SpectrumSpec::Catalog { .. } => unreachable!("resolved above"),
        }
    }

    /// Number of positive eigenvalues, `None` when infinite.
    pub fn len(&self) -> Option<usize> {
        match self {
            Spectrum::Explicit { lambdas } => Some(lambdas.len()),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// `ln lambda(i)` for `i >= 1`; `-inf` past the end of a finite list.
    pub fn ln_lambda(&self, i: usize) -> T {
        debug_assert!(i >= 1);
        match self {
            Spectrum::Geometric { scale, ratio } => scale.ln() + T::from_count(i) * ratio.ln(),
            Spectrum::Power {
                scale,
                shift,
                exponent,
            } => scale.ln() - *exponent * (T::from_count(i) + *shift).ln(),
            Spectrum::Explicit { lambdas } => lambdas.get(i - 1).map_or(T::neg_infinity(), |l| l.ln()),
        }
    }

    /// Atom location `u_i = -ln lambda(i)`.
    #[inline]
    pub fn atom(&self, i: usize) -> T {
        -self.ln_lambda(i)
    }

    /// `Lambda = sum lambda(i)^2`.
    pub fn lambda_total(&self) -> T {
        match self {
            Spectrum::Geometric { scale, ratio } => {
                let rho = *ratio * *ratio;
                *scale * *scale * rho / (T::one() - rho)
            }
            Spectrum::Power {
                scale,
                shift,
                exponent,
            } => {
                let sums = series::log_power_sums(*shift, T::lit(2.0) * *exponent, T::epsilon())
                    .or_else(|| series::log_power_sums(*shift, T::lit(2.0) * *exponent, T::lit(1e-12)))
                    .expect("power series converges");
                *scale * *scale * sums.sums[0]
            }
            Spectrum::Explicit { lambdas } => lambdas.iter().map(|&l| l * l).collect::<CompensatedSum<T>>().value(),
        }
    }

    /// `sum_{i>n} lambda(i)^2`.
    pub fn lambda_sq_tail(&self, n: usize) -> T {
        match self {
            Spectrum::Geometric { scale, ratio } => {
                let rho = *ratio * *ratio;
                *scale * *scale * rho.powi(n as i32 + 1) / (T::one() - rho)
            }
            Spectrum::Power {
                scale,
                shift,
                exponent,
            } => *scale * *scale * series::power_tail_from(n, *shift, T::lit(2.0) * *exponent),
            Spectrum::Explicit { lambdas } => lambdas
                .iter()
                .skip(n)
                .map(|&l| l * l)
                .collect::<CompensatedSum<T>>()
                .value(),
        }
    }

    /// `sum_{lo < i <= hi} lambda(i)^2`.
    pub fn lambda_sq_range(&self, lo: usize, hi: usize) -> T {
        if hi <= lo {
            return T::zero();
        }
        if hi - lo <= 512 || matches!(self, Spectrum::Explicit { .. }) {
            return (lo + 1..=hi)
                .map(|i| (T::lit(2.0) * self.ln_lambda(i)).exp())
                .collect::<CompensatedSum<T>>()
                .value();
        }
        self.lambda_sq_tail(lo) - self.lambda_sq_tail(hi)
    }

    /// Number of indices with `u_i < t`.
    pub fn count_atoms_below(&self, t: T) -> u64 {
        let below = |i: u64| i >= 1 && self.atom(i as usize) < t;
        let guess: f64 = match self {
            Spectrum::Geometric { scale, ratio } => {
                // -ln C - i ln r < t  <=>  i < (t + ln C) / (-ln r)
                ((t + scale.ln()) / (-ratio.ln())).to_f64_lossy().ceil() - 1.0
            }
            Spectrum::Power {
                scale,
                shift,
                exponent,
            } => {
                let x = ((t + scale.ln()) / *exponent).to_f64_lossy().exp();
                (x - shift.to_f64_lossy()).ceil() - 1.0
            }
            Spectrum::Explicit { lambdas } => {
                return lambdas.partition_point(|l| -l.ln() < t) as u64;
            }
        };
        if !(guess >= 1.0) {
            return if below(1) { 1 } else { 0 };
        }
        let mut n = guess.min(9.0e18) as u64;
        while n > 0 && !below(n) {
            n -= 1;
        }
        while below(n + 1) {
            n += 1;
        }
        n
    }

    /// The analytically known lattice, if the kind declares one: `(span, atom of index 1)`.
    pub fn declared_span(&self) -> Option<T> {
        match self {
            Spectrum::Geometric { ratio, .. } => Some(-ratio.ln()),
            _ => None,
        }
    }
}

/// Moments of the law of `U` and the explosion coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralSummary<T> {
    /// `Lambda = sum lambda(i)^2`.
    #[serde(rename = "Lambda")]
    pub lambda_total: T,
    /// Mean `M` of `U`.
    #[serde(rename = "M")]
    pub mean: T,
    /// Variance `sigma^2` of `U`.
    #[serde(rename = "sigma2")]
    pub variance: T,
    /// Third central moment `alpha^3` of `U`.
    #[serde(rename = "alpha3")]
    pub third_central: T,
    /// `Lambda e^{2M}`.
    pub explosion: T,
    /// Whether `sum |log lambda(i)|^3 lambda(i)^2` is finite.
    pub moment_ok: bool,
    /// The law of `U` is a point mass (`sigma = 0`).
    pub degenerate: bool,
    /// Bound on the absolute error of each field caused by truncating series.
    pub truncation_error: T,
}

impl<T: Real> SpectralSummary<T> {
    pub fn sigma(&self) -> T {
        self.variance.sqrt()
    }

    /// Fails unless the summary can feed the asymptotic formulas.
    pub fn require_nondegenerate(&self) -> Result<()> {
        if self.degenerate || !(self.variance > T::zero()) {
            return Err(Error::DegenerateSpectrum("sigma = 0".into()));
        }
        Ok(())
    }
}

/// Computes `Lambda, M, sigma^2, alpha^3` and the explosion coefficient with
/// truncation error below `tol * max(1, |value|)`.
pub fn spectral_summary<T: Real>(spec: &SpectrumSpec, tol: T) -> Result<SpectralSummary<T>> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidSpectrum(format!("tolerance {tol} must be positive")));
    }
    let spectrum = Spectrum::<T>::from_spec(spec)?;
    summarize(&spectrum, tol)
}

/// [`spectral_summary`] for an already validated spectrum.
pub fn summarize<T: Real>(spectrum: &Spectrum<T>, tol: T) -> Result<SpectralSummary<T>> {
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let (lambda_total, mean, variance, third_central, truncation_error) = match spectrum {
        Spectrum::Geometric { scale, ratio } => {
            // i ~ Geometric(1 - rho) on {1, 2, ...}; u = -ln C + i h.
            let rho = *ratio * *ratio;
            let h = -ratio.ln();
            let q = T::one() - rho;
            let lambda_total = *scale * *scale * rho / q;
            let mean = -scale.ln() + h / q;
            let variance = h * h * rho / (q * q);
            let third = h * h * h * rho * (T::one() + rho) / (q * q * q);
            (lambda_total, mean, variance, third, T::zero())
        }
        Spectrum::Power {
            scale,
            shift,
            exponent,
        } => {
            let sums = series::log_power_sums(*shift, two * *exponent, tol).ok_or(Error::TailBoundMissing {
                tol: tol.to_f64_lossy(),
                reached: f64::NAN,
            })?;
            let [s0, s1, s2, s3] = sums.sums;
            let [e0, e1, e2, e3] = sums.errors;
            let m1 = s1 / s0;
            let m2 = s2 / s0;
            let m3 = s3 / s0;
            let s = *exponent;
            let mean = -scale.ln() + s * m1;
            let variance = s * s * (m2 - m1 * m1);
            let third = s * s * s * (m3 - three * m1 * m2 + two * m1 * m1 * m1);
            // first-order propagation of the series errors
            let d1 = (e1 + m1.abs() * e0) / s0;
            let d2 = (e2 + m2.abs() * e0) / s0;
            let d3 = (e3 + m3.abs() * e0) / s0;
            let err_mean = s * d1;
            let err_var = s * s * (d2 + two * m1.abs() * d1);
            let err_third = s * s * s * (d3 + three * (m1.abs() * d2 + m2.abs() * d1) + T::lit(6.0) * m1 * m1 * d1);
            let err = (scale.powi(2) * e0).max(err_mean).max(err_var).max(err_third);
            (scale.powi(2) * s0, mean, variance, third, err)
        }
        Spectrum::Explicit { lambdas } => {
            let lambda_total = spectrum.lambda_total();
            let weights: Vec<T> = lambdas.iter().map(|&l| l * l / lambda_total).collect();
            let atoms: Vec<T> = lambdas.iter().map(|&l| -l.ln()).collect();
            let mean = weights.iter().zip(&atoms).map(|(&p, &u)| p * u).collect::<CompensatedSum<T>>().value();
            let central = |k: i32| {
                weights
                    .iter()
                    .zip(&atoms)
                    .map(|(&p, &u)| p * (u - mean).powi(k))
                    .collect::<CompensatedSum<T>>()
                    .value()
            };
            (lambda_total, mean, central(2), central(3), T::zero())
        }
    };
    let variance = variance.max(T::zero());
    let explosion = lambda_total * (two * mean).exp();
    let degenerate = match spectrum {
        Spectrum::Explicit { lambdas } => lambdas.iter().all(|&l| l == lambdas[0]),
        _ => false,
    };
    let err_explosion = explosion * (truncation_error / lambda_total + two * truncation_error);
    Ok(SpectralSummary {
        lambda_total,
        mean,
        variance: if degenerate { T::zero() } else { variance },
        third_central: if degenerate { T::zero() } else { third_central },
        explosion,
        moment_ok: true,
        degenerate,
        truncation_error: truncation_error.max(err_explosion),
    })
}

/// One support point of the law of `U`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom<T> {
    /// `u = -ln lambda`.
    pub u: T,
    /// `P(U = u)`.
    pub mass: T,
    /// Number of indices `i` with this eigenvalue.
    pub multiplicity: u64,
}

/// The law of `U` restricted to the first `N` indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomDistribution<T> {
    /// Ascending in `u`, strictly increasing.
    pub atoms: Vec<Atom<T>>,
    /// Mass of the indices beyond the truncation.
    pub residual_mass: T,
    /// `Lambda` of the full sequence.
    pub lambda_total: T,
}

impl<T: Real> AtomDistribution<T> {
    pub fn total_mass(&self) -> T {
        self.atoms.iter().map(|a| a.mass).collect::<CompensatedSum<T>>().value()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// Relative tolerance under which two atom locations are the same eigenvalue.
pub(crate) fn same_level<T: Real>(a: T, b: T) -> bool {
    (a - b).abs() <= T::lit(1e-12) * T::one().max(a.abs().max(b.abs()))
}

/// Atoms for indices `1..=n`, equal eigenvalues merged.
pub fn atom_distribution<T: Real>(spec: &SpectrumSpec, n: usize) -> Result<AtomDistribution<T>> {
    if n < 2 {
        return Err(Error::InvalidSpectrum(format!("truncation index {n} must be at least 2")));
    }
    let spectrum = Spectrum::<T>::from_spec(spec)?;
    Ok(atoms_of(&spectrum, n))
}

/// Atoms of `spectrum` for indices `1..=n` (clipped to the list length).
pub fn atoms_of<T: Real>(spectrum: &Spectrum<T>, n: usize) -> AtomDistribution<T> {
    let n = spectrum.len().map_or(n, |len| n.min(len));
    let lambda_total = spectrum.lambda_total();
    let log_total = lambda_total.ln();
    let two = T::lit(2.0);
    let mut raw: Vec<(T, T)> = (1..=n)
        .map(|i| {
            let ln_l = spectrum.ln_lambda(i);
            (-ln_l, (two * ln_l - log_total).exp())
        })
        .collect();
    raw.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite atoms"));
    let atoms = merge_atoms(raw);
    let residual_mass = (spectrum.lambda_sq_tail(n) / lambda_total).max(T::zero());
    AtomDistribution {
        atoms,
        residual_mass,
        lambda_total,
    }
}

/// Atoms with `u <= limit`, all of them (so nothing below `limit` is lost).
pub fn atoms_up_to<T: Real>(spectrum: &Spectrum<T>, limit: T, max_atoms: usize) -> Result<AtomDistribution<T>> {
    let count = spectrum.count_atoms_below(limit) as usize;
    let mut n = count;
    while spectrum.len().is_none_or(|len| n < len) && spectrum.atom(n + 1) <= limit {
        n += 1;
    }
    if n > max_atoms {
        return Err(Error::BudgetExceeded(format!("{n} atoms below level {limit} exceed budget {max_atoms}")));
    }
    Ok(atoms_of(spectrum, n.max(1)))
}

fn merge_atoms<T: Real>(sorted: Vec<(T, T)>) -> Vec<Atom<T>> {
    let mut atoms: Vec<Atom<T>> = Vec::with_capacity(sorted.len());
    for (u, mass) in sorted {
        match atoms.last_mut() {
            Some(last) if same_level(last.u, u) => {
                last.mass = last.mass + mass;
                last.multiplicity += 1;
            }
            _ => atoms.push(Atom {
                u,
                mass,
                multiplicity: 1,
            }),
        }
    }
    atoms
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, PI};

    fn half() -> SpectrumSpec {
        SpectrumSpec::geometric(1.0, 0.5_f64.sqrt())
    }

    #[test]
    fn geometric_half_closed_forms() {
        let s = spectral_summary::<f64>(&half(), 1e-12).unwrap();
        assert!((s.lambda_total - 1.0).abs() < 1e-15);
        assert!((s.mean - LN_2).abs() < 1e-15);
        assert!((s.variance - LN_2 * LN_2 / 2.0).abs() < 1e-15);
        assert!((s.third_central - 0.75 * LN_2.powi(3)).abs() < 1e-15);
        assert!((s.explosion - 4.0).abs() < 1e-14);
        assert!(s.moment_ok && !s.degenerate);
    }

    #[test]
    fn single_eigenvalue_is_flagged_degenerate() {
        let c = 0.3;
        let s = spectral_summary::<f64>(&SpectrumSpec::explicit([c, 0.0]), 1e-12).unwrap();
        assert!((s.lambda_total - c * c).abs() < 1e-15);
        assert!((s.mean + c.ln()).abs() < 1e-15);
        assert_eq!(s.variance, 0.0);
        assert!((s.explosion - 1.0).abs() < 1e-12);
        assert!(s.degenerate);
        assert!(s.require_nondegenerate().is_err());
    }

    #[test]
    fn equal_eigenvalues_have_zero_variance_but_explode() {
        // Counterexample to "explosion = 1 iff sigma = 0": two equal eigenvalues.
        let s = spectral_summary::<f64>(&SpectrumSpec::explicit([1.0, 1.0]), 1e-12).unwrap();
        assert!(s.degenerate);
        assert_eq!(s.variance, 0.0);
        assert!((s.explosion - 2.0).abs() < 1e-14);
    }

    #[test]
    fn all_zero_spectrum_is_rejected() {
        let err = spectral_summary::<f64>(&SpectrumSpec::explicit([0.0, 0.0]), 1e-12).unwrap_err();
        assert!(matches!(err, Error::DegenerateSpectrum(_)));
    }

    #[test]
    fn harmonic_power_summary() {
        let s = spectral_summary::<f64>(&SpectrumSpec::power(1.0, 1.0), 1e-13).unwrap();
        assert!((s.lambda_total - PI * PI / 6.0).abs() < 1e-13);
        // mpmath: 6/pi^2 * (-zeta'(2))
        assert!((s.mean - 0.5699609930945328).abs() < 1e-13);
        assert!(s.explosion > 1.0);
        assert!(s.truncation_error <= 1e-13 * s.explosion.max(1.0));
    }

    #[test]
    fn divergent_power_is_rejected() {
        let err = spectral_summary::<f64>(&SpectrumSpec::power(1.0, 0.5), 1e-10).unwrap_err();
        assert!(matches!(err, Error::DivergentSpectrum(_)));
    }

    #[test]
    fn geometric_atoms_with_residual() {
        let atoms = atom_distribution::<f64>(&half(), 3).unwrap();
        let want = [(LN_2 / 2.0, 0.5), (LN_2, 0.25), (1.5 * LN_2, 0.125)];
        assert_eq!(atoms.atoms.len(), 3);
        for (a, (u, p)) in atoms.atoms.iter().zip(want) {
            assert!((a.u - u).abs() < 1e-15 && (a.mass - p).abs() < 1e-15);
        }
        assert!((atoms.residual_mass - 0.125).abs() < 1e-15);
    }

    #[test]
    fn duplicate_eigenvalues_merge() {
        let atoms = atom_distribution::<f64>(&SpectrumSpec::explicit([1.0, 1.0]), 2).unwrap();
        assert_eq!(atoms.atoms.len(), 1);
        assert!((atoms.atoms[0].mass - 1.0).abs() < 1e-15);
        assert_eq!(atoms.atoms[0].multiplicity, 2);
        assert_eq!(atoms.residual_mass, 0.0);
    }

    #[test]
    fn harmonic_atoms_with_residual() {
        let atoms = atom_distribution::<f64>(&SpectrumSpec::power(1.0, 1.0), 2).unwrap();
        let z2 = PI * PI / 6.0;
        assert!((atoms.atoms[0].mass - 1.0 / z2).abs() < 1e-14);
        assert!((atoms.atoms[1].u - LN_2).abs() < 1e-15);
        assert!((atoms.atoms[1].mass - 0.25 / z2).abs() < 1e-14);
        assert!((atoms.residual_mass - (1.0 - 7.5 / (PI * PI))).abs() < 1e-13);
    }

    #[test]
    fn truncation_index_must_be_two() {
        assert!(atom_distribution::<f64>(&half(), 1).is_err());
    }

    #[test]
    fn count_atoms_below_matches_scan() {
        let specs = [half(), SpectrumSpec::power(1.0, 1.0), SpectrumSpec::explicit([1.0, 0.5, 0.5, 0.1])];
        for spec in &specs {
            let s = Spectrum::<f64>::from_spec(spec).unwrap();
            for &t in &[-1.0, 0.0, 0.3, 1.0, 2.5, 7.0] {
                let scan = (1..5000).take_while(|&i| s.len().is_none_or(|n| i <= n) && s.atom(i) < t).count();
                assert_eq!(s.count_atoms_below(t) as usize, scan, "{spec:?} t={t}");
            }
        }
    }

    #[test]
    fn json_forms() {
        let spec: SpectrumSpec = serde_json::from_str(r#"{"kind":"geometric","C":1.0,"r":0.75}"#).unwrap();
        assert_eq!(spec, SpectrumSpec::geometric(1.0, 0.75));
        let spec: SpectrumSpec = serde_json::from_str(r#"{"kind":"power","scale":1.0,"s":1.0}"#).unwrap();
        assert_eq!(spec, SpectrumSpec::power(1.0, 1.0));
        let spec: SpectrumSpec = serde_json::from_str(r#"{"kind":"catalog","name":"brownian_motion"}"#).unwrap();
        assert_eq!(spec, SpectrumSpec::catalog("brownian_motion"));
        let spec: SpectrumSpec = serde_json::from_str(r#"{"kind":"explicit","lambdas":[1,0.5]}"#).unwrap();
        assert_eq!(serde_json::to_string(&spec).unwrap(), r#"{"kind":"explicit","lambdas":[1.0,0.5]}"#);
    }
}
