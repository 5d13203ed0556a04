//! Exact cardinality `n(eps, d)` by enumeration or by convolution of the law of `U`.

mod binned;
mod convolution;
pub mod enumerate;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

pub use binned::{default_bin_width, BinnedBracket, BinnedEnvelope, GridBracket};
pub use enumerate::{top_products, ProductLevel, ProductLevels};

use crate::error::{Error, Result};
use crate::num::{big_floor, big_from_ln, big_ln, CompensatedSum, Real, Rounding};
use crate::special::normal_upper_quantile;
use crate::spectrum::{
    atoms_of, atoms_up_to, detect_lattice, summarize, AtomDistribution, Lattice, LatticeStructure, SpectralSummary,
    Spectrum, SpectrumSpec, DEFAULT_LATTICE_TOL,
};

/// Absolute slack when comparing a tail mass against `eps^2`.
fn tail_tolerance<T: Real>() -> T {
    T::lit(1e-11).max(T::lit(1000.0) * T::epsilon())
}

/// Which independent oracle computes the count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Enumerative,
    Convolution,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Enumerative => "enumerative",
            Method::Convolution => "convolution",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "enumerative" => Ok(Method::Enumerative),
            "convolution" => Ok(Method::Convolution),
            other => Err(Error::InvalidArgument(format!("unknown method '{other}'"))),
        }
    }
}

/// How a [`SumDistribution`] represents the law of `S_d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SumMode {
    /// Exact on the grid `d shift + nu h`.
    ExactLattice,
    /// Exact on a finite real support.
    ExactSparse,
    /// Bracketed by binned envelopes.
    Binned,
}

impl fmt::Display for SumMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SumMode::ExactLattice => "exact-lattice",
            SumMode::ExactSparse => "exact-sparse",
            SumMode::Binned => "binned",
        })
    }
}

/// One support point of `S_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Level<T> {
    pub s: T,
    /// `P(S_d = s)`.
    pub mass: T,
    /// Number of multi-indices `k` with `-ln lambda_k = s`.
    pub count: BigUint,
    /// Grid index in lattice mode.
    pub nu: Option<i64>,
}

/// The law of `S_d = U_1 + ... + U_d`.
#[derive(Debug, Clone)]
pub struct SumDistribution<T> {
    pub d: usize,
    pub mode: SumMode,
    /// Ascending support with exact counts (exact modes).
    pub levels: Vec<Level<T>>,
    /// Envelopes (binned mode).
    pub binned: Option<BinnedEnvelope<T>>,
    /// Mass not represented, from per-factor truncation or a level cap.
    pub lost_mass: T,
    pub mean: T,
    pub sigma: T,
    /// Every level of `S_d` not above this value is represented.
    pub complete_through: T,
    pub lattice: Option<Lattice<T>>,
}

impl<T: Real> SumDistribution<T> {
    pub fn z_of(&self, s: T) -> T {
        (s - T::from_count(self.d) * self.mean) / (self.sigma * T::from_count(self.d).sqrt())
    }

    pub fn s_of(&self, z: T) -> T {
        T::from_count(self.d) * self.mean + z * self.sigma * T::from_count(self.d).sqrt()
    }

    /// Represented mass.
    pub fn mass(&self) -> T {
        match &self.binned {
            Some(env) => env.total_mass().0,
            None => self.levels.iter().map(|l| l.mass).collect::<CompensatedSum<T>>().value(),
        }
    }

    /// `P(Z_d <= z)` in exact modes; the envelope midpoint in binned mode.
    pub fn cdf(&self, z: T) -> T {
        let (lo, hi) = self.cdf_bounds(z);
        (lo + hi) / T::lit(2.0)
    }

    /// Bounds on `P(Z_d <= z)`; equal in exact modes.
    pub fn cdf_bounds(&self, z: T) -> (T, T) {
        let s = self.s_of(z);
        if let Some(env) = &self.binned {
            return env.cdf_bounds(s);
        }
        let slack = T::lit(1e-9) * T::one().max(s.abs());
        let f = self
            .levels
            .iter()
            .take_while(|l| l.s <= s + slack)
            .map(|l| l.mass)
            .collect::<CompensatedSum<T>>()
            .value();
        (f, f)
    }
}

/// Tuning of the exact computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactOptions {
    /// Cap on stored entries: enumeration frontier, support levels or bins.
    pub budget: usize,
    /// Grid width for binned mode; derived from `sigma` and `d` when absent.
    pub bin_width: Option<f64>,
    pub lattice_tol: f64,
    pub summary_tol: f64,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            budget: 1 << 24,
            bin_width: None,
            lattice_tol: DEFAULT_LATTICE_TOL,
            summary_tol: 1e-13,
        }
    }
}

impl ExactOptions {
    /// Budget derived from a memory cap, assuming `bytes_per_entry` per stored entry.
    pub fn with_memory_mb(mb: usize, bytes_per_entry: usize) -> Self {
        Self {
            budget: (mb.saturating_mul(1 << 20) / bytes_per_entry.max(1)).max(1),
            ..Self::default()
        }
    }
}

/// Quantile of `Z_d` or its certified bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantileBracket<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> QuantileBracket<T> {
    pub fn point(v: T) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn midpoint(&self) -> T {
        (self.lo + self.hi) / T::lit(2.0)
    }
}

/// Binned-mode bracket of a [`CardinalityResult`].
#[derive(Debug, Clone, PartialEq)]
pub struct Bracketing<T> {
    pub n_lo: BigUint,
    pub n_hi: BigUint,
    pub log_n_lo: T,
    pub log_n_hi: T,
    /// Bracket on `-ln zeta`.
    pub zeta: QuantileBracket<T>,
    pub theta: QuantileBracket<T>,
    pub width: T,
}

/// Outcome of [`exact_cardinality`].
#[derive(Debug, Clone, PartialEq)]
pub struct CardinalityResult<T> {
    pub d: usize,
    pub epsilon: T,
    pub method: Method,
    /// Representation used by the convolution method.
    pub mode: Option<SumMode>,
    /// `min { n : E|X - X_n|^2 <= eps^2 Lambda^d }`.
    pub n_min: BigUint,
    /// `#{k : lambda_k >= zeta}`.
    pub card_a: BigUint,
    /// `-ln zeta`.
    pub zeta: T,
    pub theta: T,
    /// `sum_{lambda_k < zeta} lambda_k^2 / Lambda^d`.
    pub tail_mass: T,
    /// Number of multi-indices on the level `zeta`.
    pub level_multiplicity: BigUint,
    /// Certified bracket (binned mode only), with `n_min` a point estimate inside it.
    pub bracketing: Option<Bracketing<T>>,
}

impl<T: Real> CardinalityResult<T> {
    /// `zeta` itself. The admissible set is `(0, zeta]`, so this is also its supremum.
    pub fn zeta_value(&self) -> T {
        (-self.zeta).exp()
    }

    /// Largest real `z` with `sum_{lambda_k < z} lambda_k^2 <= eps^2 Lambda^d`.
    pub fn zeta_sup(&self) -> T {
        self.zeta_value()
    }

    /// `ln n_min`, from the exact integer.
    pub fn log_n_min(&self) -> f64 {
        big_ln(&self.n_min)
    }
}

struct Crossing<T> {
    s: T,
    card_a: BigUint,
    n_min: BigUint,
    tail: T,
    level_count: BigUint,
}

/// Walks levels upward until the strict tail drops to `eps^2`.
struct ThresholdSearch<T> {
    eps2: T,
    cum: CompensatedSum<T>,
    card: BigUint,
}

impl<T: Real> ThresholdSearch<T> {
    fn new(eps2: T) -> Self {
        Self {
            eps2,
            cum: CompensatedSum::new(),
            card: BigUint::zero(),
        }
    }

    fn offer(&mut self, s: T, count: &BigUint, mass: T) -> Option<Crossing<T>> {
        self.cum.add(mass);
        self.card += count;
        let tail = (T::one() - self.cum.value()).max(T::zero());
        if tail > self.eps2 + tail_tolerance::<T>() {
            return None;
        }
        let slack = (self.eps2 - tail).max(T::zero());
        let per = (mass.ln() - T::lit(big_ln(count))).exp();
        let mut drop = big_floor(slack / per * T::lit(1.0 + 1e-9));
        let cap = count - BigUint::one();
        if drop > cap {
            drop = cap;
        }
        Some(Crossing {
            s,
            n_min: &self.card - drop,
            card_a: self.card.clone(),
            tail,
            level_count: count.clone(),
        })
    }
}

fn check_eps<T: Real>(eps: T) -> Result<T> {
    if !(eps > T::zero() && eps < T::one()) {
        return Err(Error::EpsOutOfRange(eps.to_f64_lossy()));
    }
    Ok(eps * eps)
}

/// Minimal support point of `Z_d` with `P(Z_d > theta) <= eps^2`, or its bracket.
///
/// Unrepresented mass is treated as lying above every represented level.
pub fn theta_quantile<T: Real>(dist: &SumDistribution<T>, eps: T) -> Result<QuantileBracket<T>> {
    let eps2 = check_eps(eps)?;
    if let Some(env) = &dist.binned {
        let grid = env
            .quantile_bracket(eps2)
            .ok_or_else(|| Error::BudgetExceeded("quantile lies beyond the binned range".into()))?;
        return Ok(QuantileBracket {
            lo: dist.z_of(env.position(grid.lo)),
            hi: dist.z_of(env.position(grid.hi)),
        });
    }
    let mut cum = CompensatedSum::new();
    for level in &dist.levels {
        cum.add(level.mass);
        if T::one() - cum.value() <= eps2 + tail_tolerance::<T>() {
            return Ok(QuantileBracket::point(dist.z_of(level.s)));
        }
    }
    Err(Error::BudgetExceeded("quantile lies beyond the represented levels".into()))
}

fn moments_of<T: Real>(atoms: &AtomDistribution<T>) -> (T, T) {
    let total = atoms.total_mass();
    let mean = atoms.atoms.iter().map(|a| a.mass * a.u).collect::<CompensatedSum<T>>().value() / total;
    let var = atoms
        .atoms
        .iter()
        .map(|a| a.mass * (a.u - mean) * (a.u - mean))
        .collect::<CompensatedSum<T>>()
        .value()
        / total;
    (mean, var.sqrt())
}

/// d-fold convolution of `atoms` with default options.
pub fn sum_distribution<T: Real>(
    atoms: &AtomDistribution<T>,
    lattice: &LatticeStructure<T>,
    d: usize,
) -> Result<SumDistribution<T>> {
    sum_distribution_with(atoms, lattice, d, &ExactOptions::default())
}

/// d-fold convolution of `atoms`: exact on a lattice, binned otherwise.
///
/// Normalization uses the moments of the represented atoms.
pub fn sum_distribution_with<T: Real>(
    atoms: &AtomDistribution<T>,
    lattice: &LatticeStructure<T>,
    d: usize,
    opts: &ExactOptions,
) -> Result<SumDistribution<T>> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    if atoms.is_empty() {
        return Err(Error::DegenerateSpectrum("no atoms".into()));
    }
    let (mean, sigma) = moments_of(atoms);
    let dd = T::from_count(d);
    let lost_mass = -(dd * (-atoms.residual_mass).ln_1p()).exp_m1();
    let top = dd * atoms.atoms.last().expect("non-empty").u;
    let mut dist = SumDistribution {
        d,
        mode: SumMode::ExactLattice,
        levels: Vec::new(),
        binned: None,
        lost_mass,
        mean,
        sigma,
        complete_through: top,
        lattice: None,
    };
    match lattice.lattice() {
        Some(l) => {
            dist.levels = convolution::lattice_levels(atoms, l, d, None, opts.budget)?;
            dist.lattice = Some(l.clone());
        }
        None => {
            let width = T::lit(opts.bin_width.unwrap_or_else(|| default_bin_width(sigma, d).to_f64_lossy()));
            let g0 = atoms.atoms[0].u;
            let len = binned::grid_len(top, d, g0, width, opts.budget)? + d;
            let env = BinnedEnvelope::build(binned::FactorBins::from_atoms(atoms, width, len), d, len);
            dist.mode = SumMode::Binned;
            dist.complete_through = env.position(len - 1);
            dist.binned = Some(env);
        }
    }
    Ok(dist)
}

/// Law of `S_d` for a whole sequence, complete for all levels up to `cap`.
///
/// Lattice sequences give exact counts, finite non-lattice lists give exact
/// real support when affordable, and everything else is binned.
pub fn truncated_sum_distribution<T: Real>(
    spec: &SpectrumSpec,
    d: usize,
    cap: T,
    opts: &ExactOptions,
) -> Result<SumDistribution<T>> {
    let spectrum = Spectrum::<T>::from_spec(spec)?;
    let summary = summarize(&spectrum, T::lit(opts.summary_tol))?;
    Planner::new(&spectrum, &summary, d, opts)?.distribution(cap)
}

/// Chooses a representation for the convolution method.
struct Planner<'a, T: Real> {
    spectrum: &'a Spectrum<T>,
    summary: &'a SpectralSummary<T>,
    d: usize,
    opts: &'a ExactOptions,
    kind: Kind<T>,
}

enum Kind<T> {
    Lattice { span: T, declared: bool },
    Sparse,
    Binned,
}

impl<'a, T: Real> Planner<'a, T> {
    fn new(spectrum: &'a Spectrum<T>, summary: &'a SpectralSummary<T>, d: usize, opts: &'a ExactOptions) -> Result<Self> {
        if d == 0 {
            return Err(Error::ZeroDimension);
        }
        let kind = if let Some(span) = spectrum.declared_span() {
            Kind::Lattice { span, declared: true }
        } else if let Some(n) = spectrum.len() {
            let atoms = atoms_of(spectrum, n);
            match detect_lattice(&atoms, T::lit(opts.lattice_tol)) {
                LatticeStructure::Lattice(l) => Kind::Lattice {
                    span: l.span,
                    declared: false,
                },
                _ if atoms.len() == 1 => Kind::Sparse,
                _ => match convolution::multiset_count(atoms.len(), d) {
                    Some(size) if size <= opts.budget => Kind::Sparse,
                    _ => Kind::Binned,
                },
            }
        } else {
            Kind::Binned
        };
        Ok(Self {
            spectrum,
            summary,
            d,
            opts,
            kind,
        })
    }

    fn mode(&self) -> SumMode {
        match self.kind {
            Kind::Lattice { .. } => SumMode::ExactLattice,
            Kind::Sparse => SumMode::ExactSparse,
            Kind::Binned => SumMode::Binned,
        }
    }

    fn width(&self) -> T {
        match self.opts.bin_width {
            Some(w) => T::lit(w),
            None => default_bin_width(self.summary.sigma(), self.d),
        }
    }

    fn distribution(&self, cap: T) -> Result<SumDistribution<T>> {
        let d = self.d;
        let dd = T::from_count(d);
        let g0 = self.spectrum.atom(1);
        let mut dist = SumDistribution {
            d,
            mode: self.mode(),
            levels: Vec::new(),
            binned: None,
            lost_mass: T::zero(),
            mean: self.summary.mean,
            sigma: self.summary.sigma(),
            complete_through: cap,
            lattice: None,
        };
        // each factor can take at most cap - (d-1) g0
        let factor_limit = cap - (dd - T::one()) * g0;
        match self.kind {
            Kind::Lattice { span, declared } => {
                let atoms = atoms_up_to(self.spectrum, factor_limit + T::lit(1e-9) * span, self.opts.budget)?;
                let structure = if declared {
                    crate::spectrum::lattice_for(self.spectrum, &atoms, T::lit(self.opts.lattice_tol))
                } else {
                    detect_lattice(&atoms_of(self.spectrum, self.spectrum.len().unwrap_or(atoms.len())), T::lit(self.opts.lattice_tol))
                };
                let lattice = structure.lattice().expect("lattice kind").clone();
                let lattice = if declared {
                    lattice
                } else {
                    // restrict the indices to the atoms kept
                    Lattice {
                        indices: lattice.indices[..atoms.len()].to_vec(),
                        ..lattice
                    }
                };
                let steps = ((cap - dd * g0) / span + T::lit(1e-9)).floor().to_usize().unwrap_or(0);
                dist.levels = convolution::lattice_levels(&atoms, &lattice, d, Some(steps), self.opts.budget)?;
                dist.lattice = Some(lattice);
            }
            Kind::Sparse => {
                let atoms = atoms_of(self.spectrum, self.spectrum.len().expect("finite"));
                dist.levels = convolution::sparse_levels(&atoms, d, Some(cap), self.opts.budget)?;
            }
            Kind::Binned => {
                let width = self.width();
                let len = binned::grid_len(cap, d, g0, width, self.opts.budget)?;
                let factor = binned::FactorBins::from_spectrum(self.spectrum, self.summary.lambda_total, width, len);
                let env = BinnedEnvelope::build(factor, d, len);
                dist.complete_through = env.position(len - 1);
                dist.binned = Some(env);
            }
        }
        dist.lost_mass = (T::one() - dist.mass()).max(T::zero());
        Ok(dist)
    }
}

/// Exact-mode crossing over the levels of `dist`.
fn crossing_in<T: Real>(dist: &SumDistribution<T>, eps2: T) -> Option<Crossing<T>> {
    let mut search = ThresholdSearch::new(eps2);
    for level in &dist.levels {
        if let Some(c) = search.offer(level.s, &level.count, level.mass) {
            return Some(c);
        }
    }
    None
}

fn finish<T: Real>(
    summary: &SpectralSummary<T>,
    d: usize,
    eps: T,
    method: Method,
    mode: Option<SumMode>,
    c: Crossing<T>,
) -> CardinalityResult<T> {
    let dd = T::from_count(d);
    CardinalityResult {
        d,
        epsilon: eps,
        method,
        mode,
        n_min: c.n_min,
        card_a: c.card_a,
        zeta: c.s,
        theta: (c.s - dd * summary.mean) / (summary.sigma() * dd.sqrt()),
        tail_mass: c.tail,
        level_multiplicity: c.level_count,
        bracketing: None,
    }
}

/// `n(eps, d)` together with `card(A)`, `zeta` and `theta`.
pub fn exact_cardinality<T: Real>(spec: &SpectrumSpec, d: usize, eps: T, method: Method) -> Result<CardinalityResult<T>> {
    exact_cardinality_with(spec, d, eps, method, &ExactOptions::default())
}

pub fn exact_cardinality_with<T: Real>(
    spec: &SpectrumSpec,
    d: usize,
    eps: T,
    method: Method,
    opts: &ExactOptions,
) -> Result<CardinalityResult<T>> {
    let eps2 = check_eps(eps)?;
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    let spectrum = Spectrum::<T>::from_spec(spec)?;
    let summary = summarize(&spectrum, T::lit(opts.summary_tol))?;
    if summary.degenerate {
        return Err(Error::DegenerateSpectrum("sigma = 0, theta is undefined".into()));
    }
    match method {
        Method::Enumerative => enumerative(&spectrum, &summary, d, eps, eps2, opts),
        Method::Convolution => convolved(&spectrum, &summary, d, eps, eps2, opts),
    }
}

fn enumerative<T: Real>(
    spectrum: &Spectrum<T>,
    summary: &SpectralSummary<T>,
    d: usize,
    eps: T,
    eps2: T,
    opts: &ExactOptions,
) -> Result<CardinalityResult<T>> {
    let log_power = T::from_count(d) * summary.lambda_total.ln();
    let mut search = ThresholdSearch::new(eps2);
    for level in ProductLevels::new(spectrum, d, opts.budget)? {
        let level = level.map_err(|e| match e {
            Error::LimitExceedsMemory(n) => Error::BudgetExceeded(format!("enumeration frontier exceeded {n} entries")),
            other => other,
        })?;
        let mass = (T::lit(big_ln(&level.multiplicity)) + level.log_value - log_power).exp();
        if let Some(c) = search.offer(level.sum_level(), &level.multiplicity, mass) {
            return Ok(finish(summary, d, eps, Method::Enumerative, None, c));
        }
    }
    Err(Error::BudgetExceeded("all products enumerated before the tail reached eps^2".into()))
}

fn convolved<T: Real>(
    spectrum: &Spectrum<T>,
    summary: &SpectralSummary<T>,
    d: usize,
    eps: T,
    eps2: T,
    opts: &ExactOptions,
) -> Result<CardinalityResult<T>> {
    let planner = Planner::new(spectrum, summary, d, opts)?;
    let dd = T::from_count(d);
    let sd = summary.sigma() * dd.sqrt();
    let z = normal_upper_quantile(eps2);
    let top = spectrum.len().map(|n| dd * spectrum.atom(n));
    for margin in [2.0, 4.0, 8.0, 16.0] {
        let guess = dd * summary.mean + sd * (z + T::lit(margin)) + T::lit(margin) * planner.width();
        let cap = top.map_or(guess, |t| guess.min(t));
        let dist = planner.distribution(cap)?;
        match &dist.binned {
            None => {
                if let Some(c) = crossing_in(&dist, eps2) {
                    return Ok(finish(summary, d, eps, Method::Convolution, Some(dist.mode), c));
                }
            }
            Some(env) => {
                if let Some(b) = binned::bracket_from(env, eps2) {
                    return Ok(binned_result(summary, d, eps, env, b));
                }
            }
        }
        if top.is_some_and(|t| cap >= t) {
            break;
        }
    }
    Err(Error::BudgetExceeded("level cap could not be raised far enough to reach the quantile".into()))
}

fn binned_result<T: Real>(
    summary: &SpectralSummary<T>,
    d: usize,
    eps: T,
    env: &BinnedEnvelope<T>,
    b: BinnedBracket<T>,
) -> CardinalityResult<T> {
    let dd = T::from_count(d);
    let theta = |s: T| (s - dd * summary.mean) / (summary.sigma() * dd.sqrt());
    let log_mid = (b.log_n_lo + b.log_n_hi) / T::lit(2.0);
    let mut estimate = big_from_ln(log_mid.to_f64_lossy(), Rounding::Nearest);
    if estimate < b.n_lo {
        estimate = b.n_lo.clone();
    }
    if estimate > b.n_hi {
        estimate = b.n_hi.clone();
    }
    let zeta = QuantileBracket {
        lo: b.level_lo,
        hi: b.level_hi,
    };
    CardinalityResult {
        d,
        epsilon: eps,
        method: Method::Convolution,
        mode: Some(SumMode::Binned),
        n_min: estimate.clone(),
        card_a: estimate,
        zeta: zeta.midpoint(),
        theta: theta(zeta.midpoint()),
        tail_mass: b.tail_upper.min(eps * eps),
        level_multiplicity: BigUint::zero(),
        bracketing: Some(Bracketing {
            n_lo: b.n_lo,
            n_hi: b.n_hi,
            log_n_lo: b.log_n_lo,
            log_n_hi: b.log_n_hi,
            zeta,
            theta: QuantileBracket {
                lo: theta(b.level_lo),
                hi: theta(b.level_hi),
            },
            width: env.width,
        }),
    }
}
