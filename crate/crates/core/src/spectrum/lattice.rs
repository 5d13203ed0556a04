//! Lattice structure of the atom law: every atom of the form `shift + nu * span`.

use serde::Serialize;

use super::{AtomDistribution, Spectrum};
use crate::num::Real;

/// Default tolerance of the numeric span search.
pub const DEFAULT_LATTICE_TOL: f64 = 1e-9;

/// A lattice law with maximal span.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lattice<T> {
    /// Maximal span `h`.
    pub span: T,
    /// Grid point `nu = 0`, normalized into `[0, h)`.
    pub shift: T,
    /// `nu` of each atom, in atom order.
    pub indices: Vec<i64>,
    /// Set when the structure comes from a floating point search.
    pub advisory: bool,
}

impl<T: Real> Lattice<T> {
    /// The offset `a` with atoms at `M + a + nu h` for mean `M`.
    pub fn offset(&self, mean: T) -> T {
        self.shift - mean
    }

    /// Grid value `shift + nu h`.
    pub fn point(&self, nu: i64) -> T {
        self.shift + T::from_i64(nu).expect("index fits") * self.span
    }

    /// Largest grid point of `Z_d = (S_d - dM)/(sigma sqrt d)` not exceeding `theta`.
    pub fn snap_theta(&self, theta: T, mean: T, sigma: T, d: usize) -> T {
        let sd = sigma * T::from_count(d).sqrt();
        let dd = T::from_count(d);
        let k = ((theta * sd + dd * (mean - self.shift)) / self.span + T::lit(1e-9)).floor();
        (dd * self.shift + k * self.span - dd * mean) / sd
    }
}

/// Whether the law of `U` lives on an arithmetic grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LatticeStructure<T> {
    NonLattice { advisory: bool },
    Lattice(Lattice<T>),
}

impl<T: Real> LatticeStructure<T> {
    pub fn lattice(&self) -> Option<&Lattice<T>> {
        match self {
            LatticeStructure::Lattice(l) => Some(l),
            LatticeStructure::NonLattice { .. } => None,
        }
    }

    pub fn span(&self) -> Option<T> {
        self.lattice().map(|l| l.span)
    }

    pub fn is_advisory(&self) -> bool {
        match self {
            LatticeStructure::Lattice(l) => l.advisory,
            LatticeStructure::NonLattice { advisory } => *advisory,
        }
    }

    /// Human readable verdict.
    pub fn verdict(&self) -> String {
        let kind = if self.lattice().is_some() { "lattice" } else { "non-lattice" };
        if self.is_advisory() {
            format!("{kind} (advisory)")
        } else {
            kind.to_string()
        }
    }
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * 1f64.max(x.abs())
}

/// First continued-fraction convergent `p/q` of `delta/h` that represents
/// `delta` as a multiple of `h/q` within tolerance.
fn commensurate(delta: f64, h: f64, max_den: i64, tol: f64) -> Option<(i64, i64)> {
    let x = delta / h;
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut rem = x;
    for _ in 0..64 {
        let a = rem.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let a_i = a as i64;
        let p2 = a_i.checked_mul(p1)?.checked_add(p0)?;
        let q2 = a_i.checked_mul(q1)?.checked_add(q0)?;
        if q2 > max_den {
            return None;
        }
        if close(delta, p2 as f64 * h / q2 as f64, tol) {
            return Some((p2, q2));
        }
        let frac = rem - a;
        if frac <= 0.0 {
            return None;
        }
        rem = 1.0 / frac;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    None
}

/// Numeric maximal-span search over pairwise atom differences.
///
/// Always advisory: floating point atoms cannot certify non-latticeness.
pub fn detect_lattice<T: Real>(atoms: &AtomDistribution<T>, tol: T) -> LatticeStructure<T> {
    let advisory = LatticeStructure::NonLattice { advisory: true };
    let tol = tol.to_f64_lossy();
    let us: Vec<f64> = atoms.atoms.iter().map(|a| a.u.to_f64_lossy()).collect();
    if us.len() < 2 {
        return advisory;
    }
    let base = us[0];
    let deltas: Vec<f64> = us[1..].iter().map(|u| u - base).collect();
    let max_den = ((0.1 / tol.sqrt()) as i64).max(2);
    let mut h = deltas[0];
    let mut total_den = 1i64;
    let mut nus = vec![1i64];
    for (j, &delta) in deltas.iter().enumerate().skip(1) {
        let Some((_, q)) = commensurate(delta, h, max_den / total_den, tol) else {
            return advisory;
        };
        if q > 1 {
            total_den *= q;
            for nu in nus.iter_mut() {
                *nu *= q;
            }
        }
        h /= q as f64;
        nus.push((delta / h).round() as i64);
        // least-squares refit over the differences seen so far
        let (num, den) = nus
            .iter()
            .zip(&deltas[..=j])
            .fold((0.0, 0.0), |(n, d), (&nu, &dl)| (n + nu as f64 * dl, d + (nu * nu) as f64));
        h = num / den;
    }
    let g = nus.iter().fold(0i64, |g, &nu| gcd(g, nu));
    if g > 1 {
        h *= g as f64;
        nus.iter_mut().for_each(|nu| *nu /= g);
    }
    if !nus.iter().zip(&deltas).all(|(&nu, &dl)| close(dl, nu as f64 * h, tol)) {
        return advisory;
    }
    LatticeStructure::Lattice(build(us.iter().map(|&u| T::lit(u)), T::lit(h), true))
}

fn build<T: Real>(us: impl Iterator<Item = T>, span: T, advisory: bool) -> Lattice<T> {
    let us: Vec<T> = us.collect();
    let first = us[0];
    let shift = first - span * (first / span + T::lit(1e-9)).floor();
    let indices = us
        .iter()
        .map(|&u| ((u - shift) / span).round().to_i64().expect("index fits"))
        .collect();
    Lattice {
        span,
        shift,
        indices,
        advisory,
    }
}

/// Lattice structure for atoms of `spectrum`: the declared grid when the
/// spectrum kind has one, otherwise the numeric search.
pub fn lattice_for<T: Real>(spectrum: &Spectrum<T>, atoms: &AtomDistribution<T>, tol: T) -> LatticeStructure<T> {
    match spectrum.declared_span() {
        Some(span) if !atoms.is_empty() => LatticeStructure::Lattice(build(atoms.atoms.iter().map(|a| a.u), span, false)),
        _ => detect_lattice(atoms, tol),
    }
}
