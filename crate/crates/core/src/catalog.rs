//! Named eigenvalue sequences.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::spectrum::{Lattice, LatticeStructure, SpectrumSpec};

/// A registered spectrum together with what is known about it analytically.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub spec: SpectrumSpec,
    pub lattice_known: Option<LatticeStructure<f64>>,
    pub notes: &'static str,
}

pub const NAMES: [&str; 3] = ["geometric_half", "power", "brownian_motion"];

/// Resolves `name` to a concrete spec. `power` reads the exponent `s` from
/// `params` (default 1) and an optional `scale`.
pub fn catalog_lookup(name: &str, params: &BTreeMap<String, f64>) -> Result<SpectrumSpec> {
    Ok(entry(name, params)?.spec)
}

pub fn entry(name: &str, params: &BTreeMap<String, f64>) -> Result<CatalogEntry> {
    let unexpected = |allowed: &[&str]| {
        params
            .keys()
            .find(|k| !allowed.contains(&k.as_str()))
            .map(|k| Error::BadParams(format!("'{name}' does not take parameter '{k}'")))
    };
    match name {
        "geometric_half" => {
            if let Some(e) = unexpected(&[]) {
                return Err(e);
            }
            let span = std::f64::consts::LN_2 / 2.0;
            Ok(CatalogEntry {
                name: "geometric_half",
                spec: SpectrumSpec::geometric(1.0, 0.5f64.sqrt()),
                lattice_known: Some(LatticeStructure::Lattice(Lattice {
                    span,
                    shift: 0.0,
                    indices: Vec::new(),
                    advisory: false,
                })),
                notes: "lambda(i)^2 = 2^-i; Lambda = 1, explosion 4, span ln2/2",
            })
        }
        "power" => {
            if let Some(e) = unexpected(&["s", "scale"]) {
                return Err(e);
            }
            let s = params.get("s").copied().unwrap_or(1.0);
            let scale = params.get("scale").copied().unwrap_or(1.0);
            if !(s > 0.5 && s.is_finite()) {
                return Err(Error::BadParams(format!("power exponent s={s} needs s > 1/2 for summability")));
            }
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(Error::BadParams(format!("power scale {scale} must be positive")));
            }
            Ok(CatalogEntry {
                name: "power",
                spec: SpectrumSpec::power(scale, s),
                lattice_known: None,
                notes: "lambda(i) = scale * i^-s; logs of integers are not commensurable",
            })
        }
        "brownian_motion" => {
            if let Some(e) = unexpected(&[]) {
                return Err(e);
            }
            Ok(CatalogEntry {
                name: "brownian_motion",
                spec: SpectrumSpec::Power {
                    scale: std::f64::consts::FRAC_1_PI,
                    s: 1.0,
                    shift: -0.5,
                },
                lattice_known: Some(LatticeStructure::NonLattice { advisory: false }),
                notes: "Karhunen-Loeve spectrum of the Wiener process, lambda(i) = 1/(pi (i - 1/2))",
            })
        }
        other => Err(Error::UnknownName(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{atom_distribution, detect_lattice, spectral_summary};

    fn no_params() -> BTreeMap<String, f64> {
        BTreeMap::new()
    }

    #[test]
    fn geometric_half_entry() {
        let spec = catalog_lookup("geometric_half", &no_params()).unwrap();
        let s = spectral_summary::<f64>(&spec, 1e-12).unwrap();
        assert!((s.lambda_total - 1.0).abs() < 1e-15);
        assert!((s.explosion - 4.0).abs() < 1e-14);
    }

    #[test]
    fn brownian_motion_total() {
        let spec = SpectrumSpec::catalog("brownian_motion");
        let s = spectral_summary::<f64>(&spec, 1e-13).unwrap();
        assert!((s.lambda_total - 0.5).abs() < 1e-10);
        // mpmath Hurwitz zeta derivatives at (2, 1/2)
        assert!((s.mean - 0.790_494_638_197_339_2).abs() < 1e-12);
        assert!((s.variance - 0.670_947_161_110_99).abs() < 1e-12);
        assert!((s.third_central - 1.7034509052739829).abs() < 1e-11);
        assert!((s.explosion - 2.4298805404483613).abs() < 1e-11);
    }

    #[test]
    fn divergent_power_params() {
        let mut p = no_params();
        p.insert("s".into(), 0.4);
        assert!(matches!(catalog_lookup("power", &p), Err(Error::BadParams(_))));
        p.insert("t".into(), 1.0);
        assert!(matches!(catalog_lookup("power", &p), Err(Error::BadParams(_))));
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(catalog_lookup("pillow", &no_params()), Err(Error::UnknownName(_))));
    }

    #[test]
    fn every_entry_is_valid_and_explodes() {
        for name in NAMES {
            let e = entry(name, &no_params()).unwrap();
            let s = spectral_summary::<f64>(&e.spec, 1e-12).unwrap();
            assert!(s.moment_ok && s.explosion > 1.0, "{name}");
            if let Some(known) = &e.lattice_known {
                let atoms = atom_distribution::<f64>(&e.spec, 30).unwrap();
                let found = detect_lattice(&atoms, 1e-9);
                assert_eq!(known.span().is_some(), found.span().is_some(), "{name}");
                if let (Some(a), Some(b)) = (known.span(), found.span()) {
                    assert!((a - b).abs() < 1e-9);
                }
            }
        }
    }
}
