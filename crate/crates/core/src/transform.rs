//! Transform names used on the command line and in reports: `T1`..`T4` for
//! the catalog, `K<rho>` for the exact KLT at a fixed ρ, `K` for the exact KLT
//! at whatever ρ a metric is evaluated at, and `DCT` for the DCT-II.

use std::fmt;
use std::str::FromStr;

use crate::approximations::{catalog_entry, CatalogId};
use crate::markov_klt::{dct_matrix, klt_matrix, MarkovModel};
use crate::matrix::RealMatrix;
use crate::{Result, RkltError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransformName {
    Catalog(CatalogId),
    /// Exact KLT; `None` defers ρ to the evaluation context.
    Klt(Option<f64>),
    Dct,
}

impl TransformName {
    /// Dense 8-point matrix. `eval_rho` supplies ρ for a bare `K`.
    pub fn matrix(&self, eval_rho: Option<f64>) -> Result<RealMatrix> {
        match *self {
            TransformName::Catalog(id) => Ok(catalog_entry(id).transform.matrix()),
            TransformName::Klt(rho) => {
                let rho = rho.or(eval_rho).ok_or_else(|| {
                    RkltError::InvalidArgument("transform 'K' needs a correlation coefficient, e.g. K0.8".into())
                })?;
                klt_matrix(&MarkovModel::new(8, rho)?)
            }
            TransformName::Dct => dct_matrix(8),
        }
    }

    /// Label with a bare `K` resolved against `eval_rho`.
    pub fn label_at(&self, eval_rho: f64) -> String {
        match self {
            TransformName::Klt(None) => TransformName::Klt(Some(eval_rho)).to_string(),
            other => other.to_string(),
        }
    }
}

impl fmt::Display for TransformName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransformName::Catalog(id) => write!(f, "{id}"),
            TransformName::Klt(Some(rho)) => write!(f, "K{rho}"),
            TransformName::Klt(None) => write!(f, "K"),
            TransformName::Dct => write!(f, "DCT"),
        }
    }
}

impl FromStr for TransformName {
    type Err = RkltError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("dct") {
            return Ok(TransformName::Dct);
        }
        if let Ok(id) = t.parse::<CatalogId>() {
            return Ok(TransformName::Catalog(id));
        }
        if let Some(rest) = t.strip_prefix(['K', 'k']) {
            if rest.is_empty() {
                return Ok(TransformName::Klt(None));
            }
            let rho: f64 = rest.parse().map_err(|_| RkltError::UnknownTransform(s.to_string()))?;
            MarkovModel::new(8, rho)?;
            return Ok(TransformName::Klt(Some(rho)));
        }
        Err(RkltError::UnknownTransform(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        for s in ["T1", "T4", "K0.8", "K", "DCT"] {
            assert_eq!(s.parse::<TransformName>().unwrap().to_string(), s);
        }
        assert_eq!("dct".parse::<TransformName>().unwrap(), TransformName::Dct);
        assert!(matches!("X1".parse::<TransformName>(), Err(RkltError::UnknownTransform(_))));
        assert!("K1.5".parse::<TransformName>().is_err());
        assert!("Kabc".parse::<TransformName>().is_err());
    }

    #[test]
    fn bare_k_needs_rho() {
        assert!(TransformName::Klt(None).matrix(None).is_err());
        assert!(TransformName::Klt(None).matrix(Some(0.5)).is_ok());
        assert_eq!(TransformName::Klt(None).label_at(0.7), "K0.7");
    }
}
