//! Coding and similarity figures of merit of a transform against an AR(1)
//! source: unified coding gain, transform efficiency, MSE relative to the
//! exact KLT and total error energy.

use std::f64::consts::PI;

use serde::Serialize;

use crate::markov_klt::{autocorrelation_matrix, klt_matrix, MarkovModel};
use crate::matrix::{ensure_square, invert, RealMatrix};
use crate::transform::TransformName;
use crate::approximations::CatalogId;
use crate::Result;

/// Which matrix supplies the synthesis rows `g_k` in the coding gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SynthesisBasis {
    /// Rows of `T_hat^-1`.
    #[default]
    Inverse,
    /// Rows of `T_hat^T`, i.e. the inverse an orthonormal transform would
    /// have. Identical to `Inverse` for orthonormal transforms; for
    /// row-normalized but non-orthogonal approximations this is the
    /// convention under which the reference coding gains of T2 and T3 are
    /// obtained.
    Transpose,
}

/// `10 log10 prod_k (A_k B_k)^(-1/N)` with `A_k = su{(h_k^T h_k) ⊙ R_x}` and
/// `B_k = ||g_k||^2`, `g_k` taken from `T_hat^-1`.
pub fn unified_coding_gain(t_hat: &RealMatrix, model: &MarkovModel) -> Result<f64> {
    unified_coding_gain_with(t_hat, model, SynthesisBasis::Inverse)
}

pub fn unified_coding_gain_with(t_hat: &RealMatrix, model: &MarkovModel, basis: SynthesisBasis) -> Result<f64> {
    let n = model.n();
    ensure_square(t_hat, n)?;
    let r = autocorrelation_matrix(model);
    let synthesis = match basis {
        SynthesisBasis::Inverse => invert(t_hat)?,
        SynthesisBasis::Transpose => t_hat.transpose(),
    };
    let mut log_sum = 0.0;
    for k in 0..n {
        let h = t_hat.row(k);
        // su{(h^T h) ⊙ R} is the quadratic form h R h^T
        let a = (h * &r * h.transpose())[(0, 0)];
        let b = synthesis.row(k).norm_squared();
        log_sum += (a * b).log10();
    }
    Ok(-10.0 * log_sum / n as f64)
}

/// `100 sum|r_ii| / sum|r_ij|` over `r = T_hat R_x T_hat^T`.
pub fn transform_efficiency(t_hat: &RealMatrix, model: &MarkovModel) -> Result<f64> {
    ensure_square(t_hat, model.n())?;
    let r = t_hat * autocorrelation_matrix(model) * t_hat.transpose();
    let diag: f64 = r.diagonal().iter().map(|v| v.abs()).sum();
    let total: f64 = r.iter().map(|v| v.abs()).sum();
    Ok(100.0 * diag / total)
}

/// Flips each row of `t_hat` whose inner product with the matching row of
/// `reference` is negative.
pub fn align_signs(reference: &RealMatrix, t_hat: &RealMatrix) -> Result<RealMatrix> {
    ensure_square(t_hat, reference.nrows())?;
    ensure_square(reference, t_hat.nrows())?;
    let mut out = t_hat.clone();
    for i in 0..out.nrows() {
        if reference.row(i).dot(&t_hat.row(i)) < 0.0 {
            out.row_mut(i).neg_mut();
        }
    }
    Ok(out)
}

/// `pi * ||reference - t_hat||_F^2` after sign alignment.
pub fn total_error_energy(reference: &RealMatrix, t_hat: &RealMatrix) -> Result<f64> {
    let aligned = align_signs(reference, t_hat)?;
    Ok(PI * (reference - aligned).norm_squared())
}

/// `(1/N) tr{(M - T_hat) R_x (M - T_hat)^T}` for an arbitrary reference `M`,
/// after sign alignment.
pub fn mse_against(reference: &RealMatrix, t_hat: &RealMatrix, model: &MarkovModel) -> Result<f64> {
    ensure_square(reference, model.n())?;
    let d = reference - align_signs(reference, t_hat)?;
    let e = &d * autocorrelation_matrix(model) * d.transpose();
    Ok(e.trace() / model.n() as f64)
}

/// MSE of `t_hat` relative to the exact KLT of `model`.
pub fn klt_mse(t_hat: &RealMatrix, model: &MarkovModel) -> Result<f64> {
    mse_against(&klt_matrix(model)?, t_hat, model)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRecord {
    pub transform_id: String,
    pub rho: f64,
    pub coding_gain_db: f64,
    pub efficiency_pct: f64,
    pub total_error_energy: f64,
    pub mse: f64,
}

impl MetricsRecord {
    /// `transform,rho,Cg,eta,eps,mse` with four decimals on the metrics.
    pub fn csv_fields(&self) -> [String; 6] {
        [
            self.transform_id.clone(),
            format!("{}", self.rho),
            format!("{:.4}", self.coding_gain_db),
            format!("{:.4}", self.efficiency_pct),
            format!("{:.4}", self.total_error_energy),
            format!("{:.4}", self.mse),
        ]
    }
}

pub const CSV_HEADER: [&str; 6] = ["transform", "rho", "Cg", "eta", "eps", "mse"];

/// All four measures of `t_hat` at `model`, the similarity measures taken
/// against the exact KLT of the same ρ.
pub fn evaluate(label: &str, t_hat: &RealMatrix, model: &MarkovModel, basis: SynthesisBasis) -> Result<MetricsRecord> {
    let k = klt_matrix(model)?;
    Ok(MetricsRecord {
        transform_id: label.to_string(),
        rho: model.rho(),
        coding_gain_db: unified_coding_gain_with(t_hat, model, basis)?,
        efficiency_pct: transform_efficiency(t_hat, model)?,
        total_error_energy: total_error_energy(&k, t_hat)?,
        mse: mse_against(&k, t_hat, model)?,
    })
}

/// Evaluates a named transform at one ρ.
pub fn evaluate_named(name: &TransformName, rho: f64, basis: SynthesisBasis) -> Result<MetricsRecord> {
    let model = MarkovModel::new(8, rho)?;
    evaluate(&name.label_at(rho), &name.matrix(Some(rho))?, &model, basis)
}

/// Each catalog approximation next to the exact KLT at the left end of its
/// design range (0.3 for `T1`).
pub fn reference_pairs() -> [(TransformName, f64); 8] {
    use TransformName::{Catalog, Klt};
    [
        (Klt(Some(0.3)), 0.3),
        (Catalog(CatalogId::T1), 0.3),
        (Klt(Some(0.4)), 0.4),
        (Catalog(CatalogId::T2), 0.4),
        (Klt(Some(0.7)), 0.7),
        (Catalog(CatalogId::T3), 0.7),
        (Klt(Some(0.8)), 0.8),
        (Catalog(CatalogId::T4), 0.8),
    ]
}

/// The eight comparison rows of [`reference_pairs`].
pub fn comparison_table(basis: SynthesisBasis) -> Result<Vec<MetricsRecord>> {
    reference_pairs().iter().map(|(name, rho)| evaluate_named(name, *rho, basis)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approximations::catalog_entry;
    use crate::markov_klt::dct_matrix;

    fn m(rho: f64) -> MarkovModel {
        MarkovModel::new(8, rho).unwrap()
    }

    #[test]
    fn identity_has_zero_gain() {
        let id = RealMatrix::identity(8, 8);
        for rho in [0.2, 0.9] {
            assert!(unified_coding_gain(&id, &m(rho)).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn klt_against_itself() {
        for rho in [0.3, 0.8] {
            let k = klt_matrix(&m(rho)).unwrap();
            let rec = evaluate("K", &k, &m(rho), SynthesisBasis::Inverse).unwrap();
            assert!((rec.efficiency_pct - 100.0).abs() < 1e-9);
            assert_eq!(rec.total_error_energy, 0.0);
            assert_eq!(rec.mse, 0.0);
        }
    }

    #[test]
    fn bases_agree_for_orthonormal_transforms() {
        let t4 = catalog_entry(CatalogId::T4).transform.matrix();
        let a = unified_coding_gain_with(&t4, &m(0.8), SynthesisBasis::Inverse).unwrap();
        let b = unified_coding_gain_with(&t4, &m(0.8), SynthesisBasis::Transpose).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn singular_transform_is_rejected() {
        let mut t = RealMatrix::identity(8, 8);
        t[(7, 7)] = 0.0;
        assert!(matches!(unified_coding_gain(&t, &m(0.5)), Err(crate::RkltError::SingularTransform)));
    }

    #[test]
    fn dimension_mismatch() {
        let d4 = dct_matrix(4).unwrap();
        assert!(total_error_energy(&dct_matrix(8).unwrap(), &d4).is_err());
        assert!(transform_efficiency(&d4, &m(0.5)).is_err());
    }

    #[test]
    fn error_measures_ignore_row_sign_flips() {
        let k = klt_matrix(&m(0.7)).unwrap();
        let t3 = catalog_entry(CatalogId::T3).transform.matrix();
        let base_eps = total_error_energy(&k, &t3).unwrap();
        let base_mse = mse_against(&k, &t3, &m(0.7)).unwrap();
        let (mut k2, mut t2) = (k.clone(), t3.clone());
        k2.row_mut(2).neg_mut();
        t2.row_mut(2).neg_mut();
        t2.row_mut(5).neg_mut();
        assert!((total_error_energy(&k2, &t2).unwrap() - base_eps).abs() < 1e-12);
        assert!((mse_against(&k2, &t2, &m(0.7)).unwrap() - base_mse).abs() < 1e-12);
    }

    #[test]
    fn csv_fields_use_four_decimals() {
        let rec = MetricsRecord {
            transform_id: "T1".into(),
            rho: 0.3,
            coding_gain_db: 0.282_911_5,
            efficiency_pct: 80.708_755,
            total_error_energy: 1.675_113,
            mse: 0.065_857,
        };
        assert_eq!(rec.csv_fields().join(","), "T1,0.3,0.2829,80.7088,1.6751,0.0659");
    }
}
