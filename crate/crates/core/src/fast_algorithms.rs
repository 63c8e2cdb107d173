//! Sparse factorizations `T_i = P_i * A2_i * A1` of the 8-point catalog.
//!
//! `A1` is the butterfly `[[I4, J4], [J4, -I4]]` (J4 the counter-identity),
//! `A2_i = diag(B2_i, B2)` and `P_i` a row permutation. `B2_3` and `B2_4` are
//! stored as the product of two 4×4 stages, which is where `T4` saves its two
//! additions. Applying the factors touches every input with `+`/`-` only.

use std::ops::{Add, Neg, Sub};

use crate::approximations::{CatalogId, IntegerTransform};
use crate::{Result, RkltError};

const N: usize = 8;

/// Addition counts of the signal-flow graphs, for comparison with the count
/// derived from the factor structure.
pub const REFERENCE_ADDITIONS: [usize; 4] = [24, 24, 24, 22];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    ButterflyA1,
    BlockDiagonalA2,
    Permutation,
}

/// One 8×8 factor with entries in `{-1, 0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseFactor {
    kind: FactorKind,
    entries: [[i8; N]; N],
}

impl SparseFactor {
    pub fn kind(&self) -> FactorKind {
        self.kind
    }

    pub fn entries(&self) -> &[[i8; N]; N] {
        &self.entries
    }

    fn permutation(rows: [usize; N]) -> Self {
        let mut entries = [[0i8; N]; N];
        for (i, &c) in rows.iter().enumerate() {
            entries[i][c] = 1;
        }
        Self { kind: FactorKind::Permutation, entries }
    }

    fn block_diagonal(upper: [[i8; 4]; 4], lower: [[i8; 4]; 4]) -> Self {
        let mut entries = [[0i8; N]; N];
        for i in 0..4 {
            for j in 0..4 {
                entries[i][j] = upper[i][j];
                entries[i + 4][j + 4] = lower[i][j];
            }
        }
        Self { kind: FactorKind::BlockDiagonalA2, entries }
    }

    fn butterfly() -> Self {
        let mut entries = [[0i8; N]; N];
        for k in 0..4 {
            entries[k][k] = 1;
            entries[k][7 - k] = 1;
            entries[4 + k][3 - k] = 1;
            entries[4 + k][4 + k] = -1;
        }
        Self { kind: FactorKind::ButterflyA1, entries }
    }

    /// For permutation factors, the source column of each output row.
    pub fn permutation_map(&self) -> Option<[usize; N]> {
        if self.kind != FactorKind::Permutation {
            return None;
        }
        let mut map = [0usize; N];
        for (i, row) in self.entries.iter().enumerate() {
            map[i] = row.iter().position(|&v| v == 1)?;
        }
        Some(map)
    }

    /// Additions of a signed sum per row: `nonzeros - 1`; sign flips are free
    /// and permutations cost nothing.
    pub fn additions(&self) -> usize {
        if self.kind == FactorKind::Permutation {
            return 0;
        }
        self.entries
            .iter()
            .map(|row| row.iter().filter(|&&v| v != 0).count().saturating_sub(1))
            .sum()
    }

    /// Each output is built from its nonzero taps with `+`, `-` and a leading
    /// negation, never a multiplication.
    fn apply<T>(&self, x: &[T; N]) -> [T; N]
    where
        T: Copy + Default + Add<Output = T> + Sub<Output = T> + Neg<Output = T>,
    {
        let mut out = [T::default(); N];
        for (o, row) in out.iter_mut().zip(&self.entries) {
            let mut acc: Option<T> = None;
            for (&tap, &v) in row.iter().zip(x) {
                acc = match (tap, acc) {
                    (0, a) => a,
                    (1, None) => Some(v),
                    (_, None) => Some(-v),
                    (1, Some(a)) => Some(a + v),
                    (_, Some(a)) => Some(a - v),
                };
            }
            *o = acc.unwrap_or_default();
        }
        out
    }
}

/// Factor list of one catalog matrix, applied right to left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorizedTransform {
    id: CatalogId,
    /// In matrix-product order: `factors[0] * factors[1] * ... * factors[last]`.
    factors: Vec<SparseFactor>,
    addition_count: usize,
}

const B2: [[i8; 4]; 4] = [[-1, -1, 0, 1], [-1, 1, -1, 0], [1, 0, -1, 1], [0, 1, 1, 1]];
const B21: [[i8; 4]; 4] = [[1, 1, 0, -1], [1, -1, 1, 0], [1, 0, -1, 1], [0, 1, 1, 1]];
const B22: [[i8; 4]; 4] = [[1, 1, 0, -1], [1, -1, -1, 1], [0, -1, 1, 0], [0, 1, 1, 1]];
const B23_OUTER: [[i8; 4]; 4] = [[1, 1, 1, 0], [1, -1, -1, 0], [0, -1, 1, 0], [0, 1, 0, 1]];
const B23_INNER: [[i8; 4]; 4] = [[1, 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 0], [1, 0, 0, -1]];
const B24_OUTER: [[i8; 4]; 4] = [[1, 1, 0, 0], [1, -1, 0, 0], [0, 0, -1, 0], [0, 0, 0, 1]];
const B24_INNER: [[i8; 4]; 4] = [[1, 0, 0, 1], [0, 1, 1, 0], [0, 1, -1, 0], [1, 0, 0, -1]];
const I4: [[i8; 4]; 4] = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]];

// source column of each output row
const P1: [usize; N] = [3, 7, 0, 4, 2, 6, 1, 5];
const P2: [usize; N] = [3, 7, 0, 4, 1, 6, 2, 5];
const P34: [usize; N] = [0, 7, 3, 4, 1, 6, 2, 5];

/// The hard-coded factorization of a catalog matrix.
pub fn factorization(id: CatalogId) -> FactorizedTransform {
    let mut factors = match id {
        CatalogId::T1 => vec![SparseFactor::permutation(P1), SparseFactor::block_diagonal(B21, B2)],
        CatalogId::T2 => vec![SparseFactor::permutation(P2), SparseFactor::block_diagonal(B22, B2)],
        CatalogId::T3 => vec![
            SparseFactor::permutation(P34),
            SparseFactor::block_diagonal(B23_OUTER, B2),
            SparseFactor::block_diagonal(B23_INNER, I4),
        ],
        CatalogId::T4 => vec![
            SparseFactor::permutation(P34),
            SparseFactor::block_diagonal(B24_OUTER, B2),
            SparseFactor::block_diagonal(B24_INNER, I4),
        ],
    };
    factors.push(SparseFactor::butterfly());
    FactorizedTransform::new(id, factors)
}

impl FactorizedTransform {
    /// Builds from an explicit factor list; the addition count is derived
    /// from the factors.
    pub fn new(id: CatalogId, factors: Vec<SparseFactor>) -> Self {
        let addition_count = factors.iter().map(SparseFactor::additions).sum();
        Self { id, factors, addition_count }
    }

    pub fn id(&self) -> CatalogId {
        self.id
    }

    pub fn factors(&self) -> &[SparseFactor] {
        &self.factors
    }

    pub fn addition_count(&self) -> usize {
        self.addition_count
    }

    /// Exact integer product of the factors.
    pub fn product(&self) -> [[i64; N]; N] {
        let mut acc = [[0i64; N]; N];
        for (i, row) in acc.iter_mut().enumerate() {
            row[i] = 1;
        }
        for f in &self.factors {
            acc = std::array::from_fn(|i| {
                std::array::from_fn(|j| (0..N).map(|k| acc[i][k] * f.entries[k][j] as i64).sum())
            });
        }
        acc
    }

    /// Whether the factor product equals `core` entry for entry.
    pub fn reproduces(&self, core: &IntegerTransform) -> bool {
        core.n() == N && self.product().iter().enumerate().all(|(i, row)| {
            row.iter().enumerate().all(|(j, &v)| v == core.get(i, j) as i64)
        })
    }

    /// `T * x` through the factor chain.
    pub fn apply_forward<T>(&self, x: &[T]) -> Result<Vec<T>>
    where
        T: Copy + Default + Add<Output = T> + Sub<Output = T> + Neg<Output = T>,
    {
        let mut v: [T; N] = x.try_into().map_err(|_| RkltError::DimensionMismatch {
            expected: N.to_string(),
            got: x.len().to_string(),
        })?;
        for f in self.factors.iter().rev() {
            v = match f.permutation_map() {
                Some(map) => std::array::from_fn(|i| v[map[i]]),
                None => f.apply(&v),
            };
        }
        Ok(v.to_vec())
    }
}

/// Arithmetic cost of one 8-point transform.
#[derive(Debug, Clone, PartialEq)]
pub struct OperationCount {
    pub label: String,
    /// `None` for the exact KLT, which has no fast algorithm here.
    pub additions_fast: Option<usize>,
    pub additions_direct: usize,
    pub multiplications: usize,
}

impl OperationCount {
    /// `100 (direct - fast) / direct`.
    pub fn reduction_pct(&self) -> Option<f64> {
        self.additions_fast
            .map(|fast| 100.0 * (self.additions_direct as f64 - fast as f64) / self.additions_direct as f64)
    }
}

/// Costs of the four fast algorithms next to direct matrix multiplication.
/// A direct 8-point product needs `8 * 7 = 56` additions; the exact KLT
/// additionally needs 64 multiplications.
pub fn operation_counts() -> Vec<OperationCount> {
    let direct = N * (N - 1);
    let mut rows: Vec<OperationCount> = CatalogId::ALL
        .iter()
        .map(|&id| OperationCount {
            label: id.to_string(),
            additions_fast: Some(factorization(id).addition_count()),
            additions_direct: direct,
            multiplications: 0,
        })
        .collect();
    rows.push(OperationCount {
        label: "exactKLT".into(),
        additions_fast: None,
        additions_direct: direct,
        multiplications: N * N,
    });
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approximations::catalog_entry;

    #[test]
    fn butterfly_shape() {
        let a1 = SparseFactor::butterfly();
        assert_eq!(a1.entries[0], [1, 0, 0, 0, 0, 0, 0, 1]);
        assert_eq!(a1.entries[4], [0, 0, 0, 1, -1, 0, 0, 0]);
        assert_eq!(a1.entries[7], [1, 0, 0, 0, 0, 0, 0, -1]);
        assert_eq!(a1.additions(), 8);
    }

    #[test]
    fn permutations_have_one_entry_per_row_and_column() {
        for id in CatalogId::ALL {
            let f = factorization(id);
            let p = &f.factors()[0];
            assert_eq!(p.kind(), FactorKind::Permutation);
            for k in 0..N {
                assert_eq!(p.entries[k].iter().filter(|&&v| v != 0).count(), 1);
                assert_eq!((0..N).filter(|&r| p.entries[r][k] != 0).count(), 1);
            }
        }
    }

    #[test]
    fn factor_products_equal_catalog() {
        for id in CatalogId::ALL {
            let f = factorization(id);
            assert!(f.reproduces(catalog_entry(id).transform.core()), "{id}");
        }
    }

    #[test]
    fn addition_counts() {
        let got: Vec<usize> = CatalogId::ALL.iter().map(|&id| factorization(id).addition_count()).collect();
        assert_eq!(got, REFERENCE_ADDITIONS);
    }

    #[test]
    fn t4_on_constant_input() {
        let out = factorization(CatalogId::T4).apply_forward(&[1i64; 8]).unwrap();
        assert_eq!(out, vec![8, 0, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn t2_first_column() {
        let mut e0 = [0i64; 8];
        e0[0] = 1;
        let out = factorization(CatalogId::T2).apply_forward(&e0).unwrap();
        assert_eq!(out, vec![0, 1, 1, 1, 1, 1, 0, 0]);
    }

    #[test]
    fn wrong_length_is_rejected() {
        let err = factorization(CatalogId::T1).apply_forward(&[1.0; 7]).unwrap_err();
        assert!(matches!(err, RkltError::DimensionMismatch { .. }));
    }

    #[test]
    fn reductions() {
        let counts = operation_counts();
        assert_eq!(counts.len(), 5);
        assert_eq!(counts[4].multiplications, 64);
        assert_eq!(counts[4].additions_direct, 56);
        assert!((counts[3].reduction_pct().unwrap() - 60.714_285_714).abs() < 1e-6);
        assert!((counts[0].reduction_pct().unwrap() - 57.142_857_142).abs() < 1e-6);
    }
}
