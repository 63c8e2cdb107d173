//! Rounded-KLT approximations.
//!
//! An approximation is a `{-1, 0, 1}` core `T = round(alpha * K)` paired with a
//! positive diagonal `S` such that `S * T` has unit-norm rows (and is
//! orthonormal whenever the rows of `T` are mutually orthogonal).

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::Serialize;

use crate::markov_klt::{klt_matrix, MarkovModel};
use crate::matrix::{invert, max_abs, RealMatrix};
use crate::{Result, RkltError};

/// Square matrix with entries in `{-1, 0, 1}` and no all-zero row.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntegerTransform {
    n: usize,
    entries: Vec<i8>,
}

impl IntegerTransform {
    /// Builds from row-major entries, validating the alphabet and rejecting
    /// all-zero rows (such a matrix is singular).
    pub fn new(n: usize, entries: Vec<i64>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(RkltError::DimensionMismatch {
                expected: format!("{} entries", n * n),
                got: format!("{} entries", entries.len()),
            });
        }
        for (idx, &v) in entries.iter().enumerate() {
            if !(-1..=1).contains(&v) {
                return Err(RkltError::EntryOutOfAlphabet { row: idx / n, col: idx % n, value: v });
            }
        }
        if let Some(row) = (0..n).find(|&i| entries[i * n..(i + 1) * n].iter().all(|&v| v == 0)) {
            return Err(RkltError::ZeroRow { row });
        }
        Ok(Self { n, entries: entries.into_iter().map(|v| v as i8).collect() })
    }

    pub fn from_rows<const N: usize>(rows: &[[i8; N]; N]) -> Result<Self> {
        Self::new(N, rows.iter().flatten().map(|&v| v as i64).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.entries[row * self.n + col]
    }

    pub fn row(&self, row: usize) -> &[i8] {
        &self.entries[row * self.n..(row + 1) * self.n]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    pub fn to_real(&self) -> RealMatrix {
        RealMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j) as f64)
    }

    /// `T * T^T` in exact integer arithmetic, row-major.
    pub fn gram(&self) -> Vec<i64> {
        let n = self.n;
        let mut g = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..n {
                g[i * n + j] = self.row(i).iter().zip(self.row(j)).map(|(&a, &b)| a as i64 * b as i64).sum();
            }
        }
        g
    }

    /// Exact test that every off-diagonal entry of `T * T^T` is zero.
    pub fn has_orthogonal_rows(&self) -> bool {
        let n = self.n;
        self.gram().iter().enumerate().all(|(idx, &v)| idx / n == idx % n || v == 0)
    }

    /// Dense product with a vector of the same length.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(RkltError::DimensionMismatch { expected: self.n.to_string(), got: x.len().to_string() });
        }
        Ok((0..self.n).map(|i| self.row(i).iter().zip(x).map(|(&t, &v)| t as f64 * v).sum()).collect())
    }
}

impl fmt::Display for IntegerTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v:>2}")).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

/// Diagonal of the scaling matrix `S`; every value in `(0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingDiagonal(Vec<f64>);

impl ScalingDiagonal {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0 && **v <= 1.0)) {
            return Err(RkltError::InvalidArgument(format!("scaling value {bad} is outside (0,1]")));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Which branch of the scaling rule to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingBranch {
    /// `S = sqrt((T T^T)^-1)`; only diagonal `T T^T` is supported.
    Orthogonal,
    /// `S = sqrt(diag(T T^T)^-1)`.
    RowNormalizing,
}

/// Computes `S` for the requested branch. Both branches reduce to element-wise
/// inverse square roots of the diagonal of `T T^T`; the orthogonal branch is
/// rejected when `T T^T` has off-diagonal mass.
pub fn scaling_for(core: &IntegerTransform, branch: ScalingBranch) -> Result<ScalingDiagonal> {
    if branch == ScalingBranch::Orthogonal && !core.has_orthogonal_rows() {
        return Err(RkltError::NotDiagonalizableHere);
    }
    let n = core.n();
    let gram = core.gram();
    ScalingDiagonal::new((0..n).map(|i| 1.0 / (gram[i * n + i] as f64).sqrt()).collect())
}

/// An approximation `T_hat = S * T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledTransform {
    core: IntegerTransform,
    scaling: ScalingDiagonal,
    orthogonal_core: bool,
}

impl ScaledTransform {
    /// Pairs a core with an explicit scaling. Rows of `S * T` must be unit
    /// norm to 1e-10.
    pub fn from_parts(core: IntegerTransform, scaling: ScalingDiagonal, orthogonal_core: bool) -> Result<Self> {
        if scaling.values().len() != core.n() {
            return Err(RkltError::DimensionMismatch {
                expected: core.n().to_string(),
                got: scaling.values().len().to_string(),
            });
        }
        let gram = core.gram();
        for (i, s) in scaling.values().iter().enumerate() {
            let norm2 = s * s * gram[i * core.n() + i] as f64;
            if (norm2 - 1.0).abs() > 1e-10 {
                return Err(RkltError::InvalidArgument(format!("row {i} of S*T has squared norm {norm2}")));
            }
        }
        Ok(Self { core, scaling, orthogonal_core })
    }

    pub fn core(&self) -> &IntegerTransform {
        &self.core
    }

    pub fn scaling(&self) -> &ScalingDiagonal {
        &self.scaling
    }

    /// Whether `T * T^T` is diagonal, i.e. `S * T` is orthonormal.
    pub fn orthogonal_core(&self) -> bool {
        self.orthogonal_core
    }

    pub fn n(&self) -> usize {
        self.core.n()
    }

    /// Dense `S * T`.
    pub fn matrix(&self) -> RealMatrix {
        let s = self.scaling.values();
        RealMatrix::from_fn(self.n(), self.n(), |i, j| s[i] * self.core.get(i, j) as f64)
    }

    /// `(S T)^T` for orthogonal cores, otherwise a dense LU inverse.
    pub fn inverse(&self) -> Result<RealMatrix> {
        let m = self.matrix();
        if self.orthogonal_core {
            Ok(m.transpose())
        } else {
            invert(&m)
        }
    }
}

/// `S` from the scaling rule, choosing the branch by the exact integer
/// orthogonality test on `T * T^T`.
pub fn orthogonalize(core: &IntegerTransform) -> ScaledTransform {
    let orthogonal_core = core.has_orthogonal_rows();
    let branch = if orthogonal_core { ScalingBranch::Orthogonal } else { ScalingBranch::RowNormalizing };
    // the core has no zero row, so every diagonal entry of T T^T is >= 1
    let scaling = scaling_for(core, branch).expect("nonzero rows give scaling values in (0,1]");
    ScaledTransform { core: core.clone(), scaling, orthogonal_core }
}

/// `round(x) = floor(x + 0.5)`, applied element-wise to `alpha * klt`.
pub fn round_scaled(klt: &RealMatrix, alpha: f64) -> Result<IntegerTransform> {
    round_scaled_at(klt, alpha, None)
}

fn round_scaled_at(klt: &RealMatrix, alpha: f64, rho: Option<f64>) -> Result<IntegerTransform> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(RkltError::InvalidArgument(format!("alpha={alpha} must be a non-negative real")));
    }
    if klt.nrows() != klt.ncols() {
        return Err(RkltError::DimensionMismatch {
            expected: "square matrix".into(),
            got: format!("{}x{}", klt.nrows(), klt.ncols()),
        });
    }
    let n = klt.nrows();
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let v = (alpha * klt[(i, j)] + 0.5).floor() as i64;
            if !(-1..=1).contains(&v) {
                return Err(RkltError::AlphaOutOfRange { alpha, rho, row: i, col: j, value: v });
            }
            entries.push(v);
        }
    }
    IntegerTransform::new(n, entries)
}

/// `3 / (2 gamma)` with `gamma` the largest absolute entry of `klt`.
///
/// Rounding keeps every entry in `{-1, 0, 1}` for `alpha` strictly below this
/// bound; at the bound itself an entry of magnitude `gamma` rounds to 2.
pub fn alpha_upper_bound(klt: &RealMatrix) -> f64 {
    1.5 / max_abs(klt)
}

/// A distinct matrix found by [`derive_catalog`].
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedMatrix {
    /// First swept ρ at which the matrix appeared.
    pub first_rho: f64,
    /// First swept ρ of the next distinct matrix, if any.
    pub next_rho: Option<f64>,
    pub core: IntegerTransform,
}

/// Sweeps `rho = step, 2 step, ...` while `rho < 1`, rounding `alpha * K(rho)`
/// and keeping each distinct matrix once, in order of first appearance.
pub fn derive_catalog(n: usize, alpha: f64, step: f64) -> Result<Vec<DerivedMatrix>> {
    if !(step > 0.0 && step < 1.0) {
        return Err(RkltError::InvalidArgument(format!("rho step {step} must lie in (0,1)")));
    }
    let mut found: Vec<DerivedMatrix> = Vec::new();
    let mut seen: HashSet<IntegerTransform> = HashSet::new();
    let mut previous: Option<IntegerTransform> = None;
    for k in 1.. {
        // k * step rather than repeated addition: no drift over 10^3 steps
        let rho = k as f64 * step;
        if rho >= 1.0 - 1e-12 {
            break;
        }
        let model = MarkovModel::new(n, rho)?;
        let t = round_scaled_at(&klt_matrix(&model)?, alpha, Some(rho))?;
        if previous.as_ref() != Some(&t) {
            if let Some(last) = found.last_mut() {
                if last.next_rho.is_none() {
                    last.next_rho = Some(rho);
                }
            }
            if seen.insert(t.clone()) {
                found.push(DerivedMatrix { first_rho: rho, next_rho: None, core: t.clone() });
            }
            previous = Some(t);
        }
    }
    Ok(found)
}

/// Identifier of a shipped 8-point approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CatalogId {
    T1,
    T2,
    T3,
    T4,
}

impl CatalogId {
    pub const ALL: [CatalogId; 4] = [CatalogId::T1, CatalogId::T2, CatalogId::T3, CatalogId::T4];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for CatalogId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}", self.index() + 1)
    }
}

impl FromStr for CatalogId {
    type Err = RkltError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "T1" => Ok(CatalogId::T1),
            "T2" => Ok(CatalogId::T2),
            "T3" => Ok(CatalogId::T3),
            "T4" => Ok(CatalogId::T4),
            _ => Err(RkltError::UnknownTransform(s.to_string())),
        }
    }
}

/// `[lower, upper)`, or `(lower, upper)` when `lower_open`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoInterval {
    pub lower: f64,
    pub upper: f64,
    pub lower_open: bool,
}

impl RhoInterval {
    pub fn contains(&self, rho: f64) -> bool {
        let above = if self.lower_open { rho > self.lower } else { rho >= self.lower };
        above && rho < self.upper
    }
}

impl fmt::Display for RhoInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lower_open { '(' } else { '[' };
        write!(f, "{open}{},{})", self.lower, self.upper)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub id: CatalogId,
    pub transform: ScaledTransform,
    pub rho_interval: RhoInterval,
}

const T1_ROWS: [[i8; 8]; 8] = [
    [0, 1, 1, 1, 1, 1, 1, 0],
    [1, 1, 1, 0, 0, -1, -1, -1],
    [1, 1, 0, -1, -1, 0, 1, 1],
    [1, 0, -1, -1, 1, 1, 0, -1],
    [1, 0, -1, 1, 1, -1, 0, 1],
    [1, -1, 0, 1, -1, 0, 1, -1],
    [1, -1, 1, 0, 0, 1, -1, 1],
    [0, -1, 1, -1, 1, -1, 1, 0],
];

const T2_ROWS: [[i8; 8]; 8] = [
    [0, 1, 1, 1, 1, 1, 1, 0],
    [1, 1, 1, 0, 0, -1, -1, -1],
    [1, 1, 0, -1, -1, 0, 1, 1],
    [1, 0, -1, -1, 1, 1, 0, -1],
    [1, -1, -1, 1, 1, -1, -1, 1],
    [1, -1, 0, 1, -1, 0, 1, -1],
    [0, -1, 1, 0, 0, 1, -1, 0],
    [0, -1, 1, -1, 1, -1, 1, 0],
];

const T3_ROWS: [[i8; 8]; 8] = [
    [1, 1, 1, 1, 1, 1, 1, 1],
    [1, 1, 1, 0, 0, -1, -1, -1],
    [1, 1, 0, -1, -1, 0, 1, 1],
    [1, 0, -1, -1, 1, 1, 0, -1],
    [1, -1, -1, 1, 1, -1, -1, 1],
    [1, -1, 0, 1, -1, 0, 1, -1],
    [0, -1, 1, 0, 0, 1, -1, 0],
    [0, -1, 1, -1, 1, -1, 1, 0],
];

const T4_ROWS: [[i8; 8]; 8] = [
    [1, 1, 1, 1, 1, 1, 1, 1],
    [1, 1, 1, 0, 0, -1, -1, -1],
    [1, 0, 0, -1, -1, 0, 0, 1],
    [1, 0, -1, -1, 1, 1, 0, -1],
    [1, -1, -1, 1, 1, -1, -1, 1],
    [1, -1, 0, 1, -1, 0, 1, -1],
    [0, -1, 1, 0, 0, 1, -1, 0],
    [0, -1, 1, -1, 1, -1, 1, 0],
];

/// Raw `{-1,0,1}` rows of a catalog matrix.
pub fn catalog_rows(id: CatalogId) -> &'static [[i8; 8]; 8] {
    match id {
        CatalogId::T1 => &T1_ROWS,
        CatalogId::T2 => &T2_ROWS,
        CatalogId::T3 => &T3_ROWS,
        CatalogId::T4 => &T4_ROWS,
    }
}

/// The four shipped 8-point approximations for `alpha = 2`, with their
/// scaling diagonals and the ρ ranges they are intended for.
pub fn builtin_catalog() -> &'static [CatalogEntry] {
    static CATALOG: OnceLock<Vec<CatalogEntry>> = OnceLock::new();
    CATALOG.get_or_init(|| {
        let a = 1.0 / 6f64.sqrt();
        let b = 1.0 / (2.0 * 2f64.sqrt());
        let c = 0.5;
        let table: [(CatalogId, [f64; 8], bool, RhoInterval); 4] = [
            (CatalogId::T1, [a; 8], true, RhoInterval { lower: 0.0, upper: 0.4, lower_open: true }),
            (CatalogId::T2, [a, a, a, a, b, a, c, a], false, RhoInterval { lower: 0.4, upper: 0.7, lower_open: false }),
            (CatalogId::T3, [b, a, a, a, b, a, c, a], false, RhoInterval { lower: 0.7, upper: 0.8, lower_open: false }),
            (CatalogId::T4, [b, a, c, a, b, a, c, a], true, RhoInterval { lower: 0.8, upper: 1.0, lower_open: false }),
        ];
        table
            .into_iter()
            .map(|(id, s, orthogonal, rho_interval)| {
                let core = IntegerTransform::from_rows(catalog_rows(id)).expect("catalog matrices are valid");
                let scaling = ScalingDiagonal::new(s.to_vec()).expect("catalog scaling is in (0,1]");
                let transform =
                    ScaledTransform::from_parts(core, scaling, orthogonal).expect("catalog rows are unit norm");
                CatalogEntry { id, transform, rho_interval }
            })
            .collect()
    })
}

pub fn catalog_entry(id: CatalogId) -> &'static CatalogEntry {
    &builtin_catalog()[id.index()]
}

/// Catalog entry whose ρ interval contains `rho`.
pub fn lookup(rho: f64) -> Option<&'static CatalogEntry> {
    builtin_catalog().iter().find(|e| e.rho_interval.contains(rho))
}
