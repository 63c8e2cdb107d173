//! Exact KLT of a first-order Markov (AR(1)) source.
//!
//! The autocorrelation of a unit-variance AR(1) process with correlation
//! coefficient `rho` is the Toeplitz matrix `R[i][j] = rho^|i-j|`. Its
//! eigenvectors form the KLT. Two independent routes are provided:
//!
//! * [`klt_matrix`] diagonalises `R` with a dense symmetric eigensolver and is
//!   the canonical construction;
//! * [`solve_eigenfrequencies`] finds the eigenfrequencies `omega_i` as roots
//!   of `tan(N w) = -(1 - rho^2) sin w / ((1 + rho^2) cos w - 2 rho)`, which
//!   give the eigenvalues in closed form and, through [`closed_form_klt`], the
//!   basis vectors themselves.

use std::f64::consts::PI;

use nalgebra::SymmetricEigen;

use crate::matrix::RealMatrix;
use crate::{Result, RkltError};

/// Samples per unit of blocklength used to bracket the eigenfrequencies.
const SCAN_DENSITY: usize = 64;
/// Bisection stops once the bracket is this narrow.
const BISECTION_WIDTH: f64 = 1e-14;
/// Entries smaller than this are skipped when fixing a row's sign.
const SIGN_EPS: f64 = 1e-12;

/// Blocklength and correlation coefficient of a first-order Markov source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovModel {
    n: usize,
    rho: f64,
}

impl MarkovModel {
    /// `n >= 2` and `0 < rho < 1`. The endpoints are excluded: `rho = 0`
    /// gives a degenerate (identity) covariance and `rho = 1` is the DCT limit.
    pub fn new(n: usize, rho: f64) -> Result<Self> {
        if n < 2 {
            return Err(RkltError::InvalidModel(format!("blocklength n={n} must be at least 2")));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(RkltError::InvalidModel(format!(
                "correlation coefficient rho={rho} must lie in the open interval (0,1)"
            )));
        }
        Ok(Self { n, rho })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `(1 - rho^2) / (1 + rho^2 - 2 rho cos w)`.
    pub fn eigenvalue_at(&self, omega: f64) -> f64 {
        let r = self.rho;
        (1.0 - r * r) / (1.0 + r * r - 2.0 * r * omega.cos())
    }

    /// Pole-free form of the eigenfrequency equation:
    /// `sin(Nw)((1+rho^2)cos w - 2 rho) + cos(Nw)(1-rho^2) sin w`.
    pub fn frequency_residual(&self, omega: f64) -> f64 {
        let r = self.rho;
        let n = self.n as f64;
        (n * omega).sin() * ((1.0 + r * r) * omega.cos() - 2.0 * r)
            + (n * omega).cos() * (1.0 - r * r) * omega.sin()
    }
}

/// Roots `omega_i` of the eigenfrequency equation in `(0, pi)`, ascending,
/// with the matching eigenvalues `lambda_i` (therefore descending).
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution {
    pub omegas: Vec<f64>,
    pub lambdas: Vec<f64>,
}

/// Toeplitz autocorrelation matrix `R[i][j] = rho^|i-j|`.
pub fn autocorrelation_matrix(model: &MarkovModel) -> RealMatrix {
    let n = model.n();
    RealMatrix::from_fn(n, n, |i, j| model.rho().powi(i.abs_diff(j) as i32))
}

/// Brackets the `n` interior roots by a uniform sign scan of the pole-free
/// residual and refines each by bisection.
///
/// The residual vanishes identically at `0` and `pi`, so those endpoints are
/// never reported. When `rho` is very close to one the smallest root can hide
/// inside the first scan cell; the scan is then repeated on a finer grid.
pub fn solve_eigenfrequencies(model: &MarkovModel) -> Result<EigenSolution> {
    let n = model.n();
    let mut samples = SCAN_DENSITY * n;
    let mut omegas = scan_roots(model, samples);
    // at most a few doublings are ever needed for rho < 1 - 1e-9
    while omegas.len() < n && samples < (1 << 24) {
        samples *= 4;
        omegas = scan_roots(model, samples);
    }
    if omegas.len() != n {
        return Err(RkltError::RootBracketingFailure {
            n,
            rho: model.rho(),
            found: omegas.len(),
            expected: n,
        });
    }
    let lambdas = omegas.iter().map(|&w| model.eigenvalue_at(w)).collect();
    Ok(EigenSolution { omegas, lambdas })
}

fn scan_roots(model: &MarkovModel, samples: usize) -> Vec<f64> {
    let f = |w: f64| model.frequency_residual(w);
    let step = PI / samples as f64;
    let mut roots = Vec::with_capacity(model.n());
    let mut a = step;
    let mut fa = f(a);
    for k in 2..samples {
        let b = k as f64 * step;
        let fb = f(b);
        if fa == 0.0 {
            roots.push(a);
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            roots.push(bisect(&f, a, b, fa));
        }
        a = b;
        fa = fb;
    }
    if fa == 0.0 {
        roots.push(a);
    }
    roots
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        if b - a <= BISECTION_WIDTH {
            break;
        }
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Exact KLT: rows are the unit-norm eigenvectors of the autocorrelation
/// matrix ordered by descending eigenvalue, each scaled so its first nonzero
/// entry is positive.
pub fn klt_matrix(model: &MarkovModel) -> Result<RealMatrix> {
    let n = model.n();
    let closed = solve_eigenfrequencies(model)?;
    let reference = closed_form_klt(model, &closed, FormulaIndexing::ColumnInFrequency);

    let eig = SymmetricEigen::new(autocorrelation_matrix(model));
    let vectors: Vec<Vec<f64>> = (0..n).map(|c| eig.eigenvectors.column(c).iter().copied().collect()).collect();
    // index of the closed-form row each eigenvector aligns with; only used to
    // order exactly repeated eigenvalues
    let omega_rank: Vec<usize> = vectors
        .iter()
        .map(|v| {
            (0..n)
                .max_by(|&a, &b| {
                    let da: f64 = v.iter().zip(reference.row(a).iter()).map(|(x, y)| x * y).sum::<f64>().abs();
                    let db: f64 = v.iter().zip(reference.row(b).iter()).map(|(x, y)| x * y).sum::<f64>().abs();
                    da.total_cmp(&db)
                })
                .unwrap_or(0)
        })
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    let scale = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    order.sort_by(|&a, &b| {
        let (la, lb) = (eig.eigenvalues[a], eig.eigenvalues[b]);
        if (la - lb).abs() <= 1e-12 * scale {
            omega_rank[a].cmp(&omega_rank[b])
        } else {
            lb.total_cmp(&la)
        }
    });

    let mut k = RealMatrix::zeros(n, n);
    for (row, &src) in order.iter().enumerate() {
        let v = &vectors[src];
        let sign = first_nonzero_sign(v);
        for (j, x) in v.iter().enumerate() {
            k[(row, j)] = sign * x;
        }
    }
    Ok(k)
}

fn first_nonzero_sign(v: &[f64]) -> f64 {
    v.iter()
        .find(|x| x.abs() > SIGN_EPS)
        .map(|x| if *x < 0.0 { -1.0 } else { 1.0 })
        .unwrap_or(1.0)
}

/// Placement of the row and column indices in the closed-form KLT entry
/// `sqrt(2/(N+lambda_i)) sin(omega_i (a - (N-1)/2) + (b+1) pi/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormulaIndexing {
    /// `a = i`, `b = j`, the form in which the formula is commonly quoted.
    /// It does not produce an orthogonal matrix and is kept for comparison.
    AsPrinted,
    /// `a = j`, `b = i`: the column index drives the sinusoid and the row
    /// index sets its phase. Orthonormal, matches the eigensolver rows.
    ColumnInFrequency,
}

/// KLT assembled from the eigenfrequencies, with the sign convention of
/// [`klt_matrix`] applied.
pub fn closed_form_klt(model: &MarkovModel, solution: &EigenSolution, indexing: FormulaIndexing) -> RealMatrix {
    let n = model.n();
    let half = (n as f64 - 1.0) / 2.0;
    let mut k = RealMatrix::from_fn(n, n, |i, j| {
        let (a, b) = match indexing {
            FormulaIndexing::AsPrinted => (i as f64, j as f64),
            FormulaIndexing::ColumnInFrequency => (j as f64, i as f64),
        };
        let norm = (2.0 / (n as f64 + solution.lambdas[i])).sqrt();
        norm * (solution.omegas[i] * (a - half) + (b + 1.0) * PI / 2.0).sin()
    });
    for i in 0..n {
        let row: Vec<f64> = k.row(i).iter().copied().collect();
        let sign = first_nonzero_sign(&row);
        k.row_mut(i).scale_mut(sign);
    }
    k
}

/// Orthonormal DCT-II: `c_k cos(pi (2j+1) k / 2n)` with `c_0 = sqrt(1/n)`,
/// `c_k = sqrt(2/n)` otherwise.
pub fn dct_matrix(n: usize) -> Result<RealMatrix> {
    if n < 2 {
        return Err(RkltError::InvalidModel(format!("blocklength n={n} must be at least 2")));
    }
    let nf = n as f64;
    Ok(RealMatrix::from_fn(n, n, |k, j| {
        let c = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
        c * (PI * (2.0 * j as f64 + 1.0) * k as f64 / (2.0 * nf)).cos()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{max_abs, max_abs_off_diagonal};

    fn model(n: usize, rho: f64) -> MarkovModel {
        MarkovModel::new(n, rho).unwrap()
    }

    #[test]
    fn model_rejects_degenerate_parameters() {
        assert!(MarkovModel::new(1, 0.5).is_err());
        assert!(MarkovModel::new(8, 0.0).is_err());
        assert!(MarkovModel::new(8, 1.0).is_err());
        assert!(MarkovModel::new(8, -0.2).is_err());
        assert!(MarkovModel::new(8, f64::NAN).is_err());
        assert!(MarkovModel::new(2, 1e-9).is_ok());
    }

    #[test]
    fn autocorrelation_two_point() {
        let r = autocorrelation_matrix(&model(2, 0.5));
        assert_eq!(r, RealMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]));
        let r8 = autocorrelation_matrix(&model(8, 0.7));
        assert_eq!(r8.trace(), 8.0);
        assert_eq!(r8, r8.transpose());
    }

    /// Independent oracle: a dense fine-grid scan of the `tan` form itself,
    /// skipping pole crossings, refined by plain bisection.
    fn tan_form_roots(m: &MarkovModel) -> Vec<f64> {
        let (n, r) = (m.n() as f64, m.rho());
        let h = |w: f64| (n * w).tan() + (1.0 - r * r) * w.sin() / ((1.0 + r * r) * w.cos() - 2.0 * r);
        let grid = 20_000;
        let mut out = Vec::new();
        for k in 1..grid - 1 {
            let a = PI * k as f64 / grid as f64;
            let b = PI * (k + 1) as f64 / grid as f64;
            let (fa, fb) = (h(a), h(b));
            // a genuine root has small values on both sides; a pole flips sign through infinity
            if fa.signum() != fb.signum() && fa.abs() < 50.0 && fb.abs() < 50.0 {
                let (mut lo, mut hi, flo) = (a, b, fa);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if h(mid).signum() == flo.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                out.push(0.5 * (lo + hi));
            }
        }
        out
    }

    #[test]
    fn eigenfrequencies_satisfy_tan_equation() {
        let m = model(8, 0.5);
        let sol = solve_eigenfrequencies(&m).unwrap();
        assert_eq!(sol.omegas.len(), 8);
        for &w in &sol.omegas {
            assert!(m.frequency_residual(w).abs() <= 1e-12, "residual at {w}");
            let lhs = (8.0 * w).tan();
            let rhs = -(1.0 - 0.25) * w.sin() / ((1.0 + 0.25) * w.cos() - 1.0);
            assert!((lhs - rhs).abs() <= 1e-10, "tan form mismatch at {w}: {lhs} vs {rhs}");
        }
        let oracle = tan_form_roots(&m);
        assert_eq!(oracle.len(), 8);
        for (a, b) in sol.omegas.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9, "{a} vs oracle {b}");
        }
    }

    #[test]
    fn eigenfrequencies_are_interior_and_increasing() {
        for &n in &[2, 4, 8, 16] {
            for k in 1..10 {
                let m = model(n, k as f64 / 10.0);
                let sol = solve_eigenfrequencies(&m).unwrap();
                assert_eq!(sol.omegas.len(), n);
                assert!(sol.omegas.windows(2).all(|w| w[0] < w[1]));
                assert!(sol.omegas.iter().all(|&w| w > 0.0 && w < PI));
                assert!(sol.lambdas.windows(2).all(|w| w[0] >= w[1]));
                let trace: f64 = sol.lambdas.iter().sum();
                assert!((trace - n as f64).abs() <= 1e-10, "trace {trace} for n={n}");
            }
        }
    }

    #[test]
    fn near_unit_correlation_still_finds_all_roots() {
        for &rho in &[0.999, 0.99999, 1.0 - 1e-7] {
            let sol = solve_eigenfrequencies(&model(8, rho)).unwrap();
            assert_eq!(sol.omegas.len(), 8);
            assert!(sol.omegas[0] > 0.0);
        }
    }

    #[test]
    fn formula_eigenvalues_match_dense_eigensolver() {
        let m = model(8, 0.3);
        let sol = solve_eigenfrequencies(&m).unwrap();
        let mut dense: Vec<f64> = SymmetricEigen::new(autocorrelation_matrix(&m)).eigenvalues.iter().copied().collect();
        dense.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in sol.lambdas.iter().zip(&dense) {
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn klt_is_orthonormal_and_diagonalises() {
        for &rho in &[0.1, 0.3, 0.5, 0.8, 0.95] {
            let m = model(8, rho);
            let k = klt_matrix(&m).unwrap();
            let gram = &k * k.transpose();
            assert!(max_abs(&(gram - RealMatrix::identity(8, 8))) <= 1e-10);
            let d = &k * autocorrelation_matrix(&m) * k.transpose();
            assert!(max_abs_off_diagonal(&d) <= 1e-8);
            assert!((0..7).all(|i| d[(i, i)] >= d[(i + 1, i + 1)]));
            for i in 0..8 {
                let first = k.row(i).iter().copied().find(|x| x.abs() > SIGN_EPS).unwrap();
                assert!(first > 0.0);
            }
        }
    }

    #[test]
    fn corrected_closed_form_reproduces_eigensolver() {
        for &rho in &[0.2, 0.6, 0.9] {
            let m = model(8, rho);
            let sol = solve_eigenfrequencies(&m).unwrap();
            let k = klt_matrix(&m).unwrap();
            let closed = closed_form_klt(&m, &sol, FormulaIndexing::ColumnInFrequency);
            assert!(max_abs(&(closed - &k)) <= 1e-9);
        }
    }

    #[test]
    fn printed_index_placement_is_not_orthogonal() {
        let m = model(8, 0.5);
        let sol = solve_eigenfrequencies(&m).unwrap();
        let printed = closed_form_klt(&m, &sol, FormulaIndexing::AsPrinted);
        let gram = &printed * printed.transpose();
        assert!(max_abs(&(gram - RealMatrix::identity(8, 8))) > 0.1);
    }

    #[test]
    fn dct_two_point_and_orthonormality() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let d2 = dct_matrix(2).unwrap();
        assert!(max_abs(&(d2 - RealMatrix::from_row_slice(2, 2, &[s, s, s, -s]))) < 1e-15);
        let d8 = dct_matrix(8).unwrap();
        assert!(max_abs(&(&d8 * d8.transpose() - RealMatrix::identity(8, 8))) <= 1e-12);
        assert!(d8.row(0).iter().all(|&v| (v - 8f64.sqrt().recip()).abs() < 1e-15));
        assert!(dct_matrix(1).is_err());
    }

    #[test]
    fn klt_tends_to_dct() {
        let k = klt_matrix(&model(8, 0.999)).unwrap();
        let mut d = dct_matrix(8).unwrap();
        for i in 0..8 {
            let row: Vec<f64> = d.row(i).iter().copied().collect();
            let s = first_nonzero_sign(&row);
            d.row_mut(i).scale_mut(s);
        }
        assert!(max_abs(&(k - d)) <= 0.05);
    }
}
