use nalgebra::SMatrix;

use crate::approximations::{catalog_entry, CatalogId, ScaledTransform};
use crate::fast_algorithms::{factorization, FactorizedTransform};
use crate::matrix::{invert, RealMatrix};
use crate::transform::TransformName;
use crate::{Result, RkltError};

const B: usize = 8;

pub type Block = SMatrix<f64, B, B>;

/// Integer coefficients of one quantized block, row-major.
pub type QuantizedBlock = [[i64; B]; B];

/// Luminance quantization table from the JPEG baseline (quality 50).
pub const JPEG_LUMINANCE_Q: [[u16; B]; B] = [
    [16, 11, 10, 16, 24, 40, 51, 61],
    [12, 12, 14, 19, 26, 58, 60, 55],
    [14, 13, 16, 24, 40, 57, 69, 56],
    [14, 17, 22, 29, 51, 87, 80, 62],
    [18, 22, 37, 56, 68, 109, 103, 77],
    [24, 35, 55, 64, 81, 104, 113, 92],
    [49, 64, 78, 87, 103, 121, 120, 101],
    [72, 92, 95, 98, 112, 100, 103, 99],
];

/// `(row, col)` positions of an 8×8 block in JPEG zig-zag scan order.
pub const ZIGZAG: [(usize, usize); B * B] = zigzag_order();

const fn zigzag_order() -> [(usize, usize); B * B] {
    let mut out = [(0, 0); B * B];
    let mut k = 0;
    let mut s = 0;
    while s < 2 * B - 1 {
        let lo = if s >= B { s - (B - 1) } else { 0 };
        let hi = if s < B { s } else { B - 1 };
        if s % 2 == 0 {
            // up and to the right: row decreasing
            let mut row = hi;
            loop {
                out[k] = (row, s - row);
                k += 1;
                if row == lo {
                    break;
                }
                row -= 1;
            }
        } else {
            let mut row = lo;
            while row <= hi {
                out[k] = (row, s - row);
                k += 1;
                row += 1;
            }
        }
        s += 1;
    }
    out
}

/// Keeps the first `r` coefficients in zig-zag order and zeroes the rest.
pub fn zigzag_retain(spectrum: &Block, r: usize) -> Result<Block> {
    if !(1..=B * B).contains(&r) {
        return Err(RkltError::RetainOutOfRange(r));
    }
    let mut out = Block::zeros();
    for &(i, j) in &ZIGZAG[..r] {
        out[(i, j)] = spectrum[(i, j)];
    }
    Ok(out)
}

/// How a 1D transform `M` is lifted to an 8×8 block.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TwoDimensionalForm {
    /// `M A M^T` forward, `M^-1 B M^-T` inverse.
    #[default]
    Separable,
    /// `M A M^-1` forward, `M^-1 B M` inverse. Equals the separable form for
    /// orthonormal `M`.
    Similarity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Evaluation route for a block transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Dense 8×8 matrix products.
    Dense,
    /// Factored additions-only integer core followed by the scaling
    /// diagonal. Forward separable transforms of catalog matrices only.
    Fast,
}

#[derive(Debug, Clone)]
struct FastPath {
    factors: FactorizedTransform,
    scaling: [f64; B],
}

/// An 8-point transform ready for block coding.
#[derive(Debug, Clone)]
pub struct BlockTransform {
    label: String,
    forward: Block,
    inverse: Block,
    form: TwoDimensionalForm,
    fast: Option<FastPath>,
}

fn to_block(m: &RealMatrix) -> Result<Block> {
    if m.shape() != (B, B) {
        return Err(RkltError::DimensionMismatch {
            expected: "8x8".into(),
            got: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    Ok(Block::from_fn(|i, j| m[(i, j)]))
}

impl BlockTransform {
    /// Any invertible 8×8 matrix; the inverse is computed by LU.
    pub fn from_matrix(label: impl Into<String>, m: &RealMatrix) -> Result<Self> {
        let inverse = to_block(&invert(m)?)?;
        Ok(Self { label: label.into(), forward: to_block(m)?, inverse, form: TwoDimensionalForm::default(), fast: None })
    }

    pub fn from_scaled(label: impl Into<String>, t: &ScaledTransform) -> Result<Self> {
        Ok(Self {
            label: label.into(),
            forward: to_block(&t.matrix())?,
            inverse: to_block(&t.inverse()?)?,
            form: TwoDimensionalForm::default(),
            fast: None,
        })
    }

    /// Catalog matrix with its fast algorithm attached.
    pub fn catalog(id: CatalogId) -> Self {
        let entry = catalog_entry(id);
        let mut t = Self::from_scaled(id.to_string(), &entry.transform).expect("catalog matrices are 8x8 and invertible");
        let mut scaling = [0.0; B];
        scaling.copy_from_slice(entry.transform.scaling().values());
        t.fast = Some(FastPath { factors: factorization(id), scaling });
        t
    }

    /// `eval_rho` resolves a bare `K`.
    pub fn from_name(name: &TransformName, eval_rho: Option<f64>) -> Result<Self> {
        match name {
            TransformName::Catalog(id) => Ok(Self::catalog(*id)),
            TransformName::Klt(rho) => {
                let label = rho.or(eval_rho).map(|r| name.label_at(r)).unwrap_or_else(|| name.to_string());
                Self::from_matrix(label, &name.matrix(eval_rho)?)
            }
            TransformName::Dct => Self::from_matrix("DCT", &name.matrix(None)?),
        }
    }

    pub fn with_form(mut self, form: TwoDimensionalForm) -> Self {
        self.form = form;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn forward(&self) -> &Block {
        &self.forward
    }

    pub fn inverse(&self) -> &Block {
        &self.inverse
    }

    pub fn form(&self) -> TwoDimensionalForm {
        self.form
    }

    fn fast_applies(&self, direction: Direction) -> bool {
        self.fast.is_some() && direction == Direction::Forward && self.form == TwoDimensionalForm::Separable
    }

    pub fn has_fast_path(&self) -> bool {
        self.fast_applies(Direction::Forward)
    }
}

/// 2D transform of one block, using the fast route when one applies.
pub fn transform_block_2d(t: &BlockTransform, block: &Block, direction: Direction) -> Block {
    if t.fast_applies(direction) {
        fast_forward(t.fast.as_ref().expect("checked above"), block)
    } else {
        dense(t, block, direction)
    }
}

/// 2D transform along an explicit route. Requesting [`Route::Fast`] where no
/// fast algorithm applies is an error.
pub fn transform_block_2d_via(t: &BlockTransform, block: &Block, direction: Direction, route: Route) -> Result<Block> {
    match route {
        Route::Dense => Ok(dense(t, block, direction)),
        Route::Fast if t.fast_applies(direction) => Ok(fast_forward(t.fast.as_ref().expect("checked above"), block)),
        Route::Fast => Err(RkltError::InvalidArgument(format!(
            "no fast route for {} in the {direction:?} direction with the {:?} form",
            t.label, t.form
        ))),
    }
}

fn dense(t: &BlockTransform, block: &Block, direction: Direction) -> Block {
    let (m, mi) = (&t.forward, &t.inverse);
    match (t.form, direction) {
        (TwoDimensionalForm::Separable, Direction::Forward) => m * block * m.transpose(),
        (TwoDimensionalForm::Separable, Direction::Inverse) => mi * block * mi.transpose(),
        (TwoDimensionalForm::Similarity, Direction::Forward) => m * block * mi,
        (TwoDimensionalForm::Similarity, Direction::Inverse) => mi * block * m,
    }
}

/// `S (T A T^T) S` with `T` applied through its factors: first to every
/// column of `A`, then to every row of the result.
fn fast_forward(fast: &FastPath, block: &Block) -> Block {
    let apply = |v: [f64; B]| -> [f64; B] {
        let out = fast.factors.apply_forward(&v).expect("length is 8");
        std::array::from_fn(|i| out[i])
    };
    let mut cols = Block::zeros();
    for j in 0..B {
        let out = apply(std::array::from_fn(|i| block[(i, j)]));
        for i in 0..B {
            cols[(i, j)] = out[i];
        }
    }
    let s = &fast.scaling;
    let mut out = Block::zeros();
    for i in 0..B {
        let row = apply(std::array::from_fn(|j| cols[(i, j)]));
        for j in 0..B {
            out[(i, j)] = s[i] * s[j] * row[j];
        }
    }
    out
}

/// The matrix `R` with `T_hat A T_hat^{±T} = R ⊙ (integer-core output)`:
/// `u u^T` whenever the right factor is a transpose of the scaled matrix,
/// `u v^T` with `v = 1/u` for the similarity form of a non-orthogonal core.
pub fn scaling_outer_product(t: &ScaledTransform, form: TwoDimensionalForm) -> Result<Block> {
    check_eight(t)?;
    let u = t.scaling().values();
    let similarity = form == TwoDimensionalForm::Similarity && !t.orthogonal_core();
    Ok(Block::from_fn(|i, j| if similarity { u[i] / u[j] } else { u[i] * u[j] }))
}

fn check_eight(t: &ScaledTransform) -> Result<()> {
    if t.n() != B {
        return Err(RkltError::DimensionMismatch { expected: "8".into(), got: t.n().to_string() });
    }
    Ok(())
}

/// Output of the unscaled integer core: `T A T^T`, or `T A T^-1` for the
/// similarity form of a non-orthogonal core.
fn integer_core_output(block: &Block, t: &ScaledTransform, form: TwoDimensionalForm) -> Result<Block> {
    check_eight(t)?;
    let core = to_block(&t.core().to_real())?;
    if form == TwoDimensionalForm::Similarity && !t.orthogonal_core() {
        let inv = to_block(&invert(&t.core().to_real())?)?;
        Ok(core * block * inv)
    } else {
        Ok(core * block * core.transpose())
    }
}

fn check_q(q: &[[u16; B]; B]) -> Result<()> {
    if q.iter().flatten().any(|&v| v == 0) {
        return Err(RkltError::InvalidArgument("quantization table entries must be positive".into()));
    }
    Ok(())
}

fn round_half_up(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

/// `round((R ⊙ B_hat) ÷ Q)`: scale the integer-core output, then quantize.
pub fn explicit_quantization(
    block: &Block,
    t: &ScaledTransform,
    q: &[[u16; B]; B],
    form: TwoDimensionalForm,
) -> Result<QuantizedBlock> {
    check_q(q)?;
    let r = scaling_outer_product(t, form)?;
    let b = integer_core_output(block, t, form)?;
    Ok(std::array::from_fn(|i| std::array::from_fn(|j| round_half_up(r[(i, j)] * b[(i, j)] / q[i][j] as f64))))
}

/// Same quantity with the scaling folded into the table: `round(B_hat ÷ (Q ÷ R))`.
pub fn absorbed_quantization(
    block: &Block,
    t: &ScaledTransform,
    q: &[[u16; B]; B],
    form: TwoDimensionalForm,
) -> Result<QuantizedBlock> {
    check_q(q)?;
    let r = scaling_outer_product(t, form)?;
    let absorbed = Block::from_fn(|i, j| q[i][j] as f64 / r[(i, j)]);
    let b = integer_core_output(block, t, form)?;
    Ok(std::array::from_fn(|i| std::array::from_fn(|j| round_half_up(b[(i, j)] / absorbed[(i, j)]))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approximations::catalog_entry;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_block(rng: &mut ChaCha8Rng) -> Block {
        Block::from_fn(|_, _| rng.random_range(-128.0..128.0))
    }

    #[test]
    fn zigzag_matches_jpeg_natural_order() {
        // row-major index of the k-th zig-zag coefficient
        const NATURAL: [usize; 64] = [
            0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5, 12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6, 7,
            14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51, 58, 59, 52, 45, 38, 31, 39, 46,
            53, 60, 61, 54, 47, 55, 62, 63,
        ];
        for (k, &(i, j)) in ZIGZAG.iter().enumerate() {
            assert_eq!(i * 8 + j, NATURAL[k], "position {k}");
        }
    }

    #[test]
    fn zigzag_retain_bounds() {
        let b = Block::from_element(1.0);
        assert!(matches!(zigzag_retain(&b, 0), Err(RkltError::RetainOutOfRange(0))));
        assert!(matches!(zigzag_retain(&b, 65), Err(RkltError::RetainOutOfRange(65))));
        assert_eq!(zigzag_retain(&b, 64).unwrap(), b);
        let one = zigzag_retain(&b, 1).unwrap();
        assert_eq!(one.sum(), 1.0);
        assert_eq!(one[(0, 0)], 1.0);
        let three = zigzag_retain(&b, 3).unwrap();
        assert_eq!((three[(0, 1)], three[(1, 0)], three[(1, 1)]), (1.0, 1.0, 0.0));
    }

    #[test]
    fn fast_and_dense_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for id in CatalogId::ALL {
            let t = BlockTransform::catalog(id);
            assert!(t.has_fast_path());
            for _ in 0..50 {
                let a = random_block(&mut rng);
                let fast = transform_block_2d_via(&t, &a, Direction::Forward, Route::Fast).unwrap();
                let slow = transform_block_2d_via(&t, &a, Direction::Forward, Route::Dense).unwrap();
                assert!((fast - slow).amax() <= 1e-12, "{id}");
            }
        }
    }

    #[test]
    fn fast_route_is_refused_where_it_does_not_apply() {
        let t = BlockTransform::catalog(CatalogId::T2);
        let a = Block::identity();
        assert!(transform_block_2d_via(&t, &a, Direction::Inverse, Route::Fast).is_err());
        let sim = t.clone().with_form(TwoDimensionalForm::Similarity);
        assert!(transform_block_2d_via(&sim, &a, Direction::Forward, Route::Fast).is_err());
        let dct = BlockTransform::from_name(&TransformName::Dct, None).unwrap();
        assert!(!dct.has_fast_path());
    }

    #[test]
    fn forward_then_inverse_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for form in [TwoDimensionalForm::Separable, TwoDimensionalForm::Similarity] {
            for id in CatalogId::ALL {
                let t = BlockTransform::catalog(id).with_form(form);
                let a = random_block(&mut rng);
                let back = transform_block_2d(&t, &transform_block_2d(&t, &a, Direction::Forward), Direction::Inverse);
                assert!((back - a).amax() <= 1e-10, "{id} {form:?}");
            }
        }
    }

    #[test]
    fn orthonormal_transforms_do_not_depend_on_form() {
        let a = random_block(&mut ChaCha8Rng::seed_from_u64(3));
        for t in [BlockTransform::catalog(CatalogId::T4), BlockTransform::from_name(&TransformName::Dct, None).unwrap()] {
            let sep = transform_block_2d_via(&t, &a, Direction::Forward, Route::Dense).unwrap();
            let sim = transform_block_2d(&t.clone().with_form(TwoDimensionalForm::Similarity), &a, Direction::Forward);
            assert!((sep - sim).amax() <= 1e-10);
        }
    }

    #[test]
    fn scaled_integer_core_equals_dense_transform() {
        let a = random_block(&mut ChaCha8Rng::seed_from_u64(5));
        for form in [TwoDimensionalForm::Separable, TwoDimensionalForm::Similarity] {
            for id in CatalogId::ALL {
                let st = &catalog_entry(id).transform;
                let r = scaling_outer_product(st, form).unwrap();
                let core = integer_core_output(&a, st, form).unwrap();
                let dense = transform_block_2d_via(&BlockTransform::catalog(id).with_form(form), &a, Direction::Forward, Route::Dense)
                    .unwrap();
                assert!((r.component_mul(&core) - dense).amax() <= 1e-9, "{id} {form:?}");
            }
        }
    }

    #[test]
    fn absorbed_quantization_matches_explicit() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for form in [TwoDimensionalForm::Separable, TwoDimensionalForm::Similarity] {
            for id in CatalogId::ALL {
                let st = &catalog_entry(id).transform;
                for _ in 0..100 {
                    let a = random_block(&mut rng);
                    assert_eq!(
                        explicit_quantization(&a, st, &JPEG_LUMINANCE_Q, form).unwrap(),
                        absorbed_quantization(&a, st, &JPEG_LUMINANCE_Q, form).unwrap(),
                        "{id} {form:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn quantization_rejects_zero_step() {
        let mut q = JPEG_LUMINANCE_Q;
        q[3][3] = 0;
        let st = &catalog_entry(CatalogId::T1).transform;
        assert!(absorbed_quantization(&Block::zeros(), st, &q, TwoDimensionalForm::Separable).is_err());
    }

    #[test]
    fn klt_needs_a_correlation() {
        assert!(BlockTransform::from_name(&TransformName::Klt(None), None).is_err());
        let k = BlockTransform::from_name(&TransformName::Klt(None), Some(0.8)).unwrap();
        assert_eq!(k.label(), "K0.8");
    }
}
