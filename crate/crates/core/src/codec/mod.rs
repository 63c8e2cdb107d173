//! JPEG-like 8×8 block compression: forward 2D transform, keep the first `r`
//! coefficients in zig-zag order, inverse transform, round and clamp.
//! Quality is reported as MSE, PSNR and MSSIM against the original.

mod block;
mod image;
mod pipeline;
mod quality;
pub mod synthetic;

pub use self::block::{
    absorbed_quantization, explicit_quantization, scaling_outer_product, transform_block_2d, transform_block_2d_via,
    zigzag_retain, Block, BlockTransform, Direction, QuantizedBlock, Route, TwoDimensionalForm, JPEG_LUMINANCE_Q,
    ZIGZAG,
};
pub use self::image::GrayImage;
pub use self::pipeline::{compress_image, compress_image_with, rate_quality_sweep, CompressOptions, CompressionReport, SweepRow};
pub use self::quality::{image_mse, image_mssim, image_mssim_with, image_psnr, MssimParams, MssimWindow};
