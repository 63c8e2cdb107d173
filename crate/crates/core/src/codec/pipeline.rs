use rayon::prelude::*;
use serde::Serialize;

use super::block::{transform_block_2d, zigzag_retain, Block, BlockTransform, Direction};
use super::image::GrayImage;
use super::quality::{image_mse, image_mssim_with, image_psnr, MssimParams};
use crate::{Result, RkltError};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CompressOptions {
    pub mssim: MssimParams,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompressionReport {
    pub transform_id: String,
    pub r: usize,
    pub mse: f64,
    pub psnr_db: f64,
    pub mssim: f64,
    /// Share of discarded coefficients, `100 (64 - r) / 64`.
    pub compression_rate_pct: f64,
}

/// Compresses and reconstructs `img`, keeping `r` coefficients per block.
pub fn compress_image(img: &GrayImage, t: &BlockTransform, r: usize) -> Result<(GrayImage, CompressionReport)> {
    compress_image_with(img, t, r, &CompressOptions::default())
}

/// Images whose sides are not multiples of 8 are edge-padded for coding; the
/// reconstruction and the report cover the original region only.
pub fn compress_image_with(
    img: &GrayImage,
    t: &BlockTransform,
    r: usize,
    opts: &CompressOptions,
) -> Result<(GrayImage, CompressionReport)> {
    if !(1..=64).contains(&r) {
        return Err(RkltError::RetainOutOfRange(r));
    }
    let padded = img.padded_to(8);
    let (w, h) = (padded.width(), padded.height());
    let mut out = vec![0u8; w * h];
    for by in (0..h).step_by(8) {
        for bx in (0..w).step_by(8) {
            let a = Block::from_fn(|i, j| padded.get(bx + j, by + i) as f64);
            let spectrum = zigzag_retain(&transform_block_2d(t, &a, Direction::Forward), r)?;
            let rec = transform_block_2d(t, &spectrum, Direction::Inverse);
            for i in 0..8 {
                for j in 0..8 {
                    out[(by + i) * w + bx + j] = (rec[(i, j)] + 0.5).floor().clamp(0.0, 255.0) as u8;
                }
            }
        }
    }
    let rec = GrayImage::new(w, h, out)?.cropped(img.width(), img.height());
    let report = CompressionReport {
        transform_id: t.label().to_string(),
        r,
        mse: image_mse(img, &rec)?,
        psnr_db: image_psnr(img, &rec)?,
        mssim: image_mssim_with(img, &rec, &opts.mssim)?,
        compression_rate_pct: 100.0 * (64 - r) as f64 / 64.0,
    };
    Ok((rec, report))
}

/// Corpus averages for one transform at one `r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub transform_id: String,
    pub r: usize,
    pub mean_mse: f64,
    pub mean_psnr_db: f64,
    pub mean_mssim: f64,
}

/// Average MSE, PSNR and MSSIM over `corpus` for every transform and `r`.
/// Rows come out transform-major in the order given; the result does not
/// depend on the thread count.
pub fn rate_quality_sweep(
    corpus: &[GrayImage],
    transforms: &[BlockTransform],
    r_values: &[usize],
    opts: &CompressOptions,
) -> Result<Vec<SweepRow>> {
    if corpus.is_empty() {
        return Err(RkltError::InvalidArgument("empty image corpus".into()));
    }
    if let Some(&r) = r_values.iter().find(|r| !(1..=64).contains(*r)) {
        return Err(RkltError::RetainOutOfRange(r));
    }
    let jobs: Vec<(usize, usize, usize)> = (0..transforms.len())
        .flat_map(|t| r_values.iter().flat_map(move |&r| (0..corpus.len()).map(move |i| (t, r, i))))
        .collect();
    let reports: Vec<CompressionReport> = jobs
        .par_iter()
        .map(|&(t, r, i)| compress_image_with(&corpus[i], &transforms[t], r, opts).map(|(_, rep)| rep))
        .collect::<Result<_>>()?;

    let n = corpus.len() as f64;
    Ok(reports
        .chunks(corpus.len())
        .map(|group| SweepRow {
            transform_id: group[0].transform_id.clone(),
            r: group[0].r,
            mean_mse: group.iter().map(|g| g.mse).sum::<f64>() / n,
            mean_psnr_db: group.iter().map(|g| g.psnr_db).sum::<f64>() / n,
            mean_mssim: group.iter().map(|g| g.mssim).sum::<f64>() / n,
        })
        .collect())
}
