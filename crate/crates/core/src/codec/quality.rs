use super::image::GrayImage;
use crate::{Result, RkltError};

fn check_same_size(a: &GrayImage, b: &GrayImage) -> Result<()> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(RkltError::DimensionMismatch {
            expected: format!("{}x{}", a.width(), a.height()),
            got: format!("{}x{}", b.width(), b.height()),
        });
    }
    Ok(())
}

/// Mean squared pixel difference.
pub fn image_mse(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    check_same_size(a, b)?;
    let sum: f64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    Ok(sum / a.pixels().len() as f64)
}

/// `10 log10(255^2 / MSE)`; infinite for identical images.
pub fn image_psnr(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    let mse = image_mse(a, b)?;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (255.0 * 255.0 / mse).log10())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MssimWindow {
    /// 11×11 Gaussian, standard deviation 1.5.
    Gaussian11,
    /// 8×8 box.
    Uniform8,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MssimParams {
    pub window: MssimWindow,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
}

impl Default for MssimParams {
    fn default() -> Self {
        Self { window: MssimWindow::Gaussian11, k1: 0.01, k2: 0.03, dynamic_range: 255.0 }
    }
}

impl MssimWindow {
    /// Normalized 1D taps; both windows are separable.
    fn taps(self) -> Vec<f64> {
        match self {
            MssimWindow::Gaussian11 => {
                let w: Vec<f64> = (-5..=5).map(|k: i32| (-((k * k) as f64) / (2.0 * 1.5 * 1.5)).exp()).collect();
                let total: f64 = w.iter().sum();
                w.into_iter().map(|v| v / total).collect()
            }
            MssimWindow::Uniform8 => vec![1.0 / 8.0; 8],
        }
    }
}

/// Valid-region separable filtering of a `w`×`h` plane.
fn filter_valid(plane: &[f64], w: usize, h: usize, taps: &[f64]) -> Vec<f64> {
    let k = taps.len();
    let (ow, oh) = (w - k + 1, h - k + 1);
    let mut horiz = vec![0.0; ow * h];
    for y in 0..h {
        let row = &plane[y * w..(y + 1) * w];
        for x in 0..ow {
            horiz[y * ow + x] = taps.iter().zip(&row[x..x + k]).map(|(t, v)| t * v).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = taps.iter().enumerate().map(|(i, t)| t * horiz[(y + i) * ow + x]).sum();
        }
    }
    out
}

/// Mean structural similarity with the default window and constants.
pub fn image_mssim(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    image_mssim_with(a, b, &MssimParams::default())
}

/// Mean SSIM over every valid window position (stride 1).
pub fn image_mssim_with(a: &GrayImage, b: &GrayImage, params: &MssimParams) -> Result<f64> {
    check_same_size(a, b)?;
    let taps = params.window.taps();
    let (w, h) = (a.width(), a.height());
    if w < taps.len() || h < taps.len() {
        return Err(RkltError::InvalidArgument(format!(
            "image {w}x{h} is smaller than the {}-pixel MSSIM window",
            taps.len()
        )));
    }
    let x: Vec<f64> = a.pixels().iter().map(|&v| v as f64).collect();
    let y: Vec<f64> = b.pixels().iter().map(|&v| v as f64).collect();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p * q).collect();

    let mu_x = filter_valid(&x, w, h, &taps);
    let mu_y = filter_valid(&y, w, h, &taps);
    let e_xx = filter_valid(&xx, w, h, &taps);
    let e_yy = filter_valid(&yy, w, h, &taps);
    let e_xy = filter_valid(&xy, w, h, &taps);

    let c1 = (params.k1 * params.dynamic_range).powi(2);
    let c2 = (params.k2 * params.dynamic_range).powi(2);
    let mut total = 0.0;
    for i in 0..mu_x.len() {
        let (mx, my) = (mu_x[i], mu_y[i]);
        let var_x = e_xx[i] - mx * mx;
        let var_y = e_yy[i] - my * my;
        let cov = e_xy[i] - mx * my;
        total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (var_x + var_y + c2));
    }
    Ok(total / mu_x.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize) -> GrayImage {
        GrayImage::from_fn(w, h, |x, y| ((x * 7 + y * 13) % 256) as u8).unwrap()
    }

    #[test]
    fn identical_images() {
        let a = ramp(40, 33);
        assert_eq!(image_mse(&a, &a).unwrap(), 0.0);
        assert_eq!(image_psnr(&a, &a).unwrap(), f64::INFINITY);
        assert_eq!(image_mssim(&a, &a).unwrap(), 1.0);
        let box8 = MssimParams { window: MssimWindow::Uniform8, ..MssimParams::default() };
        assert_eq!(image_mssim_with(&a, &a, &box8).unwrap(), 1.0);
    }

    #[test]
    fn psnr_of_uniform_error() {
        let a = GrayImage::from_fn(16, 16, |_, _| 100).unwrap();
        let b = GrayImage::from_fn(16, 16, |_, _| 110).unwrap();
        assert_eq!(image_mse(&a, &b).unwrap(), 100.0);
        let expected = 10.0 * (65025.0f64 / 100.0).log10();
        assert!((image_psnr(&a, &b).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn mssim_drops_with_distortion() {
        let a = ramp(48, 48);
        let noisy = GrayImage::from_fn(48, 48, |x, y| a.get(x, y).wrapping_add(((x * 31 + y * 17) % 9) as u8)).unwrap();
        let s = image_mssim(&a, &noisy).unwrap();
        assert!(s < 1.0 && s > 0.0);
    }

    #[test]
    fn mismatched_or_tiny_images_are_rejected() {
        assert!(image_mse(&ramp(8, 8), &ramp(8, 9)).is_err());
        assert!(image_mssim(&ramp(10, 10), &ramp(10, 10)).is_err());
    }

    /// Brute-force oracle: direct 2D weighted sums per window.
    #[test]
    fn separable_filter_matches_direct_windows() {
        let a = ramp(20, 17);
        let b = GrayImage::from_fn(20, 17, |x, y| ((x * x + 3 * y) % 256) as u8).unwrap();
        let taps = MssimWindow::Gaussian11.taps();
        let (c1, c2) = (6.5025, 58.5225);
        let mut total = 0.0;
        let mut count = 0;
        for oy in 0..=17 - 11 {
            for ox in 0..=20 - 11 {
                let (mut mx, mut my, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for dy in 0..11 {
                    for dx in 0..11 {
                        let wgt = taps[dy] * taps[dx];
                        let p = a.get(ox + dx, oy + dy) as f64;
                        let q = b.get(ox + dx, oy + dy) as f64;
                        mx += wgt * p;
                        my += wgt * q;
                        sxx += wgt * p * p;
                        syy += wgt * q * q;
                        sxy += wgt * p * q;
                    }
                }
                let (vx, vy, cv) = (sxx - mx * mx, syy - my * my, sxy - mx * my);
                total += ((2.0 * mx * my + c1) * (2.0 * cv + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
                count += 1;
            }
        }
        let oracle = total / count as f64;
        assert!((image_mssim(&a, &b).unwrap() - oracle).abs() < 1e-9);
    }
}
