//! Seeded synthetic test images standing in for natural photographs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::image::GrayImage;

fn to_pixel(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Unit-variance zero-mean field whose correlation between pixels `(dx, dy)`
/// apart is `rho^(|dx| + |dy|)`: a separable 2D first-order Markov process.
pub fn ar1_field(width: usize, height: usize, rho: f64, rng: &mut impl Rng) -> Vec<f64> {
    let e = 1.0 - rho * rho;
    let se = e.sqrt();
    let mut f = vec![0.0; width * height];
    let mut noise = || -> f64 { rng.sample(StandardNormal) };
    for y in 0..height {
        for x in 0..width {
            f[y * width + x] = match (x, y) {
                (0, 0) => noise(),
                (_, 0) => rho * f[x - 1] + se * noise(),
                (0, _) => rho * f[(y - 1) * width] + se * noise(),
                _ => {
                    rho * f[y * width + x - 1] + rho * f[(y - 1) * width + x]
                        - rho * rho * f[(y - 1) * width + x - 1]
                        + e * noise()
                }
            };
        }
    }
    f
}

/// `128 + std_dev * field`, rounded and clamped.
pub fn ar1_image(width: usize, height: usize, rho: f64, std_dev: f64, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = ar1_field(width, height, rho, &mut rng);
    GrayImage::new(width, height, f.iter().map(|v| to_pixel(128.0 + std_dev * v)).collect())
        .expect("dimensions match the field")
}

/// `count` independent AR(1) images.
pub fn ar1_corpus(count: usize, size: usize, rho: f64, std_dev: f64, seed: u64) -> Vec<GrayImage> {
    (0..count).map(|k| ar1_image(size, size, rho, std_dev, seed.wrapping_add(k as u64))).collect()
}

/// Mixed corpus of smooth, textured and edge-rich `size`×`size` images:
/// a shaded gradient with mild texture, soft-edged discs over a smooth
/// background, a low-frequency sinusoidal pattern with noise, and two
/// Markov textures (ρ = 0.95 and 0.8).
pub fn mixed_corpus(size: usize, seed: u64) -> Vec<GrayImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = size as f64;
    let texture = ar1_field(size, size, 0.9, &mut rng);
    let gradient = GrayImage::new(
        size,
        size,
        (0..size * size)
            .map(|k| {
                let (x, y) = ((k % size) as f64 / s, (k / size) as f64 / s);
                to_pixel(40.0 + 150.0 * (0.6 * x + 0.4 * y) + 30.0 * (x * y * 6.0).sin() + 6.0 * texture[k])
            })
            .collect(),
    )
    .expect("square image");

    let discs: Vec<(f64, f64, f64, f64)> = (0..6)
        .map(|_| (rng.random_range(0.1..0.9) * s, rng.random_range(0.1..0.9) * s, rng.random_range(0.05..0.2) * s, rng.random_range(-90.0..90.0)))
        .collect();
    let shapes = GrayImage::from_fn(size, size, |x, y| {
        let (xf, yf) = (x as f64, y as f64);
        let mut v = 110.0 + 40.0 * (xf / s);
        for &(cx, cy, r, amp) in &discs {
            let d = ((xf - cx).powi(2) + (yf - cy).powi(2)).sqrt();
            // soft edge about two pixels wide
            v += amp / (1.0 + ((d - r) / 1.0).exp());
        }
        to_pixel(v)
    })
    .expect("square image");

    let waves = GrayImage::new(
        size,
        size,
        (0..size * size)
            .map(|k| {
                let (x, y) = ((k % size) as f64, (k / size) as f64);
                let n: f64 = rng.sample(StandardNormal);
                to_pixel(128.0 + 50.0 * (x * 0.09 + 0.5 * (y * 0.05).sin()).sin() + 25.0 * (y * 0.13).cos() + 3.0 * n)
            })
            .collect(),
    )
    .expect("square image");

    vec![
        gradient,
        shapes,
        waves,
        ar1_image(size, size, 0.95, 40.0, seed ^ 0x95),
        ar1_image(size, size, 0.8, 30.0, seed ^ 0x80),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_images_are_reproducible() {
        assert_eq!(ar1_image(32, 32, 0.8, 30.0, 9), ar1_image(32, 32, 0.8, 30.0, 9));
        assert_ne!(ar1_image(32, 32, 0.8, 30.0, 9), ar1_image(32, 32, 0.8, 30.0, 10));
        assert_eq!(mixed_corpus(32, 1), mixed_corpus(32, 1));
    }

    #[test]
    fn field_has_markov_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (w, h, rho) = (256, 256, 0.8);
        let f = ar1_field(w, h, rho, &mut rng);
        let n = f.len() as f64;
        let var = f.iter().map(|v| v * v).sum::<f64>() / n;
        let mut lag_x = 0.0;
        let mut lag_y = 0.0;
        for y in 0..h - 1 {
            for x in 0..w - 1 {
                lag_x += f[y * w + x] * f[y * w + x + 1];
                lag_y += f[y * w + x] * f[(y + 1) * w + x];
            }
        }
        let m = ((w - 1) * (h - 1)) as f64;
        assert!((var - 1.0).abs() < 0.1, "variance {var}");
        assert!((lag_x / m - rho).abs() < 0.05);
        assert!((lag_y / m - rho).abs() < 0.05);
    }
}
