use std::io::Cursor;
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder, ImageFormat};

use crate::{Result, RkltError};

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(RkltError::Image(format!("empty image {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(RkltError::DimensionMismatch {
                expected: format!("{} pixels", width * height),
                got: format!("{} pixels", pixels.len()),
            });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Edge-replicates to the next multiple of `multiple` in both directions.
    pub fn padded_to(&self, multiple: usize) -> GrayImage {
        let w = self.width.div_ceil(multiple) * multiple;
        let h = self.height.div_ceil(multiple) * multiple;
        if w == self.width && h == self.height {
            return self.clone();
        }
        let mut pixels = Vec::with_capacity(w * h);
        for y in 0..h {
            let sy = y.min(self.height - 1);
            for x in 0..w {
                pixels.push(self.get(x.min(self.width - 1), sy));
            }
        }
        GrayImage { width: w, height: h, pixels }
    }

    /// Top-left `width`×`height` region.
    pub fn cropped(&self, width: usize, height: usize) -> GrayImage {
        let width = width.min(self.width);
        let height = height.min(self.height);
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            pixels.extend_from_slice(&self.pixels[y * self.width..y * self.width + width]);
        }
        GrayImage { width, height, pixels }
    }

    /// Decodes PGM (P2/P5) or PNG bytes; color input is converted to luma.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let format = if bytes.starts_with(b"P") {
            ImageFormat::Pnm
        } else {
            image::guess_format(bytes).map_err(|e| RkltError::Image(e.to_string()))?
        };
        let img = image::load_from_memory_with_format(bytes, format).map_err(|e| RkltError::Image(e.to_string()))?;
        let luma = img.to_luma8();
        Self::new(luma.width() as usize, luma.height() as usize, luma.into_raw())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| RkltError::Image(format!("{}: {e}", path.display())))?;
        Self::decode(&bytes).map_err(|e| RkltError::Image(format!("{}: {e}", path.display())))
    }

    /// Binary PGM (P5, maxval 255).
    pub fn to_pgm(&self) -> Result<Vec<u8>> {
        let mut buf = Cursor::new(Vec::new());
        PnmEncoder::new(&mut buf)
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
            .write_image(&self.pixels, self.width as u32, self.height as u32, ExtendedColorType::L8)
            .map_err(|e| RkltError::Image(e.to_string()))?;
        Ok(buf.into_inner())
    }

    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_pgm()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_round_trip() {
        let img = GrayImage::from_fn(13, 7, |x, y| (x * 17 + y * 5) as u8).unwrap();
        let bytes = img.to_pgm().unwrap();
        assert!(bytes.starts_with(b"P5"));
        assert_eq!(GrayImage::decode(&bytes).unwrap(), img);
    }

    #[test]
    fn decodes_pgm_with_comment() {
        let mut bytes = b"P5\n# a comment\n3 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 10, 20, 30, 40, 255]);
        let img = GrayImage::decode(&bytes).unwrap();
        assert_eq!((img.width(), img.height()), (3, 2));
        assert_eq!(img.pixels(), &[0, 10, 20, 30, 40, 255]);
    }

    #[test]
    fn garbage_is_rejected() {
        assert!(GrayImage::decode(b"not an image").is_err());
        assert!(GrayImage::decode(b"P5\n3 2\n255\n\x00").is_err());
    }

    #[test]
    fn padding_replicates_edges() {
        let img = GrayImage::from_fn(9, 3, |x, y| (x + 10 * y) as u8).unwrap();
        let p = img.padded_to(8);
        assert_eq!((p.width(), p.height()), (16, 8));
        assert_eq!(p.get(15, 7), img.get(8, 2));
        assert_eq!(p.get(3, 5), img.get(3, 2));
        assert_eq!(p.cropped(9, 3), img);
    }
}
