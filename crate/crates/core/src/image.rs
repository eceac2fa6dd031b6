//! Float image and binary mask buffers with PNG export.
//!
//! Images are row-major, origin top-left, three f64 channels per pixel.
//! All rendering and gradient math happens on these buffers; 8-bit PNG
//! is only an export format.

use std::path::Path;

use crate::error::{Error, Result};

/// H x W x 3 image with values nominally in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize) -> Self {
        Image {
            width,
            height,
            data: vec![0.0; width * height * 3],
        }
    }

    pub fn filled(width: usize, height: usize, rgb: [f64; 3]) -> Self {
        let mut img = Image::new(width, height);
        for p in 0..width * height {
            img.data[p * 3] = rgb[0];
            img.data[p * 3 + 1] = rgb[1];
            img.data[p * 3 + 2] = rgb[2];
        }
        img
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::ShapeMismatch(format!(
                "image buffer length {} does not match {}x{}x3",
                data.len(),
                width,
                height
            )));
        }
        Ok(Image {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> [f64; 3] {
        let i = (row * self.width + col) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, rgb: [f64; 3]) {
        let i = (row * self.width + col) * 3;
        self.data[i] = rgb[0];
        self.data[i + 1] = rgb[1];
        self.data[i + 2] = rgb[2];
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Mean of the three channels at a pixel.
    pub fn luminance(&self, row: usize, col: usize) -> f64 {
        let [r, g, b] = self.get(row, col);
        (r + g + b) / 3.0
    }

    pub fn to_rgb8(&self) -> Vec<u8> {
        self.data
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect()
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let buf = self.to_rgb8();
        image::save_buffer(
            path,
            &buf,
            self.width as u32,
            self.height as u32,
            image::ExtendedColorType::Rgb8,
        )
        .map_err(|e| Error::Png {
            path: path.display().to_string(),
            msg: e.to_string(),
        })
    }

    pub fn load_png(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let img = image::open(path)
            .map_err(|e| Error::Png {
                path: path.display().to_string(),
                msg: e.to_string(),
            })?
            .to_rgb8();
        let (w, h) = (img.width() as usize, img.height() as usize);
        let data = img.as_raw().iter().map(|&b| b as f64 / 255.0).collect();
        Image::from_vec(w, h, data)
    }
}

/// Per-pixel {0,1} mask, row-major, same layout as [`Image`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        BinaryMask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        BinaryMask {
            width,
            height,
            bits: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.width + col] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn same_shape_as_image(&self, img: &Image) -> bool {
        self.width == img.width() && self.height == img.height()
    }

    /// Writes the mask as a 1-bit grayscale PNG (true = white).
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let w = std::io::BufWriter::new(file);
        let mut encoder = png::Encoder::new(w, self.width as u32, self.height as u32);
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::One);
        let mut writer = encoder.write_header().map_err(|e| Error::Png {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        // Pack bits MSB-first, rows padded to a byte boundary.
        let row_bytes = self.width.div_ceil(8);
        let mut packed = vec![0u8; row_bytes * self.height];
        for row in 0..self.height {
            for col in 0..self.width {
                if self.get(row, col) {
                    packed[row * row_bytes + col / 8] |= 0x80 >> (col % 8);
                }
            }
        }
        writer.write_image_data(&packed).map_err(|e| Error::Png {
            path: path.display().to_string(),
            msg: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn image_get_set_roundtrip() {
        let mut img = Image::new(4, 3);
        img.set(2, 1, [0.1, 0.5, 0.9]);
        assert_eq!(img.get(2, 1), [0.1, 0.5, 0.9]);
        assert_eq!(img.get(0, 0), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn from_vec_rejects_bad_length() {
        assert!(Image::from_vec(2, 2, vec![0.0; 5]).is_err());
    }

    #[test]
    fn png_roundtrip_quantizes_to_8bit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.png");
        let mut img = Image::new(5, 4);
        img.set(1, 2, [0.25, 0.5, 1.0]);
        img.save_png(&path).unwrap();
        let back = Image::load_png(&path).unwrap();
        assert_eq!(back.width(), 5);
        assert_eq!(back.height(), 4);
        let px = back.get(1, 2);
        assert!((px[0] - 0.25).abs() < 1.0 / 255.0);
        assert!((px[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mask_png_is_one_bit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.png");
        let mut mask = BinaryMask::new(9, 3);
        mask.set(0, 0, true);
        mask.set(2, 8, true);
        mask.save_png(&path).unwrap();
        let decoder = png::Decoder::new(std::fs::File::open(&path).unwrap());
        let reader = decoder.read_info().unwrap();
        assert_eq!(reader.info().bit_depth, png::BitDepth::One);
    }
}
