//! 2D texture map with a textured-texel mask and bilinear sampling.
//!
//! Texel grid layout matches [`crate::image::Image`]: row-major, row 0 at
//! the top. uv coordinates use the Wavefront convention with v = 0 at the
//! bottom, so v maps to rows as `y = (1 - v) * H - 0.5`. Sampling is
//! bilinear with clamp-to-edge, which gives every sample a four-texel
//! footprint with non-negative weights summing to one.

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::Image;

/// Boolean texel grid marking which texels belong to textured faces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TexelMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl TexelMask {
    pub fn new(width: usize, height: usize) -> Self {
        TexelMask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        TexelMask {
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
    pub fn get_flat(&self, texel: usize) -> bool {
        self.bits[texel]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.width + col] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Writes the mask as a 1-bit PNG via [`crate::image::BinaryMask`].
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut m = crate::image::BinaryMask::new(self.width, self.height);
        for row in 0..self.height {
            for col in 0..self.width {
                m.set(row, col, self.get(row, col));
            }
        }
        m.save_png(path)
    }
}

/// Four-texel bilinear footprint of one uv sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Footprint {
    /// Flattened texel indices (row * width + col).
    pub texels: [usize; 4],
    /// Matching weights, non-negative, summing to 1.
    pub weights: [f64; 4],
}

/// H x W x 3 texture with values in [0,1] and a textured-texel mask.
#[derive(Debug, Clone, PartialEq)]
pub struct TextureMap {
    image: Image,
    mask: TexelMask,
}

impl TextureMap {
    pub fn new(width: usize, height: usize, fill: [f64; 3], mask: TexelMask) -> Result<Self> {
        if mask.width() != width || mask.height() != height {
            return Err(Error::ShapeMismatch(format!(
                "mask {}x{} does not match texture {}x{}",
                mask.width(),
                mask.height(),
                width,
                height
            )));
        }
        Ok(TextureMap {
            image: Image::filled(width, height, fill),
            mask,
        })
    }

    pub fn from_image(image: Image, mask: TexelMask) -> Result<Self> {
        if mask.width() != image.width() || mask.height() != image.height() {
            return Err(Error::ShapeMismatch("mask/image size mismatch".into()));
        }
        Ok(TextureMap { image, mask })
    }

    /// Uniform random texels in [lo, hi] on the whole grid, deterministic
    /// from the seed.
    pub fn random(
        width: usize,
        height: usize,
        mask: TexelMask,
        seed: u64,
        lo: f64,
        hi: f64,
    ) -> Result<Self> {
        let mut tex = TextureMap::new(width, height, [0.5; 3], mask)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in tex.image.data_mut() {
            *v = rng.gen_range(lo..=hi);
        }
        Ok(tex)
    }

    /// Random low-frequency texture: an NxN random grid enlarged by pixel
    /// repetition, the construction used for random-texture baselines.
    pub fn random_blocky(
        width: usize,
        height: usize,
        mask: TexelMask,
        seed: u64,
        cells: usize,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut grid = vec![[0.0f64; 3]; cells * cells];
        for cell in grid.iter_mut() {
            for ch in cell.iter_mut() {
                *ch = rng.gen_range(0.0..=1.0);
            }
        }
        let mut tex = TextureMap::new(width, height, [0.5; 3], mask)?;
        for row in 0..height {
            let gr = row * cells / height;
            for col in 0..width {
                let gc = col * cells / width;
                tex.image.set(row, col, grid[gr * cells + gc]);
            }
        }
        Ok(tex)
    }

    pub fn width(&self) -> usize {
        self.image.width()
    }

    pub fn height(&self) -> usize {
        self.image.height()
    }

    pub fn image(&self) -> &Image {
        &self.image
    }

    pub fn image_mut(&mut self) -> &mut Image {
        &mut self.image
    }

    pub fn mask(&self) -> &TexelMask {
        &self.mask
    }

    #[inline]
    pub fn texel(&self, row: usize, col: usize) -> [f64; 3] {
        self.image.get(row, col)
    }

    #[inline]
    pub fn set_texel(&mut self, row: usize, col: usize, rgb: [f64; 3]) {
        self.image.set(row, col, rgb);
    }

    #[inline]
    pub fn texel_flat(&self, texel: usize, channel: usize) -> f64 {
        self.image.data()[texel * 3 + channel]
    }

    /// Bilinear footprint of a uv sample with clamp-to-edge addressing.
    pub fn footprint(&self, u: f64, v: f64) -> Footprint {
        let w = self.width();
        let h = self.height();
        let x = u * w as f64 - 0.5;
        let y = (1.0 - v) * h as f64 - 0.5;
        let x0f = x.floor();
        let y0f = y.floor();
        let wx = x - x0f;
        let wy = y - y0f;
        let clamp = |i: f64, n: usize| -> usize { (i.max(0.0) as usize).min(n - 1) };
        let x0 = clamp(x0f, w);
        let x1 = clamp(x0f + 1.0, w);
        let y0 = clamp(y0f, h);
        let y1 = clamp(y0f + 1.0, h);
        Footprint {
            texels: [y0 * w + x0, y0 * w + x1, y1 * w + x0, y1 * w + x1],
            weights: [
                (1.0 - wy) * (1.0 - wx),
                (1.0 - wy) * wx,
                wy * (1.0 - wx),
                wy * wx,
            ],
        }
    }

    /// Bilinear sample at (u, v).
    pub fn sample(&self, u: f64, v: f64) -> [f64; 3] {
        let fp = self.footprint(u, v);
        let mut rgb = [0.0; 3];
        for k in 0..4 {
            let base = fp.texels[k] * 3;
            let w = fp.weights[k];
            rgb[0] += w * self.image.data()[base];
            rgb[1] += w * self.image.data()[base + 1];
            rgb[2] += w * self.image.data()[base + 2];
        }
        rgb
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        self.image.save_png(path)
    }

    /// Lossless binary serialization: magic `CTX1`, u32 width/height,
    /// f64 LE texel data, packed mask bits, trailing CRC32.
    pub fn save_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf: Vec<u8> = Vec::new();
        buf.extend_from_slice(b"CTX1");
        buf.extend_from_slice(&(self.width() as u32).to_le_bytes());
        buf.extend_from_slice(&(self.height() as u32).to_le_bytes());
        for v in self.image.data() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        let mut byte = 0u8;
        let mut nbits = 0;
        for &b in self.mask.bits() {
            byte = (byte << 1) | (b as u8);
            nbits += 1;
            if nbits == 8 {
                buf.push(byte);
                byte = 0;
                nbits = 0;
            }
        }
        if nbits > 0 {
            buf.push(byte << (8 - nbits));
        }
        let crc = crc32fast::hash(&buf);
        buf.extend_from_slice(&crc.to_le_bytes());
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        f.write_all(&buf).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load_binary(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut buf))
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        if buf.len() < 16 || &buf[0..4] != b"CTX1" {
            return Err(Error::WeightFormat("not a CTX1 texture file".into()));
        }
        let body_len = buf.len() - 4;
        let stored_crc = u32::from_le_bytes(buf[body_len..].try_into().unwrap());
        if crc32fast::hash(&buf[..body_len]) != stored_crc {
            return Err(Error::WeightFormat("texture file checksum mismatch".into()));
        }
        let w = u32::from_le_bytes(buf[4..8].try_into().unwrap()) as usize;
        let h = u32::from_le_bytes(buf[8..12].try_into().unwrap()) as usize;
        let data_bytes = w * h * 3 * 8;
        let mask_bytes = (w * h).div_ceil(8);
        if body_len != 12 + data_bytes + mask_bytes {
            return Err(Error::WeightFormat("texture file truncated".into()));
        }
        let mut data = Vec::with_capacity(w * h * 3);
        for i in 0..w * h * 3 {
            let off = 12 + i * 8;
            data.push(f64::from_le_bytes(buf[off..off + 8].try_into().unwrap()));
        }
        let mut mask = TexelMask::new(w, h);
        for t in 0..w * h {
            let byte = buf[12 + data_bytes + t / 8];
            let bit = (byte >> (7 - t % 8)) & 1;
            mask.bits[t] = bit == 1;
        }
        TextureMap::from_image(Image::from_vec(w, h, data)?, mask)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn footprint_weights_sum_to_one() {
        let tex = TextureMap::new(8, 8, [0.5; 3], TexelMask::filled(8, 8, true)).unwrap();
        for &(u, v) in &[(0.0, 0.0), (1.0, 1.0), (0.31, 0.77), (0.5, 0.5)] {
            let fp = tex.footprint(u, v);
            let sum: f64 = fp.weights.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!(fp.weights.iter().all(|&w| w >= 0.0));
            assert!(fp.texels.iter().all(|&t| t < 64));
        }
    }

    #[test]
    fn sample_at_texel_center_returns_texel() {
        let mut tex = TextureMap::new(4, 4, [0.0; 3], TexelMask::filled(4, 4, true)).unwrap();
        tex.set_texel(1, 2, [0.9, 0.4, 0.1]);
        // Texel (row 1, col 2) center: u = 2.5/4, v = 1 - 1.5/4.
        let got = tex.sample(2.5 / 4.0, 1.0 - 1.5 / 4.0);
        assert!((got[0] - 0.9).abs() < 1e-12);
        assert!((got[1] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn binary_roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.ctx");
        let mut mask = TexelMask::new(5, 3);
        mask.set(0, 0, true);
        mask.set(2, 4, true);
        let tex = TextureMap::random(5, 3, mask, 7, 0.0, 1.0).unwrap();
        tex.save_binary(&path).unwrap();
        let back = TextureMap::load_binary(&path).unwrap();
        assert_eq!(tex, back);
    }

    #[test]
    fn random_is_deterministic_per_seed() {
        let m = TexelMask::filled(6, 6, true);
        let a = TextureMap::random(6, 6, m.clone(), 11, 0.2, 0.8).unwrap();
        let b = TextureMap::random(6, 6, m, 11, 0.2, 0.8).unwrap();
        assert_eq!(a, b);
    }
}
