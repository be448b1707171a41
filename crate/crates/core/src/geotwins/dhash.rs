//! Difference hash of an icon.

use std::path::Path;

use image::DynamicImage;

use super::GeoError;

pub const ROWS: usize = 8;
pub const COLS: usize = 8;

/// Grayscale raster with one luma value per pixel, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LumaImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
}

pub fn luma(r: f64, g: f64, b: f64) -> f64 {
    0.299 * r + 0.587 * g + 0.114 * b
}

impl LumaImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Self {
        assert_eq!(pixels.len(), width * height, "pixel count does not match dimensions");
        LumaImage { width, height, pixels }
    }

    /// Converts a decoded image; transparent pixels are composited over white.
    pub fn from_image(img: &DynamicImage) -> Self {
        let rgba = img.to_rgba8();
        let pixels = rgba
            .pixels()
            .map(|p| {
                let [r, g, b, a] = p.0.map(f64::from);
                let alpha = a / 255.0;
                let over_white = |c: f64| c * alpha + 255.0 * (1.0 - alpha);
                luma(over_white(r), over_white(g), over_white(b))
            })
            .collect();
        LumaImage::new(rgba.width() as usize, rgba.height() as usize, pixels)
    }

    fn at(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    /// Separable triangle-filter (bilinear) resample with pixel-centre
    /// alignment.
    ///
    /// When shrinking, the filter widens by the scale factor so every source
    /// pixel contributes; when enlarging it is plain two-tap interpolation.
    /// Weights near the border are renormalised over the pixels that exist.
    pub fn resize(&self, width: usize, height: usize) -> LumaImage {
        let xs = triangle_weights(width, self.width);
        let ys = triangle_weights(height, self.height);
        let mut rows = Vec::with_capacity(width * self.height);
        for y in 0..self.height {
            let row = &self.pixels[y * self.width..(y + 1) * self.width];
            rows.extend(xs.iter().map(|w| apply(w, |j| row[j])));
        }
        let mut pixels = Vec::with_capacity(width * height);
        for w in &ys {
            pixels.extend((0..width).map(|x| apply(w, |j| rows[j * width + x])));
        }
        LumaImage::new(width, height, pixels)
    }
}

/// Normalised `(source index, weight)` taps for each destination index.
fn triangle_weights(dst: usize, src: usize) -> Vec<Vec<(usize, f64)>> {
    let scale = src as f64 / dst as f64;
    let support = scale.max(1.0);
    (0..dst)
        .map(|i| {
            let centre = (i as f64 + 0.5) * scale;
            let lo = (centre - support).floor().max(0.0) as usize;
            let hi = ((centre + support).ceil() as usize).min(src);
            let mut taps: Vec<(usize, f64)> = (lo..hi)
                .map(|j| (j, 1.0 - ((j as f64 + 0.5 - centre) / support).abs()))
                .filter(|&(_, w)| w > 0.0)
                .collect();
            let total: f64 = taps.iter().map(|&(_, w)| w).sum();
            for tap in &mut taps {
                tap.1 /= total;
            }
            taps
        })
        .collect()
}

/// Weighted sum written as offsets from the first tap, so a constant input
/// reproduces itself exactly.
fn apply(taps: &[(usize, f64)], value: impl Fn(usize) -> f64) -> f64 {
    let anchor = value(taps[0].0);
    anchor + taps.iter().map(|&(j, w)| w * (value(j) - anchor)).sum::<f64>()
}

/// 64-bit dHash: bit `r*8 + c` (MSB first) is set iff pixel (r, c) is
/// strictly brighter than pixel (r, c+1) of the 9×8 resample.
pub fn dhash_luma(image: &LumaImage) -> u64 {
    let small = image.resize(COLS + 1, ROWS);
    let mut hash = 0u64;
    for r in 0..ROWS {
        for c in 0..COLS {
            hash <<= 1;
            if small.at(c, r) > small.at(c + 1, r) {
                hash |= 1;
            }
        }
    }
    hash
}

pub fn dhash(img: &DynamicImage) -> Result<u64, GeoError> {
    if img.width() == 0 || img.height() == 0 {
        return Err(GeoError::UndecodableImage("image has no pixels".into()));
    }
    Ok(dhash_luma(&LumaImage::from_image(img)))
}

pub fn dhash_bytes(bytes: &[u8]) -> Result<u64, GeoError> {
    let img = image::load_from_memory(bytes).map_err(|e| GeoError::UndecodableImage(e.to_string()))?;
    dhash(&img)
}

pub fn dhash_file(path: &Path) -> Result<u64, GeoError> {
    let bytes = std::fs::read(path).map_err(|e| GeoError::UndecodableImage(format!("{}: {e}", path.display())))?;
    dhash_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{GrayImage, Luma, Rgb, RgbImage};

    #[test]
    fn uniform_image_hashes_to_zero() {
        for value in [0u8, 37, 128, 255] {
            let img = DynamicImage::ImageLuma8(GrayImage::from_pixel(31, 17, Luma([value])));
            assert_eq!(dhash(&img).unwrap(), 0);
        }
        assert_eq!(dhash_luma(&LumaImage::new(1, 1, vec![0.3])), 0);
    }

    #[test]
    fn left_bright_ramp_sets_every_bit() {
        let img = RgbImage::from_fn(64, 40, |x, _| {
            let v = 255 - (x * 4) as u8;
            Rgb([v, v, v])
        });
        assert_eq!(dhash(&DynamicImage::ImageRgb8(img)).unwrap(), u64::MAX);
        let rising = GrayImage::from_fn(64, 40, |x, _| Luma([(x * 4) as u8]));
        assert_eq!(dhash(&DynamicImage::ImageLuma8(rising)).unwrap(), 0);
    }

    #[test]
    fn bit_order_is_row_major_msb_first() {
        // only row 0 falls left to right, every other row is flat
        let mut px = vec![0.0; 9 * 8];
        for (c, p) in px[..9].iter_mut().enumerate() {
            *p = (9 - c) as f64;
        }
        assert_eq!(dhash_luma(&LumaImage::new(9, 8, px)), 0xFF00_0000_0000_0000);
    }

    #[test]
    fn resize_identity_and_luma_weights() {
        let img = LumaImage::new(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(img.resize(3, 2), img);
        assert!((luma(255.0, 0.0, 0.0) - 76.245).abs() < 1e-9);
        let fully_transparent = image::RgbaImage::from_pixel(4, 4, image::Rgba([0, 0, 0, 0]));
        let l = LumaImage::from_image(&DynamicImage::ImageRgba8(fully_transparent));
        assert!(l.pixels.iter().all(|&p| (p - 255.0).abs() < 1e-9));
    }

    /// Two-tap interpolation with edge clamping, the enlarging case.
    fn lerp_oracle(img: &LumaImage, w: usize, h: usize) -> Vec<f64> {
        let coord = |i: usize, dst: usize, src: usize| {
            let p = ((i as f64 + 0.5) * src as f64 / dst as f64 - 0.5).clamp(0.0, (src - 1) as f64);
            let lo = p.floor() as usize;
            (lo, (lo + 1).min(src - 1), p - lo as f64)
        };
        let mut out = Vec::new();
        for y in 0..h {
            let (y0, y1, ty) = coord(y, h, img.height);
            for x in 0..w {
                let (x0, x1, tx) = coord(x, w, img.width);
                let top = img.at(x0, y0) * (1.0 - tx) + img.at(x1, y0) * tx;
                let bottom = img.at(x0, y1) * (1.0 - tx) + img.at(x1, y1) * tx;
                out.push(top * (1.0 - ty) + bottom * ty);
            }
        }
        out
    }

    #[test]
    fn enlarging_is_plain_bilinear() {
        let img = LumaImage::new(4, 3, (0..12).map(|i| f64::from((i * 37 % 11) as u8)).collect());
        let up = img.resize(9, 8);
        for (a, b) in up.pixels.iter().zip(lerp_oracle(&img, 9, 8)) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn shrinking_by_two_averages_neighbourhoods() {
        // 4x1 -> 2x1: each output weighs its two covered pixels 3/8 and the
        // outer neighbours 1/8, renormalised at the border
        let img = LumaImage::new(4, 1, vec![0.0, 8.0, 16.0, 24.0]);
        let small = img.resize(2, 1);
        let left = (0.0 * 3.0 + 8.0 * 3.0 + 16.0) / 7.0;
        assert!((small.pixels[0] - left).abs() < 1e-9);
    }

    #[test]
    fn garbage_bytes_fail() {
        assert!(matches!(dhash_bytes(b"not an image"), Err(GeoError::UndecodableImage(_))));
    }
}
