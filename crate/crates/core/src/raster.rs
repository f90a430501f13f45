//! Grayscale raster images: in-memory grid, bilinear sampling, PGM (P5) I/O.
//!
//! Pixel addressing is origin top-left, x rightward, y downward. Intensities
//! are stored as f64 so intermediate pipeline stages (equalization, zero-mean
//! scaling) lose nothing; 8-bit quantization happens only at PGM boundaries.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>, // row-major
}

impl RasterImage {
    /// All-zero image.
    pub fn new(width: usize, height: usize) -> RasterImage {
        assert!(width >= 1 && height >= 1, "image dimensions must be positive");
        RasterImage {
            width,
            height,
            pixels: vec![0.0; width * height],
        }
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<f64>) -> Result<RasterImage> {
        if width < 1 || height < 1 || pixels.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "pixel buffer of {} values does not match {width}x{height}",
                pixels.len()
            )));
        }
        if pixels.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "image intensities must be finite".into(),
            ));
        }
        Ok(RasterImage {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y * self.width + x] = value;
    }

    /// Bilinear interpolation at a real-valued position. Neighbors outside
    /// the image contribute 0, so samples fade to black past the borders
    /// instead of erroring.
    pub fn bilinear(&self, x: f64, y: f64) -> f64 {
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let at = |xi: f64, yi: f64| -> f64 {
            if xi < 0.0 || yi < 0.0 {
                return 0.0;
            }
            let (xi, yi) = (xi as usize, yi as usize);
            if xi >= self.width || yi >= self.height {
                return 0.0;
            }
            self.pixels[yi * self.width + xi]
        };
        at(x0, y0) * (1.0 - fx) * (1.0 - fy)
            + at(x0 + 1.0, y0) * fx * (1.0 - fy)
            + at(x0, y0 + 1.0) * (1.0 - fx) * fy
            + at(x0 + 1.0, y0 + 1.0) * fx * fy
    }

    /// Read a binary (P5) PGM file with maxval ≤ 255.
    pub fn read_pgm(path: &Path) -> Result<RasterImage> {
        let data = fs::read(path).map_err(|e| Error::io(path, e))?;
        parse_pgm(&data).map_err(|msg| {
            Error::Dataset(format!("{}: {msg}", path.display()))
        })
    }

    /// Write as binary (P5) PGM, rounding and clamping intensities to 0..=255.
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let mut out = Vec::with_capacity(self.pixels.len() + 32);
        write!(out, "P5\n{} {}\n255\n", self.width, self.height)
            .expect("writing to a Vec cannot fail");
        out.extend(
            self.pixels
                .iter()
                .map(|&v| v.round().clamp(0.0, 255.0) as u8),
        );
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

fn parse_pgm(data: &[u8]) -> std::result::Result<RasterImage, String> {
    let mut pos = 0usize;
    let mut next_token = |data: &[u8]| -> std::result::Result<String, String> {
        // Skip whitespace and '#' comments, then read one token.
        loop {
            while pos < data.len() && data[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < data.len() && data[pos] == b'#' {
                while pos < data.len() && data[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < data.len() && !data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("unexpected end of file in header".into());
        }
        Ok(String::from_utf8_lossy(&data[start..pos]).into_owned())
    };

    if next_token(data)? != "P5" {
        return Err("not a binary PGM (missing P5 magic)".into());
    }
    let width: usize = next_token(data)?
        .parse()
        .map_err(|_| "bad width field".to_string())?;
    let height: usize = next_token(data)?
        .parse()
        .map_err(|_| "bad height field".to_string())?;
    let maxval: usize = next_token(data)?
        .parse()
        .map_err(|_| "bad maxval field".to_string())?;
    if maxval == 0 || maxval > 255 {
        return Err(format!("unsupported maxval {maxval} (expected 1..=255)"));
    }
    if width == 0 || height == 0 {
        return Err("image dimensions must be positive".into());
    }
    // Exactly one whitespace byte separates the header from raster data.
    pos += 1;
    let need = width * height;
    let raster = data
        .get(pos..pos + need)
        .ok_or_else(|| format!("truncated raster: need {need} bytes"))?;
    let pixels = raster.iter().map(|&b| b as f64).collect();
    RasterImage::from_pixels(width, height, pixels).map_err(|e| e.to_string())
}
