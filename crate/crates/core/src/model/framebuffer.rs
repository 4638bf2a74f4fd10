// Copyright 2026 The rfbkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use super::pixel::PixelFormat;
use super::rect::Rect;
use crate::error::{Error, Result};

/// Row-major pixel grid. Pixels are stored one `u32` each regardless of the
/// wire width declared by `format`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Framebuffer {
    width: u16,
    height: u16,
    format: PixelFormat,
    pixels: Vec<u32>,
}

impl Framebuffer {
    /// A zero-filled framebuffer.
    pub fn new(width: u16, height: u16, format: PixelFormat) -> Result<Self> {
        Self::filled(width, height, format, 0)
    }

    pub fn filled(width: u16, height: u16, format: PixelFormat, value: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Shape(format!("framebuffer {width}x{height} is empty")));
        }
        format.validate()?;
        check_value(value, &format)?;
        Ok(Self {
            width,
            height,
            format,
            pixels: vec![value; usize::from(width) * usize::from(height)],
        })
    }

    pub fn from_pixels(width: u16, height: u16, format: PixelFormat, pixels: Vec<u32>) -> Result<Self> {
        let mut fb = Self::new(width, height, format)?;
        if pixels.len() != fb.pixels.len() {
            return Err(Error::Shape(format!(
                "{} pixels supplied for {width}x{height}",
                pixels.len()
            )));
        }
        if let Some(&bad) = pixels.iter().find(|&&p| p & !format.value_mask() != 0) {
            check_value(bad, &format)?;
        }
        fb.pixels = pixels;
        Ok(fb)
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    pub fn height(&self) -> u16 {
        self.height
    }

    pub fn format(&self) -> &PixelFormat {
        &self.format
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }

    pub fn pixels(&self) -> &[u32] {
        &self.pixels
    }

    pub fn get(&self, x: u16, y: u16) -> u32 {
        self.pixels[self.index(x, y)]
    }

    /// Writes one pixel. Values are masked to the format's width.
    pub fn set(&mut self, x: u16, y: u16, value: u32) {
        let i = self.index(x, y);
        self.pixels[i] = value & self.format.value_mask();
    }

    /// Pixels of row `y` in `[x, x + w)`.
    pub fn row(&self, x: u16, y: u16, w: u16) -> &[u32] {
        let start = self.index(x, y);
        &self.pixels[start..start + usize::from(w)]
    }

    pub fn row_mut(&mut self, x: u16, y: u16, w: u16) -> &mut [u32] {
        let start = self.index(x, y);
        &mut self.pixels[start..start + usize::from(w)]
    }

    /// Fills the part of `r` that lies inside the framebuffer.
    pub fn fill_rect(&mut self, r: Rect, value: u32) {
        let Some(r) = r.intersect(&self.bounds()) else {
            return;
        };
        let value = value & self.format.value_mask();
        for y in r.y..r.y + r.h {
            self.row_mut(r.x, y, r.w).fill(value);
        }
    }

    pub fn check_rect(&self, r: &Rect) -> Result<()> {
        r.check_within(self.width, self.height)
    }

    /// Copies the pixels of `r` out in scan order.
    pub fn read_rect(&self, r: &Rect) -> Result<Vec<u32>> {
        self.check_rect(r)?;
        let mut out = Vec::with_capacity(r.area() as usize);
        for y in r.y..r.y + r.h {
            out.extend_from_slice(self.row(r.x, y, r.w));
        }
        Ok(out)
    }

    /// Overwrites `r` with `values` given in scan order.
    pub fn write_rect(&mut self, r: &Rect, values: &[u32]) -> Result<()> {
        self.check_rect(r)?;
        if values.len() as u64 != r.area() {
            return Err(Error::Framing(format!(
                "{} values for a {}x{} rect",
                values.len(),
                r.w,
                r.h
            )));
        }
        let mask = self.format.value_mask();
        for (row, chunk) in (r.y..r.y + r.h).zip(values.chunks_exact(usize::from(r.w))) {
            for (dst, &v) in self.row_mut(r.x, row, r.w).iter_mut().zip(chunk) {
                *dst = v & mask;
            }
        }
        Ok(())
    }

    /// Same geometry and identical pixels inside `r`.
    pub fn region_eq(&self, other: &Framebuffer, r: &Rect) -> bool {
        (r.y..r.y + r.h).all(|y| self.row(r.x, y, r.w) == other.row(r.x, y, r.w))
    }

    /// First pixel at which the two framebuffers differ.
    pub fn first_difference(&self, other: &Framebuffer) -> Option<(u16, u16, u32, u32)> {
        if self.width != other.width || self.height != other.height {
            return Some((0, 0, 0, 0));
        }
        self.pixels
            .iter()
            .zip(&other.pixels)
            .position(|(a, b)| a != b)
            .map(|i| {
                let x = (i % usize::from(self.width)) as u16;
                let y = (i / usize::from(self.width)) as u16;
                (x, y, self.pixels[i], other.pixels[i])
            })
    }

    /// A copy of this framebuffer with every pixel re-expressed in `format`.
    pub fn converted(&self, format: &PixelFormat) -> Framebuffer {
        if *format == self.format {
            return self.clone();
        }
        Framebuffer {
            width: self.width,
            height: self.height,
            format: *format,
            pixels: self.pixels.iter().map(|&p| self.format.convert(p, format)).collect(),
        }
    }

    fn index(&self, x: u16, y: u16) -> usize {
        debug_assert!(x < self.width && y < self.height, "({x}, {y}) outside framebuffer");
        usize::from(y) * usize::from(self.width) + usize::from(x)
    }
}

fn check_value(value: u32, format: &PixelFormat) -> Result<()> {
    if value & !format.value_mask() != 0 {
        return Err(Error::Range {
            value,
            bits: format.bits_per_pixel,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry() {
        let fb = Framebuffer::new(7, 3, PixelFormat::default()).unwrap();
        assert_eq!(fb.pixels().len(), 21);
        assert!(Framebuffer::new(0, 3, PixelFormat::default()).is_err());
    }

    #[test]
    fn pixels_must_fit_format() {
        let f = PixelFormat::rgb565();
        assert!(Framebuffer::from_pixels(1, 1, f, vec![0x1_0000]).is_err());
        assert!(Framebuffer::from_pixels(2, 1, f, vec![1]).is_err());
        let mut fb = Framebuffer::new(1, 1, f).unwrap();
        fb.set(0, 0, 0xFFFF_FFFF);
        assert_eq!(fb.get(0, 0), 0xFFFF);
    }

    #[test]
    fn rect_io() {
        let mut fb = Framebuffer::new(4, 4, PixelFormat::default()).unwrap();
        let r = Rect::new(1, 1, 2, 2);
        fb.write_rect(&r, &[1, 2, 3, 4]).unwrap();
        assert_eq!(fb.read_rect(&r).unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(fb.get(0, 0), 0);
        assert!(fb.write_rect(&r, &[1]).is_err());
        assert!(fb.read_rect(&Rect::new(3, 3, 2, 1)).is_err());
        assert_eq!(fb.first_difference(&fb.clone()), None);
    }
}
