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

//! Pixel formats and pixel (de)serialization.

use crate::error::{Error, Result};

/// The 16-byte pixel format structure exchanged in ServerInit and
/// SetPixelFormat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PixelFormat {
    pub bits_per_pixel: u8,
    pub depth: u8,
    pub big_endian: bool,
    pub true_color: bool,
    pub red_max: u16,
    pub green_max: u16,
    pub blue_max: u16,
    pub red_shift: u8,
    pub green_shift: u8,
    pub blue_shift: u8,
}

impl Default for PixelFormat {
    fn default() -> Self {
        Self::rgb888()
    }
}

fn bit_width(max: u16) -> u32 {
    16 - max.leading_zeros()
}

impl PixelFormat {
    /// Wire size of the structure, including its three padding bytes.
    pub const WIRE_LEN: usize = 16;

    /// 32 bpp, depth 24, little-endian, 8-bit channels at shifts 16/8/0.
    pub const fn rgb888() -> Self {
        Self {
            bits_per_pixel: 32,
            depth: 24,
            big_endian: false,
            true_color: true,
            red_max: 255,
            green_max: 255,
            blue_max: 255,
            red_shift: 16,
            green_shift: 8,
            blue_shift: 0,
        }
    }

    /// 16 bpp RGB565.
    pub const fn rgb565() -> Self {
        Self {
            bits_per_pixel: 16,
            depth: 16,
            big_endian: false,
            true_color: true,
            red_max: 31,
            green_max: 63,
            blue_max: 31,
            red_shift: 11,
            green_shift: 5,
            blue_shift: 0,
        }
    }

    /// 8 bpp BGR233.
    pub const fn bgr233() -> Self {
        Self {
            bits_per_pixel: 8,
            depth: 8,
            big_endian: false,
            true_color: true,
            red_max: 7,
            green_max: 7,
            blue_max: 3,
            red_shift: 0,
            green_shift: 3,
            blue_shift: 6,
        }
    }

    pub fn bytes_per_pixel(&self) -> usize {
        usize::from(self.bits_per_pixel / 8)
    }

    /// Mask of the bits a pixel value may occupy.
    pub fn value_mask(&self) -> u32 {
        if self.bits_per_pixel >= 32 {
            u32::MAX
        } else {
            (1u32 << self.bits_per_pixel) - 1
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.bits_per_pixel, 8 | 16 | 32) {
            return Err(Error::Invalid(format!(
                "bits_per_pixel {} not in {{8, 16, 32}}",
                self.bits_per_pixel
            )));
        }
        if self.depth > self.bits_per_pixel {
            return Err(Error::Invalid(format!(
                "depth {} exceeds bits_per_pixel {}",
                self.depth, self.bits_per_pixel
            )));
        }
        if !self.true_color {
            return Err(Error::Invalid("colour-map formats are not supported".into()));
        }
        let channels = self.channels();
        let mut used = 0u32;
        for (name, max, shift) in channels {
            let top = u32::from(shift) + bit_width(max);
            if top > u32::from(self.bits_per_pixel) {
                return Err(Error::Invalid(format!(
                    "{name} channel (max {max}, shift {shift}) overflows {} bits",
                    self.bits_per_pixel
                )));
            }
            let mask = (max as u32) << shift;
            if used & mask != 0 {
                return Err(Error::Invalid(format!("{name} channel overlaps another channel")));
            }
            used |= mask;
        }
        Ok(())
    }

    fn channels(&self) -> [(&'static str, u16, u8); 3] {
        [
            ("red", self.red_max, self.red_shift),
            ("green", self.green_max, self.green_shift),
            ("blue", self.blue_max, self.blue_shift),
        ]
    }

    /// Packs 8-bit channel intensities into a pixel value of this format.
    pub fn pack_rgb(&self, r: u8, g: u8, b: u8) -> u32 {
        let scale = |c: u8, max: u16| (u32::from(c) * u32::from(max) + 127) / 255;
        (scale(r, self.red_max) << self.red_shift)
            | (scale(g, self.green_max) << self.green_shift)
            | (scale(b, self.blue_max) << self.blue_shift)
    }

    /// Unpacks a pixel value into 8-bit channel intensities.
    pub fn unpack_rgb(&self, value: u32) -> (u8, u8, u8) {
        let ch = |max: u16, shift: u8| {
            if max == 0 {
                return 0;
            }
            let c = (value >> shift) & u32::from(max);
            ((c * 255 + u32::from(max) / 2) / u32::from(max)) as u8
        };
        (
            ch(self.red_max, self.red_shift),
            ch(self.green_max, self.green_shift),
            ch(self.blue_max, self.blue_shift),
        )
    }

    /// Re-expresses `value` (in `self`) in the `target` format.
    pub fn convert(&self, value: u32, target: &PixelFormat) -> u32 {
        if self == target {
            return value;
        }
        let (r, g, b) = self.unpack_rgb(value);
        target.pack_rgb(r, g, b)
    }

    /// Serializes the 16-byte wire form.
    pub fn to_wire(&self) -> [u8; 16] {
        let mut out = [0u8; 16];
        out[0] = self.bits_per_pixel;
        out[1] = self.depth;
        out[2] = u8::from(self.big_endian);
        out[3] = u8::from(self.true_color);
        out[4..6].copy_from_slice(&self.red_max.to_be_bytes());
        out[6..8].copy_from_slice(&self.green_max.to_be_bytes());
        out[8..10].copy_from_slice(&self.blue_max.to_be_bytes());
        out[10] = self.red_shift;
        out[11] = self.green_shift;
        out[12] = self.blue_shift;
        out
    }

    /// Parses the 16-byte wire form. The result is not validated.
    pub fn from_wire(b: &[u8; 16]) -> Self {
        Self {
            bits_per_pixel: b[0],
            depth: b[1],
            big_endian: b[2] != 0,
            true_color: b[3] != 0,
            red_max: u16::from_be_bytes([b[4], b[5]]),
            green_max: u16::from_be_bytes([b[6], b[7]]),
            blue_max: u16::from_be_bytes([b[8], b[9]]),
            red_shift: b[10],
            green_shift: b[11],
            blue_shift: b[12],
        }
    }

    /// Appends the wire bytes of one pixel to `out`.
    pub(crate) fn put_pixel(&self, value: u32, out: &mut Vec<u8>) {
        match (self.bits_per_pixel, self.big_endian) {
            (8, _) => out.push(value as u8),
            (16, true) => out.extend_from_slice(&(value as u16).to_be_bytes()),
            (16, false) => out.extend_from_slice(&(value as u16).to_le_bytes()),
            (_, true) => out.extend_from_slice(&value.to_be_bytes()),
            (_, false) => out.extend_from_slice(&value.to_le_bytes()),
        }
    }

    /// Reads one pixel from the front of `bytes`, which must hold at least
    /// `bytes_per_pixel` bytes.
    pub(crate) fn get_pixel(&self, bytes: &[u8]) -> u32 {
        match (self.bits_per_pixel, self.big_endian) {
            (8, _) => u32::from(bytes[0]),
            (16, true) => u32::from(u16::from_be_bytes([bytes[0], bytes[1]])),
            (16, false) => u32::from(u16::from_le_bytes([bytes[0], bytes[1]])),
            (_, true) => u32::from_be_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]),
            (_, false) => u32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]),
        }
    }
}

/// Serializes one pixel value in the byte order of `format`.
pub fn pixel_bytes(value: u32, format: &PixelFormat) -> Result<Vec<u8>> {
    if value & !format.value_mask() != 0 {
        return Err(Error::Range {
            value,
            bits: format.bits_per_pixel,
        });
    }
    let mut out = Vec::with_capacity(format.bytes_per_pixel());
    format.put_pixel(value, &mut out);
    Ok(out)
}

/// Inverse of [`pixel_bytes`].
pub fn bytes_to_pixel(bytes: &[u8], format: &PixelFormat) -> Result<u32> {
    if bytes.len() != format.bytes_per_pixel() {
        return Err(Error::Framing(format!(
            "expected {} pixel bytes, got {}",
            format.bytes_per_pixel(),
            bytes.len()
        )));
    }
    Ok(format.get_pixel(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn be32() -> PixelFormat {
        PixelFormat {
            big_endian: true,
            ..PixelFormat::rgb888()
        }
    }

    #[test]
    fn byte_order() {
        assert_eq!(pixel_bytes(0xFF, &be32()).unwrap(), vec![0, 0, 0, 0xFF]);
        assert_eq!(pixel_bytes(0xFF, &PixelFormat::rgb888()).unwrap(), vec![0xFF, 0, 0, 0]);
        for be in [false, true] {
            let f = PixelFormat {
                big_endian: be,
                ..PixelFormat::bgr233()
            };
            assert_eq!(pixel_bytes(0xA5, &f).unwrap(), vec![0xA5]);
        }
    }

    #[test]
    fn out_of_range_value() {
        assert!(matches!(
            pixel_bytes(0x1_0000, &PixelFormat::rgb565()),
            Err(Error::Range { bits: 16, .. })
        ));
        assert!(pixel_bytes(0x100, &PixelFormat::bgr233()).is_err());
    }

    #[test]
    fn default_format_is_valid() {
        PixelFormat::default().validate().unwrap();
        PixelFormat::rgb565().validate().unwrap();
        PixelFormat::bgr233().validate().unwrap();
    }

    #[test]
    fn invalid_formats() {
        let mut f = PixelFormat::rgb888();
        f.bits_per_pixel = 24;
        assert!(f.validate().is_err());
        let mut f = PixelFormat::rgb565();
        f.depth = 24;
        assert!(f.validate().is_err());
        let mut f = PixelFormat::rgb565();
        f.red_shift = 12;
        assert!(f.validate().is_err());
        let mut f = PixelFormat::rgb888();
        f.green_shift = 12;
        assert!(f.validate().is_err(), "overlapping channels");
    }

    #[test]
    fn wire_form_roundtrip() {
        for f in [be32(), PixelFormat::rgb565(), PixelFormat::bgr233()] {
            assert_eq!(PixelFormat::from_wire(&f.to_wire()), f);
        }
        let w = PixelFormat::rgb888().to_wire();
        assert_eq!(&w[..4], &[32, 24, 0, 1]);
        assert_eq!(&w[13..], &[0, 0, 0]);
    }

    #[test]
    fn conversion_preserves_full_intensity() {
        let src = PixelFormat::rgb888();
        let dst = PixelFormat::rgb565();
        assert_eq!(src.convert(0x00FF_FFFF, &dst), 0xFFFF);
        assert_eq!(src.convert(0, &dst), 0);
        assert_eq!(src.convert(0x00FF_0000, &dst), 0xF800);
    }

    fn any_format() -> impl Strategy<Value = PixelFormat> {
        (
            prop::sample::select(vec![
                PixelFormat::rgb888(),
                PixelFormat::rgb565(),
                PixelFormat::bgr233(),
            ]),
            any::<bool>(),
        )
            .prop_map(|(f, be)| PixelFormat { big_endian: be, ..f })
    }

    proptest! {
        #[test]
        fn pixel_roundtrip(f in any_format(), raw in any::<u32>()) {
            let v = raw & f.value_mask();
            let bytes = pixel_bytes(v, &f).unwrap();
            prop_assert_eq!(bytes.len(), f.bytes_per_pixel());
            prop_assert_eq!(bytes_to_pixel(&bytes, &f).unwrap(), v);
        }
    }
}
