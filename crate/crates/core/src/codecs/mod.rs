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

//! Rectangle encoders and decoders for Raw, CopyRect, RRE, Hextile and Zlib,
//! plus encoding negotiation and the per-connection coder state.
//!
//! All multi-byte geometry and length fields are big-endian. Pixel bytes
//! follow the byte order of the connection's pixel format.

mod copyrect;
pub mod hextile;
mod raw;
mod rre;
mod subrects;
mod zlib;

use std::io::Read;

pub use copyrect::{apply_copyrect, encode_copyrect, parse_copyrect};
pub use hextile::{decode_hextile, encode_hextile};
pub use raw::{decode_raw, encode_raw};
pub use rre::{decode_rre, encode_rre};
pub use zlib::{ZlibDecoder, ZlibEncoder, DEFAULT_LEVEL as DEFAULT_ZLIB_LEVEL};

use crate::error::{Error, Result};
use crate::model::{Encoding, Framebuffer, Rect, RectUpdate};

/// Encodings a server built from this crate can emit.
pub const SUPPORTED: [Encoding; 5] = Encoding::ALL;

/// The encoding selected for a connection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodingChoice {
    pub encoding: Encoding,
    /// When set, never fall back to Raw for individual rectangles.
    pub strict: bool,
}

impl EncodingChoice {
    pub fn new(encoding: Encoding) -> Self {
        Self {
            encoding,
            strict: false,
        }
    }

    pub fn strict(encoding: Encoding) -> Self {
        Self { encoding, strict: true }
    }
}

/// Picks the first client preference the server supports. Raw is always
/// available and is the answer when nothing else matches. CopyRect is a
/// companion encoding, never the primary choice.
pub fn negotiate_encoding(client_prefs: &[i32], server_supported: &[Encoding]) -> EncodingChoice {
    let pick = client_prefs
        .iter()
        .filter_map(|&id| Encoding::from_id(id))
        .filter(|e| *e != Encoding::CopyRect)
        .find(|e| server_supported.contains(e))
        .unwrap_or(Encoding::Raw);
    EncodingChoice::new(pick)
}

/// Encoding side of one connection direction.
pub struct RectEncoder {
    choice: EncodingChoice,
    zlib: ZlibEncoder,
}

impl RectEncoder {
    pub fn new(choice: EncodingChoice) -> Self {
        Self::with_zlib_level(choice, zlib::DEFAULT_LEVEL)
    }

    pub fn with_zlib_level(choice: EncodingChoice, level: u32) -> Self {
        Self {
            choice,
            zlib: ZlibEncoder::new(level),
        }
    }

    pub fn choice(&self) -> EncodingChoice {
        self.choice
    }

    /// Switches encoding between updates. The zlib stream survives the switch.
    pub fn set_choice(&mut self, choice: EncodingChoice) {
        self.choice = choice;
    }

    /// Encodes `r` of `fb`. Outside strict mode an RRE or Hextile payload that
    /// would exceed the Raw size is replaced by Raw. Zlib never falls back
    /// since its compressor has already consumed the pixels.
    pub fn encode(&mut self, fb: &Framebuffer, r: &Rect) -> Result<RectUpdate> {
        let encoding = self.choice.encoding;
        let payload = match encoding {
            Encoding::Raw | Encoding::CopyRect => encode_raw(fb, r)?,
            Encoding::Rre => encode_rre(fb, r)?,
            Encoding::Hextile => encode_hextile(fb, r)?,
            Encoding::Zlib => self.zlib.encode(fb, r)?,
        };
        let encoding = if encoding == Encoding::CopyRect {
            Encoding::Raw
        } else {
            encoding
        };
        let raw_len = r.area() as usize * fb.format().bytes_per_pixel();
        if !self.choice.strict && matches!(encoding, Encoding::Rre | Encoding::Hextile) && payload.len() > raw_len {
            return Ok(RectUpdate::new(*r, Encoding::Raw, encode_raw(fb, r)?));
        }
        Ok(RectUpdate::new(*r, encoding, payload))
    }
}

/// Decoding side of one connection direction.
#[derive(Default)]
pub struct RectDecoder {
    zlib: ZlibDecoder,
}

impl RectDecoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn apply(&mut self, update: &RectUpdate, dst: &mut Framebuffer) -> Result<()> {
        let r = &update.rect;
        match update.encoding {
            Encoding::Raw => decode_raw(&update.payload, r, dst),
            Encoding::CopyRect => {
                let (sx, sy) = parse_copyrect(&update.payload)?;
                apply_copyrect(dst, r, sx, sy)
            }
            Encoding::Rre => decode_rre(&update.payload, r, dst),
            Encoding::Hextile => decode_hextile(&update.payload, r, dst),
            Encoding::Zlib => self.zlib.decode(&update.payload, r, dst),
        }
    }
}

/// Reads exactly one rectangle payload of the given encoding from a stream.
/// Only framing is interpreted; the bytes are returned verbatim.
pub fn read_payload<R: Read + ?Sized>(reader: &mut R, encoding: Encoding, r: &Rect, bpp: usize) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    match encoding {
        Encoding::Raw => take(reader, r.area() as usize * bpp, &mut out)?,
        Encoding::CopyRect => take(reader, 4, &mut out)?,
        Encoding::Rre => {
            take(reader, 4, &mut out)?;
            let count = u32::from_be_bytes([out[0], out[1], out[2], out[3]]);
            if u64::from(count) > r.area() {
                return Err(Error::Framing(format!(
                    "RRE claims {count} subrects in a {}x{} rect",
                    r.w, r.h
                )));
            }
            take(reader, rre::rre_len(count, bpp) - 4, &mut out)?;
        }
        Encoding::Hextile => {
            hextile::read_hextile_payload(reader, r, bpp, &mut out)?;
        }
        Encoding::Zlib => {
            take(reader, 4, &mut out)?;
            let len = u32::from_be_bytes([out[0], out[1], out[2], out[3]]);
            if len > zlib::MAX_COMPRESSED_LEN {
                return Err(Error::Framing(format!("zlib rect claims {len} compressed bytes")));
            }
            take(reader, len as usize, &mut out)?;
        }
    }
    Ok(out)
}

fn take<R: Read + ?Sized>(reader: &mut R, n: usize, out: &mut Vec<u8>) -> Result<()> {
    let start = out.len();
    out.resize(start + n, 0);
    reader.read_exact(&mut out[start..])?;
    Ok(())
}
