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

//! Zlib encoding: raw pixel bytes pushed through one persistent deflate stream
//! per connection direction, each rectangle sync-flushed and prefixed with its
//! compressed length (`u32`, big-endian).
//!
//! The stream is never reset, so rectangles must be decoded in the order they
//! were encoded.

use flate2::{Compress, Compression, Decompress, FlushCompress, FlushDecompress};

use super::raw::append_raw;
use crate::error::{Error, Result};
use crate::model::{Framebuffer, Rect};

pub const DEFAULT_LEVEL: u32 = 6;

/// Compressed payloads larger than this are rejected when read off the wire.
pub(crate) const MAX_COMPRESSED_LEN: u32 = 64 << 20;

/// Sending half of a connection's zlib stream.
pub struct ZlibEncoder {
    stream: Compress,
    raw: Vec<u8>,
}

impl Default for ZlibEncoder {
    fn default() -> Self {
        Self::new(DEFAULT_LEVEL)
    }
}

impl ZlibEncoder {
    pub fn new(level: u32) -> Self {
        Self {
            stream: Compress::new(Compression::new(level.min(9)), true),
            raw: Vec::new(),
        }
    }

    pub fn encode(&mut self, fb: &Framebuffer, r: &Rect) -> Result<Vec<u8>> {
        fb.check_rect(r)?;
        self.raw.clear();
        append_raw(fb, r, &mut self.raw);
        let mut out = Vec::with_capacity(4 + self.raw.len() / 4 + 64);
        out.extend_from_slice(&[0; 4]);
        let mut consumed = 0usize;
        loop {
            if out.capacity() - out.len() < 64 {
                out.reserve(out.capacity().max(256));
            }
            let before = self.stream.total_in();
            self.stream
                .compress_vec(&self.raw[consumed..], &mut out, FlushCompress::Sync)
                .map_err(|e| Error::Invalid(format!("deflate failed: {e}")))?;
            consumed += (self.stream.total_in() - before) as usize;
            // A sync flush is complete once all input is in and the output
            // buffer was not filled to the brim.
            if consumed == self.raw.len() && out.len() < out.capacity() {
                break;
            }
        }
        let len = (out.len() - 4) as u32;
        out[..4].copy_from_slice(&len.to_be_bytes());
        Ok(out)
    }
}

/// Receiving half of a connection's zlib stream.
pub struct ZlibDecoder {
    stream: Decompress,
    scratch: Vec<u8>,
}

impl Default for ZlibDecoder {
    fn default() -> Self {
        Self::new()
    }
}

impl ZlibDecoder {
    pub fn new() -> Self {
        Self {
            stream: Decompress::new(true),
            scratch: Vec::new(),
        }
    }

    pub fn decode(&mut self, payload: &[u8], r: &Rect, dst: &mut Framebuffer) -> Result<()> {
        dst.check_rect(r)?;
        if payload.len() < 4 {
            return Err(Error::Framing("zlib payload shorter than its length field".into()));
        }
        let len = u32::from_be_bytes([payload[0], payload[1], payload[2], payload[3]]) as usize;
        let body = &payload[4..];
        if body.len() != len {
            return Err(Error::Framing(format!(
                "zlib length field says {len} bytes, {} present",
                body.len()
            )));
        }
        let expected = r.area() as usize * dst.format().bytes_per_pixel();
        self.scratch.clear();
        // Head-room so that surplus output shows up as a size mismatch instead
        // of lingering inside the inflater.
        self.scratch.reserve(expected + 64);
        let mut consumed = 0usize;
        loop {
            let before_in = self.stream.total_in();
            let before_out = self.scratch.len();
            self.stream
                .decompress_vec(&body[consumed..], &mut self.scratch, FlushDecompress::Sync)
                .map_err(|e| Error::Decompress(e.to_string()))?;
            consumed += (self.stream.total_in() - before_in) as usize;
            if self.scratch.len() > expected {
                return Err(Error::Decompress(format!(
                    "zlib stream produced more than the {expected} bytes of a {}x{} rect",
                    r.w, r.h
                )));
            }
            let stalled = self.stream.total_in() == before_in && self.scratch.len() == before_out;
            if stalled || (consumed == body.len() && self.scratch.len() < self.scratch.capacity()) {
                break;
            }
            if self.scratch.capacity() == self.scratch.len() {
                self.scratch.reserve(64);
            }
        }
        if self.scratch.len() != expected {
            return Err(Error::Decompress(format!(
                "zlib stream yielded {} bytes, expected {expected}",
                self.scratch.len()
            )));
        }
        super::raw::decode_raw(&self.scratch, r, dst)
    }
}
