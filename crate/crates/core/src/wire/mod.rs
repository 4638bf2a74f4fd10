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

//! Client/server message protocol: handshake, message serialization and
//! parsing, and transports.
//!
//! Every integer on the wire is big-endian.

mod handshake;
mod messages;
mod transport;

use std::io::{Read, Write};

pub use handshake::{
    client_handshake, server_handshake, HandshakeResult, SecurityType, ServerInit, PROTOCOL_VERSION, SECURITY_NONE,
};
pub use messages::{
    client_type, encode_update, read_client_message, read_server_message, server_type, ClientMessage, ServerMessage,
    MAX_CUT_TEXT,
};
pub use transport::{pipe, Closer, Halves, Transport};

use crate::codecs::RectDecoder;
use crate::error::Result;
use crate::model::{Framebuffer, RectUpdate};

/// Default TCP port.
pub const DEFAULT_PORT: u16 = 5900;

/// Sends one FramebufferUpdate. Returns the number of bytes written.
pub fn write_update<W: Write + ?Sized>(conn: &mut W, updates: &[RectUpdate]) -> Result<usize> {
    let bytes = encode_update(updates)?;
    conn.write_all(&bytes)?;
    conn.flush()?;
    Ok(bytes.len())
}

/// Reads server messages until a FramebufferUpdate arrives, decodes each of
/// its rectangles into `fb` in order and returns them. Bell, cut-text and
/// colour-map messages in between are skipped.
pub fn read_update<R: Read + ?Sized>(
    conn: &mut R,
    fb: &mut Framebuffer,
    decoder: &mut RectDecoder,
) -> Result<Vec<RectUpdate>> {
    let bpp = fb.format().bytes_per_pixel();
    loop {
        if let ServerMessage::FramebufferUpdate(rects) = read_server_message(conn, bpp)? {
            for r in &rects {
                decoder.apply(r, fb)?;
            }
            return Ok(rects);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codecs::{encode_copyrect, EncodingChoice, RectEncoder};
    use crate::model::{Encoding, PixelFormat, Rect};

    fn scene() -> Framebuffer {
        let px = (0..32 * 24).map(|i| (i * 7919) as u32 & 0xFFFFFF).collect();
        Framebuffer::from_pixels(32, 24, PixelFormat::rgb888(), px).unwrap()
    }

    #[test]
    fn empty_update_leaves_fb_alone() {
        let mut buf = Vec::new();
        write_update(&mut buf, &[]).unwrap();
        let mut fb = Framebuffer::new(4, 4, PixelFormat::rgb888()).unwrap();
        let before = fb.clone();
        let got = read_update(&mut buf.as_slice(), &mut fb, &mut RectDecoder::new()).unwrap();
        assert!(got.is_empty());
        assert_eq!(fb, before);
    }

    #[test]
    fn raw_then_copyrect_applied_in_order() {
        let src = scene();
        let raw = RectEncoder::new(EncodingChoice::new(Encoding::Raw))
            .encode(&src, &Rect::new(0, 0, 32, 12))
            .unwrap();
        let copy = RectUpdate::new(
            Rect::new(0, 12, 32, 12),
            Encoding::CopyRect,
            encode_copyrect(0, 0).to_vec(),
        );
        let mut buf = Vec::new();
        write_update(&mut buf, &[raw, copy]).unwrap();

        let mut fb = Framebuffer::new(32, 24, PixelFormat::rgb888()).unwrap();
        read_update(&mut buf.as_slice(), &mut fb, &mut RectDecoder::new()).unwrap();
        assert!(fb.region_eq(&src, &Rect::new(0, 0, 32, 12)));
        assert_eq!(
            fb.read_rect(&Rect::new(0, 12, 32, 12)).unwrap(),
            src.read_rect(&Rect::new(0, 0, 32, 12)).unwrap()
        );
    }

    #[test]
    fn zlib_updates_share_the_connection_stream() {
        let src = scene();
        let mut enc = RectEncoder::new(EncodingChoice::new(Encoding::Zlib));
        let mut buf = Vec::new();
        for r in [Rect::new(0, 0, 32, 24), Rect::new(5, 5, 9, 9)] {
            let u = enc.encode(&src, &r).unwrap();
            write_update(&mut buf, &[u]).unwrap();
        }
        let mut fb = Framebuffer::new(32, 24, PixelFormat::rgb888()).unwrap();
        let mut dec = RectDecoder::new();
        let mut cursor = buf.as_slice();
        read_update(&mut cursor, &mut fb, &mut dec).unwrap();
        read_update(&mut cursor, &mut fb, &mut dec).unwrap();
        assert_eq!(fb, src);
    }

    #[test]
    fn bell_is_skipped() {
        let mut buf = vec![server_type::BELL];
        write_update(&mut buf, &[]).unwrap();
        let mut fb = Framebuffer::new(4, 4, PixelFormat::rgb888()).unwrap();
        assert!(read_update(&mut buf.as_slice(), &mut fb, &mut RectDecoder::new())
            .unwrap()
            .is_empty());
    }
}
