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

use std::io::{Read, Write};

use crate::codecs::read_payload;
use crate::error::{Error, Result};
use crate::model::{Encoding, PixelFormat, Rect, RectUpdate};

/// Cut-text bodies above this size are treated as a protocol violation.
pub const MAX_CUT_TEXT: u32 = 1 << 20;
/// Longest SetEncodings list accepted.
pub const MAX_ENCODINGS: u16 = 1024;

pub mod client_type {
    pub const SET_PIXEL_FORMAT: u8 = 0;
    pub const SET_ENCODINGS: u8 = 2;
    pub const FRAMEBUFFER_UPDATE_REQUEST: u8 = 3;
    pub const KEY_EVENT: u8 = 4;
    pub const POINTER_EVENT: u8 = 5;
    pub const CUT_TEXT: u8 = 6;
}

pub mod server_type {
    pub const FRAMEBUFFER_UPDATE: u8 = 0;
    pub const SET_COLOUR_MAP_ENTRIES: u8 = 1;
    pub const BELL: u8 = 2;
    pub const CUT_TEXT: u8 = 3;
}

/// Messages sent from viewer to server.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClientMessage {
    SetPixelFormat(PixelFormat),
    SetEncodings(Vec<i32>),
    FramebufferUpdateRequest {
        incremental: bool,
        rect: Rect,
    },
    KeyEvent {
        down: bool,
        keysym: u32,
    },
    PointerEvent {
        buttons: u8,
        x: u16,
        y: u16,
    },
    /// Clipboard text; accepted and ignored by the server.
    CutText(Vec<u8>),
}

impl ClientMessage {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match self {
            ClientMessage::SetPixelFormat(pf) => {
                out.extend_from_slice(&[client_type::SET_PIXEL_FORMAT, 0, 0, 0]);
                out.extend_from_slice(&pf.to_wire());
            }
            ClientMessage::SetEncodings(ids) => {
                out.extend_from_slice(&[client_type::SET_ENCODINGS, 0]);
                out.extend_from_slice(&(ids.len() as u16).to_be_bytes());
                for id in ids {
                    out.extend_from_slice(&id.to_be_bytes());
                }
            }
            ClientMessage::FramebufferUpdateRequest { incremental, rect } => {
                out.extend_from_slice(&[client_type::FRAMEBUFFER_UPDATE_REQUEST, u8::from(*incremental)]);
                put_rect(rect, &mut out);
            }
            ClientMessage::KeyEvent { down, keysym } => {
                out.extend_from_slice(&[client_type::KEY_EVENT, u8::from(*down), 0, 0]);
                out.extend_from_slice(&keysym.to_be_bytes());
            }
            ClientMessage::PointerEvent { buttons, x, y } => {
                out.extend_from_slice(&[client_type::POINTER_EVENT, *buttons]);
                out.extend_from_slice(&x.to_be_bytes());
                out.extend_from_slice(&y.to_be_bytes());
            }
            ClientMessage::CutText(text) => {
                out.extend_from_slice(&[client_type::CUT_TEXT, 0, 0, 0]);
                out.extend_from_slice(&(text.len() as u32).to_be_bytes());
                out.extend_from_slice(text);
            }
        }
        out
    }

    pub fn write_to<W: Write + ?Sized>(&self, w: &mut W) -> Result<()> {
        w.write_all(&self.to_bytes())?;
        w.flush()?;
        Ok(())
    }
}

/// Messages sent from server to viewer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ServerMessage {
    FramebufferUpdate(Vec<RectUpdate>),
    /// Palette updates; parsed so the stream stays in sync, otherwise ignored.
    SetColourMapEntries {
        first: u16,
        colours: Vec<[u16; 3]>,
    },
    Bell,
    CutText(Vec<u8>),
}

impl ServerMessage {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        match self {
            ServerMessage::FramebufferUpdate(rects) => return encode_update(rects),
            ServerMessage::SetColourMapEntries { first, colours } => {
                out.extend_from_slice(&[server_type::SET_COLOUR_MAP_ENTRIES, 0]);
                out.extend_from_slice(&first.to_be_bytes());
                out.extend_from_slice(&(colours.len() as u16).to_be_bytes());
                for c in colours {
                    for v in c {
                        out.extend_from_slice(&v.to_be_bytes());
                    }
                }
            }
            ServerMessage::Bell => out.push(server_type::BELL),
            ServerMessage::CutText(text) => {
                out.extend_from_slice(&[server_type::CUT_TEXT, 0, 0, 0]);
                out.extend_from_slice(&(text.len() as u32).to_be_bytes());
                out.extend_from_slice(text);
            }
        }
        Ok(out)
    }
}

pub(crate) fn put_rect(r: &Rect, out: &mut Vec<u8>) {
    for v in [r.x, r.y, r.w, r.h] {
        out.extend_from_slice(&v.to_be_bytes());
    }
}

/// Serializes a FramebufferUpdate message.
pub fn encode_update(rects: &[RectUpdate]) -> Result<Vec<u8>> {
    let count = u16::try_from(rects.len())
        .map_err(|_| Error::Invalid(format!("{} rects do not fit one update", rects.len())))?;
    let body: usize = rects.iter().map(|r| RectUpdate::HEADER_LEN + r.payload.len()).sum();
    let mut out = Vec::with_capacity(4 + body);
    out.extend_from_slice(&[server_type::FRAMEBUFFER_UPDATE, 0]);
    out.extend_from_slice(&count.to_be_bytes());
    for r in rects {
        put_rect(&r.rect, &mut out);
        out.extend_from_slice(&r.encoding.id().to_be_bytes());
        out.extend_from_slice(&r.payload);
    }
    Ok(out)
}

fn read_array<const N: usize, R: Read + ?Sized>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_u8<R: Read + ?Sized>(r: &mut R) -> Result<u8> {
    Ok(read_array::<1, _>(r)?[0])
}

fn read_u16<R: Read + ?Sized>(r: &mut R) -> Result<u16> {
    Ok(u16::from_be_bytes(read_array(r)?))
}

pub(crate) fn read_u32<R: Read + ?Sized>(r: &mut R) -> Result<u32> {
    Ok(u32::from_be_bytes(read_array(r)?))
}

fn read_rect<R: Read + ?Sized>(r: &mut R) -> Result<Rect> {
    let b: [u8; 8] = read_array(r)?;
    let f = |i: usize| u16::from_be_bytes([b[i], b[i + 1]]);
    Ok(Rect::new(f(0), f(2), f(4), f(6)))
}

fn read_text<R: Read + ?Sized>(r: &mut R) -> Result<Vec<u8>> {
    let _pad: [u8; 3] = read_array(r)?;
    let len = read_u32(r)?;
    if len > MAX_CUT_TEXT {
        return Err(Error::Protocol(format!("cut text of {len} bytes")));
    }
    let mut text = vec![0u8; len as usize];
    r.read_exact(&mut text)?;
    Ok(text)
}

/// Reads one client-to-server message. An unknown type byte is reported
/// without consuming anything past it.
pub fn read_client_message<R: Read + ?Sized>(r: &mut R) -> Result<ClientMessage> {
    let kind = read_u8(r)?;
    let msg = match kind {
        client_type::SET_PIXEL_FORMAT => {
            let _pad: [u8; 3] = read_array(r)?;
            ClientMessage::SetPixelFormat(PixelFormat::from_wire(&read_array(r)?))
        }
        client_type::SET_ENCODINGS => {
            let _pad = read_u8(r)?;
            let n = read_u16(r)?;
            if n > MAX_ENCODINGS {
                return Err(Error::Protocol(format!("SetEncodings with {n} entries")));
            }
            let mut ids = Vec::with_capacity(n.into());
            for _ in 0..n {
                ids.push(read_u32(r)? as i32);
            }
            ClientMessage::SetEncodings(ids)
        }
        client_type::FRAMEBUFFER_UPDATE_REQUEST => {
            let incremental = read_u8(r)? != 0;
            ClientMessage::FramebufferUpdateRequest {
                incremental,
                rect: read_rect(r)?,
            }
        }
        client_type::KEY_EVENT => {
            let down = read_u8(r)? != 0;
            let _pad: [u8; 2] = read_array(r)?;
            ClientMessage::KeyEvent {
                down,
                keysym: read_u32(r)?,
            }
        }
        client_type::POINTER_EVENT => {
            let buttons = read_u8(r)?;
            let x = read_u16(r)?;
            ClientMessage::PointerEvent {
                buttons,
                x,
                y: read_u16(r)?,
            }
        }
        client_type::CUT_TEXT => ClientMessage::CutText(read_text(r)?),
        other => return Err(Error::Protocol(format!("unknown client message type {other}"))),
    };
    Ok(msg)
}

/// Reads one server-to-client message. Rectangle payloads are framed
/// according to their encoding and `bytes_per_pixel`, but not decoded.
pub fn read_server_message<R: Read + ?Sized>(r: &mut R, bytes_per_pixel: usize) -> Result<ServerMessage> {
    let kind = read_u8(r)?;
    let msg = match kind {
        server_type::FRAMEBUFFER_UPDATE => {
            let _pad = read_u8(r)?;
            let count = read_u16(r)?;
            let mut rects = Vec::with_capacity(count.into());
            for _ in 0..count {
                let rect = read_rect(r)?;
                let id = read_u32(r)? as i32;
                let encoding =
                    Encoding::from_id(id).ok_or_else(|| Error::Protocol(format!("unsupported encoding id {id}")))?;
                let payload = read_payload(r, encoding, &rect, bytes_per_pixel)?;
                rects.push(RectUpdate::new(rect, encoding, payload));
            }
            ServerMessage::FramebufferUpdate(rects)
        }
        server_type::SET_COLOUR_MAP_ENTRIES => {
            let _pad = read_u8(r)?;
            let first = read_u16(r)?;
            let n = read_u16(r)?;
            let mut colours = Vec::with_capacity(n.into());
            for _ in 0..n {
                colours.push([read_u16(r)?, read_u16(r)?, read_u16(r)?]);
            }
            ServerMessage::SetColourMapEntries { first, colours }
        }
        server_type::BELL => ServerMessage::Bell,
        server_type::CUT_TEXT => ServerMessage::CutText(read_text(r)?),
        other => return Err(Error::Protocol(format!("unknown server message type {other}"))),
    };
    Ok(msg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(bytes: &[u8]) -> Result<ClientMessage> {
        read_client_message(&mut &bytes[..])
    }

    #[test]
    fn key_event_layout() {
        let m = parse(&[4, 1, 0, 0, 0, 0, 0xFF, 0x0D]).unwrap();
        assert_eq!(
            m,
            ClientMessage::KeyEvent {
                down: true,
                keysym: 0xFF0D
            }
        );
    }

    #[test]
    fn pointer_event_layout() {
        let m = parse(&[5, 1, 0, 0x10, 0, 0x20]).unwrap();
        assert_eq!(
            m,
            ClientMessage::PointerEvent {
                buttons: 1,
                x: 16,
                y: 32
            }
        );
    }

    #[test]
    fn update_request_layout() {
        let m = parse(&[3, 1, 0, 0, 0, 0, 4, 0, 3, 0]).unwrap();
        assert_eq!(
            m,
            ClientMessage::FramebufferUpdateRequest {
                incremental: true,
                rect: Rect::new(0, 0, 1024, 768)
            }
        );
    }

    #[test]
    fn unknown_type_consumes_one_byte() {
        let bytes = [9u8, 4, 1, 0, 0];
        let mut cursor = &bytes[..];
        assert!(matches!(read_client_message(&mut cursor), Err(Error::Protocol(_))));
        assert_eq!(cursor, &bytes[1..]);
    }

    #[test]
    fn short_read_is_transport_error() {
        assert!(matches!(parse(&[4, 1, 0]), Err(Error::Transport(_))));
    }

    #[test]
    fn empty_update_is_four_bytes() {
        assert_eq!(encode_update(&[]).unwrap(), vec![0, 0, 0, 0]);
    }

    #[test]
    fn one_raw_pixel_update_is_twenty_bytes() {
        let u = RectUpdate::new(Rect::new(0, 0, 1, 1), Encoding::Raw, vec![1, 2, 3, 4]);
        let bytes = encode_update(std::slice::from_ref(&u)).unwrap();
        assert_eq!(bytes.len(), 4 + 12 + 4);
        assert_eq!(&bytes[..4], &[0, 0, 0, 1]);
        let back = read_server_message(&mut bytes.as_slice(), 4).unwrap();
        assert_eq!(back, ServerMessage::FramebufferUpdate(vec![u]));
    }

    #[test]
    fn two_rects_in_order() {
        let a = RectUpdate::new(Rect::new(0, 0, 1, 1), Encoding::Raw, vec![1, 2, 3, 4]);
        let b = RectUpdate::new(Rect::new(1, 0, 1, 1), Encoding::CopyRect, vec![0, 0, 0, 0]);
        let bytes = encode_update(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(&bytes[2..4], &[0, 2]);
        assert_eq!(&bytes[16..20], &[1, 2, 3, 4]);
        assert_eq!(
            read_server_message(&mut bytes.as_slice(), 4).unwrap(),
            ServerMessage::FramebufferUpdate(vec![a, b])
        );
    }

    #[test]
    fn unknown_encoding_rejected() {
        let mut bytes = vec![0, 0, 0, 1];
        put_rect(&Rect::new(0, 0, 1, 1), &mut bytes);
        bytes.extend_from_slice(&16i32.to_be_bytes());
        assert!(matches!(
            read_server_message(&mut bytes.as_slice(), 4),
            Err(Error::Protocol(_))
        ));
    }

    #[test]
    fn server_side_extras_roundtrip() {
        for m in [
            ServerMessage::Bell,
            ServerMessage::CutText(b"hello".to_vec()),
            ServerMessage::SetColourMapEntries {
                first: 3,
                colours: vec![[1, 2, 3], [0xFFFF, 0, 7]],
            },
        ] {
            let bytes = m.to_bytes().unwrap();
            assert_eq!(read_server_message(&mut bytes.as_slice(), 4).unwrap(), m);
        }
    }
}
