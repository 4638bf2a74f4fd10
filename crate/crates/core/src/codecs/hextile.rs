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

//! Hextile: the rectangle is cut into 16x16 tiles, emitted left-to-right,
//! top-to-bottom. The last tile of a row or column is clipped to what remains.
//!
//! Every tile starts with a subencoding mask. A raw tile carries its pixels
//! verbatim; otherwise an optional background, optional foreground and an
//! optional list of subrects follow. Background and foreground carry over
//! from the previous tile of the same rectangle when not re-specified. Carry
//! state starts empty for every rectangle.

use std::io::Read;

use super::subrects::{distinct_up_to, dominant, greedy_cover, Subrect};
use crate::error::{Error, Result};
use crate::model::{Framebuffer, PixelFormat, Rect};

pub const TILE: u16 = 16;

pub const RAW: u8 = 0x01;
pub const BACKGROUND_SPECIFIED: u8 = 0x02;
pub const FOREGROUND_SPECIFIED: u8 = 0x04;
pub const ANY_SUBRECTS: u8 = 0x08;
pub const SUBRECTS_COLOURED: u8 = 0x10;

const MAX_SUBRECTS: usize = 255;

/// Tile rectangles of `r` in emission order.
pub fn tiles(r: &Rect) -> impl Iterator<Item = Rect> + '_ {
    (0..r.h).step_by(TILE.into()).flat_map(move |dy| {
        (0..r.w)
            .step_by(TILE.into())
            .map(move |dx| Rect::new(r.x + dx, r.y + dy, TILE.min(r.w - dx), TILE.min(r.h - dy)))
    })
}

/// Colours the decoder will assume for the next tile.
#[derive(Debug, Default, Clone, Copy)]
struct Carry {
    bg: Option<u32>,
    fg: Option<u32>,
}

enum TilePlan {
    Raw,
    Solid,
    Mono { fg: u32, subs: Vec<Subrect> },
    Coloured { subs: Vec<Subrect> },
}

pub fn encode_hextile(fb: &Framebuffer, r: &Rect) -> Result<Vec<u8>> {
    fb.check_rect(r)?;
    let format = *fb.format();
    let bpp = format.bytes_per_pixel();
    let mut out = Vec::new();
    let mut carry = Carry::default();
    for tile in tiles(r) {
        let pixels = fb.read_rect(&tile)?;
        encode_tile(&pixels, &tile, &format, bpp, &mut carry, &mut out);
    }
    Ok(out)
}

fn encode_tile(pixels: &[u32], tile: &Rect, format: &PixelFormat, bpp: usize, carry: &mut Carry, out: &mut Vec<u8>) {
    let (w, h) = (usize::from(tile.w), usize::from(tile.h));
    let raw_size = 1 + w * h * bpp;
    let colours = distinct_up_to(pixels, 3);
    let bg = dominant(pixels);
    let bg_cost = if carry.bg == Some(bg) { 0 } else { bpp };

    let (plan, size) = match colours {
        1 => (TilePlan::Solid, 1 + bg_cost),
        2 => {
            let fg = *pixels.iter().find(|&&p| p != bg).expect("two colours");
            let fg_cost = if carry.fg == Some(fg) { 0 } else { bpp };
            match greedy_cover(pixels, w, h, bg, MAX_SUBRECTS) {
                Some(subs) => {
                    let size = 1 + bg_cost + fg_cost + 1 + 2 * subs.len();
                    (TilePlan::Mono { fg, subs }, size)
                }
                None => (TilePlan::Raw, raw_size),
            }
        }
        _ => {
            // Past this many subrects the tile is cheaper raw anyway.
            let budget = (raw_size / (bpp + 2) + 1).min(MAX_SUBRECTS);
            match greedy_cover(pixels, w, h, bg, budget) {
                Some(subs) => {
                    let size = 1 + bg_cost + 1 + subs.len() * (bpp + 2);
                    (TilePlan::Coloured { subs }, size)
                }
                None => (TilePlan::Raw, raw_size),
            }
        }
    };
    let plan = if size > raw_size { TilePlan::Raw } else { plan };

    let mask_at = out.len();
    out.push(0);
    let mut mask = 0u8;
    if matches!(plan, TilePlan::Raw) {
        mask = RAW;
        for &p in pixels {
            format.put_pixel(p, out);
        }
        // Colours are re-specified after a raw tile.
        *carry = Carry::default();
        out[mask_at] = mask;
        return;
    }
    if carry.bg != Some(bg) {
        mask |= BACKGROUND_SPECIFIED;
        format.put_pixel(bg, out);
        carry.bg = Some(bg);
    }
    match plan {
        TilePlan::Solid | TilePlan::Raw => {}
        TilePlan::Mono { fg, subs } => {
            if carry.fg != Some(fg) {
                mask |= FOREGROUND_SPECIFIED;
                format.put_pixel(fg, out);
                carry.fg = Some(fg);
            }
            mask |= ANY_SUBRECTS;
            out.push(subs.len() as u8);
            for s in &subs {
                put_geometry(s, out);
            }
        }
        TilePlan::Coloured { subs } => {
            mask |= ANY_SUBRECTS | SUBRECTS_COLOURED;
            out.push(subs.len() as u8);
            for s in &subs {
                format.put_pixel(s.color, out);
                put_geometry(s, out);
            }
        }
    }
    out[mask_at] = mask;
}

fn put_geometry(s: &Subrect, out: &mut Vec<u8>) {
    out.push(((s.x as u8) << 4) | s.y as u8);
    out.push((((s.w - 1) as u8) << 4) | (s.h - 1) as u8);
}

/// Cursor over a payload slice that reports truncation as a framing error.
struct Bytes<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Bytes<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Framing(format!(
                "hextile payload truncated at byte {} (needed {n} more)",
                self.pos
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn byte(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
}

pub fn decode_hextile(payload: &[u8], r: &Rect, dst: &mut Framebuffer) -> Result<()> {
    dst.check_rect(r)?;
    let format = *dst.format();
    let bpp = format.bytes_per_pixel();
    let mut cur = Bytes { buf: payload, pos: 0 };
    let mut carry = Carry::default();
    for tile in tiles(r) {
        let mask = cur.byte()?;
        if mask & RAW != 0 {
            let n = tile.area() as usize * bpp;
            let bytes = cur.take(n)?;
            super::raw::decode_raw(bytes, &tile, dst)?;
            continue;
        }
        if mask & BACKGROUND_SPECIFIED != 0 {
            carry.bg = Some(format.get_pixel(cur.take(bpp)?));
        }
        if mask & FOREGROUND_SPECIFIED != 0 {
            carry.fg = Some(format.get_pixel(cur.take(bpp)?));
        }
        let bg = carry
            .bg
            .ok_or_else(|| Error::Framing("first non-raw hextile tile has no background".into()))?;
        dst.fill_rect(tile, bg);
        if mask & ANY_SUBRECTS == 0 {
            continue;
        }
        let count = cur.byte()?;
        let coloured = mask & SUBRECTS_COLOURED != 0;
        for _ in 0..count {
            let color = if coloured {
                format.get_pixel(cur.take(bpp)?)
            } else {
                carry
                    .fg
                    .ok_or_else(|| Error::Framing("hextile subrects without a foreground".into()))?
            };
            let xy = cur.byte()?;
            let wh = cur.byte()?;
            let (sx, sy) = (u16::from(xy >> 4), u16::from(xy & 0x0F));
            let (sw, sh) = (u16::from(wh >> 4) + 1, u16::from(wh & 0x0F) + 1);
            if sx + sw > tile.w || sy + sh > tile.h {
                return Err(Error::Bounds(format!(
                    "hextile subrect {sw}x{sh}+{sx}+{sy} escapes its {}x{} tile",
                    tile.w, tile.h
                )));
            }
            dst.fill_rect(Rect::new(tile.x + sx, tile.y + sy, sw, sh), color);
        }
    }
    if cur.pos != payload.len() {
        return Err(Error::Framing(format!(
            "{} trailing bytes after hextile rect",
            payload.len() - cur.pos
        )));
    }
    Ok(())
}

/// Reads exactly one hextile payload for `r` from a stream, appending the
/// bytes to `out`. Only the structure is parsed; pixels are not interpreted.
pub(crate) fn read_hextile_payload<R: Read + ?Sized>(
    reader: &mut R,
    r: &Rect,
    bpp: usize,
    out: &mut Vec<u8>,
) -> Result<()> {
    let mut take = |n: usize, out: &mut Vec<u8>| -> Result<()> {
        let start = out.len();
        out.resize(start + n, 0);
        reader.read_exact(&mut out[start..])?;
        Ok(())
    };
    for tile in tiles(r) {
        take(1, out)?;
        let mask = *out.last().expect("mask byte");
        if mask & RAW != 0 {
            take(tile.area() as usize * bpp, out)?;
            continue;
        }
        let mut n = 0;
        if mask & BACKGROUND_SPECIFIED != 0 {
            n += bpp;
        }
        if mask & FOREGROUND_SPECIFIED != 0 {
            n += bpp;
        }
        take(n, out)?;
        if mask & ANY_SUBRECTS != 0 {
            take(1, out)?;
            let count = usize::from(*out.last().expect("count byte"));
            let each = if mask & SUBRECTS_COLOURED != 0 { bpp + 2 } else { 2 };
            take(count * each, out)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn solid(w: u16, h: u16, v: u32) -> Framebuffer {
        Framebuffer::filled(w, h, PixelFormat::rgb888(), v).unwrap()
    }

    fn roundtrip(fb: &Framebuffer, r: &Rect) -> Vec<u8> {
        let p = encode_hextile(fb, r).unwrap();
        let mut dst = Framebuffer::new(fb.width(), fb.height(), *fb.format()).unwrap();
        decode_hextile(&p, r, &mut dst).unwrap();
        assert!(dst.region_eq(fb, r));
        let mut scanned = Vec::new();
        read_hextile_payload(&mut p.as_slice(), r, fb.format().bytes_per_pixel(), &mut scanned).unwrap();
        assert_eq!(scanned, p);
        p
    }

    #[test]
    fn solid_tile() {
        let fb = solid(16, 16, 0xABCDEF);
        let p = roundtrip(&fb, &fb.bounds());
        assert_eq!(p[0], BACKGROUND_SPECIFIED);
        assert_eq!(p.len(), 1 + 4);
    }

    #[test]
    fn tile_geometry() {
        let t: Vec<Rect> = tiles(&Rect::new(0, 0, 17, 16)).collect();
        assert_eq!(t, vec![Rect::new(0, 0, 16, 16), Rect::new(16, 0, 1, 16)]);
        let t: Vec<Rect> = tiles(&Rect::new(0, 0, 40, 40)).collect();
        assert_eq!(t.len(), 9);
        assert_eq!(t[2], Rect::new(32, 0, 8, 16));
        assert_eq!(t[8], Rect::new(32, 32, 8, 8));
    }

    #[test]
    fn carried_background() {
        let fb = solid(32, 16, 7);
        let p = roundtrip(&fb, &fb.bounds());
        assert_eq!(p, vec![BACKGROUND_SPECIFIED, 7, 0, 0, 0, 0x00]);
    }

    #[test]
    fn raw_subencoded_tile_equals_raw() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let px: Vec<u32> = (0..16 * 16).map(|_| rng.gen::<u32>() & 0xFFFFFF).collect();
        let fb = Framebuffer::from_pixels(16, 16, PixelFormat::rgb888(), px).unwrap();
        let p = roundtrip(&fb, &fb.bounds());
        assert_eq!(p[0], RAW);
        assert_eq!(&p[1..], super::super::raw::encode_raw(&fb, &fb.bounds()).unwrap());
    }

    #[test]
    fn background_only_with_zero_subrects() {
        let mut dst = Framebuffer::new(32, 16, PixelFormat::rgb888()).unwrap();
        let mut p = vec![BACKGROUND_SPECIFIED];
        p.extend_from_slice(&5u32.to_le_bytes());
        p.extend_from_slice(&[ANY_SUBRECTS, 0]);
        decode_hextile(&p, &dst.bounds(), &mut dst).unwrap();
        assert!(dst.pixels().iter().all(|&v| v == 5));
    }

    #[test]
    fn mono_tile_uses_foreground() {
        let mut fb = solid(16, 16, 1);
        fb.fill_rect(Rect::new(2, 3, 4, 5), 9);
        let p = roundtrip(&fb, &fb.bounds());
        assert_eq!(p[0], BACKGROUND_SPECIFIED | FOREGROUND_SPECIFIED | ANY_SUBRECTS);
        assert_eq!(p.len(), 1 + 4 + 4 + 1 + 2);
        assert_eq!(&p[10..], &[0x23, 0x34]);
    }

    #[test]
    fn coloured_tile() {
        let mut fb = solid(16, 16, 1);
        fb.fill_rect(Rect::new(0, 0, 2, 2), 2);
        fb.fill_rect(Rect::new(8, 8, 2, 2), 3);
        let p = roundtrip(&fb, &fb.bounds());
        assert_eq!(p[0], BACKGROUND_SPECIFIED | ANY_SUBRECTS | SUBRECTS_COLOURED);
        assert_eq!(p.len(), 1 + 4 + 1 + 2 * 6);
    }

    #[test]
    fn subrect_escaping_tile() {
        let mut dst = Framebuffer::new(8, 8, PixelFormat::rgb888()).unwrap();
        let mut p = vec![BACKGROUND_SPECIFIED | FOREGROUND_SPECIFIED | ANY_SUBRECTS];
        p.extend_from_slice(&[0; 4]);
        p.extend_from_slice(&[1; 4]);
        p.extend_from_slice(&[1, 0x44, 0x44]);
        assert!(matches!(
            decode_hextile(&p, &dst.bounds(), &mut dst),
            Err(Error::Bounds(_))
        ));
    }

    #[test]
    fn truncated_tiles() {
        let mut fb = solid(20, 20, 1);
        fb.fill_rect(Rect::new(2, 3, 4, 5), 9);
        fb.fill_rect(Rect::new(17, 17, 2, 2), 4);
        let p = encode_hextile(&fb, &fb.bounds()).unwrap();
        let mut dst = Framebuffer::new(20, 20, PixelFormat::rgb888()).unwrap();
        for cut in 0..p.len() {
            assert!(matches!(
                decode_hextile(&p[..cut], &fb.bounds(), &mut dst),
                Err(Error::Framing(_))
            ));
            let mut sink = Vec::new();
            assert!(read_hextile_payload(&mut &p[..cut], &fb.bounds(), 4, &mut sink).is_err());
        }
    }

    #[test]
    fn missing_background() {
        let mut dst = Framebuffer::new(16, 16, PixelFormat::rgb888()).unwrap();
        assert!(decode_hextile(&[0], &dst.bounds(), &mut dst).is_err());
    }

    #[test]
    fn small_formats() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for format in [PixelFormat::rgb565(), PixelFormat::bgr233()] {
            let px: Vec<u32> = (0..37 * 21)
                .map(|_| rng.gen_range(0..4) & format.value_mask())
                .collect();
            let fb = Framebuffer::from_pixels(37, 21, format, px).unwrap();
            roundtrip(&fb, &Rect::new(1, 2, 35, 19));
        }
    }
}
