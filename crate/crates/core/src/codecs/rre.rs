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

//! RRE: a background pixel plus solid subrectangles.
//!
//! Layout: `count: u32` ‖ background pixel ‖ `count` × (pixel ‖ x ‖ y ‖ w ‖ h),
//! the geometry as big-endian `u16` relative to the encoded rectangle.

use super::subrects::{dominant, greedy_cover};
use crate::error::{Error, Result};
use crate::model::{Framebuffer, Rect};

pub fn encode_rre(fb: &Framebuffer, r: &Rect) -> Result<Vec<u8>> {
    let pixels = fb.read_rect(r)?;
    let format = *fb.format();
    let bg = dominant(&pixels);
    let subs = greedy_cover(&pixels, usize::from(r.w), usize::from(r.h), bg, usize::MAX).expect("unbounded cover");
    let bpp = format.bytes_per_pixel();
    let mut out = Vec::with_capacity(4 + bpp + subs.len() * (bpp + 8));
    out.extend_from_slice(&(subs.len() as u32).to_be_bytes());
    format.put_pixel(bg, &mut out);
    for s in &subs {
        format.put_pixel(s.color, &mut out);
        for v in [s.x, s.y, s.w, s.h] {
            out.extend_from_slice(&v.to_be_bytes());
        }
    }
    Ok(out)
}

/// Total payload length implied by a subrect count.
pub(crate) fn rre_len(count: u32, bpp: usize) -> usize {
    4 + bpp + count as usize * (bpp + 8)
}

pub fn decode_rre(payload: &[u8], r: &Rect, dst: &mut Framebuffer) -> Result<()> {
    dst.check_rect(r)?;
    let format = *dst.format();
    let bpp = format.bytes_per_pixel();
    if payload.len() < 4 + bpp {
        return Err(Error::Framing(format!(
            "RRE payload of {} bytes is truncated",
            payload.len()
        )));
    }
    let count = u32::from_be_bytes([payload[0], payload[1], payload[2], payload[3]]);
    let want = rre_len(count, bpp);
    if payload.len() != want {
        return Err(Error::Framing(format!(
            "RRE payload with {count} subrects is {} bytes, expected {want}",
            payload.len()
        )));
    }
    let bg = format.get_pixel(&payload[4..]);
    dst.fill_rect(*r, bg);
    for chunk in payload[4 + bpp..].chunks_exact(bpp + 8) {
        let color = format.get_pixel(chunk);
        let g = &chunk[bpp..];
        let field = |i: usize| u16::from_be_bytes([g[2 * i], g[2 * i + 1]]);
        let (sx, sy, sw, sh) = (field(0), field(1), field(2), field(3));
        if sw == 0
            || sh == 0
            || u32::from(sx) + u32::from(sw) > u32::from(r.w)
            || u32::from(sy) + u32::from(sh) > u32::from(r.h)
        {
            return Err(Error::Bounds(format!(
                "RRE subrect {sw}x{sh}+{sx}+{sy} escapes its {}x{} rect",
                r.w, r.h
            )));
        }
        dst.fill_rect(Rect::new(r.x + sx, r.y + sy, sw, sh), color);
    }
    Ok(())
}
