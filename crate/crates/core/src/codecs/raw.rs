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

//! Raw encoding: `w * h` pixels in scan order.

use crate::error::{Error, Result};
use crate::model::{Framebuffer, Rect};

pub fn encode_raw(fb: &Framebuffer, r: &Rect) -> Result<Vec<u8>> {
    fb.check_rect(r)?;
    let mut out = Vec::with_capacity(r.area() as usize * fb.format().bytes_per_pixel());
    append_raw(fb, r, &mut out);
    Ok(out)
}

/// Appends the raw bytes of `r`, which the caller has bounds-checked.
pub(crate) fn append_raw(fb: &Framebuffer, r: &Rect, out: &mut Vec<u8>) {
    let format = *fb.format();
    for y in r.y..r.y + r.h {
        for &p in fb.row(r.x, y, r.w) {
            format.put_pixel(p, out);
        }
    }
}

/// Writes a raw payload into `dst` at `r`. Pixels are read in `dst`'s format.
pub fn decode_raw(payload: &[u8], r: &Rect, dst: &mut Framebuffer) -> Result<()> {
    dst.check_rect(r)?;
    let format = *dst.format();
    let bpp = format.bytes_per_pixel();
    let want = r.area() as usize * bpp;
    if payload.len() != want {
        return Err(Error::Framing(format!(
            "raw payload for {}x{} is {} bytes, expected {want}",
            r.w,
            r.h,
            payload.len()
        )));
    }
    let row_bytes = usize::from(r.w) * bpp;
    for (y, line) in (r.y..r.y + r.h).zip(payload.chunks_exact(row_bytes)) {
        for (dst, px) in dst.row_mut(r.x, y, r.w).iter_mut().zip(line.chunks_exact(bpp)) {
            *dst = format.get_pixel(px);
        }
    }
    Ok(())
}
