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

//! CopyRect: the payload is the source position of pixels the client already
//! holds.

use crate::error::{Error, Result};
use crate::model::{Framebuffer, Rect};

pub fn encode_copyrect(src_x: u16, src_y: u16) -> [u8; 4] {
    let [a, b] = src_x.to_be_bytes();
    let [c, d] = src_y.to_be_bytes();
    [a, b, c, d]
}

pub fn parse_copyrect(payload: &[u8]) -> Result<(u16, u16)> {
    match payload {
        [a, b, c, d] => Ok((u16::from_be_bytes([*a, *b]), u16::from_be_bytes([*c, *d]))),
        _ => Err(Error::Framing(format!(
            "CopyRect payload is {} bytes, expected 4",
            payload.len()
        ))),
    }
}

/// Copies `(src_x, src_y, dst.w, dst.h)` onto `dst`. The destination ends up
/// with the source pixels as they were before the call, even when the two
/// areas overlap.
pub fn apply_copyrect(fb: &mut Framebuffer, dst: &Rect, src_x: u16, src_y: u16) -> Result<()> {
    fb.check_rect(dst)?;
    let src = Rect::try_new(src_x.into(), src_y.into(), dst.w.into(), dst.h.into())?;
    fb.check_rect(&src).map_err(|_| {
        Error::Bounds(format!(
            "CopyRect source {}x{}+{}+{} outside {}x{}",
            src.w,
            src.h,
            src.x,
            src.y,
            fb.width(),
            fb.height()
        ))
    })?;
    let pixels = fb.read_rect(&src)?;
    fb.write_rect(dst, &pixels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PixelFormat;

    fn numbered(w: u16, h: u16) -> Framebuffer {
        let px = (0..u32::from(w) * u32::from(h)).collect();
        Framebuffer::from_pixels(w, h, PixelFormat::rgb888(), px).unwrap()
    }

    #[test]
    fn payload_layout() {
        assert_eq!(encode_copyrect(0, 0), [0, 0, 0, 0]);
        assert_eq!(encode_copyrect(16, 32), [0x00, 0x10, 0x00, 0x20]);
        assert_eq!(parse_copyrect(&[0, 16, 0, 32]).unwrap(), (16, 32));
        assert!(parse_copyrect(&[0, 1, 2]).is_err());
    }

    #[test]
    fn onto_itself_is_identity() {
        let mut fb = numbered(8, 8);
        let before = fb.clone();
        apply_copyrect(&mut fb, &Rect::new(2, 2, 4, 4), 2, 2).unwrap();
        assert_eq!(fb, before);
    }

    #[test]
    fn overlapping_scroll_matches_snapshot_copy() {
        for (dst, sx, sy) in [
            (Rect::new(0, 1, 8, 7), 0, 0),
            (Rect::new(0, 0, 8, 7), 0, 1),
            (Rect::new(1, 0, 7, 8), 0, 0),
            (Rect::new(0, 0, 7, 8), 1, 0),
        ] {
            let mut fb = numbered(8, 8);
            let snapshot = fb.clone();
            apply_copyrect(&mut fb, &dst, sx, sy).unwrap();
            for y in 0..8u16 {
                for x in 0..8u16 {
                    let want = if dst.contains_point(x.into(), y.into()) {
                        snapshot.get(x - dst.x + sx, y - dst.y + sy)
                    } else {
                        snapshot.get(x, y)
                    };
                    assert_eq!(fb.get(x, y), want, "({x},{y}) for {dst:?}");
                }
            }
        }
    }

    #[test]
    fn disjoint_copy_duplicates_source() {
        let mut fb = numbered(8, 8);
        apply_copyrect(&mut fb, &Rect::new(4, 4, 3, 2), 0, 0).unwrap();
        assert_eq!(
            fb.read_rect(&Rect::new(4, 4, 3, 2)).unwrap(),
            fb.read_rect(&Rect::new(0, 0, 3, 2)).unwrap()
        );
    }

    #[test]
    fn source_out_of_bounds() {
        let mut fb = numbered(8, 8);
        assert!(matches!(
            apply_copyrect(&mut fb, &Rect::new(0, 0, 4, 4), 6, 0),
            Err(Error::Bounds(_))
        ));
    }
}
