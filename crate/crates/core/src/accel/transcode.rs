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

use crate::codecs::{RectDecoder, RectEncoder};
use crate::error::Result;
use crate::model::{normalize_unchecked, DamageRegion, Framebuffer, RectUpdate};

/// Applies `incoming` to `shadow` in order, then re-encodes the union of
/// their rectangles from the updated shadow. CopyRect input is absorbed:
/// its destination goes out as pixels, not as a copy.
pub fn transcode_update(
    shadow: &mut Framebuffer,
    incoming: &[RectUpdate],
    decoder: &mut RectDecoder,
    encoder: &mut RectEncoder,
) -> Result<Vec<RectUpdate>> {
    for u in incoming {
        decoder.apply(u, shadow)?;
    }
    let rects: Vec<_> = incoming.iter().map(|u| u.rect).collect();
    encode_region(shadow, &normalize_unchecked(&rects), encoder)
}

/// Encodes every rectangle of `region` from `fb`.
pub fn encode_region(fb: &Framebuffer, region: &DamageRegion, encoder: &mut RectEncoder) -> Result<Vec<RectUpdate>> {
    region.rects().iter().map(|r| encoder.encode(fb, r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codecs::{encode_copyrect, encode_raw, EncodingChoice};
    use crate::model::{Encoding, PixelFormat, Rect};

    fn noisy(w: u16, h: u16, seed: u32) -> Framebuffer {
        let px = (0..u32::from(w) * u32::from(h))
            .map(|i| (i.wrapping_mul(2654435761) ^ seed) & 0xFF_FFFF)
            .collect();
        Framebuffer::from_pixels(w, h, PixelFormat::rgb888(), px).unwrap()
    }

    #[test]
    fn raw_tile_keeps_geometry() {
        let src = noisy(32, 32, 1);
        let r = Rect::new(16, 0, 16, 16);
        let incoming = [RectUpdate::new(r, Encoding::Raw, encode_raw(&src, &r).unwrap())];
        for enc in [Encoding::Raw, Encoding::Rre, Encoding::Hextile, Encoding::Zlib] {
            let mut shadow = Framebuffer::new(32, 32, PixelFormat::rgb888()).unwrap();
            let mut encoder = RectEncoder::new(EncodingChoice::strict(enc));
            let out = transcode_update(&mut shadow, &incoming, &mut RectDecoder::new(), &mut encoder).unwrap();
            assert_eq!(out.len(), 1);
            assert_eq!(out[0].rect, r);
            assert_eq!(out[0].encoding, enc);
            let mut view = Framebuffer::new(32, 32, PixelFormat::rgb888()).unwrap();
            RectDecoder::new().apply(&out[0], &mut view).unwrap();
            assert!(view.region_eq(&shadow, &r));
            assert!(shadow.region_eq(&src, &r));
        }
    }

    #[test]
    fn copyrect_is_absorbed() {
        let mut shadow = noisy(40, 40, 7);
        let before = shadow.clone();
        let dst = Rect::new(0, 20, 40, 20);
        let incoming = [RectUpdate::new(dst, Encoding::CopyRect, encode_copyrect(0, 0).to_vec())];
        let mut encoder = RectEncoder::new(EncodingChoice::new(Encoding::Hextile));
        let out = transcode_update(&mut shadow, &incoming, &mut RectDecoder::new(), &mut encoder).unwrap();
        assert!(out.iter().all(|u| u.encoding != Encoding::CopyRect));
        assert_eq!(
            shadow.read_rect(&dst).unwrap(),
            before.read_rect(&Rect::new(0, 0, 40, 20)).unwrap()
        );
        // A viewer holding the old picture ends up with the shadow.
        let mut view = before;
        let mut dec = RectDecoder::new();
        for u in &out {
            dec.apply(u, &mut view).unwrap();
        }
        assert_eq!(view, shadow);
    }

    #[test]
    fn empty_in_empty_out() {
        let mut shadow = noisy(8, 8, 0);
        let mut encoder = RectEncoder::new(EncodingChoice::new(Encoding::Zlib));
        assert!(
            transcode_update(&mut shadow, &[], &mut RectDecoder::new(), &mut encoder)
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn overlapping_input_is_sent_once() {
        let src = noisy(32, 32, 3);
        let a = Rect::new(0, 0, 20, 20);
        let b = Rect::new(10, 10, 20, 20);
        let incoming = [
            RectUpdate::new(a, Encoding::Raw, encode_raw(&src, &a).unwrap()),
            RectUpdate::new(b, Encoding::Raw, encode_raw(&src, &b).unwrap()),
        ];
        let mut shadow = Framebuffer::new(32, 32, PixelFormat::rgb888()).unwrap();
        let mut encoder = RectEncoder::new(EncodingChoice::new(Encoding::Raw));
        let out = transcode_update(&mut shadow, &incoming, &mut RectDecoder::new(), &mut encoder).unwrap();
        let area: u64 = out.iter().map(|u| u.rect.area()).sum();
        assert_eq!(area, 400 + 400 - 100);
    }
}
