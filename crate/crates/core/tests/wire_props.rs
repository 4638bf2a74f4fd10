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

use proptest::prelude::*;
use rfbkit::model::{Encoding, Framebuffer, PixelFormat, Rect, RectUpdate};
use rfbkit::server::compute_damage;
use rfbkit::wire::{encode_update, read_client_message, read_server_message, ClientMessage, ServerMessage};

fn rect() -> impl Strategy<Value = Rect> {
    (any::<u16>(), any::<u16>(), any::<u16>(), any::<u16>()).prop_map(|(x, y, w, h)| Rect::new(x, y, w, h))
}

fn client_message() -> impl Strategy<Value = ClientMessage> {
    prop_oneof![
        prop::collection::vec(any::<i32>(), 0..20).prop_map(ClientMessage::SetEncodings),
        (any::<bool>(), rect())
            .prop_map(|(incremental, rect)| ClientMessage::FramebufferUpdateRequest { incremental, rect }),
        (any::<bool>(), any::<u32>()).prop_map(|(down, keysym)| ClientMessage::KeyEvent { down, keysym }),
        (any::<u8>(), any::<u16>(), any::<u16>()).prop_map(|(buttons, x, y)| ClientMessage::PointerEvent {
            buttons,
            x,
            y
        }),
        prop::collection::vec(any::<u8>(), 0..64).prop_map(ClientMessage::CutText),
        Just(ClientMessage::SetPixelFormat(PixelFormat::rgb565())),
    ]
}

proptest! {
    #[test]
    fn client_messages_roundtrip(msgs in prop::collection::vec(client_message(), 1..10)) {
        let bytes: Vec<u8> = msgs.iter().flat_map(|m| m.to_bytes()).collect();
        let mut cursor = bytes.as_slice();
        for m in &msgs {
            prop_assert_eq!(&read_client_message(&mut cursor).unwrap(), m);
        }
        prop_assert!(cursor.is_empty());
    }

    #[test]
    fn update_header_is_big_endian(x: u16, y: u16, w in 1u16..8, h in 1u16..8) {
        let u = RectUpdate::new(Rect::new(x, y, w, h), Encoding::Raw, vec![7; usize::from(w) * usize::from(h) * 4]);
        let bytes = encode_update(std::slice::from_ref(&u)).unwrap();
        prop_assert_eq!(&bytes[..4], &[0, 0, 0, 1]);
        prop_assert_eq!(&bytes[4..6], &x.to_be_bytes());
        prop_assert_eq!(&bytes[6..8], &y.to_be_bytes());
        prop_assert_eq!(&bytes[8..10], &w.to_be_bytes());
        prop_assert_eq!(&bytes[10..12], &h.to_be_bytes());
        prop_assert_eq!(&bytes[12..16], &0i32.to_be_bytes());
        let back = read_server_message(&mut bytes.as_slice(), 4).unwrap();
        prop_assert_eq!(back, ServerMessage::FramebufferUpdate(vec![u]));
    }

    #[test]
    fn damage_covers_every_change_without_overlap(
        w in 1u16..80, h in 1u16..80, tile in 1u16..33,
        edits in prop::collection::vec((any::<u16>(), any::<u16>(), 1u32..0xFFFFFF), 0..30),
    ) {
        let old = Framebuffer::new(w, h, PixelFormat::rgb888()).unwrap();
        let mut new = old.clone();
        for (x, y, v) in edits {
            new.set(x % w, y % h, v);
        }
        let region = compute_damage(&old, &new, tile).unwrap();
        let rects = region.rects();
        for (i, a) in rects.iter().enumerate() {
            prop_assert!(a.right() <= u32::from(w) && a.bottom() <= u32::from(h));
            for b in &rects[i + 1..] {
                prop_assert!(!a.intersects(b));
            }
        }
        for y in 0..h {
            for x in 0..w {
                if old.get(x, y) != new.get(x, y) {
                    prop_assert!(region.contains_point(x.into(), y.into()));
                }
            }
        }
    }
}
