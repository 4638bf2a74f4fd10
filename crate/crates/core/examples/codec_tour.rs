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

//! Encodes one frame of the reference desktop with every encoding and checks
//! that each payload decodes back to the same pixels.

use rfbkit::codecs::{EncodingChoice, RectDecoder, RectEncoder};
use rfbkit::model::{Encoding, Framebuffer};
use rfbkit::server::{Scenario, Scene};

fn main() -> rfbkit::Result<()> {
    let mut scene = Scene::new(Scenario::reference(42));
    scene.step_scene(7.0);
    let fb = scene.framebuffer();
    let layout = scene.layout();

    for (label, rect) in [("whole screen", fb.bounds()), ("music bars", layout.bars)] {
        println!("{label}: {}x{} at ({},{})", rect.w, rect.h, rect.x, rect.y);
        let raw_len = rect.area() as usize * fb.format().bytes_per_pixel();
        for encoding in [Encoding::Raw, Encoding::Rre, Encoding::Hextile, Encoding::Zlib] {
            let mut enc = RectEncoder::new(EncodingChoice::strict(encoding));
            let update = enc.encode(fb, &rect)?;
            let mut copy = Framebuffer::new(fb.width(), fb.height(), *fb.format())?;
            RectDecoder::new().apply(&update, &mut copy)?;
            assert!(copy.region_eq(fb, &rect));
            println!(
                "  {:<8} {:>9} bytes  ratio {:>6.2}",
                encoding.name(),
                update.payload.len(),
                raw_len as f64 / update.payload.len() as f64
            );
        }
    }
    Ok(())
}
