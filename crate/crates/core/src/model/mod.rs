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

//! Domain types shared by every layer: pixel formats, framebuffers,
//! rectangles, damage regions and session metrics.

mod framebuffer;
mod metrics;
mod pixel;
mod rect;
mod update;

pub use framebuffer::Framebuffer;
pub use metrics::SessionMetrics;
pub use pixel::{bytes_to_pixel, pixel_bytes, PixelFormat};
pub use rect::{region_normalize, DamageRegion, Rect};
pub use update::{Encoding, RectUpdate};

#[allow(unused_imports)]
pub(crate) use rect::normalize_unchecked;
