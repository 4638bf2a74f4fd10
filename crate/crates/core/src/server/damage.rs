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

use crate::error::{Error, Result};
use crate::model::{normalize_unchecked, DamageRegion, Framebuffer, Rect};

pub const DEFAULT_TILE: u16 = 16;

/// Tile-granular difference between two framebuffers of the same geometry.
/// Every differing pixel is covered; the result is normalized.
pub fn compute_damage(old: &Framebuffer, new: &Framebuffer, tile: u16) -> Result<DamageRegion> {
    if old.width() != new.width() || old.height() != new.height() {
        return Err(Error::Shape(format!(
            "{}x{} vs {}x{}",
            old.width(),
            old.height(),
            new.width(),
            new.height()
        )));
    }
    if tile == 0 {
        return Err(Error::Invalid("damage tile size must be positive".into()));
    }
    let (w, h) = (old.width(), old.height());
    let mut dirty = Vec::new();
    for ty in (0..h).step_by(tile.into()) {
        let th = tile.min(h - ty);
        let mut run: Option<(u16, u16)> = None;
        for tx in (0..w).step_by(tile.into()) {
            let tw = tile.min(w - tx);
            let changed = (ty..ty + th).any(|y| old.row(tx, y, tw) != new.row(tx, y, tw));
            run = match (run, changed) {
                (Some((x0, _)), true) => Some((x0, tx + tw)),
                (None, true) => Some((tx, tx + tw)),
                (Some((x0, x1)), false) => {
                    dirty.push(Rect::new(x0, ty, x1 - x0, th));
                    None
                }
                (None, false) => None,
            };
        }
        if let Some((x0, x1)) = run {
            dirty.push(Rect::new(x0, ty, x1 - x0, th));
        }
    }
    Ok(normalize_unchecked(&dirty))
}
