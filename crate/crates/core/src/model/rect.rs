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

//! Rectangles and damage regions.

use crate::error::{Error, Result};

/// Axis-aligned rectangle with a top-left origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rect {
    pub x: u16,
    pub y: u16,
    pub w: u16,
    pub h: u16,
}

impl Rect {
    pub const fn new(x: u16, y: u16, w: u16, h: u16) -> Self {
        Self { x, y, w, h }
    }

    /// Checked constructor enforcing `w, h >= 1` and that the far edges stay
    /// inside the 16-bit coordinate space.
    pub fn try_new(x: u32, y: u32, w: u32, h: u32) -> Result<Self> {
        if w == 0 || h == 0 {
            return Err(Error::Bounds(format!("empty rect {w}x{h}")));
        }
        if x + w > 0xFFFF || y + h > 0xFFFF {
            return Err(Error::Bounds(format!(
                "rect {w}x{h}+{x}+{y} exceeds 16-bit coordinates"
            )));
        }
        Ok(Self::new(x as u16, y as u16, w as u16, h as u16))
    }

    pub fn right(&self) -> u32 {
        u32::from(self.x) + u32::from(self.w)
    }

    pub fn bottom(&self) -> u32 {
        u32::from(self.y) + u32::from(self.h)
    }

    pub fn area(&self) -> u64 {
        u64::from(self.w) * u64::from(self.h)
    }

    pub fn is_empty(&self) -> bool {
        self.w == 0 || self.h == 0
    }

    pub fn contains_point(&self, x: u32, y: u32) -> bool {
        x >= u32::from(self.x) && x < self.right() && y >= u32::from(self.y) && y < self.bottom()
    }

    /// True when `other` lies entirely inside `self`.
    pub fn contains(&self, other: &Rect) -> bool {
        other.x >= self.x && other.y >= self.y && other.right() <= self.right() && other.bottom() <= self.bottom()
    }

    pub fn intersect(&self, other: &Rect) -> Option<Rect> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        if u32::from(x0) >= x1 || u32::from(y0) >= y1 {
            return None;
        }
        Some(Rect::new(
            x0,
            y0,
            (x1 - u32::from(x0)) as u16,
            (y1 - u32::from(y0)) as u16,
        ))
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.intersect(other).is_some()
    }

    /// `self` minus `cut`, as up to four disjoint pieces.
    pub fn subtract(&self, cut: &Rect) -> Vec<Rect> {
        let Some(i) = self.intersect(cut) else {
            return vec![*self];
        };
        let mut out = Vec::with_capacity(4);
        if i.y > self.y {
            out.push(Rect::new(self.x, self.y, self.w, i.y - self.y));
        }
        if i.x > self.x {
            out.push(Rect::new(self.x, i.y, i.x - self.x, i.h));
        }
        if i.right() < self.right() {
            out.push(Rect::new(i.right() as u16, i.y, (self.right() - i.right()) as u16, i.h));
        }
        if i.bottom() < self.bottom() {
            out.push(Rect::new(
                self.x,
                i.bottom() as u16,
                self.w,
                (self.bottom() - i.bottom()) as u16,
            ));
        }
        out
    }

    /// Fails unless the rect lies within a `width` x `height` surface.
    pub fn check_within(&self, width: u16, height: u16) -> Result<()> {
        if self.is_empty() || self.right() > u32::from(width) || self.bottom() > u32::from(height) {
            return Err(Error::Bounds(format!(
                "rect {}x{}+{}+{} outside {}x{}",
                self.w, self.h, self.x, self.y, width, height
            )));
        }
        Ok(())
    }
}

/// A set of pairwise-disjoint rectangles, ordered top-to-bottom then
/// left-to-right.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DamageRegion {
    rects: Vec<Rect>,
}

impl DamageRegion {
    pub fn new() -> Self {
        Self::default()
    }

    /// A region made of a single rectangle.
    pub fn from_rect(r: Rect) -> Self {
        Self { rects: vec![r] }
    }

    /// Wraps rects that are already pairwise disjoint, keeping them as they
    /// are instead of re-banding. Empty rects are dropped.
    pub fn from_disjoint(mut rects: Vec<Rect>) -> Result<Self> {
        rects.retain(|r| !r.is_empty());
        for (i, a) in rects.iter().enumerate() {
            if let Some(b) = rects[i + 1..].iter().find(|b| a.intersects(b)) {
                return Err(Error::Invalid(format!("{a:?} overlaps {b:?}")));
            }
        }
        rects.sort_by_key(|r| (r.y, r.x));
        Ok(Self { rects })
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    pub fn into_rects(self) -> Vec<Rect> {
        self.rects
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rects.len()
    }

    /// Total number of covered pixels.
    pub fn area(&self) -> u64 {
        self.rects.iter().map(Rect::area).sum()
    }

    pub fn union(&self, other: &DamageRegion) -> DamageRegion {
        if other.is_empty() {
            return self.clone();
        }
        if self.is_empty() {
            return other.clone();
        }
        let all: Vec<Rect> = self.rects.iter().chain(other.rects.iter()).copied().collect();
        normalize_unchecked(&all)
    }

    pub fn add_rect(&mut self, r: Rect) {
        if r.is_empty() || self.rects.iter().any(|d| d.contains(&r)) {
            return;
        }
        self.rects.push(r);
        self.rects = normalize_unchecked(&self.rects).rects;
    }

    pub fn intersect_rect(&self, clip: &Rect) -> DamageRegion {
        // Clipping disjoint rects keeps them disjoint; re-normalize to merge.
        let clipped: Vec<Rect> = self.rects.iter().filter_map(|r| r.intersect(clip)).collect();
        normalize_unchecked(&clipped)
    }

    pub fn subtract_rect(&self, cut: &Rect) -> DamageRegion {
        let pieces: Vec<Rect> = self.rects.iter().flat_map(|r| r.subtract(cut)).collect();
        normalize_unchecked(&pieces)
    }

    pub fn intersects(&self, r: &Rect) -> bool {
        self.rects.iter().any(|d| d.intersects(r))
    }

    pub fn contains_point(&self, x: u32, y: u32) -> bool {
        self.rects.iter().any(|r| r.contains_point(x, y))
    }
}

/// One horizontal band: top, bottom, and its `[x0, x1)` runs.
type Band = (u32, u32, Vec<(u32, u32)>);

/// Turns an arbitrary list of rects inside a `width` x `height` surface into a
/// disjoint region covering exactly the same pixels.
pub fn region_normalize(rects: &[Rect], width: u16, height: u16) -> Result<DamageRegion> {
    for r in rects {
        r.check_within(width, height)?;
    }
    Ok(normalize_unchecked(rects))
}

/// Band decomposition: cut at every distinct top/bottom edge, merge the
/// x-intervals inside each band, then fuse vertically adjacent bands whose
/// runs are identical.
pub(crate) fn normalize_unchecked(rects: &[Rect]) -> DamageRegion {
    let rects: Vec<&Rect> = rects.iter().filter(|r| !r.is_empty()).collect();
    if rects.len() <= 1 {
        return DamageRegion {
            rects: rects.into_iter().copied().collect(),
        };
    }
    let mut edges: Vec<u32> = rects.iter().flat_map(|r| [u32::from(r.y), r.bottom()]).collect();
    edges.sort_unstable();
    edges.dedup();

    // (band top, band bottom, runs) with runs as [x0, x1) intervals.
    let mut bands: Vec<Band> = Vec::new();
    for pair in edges.windows(2) {
        let (top, bottom) = (pair[0], pair[1]);
        let mut spans: Vec<(u32, u32)> = rects
            .iter()
            .filter(|r| u32::from(r.y) <= top && r.bottom() >= bottom)
            .map(|r| (u32::from(r.x), r.right()))
            .collect();
        if spans.is_empty() {
            continue;
        }
        spans.sort_unstable();
        let mut runs: Vec<(u32, u32)> = Vec::with_capacity(spans.len());
        for (a, b) in spans {
            match runs.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => runs.push((a, b)),
            }
        }
        match bands.last_mut() {
            Some(prev) if prev.1 == top && prev.2 == runs => prev.1 = bottom,
            _ => bands.push((top, bottom, runs)),
        }
    }

    let mut out = Vec::new();
    for (top, bottom, runs) in bands {
        for (a, b) in runs {
            out.push(Rect::new(a as u16, top as u16, (b - a) as u16, (bottom - top) as u16));
        }
    }
    DamageRegion { rects: out }
}
