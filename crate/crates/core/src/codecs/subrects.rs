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

//! Background selection and greedy subrectangle cover shared by RRE and
//! Hextile.

/// A solid-colour subrectangle relative to the block it was extracted from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Subrect {
    pub color: u32,
    pub x: u16,
    pub y: u16,
    pub w: u16,
    pub h: u16,
}

/// Most frequent value; ties go to the lowest value.
pub(crate) fn dominant(pixels: &[u32]) -> u32 {
    let mut sorted = pixels.to_vec();
    sorted.sort_unstable();
    let mut best = (0usize, sorted[0]);
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        if j - i > best.0 {
            best = (j - i, v);
        }
        i = j;
    }
    best.1
}

/// Covers every non-background pixel of a `w x h` block with solid
/// subrectangles. Scans row-major; each uncovered pixel starts a run that is
/// grown right as far as the colour holds, then down while whole rows of the
/// run match.
///
/// Returns `None` as soon as more than `limit` subrects would be needed.
pub(crate) fn greedy_cover(pixels: &[u32], w: usize, h: usize, bg: u32, limit: usize) -> Option<Vec<Subrect>> {
    debug_assert_eq!(pixels.len(), w * h);
    let mut covered = vec![false; pixels.len()];
    let mut out = Vec::new();
    for y in 0..h {
        let mut x = 0;
        while x < w {
            let i = y * w + x;
            let c = pixels[i];
            if c == bg || covered[i] {
                x += 1;
                continue;
            }
            let mut x1 = x + 1;
            while x1 < w && pixels[y * w + x1] == c && !covered[y * w + x1] {
                x1 += 1;
            }
            let mut y1 = y + 1;
            while y1 < h && (x..x1).all(|xx| pixels[y1 * w + xx] == c && !covered[y1 * w + xx]) {
                y1 += 1;
            }
            for yy in y..y1 {
                covered[yy * w + x..yy * w + x1].fill(true);
            }
            if out.len() == limit {
                return None;
            }
            out.push(Subrect {
                color: c,
                x: x as u16,
                y: y as u16,
                w: (x1 - x) as u16,
                h: (y1 - y) as u16,
            });
            x = x1;
        }
    }
    Some(out)
}

/// Number of distinct values, counting at most up to `cap`.
pub(crate) fn distinct_up_to(pixels: &[u32], cap: usize) -> usize {
    let mut seen: Vec<u32> = Vec::with_capacity(cap);
    for &p in pixels {
        if !seen.contains(&p) {
            seen.push(p);
            if seen.len() >= cap {
                break;
            }
        }
    }
    seen.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paint(w: usize, h: usize, bg: u32, subs: &[Subrect]) -> Vec<u32> {
        let mut px = vec![bg; w * h];
        for s in subs {
            for y in s.y..s.y + s.h {
                for x in s.x..s.x + s.w {
                    px[usize::from(y) * w + usize::from(x)] = s.color;
                }
            }
        }
        px
    }

    #[test]
    fn dominant_ties_lowest() {
        assert_eq!(dominant(&[5, 3, 5, 3]), 3);
        assert_eq!(dominant(&[9, 9, 1]), 9);
    }

    #[test]
    fn cover_reproduces_block() {
        let px = vec![
            1, 1, 2, 2, //
            1, 3, 2, 2, //
            1, 1, 1, 1,
        ];
        let subs = greedy_cover(&px, 4, 3, 1, usize::MAX).unwrap();
        assert_eq!(paint(4, 3, 1, &subs), px);
        assert_eq!(subs.len(), 2);
        assert_eq!(
            subs[0],
            Subrect {
                color: 2,
                x: 2,
                y: 0,
                w: 2,
                h: 2
            }
        );
    }

    #[test]
    fn limit_is_enforced() {
        let checker: Vec<u32> = (0..16).map(|i| (i % 4 + i / 4) % 2).collect();
        assert!(greedy_cover(&checker, 4, 4, 0, 3).is_none());
        assert_eq!(greedy_cover(&checker, 4, 4, 0, 8).unwrap().len(), 8);
        let stripes: Vec<u32> = (0..16).map(|i| i % 2).collect();
        assert_eq!(greedy_cover(&stripes, 4, 4, 0, 3).unwrap().len(), 2);
    }
}
