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

use std::fmt;

/// Per-session transfer statistics, one row of the encoding comparison table.
///
/// Only the raw counters are stored; the rate and the ratio are derived so
/// the identities between them cannot drift.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SessionMetrics {
    pub updates: u64,
    pub duration_s: f64,
    pub rectangles: u64,
    /// Raw-equivalent size of every rectangle sent: `w * h * bytes_per_pixel`.
    pub captured_bytes: u64,
    /// Encoded payload bytes on the wire, excluding rectangle headers.
    pub compressed_bytes: u64,
}

impl SessionMetrics {
    pub fn updates_per_second(&self) -> f64 {
        if self.duration_s > 0.0 {
            self.updates as f64 / self.duration_s
        } else {
            0.0
        }
    }

    /// `captured / compressed`; 0 when nothing was sent.
    pub fn compression_ratio(&self) -> f64 {
        if self.compressed_bytes > 0 {
            self.captured_bytes as f64 / self.compressed_bytes as f64
        } else {
            0.0
        }
    }

    /// Accounts one rectangle of `w x h` pixels whose payload was
    /// `payload_len` bytes.
    pub fn record_rect(&mut self, w: u16, h: u16, bytes_per_pixel: usize, payload_len: usize) {
        self.rectangles += 1;
        self.captured_bytes += u64::from(w) * u64::from(h) * bytes_per_pixel as u64;
        self.compressed_bytes += payload_len as u64;
    }

    pub fn record_update(&mut self) {
        self.updates += 1;
    }
}

impl fmt::Display for SessionMetrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} updates in {:.3}s ({:.3}/s), {} rects, {} B captured, {} B sent, ratio {:.2}",
            self.updates,
            self.duration_s,
            self.updates_per_second(),
            self.rectangles,
            self.captured_bytes,
            self.compressed_bytes,
            self.compression_ratio()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn table_rows() {
        let hextile = SessionMetrics {
            captured_bytes: 26_530_000,
            compressed_bytes: 5_640_000,
            ..Default::default()
        };
        assert!((hextile.compression_ratio() - 4.70).abs() <= 0.01);
        let zlib = SessionMetrics {
            captured_bytes: 91_700_000,
            compressed_bytes: 8_900_000,
            ..Default::default()
        };
        assert!((zlib.compression_ratio() - 10.30).abs() <= 0.01);
    }

    proptest! {
        #[test]
        fn identities(rects in prop::collection::vec((1u16..200, 1u16..200, 0usize..200_000), 1..20),
                      updates in 1u64..100, duration in 0.1f64..100.0) {
            let mut m = SessionMetrics { duration_s: duration, ..Default::default() };
            let mut captured = 0u64;
            for &(w, h, len) in &rects {
                m.record_rect(w, h, 4, len);
                captured += u64::from(w) * u64::from(h) * 4;
            }
            for _ in 0..updates {
                m.record_update();
            }
            prop_assert_eq!(m.captured_bytes, captured);
            prop_assert_eq!(m.rectangles, rects.len() as u64);
            let ups = m.updates_per_second();
            prop_assert!((ups - updates as f64 / duration).abs() <= 1e-9 * ups.abs().max(1.0));
            if m.compressed_bytes > 0 {
                prop_assert_eq!(m.compression_ratio(), captured as f64 / m.compressed_bytes as f64);
            }
        }
    }
}
