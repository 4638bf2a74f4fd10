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

//! Constrained-link simulation: a token bucket for bandwidth and a delivery
//! queue for one-way latency.
//!
//! Bucket arithmetic is exact integer math. Time is kept in nanoseconds and
//! tokens in bit-nanoseconds (one byte costs `8 * 10^9` tokens), so a link of
//! `rate` bits per second refills `rate` tokens per nanosecond.

use std::io::{self, Write};
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use crate::error::{Error, Result};

const NS_PER_SEC: u128 = 1_000_000_000;
const TOKENS_PER_BYTE: u128 = 8 * NS_PER_SEC;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkConfig {
    /// Bits per second.
    pub rate_bps: u64,
    /// Bucket depth in bytes; also the largest chunk released at once.
    pub burst: u64,
    /// One-way delay added to every delivery.
    pub latency: Duration,
}

impl LinkConfig {
    pub fn new(rate_bps: u64, burst: u64, latency: Duration) -> Result<Self> {
        let link = Self {
            rate_bps,
            burst,
            latency,
        };
        link.validate()?;
        Ok(link)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rate_bps == 0 {
            return Err(Error::Invalid("link rate must be positive".into()));
        }
        if self.burst == 0 {
            return Err(Error::Invalid("link burst must be positive".into()));
        }
        Ok(())
    }
}

/// Source of time for pacing. Nanoseconds since an arbitrary origin.
pub trait LinkClock {
    fn now_ns(&self) -> u64;
    fn sleep_until(&self, ns: u64);
}

#[derive(Debug, Clone, Copy)]
pub struct WallClock {
    origin: Instant,
}

impl WallClock {
    pub fn new() -> Self {
        Self { origin: Instant::now() }
    }

    pub fn instant(&self, ns: u64) -> Instant {
        self.origin + Duration::from_nanos(ns)
    }
}

impl Default for WallClock {
    fn default() -> Self {
        Self::new()
    }
}

impl LinkClock for WallClock {
    fn now_ns(&self) -> u64 {
        self.origin.elapsed().as_nanos() as u64
    }

    fn sleep_until(&self, ns: u64) {
        let now = self.now_ns();
        if ns > now {
            thread::sleep(Duration::from_nanos(ns - now));
        }
    }
}

/// A clock that only moves when slept on. Sleeping jumps straight to the
/// target time.
#[derive(Debug, Default)]
pub struct ManualClock {
    now: std::cell::Cell<u64>,
}

impl ManualClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn advance(&self, ns: u64) {
        self.now.set(self.now.get() + ns);
    }
}

impl LinkClock for ManualClock {
    fn now_ns(&self) -> u64 {
        self.now.get()
    }

    fn sleep_until(&self, ns: u64) {
        self.now.set(self.now.get().max(ns));
    }
}

/// Token bucket holding at most `burst` bytes worth of credit. It starts
/// empty, so the very first byte already waits for its share of the rate.
#[derive(Debug, Clone)]
pub struct TokenBucket {
    rate_bps: u64,
    capacity: u128,
    tokens: u128,
    last_ns: u64,
}

impl TokenBucket {
    pub fn new(link: &LinkConfig, now_ns: u64) -> Self {
        Self {
            rate_bps: link.rate_bps,
            capacity: u128::from(link.burst) * TOKENS_PER_BYTE,
            tokens: 0,
            last_ns: now_ns,
        }
    }

    fn refill(&mut self, now_ns: u64) {
        if now_ns > self.last_ns {
            let gained = u128::from(now_ns - self.last_ns) * u128::from(self.rate_bps);
            self.tokens = (self.tokens + gained).min(self.capacity);
            self.last_ns = now_ns;
        }
    }

    /// Earliest time at which `bytes` can be released. `bytes` must not
    /// exceed the burst.
    pub fn ready_at(&mut self, bytes: u64, now_ns: u64) -> u64 {
        self.refill(now_ns);
        let need = u128::from(bytes) * TOKENS_PER_BYTE;
        debug_assert!(need <= self.capacity, "chunk larger than burst");
        if self.tokens >= need {
            return now_ns;
        }
        let missing = need - self.tokens;
        let wait = missing.div_ceil(u128::from(self.rate_bps));
        now_ns + wait as u64
    }

    /// Spends the tokens for `bytes` at `now_ns`; the caller has waited
    /// until [`TokenBucket::ready_at`].
    pub fn take(&mut self, bytes: u64, now_ns: u64) {
        self.refill(now_ns);
        let need = u128::from(bytes) * TOKENS_PER_BYTE;
        debug_assert!(self.tokens >= need);
        self.tokens -= need.min(self.tokens);
    }
}

/// Paces writes through a token bucket on a given clock, logging when each
/// chunk left the bucket.
#[derive(Debug)]
pub struct Throttle<C: LinkClock> {
    link: LinkConfig,
    bucket: TokenBucket,
    clock: C,
    releases: Option<Vec<(u64, u64)>>,
}

impl<C: LinkClock> Throttle<C> {
    pub fn new(link: LinkConfig, clock: C) -> Self {
        let bucket = TokenBucket::new(&link, clock.now_ns());
        Self {
            link,
            bucket,
            clock,
            releases: None,
        }
    }

    pub fn link(&self) -> &LinkConfig {
        &self.link
    }

    pub fn clock(&self) -> &C {
        &self.clock
    }

    /// Keeps a `(time_ns, bytes)` record of every chunk released.
    pub fn record_releases(&mut self) {
        self.releases.get_or_insert_with(Vec::new);
    }

    pub fn releases(&self) -> &[(u64, u64)] {
        self.releases.as_deref().unwrap_or(&[])
    }

    /// Waits for tokens for one chunk of at most `burst` bytes and returns
    /// its release time.
    pub fn pace(&mut self, bytes: u64) -> u64 {
        let at = self.bucket.ready_at(bytes, self.clock.now_ns());
        self.clock.sleep_until(at);
        let now = self.clock.now_ns().max(at);
        self.bucket.take(bytes, now);
        if let Some(log) = self.releases.as_mut() {
            log.push((now, bytes));
        }
        now
    }

    /// Pushes `len` bytes through the link in burst-sized chunks and waits
    /// for the last of them to arrive. Returns the arrival time.
    pub fn throttle_write(&mut self, len: u64) -> u64 {
        let mut released = self.clock.now_ns();
        let mut left = len;
        while left > 0 {
            let chunk = left.min(self.link.burst);
            released = self.pace(chunk);
            left -= chunk;
        }
        let arrival = released + self.link.latency.as_nanos() as u64;
        self.clock.sleep_until(arrival);
        arrival
    }
}

enum Delivery {
    Data(Instant, Vec<u8>),
    Flush(mpsc::Sender<io::Result<()>>),
}

/// A writer behind a simulated link. Writes are paced in the caller's
/// thread; a delivery thread hands each chunk to the inner writer once its
/// latency has elapsed. `flush` returns when everything written so far has
/// been delivered.
pub struct ThrottledWriter {
    throttle: Throttle<WallClock>,
    tx: Option<mpsc::Sender<Delivery>>,
    handle: Option<JoinHandle<()>>,
    error: Arc<Mutex<Option<io::ErrorKind>>>,
}

impl ThrottledWriter {
    pub fn new<W: Write + Send + 'static>(inner: W, link: LinkConfig) -> Self {
        let (tx, rx) = mpsc::channel::<Delivery>();
        let error = Arc::new(Mutex::new(None));
        let err = error.clone();
        let handle = thread::spawn(move || {
            let mut inner = inner;
            let mut failed: Option<io::ErrorKind> = None;
            for msg in rx {
                match msg {
                    Delivery::Data(due, bytes) => {
                        if failed.is_some() {
                            continue;
                        }
                        if let Some(wait) = due.checked_duration_since(Instant::now()) {
                            thread::sleep(wait);
                        }
                        if let Err(e) = inner.write_all(&bytes) {
                            failed = Some(e.kind());
                            *err.lock().unwrap_or_else(|p| p.into_inner()) = Some(e.kind());
                        }
                    }
                    Delivery::Flush(ack) => {
                        let res = match failed {
                            Some(kind) => Err(io::Error::from(kind)),
                            None => inner.flush(),
                        };
                        let _ = ack.send(res);
                    }
                }
            }
        });
        Self {
            throttle: Throttle::new(link, WallClock::new()),
            tx: Some(tx),
            handle: Some(handle),
            error,
        }
    }

    fn check(&self) -> io::Result<()> {
        match *self.error.lock().unwrap_or_else(|p| p.into_inner()) {
            Some(kind) => Err(io::Error::from(kind)),
            None => Ok(()),
        }
    }

    fn send(&self, d: Delivery) -> io::Result<()> {
        self.tx
            .as_ref()
            .and_then(|tx| tx.send(d).ok())
            .ok_or_else(|| io::Error::from(io::ErrorKind::BrokenPipe))
    }
}

impl Write for ThrottledWriter {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.check()?;
        let latency = self.throttle.link().latency;
        for chunk in buf.chunks(self.throttle.link().burst as usize) {
            let released = self.throttle.pace(chunk.len() as u64);
            let due = self.throttle.clock().instant(released) + latency;
            self.send(Delivery::Data(due, chunk.to_vec()))?;
        }
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        let (ack_tx, ack_rx) = mpsc::channel();
        self.send(Delivery::Flush(ack_tx))?;
        ack_rx
            .recv()
            .unwrap_or_else(|_| Err(io::Error::from(io::ErrorKind::BrokenPipe)))
    }
}

impl Drop for ThrottledWriter {
    fn drop(&mut self) {
        self.tx = None;
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn link(rate: u64, burst: u64, latency_ms: u64) -> LinkConfig {
        LinkConfig::new(rate, burst, Duration::from_millis(latency_ms)).unwrap()
    }

    /// Checks every window between two releases: bytes released within it
    /// never exceed what the rate allows plus one burst.
    fn audit(releases: &[(u64, u64)], rate: u64, burst: u64) -> bool {
        for i in 0..releases.len() {
            let mut sum = 0u128;
            for j in i..releases.len() {
                sum += u128::from(releases[j].1);
                let span = u128::from(releases[j].0 - releases[i].0);
                if sum * 8 * 1_000_000_000 > u128::from(rate) * span + u128::from(burst) * 8 * 1_000_000_000 {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn one_megabyte_at_eight_megabit() {
        let mut t = Throttle::new(link(8_000_000, 64 * 1024, 40), ManualClock::new());
        let done = t.throttle_write(1_000_000);
        assert!(done >= 1_000_000_000 + 40_000_000, "{done}");
        // Not much later either: only rounding in the last chunk.
        assert!(done <= 1_000_000_000 + 40_000_000 + 1_000, "{done}");
    }

    #[test]
    fn empty_write_costs_latency_only() {
        let mut t = Throttle::new(link(8_000_000, 1024, 25), ManualClock::new());
        assert_eq!(t.throttle_write(0), 25_000_000);
    }

    #[test]
    fn idle_time_banks_at_most_one_burst() {
        let clock = ManualClock::new();
        clock.advance(10_000_000_000);
        let mut t = Throttle::new(link(8_000, 100, 0), clock);
        t.clock().advance(10_000_000_000);
        let start = t.clock().now_ns();
        t.throttle_write(100);
        assert_eq!(t.clock().now_ns(), start, "a full burst is free after idling");
        t.throttle_write(1);
        assert_eq!(
            t.clock().now_ns() - start,
            1_000_000,
            "next byte waits 1 ms at 8 kbit/s"
        );
    }

    #[test]
    fn rejects_zero_rate() {
        assert!(LinkConfig::new(0, 1, Duration::ZERO).is_err());
        assert!(LinkConfig::new(1, 0, Duration::ZERO).is_err());
    }

    #[test]
    fn writer_delivers_in_order_with_delay() {
        let (a, mut b) = crate::wire::pipe().unwrap();
        let mut w = ThrottledWriter::new(a, link(80_000_000, 4096, 30));
        let data: Vec<u8> = (0..50_000u32).map(|i| i as u8).collect();
        let start = Instant::now();
        w.write_all(&data).unwrap();
        w.flush().unwrap();
        assert!(start.elapsed() >= Duration::from_millis(30 + 5));
        drop(w);
        let mut got = Vec::new();
        std::io::Read::read_to_end(&mut b, &mut got).unwrap();
        assert_eq!(got, data);
    }

    proptest! {
        #[test]
        fn window_bound_holds(
            rate in 1_000u64..100_000_000,
            burst in 1u64..20_000,
            writes in prop::collection::vec((0u64..50_000, 0u64..5_000_000), 1..40),
        ) {
            let mut t = Throttle::new(LinkConfig::new(rate, burst, Duration::ZERO).unwrap(), ManualClock::new());
            t.record_releases();
            for (len, gap) in writes {
                t.clock().advance(gap);
                t.throttle_write(len);
            }
            prop_assert!(audit(t.releases(), rate, burst));
        }
    }
}
