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

//! Headless viewer: keeps a decoded framebuffer in sync with a server by
//! requesting an incremental update as soon as the previous one arrives.

use std::io::Write;
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use crate::codecs::RectDecoder;
use crate::error::{Error, Result};
use crate::model::{Encoding, Framebuffer, PixelFormat, Rect, SessionMetrics};
use crate::wire::{client_handshake, read_update, ClientMessage, Closer, HandshakeResult, Transport};

#[derive(Debug, Clone)]
pub struct ClientConfig {
    /// Encodings in order of preference.
    pub encodings: Vec<Encoding>,
    /// Pixel format to ask for; the server's own when `None`.
    pub format: Option<PixelFormat>,
    pub shared: bool,
}

impl ClientConfig {
    pub fn new(encoding: Encoding) -> Self {
        Self {
            encodings: vec![encoding],
            format: None,
            shared: true,
        }
    }

    /// Also offers CopyRect ahead of the main encoding.
    pub fn with_copyrect(mut self) -> Self {
        if !self.encodings.contains(&Encoding::CopyRect) {
            self.encodings.insert(0, Encoding::CopyRect);
        }
        self
    }
}

struct State {
    fb: Framebuffer,
    metrics: SessionMetrics,
    error: Option<String>,
    done: bool,
}

type Shared = Arc<(Mutex<State>, Condvar)>;

pub struct HeadlessClient {
    shared: Shared,
    writer: Arc<Mutex<Box<dyn Write + Send>>>,
    closer: Closer,
    reader: Option<JoinHandle<()>>,
    server: HandshakeResult,
    started: Instant,
}

impl std::fmt::Debug for HeadlessClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HeadlessClient")
            .field("server", &self.server.name)
            .finish()
    }
}

impl HeadlessClient {
    /// Handshakes, negotiates, asks for a full frame and starts the update
    /// loop in a background thread.
    pub fn connect<T: Transport>(mut conn: T, config: &ClientConfig) -> Result<Self> {
        let server = client_handshake(&mut conn, config.shared)?;
        let format = config.format.unwrap_or(server.format);
        format.validate()?;
        let halves = conn.split()?;
        let mut writer = halves.writer;
        if format != server.format {
            ClientMessage::SetPixelFormat(format).write_to(&mut writer)?;
        }
        ClientMessage::SetEncodings(config.encodings.iter().map(|e| e.id()).collect()).write_to(&mut writer)?;
        let full = Rect::new(0, 0, server.width, server.height);
        ClientMessage::FramebufferUpdateRequest {
            incremental: false,
            rect: full,
        }
        .write_to(&mut writer)?;

        let shared: Shared = Arc::new((
            Mutex::new(State {
                fb: Framebuffer::new(server.width, server.height, format)?,
                metrics: SessionMetrics::default(),
                error: None,
                done: false,
            }),
            Condvar::new(),
        ));
        let writer = Arc::new(Mutex::new(writer));
        let reader = {
            let shared = shared.clone();
            let writer = writer.clone();
            let mut conn = halves.reader;
            thread::spawn(move || {
                let mut fb = Framebuffer::new(full.w, full.h, format).expect("valid size");
                let mut decoder = RectDecoder::new();
                let bpp = format.bytes_per_pixel();
                let res = (|| -> Result<()> {
                    loop {
                        let rects = read_update(&mut conn, &mut fb, &mut decoder)?;
                        {
                            let mut w = writer.lock().unwrap_or_else(|e| e.into_inner());
                            ClientMessage::FramebufferUpdateRequest {
                                incremental: true,
                                rect: full,
                            }
                            .write_to(&mut *w)?;
                        }
                        let mut st = shared.0.lock().unwrap_or_else(|e| e.into_inner());
                        st.metrics.record_update();
                        for u in &rects {
                            st.metrics.record_rect(u.rect.w, u.rect.h, bpp, u.payload.len());
                            let pixels = fb.read_rect(&u.rect)?;
                            st.fb.write_rect(&u.rect, &pixels)?;
                        }
                        drop(st);
                        shared.1.notify_all();
                    }
                })();
                let mut st = shared.0.lock().unwrap_or_else(|e| e.into_inner());
                if let Err(e) = res {
                    if !e.is_disconnect() {
                        st.error = Some(e.to_string());
                    }
                }
                st.done = true;
                drop(st);
                shared.1.notify_all();
            })
        };
        Ok(Self {
            shared,
            writer,
            closer: halves.closer,
            reader: Some(reader),
            server,
            started: Instant::now(),
        })
    }

    fn state(&self) -> MutexGuard<'_, State> {
        self.shared.0.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn server(&self) -> &HandshakeResult {
        &self.server
    }

    pub fn framebuffer(&self) -> Framebuffer {
        self.state().fb.clone()
    }

    pub fn with_framebuffer<T>(&self, f: impl FnOnce(&Framebuffer) -> T) -> T {
        f(&self.state().fb)
    }

    /// Counters so far; `duration_s` is the time since connecting.
    pub fn metrics(&self) -> SessionMetrics {
        SessionMetrics {
            duration_s: self.started.elapsed().as_secs_f64(),
            ..self.state().metrics
        }
    }

    /// The error that stopped the update loop, if any.
    pub fn error(&self) -> Option<String> {
        self.state().error.clone()
    }

    pub fn send(&self, msg: &ClientMessage) -> Result<()> {
        let mut w = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        msg.write_to(&mut *w)
    }

    /// Blocks until `pred` holds for the framebuffer, checking after every
    /// received update. Fails on timeout or when the connection ends first.
    pub fn wait_until(&self, timeout: Duration, mut pred: impl FnMut(&Framebuffer) -> bool) -> Result<()> {
        let deadline = Instant::now() + timeout;
        let mut st = self.state();
        loop {
            if pred(&st.fb) {
                return Ok(());
            }
            if st.done {
                return Err(Error::Protocol(format!(
                    "connection ended before convergence: {}",
                    st.error.as_deref().unwrap_or("closed by peer")
                )));
            }
            let now = Instant::now();
            if now >= deadline {
                return Err(Error::Transport(std::io::Error::new(
                    std::io::ErrorKind::TimedOut,
                    "timed out waiting for the framebuffer",
                )));
            }
            st = self
                .shared
                .1
                .wait_timeout(st, deadline - now)
                .unwrap_or_else(|e| e.into_inner())
                .0;
        }
    }

    /// Waits until the framebuffer equals `target`.
    pub fn wait_for(&self, target: &Framebuffer, timeout: Duration) -> Result<()> {
        self.wait_until(timeout, |fb| fb.pixels() == target.pixels())
    }

    /// Closes the connection and returns the final framebuffer and counters.
    pub fn close(mut self) -> (Framebuffer, SessionMetrics) {
        let metrics = self.metrics();
        self.closer.close();
        if let Some(h) = self.reader.take() {
            let _ = h.join();
        }
        (self.state().fb.clone(), metrics)
    }
}

impl Drop for HeadlessClient {
    fn drop(&mut self) {
        self.closer.close();
        if let Some(h) = self.reader.take() {
            let _ = h.join();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::server::{serve_session, ClockMode, Scenario, Scene, ServerPolicy, SharedScene};
    use crate::wire::pipe;

    fn server() -> (SharedScene, std::os::unix::net::UnixStream) {
        let scene = SharedScene::new(Scene::new(Scenario::reference(3)), ClockMode::Virtual);
        let (a, b) = pipe().unwrap();
        let s = scene.clone();
        thread::spawn(move || serve_session(a, &s, &ServerPolicy::default()));
        (scene, b)
    }

    #[test]
    fn converges_through_scene_changes() {
        for enc in [Encoding::Raw, Encoding::Rre, Encoding::Hextile, Encoding::Zlib] {
            let (scene, conn) = server();
            let client = HeadlessClient::connect(conn, &ClientConfig::new(enc)).unwrap();
            let timeout = Duration::from_secs(10);
            client.wait_for(&scene.snapshot(), timeout).unwrap();
            for t in [0.3, 0.9, 2.6, 7.2] {
                scene.advance_to(t);
                client.wait_for(&scene.snapshot(), timeout).unwrap();
            }
            let (_, m) = client.close();
            assert!(m.updates >= 4, "{enc}: {m}");
        }
    }

    #[test]
    fn other_pixel_format() {
        let (scene, conn) = server();
        let cfg = ClientConfig {
            format: Some(PixelFormat::rgb565()),
            ..ClientConfig::new(Encoding::Hextile)
        };
        let client = HeadlessClient::connect(conn, &cfg).unwrap();
        let want = scene.snapshot().converted(&PixelFormat::rgb565());
        client.wait_for(&want, Duration::from_secs(10)).unwrap();
        assert_eq!(client.metrics().captured_bytes, 480 * 800 * 2);
    }
}
