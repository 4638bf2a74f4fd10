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

//! One relayed session: an upstream client connection feeding a shadow
//! framebuffer, and a downstream server connection re-encoding it.

use std::io::Write;
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::thread;
use std::time::Instant;

use super::link::{LinkConfig, ThrottledWriter};
use super::transcode::encode_region;
use crate::codecs::{negotiate_encoding, EncodingChoice, RectDecoder, RectEncoder, SUPPORTED};
use crate::error::{Error, Result};
use crate::model::{normalize_unchecked, DamageRegion, Encoding, Framebuffer, PixelFormat, Rect, SessionMetrics};
use crate::wire::{
    client_handshake, read_client_message, read_update, server_handshake, write_update, ClientMessage, ServerInit,
    Transport,
};

/// How a relay re-encodes and paces what it forwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelaySettings {
    pub choice: EncodingChoice,
    /// Downstream link model; unthrottled when `None`.
    pub link: Option<LinkConfig>,
}

impl RelaySettings {
    pub fn new(choice: EncodingChoice) -> Self {
        Self { choice, link: None }
    }

    pub fn with_link(mut self, link: LinkConfig) -> Self {
        self.link = Some(link);
        self
    }
}

/// Live counters of a relayed session, readable while it runs.
#[derive(Debug, Clone, Default)]
pub struct MetricsTap {
    inner: Arc<Mutex<SessionMetrics>>,
}

impl MetricsTap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Current counters. `duration_s` is filled in when the session ends.
    pub fn snapshot(&self) -> SessionMetrics {
        *self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn update(&self, f: impl FnOnce(&mut SessionMetrics)) {
        f(&mut self.inner.lock().unwrap_or_else(|e| e.into_inner()));
    }
}

#[derive(Debug, Clone, Copy)]
struct Request {
    incremental: bool,
    rect: Rect,
}

struct Shadow {
    fb: Framebuffer,
    dirty: DamageRegion,
    request: Option<Request>,
    format: PixelFormat,
    choice: EncodingChoice,
    closed: bool,
    upstream_error: Option<Error>,
}

impl Shadow {
    fn ready(&self) -> bool {
        matches!(self.request, Some(r) if !r.incremental || !self.dirty.is_empty())
    }
}

type SharedShadow = Arc<(Mutex<Shadow>, Condvar)>;

fn lock(s: &SharedShadow) -> MutexGuard<'_, Shadow> {
    s.0.lock().unwrap_or_else(|e| e.into_inner())
}

fn close(s: &SharedShadow) {
    lock(s).closed = true;
    s.1.notify_all();
}

type SharedWriter = Arc<Mutex<Box<dyn Write + Send>>>;

fn send_upstream(w: &SharedWriter, msg: &ClientMessage) -> Result<()> {
    msg.write_to(&mut **w.lock().unwrap_or_else(|e| e.into_inner()))
}

/// Relays one viewer. The upstream side is set up first: handshake, then a
/// full frame into the shadow, so the viewer never sees a blank picture.
/// Afterwards the relay keeps one incremental request outstanding upstream
/// at all times and serves the viewer's requests from the shadow.
///
/// Key, pointer and cut-text messages from the viewer go upstream
/// unchanged. Ends when either side disconnects.
pub fn relay_session<U: Transport, D: Transport>(
    mut upstream: U,
    mut downstream: D,
    settings: &RelaySettings,
    tap: &MetricsTap,
) -> Result<SessionMetrics> {
    let server = client_handshake(&mut upstream, true)?;
    let full = Rect::new(0, 0, server.width, server.height);
    let up = upstream.split()?;
    let up_writer: SharedWriter = Arc::new(Mutex::new(up.writer));
    send_upstream(
        &up_writer,
        &ClientMessage::SetEncodings(vec![Encoding::CopyRect.id(), Encoding::Raw.id()]),
    )?;
    send_upstream(
        &up_writer,
        &ClientMessage::FramebufferUpdateRequest {
            incremental: false,
            rect: full,
        },
    )?;
    let mut up_reader = up.reader;
    let mut local = Framebuffer::new(server.width, server.height, server.format)?;
    let mut decoder = RectDecoder::new();
    read_update(&mut up_reader, &mut local, &mut decoder)?;
    send_upstream(
        &up_writer,
        &ClientMessage::FramebufferUpdateRequest {
            incremental: true,
            rect: full,
        },
    )?;

    let init = ServerInit {
        width: server.width,
        height: server.height,
        format: server.format,
        name: server.name.clone(),
    };
    let down_hs = server_handshake(&mut downstream, &init);
    if let Err(e) = down_hs {
        up.closer.close();
        return Err(e);
    }
    let started = Instant::now();
    let down = downstream.split()?;

    let shadow: SharedShadow = Arc::new((
        Mutex::new(Shadow {
            fb: local.clone(),
            dirty: DamageRegion::new(),
            request: None,
            format: server.format,
            choice: settings.choice,
            closed: false,
            upstream_error: None,
        }),
        Condvar::new(),
    ));

    let upstream_thread = {
        let shadow = shadow.clone();
        let writer = up_writer.clone();
        let down_closer = down.closer.clone();
        thread::spawn(move || {
            let res = (|| -> Result<()> {
                loop {
                    let rects = read_update(&mut up_reader, &mut local, &mut decoder)?;
                    send_upstream(
                        &writer,
                        &ClientMessage::FramebufferUpdateRequest {
                            incremental: true,
                            rect: full,
                        },
                    )?;
                    let changed: Vec<Rect> = rects.iter().map(|u| u.rect).collect();
                    let region = normalize_unchecked(&changed);
                    let mut st = lock(&shadow);
                    for r in region.rects() {
                        let px = local.read_rect(r)?;
                        st.fb.write_rect(r, &px)?;
                    }
                    st.dirty = st.dirty.union(&region);
                    drop(st);
                    shadow.1.notify_all();
                }
            })();
            if let Err(e) = res {
                if !e.is_disconnect() {
                    lock(&shadow).upstream_error = Some(e);
                }
            }
            close(&shadow);
            down_closer.close();
        })
    };

    let downstream_reader = {
        let shadow = shadow.clone();
        let writer = up_writer.clone();
        let up_closer = up.closer.clone();
        let target = settings.choice;
        let mut reader = down.reader;
        thread::spawn(move || {
            let res = (|| -> Result<()> {
                loop {
                    let msg = read_client_message(&mut reader)?;
                    match msg {
                        ClientMessage::KeyEvent { .. }
                        | ClientMessage::PointerEvent { .. }
                        | ClientMessage::CutText(_) => send_upstream(&writer, &msg)?,
                        ClientMessage::SetPixelFormat(pf) => {
                            pf.validate()?;
                            if !pf.true_color {
                                return Err(Error::Protocol("colour-map pixel formats are not supported".into()));
                            }
                            lock(&shadow).format = pf;
                        }
                        ClientMessage::SetEncodings(ids) => {
                            let choice = if ids.is_empty() || ids.contains(&target.encoding.id()) {
                                target
                            } else {
                                EncodingChoice {
                                    strict: target.strict,
                                    ..negotiate_encoding(&ids, &SUPPORTED)
                                }
                            };
                            lock(&shadow).choice = choice;
                        }
                        ClientMessage::FramebufferUpdateRequest { incremental, rect } => {
                            let mut st = lock(&shadow);
                            st.request = Some(Request {
                                incremental: incremental && st.request.is_none_or(|r| r.incremental),
                                rect,
                            });
                            drop(st);
                            shadow.1.notify_all();
                        }
                    }
                }
            })();
            close(&shadow);
            up_closer.close();
            res
        })
    };

    let mut out: Box<dyn Write + Send> = match settings.link {
        Some(link) => Box::new(ThrottledWriter::new(down.writer, link)),
        None => down.writer,
    };
    let written = downstream_writer(&shadow, &mut *out, settings.choice, tap);
    drop(out);
    close(&shadow);
    down.closer.close();
    up.closer.close();
    let _ = upstream_thread.join();
    let read = downstream_reader
        .join()
        .unwrap_or_else(|_| Err(Error::Protocol("viewer reader panicked".into())));

    let duration = started.elapsed().as_secs_f64();
    tap.update(|m| m.duration_s = duration);
    written?;
    if let Some(e) = lock(&shadow).upstream_error.take() {
        return Err(e);
    }
    match read {
        Err(e) if !e.is_disconnect() => Err(e),
        _ => Ok(tap.snapshot()),
    }
}

fn downstream_writer(
    shadow: &SharedShadow,
    out: &mut dyn Write,
    choice: EncodingChoice,
    tap: &MetricsTap,
) -> Result<()> {
    let mut encoder = RectEncoder::new(choice);
    loop {
        let mut st = lock(shadow);
        while !st.closed && !st.ready() {
            st = shadow.1.wait(st).unwrap_or_else(|e| e.into_inner());
        }
        if st.closed {
            return Ok(());
        }
        let req = st.request.take().expect("ready implies a request");
        let mut region = std::mem::take(&mut st.dirty);
        if !req.incremental {
            if let Some(r) = req.rect.intersect(&st.fb.bounds()) {
                region.add_rect(r);
            }
        }
        let fb = if st.format == *st.fb.format() {
            st.fb.clone()
        } else {
            st.fb.converted(&st.format)
        };
        encoder.set_choice(st.choice);
        drop(st);

        let updates = encode_region(&fb, &region, &mut encoder)?;
        match write_update(out, &updates) {
            Ok(_) => {}
            Err(e) if e.is_disconnect() => return Ok(()),
            Err(e) => return Err(e),
        }
        let bpp = fb.format().bytes_per_pixel();
        tap.update(|m| {
            m.record_update();
            for u in &updates {
                m.record_rect(u.rect.w, u.rect.h, bpp, u.payload.len());
            }
        });
    }
}
