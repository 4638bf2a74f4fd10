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

//! The shared scene and per-connection sessions.
//!
//! Each connected client owns a slot in the hub holding its accumulated
//! damage, an optional pending CopyRect, its latest update request and its
//! negotiated encoding. Scene changes are fanned out to every slot under the
//! hub lock. A session's writer waits for its slot to become serviceable,
//! snapshots the framebuffer, releases the lock and encodes.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::thread;
use std::time::Instant;

use super::scene::{CopyHint, Scene, SceneChange, FRAME_MS};
use crate::codecs::{encode_copyrect, negotiate_encoding, EncodingChoice, RectEncoder, SUPPORTED};
use crate::error::{Error, Result};
use crate::model::{DamageRegion, Encoding, Framebuffer, PixelFormat, Rect, RectUpdate, SessionMetrics};
use crate::wire::{read_client_message, server_handshake, write_update, ClientMessage, ServerInit, Transport};

/// Keysym (F12) that advances a virtual clock by one frame.
pub const TICK_KEYSYM: u32 = 0xFFC9;
/// Keysym (Home) that rewinds a virtual clock to the start of the scenario.
pub const REWIND_KEYSYM: u32 = 0xFF50;

/// How the scene clock moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClockMode {
    /// A ticker advances the scene every frame in wall-clock time.
    #[default]
    Real,
    /// Time moves only when a driver asks, either through the API or by
    /// pressing F12. Home rewinds to the start.
    Virtual,
}

/// What the server offers during encoding negotiation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerPolicy {
    pub supported: Vec<Encoding>,
    pub strict: bool,
}

impl Default for ServerPolicy {
    fn default() -> Self {
        Self {
            supported: SUPPORTED.to_vec(),
            strict: false,
        }
    }
}

impl ServerPolicy {
    fn choose(&self, prefs: &[i32]) -> EncodingChoice {
        EncodingChoice {
            strict: self.strict,
            ..negotiate_encoding(prefs, &self.supported)
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Request {
    incremental: bool,
    rect: Rect,
}

#[derive(Debug)]
struct ClientSlot {
    damage: DamageRegion,
    copy: Option<CopyHint>,
    request: Option<Request>,
    format: PixelFormat,
    choice: EncodingChoice,
    copyrect: bool,
    closed: bool,
}

impl ClientSlot {
    fn ready(&self) -> bool {
        match self.request {
            Some(req) => !req.incremental || !self.damage.is_empty() || self.copy.is_some(),
            None => false,
        }
    }

    fn absorb(&mut self, change: &SceneChange) {
        if change.damage.is_empty() {
            return;
        }
        match change.copy {
            Some(hint) if self.copyrect && self.copy.is_none() && !self.damage.intersects(&hint.src()) => {
                self.damage = self.damage.union(&change.damage).subtract_rect(&hint.dst);
                self.copy = Some(hint);
            }
            _ => self.damage = self.damage.union(&change.damage),
        }
    }
}

struct Hub {
    scene: Scene,
    clients: HashMap<u64, ClientSlot>,
    next_id: u64,
    mode: ClockMode,
    input_log: Option<Vec<Vec<u8>>>,
}

impl Hub {
    fn broadcast(&mut self, change: &SceneChange) {
        for slot in self.clients.values_mut() {
            slot.absorb(change);
        }
    }
}

/// Scene state shared by every session of one server.
#[derive(Clone)]
pub struct SharedScene {
    inner: Arc<(Mutex<Hub>, Condvar)>,
}

impl std::fmt::Debug for SharedScene {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SharedScene").field("clock", &self.clock()).finish()
    }
}

impl SharedScene {
    pub fn new(scene: Scene, mode: ClockMode) -> Self {
        Self {
            inner: Arc::new((
                Mutex::new(Hub {
                    scene,
                    clients: HashMap::new(),
                    next_id: 0,
                    mode,
                    input_log: None,
                }),
                Condvar::new(),
            )),
        }
    }

    fn lock(&self) -> MutexGuard<'_, Hub> {
        self.inner.0.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn apply(&self, f: impl FnOnce(&mut Scene) -> SceneChange) -> DamageRegion {
        let mut hub = self.lock();
        let change = f(&mut hub.scene);
        hub.broadcast(&change);
        drop(hub);
        self.inner.1.notify_all();
        change.damage
    }

    pub fn clock_mode(&self) -> ClockMode {
        self.lock().mode
    }

    pub fn clock(&self) -> f64 {
        self.lock().scene.clock()
    }

    pub fn duration(&self) -> f64 {
        self.lock().scene.duration()
    }

    pub fn finished(&self) -> bool {
        self.lock().scene.finished()
    }

    pub fn size(&self) -> (u16, u16) {
        let hub = self.lock();
        let fb = hub.scene.framebuffer();
        (fb.width(), fb.height())
    }

    /// Copy of the current picture.
    pub fn snapshot(&self) -> Framebuffer {
        self.lock().scene.framebuffer().clone()
    }

    /// Runs `f` against the current picture without copying it.
    pub fn with_framebuffer<T>(&self, f: impl FnOnce(&Framebuffer) -> T) -> T {
        f(self.lock().scene.framebuffer())
    }

    pub fn advance_to(&self, seconds: f64) -> DamageRegion {
        self.apply(|s| s.advance_to(seconds))
    }

    /// Advances one animation frame.
    pub fn tick(&self) -> DamageRegion {
        self.apply(|s| s.advance_by(FRAME_MS as f64 / 1000.0))
    }

    /// Applies a key or pointer event and returns the damage it caused.
    /// Other messages have no effect on the scene.
    pub fn handle_input(&self, msg: &ClientMessage) -> DamageRegion {
        let mut hub = self.lock();
        if let Some(log) = hub.input_log.as_mut() {
            if matches!(msg, ClientMessage::KeyEvent { .. } | ClientMessage::PointerEvent { .. }) {
                log.push(msg.to_bytes());
            }
        }
        let virtual_clock = hub.mode == ClockMode::Virtual;
        let change = match *msg {
            ClientMessage::KeyEvent { down: true, keysym } if keysym == TICK_KEYSYM && virtual_clock => {
                hub.scene.advance_by(FRAME_MS as f64 / 1000.0)
            }
            ClientMessage::KeyEvent { down: true, keysym } if keysym == REWIND_KEYSYM && virtual_clock => {
                hub.scene.rewind()
            }
            ClientMessage::KeyEvent { down, keysym } => hub.scene.key_event(down, keysym),
            ClientMessage::PointerEvent { buttons, x, y } => hub.scene.pointer_event(buttons, x, y),
            _ => SceneChange::default(),
        };
        hub.broadcast(&change);
        drop(hub);
        self.inner.1.notify_all();
        change.damage
    }

    /// Starts keeping the wire bytes of every key and pointer event received.
    pub fn record_input(&self) {
        self.lock().input_log.get_or_insert_with(Vec::new);
    }

    pub fn take_input_log(&self) -> Vec<Vec<u8>> {
        self.lock().input_log.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub fn client_count(&self) -> usize {
        self.lock().clients.values().filter(|c| !c.closed).count()
    }

    /// True when no connected client has outstanding damage.
    pub fn idle(&self) -> bool {
        self.lock()
            .clients
            .values()
            .all(|c| c.closed || (c.damage.is_empty() && c.copy.is_none()))
    }

    fn register(&self) -> u64 {
        let mut hub = self.lock();
        let id = hub.next_id;
        hub.next_id += 1;
        hub.clients.insert(
            id,
            ClientSlot {
                damage: DamageRegion::new(),
                copy: None,
                request: None,
                format: PixelFormat::rgb888(),
                choice: EncodingChoice::new(Encoding::Raw),
                copyrect: false,
                closed: false,
            },
        );
        id
    }

    fn with_slot<T>(&self, id: u64, f: impl FnOnce(&mut ClientSlot) -> T) -> Option<T> {
        let mut hub = self.lock();
        let out = hub.clients.get_mut(&id).map(f);
        drop(hub);
        self.inner.1.notify_all();
        out
    }

    fn close(&self, id: u64) {
        self.with_slot(id, |s| s.closed = true);
    }

    fn remove(&self, id: u64) {
        self.lock().clients.remove(&id);
        self.inner.1.notify_all();
    }
}

/// Work handed from the hub to a session writer.
struct Job {
    copy: Option<CopyHint>,
    rects: Vec<Rect>,
    fb: Framebuffer,
    choice: EncodingChoice,
}

fn next_job(scene: &SharedScene, id: u64) -> Option<Job> {
    let (lock, cvar) = &*scene.inner;
    let mut hub = lock.lock().unwrap_or_else(|e| e.into_inner());
    loop {
        let slot = hub.clients.get(&id)?;
        if slot.closed {
            return None;
        }
        if slot.ready() {
            break;
        }
        hub = cvar.wait(hub).unwrap_or_else(|e| e.into_inner());
    }
    let fb = hub.scene.framebuffer().clone();
    let slot = hub.clients.get_mut(&id)?;
    let req = slot.request.take()?;
    let mut damage = std::mem::take(&mut slot.damage);
    if !req.incremental {
        if let Some(r) = req.rect.intersect(&fb.bounds()) {
            damage.add_rect(r);
        }
    }
    let copy = slot.copy.take();
    let fb = if slot.format == *fb.format() {
        fb
    } else {
        fb.converted(&slot.format)
    };
    Some(Job {
        copy,
        rects: damage.into_rects(),
        fb,
        choice: slot.choice,
    })
}

/// What one session did before it ended.
#[derive(Debug, Clone, Default)]
pub struct SessionSummary {
    pub client_name: Option<String>,
    pub metrics: SessionMetrics,
    pub wire_bytes: u64,
    /// The error that ended the session, when it was not a plain disconnect.
    pub error: Option<String>,
}

fn reader_loop(mut reader: Box<dyn Read + Send>, scene: &SharedScene, id: u64, policy: &ServerPolicy) -> Result<()> {
    loop {
        let msg = read_client_message(&mut reader)?;
        match &msg {
            ClientMessage::SetPixelFormat(pf) => {
                pf.validate()?;
                if !pf.true_color {
                    return Err(Error::Protocol("colour-map pixel formats are not supported".into()));
                }
                let pf = *pf;
                scene.with_slot(id, |s| s.format = pf);
            }
            ClientMessage::SetEncodings(ids) => {
                let choice = policy.choose(ids);
                let copyrect = ids.contains(&Encoding::CopyRect.id()) && policy.supported.contains(&Encoding::CopyRect);
                scene.with_slot(id, |s| {
                    s.choice = choice;
                    s.copyrect = copyrect;
                });
            }
            ClientMessage::FramebufferUpdateRequest { incremental, rect } => {
                let req = Request {
                    incremental: *incremental,
                    rect: *rect,
                };
                scene.with_slot(id, |s| {
                    s.request = Some(match s.request {
                        Some(prev) => Request {
                            incremental: prev.incremental && req.incremental,
                            rect: req.rect,
                        },
                        None => req,
                    })
                });
            }
            ClientMessage::KeyEvent { .. } | ClientMessage::PointerEvent { .. } => {
                scene.handle_input(&msg);
            }
            ClientMessage::CutText(_) => {}
        }
    }
}

fn writer_loop(writer: &mut dyn Write, scene: &SharedScene, id: u64, summary: &mut SessionSummary) -> Result<()> {
    let mut encoder = RectEncoder::new(EncodingChoice::new(Encoding::Raw));
    while let Some(job) = next_job(scene, id) {
        encoder.set_choice(job.choice);
        let bpp = job.fb.format().bytes_per_pixel();
        let mut out = Vec::with_capacity(job.rects.len() + 1);
        if let Some(hint) = job.copy {
            out.push(RectUpdate::new(
                hint.dst,
                Encoding::CopyRect,
                encode_copyrect(hint.src_x, hint.src_y).to_vec(),
            ));
        }
        for r in &job.rects {
            out.push(encoder.encode(&job.fb, r)?);
        }
        summary.wire_bytes += write_update(writer, &out)? as u64;
        summary.metrics.record_update();
        for u in &out {
            summary.metrics.record_rect(u.rect.w, u.rect.h, bpp, u.payload.len());
        }
    }
    Ok(())
}

/// Runs one client connection to completion: handshake, then a reader
/// thread for client messages while this thread sends updates. The peer
/// closing the connection ends the session without error.
pub fn serve_session<T: Transport>(mut conn: T, scene: &SharedScene, policy: &ServerPolicy) -> Result<SessionSummary> {
    let (width, height) = scene.size();
    let init = ServerInit {
        width,
        height,
        format: PixelFormat::rgb888(),
        name: "rfbkit".into(),
    };
    let hs = server_handshake(&mut conn, &init)?;
    let halves = conn.split()?;
    let id = scene.register();
    let started = Instant::now();

    let reader = {
        let scene = scene.clone();
        let policy = policy.clone();
        let closer = halves.closer.clone();
        let reader = halves.reader;
        thread::spawn(move || {
            let res = reader_loop(reader, &scene, id, &policy);
            scene.close(id);
            closer.close();
            res
        })
    };

    let mut summary = SessionSummary {
        client_name: Some(hs.name),
        ..SessionSummary::default()
    };
    let mut writer = halves.writer;
    let written = writer_loop(&mut *writer, scene, id, &mut summary);
    scene.close(id);
    halves.closer.close();
    let read = reader
        .join()
        .unwrap_or_else(|_| Err(Error::Protocol("reader panicked".into())));
    scene.remove(id);
    summary.metrics.duration_s = started.elapsed().as_secs_f64();

    for res in [written, read] {
        if let Err(e) = res {
            if !e.is_disconnect() && summary.error.is_none() {
                summary.error = Some(e.to_string());
            }
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codecs::RectDecoder;
    use crate::server::Scenario;
    use crate::wire::{client_handshake, pipe, read_update};
    use std::os::unix::net::UnixStream;

    fn start(mode: ClockMode) -> (SharedScene, UnixStream, thread::JoinHandle<Result<SessionSummary>>) {
        let scene = SharedScene::new(Scene::new(Scenario::reference(42)), mode);
        let (a, b) = pipe().unwrap();
        let s = scene.clone();
        let h = thread::spawn(move || serve_session(a, &s, &ServerPolicy::default()));
        (scene, b, h)
    }

    fn request(conn: &mut UnixStream, incremental: bool) {
        ClientMessage::FramebufferUpdateRequest {
            incremental,
            rect: Rect::new(0, 0, 480, 800),
        }
        .write_to(conn)
        .unwrap();
    }

    #[test]
    fn full_request_on_static_scene() {
        let (scene, mut c, h) = start(ClockMode::Virtual);
        let hs = client_handshake(&mut c, true).unwrap();
        assert_eq!((hs.width, hs.height), (480, 800));
        request(&mut c, false);
        let mut fb = Framebuffer::new(480, 800, hs.format).unwrap();
        let got = read_update(&mut c, &mut fb, &mut RectDecoder::new()).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].rect, Rect::new(0, 0, 480, 800));
        assert_eq!(fb, scene.snapshot());
        drop(c);
        let summary = h.join().unwrap().unwrap();
        assert_eq!(summary.metrics.updates, 1);
        assert!(summary.error.is_none(), "{:?}", summary.error);
    }

    #[test]
    fn incremental_waits_for_damage() {
        let (scene, mut c, h) = start(ClockMode::Virtual);
        let hs = client_handshake(&mut c, true).unwrap();
        ClientMessage::SetEncodings(vec![5, 1, 0]).write_to(&mut c).unwrap();
        let mut fb = Framebuffer::new(480, 800, hs.format).unwrap();
        let mut dec = RectDecoder::new();
        request(&mut c, false);
        read_update(&mut c, &mut fb, &mut dec).unwrap();
        request(&mut c, true);
        thread::sleep(std::time::Duration::from_millis(50));
        let damage = scene.advance_to(0.6);
        assert!(!damage.is_empty());
        let got = read_update(&mut c, &mut fb, &mut dec).unwrap();
        let rects: Vec<Rect> = got.iter().map(|u| u.rect).collect();
        assert_eq!(rects, damage.rects());
        assert!(got
            .iter()
            .all(|u| u.encoding == Encoding::Hextile || u.encoding == Encoding::Raw));
        assert_eq!(fb, scene.snapshot());
        drop(c);
        h.join().unwrap().unwrap();
    }

    #[test]
    fn f12_ticks_virtual_clock_and_n_skips() {
        let (scene, mut c, h) = start(ClockMode::Virtual);
        client_handshake(&mut c, true).unwrap();
        scene.record_input();
        for (down, keysym) in [(true, TICK_KEYSYM), (false, TICK_KEYSYM), (true, 0x6E)] {
            ClientMessage::KeyEvent { down, keysym }.write_to(&mut c).unwrap();
        }
        let pointer = ClientMessage::PointerEvent { buttons: 1, x: 3, y: 4 };
        pointer.write_to(&mut c).unwrap();
        let deadline = Instant::now() + std::time::Duration::from_secs(5);
        while scene.with_framebuffer(|fb| fb.get(3, 4)) == Scene::new(Scenario::reference(42)).framebuffer().get(3, 4) {
            assert!(Instant::now() < deadline, "pointer never arrived");
            thread::sleep(std::time::Duration::from_millis(5));
        }
        // One F12 tick (0.1 s) then `n` jumps to the end of the home step.
        assert!((scene.clock() - 0.5).abs() < 1e-9, "clock {}", scene.clock());
        let log = scene.take_input_log();
        assert_eq!(log.len(), 4);
        assert_eq!(log[3], pointer.to_bytes());
        drop(c);
        h.join().unwrap().unwrap();
    }

    #[test]
    fn home_key_rewinds_only_a_virtual_clock() {
        let home = ClientMessage::KeyEvent {
            down: true,
            keysym: REWIND_KEYSYM,
        };
        for (mode, rewound) in [(ClockMode::Virtual, true), (ClockMode::Real, false)] {
            let scene = SharedScene::new(Scene::new(Scenario::reference(42)), mode);
            scene.advance_to(3.0);
            let damage = scene.handle_input(&home);
            assert_eq!(scene.clock() == 0.0, rewound);
            assert_eq!(damage.is_empty(), !rewound);
        }
    }

    #[test]
    fn copy_hint_respects_pending_damage() {
        let hint = CopyHint {
            dst: Rect::new(0, 0, 10, 10),
            src_x: 0,
            src_y: 10,
        };
        let change = SceneChange {
            damage: DamageRegion::from_rect(Rect::new(0, 0, 10, 20)),
            copy: Some(hint),
        };
        let mut slot = ClientSlot {
            damage: DamageRegion::new(),
            copy: None,
            request: None,
            format: PixelFormat::rgb888(),
            choice: EncodingChoice::new(Encoding::Raw),
            copyrect: true,
            closed: false,
        };
        slot.absorb(&change);
        assert_eq!(slot.copy, Some(hint));
        assert_eq!(slot.damage.rects(), &[Rect::new(0, 10, 10, 10)]);
        // Source already stale at the client: no copy, plain damage.
        slot.copy = None;
        slot.damage = DamageRegion::from_rect(Rect::new(0, 12, 2, 2));
        slot.absorb(&change);
        assert_eq!(slot.copy, None);
        assert_eq!(slot.damage.area(), 200);
    }
}
