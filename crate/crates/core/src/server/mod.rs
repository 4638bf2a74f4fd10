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

//! Synthetic desktop server: scripted scenarios, a deterministic scene with
//! damage tracking, and RFB sessions serving it to any number of clients.

mod damage;
mod scenario;
mod scene;
mod session;

use std::io;
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

pub use damage::{compute_damage, DEFAULT_TILE};
pub use scenario::{load_scenario, App, Scenario, ScenarioStep, DEFAULT_HOME_SECONDS, DEFAULT_OPEN_SECONDS};
pub use scene::{CopyHint, Layout, Scene, SceneChange, CURSOR_H, CURSOR_W, FRAME_MS, NEXT_STEP_KEYSYM, REVEAL_MS};
pub use session::{serve_session, ClockMode, ServerPolicy, SessionSummary, SharedScene, REWIND_KEYSYM, TICK_KEYSYM};

/// A TCP server around one shared scene. Every accepted connection gets its
/// own session thread; in real-clock mode a ticker drives the scenario.
pub struct SceneServer {
    scene: SharedScene,
    listener: TcpListener,
    policy: ServerPolicy,
    stop: Arc<AtomicBool>,
}

impl SceneServer {
    pub fn bind(addr: &str, scenario: Scenario, mode: ClockMode) -> io::Result<Self> {
        Ok(Self {
            scene: SharedScene::new(Scene::new(scenario), mode),
            listener: TcpListener::bind(addr)?,
            policy: ServerPolicy::default(),
            stop: Arc::new(AtomicBool::new(false)),
        })
    }

    pub fn with_policy(mut self, policy: ServerPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    pub fn scene(&self) -> &SharedScene {
        &self.scene
    }

    /// Stops the accept loop and ticker of a server running in the background.
    pub fn stop_handle(&self) -> StopHandle {
        StopHandle {
            stop: self.stop.clone(),
            addr: self.listener.local_addr().ok(),
        }
    }

    /// Serves until stopped. Session errors are logged, not propagated.
    pub fn run(self) -> io::Result<()> {
        if self.scene.clock_mode() == ClockMode::Real {
            let scene = self.scene.clone();
            let stop = self.stop.clone();
            thread::spawn(move || run_ticker(&scene, &stop));
        }
        for conn in self.listener.incoming() {
            if self.stop.load(Ordering::SeqCst) {
                break;
            }
            let conn = match conn {
                Ok(c) => c,
                Err(e) => {
                    log::warn!("accept failed: {e}");
                    continue;
                }
            };
            let scene = self.scene.clone();
            let policy = self.policy.clone();
            thread::spawn(move || {
                let peer = conn.peer_addr().ok();
                match serve_session(conn, &scene, &policy) {
                    Ok(s) => log::info!("session {peer:?} ended: {}", s.metrics),
                    Err(e) => log::warn!("session {peer:?} failed: {e}"),
                }
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct StopHandle {
    stop: Arc<AtomicBool>,
    addr: Option<SocketAddr>,
}

impl StopHandle {
    pub fn stop(&self) {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(addr) = self.addr {
            // Wake the accept loop.
            let _ = TcpStream::connect_timeout(&addr, Duration::from_millis(200));
        }
    }
}

/// Advances the scene one frame per frame interval of wall time, without
/// drifting, until `stop` is set.
pub fn run_ticker(scene: &SharedScene, stop: &AtomicBool) {
    let start = Instant::now();
    let mut frame = 0u64;
    while !stop.load(Ordering::SeqCst) {
        frame += 1;
        let due = start + Duration::from_millis(frame * FRAME_MS);
        if let Some(wait) = due.checked_duration_since(Instant::now()) {
            thread::sleep(wait);
        }
        scene.tick();
    }
}
