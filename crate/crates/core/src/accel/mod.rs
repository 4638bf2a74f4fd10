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

//! The relay between a scene server and its viewers: full decode into a
//! shadow framebuffer, re-encoding in a target encoding, a simulated
//! constrained link, per-session metrics, and a WebSocket entry point for
//! browser viewers.

mod link;
mod relay;
mod transcode;
mod ws;

use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::thread;

pub use link::{LinkClock, LinkConfig, ManualClock, Throttle, ThrottledWriter, TokenBucket, WallClock};
pub use relay::{relay_session, MetricsTap, RelaySettings};
pub use transcode::{encode_region, transcode_update};
pub use ws::accept_websocket;

use crate::bench::{csv_header, csv_row};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RelayConfig {
    pub upstream: String,
    pub listen: String,
    pub ws_listen: Option<String>,
    pub settings: RelaySettings,
    /// Finished sessions are appended here as CSV rows.
    pub metrics_path: Option<PathBuf>,
}

impl RelayConfig {
    pub fn validate(&self) -> Result<()> {
        if self.upstream == self.listen || self.ws_listen.as_deref() == Some(self.upstream.as_str()) {
            return Err(Error::Invalid(format!(
                "upstream {} is also a listen address",
                self.upstream
            )));
        }
        if let Some(link) = &self.settings.link {
            link.validate()?;
        }
        Ok(())
    }
}

/// A running relay: accepts viewers over TCP (and optionally WebSocket) and
/// opens a fresh upstream connection for each.
pub struct Accelerator {
    config: RelayConfig,
    listener: TcpListener,
    ws_listener: Option<TcpListener>,
    csv: Option<Arc<Mutex<File>>>,
}

impl Accelerator {
    pub fn bind(config: RelayConfig) -> Result<Self> {
        config.validate()?;
        let listener = TcpListener::bind(&config.listen)?;
        let ws_listener = config.ws_listen.as_deref().map(TcpListener::bind).transpose()?;
        let csv = match &config.metrics_path {
            Some(path) => {
                let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
                let mut f = OpenOptions::new().create(true).append(true).open(path)?;
                if fresh {
                    writeln!(f, "{}", csv_header())?;
                }
                Some(Arc::new(Mutex::new(f)))
            }
            None => None,
        };
        Ok(Self {
            config,
            listener,
            ws_listener,
            csv,
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    pub fn ws_addr(&self) -> Option<SocketAddr> {
        self.ws_listener.as_ref().and_then(|l| l.local_addr().ok())
    }

    /// Serves viewers forever.
    pub fn run(self) -> Result<()> {
        let shared = Arc::new((self.config, self.csv));
        if let Some(ws) = self.ws_listener {
            let shared = shared.clone();
            thread::spawn(move || {
                for conn in ws.incoming().flatten() {
                    let shared = shared.clone();
                    thread::spawn(move || match accept_websocket(conn) {
                        Ok((end, pump)) => {
                            serve_viewer(end, &shared.0, shared.1.as_ref());
                            let _ = pump.join();
                        }
                        Err(e) => log::warn!("websocket viewer rejected: {e}"),
                    });
                }
            });
        }
        for conn in self.listener.incoming() {
            let conn = match conn {
                Ok(c) => c,
                Err(e) => {
                    log::warn!("accept failed: {e}");
                    continue;
                }
            };
            let shared = shared.clone();
            thread::spawn(move || serve_viewer(conn, &shared.0, shared.1.as_ref()));
        }
        Ok(())
    }
}

fn serve_viewer<D: crate::wire::Transport>(downstream: D, config: &RelayConfig, csv: Option<&Arc<Mutex<File>>>) {
    let upstream = match TcpStream::connect(&config.upstream) {
        Ok(s) => s,
        Err(e) => {
            log::warn!("upstream {} unreachable: {e}", config.upstream);
            return;
        }
    };
    let tap = MetricsTap::new();
    match relay_session(upstream, downstream, &config.settings, &tap) {
        Ok(m) => {
            log::info!("relayed session ended: {m}");
            if let Some(f) = csv {
                let mut f = f.lock().unwrap_or_else(|e| e.into_inner());
                let _ = writeln!(f, "{}", csv_row(config.settings.choice.encoding, &m));
            }
        }
        Err(e) => log::warn!("relayed session failed: {e}"),
    }
}
