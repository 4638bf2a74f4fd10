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

use std::fs;
use std::net::TcpStream;
use std::path::PathBuf;
use std::thread;
use std::time::{Duration, Instant};

use super::report::{render_report, BenchmarkReport, BenchmarkRow, ReportFormat, RunFailure};
use crate::accel::{relay_session, LinkConfig, MetricsTap, RelaySettings};
use crate::client::{ClientConfig, HeadlessClient};
use crate::codecs::EncodingChoice;
use crate::error::{Error, Result};
use crate::model::{Encoding, Framebuffer, SessionMetrics};
use crate::server::{
    serve_session, ClockMode, Scenario, Scene, ServerPolicy, SharedScene, FRAME_MS, REWIND_KEYSYM, TICK_KEYSYM,
};
use crate::wire::{pipe, ClientMessage};

/// How long a single frame may take to reach the viewer before the run is
/// declared broken.
const FRAME_TIMEOUT: Duration = Duration::from_secs(30);
/// Upper bound on draining a throttled link after the scenario ends.
const DRAIN_TIMEOUT: Duration = Duration::from_secs(300);

#[derive(Debug, Clone)]
pub struct BenchmarkPlan {
    pub scenario: Scenario,
    pub encodings: Vec<Encoding>,
    /// Used only in real time; virtual runs are not throttled.
    pub link: LinkConfig,
    pub repetitions: u32,
    /// Wall-clock scenario with the link throttled, instead of virtual ticks.
    pub realtime: bool,
    /// No per-rectangle fallback to Raw, so each row measures one encoding.
    pub strict: bool,
    /// Drive an external server at this address rather than an in-process one.
    pub server: Option<String>,
    /// Where the CSV goes, written only after every run finished.
    pub output: Option<PathBuf>,
}

impl BenchmarkPlan {
    pub fn new(scenario: Scenario, encodings: Vec<Encoding>, link: LinkConfig) -> Self {
        Self {
            scenario,
            encodings,
            link,
            repetitions: 1,
            realtime: false,
            strict: true,
            server: None,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Invalid("repetitions must be at least 1".into()));
        }
        if self.encodings.is_empty() {
            return Err(Error::Invalid("no encodings to test".into()));
        }
        if self.encodings.contains(&Encoding::CopyRect) {
            return Err(Error::Invalid("copyrect is not a standalone encoding".into()));
        }
        if self.realtime && self.server.is_some() {
            return Err(Error::Invalid(
                "an external server can only be benchmarked with the virtual clock".into(),
            ));
        }
        self.scenario.validate()?;
        self.link.validate()
    }
}

/// Runs every (encoding, repetition) pair in sequence, each on a fresh
/// server, relay and viewer. A run only yields a row if the viewer ends with
/// exactly the server's picture.
pub fn run_benchmark(plan: &BenchmarkPlan) -> Result<BenchmarkReport> {
    plan.validate()?;
    let mut report = BenchmarkReport {
        realtime: plan.realtime,
        ..BenchmarkReport::default()
    };
    for &encoding in &plan.encodings {
        for repetition in 0..plan.repetitions {
            match run_once(plan, encoding) {
                Ok(m) => report.rows.push(BenchmarkRow::new(encoding, repetition, m)),
                Err(e) => report.failures.push(RunFailure {
                    encoding,
                    repetition,
                    reason: e.to_string(),
                }),
            }
        }
    }
    if let Some(path) = &plan.output {
        fs::write(path, render_report(&report, ReportFormat::Csv)?)?;
    }
    Ok(report)
}

fn fidelity_error(got: &Framebuffer, want: &Framebuffer, when: &str) -> Error {
    match got.first_difference(want) {
        Some((x, y, a, b)) => Error::Validation(format!(
            "fidelity gate failed {when}: first difference at ({x},{y}): viewer {a:#08x}, server {b:#08x}"
        )),
        None => Error::Validation(format!("fidelity gate failed {when}: geometry differs")),
    }
}

fn converge(client: &HeadlessClient, want: &Framebuffer, timeout: Duration, when: &str) -> Result<()> {
    client.wait_for(want, timeout).map_err(|e| match e {
        Error::Transport(ref io) if io.kind() == std::io::ErrorKind::TimedOut => {
            fidelity_error(&client.framebuffer(), want, when)
        }
        other => other,
    })
}

fn run_once(plan: &BenchmarkPlan, encoding: Encoding) -> Result<SessionMetrics> {
    let choice = EncodingChoice {
        encoding,
        strict: plan.strict,
    };
    let mut settings = RelaySettings::new(choice);
    if plan.realtime {
        settings = settings.with_link(plan.link);
    }
    let tap = MetricsTap::new();
    let (down_end, client_end) = pipe()?;

    let (scene, replica, relay) = match &plan.server {
        None => {
            let scene = SharedScene::new(Scene::new(plan.scenario.clone()), ClockMode::Virtual);
            let (srv_end, up_end) = pipe()?;
            let s = scene.clone();
            thread::spawn(move || serve_session(srv_end, &s, &ServerPolicy::default()));
            let t = tap.clone();
            let relay = thread::spawn(move || relay_session(up_end, down_end, &settings, &t));
            (Some(scene), None, relay)
        }
        Some(addr) => {
            let upstream = TcpStream::connect(addr)?;
            let t = tap.clone();
            let relay = thread::spawn(move || relay_session(upstream, down_end, &settings, &t));
            (None, Some(Scene::new(plan.scenario.clone())), relay)
        }
    };

    let outcome = (|| -> Result<f64> {
        let client = HeadlessClient::connect(client_end, &ClientConfig::new(encoding))?;
        let frames = (plan.scenario.duration() * 1000.0 / FRAME_MS as f64).ceil() as u64;
        match (scene, replica) {
            (Some(scene), _) if plan.realtime => {
                converge(&client, &scene.snapshot(), FRAME_TIMEOUT, "on the first frame")?;
                let started = Instant::now();
                for frame in 1..=frames {
                    let due = started + Duration::from_millis(frame * FRAME_MS);
                    if let Some(wait) = due.checked_duration_since(Instant::now()) {
                        thread::sleep(wait);
                    }
                    scene.tick();
                }
                converge(&client, &scene.snapshot(), DRAIN_TIMEOUT, "after the scenario")?;
                Ok(started.elapsed().as_secs_f64())
            }
            (Some(scene), _) => {
                converge(&client, &scene.snapshot(), FRAME_TIMEOUT, "on the first frame")?;
                for frame in 1..=frames {
                    scene.tick();
                    converge(&client, &scene.snapshot(), FRAME_TIMEOUT, &format!("at frame {frame}"))?;
                }
                Ok(plan.scenario.duration())
            }
            (None, Some(mut replica)) => {
                // The server may have been played by an earlier run.
                client.send(&ClientMessage::KeyEvent {
                    down: true,
                    keysym: REWIND_KEYSYM,
                })?;
                converge(&client, replica.framebuffer(), FRAME_TIMEOUT, "on the first frame")?;
                for frame in 1..=frames {
                    client.send(&ClientMessage::KeyEvent {
                        down: true,
                        keysym: TICK_KEYSYM,
                    })?;
                    replica.advance_by(FRAME_MS as f64 / 1000.0);
                    converge(
                        &client,
                        replica.framebuffer(),
                        FRAME_TIMEOUT,
                        &format!("at frame {frame}"),
                    )?;
                }
                Ok(plan.scenario.duration())
            }
            (None, None) => unreachable!("a run has either a local scene or a replica"),
        }
    })();

    // Closing the viewer ends the relay; its metrics are final afterwards.
    let relayed = relay
        .join()
        .unwrap_or_else(|_| Err(Error::Protocol("relay panicked".into())));
    let duration = outcome?;
    relayed?;
    Ok(SessionMetrics {
        duration_s: duration,
        ..tap.snapshot()
    })
}
