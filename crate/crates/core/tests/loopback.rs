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

//! Whole stack over real sockets: scene server, relay with a WebSocket
//! listener and a metrics file, and viewers on both entry points.

use std::io::{self, Read, Write};
use std::net::TcpStream;
use std::thread;
use std::time::{Duration, Instant};

use rfbkit::accel::{Accelerator, LinkConfig, RelayConfig, RelaySettings};
use rfbkit::bench::parse_csv;
use rfbkit::client::{ClientConfig, HeadlessClient};
use rfbkit::codecs::{EncodingChoice, RectDecoder};
use rfbkit::model::{Encoding, Framebuffer, Rect};
use rfbkit::server::{load_scenario, ClockMode, Scenario, SceneServer};
use rfbkit::wire::{client_handshake, read_update, ClientMessage};
use tungstenite::{Message, WebSocket};

const WAIT: Duration = Duration::from_secs(20);

struct WsStream {
    ws: WebSocket<TcpStream>,
    pending: Vec<u8>,
}

impl Read for WsStream {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        while self.pending.is_empty() {
            match self.ws.read().map_err(io::Error::other)? {
                Message::Binary(b) => self.pending.extend_from_slice(&b),
                Message::Close(_) => return Ok(0),
                _ => {}
            }
        }
        let n = buf.len().min(self.pending.len());
        buf[..n].copy_from_slice(&self.pending[..n]);
        self.pending.drain(..n);
        Ok(n)
    }
}

impl Write for WsStream {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.ws.send(Message::binary(buf.to_vec())).map_err(io::Error::other)?;
        Ok(buf.len())
    }
    fn flush(&mut self) -> io::Result<()> {
        self.ws.flush().map_err(io::Error::other)
    }
}

#[test]
fn tcp_and_websocket_viewers_through_the_relay() {
    let server = SceneServer::bind("127.0.0.1:0", Scenario::reference(42), ClockMode::Virtual).unwrap();
    let upstream = server.local_addr().unwrap().to_string();
    let scene = server.scene().clone();
    let stop = server.stop_handle();
    let server = thread::spawn(move || server.run());

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("relay.csv");
    let link = LinkConfig::new(200_000_000, 65536, Duration::from_millis(2)).unwrap();
    let accel = Accelerator::bind(RelayConfig {
        upstream,
        listen: "127.0.0.1:0".into(),
        ws_listen: Some("127.0.0.1:0".into()),
        settings: RelaySettings::new(EncodingChoice::new(Encoding::Hextile)).with_link(link),
        metrics_path: Some(csv.clone()),
    })
    .unwrap();
    let relay_addr = accel.local_addr().unwrap();
    let ws_addr = accel.ws_addr().unwrap();
    thread::spawn(move || accel.run());

    let client = HeadlessClient::connect(
        TcpStream::connect(relay_addr).unwrap(),
        &ClientConfig::new(Encoding::Hextile),
    )
    .unwrap();
    client.wait_for(&scene.snapshot(), WAIT).unwrap();
    for _ in 0..25 {
        scene.tick();
        client.wait_for(&scene.snapshot(), WAIT).unwrap();
    }

    let (ws, _) = tungstenite::client(format!("ws://{ws_addr}/"), TcpStream::connect(ws_addr).unwrap()).unwrap();
    let mut conn = WsStream {
        ws,
        pending: Vec::new(),
    };
    let hs = client_handshake(&mut conn, true).unwrap();
    assert_eq!((hs.width, hs.height), (480, 800));
    ClientMessage::SetEncodings(vec![Encoding::Zlib.id()])
        .write_to(&mut conn)
        .unwrap();
    ClientMessage::FramebufferUpdateRequest {
        incremental: false,
        rect: Rect::new(0, 0, hs.width, hs.height),
    }
    .write_to(&mut conn)
    .unwrap();
    let mut fb = Framebuffer::new(hs.width, hs.height, hs.format).unwrap();
    let rects = read_update(&mut conn, &mut fb, &mut RectDecoder::new()).unwrap();
    assert!(!rects.is_empty());
    assert_eq!(fb, scene.snapshot());
    drop(conn);

    let (_, metrics) = client.close();
    assert!(metrics.updates >= 2);
    let deadline = Instant::now() + WAIT;
    let records = loop {
        let text = std::fs::read_to_string(&csv).unwrap();
        let records = parse_csv(&text).unwrap();
        if records.len() >= 2 || Instant::now() > deadline {
            break records;
        }
        thread::sleep(Duration::from_millis(20));
    };
    assert_eq!(records.len(), 2, "one row per finished viewer");
    assert!(records
        .iter()
        .all(|r| r.encoding == Encoding::Hextile && r.updates >= 1));

    stop.stop();
    server.join().unwrap().unwrap();
}

#[test]
fn real_clock_server_plays_to_the_end() {
    let mut scenario = Scenario::reference(5);
    scenario.steps.truncate(2);
    let server = SceneServer::bind("127.0.0.1:0", scenario, ClockMode::Real).unwrap();
    let addr = server.local_addr().unwrap();
    let scene = server.scene().clone();
    let stop = server.stop_handle();
    let handle = thread::spawn(move || server.run());
    let client =
        HeadlessClient::connect(TcpStream::connect(addr).unwrap(), &ClientConfig::new(Encoding::Zlib)).unwrap();
    let deadline = Instant::now() + WAIT;
    while !scene.finished() {
        assert!(Instant::now() < deadline, "clock stalled at {}", scene.clock());
        thread::sleep(Duration::from_millis(50));
    }
    client.wait_for(&scene.snapshot(), WAIT).unwrap();
    stop.stop();
    handle.join().unwrap().unwrap();
}

#[test]
fn bundled_scenarios_match_the_built_in_ones() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios");
    assert_eq!(
        load_scenario(format!("{dir}/reference.json")).unwrap(),
        Scenario::reference(42)
    );
    assert_eq!(
        load_scenario(format!("{dir}/scroll.json")).unwrap(),
        Scenario::scrolling(42)
    );
}
