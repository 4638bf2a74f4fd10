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

//! The relay's WebSocket entry point. A browser viewer would connect to the
//! printed URL; here a tungstenite client stands in for it and reads the
//! first bytes of the RFB stream from binary frames.
//!
//! With `--serve` the server and relay keep running until interrupted.

use std::net::TcpStream;
use std::thread;

use rfbkit::accel::{Accelerator, RelayConfig, RelaySettings};
use rfbkit::codecs::EncodingChoice;
use rfbkit::model::Encoding;
use rfbkit::server::{ClockMode, Scenario, SceneServer};
use tungstenite::Message;

fn main() -> rfbkit::Result<()> {
    let server = SceneServer::bind("127.0.0.1:0", Scenario::reference(42), ClockMode::Real)?;
    let upstream = server.local_addr()?.to_string();
    thread::spawn(move || server.run());

    let accel = Accelerator::bind(RelayConfig {
        upstream,
        listen: "127.0.0.1:0".into(),
        ws_listen: Some("127.0.0.1:0".into()),
        settings: RelaySettings::new(EncodingChoice::new(Encoding::Zlib)),
        metrics_path: None,
    })?;
    let ws = accel.ws_addr().expect("websocket listener");
    println!("websocket bridge on ws://{ws}/");
    if std::env::args().any(|a| a == "--serve") {
        return accel.run();
    }
    thread::spawn(move || accel.run());

    let url = format!("ws://{ws}/");
    let (mut socket, _) =
        tungstenite::client(url, TcpStream::connect(ws)?).map_err(|e| rfbkit::Error::Handshake(e.to_string()))?;
    match socket.read() {
        Ok(Message::Binary(bytes)) => println!("first frame: {:?}", String::from_utf8_lossy(&bytes)),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
