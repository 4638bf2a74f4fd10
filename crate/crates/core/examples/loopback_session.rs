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

//! A scene server and a headless viewer on loopback TCP. The server runs on
//! a virtual clock that this program ticks, waiting after each frame until
//! the viewer shows exactly the server picture.

use std::net::TcpStream;
use std::thread;
use std::time::Duration;

use rfbkit::client::{ClientConfig, HeadlessClient};
use rfbkit::model::Encoding;
use rfbkit::server::{ClockMode, Scenario, SceneServer};

fn main() -> rfbkit::Result<()> {
    let server = SceneServer::bind("127.0.0.1:0", Scenario::scrolling(42), ClockMode::Virtual)?;
    let addr = server.local_addr()?;
    let scene = server.scene().clone();
    let stop = server.stop_handle();
    let handle = thread::spawn(move || server.run());

    let config = ClientConfig::new(Encoding::Hextile).with_copyrect();
    let client = HeadlessClient::connect(TcpStream::connect(addr)?, &config)?;
    println!(
        "connected to {:?} ({}x{})",
        client.server().name,
        client.server().width,
        client.server().height
    );
    let timeout = Duration::from_secs(10);
    client.wait_for(&scene.snapshot(), timeout)?;
    while !scene.finished() {
        scene.tick();
        client.wait_for(&scene.snapshot(), timeout)?;
    }
    let (_, metrics) = client.close();
    println!("{metrics}");

    stop.stop();
    let _ = handle.join();
    Ok(())
}
