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

//! Scene server behind the relay with a simulated 8 Mbit/s, 40 ms link. A
//! viewer watches the browser opening in real time, once per encoding, and
//! the relay's metrics show how many updates made it through.

use std::net::TcpStream;
use std::thread;
use std::time::Duration;

use rfbkit::accel::{Accelerator, LinkConfig, RelayConfig, RelaySettings};
use rfbkit::client::{ClientConfig, HeadlessClient};
use rfbkit::codecs::EncodingChoice;
use rfbkit::model::Encoding;
use rfbkit::server::{ClockMode, Scenario, SceneServer};

fn main() -> rfbkit::Result<()> {
    let link = LinkConfig::new(8_000_000, 16384, Duration::from_millis(40))?;
    for encoding in [Encoding::Raw, Encoding::Hextile, Encoding::Zlib] {
        let mut scenario = Scenario::reference(42);
        scenario.steps.truncate(3);
        let server = SceneServer::bind("127.0.0.1:0", scenario, ClockMode::Real)?;
        let scene = server.scene().clone();
        let upstream = server.local_addr()?.to_string();
        let stop = server.stop_handle();
        let handle = thread::spawn(move || server.run());

        let accel = Accelerator::bind(RelayConfig {
            upstream,
            listen: "127.0.0.1:0".into(),
            ws_listen: None,
            settings: RelaySettings::new(EncodingChoice::new(encoding)).with_link(link),
            metrics_path: None,
        })?;
        let addr = accel.local_addr()?;
        thread::spawn(move || accel.run());

        let client = HeadlessClient::connect(TcpStream::connect(addr)?, &ClientConfig::new(encoding))?;
        while !scene.finished() {
            thread::sleep(Duration::from_millis(50));
        }
        client.wait_for(&scene.snapshot(), Duration::from_secs(60))?;
        let (_, m) = client.close();
        println!(
            "{:<8} {:>3} updates in {:.1} s, {:>10} bytes on the wire",
            encoding.name(),
            m.updates,
            m.duration_s,
            m.compressed_bytes
        );
        stop.stop();
        let _ = handle.join();
    }
    Ok(())
}
