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

//! WebSocket bridge for browser viewers. Binary messages carry the RFB byte
//! stream unchanged in both directions; each WebSocket connection becomes
//! one relayed session.

use std::io::{self, Read, Write};
use std::net::{Shutdown, TcpStream};
use std::os::unix::net::UnixStream;
use std::sync::mpsc::{self, TryRecvError};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use tungstenite::{Message, WebSocket};

use crate::error::{Error, Result};

const POLL: Duration = Duration::from_millis(5);

/// Completes the WebSocket handshake on `tcp` and returns the relay-side end
/// of an in-memory pipe. A pump thread moves bytes between the two until
/// either side closes.
pub fn accept_websocket(tcp: TcpStream) -> Result<(UnixStream, JoinHandle<()>)> {
    tcp.set_nodelay(true)?;
    let ws = tungstenite::accept(tcp).map_err(|e| Error::Handshake(format!("websocket: {e}")))?;
    ws.get_ref().set_read_timeout(Some(POLL))?;
    let (relay_end, bridge_end) = UnixStream::pair()?;
    let pump = thread::spawn(move || pump(ws, bridge_end));
    Ok((relay_end, pump))
}

fn pump(mut ws: WebSocket<TcpStream>, pipe: UnixStream) {
    let (tx, rx) = mpsc::channel::<Vec<u8>>();
    let Ok(mut pipe_reader) = pipe.try_clone() else {
        return;
    };
    let reader = thread::spawn(move || {
        let mut buf = vec![0u8; 64 * 1024];
        loop {
            match pipe_reader.read(&mut buf) {
                Ok(0) | Err(_) => break,
                Ok(n) => {
                    if tx.send(buf[..n].to_vec()).is_err() {
                        break;
                    }
                }
            }
        }
    });
    let mut pipe_writer = &pipe;
    'outer: loop {
        loop {
            match rx.try_recv() {
                Ok(bytes) => {
                    if ws.send(Message::binary(bytes)).is_err() {
                        break 'outer;
                    }
                }
                Err(TryRecvError::Empty) => break,
                Err(TryRecvError::Disconnected) => {
                    let _ = ws.close(None);
                    let _ = ws.flush();
                    break 'outer;
                }
            }
        }
        match ws.read() {
            Ok(Message::Binary(data)) => {
                if pipe_writer.write_all(&data).is_err() {
                    break;
                }
            }
            Ok(Message::Close(_)) => break,
            Ok(_) => {}
            Err(tungstenite::Error::Io(e))
                if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => {}
            Err(_) => break,
        }
    }
    let _ = pipe.shutdown(Shutdown::Both);
    let _ = ws.get_ref().shutdown(Shutdown::Both);
    let _ = reader.join();
}
