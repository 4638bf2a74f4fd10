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

//! Byte-stream transports that can be split into independent read and write
//! halves, so one task can read client messages while another sends updates.

use std::io::{self, Read, Write};
use std::net::{Shutdown, TcpStream};
use std::os::unix::net::UnixStream;
use std::sync::Arc;

/// Closes both directions of the underlying connection, unblocking any
/// reader or writer still attached to it.
#[derive(Clone)]
pub struct Closer(Arc<dyn Fn() + Send + Sync>);

impl Closer {
    pub fn close(&self) {
        (self.0)()
    }

    /// A closer that does nothing, for transports without a shutdown notion.
    pub fn noop() -> Self {
        Closer(Arc::new(|| {}))
    }
}

impl std::fmt::Debug for Closer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Closer")
    }
}

pub struct Halves {
    pub reader: Box<dyn Read + Send>,
    pub writer: Box<dyn Write + Send>,
    pub closer: Closer,
}

pub trait Transport: Read + Write + Send + 'static {
    fn split(self) -> io::Result<Halves>;
}

impl Transport for TcpStream {
    fn split(self) -> io::Result<Halves> {
        self.set_nodelay(true)?;
        let reader = self.try_clone()?;
        let closer = self.try_clone()?;
        Ok(Halves {
            reader: Box::new(reader),
            writer: Box::new(self),
            closer: Closer(Arc::new(move || {
                let _ = closer.shutdown(Shutdown::Both);
            })),
        })
    }
}

impl Transport for UnixStream {
    fn split(self) -> io::Result<Halves> {
        let reader = self.try_clone()?;
        let closer = self.try_clone()?;
        Ok(Halves {
            reader: Box::new(reader),
            writer: Box::new(self),
            closer: Closer(Arc::new(move || {
                let _ = closer.shutdown(Shutdown::Both);
            })),
        })
    }
}

/// A connected in-memory duplex pipe.
pub fn pipe() -> io::Result<(UnixStream, UnixStream)> {
    UnixStream::pair()
}
