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

//! Crate-wide error type.

use std::io;

use thiserror::Error;

/// Errors produced by the codecs, the wire layer, the scene server, the relay
/// and the benchmark driver.
#[derive(Debug, Error)]
pub enum Error {
    /// A pixel value does not fit the declared pixel format.
    #[error("value {value:#x} does not fit in {bits} bits per pixel")]
    Range { value: u32, bits: u8 },

    /// A rectangle or coordinate lies outside the surface it addresses.
    #[error("out of bounds: {0}")]
    Bounds(String),

    /// Payload length or structure does not match its declared layout.
    #[error("framing error: {0}")]
    Framing(String),

    /// The peer sent a message or encoding we do not understand.
    #[error("protocol error: {0}")]
    Protocol(String),

    /// Version or security negotiation failed.
    #[error("handshake error: {0}")]
    Handshake(String),

    /// The compressed stream is corrupt or out of sync.
    #[error("decompression error: {0}")]
    Decompress(String),

    /// Two framebuffers that must agree on geometry do not.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A pixel format or configuration breaks one of its invariants.
    #[error("invalid: {0}")]
    Invalid(String),

    /// A scenario file could not be parsed.
    #[error("scenario parse error: {0}")]
    Parse(String),

    /// A scenario parsed but is not usable.
    #[error("scenario validation error: {0}")]
    Validation(String),

    /// Report values disagree with each other.
    #[error("consistency error: {0}")]
    Consistency(String),

    /// Caller-side precondition failure.
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("transport error: {0}")]
    Transport(#[from] io::Error),
}

impl Error {
    /// True for errors caused by the peer going away (clean EOF or reset).
    pub fn is_disconnect(&self) -> bool {
        match self {
            Error::Transport(e) => matches!(
                e.kind(),
                io::ErrorKind::UnexpectedEof
                    | io::ErrorKind::ConnectionReset
                    | io::ErrorKind::ConnectionAborted
                    | io::ErrorKind::BrokenPipe
                    | io::ErrorKind::NotConnected
            ),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
