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

//! Connection setup: version exchange, security (type None only), and the
//! ClientInit / ServerInit pair.

use std::io::{self, Read, Write};

use super::messages::read_u32;
use crate::error::{Error, Result};
use crate::model::PixelFormat;

pub const PROTOCOL_VERSION: &[u8; 12] = b"RFB 003.008\n";
pub const SECURITY_NONE: u8 = 1;
const MAX_NAME_LEN: u32 = 4096;

/// What both ends know once the handshake has completed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HandshakeResult {
    pub version: String,
    pub security: SecurityType,
    pub width: u16,
    pub height: u16,
    pub format: PixelFormat,
    pub name: String,
    /// ClientInit shared-flag as sent by the viewer.
    pub shared: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecurityType {
    None,
}

/// Parameters the server announces in ServerInit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerInit {
    pub width: u16,
    pub height: u16,
    pub format: PixelFormat,
    pub name: String,
}

impl ServerInit {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(24 + self.name.len());
        out.extend_from_slice(&self.width.to_be_bytes());
        out.extend_from_slice(&self.height.to_be_bytes());
        out.extend_from_slice(&self.format.to_wire());
        out.extend_from_slice(&(self.name.len() as u32).to_be_bytes());
        out.extend_from_slice(self.name.as_bytes());
        out
    }
}

fn version_string() -> String {
    String::from_utf8_lossy(&PROTOCOL_VERSION[..11]).into_owned()
}

fn framing_on_eof(what: &'static str) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Transport(io) if io.kind() == io::ErrorKind::UnexpectedEof => {
            Error::Framing(format!("connection closed inside {what}"))
        }
        other => other,
    }
}

/// Runs the server side of the handshake on a fresh connection.
pub fn server_handshake<S: Read + Write + ?Sized>(conn: &mut S, init: &ServerInit) -> Result<HandshakeResult> {
    conn.write_all(PROTOCOL_VERSION)?;
    conn.flush()?;
    let mut version = [0u8; 12];
    conn.read_exact(&mut version)?;
    if &version != PROTOCOL_VERSION {
        return Err(Error::Handshake(format!(
            "unsupported client version {:?}",
            String::from_utf8_lossy(&version)
        )));
    }

    conn.write_all(&[1, SECURITY_NONE])?;
    conn.flush()?;
    let mut chosen = [0u8; 1];
    conn.read_exact(&mut chosen)?;
    if chosen[0] != SECURITY_NONE {
        let reason = b"only security type None is offered";
        conn.write_all(&1u32.to_be_bytes())?;
        conn.write_all(&(reason.len() as u32).to_be_bytes())?;
        conn.write_all(reason)?;
        conn.flush()?;
        return Err(Error::Handshake(format!("client chose security type {}", chosen[0])));
    }
    conn.write_all(&0u32.to_be_bytes())?;
    conn.flush()?;

    let mut shared = [0u8; 1];
    conn.read_exact(&mut shared)?;
    conn.write_all(&init.to_bytes())?;
    conn.flush()?;

    Ok(HandshakeResult {
        version: version_string(),
        security: SecurityType::None,
        width: init.width,
        height: init.height,
        format: init.format,
        name: init.name.clone(),
        shared: shared[0] != 0,
    })
}

fn read_reason<S: Read + ?Sized>(conn: &mut S) -> String {
    let Ok(len) = read_u32(conn) else {
        return String::from("(no reason given)");
    };
    let mut text = vec![0u8; len.min(MAX_NAME_LEN) as usize];
    if conn.read_exact(&mut text).is_err() {
        return String::from("(truncated reason)");
    }
    String::from_utf8_lossy(&text).into_owned()
}

/// Runs the viewer side of the handshake.
pub fn client_handshake<S: Read + Write + ?Sized>(conn: &mut S, shared: bool) -> Result<HandshakeResult> {
    let mut version = [0u8; 12];
    conn.read_exact(&mut version)?;
    if &version != PROTOCOL_VERSION {
        return Err(Error::Handshake(format!(
            "unsupported server version {:?}",
            String::from_utf8_lossy(&version)
        )));
    }
    conn.write_all(PROTOCOL_VERSION)?;
    conn.flush()?;

    let mut count = [0u8; 1];
    conn.read_exact(&mut count)?;
    if count[0] == 0 {
        return Err(Error::Handshake(format!("server refused: {}", read_reason(conn))));
    }
    let mut types = vec![0u8; count[0].into()];
    conn.read_exact(&mut types)?;
    if !types.contains(&SECURITY_NONE) {
        return Err(Error::Handshake(format!(
            "server offers no usable security type: {types:?}"
        )));
    }
    conn.write_all(&[SECURITY_NONE])?;
    conn.flush()?;
    let result = read_u32(conn)?;
    if result != 0 {
        return Err(Error::Handshake(format!("security failed: {}", read_reason(conn))));
    }

    conn.write_all(&[u8::from(shared)])?;
    conn.flush()?;

    let init = read_server_init(conn).map_err(framing_on_eof("ServerInit"))?;
    Ok(HandshakeResult {
        version: version_string(),
        security: SecurityType::None,
        width: init.width,
        height: init.height,
        format: init.format,
        name: init.name,
        shared,
    })
}

fn read_server_init<S: Read + ?Sized>(conn: &mut S) -> Result<ServerInit> {
    let mut head = [0u8; 20];
    conn.read_exact(&mut head)?;
    let width = u16::from_be_bytes([head[0], head[1]]);
    let height = u16::from_be_bytes([head[2], head[3]]);
    let format = PixelFormat::from_wire(head[4..20].try_into().expect("16 bytes"));
    let len = read_u32(conn)?;
    if len > MAX_NAME_LEN {
        return Err(Error::Handshake(format!("desktop name of {len} bytes")));
    }
    let mut name = vec![0u8; len as usize];
    conn.read_exact(&mut name)?;
    if width == 0 || height == 0 {
        return Err(Error::Handshake(format!("server announced a {width}x{height} desktop")));
    }
    format
        .validate()
        .map_err(|e| Error::Handshake(format!("server pixel format: {e}")))?;
    Ok(ServerInit {
        width,
        height,
        format,
        name: String::from_utf8_lossy(&name).into_owned(),
    })
}
