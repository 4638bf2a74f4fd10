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

use std::fmt;
use std::str::FromStr;

use super::rect::Rect;
use crate::error::{Error, Result};

/// Rectangle encodings understood by this crate, with their wire ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Encoding {
    Raw,
    CopyRect,
    Rre,
    Hextile,
    Zlib,
}

impl Encoding {
    pub const ALL: [Encoding; 5] = [
        Encoding::Raw,
        Encoding::CopyRect,
        Encoding::Rre,
        Encoding::Hextile,
        Encoding::Zlib,
    ];

    pub const fn id(self) -> i32 {
        match self {
            Encoding::Raw => 0,
            Encoding::CopyRect => 1,
            Encoding::Rre => 2,
            Encoding::Hextile => 5,
            Encoding::Zlib => 6,
        }
    }

    pub fn from_id(id: i32) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.id() == id)
    }

    pub const fn name(self) -> &'static str {
        match self {
            Encoding::Raw => "raw",
            Encoding::CopyRect => "copyrect",
            Encoding::Rre => "rre",
            Encoding::Hextile => "hextile",
            Encoding::Zlib => "zlib",
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Encoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Invalid(format!("unknown encoding {s:?}")))
    }
}

/// One rectangle of a framebuffer update: header fields plus encoded payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RectUpdate {
    pub rect: Rect,
    pub encoding: Encoding,
    pub payload: Vec<u8>,
}

impl RectUpdate {
    /// Size of the header preceding each payload on the wire.
    pub const HEADER_LEN: usize = 12;

    pub fn new(rect: Rect, encoding: Encoding, payload: Vec<u8>) -> Self {
        Self {
            rect,
            encoding,
            payload,
        }
    }
}
