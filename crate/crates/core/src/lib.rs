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

//! Remote framebuffer toolkit: codecs, wire protocol, a synthetic scene
//! server, a transcoding relay with link throttling, and an encoding
//! benchmark harness.

pub mod accel;
pub mod bench;
pub mod client;
pub mod codecs;
pub mod error;
pub mod model;
pub mod server;
pub mod wire;

pub use error::{Error, Result};
