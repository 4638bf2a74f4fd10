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

//! Scripted workloads: a seeded list of timed scene changes loaded from JSON.
//!
//! ```json
//! { "seed": 42, "width": 480, "height": 800,
//!   "steps": [ {"kind": "home"},
//!              {"kind": "open_app", "app": "browser"},
//!              {"kind": "wait", "seconds": 3},
//!              {"kind": "scroll", "dy": 8, "seconds": 1.5},
//!              {"kind": "end"} ] }
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time the home screen is shown when a `home` step gives no duration.
pub const DEFAULT_HOME_SECONDS: f64 = 0.5;
/// Length of the app-opening animation when an `open_app` step gives none.
pub const DEFAULT_OPEN_SECONDS: f64 = 1.5;

const MIN_SIDE: u16 = 64;
const MAX_SIDE: u16 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum App {
    Browser,
    MusicPlayer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioStep {
    Home {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seconds: Option<f64>,
    },
    OpenApp {
        app: App,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seconds: Option<f64>,
    },
    Wait {
        seconds: f64,
    },
    /// Scrolls the open page by `dy` pixels per animation frame.
    Scroll {
        dy: i32,
        seconds: f64,
    },
    End,
}

impl ScenarioStep {
    pub fn duration(&self) -> f64 {
        match self {
            ScenarioStep::Home { seconds } => seconds.unwrap_or(DEFAULT_HOME_SECONDS),
            ScenarioStep::OpenApp { seconds, .. } => seconds.unwrap_or(DEFAULT_OPEN_SECONDS),
            ScenarioStep::Wait { seconds } | ScenarioStep::Scroll { seconds, .. } => *seconds,
            ScenarioStep::End => 0.0,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            ScenarioStep::Home { .. } => "home",
            ScenarioStep::OpenApp { .. } => "open_app",
            ScenarioStep::Wait { .. } => "wait",
            ScenarioStep::Scroll { .. } => "scroll",
            ScenarioStep::End => "end",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    pub width: u16,
    pub height: u16,
    pub steps: Vec<ScenarioStep>,
}

impl Scenario {
    /// The bundled reference workload: home, browser, a pause, the music
    /// player, another pause, back home. Ten seconds in total.
    pub fn reference(seed: u64) -> Self {
        Self {
            seed,
            width: 480,
            height: 800,
            steps: vec![
                ScenarioStep::Home { seconds: None },
                ScenarioStep::OpenApp {
                    app: App::Browser,
                    seconds: None,
                },
                ScenarioStep::Wait { seconds: 3.0 },
                ScenarioStep::OpenApp {
                    app: App::MusicPlayer,
                    seconds: None,
                },
                ScenarioStep::Wait { seconds: 3.0 },
                ScenarioStep::Home { seconds: None },
                ScenarioStep::End,
            ],
        }
    }

    /// Reference workload variant with a page scroll, exercising CopyRect.
    pub fn scrolling(seed: u64) -> Self {
        Self {
            seed,
            width: 480,
            height: 800,
            steps: vec![
                ScenarioStep::Home { seconds: None },
                ScenarioStep::OpenApp {
                    app: App::Browser,
                    seconds: None,
                },
                ScenarioStep::Wait { seconds: 2.5 },
                ScenarioStep::Scroll { dy: 8, seconds: 2.0 },
                ScenarioStep::Wait { seconds: 0.5 },
                ScenarioStep::Home { seconds: None },
                ScenarioStep::End,
            ],
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Sum of step durations, in seconds.
    pub fn duration(&self) -> f64 {
        self.steps.iter().map(ScenarioStep::duration).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps.is_empty() {
            return Err(Error::Validation("scenario has no steps".into()));
        }
        for (name, side) in [("width", self.width), ("height", self.height)] {
            if !(MIN_SIDE..=MAX_SIDE).contains(&side) {
                return Err(Error::Validation(format!(
                    "{name} {side} outside {MIN_SIDE}..={MAX_SIDE}"
                )));
            }
        }
        let mut browser_open = false;
        for (i, step) in self.steps.iter().enumerate() {
            let d = step.duration();
            if !d.is_finite() || d < 0.0 {
                return Err(Error::Validation(format!(
                    "step {i} ({}) has duration {d}",
                    step.kind()
                )));
            }
            match step {
                ScenarioStep::Wait { seconds } if *seconds <= 0.0 => {
                    return Err(Error::Validation(format!("step {i}: wait must be longer than 0 s")));
                }
                ScenarioStep::Scroll { dy, seconds } => {
                    if *dy == 0 {
                        return Err(Error::Validation(format!("step {i}: scroll dy must be non-zero")));
                    }
                    if *seconds <= 0.0 {
                        return Err(Error::Validation(format!("step {i}: scroll must last longer than 0 s")));
                    }
                    if !browser_open {
                        return Err(Error::Validation(format!("step {i}: scroll needs the browser open")));
                    }
                }
                ScenarioStep::End if i + 1 != self.steps.len() => {
                    return Err(Error::Validation(format!("step {i}: end must be the last step")));
                }
                _ => {}
            }
            match step {
                ScenarioStep::Home { .. } => browser_open = false,
                ScenarioStep::OpenApp { app, .. } => browser_open = *app == App::Browser,
                _ => {}
            }
        }
        if self.duration() <= 0.0 {
            return Err(Error::Validation("scenario lasts 0 s".into()));
        }
        Ok(())
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    Scenario::from_json(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}
