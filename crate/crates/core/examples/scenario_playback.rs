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

//! Steps through a scenario frame by frame and reports how much of the screen
//! each step repaints. Pass a scenario file to play it instead of the
//! built-in reference.

use rfbkit::server::{load_scenario, Scenario, Scene, FRAME_MS};

fn main() -> rfbkit::Result<()> {
    let scenario = match std::env::args().nth(1) {
        Some(path) => load_scenario(path)?,
        None => Scenario::reference(42),
    };
    let mut scene = Scene::new(scenario);
    let screen = u64::from(scene.layout().width) * u64::from(scene.layout().height);
    let mut step = scene.step_index();
    let (mut frames, mut area, mut rects, mut copies) = (0u64, 0u64, 0usize, 0usize);
    let report = |step: usize, frames: u64, area: u64, rects: usize, copies: usize| {
        println!(
            "step {step}: {frames:>3} frames, {rects:>5} rects, {:>6.1}% of screen per frame, {copies} copy hints",
            if frames > 0 {
                100.0 * area as f64 / (frames * screen) as f64
            } else {
                0.0
            }
        );
    };
    while !scene.finished() {
        let change = scene.advance_by(FRAME_MS as f64 / 1000.0);
        if scene.step_index() != step {
            report(step, frames, area, rects, copies);
            step = scene.step_index();
            (frames, area, rects, copies) = (0, 0, 0, 0);
        }
        frames += 1;
        area += change.damage.area();
        rects += change.damage.len();
        copies += usize::from(change.copy.is_some());
    }
    report(step, frames, area, rects, copies);
    Ok(())
}
