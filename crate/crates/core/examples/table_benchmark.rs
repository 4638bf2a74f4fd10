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

//! Compares Raw, Hextile and Zlib on the reference scenario and prints the
//! comparison table with its verdicts. `--realtime` plays the scenario in
//! wall-clock time over a throttled 8 Mbit/s link instead of stepping it.

use std::time::Duration;

use rfbkit::accel::LinkConfig;
use rfbkit::bench::{compare_encodings, render_report, run_benchmark, BenchmarkPlan, ReportFormat};
use rfbkit::model::Encoding;
use rfbkit::server::Scenario;

fn main() -> rfbkit::Result<()> {
    let link = LinkConfig::new(8_000_000, 16384, Duration::from_millis(40))?;
    let mut plan = BenchmarkPlan::new(
        Scenario::reference(42),
        vec![Encoding::Raw, Encoding::Hextile, Encoding::Zlib],
        link,
    );
    plan.realtime = std::env::args().any(|a| a == "--realtime");
    let report = run_benchmark(&plan)?;
    print!("{}", render_report(&report, ReportFormat::Text)?);
    for verdict in compare_encodings(&report)? {
        println!("{verdict}");
    }
    Ok(())
}
