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

//! Encoding benchmark: replays a scenario once per encoding through the
//! server, the relay and a headless viewer, and compares the sessions.

mod report;
mod run;

pub use report::{
    compare_encodings, csv_header, csv_row, parse_csv, render_report, BenchmarkReport, BenchmarkRow, CsvRecord,
    ReportFormat, RunFailure, Verdict,
};
pub use run::{run_benchmark, BenchmarkPlan};
