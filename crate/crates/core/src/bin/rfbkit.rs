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

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use rfbkit::accel::{Accelerator, LinkConfig, RelayConfig, RelaySettings};
use rfbkit::bench::{compare_encodings, render_report, run_benchmark, BenchmarkPlan, ReportFormat};
use rfbkit::codecs::EncodingChoice;
use rfbkit::model::Encoding;
use rfbkit::server::{load_scenario, ClockMode, Scenario, SceneServer};

#[derive(Parser)]
#[command(
    name = "rfbkit",
    version,
    about = "Remote framebuffer server, relay and encoding benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Clock {
    Real,
    Virtual,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the synthetic desktop.
    Server {
        #[arg(long, default_value = "127.0.0.1:5900")]
        listen: String,
        /// Scenario file; the built-in reference scenario when omitted.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "real")]
        clock: Clock,
    },
    /// Relay a server to viewers, re-encoding and throttling.
    Accel {
        #[arg(long)]
        upstream: String,
        #[arg(long, default_value = "127.0.0.1:5901")]
        listen: String,
        #[arg(long, default_value = "zlib")]
        encoding: Encoding,
        #[arg(long)]
        strict: bool,
        /// Link rate in bits per second; unthrottled when omitted.
        #[arg(long)]
        rate: Option<u64>,
        #[arg(long, default_value_t = 16384)]
        burst: u64,
        /// One-way latency in milliseconds.
        #[arg(long, default_value_t = 0)]
        latency: u64,
        #[arg(long)]
        metrics: Option<PathBuf>,
        #[arg(long)]
        ws_listen: Option<String>,
    },
    /// Compare encodings on a scenario.
    Bench {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_delimiter = ',', default_value = "raw,hextile,zlib")]
        encodings: Vec<Encoding>,
        #[arg(long, default_value_t = 8_000_000)]
        rate: u64,
        #[arg(long, default_value_t = 16384)]
        burst: u64,
        #[arg(long, default_value_t = 40)]
        latency: u64,
        #[arg(long, default_value_t = 1)]
        reps: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        realtime: bool,
        /// Let RRE and Hextile fall back to Raw per rectangle.
        #[arg(long)]
        fallback: bool,
        /// Benchmark an external server (virtual clock, driven with F12).
        #[arg(long)]
        server: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn scenario(path: Option<PathBuf>, seed: Option<u64>) -> rfbkit::Result<Scenario> {
    let mut s = match path {
        Some(p) => load_scenario(p)?,
        None => Scenario::reference(42),
    };
    if let Some(seed) = seed {
        s.seed = seed;
    }
    Ok(s)
}

fn run(cli: Cli) -> rfbkit::Result<bool> {
    match cli.command {
        Command::Server {
            listen,
            scenario: path,
            seed,
            clock,
        } => {
            let mode = match clock {
                Clock::Real => ClockMode::Real,
                Clock::Virtual => ClockMode::Virtual,
            };
            let server = SceneServer::bind(&listen, scenario(path, seed)?, mode)?;
            eprintln!("serving on {}", server.local_addr()?);
            server.run()?;
            Ok(true)
        }
        Command::Accel {
            upstream,
            listen,
            encoding,
            strict,
            rate,
            burst,
            latency,
            metrics,
            ws_listen,
        } => {
            let mut settings = RelaySettings::new(EncodingChoice { encoding, strict });
            if let Some(rate) = rate {
                settings = settings.with_link(LinkConfig::new(rate, burst, Duration::from_millis(latency))?);
            }
            let accel = Accelerator::bind(RelayConfig {
                upstream,
                listen,
                ws_listen,
                settings,
                metrics_path: metrics,
            })?;
            eprintln!("relaying on {}", accel.local_addr()?);
            if let Some(ws) = accel.ws_addr() {
                eprintln!("websocket viewers on {ws}");
            }
            accel.run()?;
            Ok(true)
        }
        Command::Bench {
            scenario: path,
            seed,
            encodings,
            rate,
            burst,
            latency,
            reps,
            out,
            realtime,
            fallback,
            server,
            format,
        } => {
            let link = LinkConfig::new(rate, burst, Duration::from_millis(latency))?;
            let mut plan = BenchmarkPlan::new(scenario(path, seed)?, encodings, link);
            plan.repetitions = reps;
            plan.realtime = realtime;
            plan.strict = !fallback;
            plan.server = server;
            plan.output = out;
            let report = run_benchmark(&plan)?;
            let format = match format {
                Format::Text => ReportFormat::Text,
                Format::Csv => ReportFormat::Csv,
            };
            print!("{}", render_report(&report, format)?);
            let mut ok = report.passed();
            match compare_encodings(&report) {
                Ok(verdicts) => {
                    for v in &verdicts {
                        println!("{v}");
                    }
                    ok &= verdicts.iter().all(|v| v.pass);
                }
                Err(e) => println!("no comparison: {e}"),
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
