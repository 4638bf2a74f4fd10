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

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{Encoding, SessionMetrics};

const RATIO_TOLERANCE: f64 = 0.005;

/// Renders one row of the text table for a session.
type Cell = Box<dyn Fn(&SessionMetrics) -> String>;

/// Column schema shared by the relay's metrics file and benchmark output.
pub fn csv_header() -> &'static str {
    "encoding,updates,duration_s,updates_per_s,rects,captured_bytes,compressed_bytes,ratio"
}

pub fn csv_row(encoding: Encoding, m: &SessionMetrics) -> String {
    format!(
        "{},{},{:.3},{:.3},{},{},{},{:.2}",
        encoding.name(),
        m.updates,
        m.duration_s,
        m.updates_per_second(),
        m.rectangles,
        m.captured_bytes,
        m.compressed_bytes,
        m.compression_ratio()
    )
}

/// One parsed CSV line. Rates and ratios keep the printed precision.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRecord {
    pub encoding: Encoding,
    pub updates: u64,
    pub duration_s: f64,
    pub updates_per_s: f64,
    pub rects: u64,
    pub captured_bytes: u64,
    pub compressed_bytes: u64,
    pub ratio: f64,
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == csv_header() => {}
        other => return Err(Error::Parse(format!("unexpected CSV header {other:?}"))),
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            let bad = |what: &str| Error::Parse(format!("CSV line {}: bad {what} in {line:?}", i + 2));
            if f.len() != 8 {
                return Err(bad("field count"));
            }
            let int = |k: usize, what: &str| f[k].parse::<u64>().map_err(|_| bad(what));
            let real = |k: usize, what: &str| f[k].parse::<f64>().map_err(|_| bad(what));
            Ok(CsvRecord {
                encoding: f[0].parse().map_err(|_| bad("encoding"))?,
                updates: int(1, "updates")?,
                duration_s: real(2, "duration_s")?,
                updates_per_s: real(3, "updates_per_s")?,
                rects: int(4, "rects")?,
                captured_bytes: int(5, "captured_bytes")?,
                compressed_bytes: int(6, "compressed_bytes")?,
                ratio: real(7, "ratio")?,
            })
        })
        .collect()
}

/// Metrics of one (encoding, repetition) run that passed the fidelity gate.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub encoding: Encoding,
    pub repetition: u32,
    pub metrics: SessionMetrics,
    /// Ratio as observed when the run finished; checked against the counts
    /// when rendering.
    pub ratio: f64,
}

impl BenchmarkRow {
    pub fn new(encoding: Encoding, repetition: u32, metrics: SessionMetrics) -> Self {
        Self {
            encoding,
            repetition,
            ratio: metrics.compression_ratio(),
            metrics,
        }
    }
}

/// A run that produced no row.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub encoding: Encoding,
    pub repetition: u32,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
    pub failures: Vec<RunFailure>,
    /// True when the link was throttled in wall-clock time.
    pub realtime: bool,
}

impl BenchmarkReport {
    /// Encodings in order of first appearance.
    pub fn encodings(&self) -> Vec<Encoding> {
        let mut out = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.encoding) {
                out.push(r.encoding);
            }
        }
        out
    }

    /// Mean metrics per encoding. Counters are averaged with rounding to
    /// the nearest integer; durations are averaged exactly.
    pub fn aggregate(&self) -> Vec<(Encoding, SessionMetrics)> {
        self.encodings()
            .into_iter()
            .map(|enc| {
                let rows: Vec<&SessionMetrics> = self
                    .rows
                    .iter()
                    .filter(|r| r.encoding == enc)
                    .map(|r| &r.metrics)
                    .collect();
                let n = rows.len() as u64;
                let mean = |f: fn(&SessionMetrics) -> u64| (rows.iter().map(|m| f(m)).sum::<u64>() + n / 2) / n;
                let m = SessionMetrics {
                    updates: mean(|m| m.updates),
                    duration_s: rows.iter().map(|m| m.duration_s).sum::<f64>() / n as f64,
                    rectangles: mean(|m| m.rectangles),
                    captured_bytes: mean(|m| m.captured_bytes),
                    compressed_bytes: mean(|m| m.compressed_bytes),
                };
                (enc, m)
            })
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
}

fn check_ratio(row: &BenchmarkRow) -> Result<()> {
    let recomputed = row.metrics.compression_ratio();
    if (recomputed - row.ratio).abs() > RATIO_TOLERANCE {
        return Err(Error::Consistency(format!(
            "{} repetition {}: stored ratio {:.4} but counts give {:.4}",
            row.encoding, row.repetition, row.ratio, recomputed
        )));
    }
    Ok(())
}

/// Renders the report as CSV (one line per run) or as a comparison table
/// with metrics as rows and encodings as columns. MB means 10^6 bytes.
pub fn render_report(report: &BenchmarkReport, format: ReportFormat) -> Result<String> {
    for row in &report.rows {
        check_ratio(row)?;
    }
    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            out.push_str(csv_header());
            out.push('\n');
            for row in &report.rows {
                out.push_str(&csv_row(row.encoding, &row.metrics));
                out.push('\n');
            }
        }
        ReportFormat::Text => {
            let agg = report.aggregate();
            let label_w = 22;
            let col_w = 12;
            let _ = write!(out, "{:<label_w$}", "Metric");
            for (enc, _) in &agg {
                let _ = write!(out, "{:>col_w$}", enc.name().to_uppercase());
            }
            out.push('\n');
            let mb = |b: u64| format!("{:.2}", b as f64 / 1e6);
            let rows: [(&str, Cell); 6] = [
                ("Updates", Box::new(|m| m.updates.to_string())),
                ("Updates/second", Box::new(|m| format!("{:.2}", m.updates_per_second()))),
                ("Rectangles received", Box::new(|m| m.rectangles.to_string())),
                ("Data captured (MB)", Box::new(move |m| mb(m.captured_bytes))),
                ("Data compressed (MB)", Box::new(move |m| mb(m.compressed_bytes))),
                (
                    "Compression ratio",
                    Box::new(|m| format!("{:.2}", m.compression_ratio())),
                ),
            ];
            for (label, cell) in rows.iter() {
                let _ = write!(out, "{label:<label_w$}");
                for (_, m) in &agg {
                    let _ = write!(out, "{:>col_w$}", cell(m));
                }
                out.push('\n');
            }
            let _ = write!(out, "{:<label_w$}", "(duration s)");
            for (_, m) in &agg {
                let _ = write!(out, "{:>col_w$.3}", m.duration_s);
            }
            out.push('\n');
            for f in &report.failures {
                let _ = writeln!(out, "FAILED {} repetition {}: {}", f.encoding, f.repetition, f.reason);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {}: {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

/// Checks the expected relationships between encodings:
/// Raw's ratio is exactly 1, ratios order zlib > hextile > raw, and
/// updates per second never drop as the ratio grows.
pub fn compare_encodings(report: &BenchmarkReport) -> Result<Vec<Verdict>> {
    let agg = report.aggregate();
    if agg.len() < 2 {
        return Err(Error::Precondition(format!(
            "need at least two encodings to compare, got {}",
            agg.len()
        )));
    }
    let get = |e: Encoding| agg.iter().find(|(enc, _)| *enc == e).map(|(_, m)| *m);
    let mut verdicts = Vec::new();

    if let Some(raw) = get(Encoding::Raw) {
        let ratio = raw.compression_ratio();
        let pass = raw.captured_bytes == raw.compressed_bytes && raw.compressed_bytes > 0;
        verdicts.push(Verdict {
            name: "raw ratio == 1".into(),
            pass,
            detail: if pass {
                "raw ratio is 1.00".into()
            } else {
                format!("raw ratio \u{2260} 1 ({ratio:.4})")
            },
        });
    }

    let ranked: Vec<(Encoding, SessionMetrics)> = [Encoding::Raw, Encoding::Hextile, Encoding::Zlib]
        .into_iter()
        .filter_map(|e| get(e).map(|m| (e, m)))
        .collect();
    if ranked.len() >= 2 {
        let order = ranked
            .windows(2)
            .all(|w| w[1].1.compression_ratio() > w[0].1.compression_ratio());
        let shown: Vec<String> = ranked
            .iter()
            .rev()
            .map(|(e, m)| format!("{e} {:.2}", m.compression_ratio()))
            .collect();
        verdicts.push(Verdict {
            name: "ratio ordering zlib > hextile > raw".into(),
            pass: order,
            detail: shown.join(" > "),
        });

        let mut by_ratio = ranked.clone();
        by_ratio.sort_by(|a, b| a.1.compression_ratio().total_cmp(&b.1.compression_ratio()));
        let monotone = by_ratio
            .windows(2)
            .all(|w| w[1].1.updates_per_second() >= w[0].1.updates_per_second());
        let shown: Vec<String> = by_ratio
            .iter()
            .map(|(e, m)| format!("{e} {:.3}/s", m.updates_per_second()))
            .collect();
        verdicts.push(Verdict {
            name: "updates/s non-decreasing with ratio".into(),
            pass: monotone,
            detail: shown.join(" <= "),
        });
    }
    Ok(verdicts)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Published measurements of a phone desktop session, in bytes (MB = 10^6).
    fn table_one() -> BenchmarkReport {
        let rows = [
            (Encoding::Raw, 8, 0.32, 8, 10_100_000, 10_100_000),
            (Encoding::Hextile, 20, 0.82, 22, 26_530_000, 5_640_000),
            (Encoding::Zlib, 68, 1.65, 808, 91_700_000, 8_900_000),
        ];
        BenchmarkReport {
            rows: rows
                .into_iter()
                .map(|(e, updates, ups, rects, cap, comp)| {
                    BenchmarkRow::new(
                        e,
                        0,
                        SessionMetrics {
                            updates,
                            duration_s: updates as f64 / ups,
                            rectangles: rects,
                            captured_bytes: cap,
                            compressed_bytes: comp,
                        },
                    )
                })
                .collect(),
            failures: vec![],
            realtime: true,
        }
    }

    #[test]
    fn reference_values_pass_all_verdicts() {
        let v = compare_encodings(&table_one()).unwrap();
        assert_eq!(v.len(), 3);
        assert!(v.iter().all(|v| v.pass), "{v:?}");
    }

    #[test]
    fn raw_ratio_off_by_two_percent_fails() {
        let mut r = table_one();
        r.rows[0].metrics.compressed_bytes = (10_100_000.0 / 1.02) as u64;
        r.rows[0].ratio = r.rows[0].metrics.compression_ratio();
        let v = compare_encodings(&r).unwrap();
        let raw = v.iter().find(|v| v.name == "raw ratio == 1").unwrap();
        assert!(!raw.pass);
        assert!(raw.detail.contains("raw ratio \u{2260} 1"));
    }

    #[test]
    fn single_encoding_is_a_precondition_error() {
        let mut r = table_one();
        r.rows.truncate(1);
        assert!(matches!(compare_encodings(&r), Err(Error::Precondition(_))));
    }

    #[test]
    fn text_table_mirrors_reference_layout() {
        let text = render_report(&table_one(), ReportFormat::Text).unwrap();
        let ratio_line = text.lines().find(|l| l.starts_with("Compression ratio")).unwrap();
        let cells: Vec<&str> = ratio_line.split_whitespace().skip(2).collect();
        assert_eq!(cells, ["1.00", "4.70", "10.30"]);
        let labels: Vec<&str> = text.lines().skip(1).take(6).map(|l| l[..22].trim_end()).collect();
        assert_eq!(
            labels,
            [
                "Updates",
                "Updates/second",
                "Rectangles received",
                "Data captured (MB)",
                "Data compressed (MB)",
                "Compression ratio"
            ]
        );
        let ups: Vec<&str> = text.lines().nth(2).unwrap().split_whitespace().skip(1).collect();
        assert_eq!(ups, ["0.32", "0.82", "1.65"]);
        assert!(text.contains("26.53") && text.contains("8.90") && text.contains("10.10"));
    }

    #[test]
    fn stale_ratio_is_a_consistency_error() {
        let mut r = table_one();
        r.rows[1].ratio = 4.71;
        assert!(matches!(
            render_report(&r, ReportFormat::Csv),
            Err(Error::Consistency(_))
        ));
        r.rows[1].ratio = 4.7039;
        render_report(&r, ReportFormat::Csv).unwrap();
    }

    #[test]
    fn empty_report_is_header_only() {
        let csv = render_report(&BenchmarkReport::default(), ReportFormat::Csv).unwrap();
        assert_eq!(csv, format!("{}\n", csv_header()));
    }

    #[test]
    fn csv_parses_back() {
        let report = table_one();
        let csv = render_report(&report, ReportFormat::Csv).unwrap();
        let back = parse_csv(&csv).unwrap();
        assert_eq!(back.len(), 3);
        for (rec, row) in back.iter().zip(&report.rows) {
            let m = &row.metrics;
            assert_eq!(rec.encoding, row.encoding);
            assert_eq!(rec.updates, m.updates);
            assert_eq!(rec.captured_bytes, m.captured_bytes);
            assert_eq!(rec.compressed_bytes, m.compressed_bytes);
            assert!((rec.duration_s - m.duration_s).abs() <= 0.0005);
            assert!((rec.updates_per_s - m.updates_per_second()).abs() <= 0.0005);
            assert!((rec.ratio - m.compression_ratio()).abs() <= 0.005);
        }
    }
}
