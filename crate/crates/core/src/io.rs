//! Edge-list parsing, time windows and result export.
//!
//! Input files hold one edge per line as whitespace-separated integers
//! `source target [timestamp]`, or the four-column `source target weight
//! timestamp` layout. Lines starting with `%` are comments. Without a
//! timestamp column the record order is used as time.
//!
//! CSV output writes floats in scientific notation with 17 significant
//! digits, so values re-parse exactly.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::degree_stats::DegreeCounts;
use crate::edges::{EdgeLog, EdgeRecord, NodeId};
use crate::error::{Error, Result};
use crate::estimation::TraceRow;
use crate::limit::LimitPmf;
use crate::params::Direction;

pub const TRACE_HEADER: &str =
    "iteration,alpha,beta,gamma,xi,eta,p,delta_in,delta_out,log_posterior";

pub fn parse_edge_file(path: impl AsRef<Path>) -> Result<EdgeLog> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_str(&text, path)
}

/// Parses edge-list text; `origin` only labels error messages.
pub fn parse_edge_str(text: &str, origin: impl AsRef<Path>) -> Result<EdgeLog> {
    let parse_err = |line: usize, reason: String| Error::Parse {
        path: origin.as_ref().to_path_buf(),
        line,
        reason,
    };
    let mut records = Vec::new();
    let mut columns = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(2..=4).contains(&fields.len()) {
            return Err(parse_err(
                line_no,
                format!("expected 2 to 4 fields, found {}", fields.len()),
            ));
        }
        match columns {
            None => columns = Some(fields.len()),
            Some(c) if c != fields.len() => {
                return Err(parse_err(
                    line_no,
                    format!(
                        "expected {c} fields like earlier lines, found {}",
                        fields.len()
                    ),
                ))
            }
            _ => {}
        }
        let id = |s: &str| -> Result<NodeId> {
            let v: NodeId = s
                .parse()
                .map_err(|_| parse_err(line_no, format!("invalid node id {s:?}")))?;
            if v == 0 {
                return Err(parse_err(line_no, "node ids must be positive".into()));
            }
            Ok(v)
        };
        let source = id(fields[0])?;
        let target = id(fields[1])?;
        let time = match fields.len() {
            2 => records.len() as i64,
            n => {
                let s = fields[n - 1];
                s.parse::<i64>()
                    .map_err(|_| parse_err(line_no, format!("invalid timestamp {s:?}")))?
            }
        };
        records.push(EdgeRecord::new(source, target, time));
    }
    if records.is_empty() {
        return Err(parse_err(0, "no edge records".into()));
    }
    EdgeLog::from_unordered(records)
}

/// Edge list text that [`parse_edge_str`] reads back to the same records.
pub fn format_edge_log(log: &EdgeLog) -> String {
    let mut out = String::from("% source target timestamp\n");
    for r in log {
        let _ = writeln!(out, "{} {} {}", r.source, r.target, r.time);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Window {
    pub log: EdgeLog,
    /// `(original id, new id)` in order of first appearance.
    pub mapping: Vec<(NodeId, NodeId)>,
}

/// Records with `t_start <= time <= t_end`, with nodes relabeled `1, 2, ...`
/// by first appearance (source before target).
pub fn window(log: &EdgeLog, t_start: i64, t_end: i64) -> Result<Window> {
    if t_start > t_end {
        return Err(Error::InvalidConfig(format!(
            "window start {t_start} is after end {t_end}"
        )));
    }
    let mut ids: HashMap<NodeId, NodeId> = HashMap::new();
    let mut mapping = Vec::new();
    let mut records = Vec::new();
    for r in log.iter().filter(|r| (t_start..=t_end).contains(&r.time)) {
        let mut relabel = |old: NodeId| {
            *ids.entry(old).or_insert_with(|| {
                let new = mapping.len() as NodeId + 1;
                mapping.push((old, new));
                new
            })
        };
        let source = relabel(r.source);
        let target = relabel(r.target);
        records.push(EdgeRecord {
            source,
            target,
            ..*r
        });
    }
    if records.is_empty() {
        return Err(Error::EmptyWindow {
            start: t_start,
            end: t_end,
        });
    }
    Ok(Window {
        log: EdgeLog::from_ordered(records)?,
        mapping,
    })
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `m,value` rows of a CCDF or any other degree-indexed curve.
pub fn curve_csv(curve: &[(u64, f64)], value_name: &str) -> String {
    let mut out = format!("m,{value_name}\n");
    for (m, v) in curve {
        let _ = writeln!(out, "{m},{}", fmt_f64(*v));
    }
    out
}

pub fn ccdf_csv(curve: &[(u64, f64)]) -> String {
    curve_csv(curve, "ccdf")
}

/// Reads `m,value` rows written by [`curve_csv`].
pub fn read_curve_csv(text: &str) -> Result<Vec<(u64, f64)>> {
    let err = |line: usize, reason: String| Error::Parse {
        path: "<csv>".into(),
        line,
        reason,
    };
    text.lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let (m, v) = l
                .split_once(',')
                .ok_or_else(|| err(i + 1, "expected two fields".into()))?;
            let m = m
                .trim()
                .parse()
                .map_err(|_| err(i + 1, format!("invalid degree {m:?}")))?;
            let v = v
                .trim()
                .parse()
                .map_err(|_| err(i + 1, format!("invalid value {v:?}")))?;
            Ok((m, v))
        })
        .collect()
}

pub fn limit_pmf_csv(pmf: &LimitPmf) -> String {
    let mut out = String::from("m,psi_in,psi_out\n");
    for (m, (a, b)) in pmf.psi_in.iter().zip(&pmf.psi_out).enumerate() {
        let _ = writeln!(out, "{m},{},{}", fmt_f64(*a), fmt_f64(*b));
    }
    out
}

/// `m,in_count,out_count` for every degree up to the larger maximum.
pub fn degree_counts_csv(counts: &DegreeCounts) -> String {
    let mut out = String::from("m,in_count,out_count\n");
    if counts.n_nodes == 0 {
        return out;
    }
    let top = counts
        .max_degree(Direction::In)
        .max(counts.max_degree(Direction::Out));
    for m in 0..=top {
        let _ = writeln!(
            out,
            "{m},{},{}",
            counts.count(Direction::In, m),
            counts.count(Direction::Out, m)
        );
    }
    out
}

pub fn trace_csv(trace: &[TraceRow]) -> String {
    let mut out = format!("{TRACE_HEADER}\n");
    for row in trace {
        let t = &row.params;
        let values = [
            t.alpha,
            t.beta,
            t.gamma,
            t.xi,
            t.eta,
            t.p,
            t.delta_in,
            t.delta_out,
            row.log_posterior,
        ];
        let _ = write!(out, "{}", row.iteration);
        for v in values {
            let _ = write!(out, ",{}", fmt_f64(v));
        }
        out.push('\n');
    }
    out
}

/// Pretty JSON with struct fields in declaration order.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_text(path: impl AsRef<Path>, content: &str) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, content).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    write_text(path, &to_json(value)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_single_record() {
        let log = parse_edge_str("% header\n1 2 100\n", "x").unwrap();
        assert_eq!(log.records(), &[EdgeRecord::new(1, 2, 100)]);
    }

    #[test]
    fn stable_sort_and_separators() {
        let spaces = parse_edge_str("3 4 20\n1 2 10\n5 6 10\n", "x").unwrap();
        let tabs = parse_edge_str("3\t4\t20\n1\t2\t10\n5 \t6\t10\n", "x").unwrap();
        assert_eq!(spaces, tabs);
        let pairs: Vec<_> = spaces.iter().map(|r| (r.source, r.time)).collect();
        assert_eq!(pairs, vec![(1, 10), (5, 10), (3, 20)]);
    }

    #[test]
    fn missing_and_weighted_timestamps() {
        let log = parse_edge_str("7 8\n8 9\n", "x").unwrap();
        assert_eq!(log.records()[1].time, 1);
        let log = parse_edge_str("% sym\n1 2 1 500\n2 3 1 400\n", "x").unwrap();
        assert_eq!(log.records()[0].time, 400);
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        for (text, line) in [
            ("1 2 3\n\n1 x 4\n", 3),
            ("1 2 3\n1 2\n", 2),
            ("1\n", 1),
            ("0 1 5\n", 1),
        ] {
            match parse_edge_str(text, "f.txt") {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
        assert!(matches!(
            parse_edge_str("% only\n", "f"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn window_selects_and_relabels() {
        let log = parse_edge_str("10 20 1\n30 10 2\n40 50 3\n", "x").unwrap();
        let w = window(&log, 2, 2).unwrap();
        assert_eq!(w.log.records(), &[EdgeRecord::new(1, 2, 2)]);
        assert_eq!(w.mapping, vec![(30, 1), (10, 2)]);
        assert_eq!(window(&log, 1, 3).unwrap().log.len(), 3);
        assert!(matches!(window(&log, 5, 9), Err(Error::EmptyWindow { .. })));
        assert!(window(&log, 3, 1).is_err());
    }

    #[test]
    fn full_window_of_dense_ids_is_identity() {
        let log = parse_edge_str("1 1 0\n2 1 1\n2 3 2\n", "x").unwrap();
        assert_eq!(window(&log, i64::MIN, i64::MAX).unwrap().log, log);
    }

    #[test]
    fn export_round_trips() {
        let log = parse_edge_str("5 6 3\n6 7 9\n", "x").unwrap();
        assert_eq!(parse_edge_str(&format_edge_log(&log), "x").unwrap(), log);
        let curve = vec![(0, 1.0), (1, 0.1 + 0.2), (2, 1.0 / 3.0)];
        assert_eq!(read_curve_csv(&ccdf_csv(&curve)).unwrap(), curve);
        assert_eq!(ccdf_csv(&[]), "m,ccdf\n");
        assert!(trace_csv(&[]).starts_with(TRACE_HEADER));
    }
}
