//! Evaluation reports: per-task rows, aggregates, JSON and CSV output.

use std::collections::{BTreeMap, BTreeSet};
use std::io;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

/// Result columns in table order. Other metrics follow alphabetically.
pub const TABLE_COLUMNS: [&str; 9] = [
    "Task SR",
    "Execution SR",
    "Parsing",
    "Hallucination",
    "Predicate-Arg Num",
    "Wrong Order",
    "Missing Step",
    "Affordance",
    "Additional Step",
];

pub const MISSING_PREDICTION: &str = "MissingPrediction";
pub const MALFORMED_PREDICTION: &str = "MalformedPrediction";

/// Scores for one task (or one action, for sensitivity tables). Metrics
/// are fractions in [0, 1]; counts feed micro-averaged P/R/F1.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub id: String,
    #[serde(default)]
    pub metrics: BTreeMap<String, f64>,
    #[serde(default)]
    pub counts: BTreeMap<String, u64>,
    #[serde(default)]
    pub flags: Vec<String>,
    #[serde(default)]
    pub detail: BTreeMap<String, Value>,
    /// Unknown task fields, echoed.
    #[serde(default)]
    pub extra: BTreeMap<String, Value>,
}

impl Row {
    pub fn new(id: &str) -> Row {
        Row {
            id: id.to_string(),
            ..Row::default()
        }
    }

    pub fn metric(&mut self, key: impl Into<String>, v: f64) {
        self.metrics.insert(key.into(), v);
    }

    pub fn flag(&mut self, v: bool, key: &str) {
        self.metrics.insert(key.to_string(), if v { 1.0 } else { 0.0 });
    }

    pub fn count(&mut self, key: impl Into<String>, v: u64) {
        *self.counts.entry(key.into()).or_default() += v;
    }

    pub fn note(&mut self, key: &str, v: impl Serialize) {
        self.detail.insert(key.to_string(), serde_json::to_value(v).expect("detail serializes"));
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub tasks: usize,
    /// Mean of each metric over the rows that report it.
    pub metrics: BTreeMap<String, f64>,
    pub counts: BTreeMap<String, u64>,
    /// Precision, recall and F1 from summed `<prefix> TP/FP/FN` counts.
    pub micro: BTreeMap<String, f64>,
}

impl Aggregates {
    pub fn of(rows: &[Row]) -> Aggregates {
        let mut sums: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for r in rows {
            for (k, v) in &r.metrics {
                let e = sums.entry(k).or_default();
                e.0 += v;
                e.1 += 1;
            }
            for (k, v) in &r.counts {
                *counts.entry(k.clone()).or_default() += v;
            }
        }
        let metrics = sums.into_iter().map(|(k, (s, n))| (k.to_string(), s / n as f64)).collect();
        let mut micro = BTreeMap::new();
        let prefixes: BTreeSet<&str> = counts.keys().filter_map(|k| k.strip_suffix(" TP")).collect();
        for p in prefixes {
            let get = |s: &str| counts.get(&format!("{p} {s}")).copied().unwrap_or(0) as f64;
            let (tp, fp, fn_) = (get("TP"), get("FP"), get("FN"));
            let ratio = |num: f64, den: f64| if den == 0.0 { 1.0 } else { num / den };
            let (pr, rc) = if tp + fp + fn_ == 0.0 {
                (1.0, 1.0)
            } else {
                (
                    if tp + fp == 0.0 { 0.0 } else { tp / (tp + fp) },
                    if tp + fn_ == 0.0 { 0.0 } else { tp / (tp + fn_) },
                )
            };
            micro.insert(format!("{p} Precision"), pr);
            micro.insert(format!("{p} Recall"), rc);
            micro.insert(format!("{p} F1"), ratio(2.0 * tp, 2.0 * tp + fp + fn_));
        }
        Aggregates {
            tasks: rows.len(),
            metrics,
            counts,
            micro,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub module: String,
    /// Evaluation settings that influence scores.
    #[serde(default)]
    pub options: BTreeMap<String, Value>,
    pub rows: Vec<Row>,
    pub aggregates: Aggregates,
}

impl Report {
    /// Rows are sorted by id before aggregation.
    pub fn new(module: &str, options: BTreeMap<String, Value>, mut rows: Vec<Row>) -> Report {
        rows.sort_by(|a, b| a.id.cmp(&b.id));
        let aggregates = Aggregates::of(&rows);
        Report {
            module: module.to_string(),
            options,
            rows,
            aggregates,
        }
    }

    /// Whether the stored aggregates equal a recomputation from the rows.
    pub fn is_consistent(&self) -> bool {
        Aggregates::of(&self.rows) == self.aggregates
    }

    /// As [`Report::is_consistent`] for a report read back from JSON: each
    /// stored float was rounded to four decimals, so means may move by up
    /// to 1e-4. Counts must match exactly.
    pub fn is_consistent_rounded(&self) -> bool {
        let fresh = Aggregates::of(&self.rows);
        let close = |a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>| {
            a.len() == b.len() && a.iter().zip(b).all(|((ka, va), (kb, vb))| ka == kb && (va - vb).abs() <= 1e-4 + 1e-12)
        };
        fresh.tasks == self.aggregates.tasks
            && fresh.counts == self.aggregates.counts
            && close(&fresh.metrics, &self.aggregates.metrics)
            && close(&fresh.micro, &self.aggregates.micro)
    }

    /// Metric columns: table columns first, then the rest by name.
    pub fn metric_columns(&self) -> Vec<String> {
        let present: BTreeSet<&str> = self.rows.iter().flat_map(|r| r.metrics.keys().map(String::as_str)).collect();
        let mut cols: Vec<String> = TABLE_COLUMNS.iter().filter(|c| present.contains(*c)).map(|c| c.to_string()).collect();
        cols.extend(present.iter().filter(|c| !TABLE_COLUMNS.contains(c)).map(|c| c.to_string()));
        cols
    }

    pub fn count_columns(&self) -> Vec<String> {
        let present: BTreeSet<&String> = self.rows.iter().flat_map(|r| r.counts.keys()).collect();
        present.into_iter().cloned().collect()
    }

    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        let mut buf = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloat::default());
        v.serialize(&mut ser).expect("writing to memory");
        buf.push(b'\n');
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    pub fn from_json(text: &str) -> Result<Report> {
        Ok(serde_json::from_str(text)?)
    }

    /// Metrics as percentages with one decimal, counts as integers, then an
    /// `ALL` row with the aggregates. Cells a row does not report stay empty.
    pub fn to_csv(&self) -> Result<String> {
        let metrics = self.metric_columns();
        let counts = self.count_columns();
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<&str> = std::iter::once("id")
            .chain(metrics.iter().map(String::as_str))
            .chain(counts.iter().map(String::as_str))
            .collect();
        w.write_record(&header)?;
        let line = |id: &str, m: &BTreeMap<String, f64>, c: &BTreeMap<String, u64>| -> Vec<String> {
            std::iter::once(id.to_string())
                .chain(metrics.iter().map(|k| m.get(k).map(|v| percent(*v)).unwrap_or_default()))
                .chain(counts.iter().map(|k| c.get(k).map(u64::to_string).unwrap_or_default()))
                .collect()
        };
        for r in &self.rows {
            w.write_record(line(&r.id, &r.metrics, &r.counts))?;
        }
        if !self.rows.is_empty() {
            w.write_record(line("ALL", &self.aggregates.metrics, &self.aggregates.counts))?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

pub fn percent(v: f64) -> String {
    let s = format!("{:.1}", v * 100.0);
    if s == "-0.0" {
        "0.0".to_string()
    } else {
        s
    }
}

/// Parsed CSV report: header and cells, for checking aggregates.
pub fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers()?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|x| x.iter().map(String::from).collect()))
        .collect::<Result<Vec<Vec<String>>, _>>()?;
    Ok((header, rows))
}

/// Recomputes the `ALL` row of a CSV report from its data rows. Count
/// columns must match exactly; percentage columns within the rounding of
/// one decimal.
pub fn check_csv_aggregates(text: &str) -> Result<()> {
    let (header, rows) = read_csv(text)?;
    let Some((all, data)) = rows.split_last() else {
        return Ok(());
    };
    if all.first().map(String::as_str) != Some("ALL") {
        bail!("last CSV row is not ALL");
    }
    for (j, col) in header.iter().enumerate().skip(1) {
        let cells: Vec<&str> = data.iter().map(|r| r[j].as_str()).filter(|c| !c.is_empty()).collect();
        let is_count = cells.iter().chain(std::iter::once(&all[j].as_str())).all(|c| !c.contains('.'));
        if is_count {
            let sum: u64 = cells.iter().map(|c| c.parse::<u64>()).sum::<Result<u64, _>>()?;
            let want: u64 = all[j].parse()?;
            if sum != want {
                bail!("{col}: rows sum to {sum}, ALL has {want}");
            }
        } else {
            let vals: Vec<f64> = cells.iter().map(|c| c.parse::<f64>()).collect::<Result<_, _>>()?;
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let want: f64 = all[j].parse()?;
            if (mean - want).abs() > 0.1 + 1e-9 {
                bail!("{col}: rows average {mean}, ALL has {want}");
            }
        }
    }
    Ok(())
}

/// Pretty JSON with every float printed to four decimals.
#[derive(Default)]
pub struct FixedFloat {
    inner: PrettyFormatter<'static>,
}

impl Formatter for FixedFloat {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        let s = format!("{v:.4}");
        w.write_all(if s == "-0.0000" { b"0.0000" } else { s.as_bytes() })
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(v))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, m: &[(&str, f64)], c: &[(&str, u64)]) -> Row {
        let mut r = Row::new(id);
        for (k, v) in m {
            r.metric(*k, *v);
        }
        for (k, v) in c {
            r.count(*k, *v);
        }
        r
    }

    #[test]
    fn empty_suite_has_headers_only() {
        let rep = Report::new("action_sequencing", BTreeMap::new(), Vec::new());
        assert_eq!(rep.aggregates.tasks, 0);
        assert_eq!(rep.to_csv().unwrap().trim(), "id");
        assert!(rep.is_consistent());
    }

    #[test]
    fn one_row_aggregates_equal_the_row() {
        let r = row("t1", &[("Task SR", 1.0), ("Partial Success", 0.5)], &[("State TP", 2)]);
        let rep = Report::new("x", BTreeMap::new(), vec![r.clone()]);
        assert_eq!(rep.aggregates.metrics, r.metrics);
        assert_eq!(rep.aggregates.counts, r.counts);
        let csv = rep.to_csv().unwrap();
        let (h, rows) = read_csv(&csv).unwrap();
        assert_eq!(h, ["id", "Task SR", "Partial Success", "State TP"]);
        assert_eq!(rows[0][1..], rows[1][1..]);
        assert_eq!(rows[1][0], "ALL");
    }

    #[test]
    fn micro_scores_pool_counts() {
        let rows = vec![
            row("a", &[], &[("Logic TP", 2), ("Logic FP", 0), ("Logic FN", 1)]),
            row("b", &[], &[("Logic TP", 1), ("Logic FP", 1), ("Logic FN", 0)]),
        ];
        let agg = Aggregates::of(&rows);
        assert_eq!(agg.micro["Logic Precision"], 0.75);
        assert_eq!(agg.micro["Logic Recall"], 0.75);
        assert_eq!(agg.micro["Logic F1"], 0.75);
    }

    #[test]
    fn means_skip_rows_without_the_metric() {
        let rows = vec![row("a", &[("Planner SR[x]", 1.0)], &[]), row("b", &[], &[])];
        assert_eq!(Aggregates::of(&rows).metrics["Planner SR[x]"], 1.0);
    }

    #[test]
    fn json_is_sorted_with_four_decimals() {
        let rep = Report::new("m", BTreeMap::new(), vec![row("b", &[("Task SR", 2.0 / 3.0)], &[]), row("a", &[("Task SR", 0.0)], &[])]);
        let text = rep.to_json();
        assert!(text.contains("\"Task SR\": 0.6667"));
        assert!(text.contains("\"Task SR\": 0.0000"));
        assert!(text.find("\"aggregates\"").unwrap() < text.find("\"module\"").unwrap());
        assert!(text.find("\"id\": \"a\"").unwrap() < text.find("\"id\": \"b\"").unwrap());
        let back = Report::from_json(&text).unwrap();
        assert_eq!(back.rows.len(), 2);
        assert!(back.is_consistent_rounded());
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn json_to_csv_keeps_aggregates() {
        let rows = vec![
            row("a", &[("Task SR", 1.0), ("Execution SR", 1.0)], &[("n", 3)]),
            row("b", &[("Task SR", 0.0), ("Execution SR", 1.0)], &[("n", 4)]),
            row("c", &[("Task SR", 0.0), ("Execution SR", 0.0)], &[]),
        ];
        let rep = Report::new("m", BTreeMap::new(), rows);
        let csv = Report::from_json(&rep.to_json()).unwrap().to_csv().unwrap();
        assert_eq!(csv, rep.to_csv().unwrap());
        check_csv_aggregates(&csv).unwrap();
        let (_, cells) = read_csv(&csv).unwrap();
        assert_eq!(cells[3], ["ALL", "33.3", "66.7", "7"]);
    }
}
