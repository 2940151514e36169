//! Per-command records and their text and JSON renderings.

use std::time::Duration;

use oscat_core::normlab::{NormBracket, NormStatus};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketView {
    pub lower: f64,
    pub upper: f64,
    pub status: NormStatus,
}

impl From<&NormBracket> for BracketView {
    fn from(b: &NormBracket) -> Self {
        BracketView {
            lower: b.lower,
            upper: b.upper,
            status: b.status,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub command: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<BracketView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_ref: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
    /// Wall time; shown in text reports only so JSON stays reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl Record {
    pub fn new(command: String, status: Status) -> Self {
        Record {
            command,
            status,
            value: None,
            bracket: None,
            witness_ref: None,
            message: None,
            detail: None,
            elapsed: Duration::ZERO,
        }
    }

    pub fn failure(command: String, message: impl Into<String>) -> Self {
        Record {
            message: Some(message.into()),
            ..Record::new(command, Status::Fail)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub unknown: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub seed: u64,
    pub tol: f64,
    pub summary: Summary,
    pub records: Vec<Record>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

impl Report {
    pub fn new(seed: u64, tol: f64, records: Vec<Record>) -> Self {
        let mut summary = Summary::default();
        for r in &records {
            match r.status {
                Status::Pass => summary.pass += 1,
                Status::Fail => summary.fail += 1,
                Status::Unknown => summary.unknown += 1,
            }
        }
        Report {
            seed,
            tol,
            summary,
            records,
        }
    }

    /// 0 when everything passed, 1 on any failure, 2 when the only non-passes are unknowns.
    pub fn exit_code(&self) -> i32 {
        if self.summary.fail > 0 {
            1
        } else if self.summary.unknown > 0 {
            2
        } else {
            0
        }
    }
}

fn text(r: &Report) -> String {
    let mut out = String::new();
    for rec in &r.records {
        let tag = match rec.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Unknown => "UNKNOWN",
        };
        out.push_str(&format!("{tag:<8}{}", rec.command));
        if let Some(v) = rec.value {
            out.push_str(&format!("  value={v:.9}"));
        }
        if let Some(b) = &rec.bracket {
            out.push_str(&format!("  bracket=[{:.9}, {:.9}]", b.lower, b.upper));
        }
        if let Some(w) = &rec.witness_ref {
            out.push_str(&format!("  witness={w}"));
        }
        out.push_str(&format!("  ({} ms)\n", rec.elapsed.as_millis()));
        if let Some(m) = &rec.message {
            out.push_str(&format!("        {m}\n"));
        }
    }
    let s = r.summary;
    out.push_str(&format!(
        "{} passed, {} failed, {} unknown\n",
        s.pass, s.fail, s.unknown
    ));
    out
}

pub fn emit_report(r: &Report, format: Format) -> Vec<u8> {
    match format {
        Format::Text => text(r).into_bytes(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(r).expect("reports serialize");
            s.push('\n');
            s.into_bytes()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(statuses: &[Status]) -> Report {
        Report::new(1, 1e-9, statuses.iter().map(|&s| Record::new("x;".into(), s)).collect())
    }

    #[test]
    fn exit_codes() {
        assert_eq!(report(&[]).exit_code(), 0);
        assert_eq!(report(&[Status::Pass, Status::Fail, Status::Unknown]).exit_code(), 1);
        assert_eq!(report(&[Status::Pass, Status::Unknown]).exit_code(), 2);
        assert_eq!(report(&[Status::Pass, Status::Pass]).exit_code(), 0);
    }

    #[test]
    fn json_omits_timings() {
        let mut r = report(&[Status::Pass]);
        r.records[0].elapsed = Duration::from_millis(1234);
        let json = String::from_utf8(emit_report(&r, Format::Json)).unwrap();
        assert!(!json.contains("1234") && !json.contains("elapsed"));
        assert!(String::from_utf8(emit_report(&r, Format::Text))
            .unwrap()
            .contains("1234 ms"));
    }
}
