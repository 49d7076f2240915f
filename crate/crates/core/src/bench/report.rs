use std::fs;
use std::path::Path;

use super::{BenchError, BenchmarkRow};

pub const REPORT_HEADER: &str = "instance,variant,seed,ct_lb,ct_best,it_best,elapsed_s,mre_pct";

fn opt(v: Option<f64>, f: impl Fn(f64) -> String) -> String {
    v.map(f).unwrap_or_default()
}

/// CSV text for `rows`, LF line endings, header first.
pub fn format_report(rows: &[BenchmarkRow]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(REPORT_HEADER.split(',')).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.instance.clone(),
            r.variant.to_string(),
            r.seed.to_string(),
            opt(r.ct_lb, |v| v.to_string()),
            r.ct_best.to_string(),
            r.it_best.to_string(),
            format!("{:.2}", r.elapsed_s),
            opt(r.mre(), |v| format!("{v:.1}")),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("fields are UTF-8")
}

pub fn parse_report(text: &str) -> Result<Vec<BenchmarkRow>, BenchError> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
    let mut records = rd.records();
    let bad = |line: usize, message: String| BenchError::Report { line, message };

    match records.next() {
        Some(Ok(h)) if h.iter().eq(REPORT_HEADER.split(',')) => {}
        _ => return Err(bad(1, format!("expected header {REPORT_HEADER:?}"))),
    }
    let mut rows = Vec::new();
    for (i, rec) in records.enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| bad(line, e.to_string()))?;
        if rec.len() != 8 {
            return Err(bad(line, format!("expected 8 fields, found {}", rec.len())));
        }
        let num = |idx: usize| -> Result<f64, BenchError> {
            rec[idx].parse().map_err(|_| bad(line, format!("bad number {:?}", &rec[idx])))
        };
        let ct_lb = if rec[3].is_empty() { None } else { Some(num(3)?) };
        if !rec[7].is_empty() {
            num(7)?;
        }
        rows.push(BenchmarkRow {
            instance: rec[0].to_string(),
            variant: rec[1].parse().map_err(|e: String| bad(line, e))?,
            seed: rec[2].parse().map_err(|_| bad(line, format!("bad seed {:?}", &rec[2])))?,
            ct_lb,
            ct_best: num(4)?,
            it_best: rec[5].parse().map_err(|_| bad(line, format!("bad iteration {:?}", &rec[5])))?,
            elapsed_s: num(6)?,
        });
    }
    Ok(rows)
}

pub fn write_report(rows: &[BenchmarkRow], path: &Path) -> Result<(), BenchError> {
    fs::write(path, format_report(rows)).map_err(|source| BenchError::Io { path: path.to_path_buf(), source })
}

pub fn read_report(path: &Path) -> Result<Vec<BenchmarkRow>, BenchError> {
    let text = fs::read_to_string(path).map_err(|source| BenchError::Io { path: path.to_path_buf(), source })?;
    parse_report(&text)
}
