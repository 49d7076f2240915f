//! Reader and writer for the OR-Library job shop layout.
//!
//! ```text
//! # comment
//! N M
//! m d m d ...   (M pairs, one line per job, 0-based machines)
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use super::instance::{Instance, Job, Operation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("missing \"N M\" header")]
    MissingHeader,
    #[error("header must hold exactly two counts, found {0} tokens")]
    BadHeader(usize),
    #[error("malformed token {0:?}")]
    MalformedToken(String),
    #[error("job and machine counts must be positive")]
    EmptyDimension,
    #[error("machine id {machine} out of range for {machine_count} machines")]
    MachineOutOfRange { machine: usize, machine_count: usize },
    #[error("processing time must be positive, got {0}")]
    NonPositiveDuration(i64),
    #[error("expected {expected} (machine, duration) pairs, found {found} tokens")]
    WrongPairCount { expected: usize, found: usize },
    #[error("expected {expected} job lines, found {found}")]
    MissingJobs { expected: usize, found: usize },
    #[error("unexpected content after the last job line")]
    TrailingContent,
}

/// Parse failure with a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn new(line: usize, column: usize, kind: ParseErrorKind) -> Self {
        Self { line, column, kind }
    }
}

/// Whitespace tokens with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter().map(|(byte, tok)| (line[..byte].chars().count() + 1, tok)).collect()
}

fn number(line: usize, column: usize, tok: &str) -> Result<i64, ParseError> {
    tok.parse::<i64>().map_err(|_| ParseError::new(line, column, ParseErrorKind::MalformedToken(tok.to_owned())))
}

pub fn parse_instance(text: &str, name: &str) -> Result<Instance, ParseError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| {
        let t = l.trim_start();
        !t.is_empty() && !t.starts_with('#')
    });

    let last_line = text.lines().count().max(1);
    let (hline, header) = lines.next().ok_or_else(|| ParseError::new(last_line, 1, ParseErrorKind::MissingHeader))?;
    let htoks = tokens(header);
    if htoks.len() != 2 {
        let col = htoks.get(2).map_or(1, |t| t.0);
        return Err(ParseError::new(hline, col, ParseErrorKind::BadHeader(htoks.len())));
    }
    let n = number(hline, htoks[0].0, htoks[0].1)?;
    let m = number(hline, htoks[1].0, htoks[1].1)?;
    if n <= 0 || m <= 0 {
        let col = if n <= 0 { htoks[0].0 } else { htoks[1].0 };
        return Err(ParseError::new(hline, col, ParseErrorKind::EmptyDimension));
    }
    let (n, m) = (n as usize, m as usize);

    let mut jobs = Vec::with_capacity(n);
    for found in 0..n {
        let (lno, line) = lines
            .next()
            .ok_or_else(|| ParseError::new(last_line, 1, ParseErrorKind::MissingJobs { expected: n, found }))?;
        let toks = tokens(line);
        if toks.len() != 2 * m {
            let col = toks.get(2 * m).map_or(line.chars().count() + 1, |t| t.0);
            return Err(ParseError::new(lno, col, ParseErrorKind::WrongPairCount { expected: m, found: toks.len() }));
        }
        let mut ops = Vec::with_capacity(m);
        for pair in toks.chunks(2) {
            let machine = number(lno, pair[0].0, pair[0].1)?;
            if machine < 0 || machine as usize >= m {
                return Err(ParseError::new(
                    lno,
                    pair[0].0,
                    ParseErrorKind::MachineOutOfRange { machine: machine.max(0) as usize, machine_count: m },
                ));
            }
            let duration = number(lno, pair[1].0, pair[1].1)?;
            if duration <= 0 {
                return Err(ParseError::new(lno, pair[1].0, ParseErrorKind::NonPositiveDuration(duration)));
            }
            let duration = u32::try_from(duration)
                .map_err(|_| ParseError::new(lno, pair[1].0, ParseErrorKind::MalformedToken(pair[1].1.to_owned())))?;
            ops.push(Operation::new(machine as usize, duration));
        }
        jobs.push(Job::new(ops));
    }
    if let Some((lno, line)) = lines.next() {
        let col = tokens(line).first().map_or(1, |t| t.0);
        return Err(ParseError::new(lno, col, ParseErrorKind::TrailingContent));
    }

    // Counts and ranges were checked above, so construction cannot fail.
    Ok(Instance::new(name, m, jobs).expect("validated while parsing"))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("job {job} has {len} operations; the file format needs exactly {machine_count} per job")]
pub struct NotRectangular {
    pub job: usize,
    pub len: usize,
    pub machine_count: usize,
}

/// Inverse of [`parse_instance`]: single spaces, LF endings, no comments.
pub fn serialize_instance(inst: &Instance) -> Result<String, NotRectangular> {
    let m = inst.machine_count();
    let mut out = String::new();
    writeln!(out, "{} {}", inst.job_count(), m).unwrap();
    for (j, job) in inst.jobs().iter().enumerate() {
        if job.len() != m {
            return Err(NotRectangular { job: j, len: job.len(), machine_count: m });
        }
        let line = job.ops().iter().map(|o| format!("{} {}", o.machine, o.duration)).collect::<Vec<_>>().join(" ");
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}
