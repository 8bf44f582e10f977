//! CSV and JSON file formats.

use std::fmt::Write as _;
use std::path::Path;

use noisesync_core::analysis::Spectrum;
use noisesync_core::Trace;
use serde::Serialize;

use crate::{Error, Result};

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_string(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

/// 15 significant digits in scientific notation.
fn num(x: f64) -> String {
    format!("{x:.14e}")
}

/// `t,v1..vN,s1..sN`, one row per output sample.
pub fn trace_csv(trace: &Trace) -> String {
    let n = trace.n();
    let mut out = String::from("t");
    for i in 1..=n {
        write!(out, ",v{i}").unwrap();
    }
    for i in 1..=n {
        write!(out, ",s{i}").unwrap();
    }
    out.push('\n');
    for (k, t) in trace.times.iter().enumerate() {
        out.push_str(&num(*t));
        for ch in &trace.v_samples {
            out.push(',');
            out.push_str(&num(ch[k]));
        }
        for ch in &trace.s_samples {
            write!(out, ",{}", ch[k]).unwrap();
        }
        out.push('\n');
    }
    out
}

/// `osc,t,direction` with 1-based oscillator ids.
pub fn events_csv(trace: &Trace) -> String {
    let mut out = String::from("osc,t,direction\n");
    for e in &trace.events {
        writeln!(
            out,
            "{},{},{}",
            e.oscillator + 1,
            num(e.time),
            e.direction.as_str()
        )
        .unwrap();
    }
    out
}

pub fn spectrum_csv(s: &Spectrum) -> String {
    let mut out = String::from("freq_hz,power\n");
    for (f, p) in s.freqs.iter().zip(&s.power) {
        writeln!(out, "{},{}", num(*f), num(*p)).unwrap();
    }
    out
}

/// `x,value,flag`; a missing value is written as an empty field.
pub fn xy_csv(rows: &[(f64, Option<f64>, &str)]) -> String {
    let mut out = String::from("x,value,flag\n");
    for (x, v, flag) in rows {
        let v = v.map(num).unwrap_or_default();
        writeln!(out, "{},{v},{flag}", num(*x)).unwrap();
    }
    out
}

/// Voltage channels read back from a trace CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    pub times: Vec<f64>,
    pub v: Vec<Vec<f64>>,
}

impl TraceTable {
    /// Mean sample spacing.
    pub fn dt(&self) -> Option<f64> {
        let n = self.times.len();
        (n >= 2).then(|| (self.times[n - 1] - self.times[0]) / (n - 1) as f64)
    }
}

pub fn parse_trace_csv(text: &str, origin: &str) -> Result<TraceTable> {
    let err = |line: usize, msg: String| Error::Csv {
        path: origin.to_string(),
        line,
        msg,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.first() != Some(&"t") {
        return Err(err(1, "header must start with t".into()));
    }
    let n = cols.iter().filter(|c| c.starts_with('v')).count();
    for i in 1..=n {
        if cols.get(i).copied() != Some(format!("v{i}").as_str()) {
            return Err(err(1, format!("expected column v{i}")));
        }
    }
    let mut table = TraceTable {
        times: Vec::new(),
        v: vec![Vec::new(); n],
    };
    for (idx, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(err(
                idx + 1,
                format!("expected {} fields, got {}", cols.len(), fields.len()),
            ));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| err(idx + 1, format!("{s:?}: {e}")))
        };
        table.times.push(parse(fields[0])?);
        for i in 0..n {
            table.v[i].push(parse(fields[1 + i])?);
        }
    }
    Ok(table)
}
