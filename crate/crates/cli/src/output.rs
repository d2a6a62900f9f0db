//! Trajectory and table writers. Floats carry 17 significant digits so a
//! file round-trips exactly; NaN becomes `null` (JSON) or an empty cell (CSV).

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use reparam_core::dynamics::Trajectory;

use crate::config::Format;
use crate::CliError;

pub fn json_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn csv_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

pub fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn json_array(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|x| json_f64(*x)).collect();
    format!("[{}]", items.join(","))
}

/// Where data goes: a file, or stdout when no path is configured.
pub fn open_sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

pub fn io_err(e: io::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// One record per sample: `tau, x, v, L, h, gauge_value, drift`. Monitor
/// fields are null when `monitors` is false.
pub fn write_trajectory(
    w: &mut dyn Write,
    t: &Trajectory,
    format: Format,
    monitors: bool,
) -> Result<(), CliError> {
    let m = t.samples.first().map_or(0, |s| s.x.len());
    if format == Format::Csv {
        let mut header = vec!["tau".to_string()];
        header.extend((0..m).map(|i| format!("x{i}")));
        header.extend((0..m).map(|i| format!("v{i}")));
        header.extend(["L", "h", "gauge_value", "drift"].map(String::from));
        writeln!(w, "{}", header.join(",")).map_err(io_err)?;
    }
    for (i, s) in t.samples.iter().enumerate() {
        let mon = t.monitors.get(i).filter(|_| monitors);
        let fields = mon.map_or([f64::NAN; 4], |k| {
            [k.lagrangian, k.hamiltonian, k.gauge_value, k.drift]
        });
        let line = match format {
            Format::Jsonl => format!(
                "{{\"tau\":{},\"x\":{},\"v\":{},\"L\":{},\"h\":{},\"gauge_value\":{},\"drift\":{}}}",
                json_f64(s.tau),
                json_array(&s.x),
                json_array(&s.v),
                json_f64(fields[0]),
                json_f64(fields[1]),
                json_f64(fields[2]),
                json_f64(fields[3])
            ),
            Format::Csv => std::iter::once(s.tau)
                .chain(s.x.iter().copied())
                .chain(s.v.iter().copied())
                .chain(fields)
                .map(csv_f64)
                .collect::<Vec<_>>()
                .join(","),
        };
        writeln!(w, "{line}").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// A table of named columns, written row by row in the given order.
pub fn write_table(
    w: &mut dyn Write,
    columns: &[&str],
    rows: &[Vec<f64>],
    format: Format,
) -> Result<(), CliError> {
    if format == Format::Csv {
        writeln!(w, "{}", columns.join(",")).map_err(io_err)?;
    }
    for row in rows {
        let line = match format {
            Format::Csv => row
                .iter()
                .map(|x| csv_f64(*x))
                .collect::<Vec<_>>()
                .join(","),
            Format::Jsonl => {
                let fields: Vec<String> = columns
                    .iter()
                    .zip(row)
                    .map(|(c, x)| format!("{}:{}", json_string(c), json_f64(*x)))
                    .collect();
                format!("{{{}}}", fields.join(","))
            }
        };
        writeln!(w, "{line}").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use reparam_core::dynamics::{Monitor, State};

    fn traj() -> Trajectory {
        Trajectory {
            gauge: "proper_time".into(),
            samples: vec![State::new(0.0, vec![1.0, 2.0], vec![0.5, -0.25])],
            monitors: vec![Monitor {
                lagrangian: 0.1,
                hamiltonian: 0.0,
                metric_norm: 1.0,
                gauge_value: f64::NAN,
                drift: 0.0,
            }],
            termination: None,
        }
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            assert_eq!(json_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(json_f64(f64::INFINITY), "null");
    }

    #[test]
    fn jsonl_and_csv_records() {
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &traj(), Format::Jsonl, true).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("{\"tau\":0.0000000000000000e0,\"x\":[1.0000000000000000e0,"));
        assert!(s.contains("\"gauge_value\":null"));
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &traj(), Format::Csv, false).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(
            lines.next().unwrap(),
            "tau,x0,x1,v0,v1,L,h,gauge_value,drift"
        );
        assert!(lines.next().unwrap().ends_with(",,,,"));
    }

    #[test]
    fn escapes_strings() {
        assert_eq!(json_string("a\"b\\\n"), "\"a\\\"b\\\\\\n\"");
    }
}
