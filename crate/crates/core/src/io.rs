//! File formats: path CSV, observation files, grid and strip CSV.
//!
//! Files always carry full round-trip precision (`f64` `Display`); terminal
//! output goes through [`format_sig`].

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimator::ObservationSet;
use crate::model::{FiberPath, Rect};
use crate::occupation::OccupationGrid;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn split_fields(line: &str) -> Vec<&str> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|f| !f.is_empty())
        .collect()
}

fn parse_number(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| parse_err(line, format!("non-numeric field {field:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite value {field:?}")));
    }
    Ok(v)
}

/// Reads `t, y1, y2` records separated by commas and/or whitespace.
///
/// A first line whose leading field is not a number is taken as a header.
/// Blank lines and `#` comments are skipped. Time stamps are shifted so the
/// path starts at `t = 0`.
pub fn read_fiber_path<R: Read>(reader: R) -> Result<FiberPath> {
    let mut times = Vec::new();
    let mut points = Vec::new();
    let mut seen_content = false;
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields = split_fields(content);
        if !seen_content {
            seen_content = true;
            if fields[0].parse::<f64>().is_err() {
                continue;
            }
        }
        if fields.len() != 3 {
            return Err(parse_err(
                lineno,
                format!("expected 3 fields (t, y1, y2), found {}", fields.len()),
            ));
        }
        let t = parse_number(fields[0], lineno)?;
        let y1 = parse_number(fields[1], lineno)?;
        let y2 = parse_number(fields[2], lineno)?;
        if let Some(&prev) = times.last() {
            if !(t > prev) {
                return Err(parse_err(
                    lineno,
                    format!("time {t} does not increase (previous {prev})"),
                ));
            }
        }
        times.push(t);
        points.push([y1, y2]);
    }
    if times.is_empty() {
        return Err(Error::InvalidPath("no records".into()));
    }
    let t0 = times[0];
    if t0 != 0.0 {
        for t in &mut times {
            *t -= t0;
        }
    }
    FiberPath::new(times, points)
}

pub fn load_fiber_path(path: impl AsRef<Path>) -> Result<FiberPath> {
    read_fiber_path(fs::File::open(path)?)
}

pub fn write_fiber_path<W: Write>(mut w: W, path: &FiberPath) -> Result<()> {
    let mut buf = String::with_capacity(32 * path.len() + 16);
    buf.push_str("t,y1,y2\n");
    for (t, p) in path.times().iter().zip(path.points()) {
        writeln!(buf, "{t},{},{}", p[0], p[1]).expect("write to String");
    }
    w.write_all(buf.as_bytes())?;
    Ok(())
}

/// Parses the keyed observation format:
///
/// ```text
/// T 10
/// kappa 1 2
/// region 0 1 -3.5 3.5
/// region 0.5 1.5 -2.5 2.5
/// region 1 2.5 -2 2
/// E
/// 1.23698 0.81322
/// 1.16451 0.70939
/// 1.63478 0.93958
/// ```
///
/// The `E` block has one row per region and one column per belt speed.
pub fn read_observations<R: Read>(reader: R) -> Result<ObservationSet> {
    let mut horizon: Option<f64> = None;
    let mut speeds: Option<Vec<f64>> = None;
    let mut regions = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut in_matrix = false;
    let mut last_line = 0;
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields = split_fields(content);
        if in_matrix {
            rows.push(
                fields
                    .iter()
                    .map(|f| parse_number(f, lineno))
                    .collect::<Result<_>>()?,
            );
            let width = speeds.as_ref().map_or(0, Vec::len);
            if rows.last().map_or(0, Vec::len) != width {
                return Err(parse_err(
                    lineno,
                    format!("matrix row has {} values, expected {width}", fields.len()),
                ));
            }
            continue;
        }
        match fields[0] {
            "T" => {
                if fields.len() != 2 {
                    return Err(parse_err(lineno, "expected `T <horizon>`"));
                }
                horizon = Some(parse_number(fields[1], lineno)?);
            }
            "kappa" => {
                if fields.len() < 2 {
                    return Err(parse_err(lineno, "expected at least one belt speed"));
                }
                speeds = Some(
                    fields[1..]
                        .iter()
                        .map(|f| parse_number(f, lineno))
                        .collect::<Result<_>>()?,
                );
            }
            "region" => {
                if fields.len() != 5 {
                    return Err(parse_err(lineno, "expected `region a1 b1 a2 b2`"));
                }
                let v: Vec<f64> = fields[1..]
                    .iter()
                    .map(|f| parse_number(f, lineno))
                    .collect::<Result<_>>()?;
                regions.push(
                    Rect::new(v[0], v[1], v[2], v[3])
                        .map_err(|e| parse_err(lineno, e.to_string()))?,
                );
            }
            "E" => {
                if fields.len() != 1 {
                    return Err(parse_err(lineno, "`E` stands on its own line"));
                }
                if speeds.is_none() {
                    return Err(parse_err(lineno, "`kappa` must precede the `E` block"));
                }
                in_matrix = true;
            }
            other => return Err(parse_err(lineno, format!("unknown key {other:?}"))),
        }
    }
    let horizon = horizon.ok_or_else(|| parse_err(last_line, "missing `T`"))?;
    let speeds = speeds.ok_or_else(|| parse_err(last_line, "missing `kappa`"))?;
    if !in_matrix {
        return Err(parse_err(last_line, "missing `E` block"));
    }
    if rows.len() != regions.len() {
        return Err(parse_err(
            last_line,
            format!("`E` has {} rows for {} regions", rows.len(), regions.len()),
        ));
    }
    ObservationSet::new(regions, speeds, horizon, rows)
        .map_err(|e| parse_err(last_line, e.to_string()))
}

pub fn load_observations(path: impl AsRef<Path>) -> Result<ObservationSet> {
    read_observations(fs::File::open(path)?)
}

pub fn write_observations<W: Write>(mut w: W, obs: &ObservationSet) -> Result<()> {
    let mut s = format!("T {}\nkappa", obs.horizon());
    for k in obs.belt_speeds() {
        write!(s, " {k}").expect("write to String");
    }
    s.push('\n');
    for r in obs.regions() {
        writeln!(s, "region {} {} {} {}", r.a1, r.b1, r.a2, r.b2).expect("write to String");
    }
    s.push_str("E\n");
    for row in obs.values() {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        writeln!(s, "{}", cells.join(" ")).expect("write to String");
    }
    w.write_all(s.as_bytes())?;
    Ok(())
}

/// Grid CSV: a header of `y1` cell centres, then one row per `y2` cell
/// (increasing) led by its centre.
pub fn write_grid_csv<W: Write>(mut w: W, grid: &OccupationGrid) -> Result<()> {
    let mut s = String::from("y2\\y1");
    for x in grid.x_centers() {
        write!(s, ",{x}").expect("write to String");
    }
    s.push('\n');
    for (q, y) in grid.y_centers().iter().enumerate() {
        write!(s, "{y}").expect("write to String");
        for v in grid.row(q) {
            write!(s, ",{v}").expect("write to String");
        }
        s.push('\n');
    }
    w.write_all(s.as_bytes())?;
    Ok(())
}

/// Strip CSV: `y1_lo,y1_hi,occupation`, one line per strip.
pub fn write_strip_csv<W: Write>(mut w: W, bounds: &Rect, strips: &[f64]) -> Result<()> {
    let n = strips.len();
    let mut s = String::from("y1_lo,y1_hi,occupation\n");
    for (i, v) in strips.iter().enumerate() {
        let lo = bounds.a1 + (bounds.b1 - bounds.a1) * (i as f64 / n as f64);
        let hi = if i + 1 == n {
            bounds.b1
        } else {
            bounds.a1 + (bounds.b1 - bounds.a1) * ((i + 1) as f64 / n as f64)
        };
        writeln!(s, "{lo},{hi},{v}").expect("write to String");
    }
    w.write_all(s.as_bytes())?;
    Ok(())
}

/// `%g`-style formatting with `digits` significant digits.
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
