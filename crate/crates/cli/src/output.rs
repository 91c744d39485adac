//! CSV and JSON writers. Every float is printed with 17 significant digits.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use borerdyn::analysis::{cluster_levels, SweepResult};
use borerdyn::integrate::Trajectory;
use borerdyn::model::YEAR;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

pub const TRAJECTORY_HEADER: &str = "t,x1,x2,x3,x4,x5,x6";
pub const SWEEP_HEADER: &str = "param_value,branch,extremum_kind,t,value";

/// Round-trip safe float text.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Pretty JSON formatter that writes floats as `{:.16e}`.
struct Sig17<'a>(PrettyFormatter<'a>);

impl Formatter for Sig17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory serialization");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    std::fs::write(path, to_json(value))
}

/// Samples with absolute times.
pub fn write_trajectory(path: &Path, traj: &Trajectory) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for (i, x) in traj.states.iter().enumerate() {
        write!(w, "{}", fmt_f64(traj.absolute_time(i)))?;
        for v in x.iter() {
            write!(w, ",{}", fmt_f64(*v))?;
        }
        writeln!(w)?;
    }
    w.flush()
}

/// Long-format bifurcation data. `branch` is the level cluster of the value
/// among the same kind of extremum at the same parameter value.
pub fn write_sweep(path: &Path, res: &SweepResult, var: usize, cluster_tol: f64) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{SWEEP_HEADER}")?;
    for pt in &res.points {
        let Some(a) = &pt.analysis else { continue };
        let t0 = a.window_origin;
        let all: Vec<f64> = a
            .extrema
            .maxima
            .iter()
            .chain(&a.extrema.minima)
            .map(|e| e.value)
            .collect();
        let (lo, hi) = all
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        let tol = if all.is_empty() { 0.0 } else { cluster_tol * (hi - lo) };
        let strobe: Vec<(f64, f64)> = a
            .summary
            .strobe_points
            .iter()
            .enumerate()
            .map(|(k, s)| (t0 + k as f64 * YEAR, s[var]))
            .collect();
        let kinds = [
            ("max", a.extrema.maxima.iter().map(|e| (t0 + e.t, e.value)).collect::<Vec<_>>()),
            ("min", a.extrema.minima.iter().map(|e| (t0 + e.t, e.value)).collect()),
            ("strobe", strobe),
        ];
        for (kind, rows) in kinds {
            let vals: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let ids = cluster_levels(&vals, tol);
            for ((t, v), id) in rows.iter().zip(ids) {
                writeln!(
                    w,
                    "{},{id},{kind},{},{}",
                    fmt_f64(pt.param_value),
                    fmt_f64(*t),
                    fmt_f64(*v)
                )?;
            }
        }
    }
    w.flush()
}

#[derive(Serialize)]
pub struct SummaryEntry {
    pub param_value: f64,
    pub classification: Option<String>,
    pub period: Option<usize>,
    pub lle: Option<f64>,
    pub lle_stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn sweep_summary(res: &SweepResult) -> Vec<SummaryEntry> {
    res.points
        .iter()
        .map(|pt| {
            let s = pt.analysis.as_ref().map(|a| &a.summary);
            SummaryEntry {
                param_value: pt.param_value,
                classification: s.map(|s| s.classification.label().to_string()),
                period: s.and_then(|s| s.classification.period()),
                lle: s.map(|s| s.lle),
                lle_stderr: s.map(|s| s.lle_stderr),
                error: pt.error.clone(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 9.138917e-5, 55205.48, -0.0, 1e300, 5e-324] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn json_floats_have_17_digits() {
        let s = to_json(&serde_json::json!({"a": 0.1, "b": [1.5, 2]}));
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("1.5000000000000000e0"), "{s}");
        assert!(s.contains(" 2\n") || s.contains("2\n"), "{s}");
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
    }
}
