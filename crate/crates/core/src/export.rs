//! CSV and JSON writers. Every number goes through [`fmt_g12`], so output is
//! byte-stable for equal inputs.

use std::io::Write;

use serde_json::{json, Value};

use crate::dynamics::Trajectory;
use crate::equilibria::Complex64;
use crate::error::Result;
use crate::model::PayoffMatrix;
use crate::phase::{BasinMap, FieldSample};
use crate::stochastic::Snapshot;
use crate::sweep::SweepResult;
use crate::tables::TableRow;

/// Formats with 12 significant digits, like C's `%.12g`.
pub fn fmt_g12(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rounds to 12 significant digits, for JSON output.
pub fn round12(v: f64) -> f64 {
    fmt_g12(v).parse().unwrap_or(v)
}

/// Eigenvalue components smaller than this print as 0.
pub const EIGEN_DISPLAY_FLOOR: f64 = 1e-13;

/// `a`, `a+bi` or `a-bi`, with roundoff-sized parts shown as 0.
pub fn fmt_complex(z: Complex64) -> String {
    let snap = |v: f64| if v.abs() < EIGEN_DISPLAY_FLOOR { 0.0 } else { v };
    let z = Complex64::new(snap(z.re), snap(z.im));
    if z.im == 0.0 {
        fmt_g12(z.re)
    } else if z.im > 0.0 {
        format!("{}+{}i", fmt_g12(z.re), fmt_g12(z.im))
    } else {
        format!("{}-{}i", fmt_g12(z.re), fmt_g12(-z.im))
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| fmt_g12(*x)).collect::<Vec<_>>().join(";")
}

fn join_complex(v: &[Complex64]) -> String {
    v.iter().map(|z| fmt_complex(*z)).collect::<Vec<_>>().join(";")
}

fn rounded(v: &[f64]) -> Value {
    Value::from(v.iter().map(|x| round12(*x)).collect::<Vec<_>>())
}

fn complex_json(v: &[Complex64]) -> Value {
    Value::from(v.iter().map(|z| fmt_complex(*z)).collect::<Vec<_>>())
}

fn x_headers(labels: &[String]) -> Vec<String> {
    labels.iter().map(|l| format!("x_{l}")).collect()
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn labels_of(a: &PayoffMatrix) -> Vec<String> {
    a.labels().iter().map(|l| l.as_str().to_string()).collect()
}

pub fn trajectory_csv<W: Write>(w: W, labels: &[String], tr: &Trajectory) -> Result<()> {
    let mut out = csv_writer(w);
    let mut head = vec!["t".to_string()];
    head.extend(x_headers(labels));
    out.write_record(&head)?;
    for (t, x) in tr.times.iter().zip(&tr.states) {
        let mut rec = vec![fmt_g12(*t)];
        rec.extend(x.as_slice().iter().map(|v| fmt_g12(*v)));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn trajectory_json(labels: &[String], tr: &Trajectory) -> Value {
    json!({
        "labels": labels,
        "times": rounded(&tr.times),
        "states": tr.states.iter().map(|s| rounded(s.as_slice())).collect::<Vec<_>>(),
        "converged": tr.converged,
    })
}

const TABLE_HEADER: [&str; 7] = [
    "index",
    "label",
    "coordinates",
    "eigenvalues",
    "reduced_eigenvalues",
    "existence",
    "classification",
];

fn classification_str(row: &TableRow) -> &'static str {
    match row.point.classification {
        Some(c) => c.as_str(),
        None => "degenerate",
    }
}

pub fn table_csv<W: Write>(w: W, rows: &[TableRow]) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(TABLE_HEADER)?;
    for row in rows {
        out.write_record([
            row.index.to_string(),
            row.label.clone(),
            join(row.point.x.as_slice()),
            join_complex(&row.point.eigen_full),
            join_complex(&row.point.eigen_reduced),
            row.existence.description.clone(),
            classification_str(row).to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn table_json(model: &str, labels: &[String], rows: &[TableRow]) -> Value {
    json!({
        "model": model,
        "labels": labels,
        "rows": rows.iter().map(|row| json!({
            "index": row.index,
            "label": row.label,
            "coordinates": rounded(row.point.x.as_slice()),
            "eigenvalues": complex_json(&row.point.eigen_full),
            "reduced_eigenvalues": complex_json(&row.point.eigen_reduced),
            "existence": row.existence.description,
            "classification": classification_str(row),
            "degenerate": row.point.degenerate,
        })).collect::<Vec<_>>(),
    })
}

pub fn field_csv<W: Write>(w: W, labels: &[String], samples: &[FieldSample]) -> Result<()> {
    let mut out = csv_writer(w);
    let mut head = x_headers(labels);
    head.extend(labels.iter().map(|l| format!("dx_{l}")));
    head.push("speed".into());
    let ternary = samples.first().is_some_and(|s| s.ternary.is_some());
    if ternary {
        head.push("u".into());
        head.push("v".into());
    }
    out.write_record(&head)?;
    for s in samples {
        let mut rec: Vec<String> = s.state.as_slice().iter().map(|v| fmt_g12(*v)).collect();
        rec.extend(s.field.iter().map(|v| fmt_g12(*v)));
        rec.push(fmt_g12(s.speed));
        if let Some((u, v)) = s.ternary {
            rec.push(fmt_g12(u));
            rec.push(fmt_g12(v));
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn field_json(labels: &[String], samples: &[FieldSample]) -> Value {
    json!({
        "labels": labels,
        "samples": samples.iter().map(|s| json!({
            "state": rounded(s.state.as_slice()),
            "field": rounded(&s.field),
            "speed": round12(s.speed),
            "ternary": s.ternary.map(|(u, v)| vec![round12(u), round12(v)]),
        })).collect::<Vec<_>>(),
    })
}

/// One row per grid point; `attractor` is the index into the attractor list
/// or empty when unresolved.
pub fn basins_csv<W: Write>(w: W, labels: &[String], map: &BasinMap) -> Result<()> {
    let mut out = csv_writer(w);
    let mut head = x_headers(labels);
    head.push("attractor".into());
    head.push("attractor_coordinates".into());
    out.write_record(&head)?;
    for (x, asg) in map.grid.iter().zip(&map.assignment) {
        let mut rec: Vec<String> = x.as_slice().iter().map(|v| fmt_g12(*v)).collect();
        match asg {
            Some(k) => {
                rec.push(k.to_string());
                rec.push(join(map.attractors[*k].x.as_slice()));
            }
            None => {
                rec.push(String::new());
                rec.push(String::new());
            }
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn basins_json(labels: &[String], map: &BasinMap) -> Value {
    json!({
        "labels": labels,
        "resolution": map.resolution,
        "attractors": map.attractors.iter().map(|p| rounded(p.x.as_slice())).collect::<Vec<_>>(),
        "fractions": rounded(&map.fractions()),
        "grid": map.grid.iter().map(|x| rounded(x.as_slice())).collect::<Vec<_>>(),
        "assignment": map.assignment,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_g12).unwrap_or_default()
}

/// One row per (grid point, fixed point), plus the per-point count.
pub fn sweep_csv<W: Write>(w: W, res: &SweepResult) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["r", "delta", "count", "label", "coordinates", "existence", "classification"])?;
    for p in &res.points {
        for row in &p.rows {
            out.write_record([
                opt(p.r),
                opt(p.delta),
                p.count.to_string(),
                row.label.clone(),
                join(&row.x),
                row.existence.clone(),
                row.classification.map_or("degenerate", |c| c.as_str()).to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Just the fixed-point count per grid point.
pub fn sweep_counts_csv<W: Write>(w: W, res: &SweepResult) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["r", "delta", "count"])?;
    for p in &res.points {
        out.write_record([opt(p.r), opt(p.delta), p.count.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn sweep_json(res: &SweepResult) -> Value {
    json!({
        "model": res.model,
        "points": res.points.iter().map(|p| json!({
            "r": p.r.map(round12),
            "delta": p.delta.map(round12),
            "count": p.count,
            "rows": p.rows.iter().map(|row| json!({
                "label": row.label,
                "coordinates": rounded(&row.x),
                "existence": row.existence,
                "classification": row.classification.map(|c| c.as_str()),
            })).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "loci": res.loci.iter().map(|l| json!({
            "label": l.label,
            "path": l.path.iter().map(|x| x.as_ref().map(|x| rounded(x))).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

pub fn snapshots_csv<W: Write>(w: W, labels: &[String], snaps: &[Snapshot]) -> Result<()> {
    let mut out = csv_writer(w);
    let mut head = vec!["step".to_string()];
    head.extend(x_headers(labels));
    out.write_record(&head)?;
    for s in snaps {
        let mut rec = vec![s.step.to_string()];
        rec.extend(s.x.iter().map(|v| fmt_g12(*v)));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn snapshots_json(labels: &[String], snaps: &[Snapshot]) -> Value {
    json!({
        "labels": labels,
        "snapshots": snaps.iter().map(|s| json!({"step": s.step, "x": rounded(&s.x)})).collect::<Vec<_>>(),
    })
}

/// Opinion labels of a matrix as owned strings.
pub fn labels(a: &PayoffMatrix) -> Vec<String> {
    labels_of(a)
}

/// Pretty JSON with a trailing newline.
pub fn json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, SimplexState};
    use crate::model::{build, ModelSpec};
    use crate::tables::table_report;

    #[test]
    fn g12() {
        assert_eq!(fmt_g12(0.0), "0");
        assert_eq!(fmt_g12(1.0), "1");
        assert_eq!(fmt_g12(-0.5), "-0.5");
        assert_eq!(fmt_g12(0.1 + 0.2), "0.3");
        assert_eq!(fmt_g12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_g12(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt_g12(123456.789), "123456.789");
        assert_eq!(fmt_g12(1e-7), "1e-07");
        assert_eq!(fmt_g12(1.5e-5), "1.5e-05");
        assert_eq!(fmt_g12(1e-4), "0.0001");
        assert_eq!(fmt_g12(1e12), "1e+12");
        assert_eq!(fmt_g12(999999999999.9), "1e+12");
        assert_eq!(fmt_g12(0.99999999999999), "1");
    }

    #[test]
    fn complex() {
        assert_eq!(fmt_complex(Complex64::new(-0.5, 0.0)), "-0.5");
        assert_eq!(fmt_complex(Complex64::new(0.0, 1.0)), "0+1i");
        assert_eq!(fmt_complex(Complex64::new(-1.0, -0.25)), "-1-0.25i");
        assert_eq!(fmt_complex(Complex64::new(1e-16, -3e-17)), "0");
    }

    #[test]
    fn trajectory_formats() {
        let a = build(&ModelSpec::bso()).unwrap();
        let tr = integrate(&a, &SimplexState::new(vec![0.6, 0.4]).unwrap(), 0.5, 1.0).unwrap();
        let mut buf = Vec::new();
        trajectory_csv(&mut buf, &labels(&a), &tr).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x_A,x_B");
        assert_eq!(lines[1], "0,0.6,0.4");
        assert_eq!(lines.len(), 1 + tr.times.len());
        let j = trajectory_json(&labels(&a), &tr);
        assert_eq!(j["labels"], json!(["A", "B"]));
        assert_eq!(j["converged"], json!(false));
    }

    #[test]
    fn table_formats() {
        let spec = ModelSpec::bso().with_equivocator(0.5);
        let rows = table_report(&spec).unwrap();
        let mut buf = Vec::new();
        table_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[0], TABLE_HEADER.join(","));
        assert!(lines[1].starts_with("1,p*_1,0;1;0,-1;-1;-0.5,"), "{}", lines[1]);
        assert!(lines[1].ends_with(",existent,stable"));
        let j = table_json(&spec.name(), &labels(&build(&spec).unwrap()), &rows);
        assert_eq!(j["rows"].as_array().unwrap().len(), 6);
    }
}
