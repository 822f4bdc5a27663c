//! Parameter sweeps over `(r, delta)` and the loci traced by moving fixed
//! points.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::equilibria::Stability;
use crate::error::{Error, Result};
use crate::model::{ModelSpec, Preference};
use crate::tables::{table_report, TableRow};

/// One fixed point at one sweep grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowSummary {
    pub label: String,
    pub x: Vec<f64>,
    pub classification: Option<Stability>,
    pub existence: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub r: Option<f64>,
    pub delta: Option<f64>,
    pub count: usize,
    pub rows: Vec<RowSummary>,
}

/// Position of one fixed point along the sweep, `None` where it does not exist.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Locus {
    pub label: String,
    pub path: Vec<Option<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub model: String,
    pub points: Vec<SweepPoint>,
    pub loci: Vec<Locus>,
}

impl From<&TableRow> for RowSummary {
    fn from(row: &TableRow) -> Self {
        RowSummary {
            label: row.label.clone(),
            x: row.point.x.as_slice().to_vec(),
            classification: row.point.classification,
            existence: row.existence.description.clone(),
        }
    }
}

/// Runs [`table_report`] at every `(r, delta)` combination (r outer, delta
/// inner). An empty slice keeps the template's own value.
pub fn sweep(template: &ModelSpec, r_values: &[f64], delta_values: &[f64]) -> Result<SweepResult> {
    if !r_values.is_empty() && template.equivocator.is_none() {
        return Err(Error::InvalidArgument("r sweep needs a model with an equivocator".into()));
    }
    if !delta_values.is_empty() && template.preference.is_none() {
        return Err(Error::InvalidArgument("delta sweep needs a model with a preference".into()));
    }
    let rs: Vec<Option<f64>> = if r_values.is_empty() {
        vec![template.equivocator]
    } else {
        r_values.iter().copied().map(Some).collect()
    };
    let ds: Vec<Option<f64>> = if delta_values.is_empty() {
        vec![template.delta()]
    } else {
        delta_values.iter().copied().map(Some).collect()
    };
    let grid: Vec<ModelSpec> = rs
        .iter()
        .flat_map(|r| {
            ds.iter().map(move |d| {
                let mut spec = template.clone();
                spec.equivocator = *r;
                if let (Some(p), Some(d)) = (&template.preference, d) {
                    spec.preference = Some(Preference {
                        target: p.target.clone(),
                        delta: *d,
                    });
                }
                spec
            })
        })
        .collect();
    for spec in &grid {
        spec.validate()?;
    }

    let points: Vec<SweepPoint> = grid
        .par_iter()
        .map(|spec| {
            let rows = table_report(spec)?;
            Ok(SweepPoint {
                r: spec.equivocator,
                delta: spec.delta(),
                count: rows.len(),
                rows: rows.iter().map(RowSummary::from).collect(),
            })
        })
        .collect::<Result<_>>()?;

    let mut by_label: BTreeMap<String, Vec<Option<Vec<f64>>>> = BTreeMap::new();
    for (k, p) in points.iter().enumerate() {
        for row in &p.rows {
            by_label
                .entry(row.label.clone())
                .or_insert_with(|| vec![None; points.len()])[k] = Some(row.x.clone());
        }
    }
    let mut loci: Vec<Locus> = by_label
        .into_iter()
        .map(|(label, path)| Locus { label, path })
        .collect();
    loci.sort_by_key(|l| l.label.trim_start_matches("p*_").parse::<usize>().unwrap_or(usize::MAX));

    Ok(SweepResult {
        model: template.name(),
        points,
        loci,
    })
}

impl SweepResult {
    pub fn counts(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.count).collect()
    }

    /// Loci whose position changes across the sweep.
    pub fn moving_loci(&self) -> Vec<&Locus> {
        self.loci
            .iter()
            .filter(|l| {
                let present: Vec<&Vec<f64>> = l.path.iter().flatten().collect();
                present.windows(2).any(|w| {
                    w[0].iter().zip(w[1]).any(|(a, b)| (a - b).abs() > 1e-12)
                })
            })
            .collect()
    }
}

/// Parses `start:end:step` (inclusive end) or a single value.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("{t:?} is not a number")))
    };
    match parts.as_slice() {
        [v] => Ok(vec![num(v)?]),
        [a, b, h] => {
            let (start, end, step) = (num(a)?, num(b)?, num(h)?);
            if !(step > 0.0) || end < start {
                return Err(Error::Parse(format!("bad range {s:?}: need start <= end and step > 0")));
            }
            let count = ((end - start) / step + 1e-9).floor() as usize;
            // round to kill accumulated representation noise like 0.30000000000000004
            Ok((0..=count)
                .map(|i| {
                    let v = start + i as f64 * step;
                    (v * 1e12).round() / 1e12
                })
                .collect())
        }
        _ => Err(Error::Parse(format!("bad range {s:?}: expected start:end:step"))),
    }
}
