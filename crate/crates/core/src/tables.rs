//! Fixed-point tables for the named opinion models.
//!
//! For the standard models (A preferred, or no preference) the rows come out
//! in the conventional order `p*_1, p*_2, ...`, each with the condition under
//! which the point exists. Two rows only exist while `delta < 1 - r`:
//! - `BSOEP_A`: `p*_6` and `p*_7` (interior and A-E edge points), which
//!   merge into `(0, 1/2, 1/2)` and `(0, 0, 1)` at `delta = 1 - r`;
//! - `BDOEP_A`: `p*_6` on the A-E edge, which merges into `(1, 0, 0)`.
//!
//! Models without a reference layout (B preferred, user matrices) keep the
//! enumeration order and report every row as unconditionally existent.

use serde::Serialize;

use crate::equilibria::{self, FixedPoint, DEFAULT_ENUM_TOL};
use crate::error::Result;
use crate::model::{build, BaseGame, ModelSpec, PayoffMatrix};

/// Parameter pairs this close to `delta = 1 - r` are on the boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExistenceCondition {
    /// Human-readable predicate over `(r, delta)`, or `"existent"`.
    pub description: String,
    /// The predicate evaluated at the model's parameters.
    pub holds: bool,
}

impl ExistenceCondition {
    pub fn always() -> Self {
        ExistenceCondition {
            description: "existent".into(),
            holds: true,
        }
    }

    /// Evaluated with [`BOUNDARY_TOL`] slack so that, e.g., `(r, delta) =
    /// (0.7, 0.3)` counts as on the boundary even though `1 - 0.7 > 0.3`
    /// in binary.
    fn delta_below_one_minus_r(r: f64, delta: f64) -> Self {
        ExistenceCondition {
            description: "delta < 1 - r".into(),
            holds: delta < 1.0 - r - BOUNDARY_TOL,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    /// 1-based row number.
    pub index: usize,
    pub label: String,
    pub point: FixedPoint,
    pub existence: ExistenceCondition,
}

/// Closed-form location of one table row.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceRow {
    pub x: Vec<f64>,
    pub existence: ExistenceCondition,
}

fn row(x: &[f64]) -> ReferenceRow {
    ReferenceRow {
        x: x.to_vec(),
        existence: ExistenceCondition::always(),
    }
}

/// Reference row layout for a model, if it has one.
pub fn reference_rows(spec: &ModelSpec) -> Option<Vec<ReferenceRow>> {
    let pref_a = match &spec.preference {
        None => None,
        Some(p) if p.target == "A" => Some(p.delta),
        Some(_) => return None,
    };
    let rows = match (spec.base, spec.equivocator, pref_a) {
        (_, None, None) => vec![row(&[0.0, 1.0]), row(&[1.0, 0.0]), row(&[0.5, 0.5])],
        (BaseGame::Bso, None, Some(d)) => vec![
            row(&[0.0, 1.0]),
            row(&[1.0, 0.0]),
            row(&[(1.0 - d) / 2.0, (1.0 + d) / 2.0]),
        ],
        (BaseGame::Bdo, None, Some(d)) => vec![
            row(&[0.0, 1.0]),
            row(&[1.0, 0.0]),
            row(&[(1.0 + d) / 2.0, (1.0 - d) / 2.0]),
        ],
        (BaseGame::Bso, Some(_), None) => vec![
            row(&[0.0, 1.0, 0.0]),
            row(&[0.0, 0.0, 1.0]),
            row(&[1.0, 0.0, 0.0]),
            row(&[0.5, 0.5, 0.0]),
            row(&[0.0, 0.5, 0.5]),
            row(&[0.5, 0.0, 0.5]),
        ],
        (BaseGame::Bso, Some(r), Some(d)) => {
            let cond = ExistenceCondition::delta_below_one_minus_r(r, d);
            let den = 2.0 * r - 2.0;
            vec![
                row(&[1.0, 0.0, 0.0]),
                row(&[0.0, 1.0, 0.0]),
                row(&[0.0, 0.0, 1.0]),
                row(&[0.0, 0.5, 0.5]),
                row(&[(1.0 - d) / 2.0, (1.0 + d) / 2.0, 0.0]),
                ReferenceRow {
                    x: vec![(d + r - 1.0) / den, 0.5, -d / den],
                    existence: cond.clone(),
                },
                ReferenceRow {
                    x: vec![(d + r - 1.0) / den, 0.0, (r - d - 1.0) / den],
                    existence: cond,
                },
            ]
        }
        (BaseGame::Bdo, Some(_), None) => vec![
            row(&[1.0, 0.0, 0.0]),
            row(&[0.0, 0.0, 1.0]),
            row(&[0.0, 1.0, 0.0]),
            row(&[0.5, 0.0, 0.5]),
            row(&[0.5, 0.5, 0.0]),
            row(&[0.0, 0.5, 0.5]),
        ],
        (BaseGame::Bdo, Some(r), Some(d)) => {
            let den = 2.0 * r - 2.0;
            vec![
                row(&[0.0, 1.0, 0.0]),
                row(&[0.0, 0.0, 1.0]),
                row(&[1.0, 0.0, 0.0]),
                row(&[0.0, 0.5, 0.5]),
                row(&[(1.0 + d) / 2.0, (1.0 - d) / 2.0, 0.0]),
                ReferenceRow {
                    x: vec![(r - d - 1.0) / den, 0.0, (d + r - 1.0) / den],
                    existence: ExistenceCondition::delta_below_one_minus_r(r, d),
                },
            ]
        }
    };
    Some(rows)
}

const MATCH_TOL: f64 = 1e-7;

/// Enumerates, analyses and orders the fixed points of a model.
pub fn table_report(spec: &ModelSpec) -> Result<Vec<TableRow>> {
    let a = build(spec)?;
    let points = equilibria::enumerate_fixed_points(&a, DEFAULT_ENUM_TOL)?;
    Ok(arrange(points, reference_rows(spec)))
}

/// Table for an arbitrary matrix, in enumeration order.
pub fn table_report_matrix(a: &PayoffMatrix) -> Result<Vec<TableRow>> {
    let points = equilibria::enumerate_fixed_points(a, DEFAULT_ENUM_TOL)?;
    Ok(arrange(points, None))
}

fn arrange(points: Vec<FixedPoint>, reference: Option<Vec<ReferenceRow>>) -> Vec<TableRow> {
    let mut remaining: Vec<Option<FixedPoint>> = points.into_iter().map(Some).collect();
    let mut rows = Vec::new();
    for refrow in reference.into_iter().flatten() {
        if !refrow.existence.holds {
            continue;
        }
        let hit = remaining.iter_mut().find(|p| {
            p.as_ref()
                .is_some_and(|p| p.x.distance(&refrow.x) < MATCH_TOL)
        });
        if let Some(slot) = hit {
            let point = slot.take().unwrap();
            rows.push((point, refrow.existence));
        }
    }
    rows.extend(
        remaining
            .into_iter()
            .flatten()
            .map(|p| (p, ExistenceCondition::always())),
    );
    rows.into_iter()
        .enumerate()
        .map(|(i, (point, existence))| TableRow {
            index: i + 1,
            label: format!("p*_{}", i + 1),
            point,
            existence,
        })
        .collect()
}
