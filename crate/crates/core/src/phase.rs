//! Simplex lattices, sampled phase fields, basins of attraction and the
//! ternary embedding used for drawing three-opinion games.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{self, max_norm, SimplexState, DEFAULT_STEP, DEFAULT_TOL};
use crate::equilibria::{self, FixedPoint, DEFAULT_ENUM_TOL};
use crate::error::{Error, Result};
use crate::model::PayoffMatrix;

/// A trajectory whose end state lies within this distance of an attractor
/// is assigned to it.
pub const ATTRACTOR_MATCH_RADIUS: f64 = 1e-3;

fn check_resolution(h: f64) -> Result<usize> {
    if !(h > 0.0 && h <= 0.1) {
        return Err(Error::InvalidArgument(format!(
            "resolution must lie in (0, 0.1], got {h}"
        )));
    }
    let k = (1.0 / h).round();
    if ((k * h) - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("1/resolution must be an integer, got {h}")));
    }
    Ok(k as usize)
}

/// All compositions `(i h, j h, ...)` with integer parts summing to `1/h`,
/// in lexicographic order of the integer parts. Includes the faces.
pub fn simplex_lattice(n: usize, resolution: f64) -> Result<Vec<SimplexState>> {
    let k = check_resolution(resolution)?;
    if n < 2 {
        return Err(Error::InvalidArgument("lattice needs n >= 2".into()));
    }
    let mut out = Vec::new();
    let mut parts = vec![0usize; n];
    fn rec(pos: usize, left: usize, parts: &mut Vec<usize>, k: usize, out: &mut Vec<SimplexState>) {
        let n = parts.len();
        if pos == n - 1 {
            parts[pos] = left;
            let x = parts.iter().map(|&p| p as f64 / k as f64).collect();
            out.push(SimplexState::from_projected(x));
            return;
        }
        for p in (0..=left).rev() {
            parts[pos] = p;
            rec(pos + 1, left - p, parts, k, out);
        }
    }
    rec(0, k, &mut parts, k, &mut out);
    Ok(out)
}

/// Barycentric embedding of a three-opinion state: `A` at `(0, 0)`, `B` at
/// `(1, 0)`, `E` at `(1/2, sqrt(3)/2)`.
pub fn to_ternary(x: &SimplexState) -> Result<(f64, f64)> {
    if x.len() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: x.len(),
        });
    }
    Ok(ternary_xy(x.as_slice()))
}

pub(crate) fn ternary_xy(x: &[f64]) -> (f64, f64) {
    (x[1] + 0.5 * x[2], 3f64.sqrt() / 2.0 * x[2])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSample {
    pub state: SimplexState,
    pub field: Vec<f64>,
    /// Max-norm of the field.
    pub speed: f64,
    /// Ternary coordinates, present for three-opinion games.
    pub ternary: Option<(f64, f64)>,
}

/// The replicator field sampled on the simplex lattice.
pub fn phase_field(a: &PayoffMatrix, resolution: f64) -> Result<Vec<FieldSample>> {
    simplex_lattice(a.n(), resolution)?
        .into_iter()
        .map(|state| {
            let field = dynamics::replicator_field(a, &state)?;
            let ternary = (a.n() == 3).then(|| ternary_xy(state.as_slice()));
            Ok(FieldSample {
                speed: max_norm(&field),
                field,
                ternary,
                state,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct BasinMap {
    pub resolution: f64,
    pub grid: Vec<SimplexState>,
    /// The stable fixed points trajectories were matched against.
    pub attractors: Vec<FixedPoint>,
    /// Per grid point, index into `attractors`, or `None` if unresolved.
    pub assignment: Vec<Option<usize>>,
}

impl BasinMap {
    pub fn unresolved(&self) -> Vec<usize> {
        (0..self.grid.len()).filter(|&i| self.assignment[i].is_none()).collect()
    }

    /// Share of grid points per attractor.
    pub fn fractions(&self) -> Vec<f64> {
        let total = self.grid.len() as f64;
        (0..self.attractors.len())
            .map(|k| self.assignment.iter().filter(|a| **a == Some(k)).count() as f64 / total)
            .collect()
    }
}

/// Integrates from every lattice point and records which stable fixed
/// point it ends near. Runs use the default step and tolerance and stop at
/// `max_t`.
pub fn basins(a: &PayoffMatrix, resolution: f64, max_t: f64) -> Result<BasinMap> {
    let grid = simplex_lattice(a.n(), resolution)?;
    let attractors: Vec<FixedPoint> = equilibria::enumerate_fixed_points(a, DEFAULT_ENUM_TOL)?
        .into_iter()
        .filter(FixedPoint::is_stable)
        .collect();
    if attractors.is_empty() {
        return Err(Error::NoAttractor);
    }
    let assignment = grid
        .par_iter()
        .map(|x0| {
            let tr = dynamics::converge(a, x0, DEFAULT_STEP, DEFAULT_TOL, max_t)?;
            let end = &tr.terminal_state;
            Ok(attractors
                .iter()
                .enumerate()
                .map(|(k, p)| (k, end.distance(p.x.as_slice())))
                .filter(|(_, d)| *d <= ATTRACTOR_MATCH_RADIUS)
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(k, _)| k))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BasinMap {
        resolution,
        grid,
        attractors,
        assignment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build, ModelSpec};

    #[test]
    fn lattice_sizes() {
        assert_eq!(simplex_lattice(2, 0.01).unwrap().len(), 101);
        assert_eq!(simplex_lattice(3, 0.05).unwrap().len(), 21 * 22 / 2);
        let l = simplex_lattice(3, 0.1).unwrap();
        assert_eq!(l[0].as_slice(), &[1.0, 0.0, 0.0]);
        assert!(l.iter().all(|s| (s.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12));
        assert!(simplex_lattice(3, 0.2).is_err());
        assert!(simplex_lattice(3, 0.03).is_err());
        assert!(simplex_lattice(3, 0.0).is_err());
    }

    #[test]
    fn ternary_points() {
        let t = |x: &[f64]| to_ternary(&SimplexState::new(x.to_vec()).unwrap()).unwrap();
        assert_eq!(t(&[1.0, 0.0, 0.0]), (0.0, 0.0));
        assert_eq!(t(&[0.0, 1.0, 0.0]), (1.0, 0.0));
        let (x, y) = t(&[0.0, 0.0, 1.0]);
        assert!((x - 0.5).abs() < 1e-15 && (y - 3f64.sqrt() / 2.0).abs() < 1e-15);
        let third = 1.0 / 3.0;
        let (x, y) = t(&[third, third, third]);
        assert!((x - 0.5).abs() < 1e-15 && (y - 3f64.sqrt() / 6.0).abs() < 1e-15);
        assert!(to_ternary(&SimplexState::uniform(2)).is_err());
    }

    #[test]
    fn phase_field_examples() {
        let a = build(&ModelSpec::bdo()).unwrap();
        let f = phase_field(&a, 0.05).unwrap();
        let s = f.iter().find(|s| (s.state[0] - 0.25).abs() < 1e-12).unwrap();
        assert!(s.field[0] > 0.0);
        assert!(s.ternary.is_none());

        let a = build(&ModelSpec::bdo().with_equivocator(0.3)).unwrap();
        let f = phase_field(&a, 0.05).unwrap();
        for s in &f {
            if s.state[2] == 0.0 {
                assert_eq!(s.field[2], 0.0);
            }
            if s.state.as_slice().iter().any(|v| *v == 1.0) {
                assert_eq!(s.speed, 0.0);
            }
            assert!(s.ternary.is_some());
        }
    }

    #[test]
    fn bso_basin_boundaries() {
        let a = build(&ModelSpec::bso()).unwrap();
        let map = basins(&a, 0.01, 1e4).unwrap();
        let a_idx = map.attractors.iter().position(|p| p.x[0] == 1.0).unwrap();
        for (x, asg) in map.grid.iter().zip(&map.assignment) {
            if x[0] > 0.5 + 1e-9 {
                assert_eq!(*asg, Some(a_idx), "{x:?}");
            } else if x[0] < 0.5 - 1e-9 {
                assert!(asg.is_some() && *asg != Some(a_idx));
            } else {
                assert_eq!(*asg, None);
            }
        }
    }

    #[test]
    fn no_attractor() {
        // every point of a constant game is fixed; nothing gets classified
        let a = PayoffMatrix::from_rows(&["A", "B"], vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(basins(&a, 0.1, 10.0).unwrap_err(), Error::NoAttractor);
    }
}
