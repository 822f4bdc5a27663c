//! Fixed points of the replicator system and their stability.
//!
//! Fitness is linear in `x`, so on a fixed support `S` the conditions
//! `f_i = c` for all `i` in `S` together with `sum x = 1` form a linear
//! system. Enumerating every nonempty support and keeping the non-negative
//! solutions yields every fixed point of the flow.
//!
//! Stability is judged on the tangent space of the simplex: the last
//! coordinate is eliminated through `x_n = 1 - sum_{i<n} x_i` and the
//! eigenvalues of the resulting `(n-1)`-dimensional Jacobian decide. The
//! full `n`-dimensional spectrum is also reported because it contains the
//! extra eigenvalue `-phi` transverse to the simplex.
//!
//! When a reduced eigenvalue sits within `margin` of the imaginary axis the
//! linearisation is inconclusive and a perturbation experiment decides
//! (`StableNumeric` / `UnstableNumeric`).

use nalgebra::{Complex, DMatrix, Schur};
use serde::Serialize;

use crate::dynamics::{self, field_into, max_abs_diff, max_norm, SimplexState};
use crate::error::{Error, Result};
use crate::linalg::{self, Solution};
use crate::model::PayoffMatrix;

pub type Complex64 = Complex<f64>;

pub const DEFAULT_ENUM_TOL: f64 = 1e-9;
pub const DEFAULT_MARGIN: f64 = 1e-9;
/// Points closer than this (max-norm) are the same fixed point.
pub const DEDUP_TOL: f64 = 1e-9;
/// Field max-norm below which a state counts as a fixed point.
pub const FIXED_POINT_RESIDUAL: f64 = 1e-8;

pub const PERTURBATION_RADIUS: f64 = 1e-3;
pub const PERTURBATION_HORIZON: f64 = 5000.0;
pub const PERTURBATION_STEP: f64 = 0.05;
/// A perturbed run must end at most this fraction of its initial distance away.
pub const PERTURBATION_CONTRACTION: f64 = 0.9;
/// ... and never stray further than this multiple of the radius.
pub const PERTURBATION_ESCAPE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Stability {
    Stable,
    Unstable,
    /// Nonhyperbolic, judged stable by the perturbation test.
    StableNumeric,
    /// Nonhyperbolic, judged unstable by the perturbation test.
    UnstableNumeric,
}

impl Stability {
    pub fn is_stable(self) -> bool {
        matches!(self, Stability::Stable | Stability::StableNumeric)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::StableNumeric => "stable (numeric)",
            Stability::UnstableNumeric => "unstable (numeric)",
        }
    }
}

/// An equilibrium together with its spectra and classification.
#[derive(Debug, Clone, Serialize)]
pub struct FixedPoint {
    pub x: SimplexState,
    /// Opinions with frequency above the enumeration tolerance.
    pub support: Vec<usize>,
    #[serde(serialize_with = "serialize_complex")]
    pub eigen_full: Vec<Complex64>,
    #[serde(serialize_with = "serialize_complex")]
    pub eigen_reduced: Vec<Complex64>,
    /// `None` for members of a continuum of fixed points.
    pub classification: Option<Stability>,
    pub degenerate: bool,
}

impl FixedPoint {
    pub fn is_stable(&self) -> bool {
        self.classification.is_some_and(Stability::is_stable)
    }
}

fn serialize_complex<S: serde::Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

/// A fixed-point location before spectral analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub x: Vec<f64>,
    pub degenerate: bool,
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    // nonempty subsets ordered by size, then lexicographically
    let mut all: Vec<Vec<usize>> = (1u32..(1 << n))
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
        .collect();
    all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    all.into_iter()
}

/// Linear system for support `support` with the extra constraints
/// `x_j = 0` for `j` in `zeroed`. Unknowns: `x_S` then `c`.
fn support_system(a: &PayoffMatrix, support: &[usize], zeroed: &[usize]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let k = support.len();
    let mut m = Vec::with_capacity(k + 1 + zeroed.len());
    let mut b = Vec::with_capacity(k + 1 + zeroed.len());
    for &i in support {
        let mut row: Vec<f64> = support.iter().map(|&j| a.get(i, j)).collect();
        row.push(-1.0);
        m.push(row);
        b.push(0.0);
    }
    let mut sum_row = vec![1.0; k];
    sum_row.push(0.0);
    m.push(sum_row);
    b.push(1.0);
    for &z in zeroed {
        let mut row = vec![0.0; k + 1];
        row[support.iter().position(|&s| s == z).unwrap()] = 1.0;
        m.push(row);
        b.push(0.0);
    }
    (m, b)
}

fn feasible_point(n: usize, support: &[usize], sol: &[f64], tol: f64) -> Option<Vec<f64>> {
    let xs = &sol[..support.len()];
    if xs.iter().any(|v| *v < -tol) {
        return None;
    }
    let mut x = vec![0.0; n];
    for (&i, &v) in support.iter().zip(xs) {
        x[i] = v.max(0.0);
    }
    dynamics::project(&mut x);
    Some(x)
}

const SOLVE_EPS: f64 = 1e-12;

/// Finds every fixed point location by support enumeration, without
/// spectral analysis. Continua are represented by the vertices of their
/// solution polytope and flagged `degenerate`.
pub fn locate_fixed_points(a: &PayoffMatrix, tol: f64) -> Result<Vec<Location>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let n = a.n();
    let mut found: Vec<Location> = Vec::new();
    let mut push = |x: Vec<f64>, degenerate: bool| {
        if let Some(existing) = found.iter_mut().find(|l| max_abs_diff(&l.x, &x) < DEDUP_TOL) {
            existing.degenerate |= degenerate;
        } else {
            found.push(Location { x, degenerate });
        }
    };
    for support in subsets(n) {
        let (m, b) = support_system(a, &support, &[]);
        match linalg::solve(m, b, support.len() + 1, SOLVE_EPS) {
            Solution::Unique(sol) => {
                if let Some(x) = feasible_point(n, &support, &sol, tol) {
                    push(x, false);
                }
            }
            Solution::Inconsistent => {}
            Solution::Continuum => {
                // vertices of the solution polytope: pin coordinates to zero
                // until the system becomes determined
                let k = support.len();
                for zmask in 1u32..((1 << k) - 1) {
                    let zeroed: Vec<usize> = (0..k)
                        .filter(|i| zmask & (1 << i) != 0)
                        .map(|i| support[i])
                        .collect();
                    let (m, b) = support_system(a, &support, &zeroed);
                    if let Solution::Unique(sol) = linalg::solve(m, b, k + 1, SOLVE_EPS) {
                        if let Some(x) = feasible_point(n, &support, &sol, tol) {
                            push(x, true);
                        }
                    }
                }
            }
        }
    }
    Ok(found)
}

/// Enumerates all fixed points and analyses each one with the default
/// hyperbolicity margin.
pub fn enumerate_fixed_points(a: &PayoffMatrix, tol: f64) -> Result<Vec<FixedPoint>> {
    locate_fixed_points(a, tol)?
        .into_iter()
        .map(|loc| analyze(a, loc, tol, DEFAULT_MARGIN))
        .collect()
}

/// Spectra and classification for a located fixed point.
pub fn analyze(a: &PayoffMatrix, loc: Location, tol: f64, margin: f64) -> Result<FixedPoint> {
    let x = SimplexState::new(loc.x)?;
    let j = jacobian(a, &x)?;
    let eigen_full = eigen_spectrum(&j)?;
    let eigen_reduced = eigen_spectrum(&reduced_jacobian(&j))?;
    let classification = if loc.degenerate {
        None
    } else {
        Some(classify_with_spectrum(a, &x, &eigen_reduced, margin)?)
    };
    let support = (0..x.len()).filter(|&i| x[i] > tol).collect();
    Ok(FixedPoint {
        x,
        support,
        eigen_full,
        eigen_reduced,
        classification,
        degenerate: loc.degenerate,
    })
}

/// Analytic Jacobian of the replicator field,
/// `J_ij = delta_ij (f_i - phi) + x_i (a_ij - f_j - (A^T x)_j)`.
pub fn jacobian(a: &PayoffMatrix, x: &SimplexState) -> Result<Vec<Vec<f64>>> {
    jacobian_raw(a, x.as_slice())
}

/// [`jacobian`] at an arbitrary point of `R^n`.
pub fn jacobian_raw(a: &PayoffMatrix, x: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = a.n();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    let f: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| a.get(i, j) * x[j]).sum())
        .collect();
    let g: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| a.get(i, j) * x[i]).sum())
        .collect();
    let phi: f64 = x.iter().zip(&f).map(|(xi, fi)| xi * fi).sum();
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let diag = if i == j { f[i] - phi } else { 0.0 };
                    diag + x[i] * (a.get(i, j) - f[j] - g[j])
                })
                .collect()
        })
        .collect())
}

/// Jacobian of the `(n-1)`-dimensional system obtained by substituting
/// `x_n = 1 - sum_{i<n} x_i`: `R_ij = J_ij - J_in`.
pub fn reduced_jacobian(j: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = j.len();
    (0..n - 1)
        .map(|r| (0..n - 1).map(|c| j[r][c] - j[r][n - 1]).collect())
        .collect()
}

const SCHUR_MAX_ITER: usize = 10_000;

/// Eigenvalues of a real square matrix, sorted by real then imaginary part.
pub fn eigen_spectrum(j: &[Vec<f64>]) -> Result<Vec<Complex64>> {
    let n = j.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if j.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument("eigen_spectrum needs a square matrix".into()));
    }
    if j.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let m = DMatrix::from_fn(n, n, |r, c| j[r][c]);
    let schur = Schur::try_new(m, f64::EPSILON, SCHUR_MAX_ITER).ok_or(Error::ConvergenceFailure)?;
    let mut eig: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(eig)
}

/// Classifies a fixed point by its reduced spectrum, falling back to the
/// perturbation test when some eigenvalue has `|Re| <= margin`.
pub fn classify(a: &PayoffMatrix, x: &SimplexState, margin: f64) -> Result<Stability> {
    if a.n() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            found: x.len(),
        });
    }
    let residual = max_norm(&dynamics::replicator_field(a, x)?);
    if !(residual < FIXED_POINT_RESIDUAL) {
        return Err(Error::NotAFixedPoint { residual });
    }
    let reduced = eigen_spectrum(&reduced_jacobian(&jacobian(a, x)?))?;
    classify_with_spectrum(a, x, &reduced, margin)
}

fn classify_with_spectrum(
    a: &PayoffMatrix,
    x: &SimplexState,
    reduced: &[Complex64],
    margin: f64,
) -> Result<Stability> {
    if reduced.iter().all(|z| z.re < -margin) {
        return Ok(Stability::Stable);
    }
    if reduced.iter().any(|z| z.re > margin) {
        return Ok(Stability::Unstable);
    }
    perturbation_test(a, x)
}

/// Starting states around `x`: `x +- radius (e_k - e_{n-1})` for each
/// `k < n-1`. Moves that would leave the simplex are replaced by a move of
/// the same length toward the centroid.
pub fn perturbation_starts(x: &SimplexState, radius: f64) -> Vec<SimplexState> {
    let n = x.len();
    let centroid = vec![1.0 / n as f64; n];
    let to_centroid: Vec<f64> = centroid.iter().zip(x.as_slice()).map(|(c, v)| c - v).collect();
    let scale = max_norm(&to_centroid);
    let mut starts = Vec::with_capacity(2 * (n - 1));
    for k in 0..n - 1 {
        for sign in [1.0, -1.0] {
            let mut y = x.as_slice().to_vec();
            y[k] += sign * radius;
            y[n - 1] -= sign * radius;
            if y.iter().any(|v| *v < 0.0) {
                y = x.as_slice().to_vec();
                if scale > 0.0 {
                    for (yi, d) in y.iter_mut().zip(&to_centroid) {
                        *yi += radius * d / scale;
                    }
                }
            }
            dynamics::project(&mut y);
            starts.push(SimplexState::from_projected(y));
        }
    }
    starts
}

fn perturbation_test(a: &PayoffMatrix, x: &SimplexState) -> Result<Stability> {
    for start in perturbation_starts(x, PERTURBATION_RADIUS) {
        let d0 = start.distance(x.as_slice());
        if d0 == 0.0 {
            continue;
        }
        let tr = dynamics::integrate(a, &start, PERTURBATION_STEP, PERTURBATION_HORIZON)?;
        let escaped = tr
            .states
            .iter()
            .any(|s| s.distance(x.as_slice()) > PERTURBATION_ESCAPE * PERTURBATION_RADIUS);
        let d_end = tr.terminal_state.distance(x.as_slice());
        if escaped || d_end > PERTURBATION_CONTRACTION * d0 {
            return Ok(Stability::UnstableNumeric);
        }
    }
    Ok(Stability::StableNumeric)
}

/// Field residual at `x`, handy for asserting fixed-point status.
pub fn residual(a: &PayoffMatrix, x: &[f64]) -> f64 {
    let n = a.n();
    let mut f = vec![0.0; n];
    let mut out = vec![0.0; n];
    field_into(a, x, &mut f, &mut out);
    max_norm(&out)
}
