//! Fitness, the replicator vector field, and fixed-step integration on the
//! probability simplex.
//!
//! For a population state `x` and payoff matrix `A`:
//!
//! ```text
//! f_i   = sum_j x_j a_ij          fitness of opinion i
//! phi   = sum_i x_i f_i           average fitness
//! dx_i  = x_i (f_i - phi)         replicator field
//! ```
//!
//! Integration is classical RK4 with a fixed step. After every step the
//! state is projected back onto the simplex (negative components clamped to
//! zero, then renormalised), so each recorded sample is a valid
//! [`SimplexState`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::PayoffMatrix;

/// Tolerance on `|sum x - 1|` for a valid state.
pub const SIMPLEX_TOL: f64 = 1e-9;
pub const DEFAULT_STEP: f64 = 0.01;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_T: f64 = 1e4;
/// Upper bound on recorded samples per trajectory.
pub const MAX_SAMPLES: usize = 10_000;

/// Frequency vector on the unit simplex.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SimplexState(Vec<f64>);

impl SimplexState {
    /// Validates `x`: at least two components, all finite and non-negative,
    /// summing to one within [`SIMPLEX_TOL`].
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::InvalidState(format!(
                "need at least 2 components, got {}",
                x.len()
            )));
        }
        if let Some(v) = x.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidState(format!("component {v} is negative or non-finite")));
        }
        let sum: f64 = x.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidState(format!("components sum to {sum}, not 1")));
        }
        Ok(SimplexState(x))
    }

    /// Scales non-negative weights to sum to one.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidState(format!(
                "weights {weights:?} cannot be normalised"
            )));
        }
        Self::new(weights.into_iter().map(|w| w / sum).collect())
    }

    pub fn vertex(n: usize, i: usize) -> Self {
        let mut x = vec![0.0; n];
        x[i] = 1.0;
        SimplexState(x)
    }

    pub fn uniform(n: usize) -> Self {
        SimplexState(vec![1.0 / n as f64; n])
    }

    /// Wraps a vector that is already known to lie on the simplex.
    pub(crate) fn from_projected(x: Vec<f64>) -> Self {
        SimplexState(x)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Max-norm distance to another state.
    pub fn distance(&self, other: &[f64]) -> f64 {
        max_abs_diff(&self.0, other)
    }
}

impl std::ops::Index<usize> for SimplexState {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub(crate) fn max_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn check_dim(a: &PayoffMatrix, x: &[f64]) -> Result<()> {
    if a.n() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            found: x.len(),
        });
    }
    Ok(())
}

#[inline]
fn fitness_into(a: &PayoffMatrix, x: &[f64], f: &mut [f64]) {
    for (i, fi) in f.iter_mut().enumerate() {
        *fi = a.row(i).iter().zip(x).map(|(aij, xj)| aij * xj).sum();
    }
}

/// Replicator field on raw slices; `f` is scratch space of length n.
/// `x` need not lie on the simplex.
#[inline]
pub(crate) fn field_into(a: &PayoffMatrix, x: &[f64], f: &mut [f64], out: &mut [f64]) {
    fitness_into(a, x, f);
    let phi: f64 = x.iter().zip(f.iter()).map(|(xi, fi)| xi * fi).sum();
    for i in 0..x.len() {
        out[i] = x[i] * (f[i] - phi);
    }
}

/// Fitness of every opinion, `f_i = sum_j x_j a_ij`.
pub fn fitness(a: &PayoffMatrix, x: &SimplexState) -> Result<Vec<f64>> {
    check_dim(a, x.as_slice())?;
    let mut f = vec![0.0; a.n()];
    fitness_into(a, x.as_slice(), &mut f);
    Ok(f)
}

/// Average fitness `phi = x^T A x`.
pub fn average_fitness(a: &PayoffMatrix, x: &SimplexState) -> Result<f64> {
    let f = fitness(a, x)?;
    Ok(x.as_slice().iter().zip(&f).map(|(xi, fi)| xi * fi).sum())
}

/// The replicator vector field `x_i (f_i - phi)`.
pub fn replicator_field(a: &PayoffMatrix, x: &SimplexState) -> Result<Vec<f64>> {
    replicator_field_raw(a, x.as_slice())
}

/// Like [`replicator_field`] but for an arbitrary point of `R^n`; used for
/// finite differences and Jacobian checks off the simplex.
pub fn replicator_field_raw(a: &PayoffMatrix, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(a, x)?;
    let n = a.n();
    let mut f = vec![0.0; n];
    let mut out = vec![0.0; n];
    field_into(a, x, &mut f, &mut out);
    Ok(out)
}

/// Clamps negative components to zero and renormalises.
pub(crate) fn project(x: &mut [f64]) {
    for v in x.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let sum: f64 = x.iter().sum();
    if (sum - 1.0).abs() > 1e-15 && sum > 0.0 {
        x.iter_mut().for_each(|v| *v /= sum);
    }
}

/// Time-stamped samples of an integration run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SimplexState>,
    /// Set by [`converge`] when the field fell below tolerance.
    pub converged: bool,
    pub terminal_state: SimplexState,
}

impl Trajectory {
    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one sample")
    }
}

struct Rk4 {
    f: Vec<f64>,
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        Rk4 {
            f: vec![0.0; n],
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    /// Advances `x` by `h`, assuming `self.k1` already holds the field at `x`.
    fn step(&mut self, a: &PayoffMatrix, x: &mut [f64], h: f64) {
        let n = x.len();
        for i in 0..n {
            self.tmp[i] = x[i] + 0.5 * h * self.k1[i];
        }
        field_into(a, &self.tmp, &mut self.f, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = x[i] + 0.5 * h * self.k2[i];
        }
        field_into(a, &self.tmp, &mut self.f, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = x[i] + h * self.k3[i];
        }
        field_into(a, &self.tmp, &mut self.f, &mut self.k4);
        for i in 0..n {
            x[i] += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        project(x);
    }

    fn eval(&mut self, a: &PayoffMatrix, x: &[f64]) {
        field_into(a, x, &mut self.f, &mut self.k1);
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")))
    }
}

fn record_stride(max_steps: usize) -> usize {
    max_steps.div_ceil(MAX_SAMPLES - 2).max(1)
}

/// Shared driver: steps until `t_end`, or until the field max-norm drops
/// below `tol` when one is given.
fn run(
    a: &PayoffMatrix,
    x0: &SimplexState,
    step: f64,
    t_end: f64,
    tol: Option<f64>,
) -> Result<Trajectory> {
    check_dim(a, x0.as_slice())?;
    check_positive("step", step)?;
    check_positive("t_end", t_end)?;
    let n = a.n();
    let max_steps = (t_end / step - 1e-9).ceil().max(1.0) as usize;
    let stride = record_stride(max_steps);

    let mut rk = Rk4::new(n);
    let mut x = x0.as_slice().to_vec();
    let mut t = 0.0;
    let mut times = vec![0.0];
    let mut states = vec![x0.clone()];
    let mut converged = false;

    rk.eval(a, &x);
    for k in 1..=max_steps {
        if let Some(tol) = tol {
            if max_norm(&rk.k1) < tol {
                converged = true;
                break;
            }
        }
        // last step lands exactly on t_end
        let h = if k == max_steps { t_end - t } else { step };
        if h <= 0.0 {
            break;
        }
        rk.step(a, &mut x, h);
        t = if k == max_steps { t_end } else { k as f64 * step };
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t });
        }
        rk.eval(a, &x);
        if rk.k1.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t });
        }
        if k % stride == 0 || k == max_steps {
            times.push(t);
            states.push(SimplexState::from_projected(x.clone()));
        }
    }
    if !converged {
        if let Some(tol) = tol {
            converged = max_norm(&rk.k1) < tol;
        }
    }
    if *times.last().unwrap() < t {
        times.push(t);
        states.push(SimplexState::from_projected(x.clone()));
    }
    Ok(Trajectory {
        times,
        states,
        converged,
        terminal_state: SimplexState::from_projected(x),
    })
}

/// Integrates from `x0` to `t_end` with fixed RK4 steps of size `step`.
pub fn integrate(a: &PayoffMatrix, x0: &SimplexState, step: f64, t_end: f64) -> Result<Trajectory> {
    run(a, x0, step, t_end, None)
}

/// Integrates until the field max-norm drops below `tol` or `max_t` is
/// reached, whichever comes first.
pub fn converge(
    a: &PayoffMatrix,
    x0: &SimplexState,
    step: f64,
    tol: f64,
    max_t: f64,
) -> Result<Trajectory> {
    check_positive("tol", tol)?;
    run(a, x0, step, max_t, Some(tol))
}
