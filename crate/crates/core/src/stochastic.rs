//! Finite well-mixed population with pairwise-comparison imitation.
//!
//! Each step picks a focal agent and a distinct model agent uniformly at
//! random. The focal agent, holding opinion `i`, switches to the model's
//! opinion `j` with probability `max(0, pi_j - pi_i) / spread`, where `pi`
//! is the expected payoff against the rest of the population and `spread`
//! is the range of the payoff matrix.
//!
//! The expected frequency change per step is `x_i (f_i - phi) / (N spread)`,
//! so one unit of replicator time corresponds to `N * spread` steps (see
//! [`ImitationProcess::steps_per_unit_time`]).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::PayoffMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Population {
    counts: Vec<u64>,
}

impl Population {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if counts.len() < 2 {
            return Err(Error::InvalidArgument("population needs at least 2 opinions".into()));
        }
        if total < 2 {
            return Err(Error::InvalidArgument(format!("population needs N >= 2, got {total}")));
        }
        Ok(Population { counts })
    }

    /// Rounds frequencies to integer counts summing to `total` (largest
    /// remainder, ties to the lower index).
    pub fn from_frequencies(x: &[f64], total: u64) -> Result<Self> {
        let sum: f64 = x.iter().sum();
        if x.iter().any(|v| !v.is_finite() || *v < 0.0) || !(sum > 0.0) {
            return Err(Error::InvalidArgument(format!("bad frequencies {x:?}")));
        }
        let exact: Vec<f64> = x.iter().map(|v| v / sum * total as f64).collect();
        let mut counts: Vec<u64> = exact.iter().map(|v| v.floor() as u64).collect();
        let mut left = total - counts.iter().sum::<u64>();
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = exact[a] - exact[a].floor();
            let rb = exact[b] - exact[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for &i in order.iter().cycle() {
            if left == 0 {
                break;
            }
            counts[i] += 1;
            left -= 1;
        }
        Self::new(counts)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.total() as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn is_monomorphic(&self) -> bool {
        self.counts.iter().filter(|&&c| c > 0).count() <= 1
    }

    fn opinion_of(&self, agent: u64) -> usize {
        let mut acc = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            acc += c;
            if agent < acc {
                return i;
            }
        }
        unreachable!("agent index {agent} out of range")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub step: u64,
    pub x: Vec<f64>,
}

/// The imitation process for one payoff matrix.
#[derive(Debug, Clone)]
pub struct ImitationProcess<'a> {
    matrix: &'a PayoffMatrix,
    spread: f64,
}

impl<'a> ImitationProcess<'a> {
    pub fn new(matrix: &'a PayoffMatrix) -> Self {
        ImitationProcess {
            matrix,
            spread: matrix.spread(),
        }
    }

    /// Steps corresponding to one unit of replicator time at size `total`.
    pub fn steps_per_unit_time(&self, total: u64) -> f64 {
        total as f64 * self.spread
    }

    fn payoff(&self, pop: &Population, i: usize) -> f64 {
        let n = pop.total() as f64;
        let sum: f64 = self
            .matrix
            .row(i)
            .iter()
            .zip(&pop.counts)
            .map(|(a, &c)| a * c as f64)
            .sum();
        (sum - self.matrix.get(i, i)) / (n - 1.0)
    }

    /// One imitation event. Returns true when the focal agent switched.
    pub fn step<R: Rng + ?Sized>(&self, pop: &mut Population, rng: &mut R) -> bool {
        let n = pop.total();
        let focal = rng.random_range(0..n);
        let mut model = rng.random_range(0..n - 1);
        if model >= focal {
            model += 1;
        }
        let i = pop.opinion_of(focal);
        let j = pop.opinion_of(model);
        if i == j || self.spread <= 0.0 {
            return false;
        }
        let gain = self.payoff(pop, j) - self.payoff(pop, i);
        if gain <= 0.0 {
            return false;
        }
        if rng.random::<f64>() < gain / self.spread {
            pop.counts[i] -= 1;
            pop.counts[j] += 1;
            true
        } else {
            false
        }
    }

    /// Runs `steps` events from `pop0`, recording frequencies every `every`
    /// steps plus the final state. Deterministic in `seed`.
    pub fn run(&self, pop0: &Population, steps: u64, every: u64, seed: u64) -> Result<Vec<Snapshot>> {
        if pop0.counts.len() != self.matrix.n() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.n(),
                found: pop0.counts.len(),
            });
        }
        if every == 0 {
            return Err(Error::InvalidArgument("snapshot interval must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pop = pop0.clone();
        let mut snaps = vec![Snapshot {
            step: 0,
            x: pop.frequencies(),
        }];
        let mut s = 0;
        while s < steps {
            if pop.is_monomorphic() {
                // absorbed: the remaining snapshots are all equal
                let x = pop.frequencies();
                let mut next = (s / every + 1) * every;
                while next < steps {
                    snaps.push(Snapshot { step: next, x: x.clone() });
                    next += every;
                }
                snaps.push(Snapshot { step: steps, x });
                return Ok(snaps);
            }
            self.step(&mut pop, &mut rng);
            s += 1;
            if s % every == 0 || s == steps {
                snaps.push(Snapshot {
                    step: s,
                    x: pop.frequencies(),
                });
            }
        }
        Ok(snaps)
    }

    /// Independent runs, one per seed, in parallel. Output order follows `seeds`.
    pub fn run_many(
        &self,
        pop0: &Population,
        steps: u64,
        every: u64,
        seeds: &[u64],
    ) -> Result<Vec<Vec<Snapshot>>> {
        seeds
            .par_iter()
            .map(|&seed| self.run(pop0, steps, every, seed))
            .collect()
    }
}

/// Functional form of a single step: returns the next population.
pub fn step<R: Rng + ?Sized>(a: &PayoffMatrix, pop: &Population, rng: &mut R) -> Population {
    let mut next = pop.clone();
    ImitationProcess::new(a).step(&mut next, rng);
    next
}

/// Runs the process; see [`ImitationProcess::run`].
pub fn run(a: &PayoffMatrix, pop0: &Population, steps: u64, every: u64, seed: u64) -> Result<Vec<Snapshot>> {
    ImitationProcess::new(a).run(pop0, steps, every, seed)
}

/// Component-wise mean of several runs with identical snapshot steps.
pub fn mean_snapshots(runs: &[Vec<Snapshot>]) -> Vec<Snapshot> {
    let Some(first) = runs.first() else {
        return Vec::new();
    };
    let k = runs.len() as f64;
    first
        .iter()
        .enumerate()
        .map(|(t, snap)| {
            let mut x = vec![0.0; snap.x.len()];
            for run in runs {
                for (m, v) in x.iter_mut().zip(&run[t].x) {
                    *m += v / k;
                }
            }
            Snapshot { step: snap.step, x }
        })
        .collect()
}
