//! Exact stationary analysis by recursion over active-queue subsets.
//!
//! Under balanced fairness the active-set probabilities and conditional
//! mean counts satisfy closed recursions touching only strict subsets,
//! so one pass in increasing-cardinality order solves the system. The
//! cost is `O(n^2 2^n)`: exact, but exponential in the queue count.

use crate::error::{Error, Result};
use crate::rank::Rank;
use crate::subset::{subsets_by_cardinality, Subset};
use rayon::prelude::*;

/// Hard cap on the queue count for the subset recursion.
pub const SOLVE_EXACT_LIMIT: usize = 20;

/// Unnormalized recursion values beyond this abort the solve.
const UNNORMALIZED_CAP: f64 = 1e280;

/// Loads with a stability margin below `B * rank(full)` are rejected to
/// keep the recursion denominators away from catastrophic cancellation.
const BOUNDARY_MARGIN: f64 = 1e-9;

/// Per-queue offered load: arrival rate, mean job size, and the derived
/// traffic intensity `rho_i = lambda_i * sigma_i`.
#[derive(Clone, Debug)]
pub struct Workload {
    lambda: Vec<f64>,
    sigma: Vec<f64>,
}

impl Workload {
    pub fn new(lambda: Vec<f64>, sigma: Vec<f64>) -> Result<Workload> {
        if lambda.is_empty() || lambda.len() != sigma.len() {
            return Err(Error::invalid(
                "workload",
                format!(
                    "need matching non-empty rate/size vectors, got {} and {}",
                    lambda.len(),
                    sigma.len()
                ),
            ));
        }
        for (i, (&l, &s)) in lambda.iter().zip(&sigma).enumerate() {
            if !(l > 0.0 && l.is_finite() && s > 0.0 && s.is_finite()) {
                return Err(Error::invalid(
                    "workload",
                    format!("queue {}: arrival rate {l} and mean size {s} must be positive", i + 1),
                ));
            }
        }
        Ok(Workload { lambda, sigma })
    }

    /// Unit mean sizes, so traffic intensities equal arrival rates.
    pub fn from_intensities(rho: Vec<f64>) -> Result<Workload> {
        let sigma = vec![1.0; rho.len()];
        Workload::new(rho, sigma)
    }

    pub fn queue_count(&self) -> usize {
        self.lambda.len()
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn rho(&self, i: usize) -> f64 {
        self.lambda[i] * self.sigma[i]
    }

    pub fn rho_vec(&self) -> Vec<f64> {
        (0..self.queue_count()).map(|i| self.rho(i)).collect()
    }

    pub fn rho_sum(&self, s: Subset) -> f64 {
        s.iter().map(|i| self.rho(i)).sum()
    }
}

/// Worst-case slack of the load against the capacity set.
#[derive(Clone, Copy, Debug)]
pub struct StabilityReport {
    /// `min over non-empty A of rank(A) - rho(A)`; positive iff stable.
    pub margin: f64,
    pub argmin: Subset,
}

impl StabilityReport {
    pub fn is_stable(&self) -> bool {
        self.margin > 0.0
    }
}

/// Scan all non-empty subsets for the tightest capacity constraint.
pub fn stability_margin(r: &dyn Rank, w: &Workload) -> StabilityReport {
    let n = r.queue_count();
    assert_eq!(n, w.queue_count(), "rank and workload disagree on queue count");
    let mut margin = f64::INFINITY;
    let mut argmin = Subset::EMPTY;
    for mask in 1..1u64 << n {
        let a = Subset(mask);
        let slack = r.rank(a) - w.rho_sum(a);
        // ties resolve to the larger constraint set
        if slack <= margin {
            margin = slack;
            argmin = a;
        }
    }
    StabilityReport { margin, argmin }
}

/// Stationary solution aggregated by active-queue subset.
#[derive(Clone, Debug)]
pub struct SetSolution {
    n: usize,
    pi: Vec<f64>,
    /// `pl[i][mask]` holds the product `pi(A) L_i(A)`.
    pl: Vec<Vec<f64>>,
    mean_counts: Vec<f64>,
}

impl SetSolution {
    pub fn queue_count(&self) -> usize {
        self.n
    }

    /// Probability that the set of active queues is exactly `a`.
    pub fn pi(&self, a: Subset) -> f64 {
        self.pi[a.0 as usize]
    }

    pub fn set_probabilities(&self) -> &[f64] {
        &self.pi
    }

    pub fn empty_probability(&self) -> f64 {
        self.pi[0]
    }

    /// `pi(A) L_i(A)`, the recursion's natural variable.
    pub fn pi_l(&self, i: usize, a: Subset) -> f64 {
        self.pl[i][a.0 as usize]
    }

    /// Mean queue length given the active set, `L_i(A)`; zero off-support.
    pub fn conditional_mean_count(&self, i: usize, a: Subset) -> f64 {
        if !a.contains(i) {
            return 0.0;
        }
        let p = self.pi[a.0 as usize];
        if p == 0.0 {
            0.0
        } else {
            self.pl[i][a.0 as usize] / p
        }
    }

    /// Mean number of jobs at queue `i`.
    pub fn mean_count(&self, i: usize) -> f64 {
        self.mean_counts[i]
    }

    pub fn mean_counts(&self) -> &[f64] {
        &self.mean_counts
    }

    /// Probability that queue `i` is active.
    pub fn active_probability(&self, i: usize) -> f64 {
        (0..1u64 << self.n)
            .filter(|mask| mask >> i & 1 == 1)
            .map(|mask| self.pi[mask as usize])
            .sum()
    }
}

/// Check stability and reject near-boundary loads.
fn require_stable(r: &dyn Rank, w: &Workload) -> Result<()> {
    let report = stability_margin(r, w);
    let cutoff = BOUNDARY_MARGIN * r.rank(r.full_set()).abs();
    if report.margin <= cutoff {
        return Err(Error::Unstable {
            subset: report.argmin,
            excess: -report.margin,
        });
    }
    Ok(())
}

/// Solve the subset recursions for the stationary set probabilities and
/// per-queue conditional mean counts.
pub fn solve_exact(r: &dyn Rank, w: &Workload) -> Result<SetSolution> {
    let n = r.queue_count();
    if n != w.queue_count() {
        return Err(Error::invalid(
            "workload",
            format!("{} queues in workload, {} in rank", w.queue_count(), n),
        ));
    }
    if n > SOLVE_EXACT_LIMIT {
        return Err(Error::TooLarge {
            operation: "solve_exact",
            limit: SOLVE_EXACT_LIMIT,
            actual: n,
        });
    }
    require_stable(r, w)?;

    let cells = 1usize << n;
    let rho: Vec<f64> = w.rho_vec();

    // denominators rank(A) - rho(A), shared by both recursions
    let mut den = vec![0.0f64; cells];
    for mask in 1..cells {
        let a = Subset(mask as u64);
        den[mask] = r.rank(a) - w.rho_sum(a);
    }

    // unnormalized pi, relative to pi(empty) = 1
    let mut pi = vec![0.0f64; cells];
    pi[0] = 1.0;
    for a in subsets_by_cardinality(n).skip(1) {
        let mask = a.0 as usize;
        let mut numer = 0.0;
        for i in a.iter() {
            numer += rho[i] * pi[a.remove(i).0 as usize];
        }
        let v = numer / den[mask];
        if !(v <= UNNORMALIZED_CAP) {
            return Err(Error::Range {
                operation: "solve_exact",
                detail: format!("unnormalized probability {v:.3e} at {a}"),
            });
        }
        pi[mask] = v;
    }

    // per-queue passes are independent given pi
    let pl: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut pli = vec![0.0f64; cells];
            for a in subsets_by_cardinality(n).skip(1) {
                if !a.contains(i) {
                    continue;
                }
                let mask = a.0 as usize;
                let without_i = a.remove(i).0 as usize;
                let mut numer = rho[i] * (pi[without_i] + pi[mask]);
                for j in a.iter() {
                    if j != i {
                        numer += rho[j] * pli[a.remove(j).0 as usize];
                    }
                }
                pli[mask] = numer / den[mask];
            }
            pli
        })
        .collect();

    let norm: f64 = pi.iter().sum();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::Range {
            operation: "solve_exact",
            detail: format!("normalization constant {norm}"),
        });
    }
    let pi: Vec<f64> = pi.iter().map(|v| v / norm).collect();
    let pl: Vec<Vec<f64>> = pl
        .into_iter()
        .map(|pli| pli.into_iter().map(|v| v / norm).collect())
        .collect();
    let mean_counts: Vec<f64> = pl.iter().map(|pli| pli.iter().sum()).collect();

    Ok(SetSolution {
        n,
        pi,
        pl,
        mean_counts,
    })
}

/// Per-queue performance metrics derived from a [`SetSolution`].
#[derive(Clone, Copy, Debug)]
pub struct QueueMetrics {
    pub mean_count: f64,
    /// Mean sojourn time, by Little's law.
    pub delay: f64,
    pub active_probability: f64,
    /// Mean service rate perceived by a job of this queue.
    pub throughput: f64,
}

pub fn metrics(s: &SetSolution, w: &Workload) -> Result<Vec<QueueMetrics>> {
    let n = s.queue_count();
    if n != w.queue_count() {
        return Err(Error::invalid("workload", "queue count mismatch with solution"));
    }
    (0..n)
        .map(|i| {
            let active = s.active_probability(i);
            if active <= 0.0 {
                return Err(Error::Inconsistent(format!(
                    "queue {} has positive load but zero active probability",
                    i + 1
                )));
            }
            Ok(QueueMetrics {
                mean_count: s.mean_count(i),
                delay: s.mean_count(i) / w.lambda()[i],
                active_probability: active,
                throughput: w.rho(i) / active,
            })
        })
        .collect()
}
