//! Certified stochastic bounds for nearly poly-symmetric systems.
//!
//! A capacity set squeezed between `(1-eps)C` and `(1+eps)C` has its
//! stationary law bracketed by the two scaled reference systems, up to
//! the ratio of their empty-state probabilities. The reference systems
//! are cheap to solve whenever `C` is poly-symmetric, which turns the
//! polynomial grid solver into a bound generator for systems that are
//! only approximately regular.

use crate::error::{Error, Result};
use crate::exact::{solve_exact, Workload};
use crate::polysym::{solve_polysym, GridWorkload};
use crate::rank::{CardinalityRank, Rank, Scaled, TableRank};
use crate::subset::Subset;
use rand::Rng;
use rayon::prelude::*;

/// Which metric a [`SandwichResult`] brackets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundedMetric {
    /// Mean job counts per queue (subset solver) or per part (grid solver).
    MeanCount,
    /// Mean user throughput per part.
    Throughput,
}

/// Two-sided bounds with the empty-state probabilities of the scaled
/// reference systems that produced them.
#[derive(Clone, Debug)]
pub struct SandwichResult {
    pub epsilon: f64,
    pub metric: BoundedMetric,
    pub log_pi0_minus: f64,
    pub log_pi0_plus: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SandwichResult {
    pub fn pi0_minus(&self) -> f64 {
        self.log_pi0_minus.exp()
    }

    pub fn pi0_plus(&self) -> f64 {
        self.log_pi0_plus.exp()
    }

    /// `pi_-(0) / pi_+(0)`, computed in the log domain; at most one.
    pub fn ratio_minus_over_plus(&self) -> f64 {
        (self.log_pi0_minus - self.log_pi0_plus).exp()
    }
}

fn check_epsilon(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::invalid(
            "perturbation",
            format!("epsilon {eps} must lie in [0, 1)"),
        ));
    }
    Ok(())
}

/// Bracket the per-queue mean counts of any capacity set squeezed between
/// `(1-eps)` and `(1+eps)` times the reference rank.
///
/// The workload must be stable for the shrunk reference; the instability
/// error of that solve is surfaced as-is.
pub fn sandwich_mean_counts(
    reference: &dyn Rank,
    eps: f64,
    w: &Workload,
) -> Result<SandwichResult> {
    check_epsilon(eps)?;
    let minus = solve_exact(&Scaled::new(reference, 1.0 - eps), w)?;
    let plus = solve_exact(&Scaled::new(reference, 1.0 + eps), w)?;
    let log_pi0_minus = minus.empty_probability().ln();
    let log_pi0_plus = plus.empty_probability().ln();
    let shrink = (log_pi0_minus - log_pi0_plus).exp();
    let grow = (log_pi0_plus - log_pi0_minus).exp();
    let n = reference.queue_count();
    Ok(SandwichResult {
        epsilon: eps,
        metric: BoundedMetric::MeanCount,
        log_pi0_minus,
        log_pi0_plus,
        lower: (0..n).map(|i| shrink * plus.mean_count(i)).collect(),
        upper: (0..n).map(|i| grow * minus.mean_count(i)).collect(),
    })
}

/// Grid version of [`sandwich_mean_counts`]: per-part mean counts for a
/// poly-symmetric reference.
pub fn sandwich_mean_counts_grid(
    reference: &CardinalityRank,
    eps: f64,
    w: &GridWorkload,
) -> Result<SandwichResult> {
    check_epsilon(eps)?;
    let minus = solve_polysym(&reference.scaled(1.0 - eps), w)?;
    let plus = solve_polysym(&reference.scaled(1.0 + eps), w)?;
    let log_pi0_minus = minus.log_empty_probability();
    let log_pi0_plus = plus.log_empty_probability();
    let shrink = (log_pi0_minus - log_pi0_plus).exp();
    let grow = (log_pi0_plus - log_pi0_minus).exp();
    let k = reference.part_count();
    Ok(SandwichResult {
        epsilon: eps,
        metric: BoundedMetric::MeanCount,
        log_pi0_minus,
        log_pi0_plus,
        lower: (0..k).map(|p| shrink * plus.mean_count(p)).collect(),
        upper: (0..k).map(|p| grow * minus.mean_count(p)).collect(),
    })
}

/// Per-part throughput bounds for an access network whose true line rates
/// sit within `(1 +/- eps)` of the nominal rates (and likewise the shared
/// link).
pub fn tree_access_bounds(
    rates: &[f64],
    shared: f64,
    eps: f64,
    w: &GridWorkload,
) -> Result<SandwichResult> {
    check_epsilon(eps)?;
    let sizes = w.sizes();
    if rates.len() != sizes.len() {
        return Err(Error::invalid("access tree", "one nominal rate per part required"));
    }
    for (k, (&r, &rho)) in rates.iter().zip(w.rho()).enumerate() {
        if !(rho < (1.0 - eps) * r) {
            return Err(Error::invalid(
                "access tree",
                format!(
                    "part {}: intensity {rho} must stay below (1 - eps) * rate = {}",
                    k + 1,
                    (1.0 - eps) * r
                ),
            ));
        }
    }
    let aggregate: f64 = sizes
        .iter()
        .zip(w.rho())
        .map(|(&nk, &rho)| nk as f64 * rho)
        .sum();
    if !(aggregate < (1.0 - eps) * shared) {
        return Err(Error::invalid(
            "access tree",
            format!(
                "aggregate intensity {aggregate} must stay below (1 - eps) * shared = {}",
                (1.0 - eps) * shared
            ),
        ));
    }

    let h = crate::polysym::access_tree_rank(rates, shared, sizes)?;
    let minus = solve_polysym(&h.scaled(1.0 - eps), w)?;
    let plus = solve_polysym(&h.scaled(1.0 + eps), w)?;
    let gamma_minus = crate::polysym::access_tree_throughput(&minus, w)?;
    let gamma_plus = crate::polysym::access_tree_throughput(&plus, w)?;
    let log_pi0_minus = minus.log_empty_probability();
    let log_pi0_plus = plus.log_empty_probability();
    let shrink = (log_pi0_minus - log_pi0_plus).exp();
    let grow = (log_pi0_plus - log_pi0_minus).exp();
    Ok(SandwichResult {
        epsilon: eps,
        metric: BoundedMetric::Throughput,
        log_pi0_minus,
        log_pi0_plus,
        lower: gamma_minus.iter().map(|g| shrink * g).collect(),
        upper: gamma_plus.iter().map(|g| grow * g).collect(),
    })
}

/// One load point of the randomized-cluster delay curve.
#[derive(Clone, Debug)]
pub struct AlphaPoint {
    /// Load level, as a fraction of the mean-capacity boundary.
    pub alpha: f64,
    /// Per-part mean-delay bounds.
    pub delay_lower: Vec<f64>,
    pub delay_upper: Vec<f64>,
    pub log_pi0_minus: f64,
    pub log_pi0_plus: f64,
}

impl AlphaPoint {
    /// Mean service rate per job: the inverse of the delay bounds.
    pub fn rate_lower(&self, k: usize) -> f64 {
        1.0 / self.delay_upper[k]
    }

    pub fn rate_upper(&self, k: usize) -> f64 {
        1.0 / self.delay_lower[k]
    }
}

/// Delay and service-rate bound curves for the randomized two-part cluster.
#[derive(Clone, Debug)]
pub struct RandomClusterBounds {
    pub m: usize,
    pub n: usize,
    pub degrees: (usize, usize),
    pub epsilon: f64,
    /// Boundary-normalized per-part intensities, proportional to degrees.
    pub rho: [f64; 2],
    pub points: Vec<AlphaPoint>,
}

/// Mean rank of the random assignment with unit servers, on the
/// `(n, n)` profile grid.
pub fn random_cluster_mean_rank(m: usize, n: usize, d1: usize, d2: usize) -> Result<CardinalityRank> {
    if d1 == 0 || d2 == 0 || d1 > m || d2 > m {
        return Err(Error::invalid(
            "random cluster",
            format!("degrees ({d1}, {d2}) must lie in 1..={m}"),
        ));
    }
    let q1 = 1.0 - d1 as f64 / m as f64;
    let q2 = 1.0 - d2 as f64 / m as f64;
    let pow1: Vec<f64> = (0..=n).map(|a| q1.powi(a as i32)).collect();
    let pow2: Vec<f64> = (0..=n).map(|a| q2.powi(a as i32)).collect();
    let mut values = Vec::with_capacity((n + 1) * (n + 1));
    for a1 in 0..=n {
        for a2 in 0..=n {
            values.push(m as f64 * (1.0 - pow1[a1] * pow2[a2]));
        }
    }
    CardinalityRank::new(vec![n, n], values)
}

/// Boundary-normalized intensities of the randomized-cluster example:
/// proportional to the degrees, saturating the mean capacity at `(n, n)`.
pub fn random_cluster_rho(h: &CardinalityRank, n: usize, d1: usize, d2: usize) -> [f64; 2] {
    let hnn = h.value(&[n, n]);
    let total = (d1 + d2) as f64;
    [
        d1 as f64 / total * hnn / n as f64,
        d2 as f64 / total * hnn / n as f64,
    ]
}

/// Default load grid: 50 points evenly spaced across `[0.02, 1 - eps - 0.02]`,
/// keeping clear of both the idle and the boundary ends.
pub fn default_alpha_grid(eps: f64) -> Vec<f64> {
    let lo = 0.02;
    let hi = 1.0 - eps - 0.02;
    (0..50)
        .map(|j| lo + (hi - lo) * j as f64 / 49.0)
        .collect()
}

/// Delay-bound curves for the randomized cluster, one point per `alpha`.
///
/// For each load `alpha rho` the two reference systems
/// `(1 +/- eps) C / alpha` are solved on the grid and combined into the
/// composite delay bounds
/// `(1 +/- eps)/alpha * (pi_-+(0)/pi_+-(0)) * L_{k,+-} / (n rho_k)`.
pub fn random_cluster_bounds(
    m: usize,
    n: usize,
    d1: usize,
    d2: usize,
    eps: f64,
    alphas: &[f64],
) -> Result<RandomClusterBounds> {
    check_epsilon(eps)?;
    if eps == 0.0 {
        return Err(Error::invalid("random cluster", "bounds need epsilon > 0"));
    }
    let h = random_cluster_mean_rank(m, n, d1, d2)?;
    let rho = random_cluster_rho(&h, n, d1, d2);
    for &alpha in alphas {
        if !(alpha > 0.0 && alpha < 1.0 - eps) {
            return Err(Error::invalid(
                "random cluster",
                format!("alpha {alpha} outside (0, {})", 1.0 - eps),
            ));
        }
    }
    let w = GridWorkload::from_intensities(vec![n, n], rho.to_vec())?;

    let points: Vec<AlphaPoint> = alphas
        .par_iter()
        .map(|&alpha| -> Result<AlphaPoint> {
            let minus = solve_polysym(&h.scaled((1.0 - eps) / alpha), &w)?;
            let plus = solve_polysym(&h.scaled((1.0 + eps) / alpha), &w)?;
            let log_pi0_minus = minus.log_empty_probability();
            let log_pi0_plus = plus.log_empty_probability();
            let shrink = (log_pi0_minus - log_pi0_plus).exp();
            let grow = (log_pi0_plus - log_pi0_minus).exp();
            let mut delay_lower = Vec::with_capacity(2);
            let mut delay_upper = Vec::with_capacity(2);
            for k in 0..2 {
                let denom = n as f64 * rho[k];
                delay_lower.push((1.0 + eps) / alpha * shrink * plus.mean_count(k) / denom);
                delay_upper.push((1.0 - eps) / alpha * grow * minus.mean_count(k) / denom);
            }
            Ok(AlphaPoint {
                alpha,
                delay_lower,
                delay_upper,
                log_pi0_minus,
                log_pi0_plus,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(RandomClusterBounds {
        m,
        n,
        degrees: (d1, d2),
        epsilon: eps,
        rho,
        points,
    })
}

/// Outcome of sampling a random polymatroid inside the `(1 +/- eps)` band.
#[derive(Clone, Debug)]
pub struct BandSample {
    pub rank: TableRank,
    /// Draws discarded before this one was accepted.
    pub rejected: usize,
}

const BAND_CORRECTION_PASSES: usize = 200;

/// Draw a random polymatroid whose rank sits within
/// `[(1-eps) mu(A), (1+eps) mu(A)]` for every subset.
///
/// Per-subset values are drawn uniformly in the band, then lowered
/// iteratively until monotone and submodular; draws whose correction
/// exits the band are rejected and retried.
pub fn random_polymatroid_in_band(
    reference: &dyn Rank,
    eps: f64,
    rng: &mut impl Rng,
    max_attempts: usize,
) -> Result<BandSample> {
    check_epsilon(eps)?;
    let n = reference.queue_count();
    if n > 12 {
        return Err(Error::TooLarge {
            operation: "random_polymatroid_in_band",
            limit: 12,
            actual: n,
        });
    }
    let cells = 1usize << n;
    let mu: Vec<f64> = (0..cells).map(|m| reference.rank(Subset(m as u64))).collect();

    'attempt: for rejected in 0..max_attempts {
        let mut v: Vec<f64> = mu
            .iter()
            .map(|&m| rng.gen_range((1.0 - eps) * m..=(1.0 + eps) * m + f64::MIN_POSITIVE))
            .collect();
        v[0] = 0.0;

        let mut settled = false;
        for _ in 0..BAND_CORRECTION_PASSES {
            let mut changed = false;
            // monotonicity: cap by the cheapest superset, top-down
            for mask in (0..cells).rev() {
                let a = Subset(mask as u64);
                for i in 0..n {
                    if !a.contains(i) {
                        let up = v[a.insert(i).0 as usize];
                        if v[mask] > up {
                            v[mask] = up;
                            changed = true;
                        }
                    }
                }
            }
            // submodularity: cap the pair join, bottom-up
            for mask in 0..cells {
                let a = Subset(mask as u64);
                for i in 0..n {
                    if a.contains(i) {
                        continue;
                    }
                    for j in i + 1..n {
                        if a.contains(j) {
                            continue;
                        }
                        let cap = v[a.insert(i).0 as usize] + v[a.insert(j).0 as usize] - v[mask];
                        let join = a.insert(i).insert(j).0 as usize;
                        if v[join] > cap + 1e-15 {
                            v[join] = cap;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                settled = true;
                break;
            }
        }
        if !settled {
            continue 'attempt;
        }
        // corrections only lower values, so only the floor can be lost
        for mask in 1..cells {
            if v[mask] < (1.0 - eps) * mu[mask] - 1e-12 {
                continue 'attempt;
            }
        }
        let rank = TableRank::new(n, v)?;
        return Ok(BandSample { rank, rejected });
    }
    Err(Error::Inconsistent(format!(
        "no in-band polymatroid found in {max_attempts} attempts (eps = {eps})"
    )))
}
