//! Independent verification backends.
//!
//! Everything here recomputes stationary behavior from first principles —
//! the balance-function recursion on raw states, a truncated state-space
//! normalization, and a discrete-event simulation — deliberately avoiding
//! the subset and grid recursions of [`crate::exact`] and
//! [`crate::polysym`] so the two paths can check each other.

use crate::error::{Error, Result};
use crate::exact::Workload;
use crate::numeric::log_add_exp;
use crate::rank::Rank;
use crate::subset::Subset;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// Truncated state-space solves are exponential in the queue count.
pub const TRUNCATED_LIMIT: usize = 4;

/// Memoized balance-function evaluation in the log domain.
///
/// `Phi(0) = 1` and `Phi(x) = sum over active i of Phi(x - e_i) / rank(I(x))`;
/// linear storage would overflow once `|x|` reaches a few hundred, hence
/// the log domain.
pub struct BalanceCache<'r> {
    rank: &'r dyn Rank,
    memo: HashMap<Vec<u32>, f64>,
    /// rank of each active set, fetched once
    set_rank: Vec<f64>,
}

impl<'r> BalanceCache<'r> {
    pub fn new(rank: &'r dyn Rank) -> BalanceCache<'r> {
        let n = rank.queue_count();
        let set_rank = (0..1u64 << n).map(|m| rank.rank(Subset(m))).collect();
        BalanceCache {
            rank,
            memo: HashMap::new(),
            set_rank,
        }
    }

    pub fn queue_count(&self) -> usize {
        self.rank.queue_count()
    }

    fn active_set(x: &[u32]) -> Subset {
        x.iter()
            .enumerate()
            .filter(|(_, &v)| v > 0)
            .fold(Subset::EMPTY, |s, (i, _)| s.insert(i))
    }

    /// `log Phi(x)`.
    pub fn log_balance(&mut self, x: &[u32]) -> Result<f64> {
        assert_eq!(x.len(), self.rank.queue_count());
        let active = Self::active_set(x);
        if active.is_empty() {
            return Ok(0.0);
        }
        if let Some(&v) = self.memo.get(x) {
            return Ok(v);
        }
        let mu = self.set_rank[active.0 as usize];
        if !(mu > 0.0) {
            return Err(Error::invalid(
                "balance function",
                format!("rank of active set {active} is {mu}, not positive"),
            ));
        }
        let mut acc = f64::NEG_INFINITY;
        let mut y = x.to_vec();
        for i in active.iter() {
            y[i] -= 1;
            let lower = self.log_balance(&y)?;
            y[i] += 1;
            acc = log_add_exp(acc, lower);
        }
        let v = acc - mu.ln();
        self.memo.insert(x.to_vec(), v);
        Ok(v)
    }

    /// Balanced-fair service rates `phi_i(x) = Phi(x - e_i) / Phi(x)`.
    pub fn service_rates(&mut self, x: &[u32]) -> Result<Vec<f64>> {
        let n = self.rank.queue_count();
        let here = self.log_balance(x)?;
        let mut rates = vec![0.0; n];
        let mut y = x.to_vec();
        for i in 0..n {
            if x[i] == 0 {
                continue;
            }
            y[i] -= 1;
            let lower = self.log_balance(&y)?;
            y[i] += 1;
            rates[i] = (lower - here).exp();
        }
        Ok(rates)
    }
}

/// Combinatorial indexing of the states with a given total count:
/// ranks `x` with `|x| = t` lexicographically in `O(n)`.
struct ShellIndex {
    n: usize,
    /// `binom[a][b] = C(a, b)` for `b <= n`
    binom: Vec<Vec<u64>>,
}

impl ShellIndex {
    fn new(n: usize, max_total: u32) -> ShellIndex {
        let rows = max_total as usize + n + 1;
        let mut binom = vec![vec![0u64; n + 1]; rows];
        for (a, row) in binom.iter_mut().enumerate() {
            row[0] = 1;
            for b in 1..=n.min(a) {
                row[b] = choose_rec(a, b);
            }
        }
        fn choose_rec(a: usize, b: usize) -> u64 {
            // Pascal would need the previous row; recompute multiplicatively
            let mut v = 1u64;
            for i in 0..b {
                v = v * (a - i) as u64 / (i + 1) as u64;
            }
            v
        }
        ShellIndex { n, binom }
    }

    /// Number of states with total `t` over `k` queues: `C(t + k - 1, k - 1)`.
    fn shell_size(&self, k: usize, t: u32) -> u64 {
        self.binom[t as usize + k - 1][k - 1]
    }

    fn rank(&self, x: &[u32]) -> usize {
        let mut t: u32 = x.iter().sum();
        let mut pos = 0u64;
        for (c, &xi) in x.iter().enumerate() {
            let k = self.n - c; // queues left including this one
            if k == 1 {
                break;
            }
            // states whose coordinate here is below xi:
            // sum_{v < xi} shell_size(k-1, t - v) = C(t+k-1, k-1) - C(t-xi+k-1, k-1)
            pos += self.binom[t as usize + k - 1][k - 1]
                - self.binom[(t - xi) as usize + k - 1][k - 1];
            t -= xi;
        }
        pos as usize
    }
}

/// Normalized truncated stationary distribution with subset aggregates.
pub struct TruncatedSolution {
    n: usize,
    level: u32,
    index: ShellIndex,
    /// per shell, log of the unnormalized stationary measure
    shells: Vec<Vec<f64>>,
    log_norm: f64,
    set_probabilities: Vec<f64>,
    pl: Vec<Vec<f64>>,
    mean_counts: Vec<f64>,
    tail_mass: f64,
}

impl TruncatedSolution {
    pub fn queue_count(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Mass of the outermost retained shell; the truncation-error proxy.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn log_pi(&self, x: &[u32]) -> Option<f64> {
        let t: u32 = x.iter().sum();
        if t > self.level {
            return None;
        }
        Some(self.shells[t as usize][self.index.rank(x)] - self.log_norm)
    }

    pub fn pi_state(&self, x: &[u32]) -> Option<f64> {
        self.log_pi(x).map(f64::exp)
    }

    /// Probability that the active set is exactly `a`.
    pub fn pi(&self, a: Subset) -> f64 {
        self.set_probabilities[a.0 as usize]
    }

    pub fn set_probabilities(&self) -> &[f64] {
        &self.set_probabilities
    }

    /// `pi(A) L_i(A)` aggregate.
    pub fn pi_l(&self, i: usize, a: Subset) -> f64 {
        self.pl[i][a.0 as usize]
    }

    pub fn mean_count(&self, i: usize) -> f64 {
        self.mean_counts[i]
    }

    pub fn mean_counts(&self) -> &[f64] {
        &self.mean_counts
    }
}

/// Normalize `pi(x) ∝ Phi(x) rho^x` over all states with `|x| <= level`.
///
/// Fails if the outermost shell still carries more than `1e-8` of the
/// retained mass, which signals that the truncation level is too low.
pub fn stationary_truncated(
    r: &dyn Rank,
    w: &Workload,
    level: u32,
) -> Result<TruncatedSolution> {
    let n = r.queue_count();
    if n != w.queue_count() {
        return Err(Error::invalid("workload", "queue count mismatch with rank"));
    }
    if n > TRUNCATED_LIMIT {
        return Err(Error::TooLarge {
            operation: "stationary_truncated",
            limit: TRUNCATED_LIMIT,
            actual: n,
        });
    }
    if level == 0 {
        return Err(Error::invalid("truncation", "level must be at least 1"));
    }

    let set_rank: Vec<f64> = (0..1u64 << n).map(|m| r.rank(Subset(m))).collect();
    for mask in 1..1u64 << n {
        if !(set_rank[mask as usize] > 0.0) {
            return Err(Error::invalid(
                "balance function",
                format!("rank of active set {} is not positive", Subset(mask)),
            ));
        }
    }
    let log_rho: Vec<f64> = (0..n).map(|i| w.rho(i).ln()).collect();

    let index = ShellIndex::new(n, level);
    // log Phi per shell, then reused to hold log pi_u
    let mut phi_shells: Vec<Vec<f64>> = Vec::with_capacity(level as usize + 1);
    phi_shells.push(vec![0.0]);
    let mut x = vec![0u32; n];
    for t in 1..=level {
        let mut shell = vec![f64::NEG_INFINITY; index.shell_size(n, t) as usize];
        enumerate_shell(n, t, &mut x, &mut |x| {
            let mut active = Subset::EMPTY;
            let mut acc = f64::NEG_INFINITY;
            for i in 0..n {
                if x[i] > 0 {
                    active = active.insert(i);
                    x[i] -= 1;
                    let below = phi_shells[t as usize - 1][index.rank(x)];
                    x[i] += 1;
                    acc = log_add_exp(acc, below);
                }
            }
            shell[index.rank(x)] = acc - set_rank[active.0 as usize].ln();
        });
        phi_shells.push(shell);
    }

    // log pi_u(x) = log Phi(x) + sum x_i log rho_i, tracking the maximum
    let mut max_log = f64::NEG_INFINITY;
    for t in 0..=level {
        let shell = &mut phi_shells[t as usize];
        enumerate_shell(n, t, &mut x, &mut |x| {
            let pos = index.rank(x);
            let weight: f64 = x
                .iter()
                .zip(&log_rho)
                .map(|(&xi, &lr)| xi as f64 * lr)
                .sum();
            shell[pos] += weight;
            if shell[pos] > max_log {
                max_log = shell[pos];
            }
        });
    }

    let mut z = 0.0f64;
    let mut shell_mass = vec![0.0f64; level as usize + 1];
    let mut set_probabilities = vec![0.0f64; 1 << n];
    let mut pl = vec![vec![0.0f64; 1 << n]; n];
    for t in 0..=level {
        let shell = &phi_shells[t as usize];
        enumerate_shell(n, t, &mut x, &mut |x| {
            let v = (shell[index.rank(x)] - max_log).exp();
            z += v;
            shell_mass[t as usize] += v;
            let active = BalanceCache::active_set(x);
            set_probabilities[active.0 as usize] += v;
            for i in 0..n {
                if x[i] > 0 {
                    pl[i][active.0 as usize] += v * x[i] as f64;
                }
            }
        });
    }

    let tail_mass = shell_mass[level as usize] / z;
    if tail_mass >= 1e-8 {
        return Err(Error::Range {
            operation: "stationary_truncated",
            detail: format!(
                "shell mass {tail_mass:.3e} at level {level} exceeds 1e-8; increase the truncation level"
            ),
        });
    }

    for p in &mut set_probabilities {
        *p /= z;
    }
    for pli in &mut pl {
        for v in pli.iter_mut() {
            *v /= z;
        }
    }
    let mean_counts: Vec<f64> = pl.iter().map(|pli| pli.iter().sum()).collect();

    Ok(TruncatedSolution {
        n,
        level,
        index,
        shells: phi_shells,
        log_norm: max_log + z.ln(),
        set_probabilities,
        pl,
        mean_counts,
        tail_mass,
    })
}

/// Visit every state with total count `t` in lexicographic order.
fn enumerate_shell(n: usize, t: u32, x: &mut Vec<u32>, f: &mut impl FnMut(&mut Vec<u32>)) {
    fn rec(x: &mut Vec<u32>, pos: usize, left: u32, f: &mut impl FnMut(&mut Vec<u32>)) {
        if pos + 1 == x.len() {
            x[pos] = left;
            f(x);
            x[pos] = 0;
            return;
        }
        for v in 0..=left {
            x[pos] = v;
            rec(x, pos + 1, left - v, f);
        }
        x[pos] = 0;
    }
    debug_assert_eq!(x.len(), n);
    rec(x, 0, t, f);
}

/// Job-size distribution for the simulator; the mean is matched to the
/// workload's `sigma` in either case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SizeDistribution {
    Exponential,
    /// Two-phase hyperexponential with balanced means and the given
    /// squared coefficient of variation (> 1).
    Hyperexponential2 { cv2: f64 },
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub horizon_events: u64,
    /// Fraction of the horizon discarded before measuring.
    pub warmup_fraction: f64,
    pub batches: usize,
    pub seed: u64,
    pub sizes: SizeDistribution,
    /// Per-queue job-count cap; crossing it flags divergence and stops.
    pub count_cap: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            horizon_events: 1_000_000,
            warmup_fraction: 0.2,
            batches: 20,
            seed: 1,
            sizes: SizeDistribution::Exponential,
            count_cap: 1_000,
        }
    }
}

/// Time-average estimates with batch-means standard errors.
#[derive(Clone, Debug)]
pub struct SimEstimate {
    pub mean_counts: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub events: u64,
    pub sim_time: f64,
    pub diverged: bool,
}

/// Event-driven simulation of the balanced-fairness system.
///
/// Per-queue processor sharing is egalitarian: in state `x` each job of
/// queue `i` is served at rate `phi_i(x) / x_i`. With exponential (or
/// per-phase exponential) sizes, the next event is a race of exponential
/// clocks, so no time discretization is needed.
pub fn simulate(r: &dyn Rank, w: &Workload, cfg: &SimConfig) -> Result<SimEstimate> {
    let n = r.queue_count();
    if n != w.queue_count() {
        return Err(Error::invalid("workload", "queue count mismatch with rank"));
    }
    if cfg.batches < 2 || cfg.horizon_events < 100 {
        return Err(Error::invalid(
            "simulation",
            "need at least 2 batches and 100 events",
        ));
    }

    // phase mixture per queue: (probability, mean size) pairs
    let phases: Vec<[(f64, f64); 2]> = (0..n)
        .map(|i| {
            let sigma = w.sigma()[i];
            match cfg.sizes {
                SizeDistribution::Exponential => [(1.0, sigma), (0.0, sigma)],
                SizeDistribution::Hyperexponential2 { cv2 } => {
                    assert!(cv2 > 1.0, "hyperexponential requires cv2 > 1");
                    let q = 0.5 * (1.0 + ((cv2 - 1.0) / (cv2 + 1.0)).sqrt());
                    [(q, sigma / (2.0 * q)), (1.0 - q, sigma / (2.0 * (1.0 - q)))]
                }
            }
        })
        .collect();

    let mut balance = BalanceCache::new(r);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut counts = vec![[0u32; 2]; n];
    let mut totals = vec![0u32; n];
    let mut time = 0.0f64;
    let mut diverged = false;

    let warmup_events = (cfg.horizon_events as f64 * cfg.warmup_fraction) as u64;
    let measured_events = cfg.horizon_events - warmup_events;
    let batch_len = (measured_events / cfg.batches as u64).max(1);

    let mut batch_area = vec![vec![0.0f64; n]; cfg.batches];
    let mut batch_time = vec![0.0f64; cfg.batches];
    let mut events = 0u64;

    let lambda = w.lambda();
    let total_arrival: f64 = lambda.iter().sum();

    while events < cfg.horizon_events {
        let rates = balance.service_rates(&totals)?;
        // per-(queue, phase) completion rates
        let mut total_rate = total_arrival;
        for i in 0..n {
            if totals[i] > 0 {
                let per_job = rates[i] / totals[i] as f64;
                for p in 0..2 {
                    total_rate += counts[i][p] as f64 * per_job / phases[i][p].1;
                }
            }
        }

        let dt = -rng.gen::<f64>().ln() / total_rate;
        if events >= warmup_events {
            let b = (((events - warmup_events) / batch_len) as usize).min(cfg.batches - 1);
            batch_time[b] += dt;
            for i in 0..n {
                batch_area[b][i] += totals[i] as f64 * dt;
            }
        }
        time += dt;

        let mut pick = rng.gen::<f64>() * total_rate;
        let mut handled = false;
        for i in 0..n {
            if pick < lambda[i] {
                let p = if rng.gen::<f64>() < phases[i][0].0 { 0 } else { 1 };
                counts[i][p] += 1;
                totals[i] += 1;
                handled = true;
                break;
            }
            pick -= lambda[i];
        }
        if !handled {
            'outer: for i in 0..n {
                if totals[i] == 0 {
                    continue;
                }
                let per_job = rates[i] / totals[i] as f64;
                for p in 0..2 {
                    let rate = counts[i][p] as f64 * per_job / phases[i][p].1;
                    if pick < rate {
                        counts[i][p] -= 1;
                        totals[i] -= 1;
                        handled = true;
                        break 'outer;
                    }
                    pick -= rate;
                }
            }
            if !handled {
                // numerical leftover lands on the last busy queue
                if let Some(i) = (0..n).rev().find(|&i| totals[i] > 0) {
                    let p = if counts[i][1] > 0 { 1 } else { 0 };
                    counts[i][p] -= 1;
                    totals[i] -= 1;
                }
            }
        }
        events += 1;

        if totals.iter().any(|&t| t > cfg.count_cap) {
            diverged = true;
            break;
        }
    }

    let mut mean_counts = vec![0.0f64; n];
    let mut std_errors = vec![0.0f64; n];
    let measured: f64 = batch_time.iter().sum();
    for i in 0..n {
        let total_area: f64 = batch_area.iter().map(|b| b[i]).sum();
        mean_counts[i] = if measured > 0.0 { total_area / measured } else { 0.0 };
        let means: Vec<f64> = batch_area
            .iter()
            .zip(&batch_time)
            .filter(|(_, &t)| t > 0.0)
            .map(|(b, &t)| b[i] / t)
            .collect();
        if means.len() >= 2 {
            let k = means.len() as f64;
            let avg = means.iter().sum::<f64>() / k;
            let var = means.iter().map(|m| (m - avg).powi(2)).sum::<f64>() / (k - 1.0);
            std_errors[i] = (var / k).sqrt();
        }
    }

    Ok(SimEstimate {
        mean_counts,
        std_errors,
        events,
        sim_time: time,
        diverged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rank::{ClusterAssignment, TableRank};
    use rand::rngs::StdRng;
    use rand::SeedableRng as _;

    fn fig1() -> impl Rank {
        ClusterAssignment::unit_servers(3, vec![vec![0, 1], vec![1, 2]])
            .unwrap()
            .rank()
            .unwrap()
    }

    #[test]
    fn balance_base_cases() {
        let r = TableRank::new(1, vec![0.0, 2.0]).unwrap();
        let mut cache = BalanceCache::new(&r);
        assert_eq!(cache.log_balance(&[0]).unwrap(), 0.0);
        for x in 1..6u32 {
            let expect = -(x as f64) * 2.0f64.ln();
            assert!((cache.log_balance(&[x]).unwrap() - expect).abs() < 1e-12);
        }
        assert!((cache.service_rates(&[3]).unwrap()[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn balance_two_queue_shared_server() {
        let r = fig1();
        let mut cache = BalanceCache::new(&r);
        // two-step hand recursion: Phi(1,1) = (Phi(0,1) + Phi(1,0)) / 3 = 1/3
        let v = cache.log_balance(&[1, 1]).unwrap().exp();
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
        let rates = cache.service_rates(&[1, 1]).unwrap();
        assert!((rates[0] - 1.5).abs() < 1e-12);
        assert!((rates[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn balance_recursion_residual_is_tiny() {
        let r = fig1();
        let mut cache = BalanceCache::new(&r);
        for x1 in 0..6u32 {
            for x2 in 0..6u32 {
                if x1 + x2 == 0 {
                    continue;
                }
                let x = [x1, x2];
                let phi = cache.log_balance(&x).unwrap().exp();
                let active = BalanceCache::active_set(&x);
                let mu = Rank::rank(&r, active);
                let mut sum = 0.0;
                let mut y = x;
                for i in active.iter() {
                    y[i] -= 1;
                    sum += cache.log_balance(&y).unwrap().exp();
                    y[i] += 1;
                }
                assert!(
                    ((phi * mu - sum) / sum).abs() < 1e-9,
                    "residual at {x:?}"
                );
            }
        }
    }

    #[test]
    fn rates_saturate_the_active_set_and_stay_feasible() {
        use rand::Rng as _;
        let mut rng = StdRng::seed_from_u64(0xfea5);
        for _ in 0..10 {
            let m = rng.gen_range(2..=4);
            let n = rng.gen_range(2..=3);
            let classes: Vec<Vec<u32>> = (0..n)
                .map(|_| {
                    let mut v: Vec<u32> =
                        (0..m as u32).filter(|_| rng.gen_bool(0.6)).collect();
                    if v.is_empty() {
                        v.push(0);
                    }
                    v
                })
                .collect();
            let r = ClusterAssignment::unit_servers(m, classes)
                .unwrap()
                .rank()
                .unwrap();
            let mut cache = BalanceCache::new(&r);
            for _ in 0..20 {
                let x: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=3)).collect();
                if x.iter().all(|&v| v == 0) {
                    continue;
                }
                let rates = cache.service_rates(&x).unwrap();
                let active = BalanceCache::active_set(&x);
                let total: f64 = rates.iter().sum();
                assert!(
                    ((total - Rank::rank(&r, active)) / total).abs() < 1e-9,
                    "Pareto saturation failed at {x:?}"
                );
                for mask in 1..1u64 << n {
                    let a = Subset(mask);
                    let partial: f64 = a.iter().map(|i| rates[i]).sum();
                    assert!(
                        partial <= Rank::rank(&r, a) * (1.0 + 1e-9),
                        "infeasible rates at {x:?} on {a}"
                    );
                }
            }
        }
    }

    #[test]
    fn truncated_single_queue_geometric() {
        let r = TableRank::new(1, vec![0.0, 2.0]).unwrap();
        let w = Workload::from_intensities(vec![1.0]).unwrap();
        let s = stationary_truncated(&r, &w, 60).unwrap();
        assert!((s.pi(Subset::EMPTY) - 0.5).abs() < 1e-9);
        assert!((s.mean_count(0) - 1.0).abs() < 1e-9);
        assert!(s.tail_mass() < 1e-8);
    }

    #[test]
    fn truncated_matches_shared_server_example() {
        let r = fig1();
        let w = Workload::from_intensities(vec![1.0, 1.0]).unwrap();
        let s = stationary_truncated(&r, &w, 80).unwrap();
        assert!((s.pi(Subset::EMPTY) - 0.2).abs() < 1e-6);
        assert!((s.mean_count(0) - 1.4).abs() / 1.4 < 1e-4);
    }

    #[test]
    fn truncation_too_low_is_an_error() {
        let r = fig1();
        let w = Workload::from_intensities(vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            stationary_truncated(&r, &w, 5),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn truncated_satisfies_birth_death_balance() {
        let r = fig1();
        let w = Workload::new(vec![0.5, 0.8], vec![1.6, 1.0]).unwrap();
        let s = stationary_truncated(&r, &w, 90).unwrap();
        let mut cache = BalanceCache::new(&r);
        for x1 in 0..4u32 {
            for x2 in 0..4u32 {
                let x = [x1, x2];
                for i in 0..2 {
                    let mut up = x;
                    up[i] += 1;
                    let lhs = w.lambda()[i] * s.pi_state(&x).unwrap();
                    let rhs = cache.service_rates(&up).unwrap()[i] / w.sigma()[i]
                        * s.pi_state(&up).unwrap();
                    assert!(
                        ((lhs - rhs) / rhs).abs() < 1e-8,
                        "balance broken at {x:?} queue {i}"
                    );
                }
            }
        }
    }

    #[test]
    fn simulated_single_queue_matches_theory() {
        let r = TableRank::new(1, vec![0.0, 2.0]).unwrap();
        let w = Workload::from_intensities(vec![1.0]).unwrap();
        let cfg = SimConfig {
            horizon_events: 200_000,
            seed: 7,
            ..SimConfig::default()
        };
        let est = simulate(&r, &w, &cfg).unwrap();
        assert!(!est.diverged);
        assert!(
            (est.mean_counts[0] - 1.0).abs() <= 3.0 * est.std_errors[0],
            "L = {} +- {}",
            est.mean_counts[0],
            est.std_errors[0]
        );
    }

    #[test]
    fn simulation_is_deterministic_under_a_seed() {
        let r = fig1();
        let w = Workload::from_intensities(vec![0.8, 0.9]).unwrap();
        let cfg = SimConfig {
            horizon_events: 20_000,
            seed: 42,
            ..SimConfig::default()
        };
        let a = simulate(&r, &w, &cfg).unwrap();
        let b = simulate(&r, &w, &cfg).unwrap();
        assert_eq!(a.mean_counts, b.mean_counts);
        assert_eq!(a.std_errors, b.std_errors);
        assert_eq!(a.sim_time, b.sim_time);
    }
}
