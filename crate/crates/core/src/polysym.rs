//! Polynomial-time evaluation for poly-symmetric capacity sets.
//!
//! When the rank depends on a subset only through its per-part
//! cardinalities, the subset recursions collapse onto the grid
//! `prod {0..n_k}`: cost `O(K Q)` for the probabilities and `O(K^2 Q)`
//! for the mean counts, where `Q` is the number of grid cells. That is
//! what makes thousand-queue systems tractable.
//!
//! Unnormalized values can span hundreds of orders of magnitude on large
//! grids, so the solver walks the grid by total-count shells and rescales
//! the frontier whenever its maximum crosses a threshold, accumulating
//! the log-scale on the side.

use crate::error::{Error, Result};
use crate::exact::{solve_exact, Workload};
use crate::numeric::ln_choose;
use crate::rank::{next_profile, CardinalityRank, Partition};
use crate::subset::Subset;

/// Frontier values above this trigger a rescale of the current shell.
const RESCALE_THRESHOLD: f64 = 1e200;

/// Denominators this small relative to the rank signal a near-boundary
/// load the recursion cannot resolve.
const DENOMINATOR_FLOOR: f64 = 1e-12;

/// Per-part offered load on the cardinality grid: every queue of part `k`
/// sees arrival rate `lambda_k` and traffic intensity `rho_k`.
#[derive(Clone, Debug)]
pub struct GridWorkload {
    sizes: Vec<usize>,
    lambda: Vec<f64>,
    rho: Vec<f64>,
}

impl GridWorkload {
    pub fn new(sizes: Vec<usize>, lambda: Vec<f64>, sigma: Vec<f64>) -> Result<GridWorkload> {
        if sizes.is_empty() || sizes.iter().any(|&s| s == 0) {
            return Err(Error::invalid("grid workload", "part sizes must be positive"));
        }
        if lambda.len() != sizes.len() || sigma.len() != sizes.len() {
            return Err(Error::invalid(
                "grid workload",
                "need one arrival rate and mean size per part",
            ));
        }
        for (k, (&l, &s)) in lambda.iter().zip(&sigma).enumerate() {
            if !(l > 0.0 && l.is_finite() && s > 0.0 && s.is_finite()) {
                return Err(Error::invalid(
                    "grid workload",
                    format!("part {}: rate {l} and size {s} must be positive", k + 1),
                ));
            }
        }
        let rho = lambda.iter().zip(&sigma).map(|(l, s)| l * s).collect();
        Ok(GridWorkload { sizes, lambda, rho })
    }

    /// Unit mean sizes: intensities equal arrival rates.
    pub fn from_intensities(sizes: Vec<usize>, rho: Vec<f64>) -> Result<GridWorkload> {
        let sigma = vec![1.0; rho.len()];
        GridWorkload::new(sizes, rho, sigma)
    }

    pub fn part_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// Per-queue workload with parts laid out as consecutive blocks.
    pub fn expand(&self) -> Workload {
        let mut lambda = Vec::new();
        let mut sigma = Vec::new();
        for (k, &nk) in self.sizes.iter().enumerate() {
            for _ in 0..nk {
                lambda.push(self.lambda[k]);
                sigma.push(self.rho[k] / self.lambda[k]);
            }
        }
        Workload::new(lambda, sigma).expect("expansion of a valid grid workload")
    }
}

/// Worst slack of the load over the whole grid.
#[derive(Clone, Debug)]
pub struct GridStability {
    /// `min over a != 0 of h(a) - sum a_k rho_k`; positive iff stable.
    pub margin: f64,
    pub argmin: Vec<usize>,
}

impl GridStability {
    pub fn is_stable(&self) -> bool {
        self.margin > 0.0
    }
}

pub fn grid_stability_margin(h: &CardinalityRank, w: &GridWorkload) -> GridStability {
    let sizes = h.sizes();
    let mut a = vec![0usize; sizes.len()];
    let mut margin = f64::INFINITY;
    let mut argmin = a.clone();
    while next_profile(sizes, &mut a) {
        let load: f64 = a.iter().zip(w.rho()).map(|(&ai, &r)| ai as f64 * r).sum();
        let slack = h.value(&a) - load;
        if slack <= margin {
            margin = slack;
            argmin = a.clone();
        }
    }
    GridStability { margin, argmin }
}

/// Stationary solution on the cardinality grid.
#[derive(Clone, Debug)]
pub struct GridSolution {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    log_pi: Vec<f64>,
    pi: Vec<f64>,
    /// `log_pl[k][cell]` holds `log(pi(a) L_k(a))`.
    log_pl: Vec<Vec<f64>>,
    mean_counts: Vec<f64>,
}

impl GridSolution {
    pub fn part_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn cell_count(&self) -> usize {
        self.pi.len()
    }

    pub fn index(&self, a: &[usize]) -> usize {
        a.iter().zip(&self.strides).map(|(&ai, &st)| ai * st).sum()
    }

    /// Probability that the active-queue profile is exactly `a`.
    pub fn pi(&self, a: &[usize]) -> f64 {
        self.pi[self.index(a)]
    }

    /// As [`GridSolution::pi`] but in the log domain, faithful even when
    /// the linear value underflows.
    pub fn log_pi(&self, a: &[usize]) -> f64 {
        self.log_pi[self.index(a)]
    }

    pub fn log_pi_at(&self, idx: usize) -> f64 {
        self.log_pi[idx]
    }

    pub fn pi_at(&self, idx: usize) -> f64 {
        self.pi[idx]
    }

    pub fn empty_probability(&self) -> f64 {
        self.pi[0]
    }

    pub fn log_empty_probability(&self) -> f64 {
        self.log_pi[0]
    }

    /// `pi(a) L_k(a)`.
    pub fn pi_l(&self, k: usize, a: &[usize]) -> f64 {
        self.log_pl[k][self.index(a)].exp()
    }

    /// Mean job count in part `k` given the profile, `L_k(a)`.
    pub fn conditional_mean_count(&self, k: usize, a: &[usize]) -> f64 {
        if a[k] == 0 {
            return 0.0;
        }
        let idx = self.index(a);
        (self.log_pl[k][idx] - self.log_pi[idx]).exp()
    }

    pub fn conditional_mean_count_at(&self, k: usize, idx: usize) -> f64 {
        (self.log_pl[k][idx] - self.log_pi[idx]).exp()
    }

    /// Mean total job count over the queues of part `k`.
    pub fn mean_count(&self, k: usize) -> f64 {
        self.mean_counts[k]
    }

    pub fn mean_counts(&self) -> &[f64] {
        &self.mean_counts
    }
}

pub fn solve_polysym(h: &CardinalityRank, w: &GridWorkload) -> Result<GridSolution> {
    solve_polysym_with_threshold(h, w, RESCALE_THRESHOLD)
}

/// Exposed threshold so tests can force frequent rescaling and verify the
/// bookkeeping leaves every reported value unchanged.
pub(crate) fn solve_polysym_with_threshold(
    h: &CardinalityRank,
    w: &GridWorkload,
    rescale_threshold: f64,
) -> Result<GridSolution> {
    let sizes = h.sizes().to_vec();
    if w.sizes() != sizes.as_slice() {
        return Err(Error::invalid(
            "grid workload",
            format!("workload sizes {:?} differ from rank sizes {:?}", w.sizes(), sizes),
        ));
    }
    let k_parts = sizes.len();
    let rho = w.rho();
    let strides = h.strides().to_vec();
    let cells = h.cell_count();

    // stability and denominator conditioning over the whole grid
    {
        let mut a = vec![0usize; k_parts];
        while next_profile(&sizes, &mut a) {
            let load: f64 = a.iter().zip(rho).map(|(&ai, &r)| ai as f64 * r).sum();
            let den = h.value(&a) - load;
            if den <= 0.0 {
                return Err(Error::UnstableProfile {
                    profile: a.clone(),
                    excess: -den,
                });
            }
            if den < DENOMINATOR_FLOOR * h.value(&a) {
                return Err(Error::Range {
                    operation: "solve_polysym",
                    detail: format!(
                        "denominator {den:.3e} at profile {a:?} is too close to the stability boundary"
                    ),
                });
            }
        }
    }

    let total: usize = sizes.iter().sum();
    let mut v = vec![0.0f64; cells];
    let mut pl = vec![vec![0.0f64; cells]; k_parts];
    // cumulative log-scale of each shell's stored values
    let mut shell_scale = vec![0.0f64; total + 1];
    // cell -> shell is recoverable from the profile, but the normalizer
    // accumulation wants per-shell sums anyway
    v[0] = 1.0;

    // streaming normalizer at a running reference scale
    let mut ref_scale = 0.0f64; // log
    let mut z_acc = 1.0f64; // shell 0 contribution
    let mut pl_acc = vec![0.0f64; k_parts];

    let mut shell_cells: Vec<usize> = Vec::new();
    let mut buf = vec![0usize; k_parts];
    for t in 1..=total {
        shell_cells.clear();
        let prev_scale = shell_scale[t - 1];
        let mut shell_max = 0.0f64;
        for_each_profile_with_total(&sizes, t, &mut buf, &mut |a| {
            let idx: usize = a.iter().zip(&strides).map(|(&ai, &st)| ai * st).sum();
            let hv = h.value_at(idx);
            let load: f64 = a.iter().zip(rho).map(|(&ai, &r)| ai as f64 * r).sum();
            let den = hv - load;

            let mut num_pi = 0.0;
            for k in 0..k_parts {
                if a[k] > 0 {
                    let mult = (sizes[k] - a[k] + 1) as f64 * rho[k];
                    num_pi += mult * v[idx - strides[k]];
                }
            }
            let w_pi = num_pi / den;
            v[idx] = w_pi;
            if w_pi > shell_max {
                shell_max = w_pi;
            }

            for k in 0..k_parts {
                if a[k] == 0 {
                    pl[k][idx] = 0.0;
                    continue;
                }
                let mut num = a[k] as f64 * rho[k] * w_pi
                    + (sizes[k] - a[k] + 1) as f64 * rho[k] * v[idx - strides[k]];
                for l in 0..k_parts {
                    if a[l] > 0 {
                        let mult = (sizes[l] - a[l] + 1) as f64 * rho[l];
                        num += mult * pl[k][idx - strides[l]];
                    }
                }
                pl[k][idx] = num / den;
            }
            shell_cells.push(idx);
        });

        if !(shell_max.is_finite() && shell_max > 0.0) {
            return Err(Error::Range {
                operation: "solve_polysym",
                detail: format!("degenerate shell maximum {shell_max} at total count {t}"),
            });
        }
        // both directions: unnormalized mass can grow or decay geometrically
        if shell_max > rescale_threshold || shell_max < rescale_threshold.recip() {
            for &idx in &shell_cells {
                v[idx] /= shell_max;
                for plk in pl.iter_mut() {
                    plk[idx] /= shell_max;
                }
            }
            shell_scale[t] = prev_scale + shell_max.ln();
        } else {
            shell_scale[t] = prev_scale;
        }

        // fold the shell into the running normalizer
        let mut shell_z = 0.0f64;
        let mut shell_pl = vec![0.0f64; k_parts];
        for &idx in &shell_cells {
            shell_z += v[idx];
            for (k, plk) in pl.iter().enumerate() {
                shell_pl[k] += plk[idx];
            }
        }
        if shell_scale[t] > ref_scale {
            let shrink = (ref_scale - shell_scale[t]).exp();
            z_acc *= shrink;
            for p in &mut pl_acc {
                *p *= shrink;
            }
            ref_scale = shell_scale[t];
        }
        let factor = (shell_scale[t] - ref_scale).exp();
        z_acc += factor * shell_z;
        for k in 0..k_parts {
            pl_acc[k] += factor * shell_pl[k];
        }
    }

    if !(z_acc.is_finite() && z_acc > 0.0) {
        return Err(Error::Range {
            operation: "solve_polysym",
            detail: format!("normalization constant {z_acc}"),
        });
    }
    let log_norm = ref_scale + z_acc.ln();
    let mean_counts: Vec<f64> = pl_acc.iter().map(|p| p / z_acc).collect();

    // final normalized values, log and linear
    let mut log_pi = vec![f64::NEG_INFINITY; cells];
    let mut pi = vec![0.0f64; cells];
    let mut log_pl = vec![vec![f64::NEG_INFINITY; cells]; k_parts];
    let mut a = vec![0usize; k_parts];
    loop {
        let t: usize = a.iter().sum();
        let idx: usize = a.iter().zip(&strides).map(|(&ai, &st)| ai * st).sum();
        let shift = shell_scale[t] - log_norm;
        log_pi[idx] = v[idx].ln() + shift;
        pi[idx] = log_pi[idx].exp();
        for k in 0..k_parts {
            log_pl[k][idx] = pl[k][idx].ln() + shift;
        }
        if !next_profile(&sizes, &mut a) {
            break;
        }
    }

    Ok(GridSolution {
        sizes,
        strides,
        log_pi,
        pi,
        log_pl,
        mean_counts,
    })
}

/// Visit every profile `a <= sizes` with `sum a_k = t`, in lexicographic order.
pub(crate) fn for_each_profile_with_total(
    sizes: &[usize],
    t: usize,
    buf: &mut Vec<usize>,
    f: &mut impl FnMut(&[usize]),
) {
    fn rec(
        sizes: &[usize],
        suffix_cap: &[usize],
        pos: usize,
        left: usize,
        buf: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]),
    ) {
        if pos + 1 == sizes.len() {
            if left <= sizes[pos] {
                buf[pos] = left;
                f(buf);
            }
            return;
        }
        let rest = suffix_cap[pos + 1];
        let lo = left.saturating_sub(rest);
        let hi = left.min(sizes[pos]);
        for v in lo..=hi {
            buf[pos] = v;
            rec(sizes, suffix_cap, pos + 1, left - v, buf, f);
        }
    }
    // suffix_cap[p] = sum of sizes from p on
    let mut suffix_cap = vec![0usize; sizes.len() + 1];
    for p in (0..sizes.len()).rev() {
        suffix_cap[p] = suffix_cap[p + 1] + sizes[p];
    }
    if t > suffix_cap[0] {
        return;
    }
    rec(sizes, &suffix_cap, 0, t, buf, f);
}

/// Deviation between the grid solver and the aggregated subset solver on
/// the expanded system.
#[derive(Clone, Copy, Debug)]
pub struct EquivalenceReport {
    pub cells: usize,
    pub max_abs_pi: f64,
    pub max_rel_pi: f64,
    pub max_rel_pl: f64,
}

/// Expansion guard: the subset solver runs on `sum n_k` queues.
pub const EXPAND_LIMIT: usize = 14;

/// Expand a cardinality rank and grid workload to the full subset system,
/// solve it exactly, aggregate by profile, and diff against the grid
/// solver. This realizes the claimed equivalence as a checkable artifact.
pub fn expand_and_check(h: &CardinalityRank, w: &GridWorkload) -> Result<EquivalenceReport> {
    let n: usize = h.sizes().iter().sum();
    if n > EXPAND_LIMIT {
        return Err(Error::TooLarge {
            operation: "expand_and_check",
            limit: EXPAND_LIMIT,
            actual: n,
        });
    }
    let table = h.expand()?;
    let part = Partition::contiguous(h.sizes());
    let full = solve_exact(&table, &w.expand())?;
    let grid = solve_polysym(h, w)?;

    let k_parts = h.sizes().len();
    let strides = h.strides();
    let cells = h.cell_count();
    let mut agg_pi = vec![0.0f64; cells];
    let mut agg_pl = vec![vec![0.0f64; cells]; k_parts];
    for mask in 0..1u64 << n {
        let a = Subset(mask);
        let idx: usize = part
            .part_masks()
            .iter()
            .zip(strides)
            .map(|(m, st)| a.intersection(*m).len() * st)
            .sum();
        agg_pi[idx] += full.pi(a);
        for k in 0..k_parts {
            for &i in &part.parts()[k] {
                agg_pl[k][idx] += full.pi_l(i, a);
            }
        }
    }

    let rel = |x: f64, y: f64| {
        let m = x.abs().max(y.abs());
        if m == 0.0 {
            0.0
        } else {
            (x - y).abs() / m
        }
    };
    let mut report = EquivalenceReport {
        cells,
        max_abs_pi: 0.0,
        max_rel_pi: 0.0,
        max_rel_pl: 0.0,
    };
    let mut a = vec![0usize; k_parts];
    loop {
        let idx: usize = a.iter().zip(strides).map(|(&ai, &st)| ai * st).sum();
        let gp = grid.pi_at(idx);
        report.max_abs_pi = report.max_abs_pi.max((agg_pi[idx] - gp).abs());
        report.max_rel_pi = report.max_rel_pi.max(rel(agg_pi[idx], gp));
        for k in 0..k_parts {
            let gpl = if a[k] == 0 { 0.0 } else { grid.pi_l(k, &a) };
            report.max_rel_pl = report.max_rel_pl.max(rel(agg_pl[k][idx], gpl));
        }
        if !next_profile(h.sizes(), &mut a) {
            break;
        }
    }
    Ok(report)
}

/// Cardinality rank of the access network: per-user lines of rate `r_k`
/// (one part per rate class) behind a shared link of capacity `c`.
pub fn access_tree_rank(rates: &[f64], c: f64, sizes: &[usize]) -> Result<CardinalityRank> {
    if rates.len() != sizes.len() {
        return Err(Error::invalid("access tree", "one rate per part required"));
    }
    if !(c > 0.0) || rates.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::invalid("access tree", "rates and capacity must be positive"));
    }
    CardinalityRank::from_fn(sizes.to_vec(), |a| {
        let line: f64 = a.iter().zip(rates).map(|(&ai, &r)| ai as f64 * r).sum();
        line.min(c)
    })
}

/// Mean throughput perceived by the users of each part, from the
/// binomial occupancy sum evaluated in the log domain.
pub fn access_tree_throughput(g: &GridSolution, w: &GridWorkload) -> Result<Vec<f64>> {
    let sizes = g.sizes();
    if w.sizes() != sizes {
        return Err(Error::invalid("grid workload", "sizes differ from solution"));
    }
    let k_parts = sizes.len();
    // ln C(n_l, a_l) per part
    let lnc: Vec<Vec<f64>> = sizes
        .iter()
        .map(|&nl| (0..=nl).map(|al| ln_choose(nl, al)).collect())
        .collect();

    let mut gamma = Vec::with_capacity(k_parts);
    for k in 0..k_parts {
        let mut idle = 0.0f64; // P{ a tagged part-k user is inactive }
        let mut a = vec![0usize; k_parts];
        loop {
            if a[k] < sizes[k] {
                let idx = g.index(&a);
                // per-subset probability times the count of subsets avoiding
                // the tagged user: C(n_k - 1, a_k) prod_{l != k} C(n_l, a_l)
                let mut log_term = g.log_pi_at(idx) + ln_choose(sizes[k] - 1, a[k]);
                for l in 0..k_parts {
                    if l != k {
                        log_term += lnc[l][a[l]];
                    }
                }
                for l in 0..k_parts {
                    log_term -= lnc[l][a[l]];
                }
                idle += log_term.exp();
            }
            if !next_profile(sizes, &mut a) {
                break;
            }
        }
        let active = 1.0 - idle;
        if active <= 0.0 {
            return Err(Error::Inconsistent(format!(
                "part {}: active probability {active} is not positive",
                k + 1
            )));
        }
        gamma.push(w.rho()[k] / active);
    }
    Ok(gamma)
}

/// Cardinality rank of the two-part overlap cluster: `d2` classes of
/// degree `d1` crossing `d1` classes of degree `d2`, one shared server
/// per crossing pair.
pub fn grid_cluster_rank(d1: usize, d2: usize) -> Result<CardinalityRank> {
    if d1 == 0 || d2 == 0 {
        return Err(Error::invalid("grid cluster", "degrees must be at least 1"));
    }
    CardinalityRank::from_fn(vec![d2, d1], |a| {
        (a[0] * d1 + a[1] * d2 - a[0] * a[1]) as f64
    })
}

/// Mean sojourn time per job of each part, by Little's law.
pub fn mean_delay(g: &GridSolution, w: &GridWorkload) -> Result<Vec<f64>> {
    if w.sizes() != g.sizes() {
        return Err(Error::invalid("grid workload", "sizes differ from solution"));
    }
    Ok((0..g.part_count())
        .map(|k| g.mean_count(k) / (g.sizes()[k] as f64 * w.lambda()[k]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{metrics, solve_exact};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn two_level_rank() -> CardinalityRank {
        CardinalityRank::new(vec![2], vec![0.0, 2.0, 3.0]).unwrap()
    }

    #[test]
    fn hand_computed_single_part_grid() {
        let h = two_level_rank();
        let w = GridWorkload::from_intensities(vec![2], vec![1.0]).unwrap();
        let g = solve_polysym(&h, &w).unwrap();
        assert!((g.pi(&[0]) - 0.2).abs() < 1e-12);
        assert!((g.pi(&[1]) - 0.4).abs() < 1e-12);
        assert!((g.pi(&[2]) - 0.4).abs() < 1e-12);
        assert!((g.conditional_mean_count(0, &[1]) - 2.0).abs() < 1e-12);
        assert!((g.conditional_mean_count(0, &[2]) - 5.0).abs() < 1e-12);
        assert!((g.mean_count(0) - 2.8).abs() < 1e-12);
    }

    #[test]
    fn one_queue_grid_reduces_to_processor_sharing() {
        let h = CardinalityRank::new(vec![1], vec![0.0, 2.0]).unwrap();
        let w = GridWorkload::from_intensities(vec![1], vec![0.7]).unwrap();
        let g = solve_polysym(&h, &w).unwrap();
        let ratio = g.pi(&[1]) / g.pi(&[0]);
        assert!((ratio - 0.7 / (2.0 - 0.7)).abs() < 1e-12);
    }

    #[test]
    fn grid_instability_names_the_profile() {
        let h = two_level_rank();
        let w = GridWorkload::from_intensities(vec![2], vec![1.6]).unwrap();
        let s = grid_stability_margin(&h, &w);
        assert!(!s.is_stable());
        assert_eq!(s.argmin, vec![2]);
        assert!(matches!(
            solve_polysym(&h, &w),
            Err(Error::UnstableProfile { profile, .. }) if profile == vec![2]
        ));
    }

    #[test]
    fn polysym_cluster_agrees_with_subset_solver() {
        // rank of the three-class cluster, on partition sizes (2, 1)
        let h = CardinalityRank::new(vec![2, 1], vec![0.0, 3.0, 2.0, 3.0, 3.0, 3.0]).unwrap();
        let w = GridWorkload::from_intensities(vec![2, 1], vec![0.4, 0.5]).unwrap();
        let report = expand_and_check(&h, &w).unwrap();
        assert!(report.max_rel_pi < 1e-10, "{report:?}");
        assert!(report.max_rel_pl < 1e-10, "{report:?}");
    }

    #[test]
    fn symmetric_random_rank_agrees_with_subset_solver() {
        let mut rng = StdRng::seed_from_u64(0x9137);
        for _ in 0..5 {
            let mut values = vec![0.0f64];
            let mut last = 0.0;
            for _ in 0..6 {
                last += rng.gen_range(0.1..1.0);
                values.push(last);
            }
            // concave increments keep the induced rank submodular
            let h = CardinalityRank::new(
                vec![6],
                {
                    let mut acc = vec![0.0];
                    let mut inc: Vec<f64> = (0..6).map(|_| rng.gen_range(0.2..1.0)).collect();
                    inc.sort_by(|a, b| b.partial_cmp(a).unwrap());
                    for i in 0..6 {
                        let v = acc[i] + inc[i];
                        acc.push(v);
                    }
                    acc
                },
            )
            .unwrap();
            let _ = values;
            let w = GridWorkload::from_intensities(vec![6], vec![rng.gen_range(0.01..0.1)]).unwrap();
            let report = expand_and_check(&h, &w).unwrap();
            assert!(report.max_rel_pi < 1e-10, "{report:?}");
            assert!(report.max_rel_pl < 1e-10, "{report:?}");
        }
    }

    #[test]
    fn vanishing_load_concentrates_on_empty() {
        let h = two_level_rank();
        let w = GridWorkload::from_intensities(vec![2], vec![1e-9]).unwrap();
        let g = solve_polysym(&h, &w).unwrap();
        assert!((g.empty_probability() - 1.0).abs() < 1e-6);
        let report = expand_and_check(&h, &w).unwrap();
        assert!(report.max_rel_pi < 1e-10);
    }

    #[test]
    fn rescaling_leaves_reported_values_invariant() {
        let h = access_tree_rank(&[1.0, 2.0], 40.0, &[30, 20]).unwrap();
        let w = GridWorkload::from_intensities(vec![30, 20], vec![0.45, 0.7]).unwrap();
        let plain = solve_polysym_with_threshold(&h, &w, f64::INFINITY).unwrap();
        let forced = solve_polysym_with_threshold(&h, &w, 1e2).unwrap();
        for idx in 0..plain.cell_count() {
            let a = plain.pi_at(idx);
            let b = forced.pi_at(idx);
            assert!(
                (a - b).abs() <= 1e-12 + 1e-9 * a.abs().max(b.abs()),
                "pi diverges at cell {idx}: {a} vs {b}"
            );
        }
        for k in 0..2 {
            let a = plain.mean_count(k);
            let b = forced.mean_count(k);
            assert!((a - b).abs() / a.max(b) < 1e-9);
        }
    }

    #[test]
    fn lone_access_user_gets_the_line_rate() {
        let h = access_tree_rank(&[1.5], 3.0, &[1]).unwrap();
        let w = GridWorkload::from_intensities(vec![1], vec![0.6]).unwrap();
        let g = solve_polysym(&h, &w).unwrap();
        let gamma = access_tree_throughput(&g, &w).unwrap();
        assert!((gamma[0] - 1.5).abs() < 1e-9);
    }

    #[test]
    fn access_throughput_matches_subset_metrics() {
        let h = access_tree_rank(&[2.0], 3.0, &[2]).unwrap();
        let w = GridWorkload::from_intensities(vec![2], vec![1.0]).unwrap();
        let g = solve_polysym(&h, &w).unwrap();
        let gamma = access_tree_throughput(&g, &w).unwrap();

        let table = h.expand().unwrap();
        let full = solve_exact(&table, &w.expand()).unwrap();
        let m = metrics(&full, &w.expand()).unwrap();
        assert!((gamma[0] - m[0].throughput).abs() < 1e-10);
        assert!((m[0].throughput - m[1].throughput).abs() < 1e-12);
    }

    #[test]
    fn vanishing_load_throughput_hits_the_access_rate() {
        let h = access_tree_rank(&[1.0, 2.0], 2.5, &[3, 2]).unwrap();
        let w = GridWorkload::from_intensities(vec![3, 2], vec![1e-7, 1e-7]).unwrap();
        let g = solve_polysym(&h, &w).unwrap();
        let gamma = access_tree_throughput(&g, &w).unwrap();
        assert!((gamma[0] - 1.0).abs() < 1e-3);
        assert!((gamma[1] - 2.0).abs() < 1e-3);
    }

    #[test]
    fn overlap_cluster_rank_values() {
        let h = grid_cluster_rank(2, 3).unwrap();
        assert_eq!(h.sizes(), &[3, 2]);
        assert_eq!(h.value(&[1, 1]), 4.0);
        assert_eq!(h.value(&[3, 2]), 6.0);
        for a2 in 0..=2usize {
            assert_eq!(h.value(&[0, a2]), (a2 * 3) as f64);
        }
    }

    #[test]
    fn overlap_cluster_induces_a_polymatroid() {
        for d1 in 1..=3usize {
            for d2 in 1..=3usize {
                let h = grid_cluster_rank(d1, d2).unwrap();
                let table = h.expand().unwrap();
                let report = crate::rank::validate_polymatroid(&table).unwrap();
                assert!(report.is_polymatroid(), "d1={d1} d2={d2}: {:?}", report.violations);
            }
        }
    }

    #[test]
    fn little_law_delay() {
        let h = CardinalityRank::new(vec![1], vec![0.0, 2.0]).unwrap();
        let w = GridWorkload::new(vec![1], vec![0.5], vec![2.0]).unwrap();
        let g = solve_polysym(&h, &w).unwrap();
        let d = mean_delay(&g, &w).unwrap();
        // L / lambda = rho / (lambda (C - rho))
        assert!((d[0] - 1.0 / (0.5 * (2.0 - 1.0))).abs() < 1e-12);
    }

    #[test]
    fn delay_scales_inversely_with_arrival_rate_at_fixed_load() {
        let h = two_level_rank();
        let w1 = GridWorkload::new(vec![2], vec![0.5], vec![2.0]).unwrap();
        let w2 = GridWorkload::new(vec![2], vec![1.0], vec![1.0]).unwrap();
        let g1 = solve_polysym(&h, &w1).unwrap();
        let g2 = solve_polysym(&h, &w2).unwrap();
        assert!((g1.mean_count(0) - g2.mean_count(0)).abs() < 1e-12);
        let d1 = mean_delay(&g1, &w1).unwrap();
        let d2 = mean_delay(&g2, &w2).unwrap();
        assert!((d1[0] - 2.0 * d2[0]).abs() < 1e-12);
    }

    #[test]
    fn part_relabeling_equivariance() {
        let h = CardinalityRank::from_fn(vec![2, 3], |a| {
            ((a[0] * 2 + a[1]) as f64).min(4.0)
        })
        .unwrap();
        let hs = CardinalityRank::from_fn(vec![3, 2], |a| {
            ((a[1] * 2 + a[0]) as f64).min(4.0)
        })
        .unwrap();
        let w = GridWorkload::from_intensities(vec![2, 3], vec![0.3, 0.2]).unwrap();
        let ws = GridWorkload::from_intensities(vec![3, 2], vec![0.2, 0.3]).unwrap();
        let g = solve_polysym(&h, &w).unwrap();
        let gs = solve_polysym(&hs, &ws).unwrap();
        assert!((g.mean_count(0) - gs.mean_count(1)).abs() < 1e-12);
        assert!((g.mean_count(1) - gs.mean_count(0)).abs() < 1e-12);
        assert!((g.pi(&[1, 2]) - gs.pi(&[2, 1])).abs() < 1e-14);
    }
}
