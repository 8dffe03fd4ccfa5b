//! Polymatroid rank functions and their builders.
//!
//! A capacity set is described by its rank function: a normalized,
//! monotone, submodular map from queue subsets to service capacity.
//! Concrete rank functions come from explicit tables, tree networks
//! ([`TreeTopology`]) or computer clusters ([`ClusterAssignment`]);
//! poly-symmetric ones can be compressed to a [`CardinalityRank`] over
//! the per-part cardinality grid.

mod cluster;
mod tree;

pub use cluster::{ClusterAssignment, ClusterRank};
pub use tree::{TreeLink, TreeRank, TreeTopology};

use crate::error::{Error, Result};
use crate::numeric::{nearly_equal, nearly_le};
use crate::subset::{subsets_by_cardinality, Subset};

/// Exhaustive axiom validation scans all `2^n` subsets; capped here.
pub const VALIDATE_LIMIT: usize = 16;

/// Exchangeability scans `2^(n-2)` subsets per pair; capped here.
pub const EXCHANGEABILITY_LIMIT: usize = 24;

/// A rank function: the set function defining a polymatroid capacity set.
///
/// Implementations must be total on the power set of `{0, .., n-1}`.
/// Whether the axioms actually hold is checked by [`validate_polymatroid`],
/// not assumed by the trait.
pub trait Rank {
    fn queue_count(&self) -> usize;

    /// Aggregate capacity available to the queues in `s`.
    fn rank(&self, s: Subset) -> f64;

    fn full_set(&self) -> Subset {
        Subset::full(self.queue_count())
    }
}

impl<R: Rank + ?Sized> Rank for &R {
    fn queue_count(&self) -> usize {
        (**self).queue_count()
    }
    fn rank(&self, s: Subset) -> f64 {
        (**self).rank(s)
    }
}

/// Rank function stored as a dense table indexed by bitmask.
#[derive(Clone, Debug)]
pub struct TableRank {
    n: usize,
    values: Vec<f64>,
}

impl TableRank {
    /// Build from raw values; `values[mask]` is the rank of `mask`.
    pub fn new(n: usize, values: Vec<f64>) -> Result<TableRank> {
        if n == 0 || n > EXCHANGEABILITY_LIMIT {
            return Err(Error::invalid(
                "rank table",
                format!("queue count {n} outside 1..={EXCHANGEABILITY_LIMIT}"),
            ));
        }
        if values.len() != 1 << n {
            return Err(Error::invalid(
                "rank table",
                format!("expected {} values, got {}", 1u64 << n, values.len()),
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid("rank table", format!("non-finite value {v}")));
        }
        Ok(TableRank { n, values })
    }

    pub fn from_fn(n: usize, f: impl Fn(Subset) -> f64) -> TableRank {
        assert!(n >= 1 && n <= EXCHANGEABILITY_LIMIT);
        let values = (0..1u64 << n).map(|m| f(Subset(m))).collect();
        TableRank { n, values }
    }

    /// Materialize any rank function into a table.
    pub fn tabulate(r: &dyn Rank) -> TableRank {
        TableRank::from_fn(r.queue_count(), |s| r.rank(s))
    }
}

impl Rank for TableRank {
    fn queue_count(&self) -> usize {
        self.n
    }
    fn rank(&self, s: Subset) -> f64 {
        self.values[s.0 as usize]
    }
}

/// View of a rank function scaled by a positive factor.
///
/// Scaling preserves all three polymatroid axioms, so this is the
/// `(1 +/- eps)`-reference construction used by the sandwich bounds.
#[derive(Clone, Copy)]
pub struct Scaled<'a> {
    inner: &'a dyn Rank,
    factor: f64,
}

impl<'a> Scaled<'a> {
    pub fn new(inner: &'a dyn Rank, factor: f64) -> Scaled<'a> {
        assert!(factor > 0.0, "scale factor must be positive");
        Scaled { inner, factor }
    }
}

impl Rank for Scaled<'_> {
    fn queue_count(&self) -> usize {
        self.inner.queue_count()
    }
    fn rank(&self, s: Subset) -> f64 {
        self.factor * self.inner.rank(s)
    }
}

/// Pointwise scaling of a rank function.
pub fn scale_rank<'a>(r: &'a dyn Rank, factor: f64) -> Scaled<'a> {
    Scaled::new(r, factor)
}

/// One violated polymatroid axiom, with a witnessing subset (pair).
#[derive(Clone, Debug)]
pub enum AxiomViolation {
    /// `rank({})` is not zero.
    Normalization { value: f64 },
    /// `subset` is contained in `superset` but has strictly larger rank.
    Monotonicity {
        subset: Subset,
        superset: Subset,
        lower: f64,
        higher: f64,
    },
    /// `rank(a) + rank(b) < rank(a | b) + rank(a & b)`.
    Submodularity {
        a: Subset,
        b: Subset,
        sum: f64,
        required: f64,
    },
}

impl std::fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AxiomViolation::Normalization { value } => {
                write!(f, "normalization: rank({{}}) = {value} != 0")
            }
            AxiomViolation::Monotonicity {
                subset,
                superset,
                lower,
                higher,
            } => write!(
                f,
                "monotonicity: rank({subset}) = {higher} > rank({superset}) = {lower}"
            ),
            AxiomViolation::Submodularity { a, b, sum, required } => write!(
                f,
                "submodularity: rank({a}) + rank({b}) = {sum} < {required} = rank(union) + rank(intersection)"
            ),
        }
    }
}

/// Outcome of an exhaustive polymatroid-axiom check.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub queue_count: usize,
    /// At most one entry per violated axiom, each with a witness.
    pub violations: Vec<AxiomViolation>,
}

impl ValidationReport {
    pub fn is_polymatroid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exhaustively check normalization, monotonicity and submodularity.
///
/// Monotonicity and submodularity are verified in their single-element
/// forms (`rank(A) <= rank(A + i)` and diminishing returns over pairs),
/// which are equivalent to the set-pair axioms and keep the scan at
/// `O(n^2 2^n)` instead of `O(4^n)`.
pub fn validate_polymatroid(r: &dyn Rank) -> Result<ValidationReport> {
    let n = r.queue_count();
    if n > VALIDATE_LIMIT {
        return Err(Error::TooLarge {
            operation: "validate_polymatroid",
            limit: VALIDATE_LIMIT,
            actual: n,
        });
    }

    let mut violations = Vec::new();

    let empty = r.rank(Subset::EMPTY);
    if !nearly_equal(empty, 0.0) {
        violations.push(AxiomViolation::Normalization { value: empty });
    }

    'mono: for mask in 0..1u64 << n {
        let a = Subset(mask);
        let ra = r.rank(a);
        for i in 0..n {
            if a.contains(i) {
                continue;
            }
            let b = a.insert(i);
            let rb = r.rank(b);
            if !nearly_le(ra, rb) {
                violations.push(AxiomViolation::Monotonicity {
                    subset: a,
                    superset: b,
                    lower: rb,
                    higher: ra,
                });
                break 'mono;
            }
        }
    }

    'sub: for mask in 0..1u64 << n {
        let a = Subset(mask);
        let ra = r.rank(a);
        for i in 0..n {
            if a.contains(i) {
                continue;
            }
            let rai = r.rank(a.insert(i));
            for j in i + 1..n {
                if a.contains(j) {
                    continue;
                }
                let raj = r.rank(a.insert(j));
                let rij = r.rank(a.insert(i).insert(j));
                if !nearly_le(rij + ra, rai + raj) {
                    violations.push(AxiomViolation::Submodularity {
                        a: a.insert(i),
                        b: a.insert(j),
                        sum: rai + raj,
                        required: rij + ra,
                    });
                    break 'sub;
                }
            }
        }
    }

    Ok(ValidationReport {
        queue_count: n,
        violations,
    })
}

fn check_exchangeability_size(op: &'static str, n: usize) -> Result<()> {
    if n > EXCHANGEABILITY_LIMIT {
        return Err(Error::TooLarge {
            operation: op,
            limit: EXCHANGEABILITY_LIMIT,
            actual: n,
        });
    }
    Ok(())
}

/// Are queues `i` and `j` interchangeable without altering the capacity set?
///
/// True iff `rank(A + i) = rank(A + j)` for every `A` avoiding both.
pub fn exchangeable(r: &dyn Rank, i: usize, j: usize) -> Result<bool> {
    Ok(exchangeable_witness(r, i, j)?.is_none())
}

/// As [`exchangeable`], returning a witnessing `A` on failure.
pub fn exchangeable_witness(r: &dyn Rank, i: usize, j: usize) -> Result<Option<Subset>> {
    let n = r.queue_count();
    check_exchangeability_size("exchangeable", n)?;
    if i == j || i >= n || j >= n {
        return Err(Error::invalid(
            "exchangeability query",
            format!("indices {i}, {j} must be distinct and below {n}"),
        ));
    }
    // positions of the n-2 free indices
    let rest: Vec<usize> = (0..n).filter(|&k| k != i && k != j).collect();
    for bits in 0..1u64 << rest.len() {
        let mut a = Subset::EMPTY;
        let mut b = bits;
        while b != 0 {
            let k = b.trailing_zeros() as usize;
            a = a.insert(rest[k]);
            b &= b - 1;
        }
        if !nearly_equal(r.rank(a.insert(i)), r.rank(a.insert(j))) {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

/// A partition of `{0, .., n-1}` into disjoint nonempty parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    n: usize,
    parts: Vec<Vec<usize>>,
    part_of: Vec<usize>,
    masks: Vec<Subset>,
}

impl Partition {
    pub fn new(n: usize, parts: Vec<Vec<usize>>) -> Result<Partition> {
        let mut part_of = vec![usize::MAX; n];
        for (k, part) in parts.iter().enumerate() {
            if part.is_empty() {
                return Err(Error::invalid("partition", format!("part {k} is empty")));
            }
            for &i in part {
                if i >= n {
                    return Err(Error::invalid(
                        "partition",
                        format!("index {i} out of range for {n} queues"),
                    ));
                }
                if part_of[i] != usize::MAX {
                    return Err(Error::invalid(
                        "partition",
                        format!("index {i} appears in two parts"),
                    ));
                }
                part_of[i] = k;
            }
        }
        if let Some(i) = part_of.iter().position(|&p| p == usize::MAX) {
            return Err(Error::invalid(
                "partition",
                format!("index {i} missing from every part"),
            ));
        }
        let mut parts = parts;
        for part in &mut parts {
            part.sort_unstable();
        }
        let masks = parts
            .iter()
            .map(|p| Subset::from_indices(p))
            .collect();
        Ok(Partition {
            n,
            parts,
            part_of,
            masks,
        })
    }

    /// One singleton part per index.
    pub fn singletons(n: usize) -> Partition {
        Partition::new(n, (0..n).map(|i| vec![i]).collect()).expect("singletons are valid")
    }

    /// Consecutive blocks of the given sizes, in order.
    pub fn contiguous(sizes: &[usize]) -> Partition {
        let mut parts = Vec::with_capacity(sizes.len());
        let mut next = 0;
        for &s in sizes {
            parts.push((next..next + s).collect());
            next += s;
        }
        Partition::new(next, parts).expect("contiguous blocks are valid")
    }

    pub fn queue_count(&self) -> usize {
        self.n
    }

    pub fn part_count(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        self.parts.iter().map(|p| p.len()).collect()
    }

    pub fn part_of(&self, i: usize) -> usize {
        self.part_of[i]
    }

    pub fn part_masks(&self) -> &[Subset] {
        &self.masks
    }

    /// Per-part cardinalities `|A & I_k|`.
    pub fn profile(&self, a: Subset) -> Vec<usize> {
        self.masks.iter().map(|m| a.intersection(*m).len()).collect()
    }
}

/// The coarsest partition into classes of pairwise exchangeable indices.
///
/// Exchangeability is an equivalence relation, so a union-find seeded in
/// ascending index order yields an order-independent result. Parts are
/// returned sorted by smallest member.
pub fn exchangeability_partition(r: &dyn Rank) -> Result<Partition> {
    let n = r.queue_count();
    check_exchangeability_size("exchangeability_partition", n)?;

    let mut leader: Vec<usize> = (0..n).collect();
    fn find(leader: &mut Vec<usize>, i: usize) -> usize {
        if leader[i] != i {
            let root = find(leader, leader[i]);
            leader[i] = root;
        }
        leader[i]
    }

    let singles: Vec<f64> = (0..n).map(|i| r.rank(Subset::singleton(i))).collect();
    for i in 0..n {
        for j in i + 1..n {
            if find(&mut leader, i) == find(&mut leader, j) {
                continue;
            }
            // necessary condition, cheap to test first
            if !nearly_equal(singles[i], singles[j]) {
                continue;
            }
            if exchangeable(r, i, j)? {
                let (ri, rj) = (find(&mut leader, i), find(&mut leader, j));
                leader[rj.max(ri)] = rj.min(ri);
            }
        }
    }

    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let root = find(&mut leader, i);
        groups[root].push(i);
    }
    let parts: Vec<Vec<usize>> = groups.into_iter().filter(|g| !g.is_empty()).collect();
    // groups[root] keyed by smallest member, so parts are already ordered
    Partition::new(n, parts)
}

/// Rank of a poly-symmetric capacity set as a function of the per-part
/// cardinality profile, stored densely over the grid `prod {0..n_k}`.
#[derive(Clone, Debug)]
pub struct CardinalityRank {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    values: Vec<f64>,
}

impl CardinalityRank {
    /// `values` in row-major order (last part fastest).
    pub fn new(sizes: Vec<usize>, values: Vec<f64>) -> Result<CardinalityRank> {
        if sizes.is_empty() || sizes.iter().any(|&s| s == 0) {
            return Err(Error::invalid("cardinality rank", "all part sizes must be positive"));
        }
        let cells: usize = sizes.iter().map(|&s| s + 1).product();
        if values.len() != cells {
            return Err(Error::invalid(
                "cardinality rank",
                format!("expected {} grid values, got {}", cells, values.len()),
            ));
        }
        let h = CardinalityRank {
            strides: strides(&sizes),
            sizes,
            values,
        };
        if !nearly_equal(h.values[0], 0.0) {
            return Err(Error::invalid(
                "cardinality rank",
                format!("h(0) = {} != 0", h.values[0]),
            ));
        }
        // componentwise monotonicity along each axis
        let mut a = vec![0usize; h.sizes.len()];
        loop {
            let idx = h.index(&a);
            if !h.values[idx].is_finite() {
                return Err(Error::invalid(
                    "cardinality rank",
                    format!("non-finite value at {a:?}"),
                ));
            }
            for k in 0..h.sizes.len() {
                if a[k] < h.sizes[k] && !nearly_le(h.values[idx], h.values[idx + h.strides[k]]) {
                    return Err(Error::invalid(
                        "cardinality rank",
                        format!("h decreases along part {k} at {a:?}"),
                    ));
                }
            }
            if !next_profile(&h.sizes, &mut a) {
                break;
            }
        }
        Ok(h)
    }

    pub fn from_fn(sizes: Vec<usize>, f: impl Fn(&[usize]) -> f64) -> Result<CardinalityRank> {
        let mut values = Vec::new();
        let mut a = vec![0usize; sizes.len()];
        loop {
            values.push(f(&a));
            if !next_profile(&sizes, &mut a) {
                break;
            }
        }
        CardinalityRank::new(sizes, values)
    }

    pub fn part_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn cell_count(&self) -> usize {
        self.values.len()
    }

    pub fn index(&self, a: &[usize]) -> usize {
        debug_assert_eq!(a.len(), self.sizes.len());
        a.iter().zip(&self.strides).map(|(&ai, &st)| ai * st).sum()
    }

    pub fn value(&self, a: &[usize]) -> f64 {
        self.values[self.index(a)]
    }

    pub fn value_at(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Pointwise scaling; axioms of the induced rank are preserved.
    pub fn scaled(&self, factor: f64) -> CardinalityRank {
        assert!(factor > 0.0);
        CardinalityRank {
            sizes: self.sizes.clone(),
            strides: self.strides.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Expand to a full rank function on `sum n_k` queues, with parts laid
    /// out as consecutive index blocks (see [`Partition::contiguous`]).
    pub fn expand(&self) -> Result<TableRank> {
        let n: usize = self.sizes.iter().sum();
        if n > EXCHANGEABILITY_LIMIT {
            return Err(Error::TooLarge {
                operation: "cardinality rank expansion",
                limit: EXCHANGEABILITY_LIMIT,
                actual: n,
            });
        }
        let p = Partition::contiguous(&self.sizes);
        Ok(TableRank::from_fn(n, |s| self.value(&p.profile(s))))
    }
}

/// Row-major strides for a grid with axes `0..=sizes[k]`.
pub(crate) fn strides(sizes: &[usize]) -> Vec<usize> {
    let mut st = vec![0usize; sizes.len()];
    let mut acc = 1;
    for k in (0..sizes.len()).rev() {
        st[k] = acc;
        acc *= sizes[k] + 1;
    }
    st
}

/// Advance `a` to the next profile in row-major order; false past the end.
pub(crate) fn next_profile(sizes: &[usize], a: &mut [usize]) -> bool {
    for k in (0..a.len()).rev() {
        if a[k] < sizes[k] {
            a[k] += 1;
            return true;
        }
        a[k] = 0;
    }
    false
}

/// Read a poly-symmetric rank function off its profile classes.
///
/// Verifies that all subsets sharing a profile have equal rank (within
/// tolerance) and returns the per-profile representative.
pub fn cardinality_rank_from(r: &dyn Rank, p: &Partition) -> Result<CardinalityRank> {
    let n = r.queue_count();
    check_exchangeability_size("cardinality_rank_from", n)?;
    if p.queue_count() != n {
        return Err(Error::invalid(
            "partition",
            format!("partition covers {} queues, rank has {}", p.queue_count(), n),
        ));
    }

    let sizes = p.part_sizes();
    let strides = strides(&sizes);
    let cells: usize = sizes.iter().map(|&s| s + 1).product();
    let mut values = vec![f64::NAN; cells];
    let mut first_seen: Vec<Option<Subset>> = vec![None; cells];

    for s in subsets_by_cardinality(n) {
        let idx: usize = p
            .part_masks()
            .iter()
            .zip(&strides)
            .map(|(m, st)| s.intersection(*m).len() * st)
            .sum();
        let v = r.rank(s);
        match first_seen[idx] {
            None => {
                first_seen[idx] = Some(s);
                values[idx] = v;
            }
            Some(witness) => {
                if !nearly_equal(values[idx], v) {
                    return Err(Error::NotPolySymmetric {
                        a: witness,
                        b: s,
                        rank_a: values[idx],
                        rank_b: v,
                    });
                }
            }
        }
    }

    CardinalityRank::new(sizes, values)
}

pub use tree::tree_cardinality_rank;

#[cfg(test)]
mod tests;
