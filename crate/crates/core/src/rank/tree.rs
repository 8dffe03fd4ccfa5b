//! Tree data networks and their polymatroid rank.
//!
//! A tree network is a laminar family of links (any two link sets are
//! nested or disjoint). Its rank is the cheapest disjoint link cover of
//! each subset, evaluated here by a bottom-up pass over the laminar
//! hierarchy rather than literal cover enumeration.

use super::{next_profile, strides, CardinalityRank, Partition, Rank};
use crate::error::{Error, Result};
use crate::numeric::nearly_equal;
use crate::subset::Subset;

/// One link, identified by the set of users whose flows cross it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TreeLink {
    pub users: Subset,
    pub capacity: f64,
}

/// A tree network description: user count plus a laminar link family.
#[derive(Clone, Debug)]
pub struct TreeTopology {
    n: usize,
    links: Vec<TreeLink>,
}

impl TreeTopology {
    pub fn new(n: usize, links: Vec<TreeLink>) -> Result<TreeTopology> {
        if n == 0 || n > 64 {
            return Err(Error::invalid("tree", format!("user count {n} outside 1..=64")));
        }
        let full = Subset::full(n);
        for link in &links {
            if link.users.is_empty() {
                return Err(Error::invalid("tree", "a link with no users"));
            }
            if !link.users.is_subset_of(full) {
                return Err(Error::invalid(
                    "tree",
                    format!("link {} mentions users beyond {n}", link.users),
                ));
            }
            if !(link.capacity > 0.0 && link.capacity.is_finite()) {
                return Err(Error::invalid(
                    "tree",
                    format!("link {} has non-positive capacity {}", link.users, link.capacity),
                ));
            }
        }
        for (i, a) in links.iter().enumerate() {
            for b in &links[i + 1..] {
                let meet = a.users.intersection(b.users);
                if !meet.is_empty()
                    && !a.users.is_subset_of(b.users)
                    && !b.users.is_subset_of(a.users)
                {
                    return Err(Error::NotLaminar {
                        a: a.users,
                        b: b.users,
                    });
                }
            }
        }
        Ok(TreeTopology { n, links })
    }

    pub fn queue_count(&self) -> usize {
        self.n
    }

    pub fn links(&self) -> &[TreeLink] {
        &self.links
    }

    /// The constraining link family actually defining the capacity set:
    /// duplicate sets merged at their minimum capacity, the full set added
    /// when missing (with the sum of the maximal link capacities, i.e. the
    /// forest reduction), and links implied by the others removed.
    ///
    /// Every retained link `L` satisfies `rank(L) = C_L`.
    pub fn constraining_links(&self) -> Vec<TreeLink> {
        let mut links: Vec<TreeLink> = Vec::new();
        for l in &self.links {
            match links.iter_mut().find(|m| m.users == l.users) {
                Some(m) => m.capacity = m.capacity.min(l.capacity),
                None => links.push(*l),
            }
        }
        // canonical order keeps pruning deterministic
        links.sort_by_key(|l| (l.users.len(), l.users.0));

        let full = Subset::full(self.n);
        if !links.iter().any(|l| l.users == full) {
            let root_cap: f64 = maximal_links(&links).iter().map(|l| l.capacity).sum();
            links.push(TreeLink {
                users: full,
                capacity: root_cap,
            });
        }

        // drop links implied by an ancestor or by a disjoint descendant cover
        loop {
            let redundant = links.iter().position(|l| {
                let ancestor = links
                    .iter()
                    .any(|m| m.users != l.users && l.users.is_subset_of(m.users) && m.capacity <= l.capacity);
                ancestor || descendant_cover(&links, l) <= l.capacity
            });
            match redundant {
                Some(i) => {
                    links.remove(i);
                }
                None => break,
            }
        }
        links
    }

    /// Build the rank function of the capacity set (Pareto frontier of
    /// the link constraints).
    pub fn rank(&self) -> TreeRank {
        TreeRank::build(self.n, self.constraining_links())
    }
}

/// Cheapest cover of `l.users` by disjoint strict descendants, or infinity.
fn descendant_cover(links: &[TreeLink], l: &TreeLink) -> f64 {
    let children = child_links(links, l.users);
    let covered = children
        .iter()
        .fold(Subset::EMPTY, |acc, c| acc.union(c.users));
    if covered != l.users {
        return f64::INFINITY;
    }
    children
        .iter()
        .map(|c| c.capacity.min(descendant_cover(links, c)))
        .sum()
}

/// Maximal (inclusion-wise) links of the family.
fn maximal_links(links: &[TreeLink]) -> Vec<TreeLink> {
    links
        .iter()
        .filter(|l| {
            !links
                .iter()
                .any(|m| m.users != l.users && l.users.is_subset_of(m.users))
        })
        .copied()
        .collect()
}

/// Links immediately below `parent`: strict subsets not nested in another
/// strict subset of `parent`.
fn child_links(links: &[TreeLink], parent: Subset) -> Vec<TreeLink> {
    links
        .iter()
        .filter(|l| l.users != parent && l.users.is_subset_of(parent))
        .filter(|l| {
            !links.iter().any(|m| {
                m.users != parent
                    && m.users != l.users
                    && m.users.is_subset_of(parent)
                    && l.users.is_subset_of(m.users)
            })
        })
        .copied()
        .collect()
}

#[derive(Clone, Debug)]
struct Node {
    users: Subset,
    capacity: f64,
    children: Vec<usize>,
    /// users of this link covered by no child link
    residue: Subset,
}

/// Rank function of a tree network, evaluated by dynamic programming
/// over the laminar hierarchy.
#[derive(Clone, Debug)]
pub struct TreeRank {
    n: usize,
    nodes: Vec<Node>,
    roots: Vec<usize>,
}

impl TreeRank {
    fn build(n: usize, links: Vec<TreeLink>) -> TreeRank {
        let mut nodes: Vec<Node> = links
            .iter()
            .map(|l| Node {
                users: l.users,
                capacity: l.capacity,
                children: Vec::new(),
                residue: l.users,
            })
            .collect();
        let mut roots = Vec::new();
        for i in 0..nodes.len() {
            // parent: smallest strict superset
            let parent = (0..nodes.len())
                .filter(|&j| j != i && nodes[i].users.is_subset_of(nodes[j].users) && nodes[i].users != nodes[j].users)
                .min_by_key(|&j| nodes[j].users.len());
            match parent {
                Some(p) => {
                    nodes[p].children.push(i);
                    nodes[p].residue = nodes[p].residue.difference(nodes[i].users);
                }
                None => roots.push(i),
            }
        }
        TreeRank { n, nodes, roots }
    }

    /// Links retained after normalization; `rank(link.users) = capacity`.
    pub fn links(&self) -> Vec<TreeLink> {
        self.nodes
            .iter()
            .map(|node| TreeLink {
                users: node.users,
                capacity: node.capacity,
            })
            .collect()
    }

    fn cost(&self, node: usize, a: Subset) -> f64 {
        let node = &self.nodes[node];
        let within = a.intersection(node.users);
        if within.is_empty() {
            return 0.0;
        }
        if !within.intersection(node.residue).is_empty() {
            // some active user is reachable only through this link
            return node.capacity;
        }
        let split: f64 = node
            .children
            .iter()
            .map(|&c| self.cost(c, within))
            .sum();
        node.capacity.min(split)
    }
}

impl Rank for TreeRank {
    fn queue_count(&self) -> usize {
        self.n
    }

    fn rank(&self, s: Subset) -> f64 {
        self.roots.iter().map(|&r| self.cost(r, s)).sum()
    }
}

/// Cardinality rank of a tree network that is poly-symmetric with respect
/// to `p`, built directly on the profile grid.
///
/// `f` is seeded with the link capacities at the link profiles and closed
/// under cheapest two-way profile splits; the rank is then the
/// componentwise upper envelope `h(a) = min { f(b) : b >= a }`.
pub fn tree_cardinality_rank(t: &TreeTopology, p: &Partition) -> Result<CardinalityRank> {
    if p.queue_count() != t.queue_count() {
        return Err(Error::invalid(
            "partition",
            format!(
                "partition covers {} users, tree has {}",
                p.queue_count(),
                t.queue_count()
            ),
        ));
    }
    let sizes = p.part_sizes();
    let strides = strides(&sizes);
    let cells: usize = sizes.iter().map(|&s| s + 1).product();

    let mut link_cap: Vec<Option<f64>> = vec![None; cells];
    for link in t.constraining_links() {
        let profile = p.profile(link.users);
        let idx: usize = profile.iter().zip(&strides).map(|(a, st)| a * st).sum();
        match link_cap[idx] {
            None => link_cap[idx] = Some(link.capacity),
            Some(c) if nearly_equal(c, link.capacity) => {}
            Some(c) => {
                return Err(Error::AmbiguousProfile {
                    profile,
                    a: c,
                    b: link.capacity,
                });
            }
        }
    }

    let k = sizes.len();
    let mut f = vec![f64::INFINITY; cells];
    f[0] = 0.0;
    let mut a = vec![0usize; k];
    // row-major order: every proper sub-profile precedes its supersets
    while next_profile(&sizes, &mut a) {
        let ia: usize = a.iter().zip(&strides).map(|(x, st)| x * st).sum();
        if let Some(c) = link_cap[ia] {
            f[ia] = c;
            continue;
        }
        let mut best = f64::INFINITY;
        let mut b = vec![0usize; k];
        while next_profile(&a, &mut b) {
            if b == a {
                break;
            }
            let ib: usize = b.iter().zip(&strides).map(|(x, st)| x * st).sum();
            let ic: usize = a
                .iter()
                .zip(&b)
                .zip(&strides)
                .map(|((x, y), st)| (x - y) * st)
                .sum();
            let split = f[ib] + f[ic];
            if split < best {
                best = split;
            }
        }
        f[ia] = best;
    }

    // componentwise suffix minimum: h(a) = min over b >= a of f(b)
    let mut h = f;
    let mut a = vec![0usize; k];
    let mut order = Vec::with_capacity(cells);
    loop {
        order.push(a.clone());
        if !next_profile(&sizes, &mut a) {
            break;
        }
    }
    for a in order.iter().rev() {
        let ia: usize = a.iter().zip(&strides).map(|(x, st)| x * st).sum();
        for kk in 0..k {
            if a[kk] < sizes[kk] {
                let up = ia + strides[kk];
                if h[up] < h[ia] {
                    h[ia] = h[up];
                }
            }
        }
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::Inconsistent(
            "tree profile grid has unreachable cells; link family does not cover all users".into(),
        ));
    }

    CardinalityRank::new(sizes, h)
}
