//! Computer clusters: per-class server assignments and their rank.
//!
//! The capacity available to a set of classes is the total capacity of
//! the union of their assigned servers, which is always a polymatroid
//! rank. Class counts beyond 64 are supported through
//! [`ClusterAssignment::union_capacity`]; the bitmask [`Rank`] view
//! requires at most 64 classes.

use super::Rank;
use crate::error::{Error, Result};
use crate::subset::Subset;

/// A cluster: per-server capacities and, per class, the servers able to
/// process it.
#[derive(Clone, Debug)]
pub struct ClusterAssignment {
    server_capacities: Vec<f64>,
    class_servers: Vec<Vec<u32>>,
}

impl ClusterAssignment {
    pub fn new(
        server_capacities: Vec<f64>,
        class_servers: Vec<Vec<u32>>,
    ) -> Result<ClusterAssignment> {
        let m = server_capacities.len();
        if m == 0 {
            return Err(Error::invalid("cluster", "no servers"));
        }
        if class_servers.is_empty() {
            return Err(Error::invalid("cluster", "no classes"));
        }
        if let Some(c) = server_capacities.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(Error::invalid("cluster", format!("bad server capacity {c}")));
        }
        let mut class_servers = class_servers;
        for (i, servers) in class_servers.iter_mut().enumerate() {
            servers.sort_unstable();
            servers.dedup();
            if servers.is_empty() {
                return Err(Error::invalid(
                    "cluster",
                    format!("class {} has no servers", i + 1),
                ));
            }
            if let Some(&s) = servers.iter().find(|&&s| s as usize >= m) {
                return Err(Error::invalid(
                    "cluster",
                    format!("class {} uses server {} but only {m} exist", i + 1, s + 1),
                ));
            }
        }
        Ok(ClusterAssignment {
            server_capacities,
            class_servers,
        })
    }

    /// All servers with unit capacity.
    pub fn unit_servers(m: usize, class_servers: Vec<Vec<u32>>) -> Result<ClusterAssignment> {
        ClusterAssignment::new(vec![1.0; m], class_servers)
    }

    pub fn server_count(&self) -> usize {
        self.server_capacities.len()
    }

    pub fn class_count(&self) -> usize {
        self.class_servers.len()
    }

    pub fn server_capacities(&self) -> &[f64] {
        &self.server_capacities
    }

    pub fn class_servers(&self, i: usize) -> &[u32] {
        &self.class_servers[i]
    }

    /// Total capacity of the servers assigned to any class in `classes`,
    /// for arbitrarily many classes.
    pub fn union_capacity(&self, classes: impl IntoIterator<Item = usize>) -> f64 {
        let words = self.server_capacities.len().div_ceil(64);
        let mut seen = vec![0u64; words];
        let mut total = 0.0;
        for i in classes {
            for &s in &self.class_servers[i] {
                let (w, b) = (s as usize / 64, s as usize % 64);
                if seen[w] >> b & 1 == 0 {
                    seen[w] |= 1 << b;
                    total += self.server_capacities[s as usize];
                }
            }
        }
        total
    }

    /// Bitmask rank view; the class count must fit in a subset mask.
    pub fn rank(&self) -> Result<ClusterRank> {
        let n = self.class_servers.len();
        if n > 64 {
            return Err(Error::invalid(
                "cluster",
                format!("{n} classes exceed the 64-bit subset representation"),
            ));
        }
        Ok(ClusterRank {
            assignment: self.clone(),
        })
    }
}

/// [`Rank`] view of a [`ClusterAssignment`].
#[derive(Clone, Debug)]
pub struct ClusterRank {
    assignment: ClusterAssignment,
}

impl ClusterRank {
    pub fn assignment(&self) -> &ClusterAssignment {
        &self.assignment
    }
}

impl Rank for ClusterRank {
    fn queue_count(&self) -> usize {
        self.assignment.class_count()
    }

    fn rank(&self, s: Subset) -> f64 {
        self.assignment.union_capacity(s.iter())
    }
}
