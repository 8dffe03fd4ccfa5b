use super::*;
use crate::subset::Subset;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Independent oracle for the tree rank: minimum-cost disjoint link cover,
/// by exhaustive enumeration of subfamilies.
pub(crate) fn min_cover_rank(links: &[TreeLink], a: Subset) -> f64 {
    let mut best = f64::INFINITY;
    for choice in 0..1u64 << links.len() {
        let mut union = Subset::EMPTY;
        let mut cost = 0.0;
        let mut disjoint = true;
        for (idx, l) in links.iter().enumerate() {
            if choice >> idx & 1 == 1 {
                if !union.intersection(l.users).is_empty() {
                    disjoint = false;
                    break;
                }
                union = union.union(l.users);
                cost += l.capacity;
            }
        }
        if disjoint && a.is_subset_of(union) && cost < best {
            best = cost;
        }
    }
    best
}

/// The two-class cluster of the introduction: two specialized servers
/// plus one shared, all unit capacity.
pub(crate) fn fig1_cluster() -> ClusterRank {
    ClusterAssignment::unit_servers(3, vec![vec![0, 1], vec![1, 2]])
        .unwrap()
        .rank()
        .unwrap()
}

/// The chain cluster with two exchangeable outer classes.
fn chain_cluster() -> ClusterRank {
    ClusterAssignment::unit_servers(4, vec![vec![0, 1], vec![1, 2], vec![2, 3]])
        .unwrap()
        .rank()
        .unwrap()
}

/// The poly-symmetric three-class cluster on three servers.
pub(crate) fn polysym_cluster() -> ClusterRank {
    ClusterAssignment::unit_servers(3, vec![vec![0, 1], vec![0, 1, 2], vec![1, 2]])
        .unwrap()
        .rank()
        .unwrap()
}

fn set(indices: &[usize]) -> Subset {
    Subset::from_indices(indices)
}

#[test]
fn modular_rank_is_polymatroid() {
    let r = TableRank::from_fn(4, |s| s.iter().map(|i| (i + 1) as f64).sum());
    let report = validate_polymatroid(&r).unwrap();
    assert!(report.is_polymatroid(), "{:?}", report.violations);
}

#[test]
fn shared_server_cluster_is_polymatroid() {
    let r = fig1_cluster();
    assert_eq!(r.rank(set(&[0])), 2.0);
    assert_eq!(r.rank(set(&[1])), 2.0);
    assert_eq!(r.rank(set(&[0, 1])), 3.0);
    assert!(validate_polymatroid(&r).unwrap().is_polymatroid());
}

#[test]
fn superadditive_table_fails_submodularity_with_witness() {
    let r = TableRank::new(2, vec![0.0, 2.0, 2.0, 5.0]).unwrap();
    let report = validate_polymatroid(&r).unwrap();
    assert!(!report.is_polymatroid());
    let sub = report.violations.iter().find_map(|v| match v {
        AxiomViolation::Submodularity { a, b, .. } => Some((*a, *b)),
        _ => None,
    });
    assert_eq!(sub, Some((set(&[0]), set(&[1]))));
}

#[test]
fn validation_guard_rejects_17_queues() {
    let r = TableRank::from_fn(17, |s| s.len() as f64);
    assert!(matches!(
        validate_polymatroid(&r),
        Err(Error::TooLarge { limit: 16, .. })
    ));
}

#[test]
fn single_link_tree_rank_is_flat() {
    let t = TreeTopology::new(
        3,
        vec![TreeLink {
            users: set(&[0, 1, 2]),
            capacity: 7.5,
        }],
    )
    .unwrap();
    let r = t.rank();
    for mask in 1..8u64 {
        assert_eq!(r.rank(Subset(mask)), 7.5);
    }
    assert_eq!(r.rank(Subset::EMPTY), 0.0);
}

fn three_user_tree(c1: f64, c2: f64, c3: f64, c12: f64, c123: f64) -> TreeTopology {
    TreeTopology::new(
        3,
        vec![
            TreeLink { users: set(&[0]), capacity: c1 },
            TreeLink { users: set(&[1]), capacity: c2 },
            TreeLink { users: set(&[2]), capacity: c3 },
            TreeLink { users: set(&[0, 1]), capacity: c12 },
            TreeLink { users: set(&[0, 1, 2]), capacity: c123 },
        ],
    )
    .unwrap()
}

#[test]
fn three_user_tree_rank_formulas() {
    // all links constraining for these capacities
    let r = three_user_tree(5.0, 7.0, 11.0, 10.0, 20.0).rank();
    assert_eq!(r.rank(set(&[0])), 5.0);
    assert_eq!(r.rank(set(&[1])), 7.0);
    assert_eq!(r.rank(set(&[2])), 11.0);
    assert_eq!(r.rank(set(&[0, 1])), 10.0);
    assert_eq!(r.rank(set(&[0, 2])), 16.0); // C1 + C3 < C123
    assert_eq!(r.rank(set(&[1, 2])), 18.0); // C2 + C3 < C123
    assert_eq!(r.rank(set(&[0, 1, 2])), 20.0);
}

#[test]
fn three_user_tree_rank_shared_bottleneck() {
    // enumerated by hand: the shared 2.0 link caps both pair and triple
    let r = three_user_tree(1.0, 1.0, 1.0, 1.5, 2.0).rank();
    assert_eq!(r.rank(set(&[0, 2])), 2.0);
    assert_eq!(r.rank(set(&[0, 1, 2])), 2.0);
    assert_eq!(r.rank(set(&[0, 1])), 1.5);
}

#[test]
fn crossing_links_are_rejected() {
    let err = TreeTopology::new(
        3,
        vec![
            TreeLink { users: set(&[0, 1]), capacity: 1.0 },
            TreeLink { users: set(&[1, 2]), capacity: 1.0 },
        ],
    )
    .unwrap_err();
    match err {
        Error::NotLaminar { a, b } => {
            assert_eq!((a, b), (set(&[0, 1]), set(&[1, 2])));
        }
        other => panic!("expected laminar error, got {other}"),
    }
}

fn random_laminar_tree(rng: &mut StdRng, n: usize) -> TreeTopology {
    fn split(rng: &mut StdRng, indices: &[usize], links: &mut Vec<TreeLink>) {
        if indices.len() <= 1 || rng.gen_bool(0.3) {
            return;
        }
        let mut shuffled = indices.to_vec();
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.gen_range(0..=i));
        }
        let cut = rng.gen_range(1..shuffled.len());
        for part in [&shuffled[..cut], &shuffled[cut..]] {
            if rng.gen_bool(0.8) {
                links.push(TreeLink {
                    users: Subset::from_indices(part),
                    capacity: rng.gen_range(0.5..3.0),
                });
            }
            split(rng, part, links);
        }
    }
    let all: Vec<usize> = (0..n).collect();
    let mut links = vec![TreeLink {
        users: Subset::from_indices(&all),
        capacity: rng.gen_range(1.0..4.0),
    }];
    split(rng, &all, &mut links);
    TreeTopology::new(n, links).unwrap()
}

#[test]
fn tree_rank_matches_min_cover_enumeration() {
    let mut rng = StdRng::seed_from_u64(0x7ee5);
    for _ in 0..60 {
        let n = rng.gen_range(2..=8);
        let t = random_laminar_tree(&mut rng, n);
        if t.links().len() > 12 {
            continue;
        }
        let r = t.rank();
        for mask in 0..1u64 << n {
            let a = Subset(mask);
            let expect = min_cover_rank(t.links(), a);
            let got = r.rank(a);
            assert!(
                crate::numeric::nearly_equal(expect, got),
                "cover oracle {expect} vs rank {got} on {a} of {t:?}"
            );
        }
    }
}

#[test]
fn retained_links_achieve_their_capacity() {
    let mut rng = StdRng::seed_from_u64(0x51ab);
    for _ in 0..40 {
        let n = rng.gen_range(2..=8);
        let t = random_laminar_tree(&mut rng, n);
        let r = t.rank();
        for link in r.links() {
            assert!(
                crate::numeric::nearly_equal(r.rank(link.users), link.capacity),
                "rank({}) = {} != retained capacity {}",
                link.users,
                r.rank(link.users),
                link.capacity
            );
        }
        assert!(validate_polymatroid(&r).unwrap().is_polymatroid());
    }
}

#[test]
fn chain_cluster_rank_values() {
    let r = chain_cluster();
    assert_eq!(r.rank(set(&[0])), 2.0);
    assert_eq!(r.rank(set(&[2])), 2.0);
    assert_eq!(r.rank(set(&[0, 1])), 3.0);
    assert_eq!(r.rank(set(&[1, 2])), 3.0);
    assert_eq!(r.rank(set(&[0, 2])), 4.0);
}

#[test]
fn saturated_cluster_rank_is_constant() {
    let r = ClusterAssignment::unit_servers(5, vec![vec![0, 1, 2, 3, 4]; 3])
        .unwrap()
        .rank()
        .unwrap();
    for mask in 1..8u64 {
        assert_eq!(r.rank(Subset(mask)), 5.0);
    }
}

#[test]
fn polysym_cluster_rank_values() {
    let r = polysym_cluster();
    assert_eq!(r.rank(set(&[0, 2])), 3.0);
    assert_eq!(r.rank(set(&[1])), 3.0);
}

#[test]
fn outer_chain_classes_are_exchangeable() {
    let r = chain_cluster();
    assert!(exchangeable(&r, 0, 2).unwrap());
    assert!(!exchangeable(&r, 0, 1).unwrap());
    // witness: adding queue 3 separates queues 1 and 2
    assert_eq!(exchangeable_witness(&r, 0, 1).unwrap(), Some(set(&[2])));
    assert!(exchangeable(&r, 0, 0).is_err());
}

#[test]
fn chain_cluster_partition() {
    let p = exchangeability_partition(&chain_cluster()).unwrap();
    assert_eq!(p.parts(), &[vec![0, 2], vec![1]]);
}

#[test]
fn symmetric_rank_collapses_to_one_part() {
    let r = TableRank::from_fn(5, |s| (s.len() as f64).sqrt());
    let p = exchangeability_partition(&r).unwrap();
    assert_eq!(p.part_count(), 1);
    assert_eq!(p.parts()[0], (0..5).collect::<Vec<_>>());
}

#[test]
fn distinct_modular_weights_stay_singletons() {
    let r = TableRank::from_fn(4, |s| s.iter().map(|i| 1.0 + i as f64).sum());
    let p = exchangeability_partition(&r).unwrap();
    assert_eq!(p.part_count(), 4);
}

#[test]
fn polysym_cluster_cardinality_rank() {
    let r = polysym_cluster();
    let p = Partition::new(3, vec![vec![0, 2], vec![1]]).unwrap();
    let h = cardinality_rank_from(&r, &p).unwrap();
    assert_eq!(h.value(&[0, 0]), 0.0);
    assert_eq!(h.value(&[1, 0]), 2.0);
    assert_eq!(h.value(&[0, 1]), 3.0);
    assert_eq!(h.value(&[1, 1]), 3.0);
    assert_eq!(h.value(&[2, 0]), 3.0);
    assert_eq!(h.value(&[2, 1]), 3.0);
}

#[test]
fn singleton_partition_reindexes_the_rank() {
    let r = fig1_cluster();
    let p = Partition::singletons(2);
    let h = cardinality_rank_from(&r, &p).unwrap();
    assert_eq!(h.value(&[1, 0]), r.rank(set(&[0])));
    assert_eq!(h.value(&[0, 1]), r.rank(set(&[1])));
    assert_eq!(h.value(&[1, 1]), r.rank(set(&[0, 1])));
}

#[test]
fn asymmetric_rank_is_reported_with_witness() {
    let r = TableRank::from_fn(3, |s| s.iter().map(|i| (i + 1) as f64).sum());
    let p = Partition::new(3, vec![vec![0, 1], vec![2]]).unwrap();
    match cardinality_rank_from(&r, &p) {
        Err(Error::NotPolySymmetric { a, b, .. }) => {
            assert_eq!(p.profile(a), p.profile(b));
            assert_ne!(r.rank(a), r.rank(b));
        }
        other => panic!("expected poly-symmetry failure, got {other:?}"),
    }
}

/// Star access network: one line per user (rate per part) under a shared link.
pub(crate) fn access_tree(rates: &[f64], shared: f64, sizes: &[usize]) -> (TreeTopology, Partition) {
    let n: usize = sizes.iter().sum();
    let p = Partition::contiguous(sizes);
    let mut links = vec![TreeLink {
        users: Subset::full(n),
        capacity: shared,
    }];
    for (k, part) in p.parts().iter().enumerate() {
        for &i in part {
            links.push(TreeLink {
                users: Subset::singleton(i),
                capacity: rates[k],
            });
        }
    }
    (TreeTopology::new(n, links).unwrap(), p)
}

#[test]
fn access_tree_profile_rank_closed_form() {
    let (t, p) = access_tree(&[1.0, 2.0], 3.0, &[2, 2]);
    let h = tree_cardinality_rank(&t, &p).unwrap();
    assert_eq!(h.value(&[2, 1]), 3.0);
    assert_eq!(h.value(&[1, 1]), 3.0);
    assert_eq!(h.value(&[1, 0]), 1.0);
    for a1 in 0..=2usize {
        for a2 in 0..=2usize {
            let expect = (a1 as f64 * 1.0 + a2 as f64 * 2.0).min(3.0);
            assert_eq!(h.value(&[a1, a2]), expect);
        }
    }
}

#[test]
fn shared_link_only_profile_rank_is_flat() {
    let t = TreeTopology::new(
        4,
        vec![TreeLink {
            users: Subset::full(4),
            capacity: 9.0,
        }],
    )
    .unwrap();
    let p = Partition::contiguous(&[2, 2]);
    let h = tree_cardinality_rank(&t, &p).unwrap();
    for a1 in 0..=2usize {
        for a2 in 0..=2usize {
            let expect = if a1 + a2 == 0 { 0.0 } else { 9.0 };
            assert_eq!(h.value(&[a1, a2]), expect);
        }
    }
}

#[test]
fn conflicting_profile_capacities_are_ambiguous() {
    let t = TreeTopology::new(
        2,
        vec![
            TreeLink { users: set(&[0]), capacity: 1.0 },
            TreeLink { users: set(&[1]), capacity: 2.0 },
            TreeLink { users: set(&[0, 1]), capacity: 10.0 },
        ],
    )
    .unwrap();
    let p = Partition::new(2, vec![vec![0, 1]]).unwrap();
    assert!(matches!(
        tree_cardinality_rank(&t, &p),
        Err(Error::AmbiguousProfile { .. })
    ));
}

/// Two-level poly-symmetric tree: per-part aggregation links under a root.
fn random_grouped_tree(rng: &mut StdRng) -> (TreeTopology, Partition) {
    let parts = rng.gen_range(1..=3usize);
    let sizes: Vec<usize> = (0..parts).map(|_| rng.gen_range(1..=3)).collect();
    let n: usize = sizes.iter().sum();
    let p = Partition::contiguous(&sizes);
    let mut links = vec![TreeLink {
        users: Subset::full(n),
        capacity: rng.gen_range(1.0..6.0),
    }];
    for (k, part) in p.parts().iter().enumerate() {
        let rate = rng.gen_range(0.3..2.0);
        for &i in part {
            links.push(TreeLink {
                users: Subset::singleton(i),
                capacity: rate,
            });
        }
        if part.len() > 1 && rng.gen_bool(0.5) {
            links.push(TreeLink {
                users: Subset::from_indices(part),
                capacity: rng.gen_range(0.5..4.0),
            });
        }
        let _ = k;
    }
    (TreeTopology::new(n, links).unwrap(), p)
}

#[test]
fn profile_grid_agrees_with_subset_scan_on_trees() {
    let mut rng = StdRng::seed_from_u64(0xacce55);
    for _ in 0..50 {
        let (t, p) = random_grouped_tree(&mut rng);
        let r = t.rank();
        let from_scan = cardinality_rank_from(&r, &p).unwrap();
        let direct = tree_cardinality_rank(&t, &p).unwrap();
        let mut a = vec![0usize; p.part_count()];
        loop {
            assert!(
                crate::numeric::nearly_equal(from_scan.value(&a), direct.value(&a)),
                "h mismatch at {a:?}: scan {} vs grid {} for {t:?}",
                from_scan.value(&a),
                direct.value(&a)
            );
            if !next_profile(from_scan.sizes(), &mut a) {
                break;
            }
        }
    }
}

#[test]
fn exchangeable_queues_share_individual_constraints() {
    let mut rng = StdRng::seed_from_u64(0x1d);
    for _ in 0..30 {
        let n = rng.gen_range(2..=6);
        let m = rng.gen_range(2..=5);
        let classes: Vec<Vec<u32>> = (0..n)
            .map(|_| {
                let mut v: Vec<u32> = (0..m as u32).filter(|_| rng.gen_bool(0.6)).collect();
                if v.is_empty() {
                    v.push(rng.gen_range(0..m as u32));
                }
                v
            })
            .collect();
        let r = ClusterAssignment::unit_servers(m, classes).unwrap().rank().unwrap();
        let p = exchangeability_partition(&r).unwrap();
        for part in p.parts() {
            for w in part.windows(2) {
                assert_eq!(
                    r.rank(Subset::singleton(w[0])),
                    r.rank(Subset::singleton(w[1]))
                );
            }
        }
        // the partition must reproduce the pairwise relation exactly
        for i in 0..n {
            for j in i + 1..n {
                assert_eq!(
                    p.part_of(i) == p.part_of(j),
                    exchangeable(&r, i, j).unwrap(),
                    "partition disagrees with pairwise test on ({i},{j})"
                );
            }
        }
    }
}

proptest! {
    #[test]
    fn random_cluster_ranks_are_polymatroids(
        m in 1..5usize,
        picks in proptest::collection::vec(proptest::collection::vec(0u32..5, 1..5), 1..6),
    ) {
        let classes: Vec<Vec<u32>> = picks
            .into_iter()
            .map(|v| v.into_iter().map(|s| s % m as u32).collect())
            .collect();
        let r = ClusterAssignment::unit_servers(m, classes).unwrap().rank().unwrap();
        prop_assert!(validate_polymatroid(&r).unwrap().is_polymatroid());
    }

    #[test]
    fn scaling_preserves_the_axioms(factor in 0.1f64..10.0, seed in 0u64..500) {
        let mut rng = StdRng::seed_from_u64(seed);
        let t = random_laminar_tree(&mut rng, 5);
        let r = t.rank();
        let scaled = scale_rank(&r, factor);
        prop_assert!(validate_polymatroid(&scaled).unwrap().is_polymatroid());
    }
}
