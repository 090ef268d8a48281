//! Canonical instances and random generators used by the harness and tests.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::env::{BlockingInstance, RewardLaw};
use crate::interleave::Delays;
use crate::matroid::Matroid;
use crate::submodular::SubmodularFn;

fn instance(m: Matroid, means: &[f64], law: RewardLaw, delays: &[u64]) -> BlockingInstance {
    BlockingInstance::with_law(m, means.to_vec(), law, Delays::new(delays.to_vec()).expect("valid delays"))
        .expect("valid fixture")
}

/// Ten small instances (`k <= 4`, `d <= 3`) over uniform, partition,
/// graphic and explicit matroids, with Bernoulli rewards.
pub fn tiny_fixtures() -> Vec<(&'static str, BlockingInstance)> {
    let b = RewardLaw::Bernoulli;
    vec![
        (
            "two_arm_rank1",
            instance(Matroid::uniform(2, 1).unwrap(), &[1.0, 0.6], b, &[2, 2]),
        ),
        (
            "three_arm_rank1",
            instance(Matroid::uniform(3, 1).unwrap(), &[0.9, 0.7, 0.4], b, &[3, 2, 3]),
        ),
        (
            "three_arm_rank2",
            instance(Matroid::uniform(3, 2).unwrap(), &[0.8, 0.5, 0.3], b, &[2, 3, 1]),
        ),
        (
            "partition_pairs",
            instance(
                Matroid::partition(vec![(vec![0, 1], 1), (vec![2, 3], 1)]).unwrap(),
                &[0.9, 0.6, 0.7, 0.2],
                b,
                &[2, 3, 3, 2],
            ),
        ),
        (
            "triangle",
            instance(
                Matroid::graphic(3, vec![(0, 1), (1, 2), (0, 2)]).unwrap(),
                &[0.9, 0.6, 0.5],
                b,
                &[2, 2, 3],
            ),
        ),
        (
            "path_with_chord",
            instance(
                Matroid::graphic(4, vec![(0, 1), (1, 2), (2, 3), (0, 2)]).unwrap(),
                &[0.8, 0.7, 0.6, 0.3],
                b,
                &[3, 2, 2, 3],
            ),
        ),
        (
            "four_arm_rank2",
            instance(Matroid::uniform(4, 2).unwrap(), &[0.95, 0.6, 0.55, 0.1], b, &[3, 3, 2, 2]),
        ),
        (
            "parallel_pair",
            instance(
                Matroid::explicit(3, vec![vec![], vec![0], vec![1], vec![2], vec![0, 2], vec![1, 2]])
                    .unwrap(),
                &[0.9, 0.8, 0.4],
                b,
                &[2, 2, 1],
            ),
        ),
        (
            "partition_single_triple",
            instance(
                Matroid::partition(vec![(vec![0], 1), (vec![1, 2, 3], 2)]).unwrap(),
                &[0.5, 0.9, 0.6, 0.3],
                b,
                &[3, 2, 3, 2],
            ),
        ),
        (
            "four_cycle",
            instance(
                Matroid::graphic(4, vec![(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap(),
                &[0.7, 0.9, 0.2, 0.6],
                b,
                &[2, 3, 2, 3],
            ),
        ),
    ]
}

/// `k` arms of delay `k` and deterministic reward 1 under a rank-1
/// uniform matroid.
pub fn rank1_tightness(k: usize) -> BlockingInstance {
    instance(
        Matroid::uniform(k, 1).unwrap(),
        &vec![1.0; k],
        RewardLaw::Deterministic,
        &vec![k as u64; k],
    )
}

/// The graph `G_d`: start from one edge `{0, 1}`, then for `p = 2..d` add
/// vertex `p` joined to every earlier vertex. The `p` edges added at step
/// `p` (group `T_p`, with `T_1` the first edge) have delay `p` and mean
/// `1 - eps/p`. Edge ids run group by group.
pub fn tight_graph(d: usize, eps: f64) -> BlockingInstance {
    assert!(d >= 1);
    let mut edges = vec![(0, 1)];
    let mut means = vec![1.0 - eps];
    let mut delays = vec![1];
    for p in 2..=d {
        for q in 0..p {
            edges.push((q, p));
            means.push(1.0 - eps / p as f64);
            delays.push(p as u64);
        }
    }
    instance(
        Matroid::graphic(d + 1, edges).unwrap(),
        &means,
        RewardLaw::Deterministic,
        &delays,
    )
}

/// Optimal average reward on `G_d`: one edge of every group per round,
/// `d - eps * H(d)`.
pub fn tight_graph_optimal_rate(d: usize, eps: f64) -> f64 {
    let h: f64 = (1..=d).map(|p| 1.0 / p as f64).sum();
    d as f64 - eps * h
}

/// The schedule achieving [`tight_graph_optimal_rate`]: at round `t`
/// (1-based) play edge `(t - 1) mod p` of every group `T_p`.
pub fn tight_graph_optimal_play(d: usize, t: u64) -> crate::set::ElementSet {
    let mut s = crate::set::ElementSet::EMPTY;
    let mut first = 0;
    for p in 1..=d {
        s.insert(first + ((t - 1) % p as u64) as usize);
        first += p;
    }
    s
}

/// Six Bernoulli arms with means `0.9, 0.8, .., 0.4`, delays
/// `(2, 2, 3, 3, 4, 4)`, and a partition matroid taking one even and one
/// odd id per round.
pub fn regret_instance() -> BlockingInstance {
    instance(
        Matroid::partition(vec![(vec![0, 2, 4], 1), (vec![1, 3, 5], 1)]).unwrap(),
        &[0.9, 0.8, 0.7, 0.6, 0.5, 0.4],
        RewardLaw::Bernoulli,
        &[2, 2, 3, 3, 4, 4],
    )
}

/// A random uniform, partition or graphic matroid on `k` elements.
pub fn random_matroid<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Matroid {
    match rng.gen_range(0..3) {
        0 => Matroid::uniform(k, rng.gen_range(0..=k)).unwrap(),
        1 => {
            let blocks_n = rng.gen_range(1..=k.max(1));
            let mut blocks: Vec<(Vec<usize>, usize)> = vec![(Vec::new(), 0); blocks_n];
            for e in 0..k {
                blocks[rng.gen_range(0..blocks_n)].0.push(e);
            }
            for b in &mut blocks {
                b.1 = rng.gen_range(0..=b.0.len());
            }
            Matroid::partition(blocks).unwrap()
        }
        _ => {
            let vertices = rng.gen_range(2..=k.max(1) + 1);
            let edges = (0..k)
                .map(|_| {
                    let u = rng.gen_range(0..vertices);
                    let mut v = rng.gen_range(0..vertices - 1);
                    if v >= u {
                        v += 1;
                    }
                    (u, v)
                })
                .collect();
            Matroid::graphic(vertices, edges).unwrap()
        }
    }
}

/// A random coverage function: each element covers a random subset of
/// `items` weighted items.
pub fn random_coverage<R: Rng + ?Sized>(rng: &mut R, k: usize, items: usize) -> SubmodularFn {
    let weights: Vec<f64> = (0..items).map(|_| rng.gen::<f64>()).collect();
    let covers = (0..k)
        .map(|_| {
            let mut ids: Vec<usize> = (0..items).collect();
            ids.shuffle(rng);
            ids.truncate(rng.gen_range(0..=items));
            ids
        })
        .collect();
    SubmodularFn::coverage(covers, weights).unwrap()
}

/// A weighted rank function of a random matroid with weights in `[0, 1)`.
pub fn random_weighted_rank<R: Rng + ?Sized>(rng: &mut R, k: usize) -> SubmodularFn {
    let m = random_matroid(rng, k);
    let w = (0..k).map(|_| rng.gen::<f64>()).collect();
    SubmodularFn::weighted_rank(m, w).unwrap()
}

/// A random monotone submodular function as an explicit table, drawn from
/// coverage or weighted-rank families.
pub fn random_explicit<R: Rng + ?Sized>(rng: &mut R, k: usize) -> SubmodularFn {
    let f = if rng.gen_bool(0.5) {
        let items = rng.gen_range(1..=2 * k.max(1));
        random_coverage(rng, k, items)
    } else {
        random_weighted_rank(rng, k)
    };
    SubmodularFn::explicit(k, f.table()).expect("generated functions are submodular")
}

/// A random blocking instance with Bernoulli rewards and distinct means.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, k: usize, d_max: u64) -> BlockingInstance {
    let m = random_matroid(rng, k);
    let mut means: Vec<f64> = (0..k).map(|i| (i as f64 + rng.gen::<f64>()) / k as f64).collect();
    means.shuffle(rng);
    let delays: Vec<u64> = (0..k).map(|_| rng.gen_range(1..=d_max)).collect();
    instance(m, &means, RewardLaw::Bernoulli, &delays)
}
