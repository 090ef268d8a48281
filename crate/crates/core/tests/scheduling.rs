//! Interleaved schedules, blocking and coupling.

mod common;

use mbb::algorithms::{run, run_set_function, PolicySpec};
use mbb::fixtures::{random_explicit, random_instance, tiny_fixtures};
use mbb::interleave::{contains_integer, sample_offsets, sampled_set, Delays, ScheduleCursor, OFFSET_SCALE};
use mbb::oracles::is_feasible_schedule;
use mbb::set::ElementSet;
use mbb::submodular::SubmodularFn;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::Rng;

fn exact_contains(u: u32, d: u64, t: u64) -> bool {
    let r = BigRational::new(BigInt::from(u), BigInt::from(OFFSET_SCALE));
    let lo = BigRational::new(BigInt::from(t), BigInt::from(d)) + &r;
    let hi = BigRational::new(BigInt::from(t) + 1, BigInt::from(d)) + &r;
    lo.ceil() < hi
}

#[test]
fn contains_integer_matches_exact_rationals() {
    let mut rng = common::rng(31);
    for n in 0..100_000u32 {
        let u: u32 = match n % 4 {
            0 => 0,
            1 => u32::MAX - rng.gen_range(0..4),
            _ => rng.gen(),
        };
        let d: u64 = match n % 3 {
            0 => rng.gen_range(1..=20),
            1 => rng.gen_range(1..=1u64 << 40),
            _ => rng.gen(),
        }
        .max(1);
        let t: u64 = if n % 5 == 0 { rng.gen() } else { rng.gen_range(0..10_000) };
        assert_eq!(contains_integer(u, d, t), exact_contains(u, d, t), "u={u} d={d} t={t}");
    }
}

#[test]
fn long_run_frequencies() {
    let delays = Delays::new(vec![2, 3, 5]).unwrap();
    let mut rng = common::rng(32);
    let rounds = 30_000u64;
    let mut counts = [0u64; 3];
    for _ in 0..20 {
        let off = sample_offsets(&delays, &mut rng);
        let mut cur = ScheduleCursor::new(&off, &delays, 1).unwrap();
        for _ in 0..rounds {
            for i in cur.next_set().iter() {
                counts[i] += 1;
            }
        }
    }
    for (i, &c) in counts.iter().enumerate() {
        let freq = c as f64 / (20 * rounds) as f64;
        assert!((freq - 1.0 / delays.get(i) as f64).abs() <= 0.01, "element {i}: {freq}");
    }
}

#[test]
fn every_policy_respects_blocking() {
    let mut rng = common::rng(33);
    for case in 0..40 {
        let k = rng.gen_range(1..=6);
        let inst = random_instance(&mut rng, k, 5);
        for p in ["ig", "ib", "greedy", "indep"] {
            let trace = run(&p.parse().unwrap(), &inst, 200, case).unwrap();
            let sets: Vec<ElementSet> = trace.rounds.iter().map(|r| r.played).collect();
            assert!(is_feasible_schedule(&sets, inst.delays()), "{p} case {case}");
            assert!(sets.iter().all(|&s| inst.matroid().is_independent(s).unwrap()));
        }
        let f = random_explicit(&mut rng, k);
        for p in ["is", "greedy", "indep"] {
            let trace = run_set_function(&p.parse().unwrap(), &f, inst.delays(), 200, case).unwrap();
            let sets: Vec<ElementSet> = trace.rounds.iter().map(|r| r.played).collect();
            assert!(is_feasible_schedule(&sets, inst.delays()), "{p} case {case}");
        }
    }
}

#[test]
fn coupled_runs_share_offsets_and_sizes() {
    let mut rng = common::rng(34);
    for case in 0..40 {
        let k = rng.gen_range(1..=7);
        let inst = random_instance(&mut rng, k, 4);
        let ig = run(&PolicySpec::InterleavedGreedy, &inst, 300, case).unwrap();
        let ib = run(&PolicySpec::InterleavedUcb, &inst, 300, case).unwrap();
        assert_eq!(ig.offsets, ib.offsets);
        let f = SubmodularFn::weighted_rank(inst.matroid().clone(), inst.means().to_vec()).unwrap();
        for (a, b) in ig.rounds.iter().zip(&ib.rounds) {
            assert_eq!(a.sampled, b.sampled);
            let g = a.sampled.unwrap();
            assert!(a.played.is_subset(g) && b.played.is_subset(g));
            assert_eq!(a.played.len(), b.played.len(), "t={}", a.t);
            assert_eq!(a.played.len(), inst.matroid().rank(g).unwrap());
            // ig plays a max-weight basis of G_t
            assert!((a.expected - f.eval(g).unwrap()).abs() < 1e-12);
            assert!(a.expected >= b.expected - 1e-12);
        }
    }
}

#[test]
fn ig_mean_tracks_multilinear_value() {
    // E f(G_t) = F(1/d) for every t
    for (name, inst) in tiny_fixtures() {
        let f = SubmodularFn::weighted_rank(inst.matroid().clone(), inst.means().to_vec()).unwrap();
        let x = mbb::submodular::MarginalVector::new(inst.delays().inverse()).unwrap();
        let want = f.multilinear_exact(&x).unwrap();
        let seeds = 4000u64;
        let per_seed: Vec<f64> = (0..seeds)
            .map(|s| run(&PolicySpec::InterleavedGreedy, &inst, 12, s).unwrap().expected_total() / 12.0)
            .collect();
        let mean = per_seed.iter().sum::<f64>() / seeds as f64;
        let var = per_seed.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (seeds - 1) as f64;
        let se = (var / seeds as f64).sqrt();
        assert!((mean - want).abs() <= 4.0 * se + 1e-9, "{name}: {mean} +- {se} vs {want}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cursor_matches_direct_membership(seed in any::<u64>(), start in 1u64..1_000_000) {
        let mut rng = common::rng(seed);
        let k = rng.gen_range(1..=6);
        let delays = Delays::new((0..k).map(|_| rng.gen_range(1..=40)).collect()).unwrap();
        let off = sample_offsets(&delays, &mut rng);
        let mut cur = ScheduleCursor::new(&off, &delays, start).unwrap();
        for t in start..start + 300 {
            prop_assert_eq!(cur.next_set(), sampled_set(&off, &delays, t).unwrap());
        }
    }

    #[test]
    fn sampled_elements_are_never_blocked(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let k = rng.gen_range(1..=8);
        let delays = Delays::new((0..k).map(|_| rng.gen_range(1..=12)).collect()).unwrap();
        let off = sample_offsets(&delays, &mut rng);
        let sets: Vec<ElementSet> = (1..=500).map(|t| sampled_set(&off, &delays, t).unwrap()).collect();
        prop_assert!(is_feasible_schedule(&sets, &delays));
        for i in 0..k {
            let c = sets.iter().filter(|s| s.contains(i)).count() as u64;
            let d = delays.get(i);
            prop_assert!(c >= 500 / d && c <= 500 / d + 1);
        }
    }
}
