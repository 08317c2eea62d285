use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tsetlin_index::{ClauseBank, Flip, FlipDirection, TmConfig};

const N: u8 = 100;

/// Replays one training step on a fresh m=2, n=4, o=2 bank by hand, drawing
/// from a generator with the same seed in the documented order:
/// negative class, then per clause an activation draw followed by the
/// clause's Type I literal draws.
fn scripted_trace(seed: u64, s: f64, t: i64) -> Vec<u8> {
    let x = [1u8, 0];
    // literal truth: x_1, x_2, ¬x_1, ¬x_2
    let lit = [true, false, false, true];
    let mut states = vec![N; 2 * 4 * 4];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let negative = 1 + rng.random_range(0..1usize);
    assert_eq!(negative, 1);
    let _ = x;

    // Every clause is empty on a fresh bank, hence fires: votes 2 - 2 = 0.
    let v = 0i64;
    for (class, target) in [(0usize, true), (1, false)] {
        let p = if target {
            (t - v) as f64 / (2 * t) as f64
        } else {
            (t + v) as f64 / (2 * t) as f64
        };
        for clause in 0..4 {
            if rng.random::<f64>() >= p {
                continue;
            }
            let positive = clause < 2;
            let type_one = positive == target;
            let base = (class * 4 + clause) * 4;
            for k in 0..4 {
                let st = &mut states[base + k];
                if type_one {
                    // clause output is 1
                    if lit[k] {
                        if rng.random::<f64>() < (s - 1.0) / s {
                            *st += 1;
                        }
                    } else if rng.random::<f64>() < 1.0 / s {
                        *st -= 1;
                    }
                } else if !lit[k] && *st <= N {
                    *st += 1;
                }
            }
        }
    }
    states
}

#[test]
fn single_step_matches_scripted_trace() {
    for seed in 0..20 {
        let mut cfg = TmConfig::new(2, 4, 2);
        cfg.seed = seed;
        let mut bank = ClauseBank::new(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let flips = bank
            .train_step(&cfg.train_params(), &[1, 0], 0, &mut rng)
            .unwrap();
        let want = scripted_trace(seed, cfg.specificity, cfg.threshold as i64);
        assert_eq!(bank.states(), want.as_slice(), "seed {seed}");

        // Starting at N, any increment is an include flip and nothing else flips.
        let included: BTreeSet<usize> = want
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > N)
            .map(|(i, _)| i)
            .collect();
        let reported: BTreeSet<usize> = flips
            .iter()
            .map(|f| {
                assert_eq!(f.direction, FlipDirection::Included);
                (f.class * 4 + f.clause) * 4 + f.literal
            })
            .collect();
        assert_eq!(reported, included);
    }
}

#[test]
fn type_two_includes_exactly_the_false_literals() {
    // Negative class, positive clauses get Type II. With T=1 and v=0 the
    // activation probability is 1/2; look for an activated clause.
    let mut cfg = TmConfig::new(2, 4, 2);
    cfg.threshold = 1;
    let mut seen = false;
    for seed in 0..20 {
        let mut bank = ClauseBank::new(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        bank.train_step(&cfg.train_params(), &[1, 0], 0, &mut rng)
            .unwrap();
        for clause in 0..2 {
            let team = bank.team(1, clause);
            if team.iter().any(|&v| v != N) {
                seen = true;
                // x_2 and ¬x_1 are false on (1, 0)
                assert_eq!(team, &[N, N + 1, N + 1, N]);
            }
        }
    }
    assert!(seen);
}

fn arb_setup() -> impl Strategy<Value = (TmConfig, Vec<(Vec<u8>, usize)>)> {
    (
        1usize..=3,
        1usize..=5,
        1usize..=5,
        1u32..=8,
        1.5f64..8.0,
        any::<u64>(),
        any::<bool>(),
    )
        .prop_flat_map(|(m, half, o, t, s, seed, boost)| {
            let mut cfg = TmConfig::new(m, 2 * half, o);
            cfg.threshold = t;
            cfg.specificity = s;
            cfg.seed = seed;
            cfg.boost_true_positive = boost;
            cfg.half_range = 4; // small range so automata reach both ends
            let labels = if m == 1 { 2 } else { m };
            let examples =
                prop::collection::vec((prop::collection::vec(0u8..=1, o), 0..labels), 1..60);
            (Just(cfg), examples)
        })
}

fn run(cfg: &TmConfig, stream: &[(Vec<u8>, usize)]) -> (ClauseBank, Vec<Vec<Flip>>) {
    let mut bank = ClauseBank::new(cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut all = Vec::new();
    for (x, y) in stream {
        all.push(
            bank.train_step(&cfg.train_params(), x, *y, &mut rng)
                .unwrap(),
        );
    }
    (bank, all)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn states_stay_in_range((cfg, stream) in arb_setup()) {
        let (bank, _) = run(&cfg, &stream);
        let top = 2 * cfg.half_range;
        prop_assert!(bank.states().iter().all(|&v| (1..=top).contains(&v)));
    }

    #[test]
    fn same_seed_same_states((cfg, stream) in arb_setup()) {
        let (a, fa) = run(&cfg, &stream);
        let (b, fb) = run(&cfg, &stream);
        prop_assert_eq!(a.states(), b.states());
        prop_assert_eq!(fa, fb);
    }

    #[test]
    fn flips_equal_include_set_difference((cfg, stream) in arb_setup()) {
        let mut bank = ClauseBank::new(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let (n, l) = (cfg.clauses, 2 * cfg.features);
        for (x, y) in &stream {
            let before = bank.include_snapshot();
            let flips = bank.train_step(&cfg.train_params(), x, *y, &mut rng).unwrap();
            let after = bank.include_snapshot();
            let diff: BTreeSet<(usize, bool)> = before
                .iter()
                .zip(&after)
                .enumerate()
                .filter(|(_, (b, a))| b != a)
                .map(|(i, (_, &a))| (i, a))
                .collect();
            let reported: BTreeSet<(usize, bool)> = flips
                .iter()
                .map(|f| ((f.class * n + f.clause) * l + f.literal, f.direction == FlipDirection::Included))
                .collect();
            prop_assert_eq!(reported.len(), flips.len());
            prop_assert_eq!(diff, reported);
        }
    }

    #[test]
    fn scores_are_bounded((cfg, stream) in arb_setup()) {
        let (bank, _) = run(&cfg, &stream);
        for (x, _) in &stream {
            for s in bank.class_scores(x).unwrap() {
                prop_assert!(s.unsigned_abs() as usize <= cfg.clauses / 2);
            }
        }
    }
}
