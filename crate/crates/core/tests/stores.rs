mod common;

use flbot::concepts::Role;
use flbot::goal::{parse_goal, split_by_constant};
use flbot::normalizer::{BranchIter, Normalization, NormalizedGoal};
use flbot::shortcuts::{all_shortcuts, depends_on, main_decision};
use proptest::prelude::*;
use rand::SeedableRng;

fn branches(seed: u64) -> Vec<NormalizedGoal> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let goal = parse_goal(&common::random_goal(&mut rng)).unwrap();
    split_by_constant(&goal)
        .iter()
        .flat_map(|g| {
            BranchIter::new(g)
                .unwrap()
                .take(20)
                .filter_map(|b| match b.unwrap().1 {
                    Normalization::Normalized(ng) => Some(ng),
                    _ => None,
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn store_invariants(seed in any::<u64>()) {
        for ng in branches(seed) {
            let store = all_shortcuts(&ng).unwrap();
            let ctx = &store.ctx;
            for (i, s) in store.shortcuts.iter().enumerate() {
                prop_assert!(ctx.is_shortcut(s));
                prop_assert_eq!(store.stage[i] == 0, ctx.height_zero(s));
                for r in 0..ctx.num_roles() {
                    if ctx.roles_in(s.main) >> r & 1 == 1 {
                        let earlier = store.resolvers_of(i, Role(r as u32));
                        prop_assert!(!earlier.is_empty());
                        prop_assert!(earlier.iter().all(|&j| store.stage[j] < store.stage[i]));
                    }
                }
            }
            for &(a, r, b) in &store.resolve {
                prop_assert!(ctx.resolves(&store.shortcuts[a], &store.shortcuts[b], r));
            }
            for &(a, b) in &store.depend {
                prop_assert!(depends_on(&store.shortcuts[a], &store.shortcuts[b]));
            }
            let d = main_decision(&ng).unwrap();
            prop_assert!(d.passes <= store.len());
            if d.success {
                prop_assert!(d.ini_bot().is_some() || ctx.bot == 0);
            }
        }
    }
}
