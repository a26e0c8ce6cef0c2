mod common;

use flbot::concepts::{normalize, parse_concept, reduce, subsumes, Head, Particle, ParticleSet, Role, Vocab};
use flbot::decide::{decide_unification, Options};
use flbot::goal::{apply_substitution, parse_goal, verify_unifier, Substitution};
use proptest::prelude::*;
use rand::SeedableRng;

fn vocab() -> Vocab {
    Vocab::new(["r", "s"], ["A", "B"], ["X", "Y"])
}

fn particle(vars: bool) -> impl Strategy<Value = Particle> {
    let heads = if vars { 5u8 } else { 3 };
    (prop::collection::vec(0u32..2, 0..=3), 0..heads).prop_map(|(path, h)| {
        let head = match h {
            0 => Head::Const(0),
            1 => Head::Const(1),
            2 => Head::Bot,
            3 => Head::Var(0),
            _ => Head::Var(1),
        };
        Particle::new(path.into_iter().map(Role).collect(), head)
    })
}

fn ground() -> impl Strategy<Value = ParticleSet> {
    prop::collection::vec(particle(false), 0..=4).prop_map(reduce)
}

fn open() -> impl Strategy<Value = ParticleSet> {
    prop::collection::vec(particle(true), 0..=4).prop_map(reduce)
}

fn substitution() -> impl Strategy<Value = Substitution> {
    (ground(), ground()).prop_map(|(x, y)| {
        let mut s = Substitution::new();
        s.insert(0, x);
        s.insert(1, y);
        s
    })
}

proptest! {
    #[test]
    fn render_then_parse_is_identity(c in open()) {
        let v = vocab();
        let text = v.render(c.iter());
        let back = normalize(&parse_concept(&text).unwrap(), &v).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn value_restriction_is_monotone(c in ground(), d in ground()) {
        let r = Role(0);
        prop_assert_eq!(subsumes(&c, &d), subsumes(&c.under(r), &d.under(r)));
        prop_assert_eq!(c.meet(&d).under(r), c.under(r).meet(&d.under(r)));
    }

    #[test]
    fn substitution_is_monotone(c in open(), s in substitution(), t in substitution()) {
        // Meeting images pointwise gives a more specific substitution.
        let mut st = Substitution::new();
        for x in 0..2 {
            st.insert(x, s.image(x).meet(&t.image(x)));
        }
        let (a, b) = (apply_substitution(&st, &c), apply_substitution(&s, &c));
        prop_assert!(a.is_ground() && b.is_ground());
        prop_assert!(subsumes(&a, &b));
    }

    #[test]
    fn substitution_distributes_over_meet(c in open(), d in open(), s in substitution()) {
        prop_assert_eq!(
            apply_substitution(&s, &c.meet(&d)),
            apply_substitution(&s, &c).meet(&apply_substitution(&s, &d))
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn positive_verdicts_come_with_a_witness(seed in any::<u64>()) {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let text = common::random_goal(&mut rng);
        let goal = parse_goal(&text).unwrap();
        let outcome = decide_unification(&goal, &Options::default()).unwrap();
        if outcome.unifiable {
            let w = outcome.witness.expect("witness");
            prop_assert!(w.is_ground());
            prop_assert!(verify_unifier(&goal, &w), "{}", text);
        }
    }
}
