#![allow(dead_code)]

use std::path::PathBuf;

use flbot::concepts::Vocab;
use flbot::normalizer::{Choice, FlatSubsumption, NormalizedGoal};
use rand::rngs::StdRng;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub fn other() -> Choice {
    Choice::Other { a: false }
}

pub fn other_a() -> Choice {
    Choice::Other { a: true }
}

/// Normalized goal from names. The constant is `A` when any guess carries it.
pub fn normalized(
    vars: &[(&str, Choice)],
    roles: &[&str],
    increasing: &[(&str, &str, &str)],
    flat: &[(&[&str], &str)],
) -> NormalizedGoal {
    let has_a = vars.iter().any(|v| v.1.a_flag());
    let consts: Vec<&str> = if has_a { vec!["A"] } else { vec![] };
    let vocab = Vocab::new(
        roles.iter().copied(),
        consts,
        vars.iter().map(|v| v.0),
    );
    let mut guess = vec![Choice::Top; vars.len()];
    for (n, c) in vars {
        guess[vocab.var(n).unwrap() as usize] = *c;
    }
    let var = |n: &str| vocab.var(n).unwrap();
    let inc = increasing
        .iter()
        .map(|(x, r, xr)| (var(x), vocab.role(r).unwrap(), var(xr)))
        .collect();
    let flat = flat
        .iter()
        .map(|(l, r)| FlatSubsumption {
            lhs: l.iter().map(|n| var(n)).collect(),
            rhs: var(r),
        })
        .collect();
    let constant = has_a.then(|| vocab.constant("A").unwrap());
    NormalizedGoal::from_parts(vocab.clone(), guess, inc, flat, constant).unwrap()
}

/// Random goal text: at most 3 variables, 2 roles, 1 constant, depth 2.
pub fn random_goal(rng: &mut StdRng) -> String {
    random_goal_with(rng, 3, 2)
}

/// Like [`random_goal`] with up to `lines` subsumptions of up to `width`
/// conjuncts per side.
pub fn random_goal_with(rng: &mut StdRng, lines: usize, width: usize) -> String {
    let nvars = rng.gen_range(1..=3);
    let vars = &["X", "Y", "Z"][..nvars];
    let roles = &["r", "s"][..rng.gen_range(1..=2)];
    let constant = rng.gen_bool(0.7);
    let mut text = format!("vars: {}\nroles: {}\n", vars.join(", "), roles.join(", "));
    for _ in 0..rng.gen_range(1..=lines) {
        let lhs = side(rng, vars, roles, constant, width);
        let rhs = side(rng, vars, roles, constant, width);
        text.push_str(&format!("{lhs} <= {rhs}\n"));
    }
    text
}

fn side(rng: &mut StdRng, vars: &[&str], roles: &[&str], constant: bool, width: usize) -> String {
    let n = rng.gen_range(1..=width);
    (0..n)
        .map(|_| atom(rng, vars, roles, constant, 2))
        .collect::<Vec<_>>()
        .join(" and ")
}

fn atom(rng: &mut StdRng, vars: &[&str], roles: &[&str], constant: bool, depth: usize) -> String {
    let k = rng.gen_range(0..100);
    if depth > 0 && k < 40 {
        let r = roles[rng.gen_range(0..roles.len())];
        return format!("all {r}.{}", atom(rng, vars, roles, constant, depth - 1));
    }
    match k % 10 {
        0 => "bot".into(),
        1 => "top".into(),
        2..=4 if constant => "A".into(),
        _ => vars[rng.gen_range(0..vars.len())].into(),
    }
}
