//! Witness construction.
//!
//! With no flat subsumptions the witness is assembled bottom-up over the
//! decomposition registry. Otherwise particles are created in shortcuts of a
//! successful store: `⊥` in `s^⊥_ini`, the constant in some `s^A_ini`, and
//! every particle sitting at a decomposition variable is pushed one role
//! deeper through a resolver. Prefix obligations are discharged in
//! supporting shortcuts. Dead ends roll back through an undo log.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::concepts::{reduce, subsumes, Head, Particle, ParticleSet, Role};
use crate::error::{Error, Result};
use crate::goal::{verify_unifier, Registry, Substitution};
use crate::normalizer::{Choice, NormalizedGoal};
use crate::shortcuts::{MainDecision, ShortcutStore};

/// Upper bound on particle creations attempted by one construction.
pub const DEFAULT_BUDGET: usize = 200_000;

/// Whether `∀r.P ∈ σ(X)` implies `σ(X^r) ⊑ P` for every registered `X^r`.
pub fn check_decreasing_rule(sigma: &Substitution, registry: &Registry) -> bool {
    registry.iter().all(|(x, r, xr)| {
        let child = sigma.image(xr);
        sigma.image(x).iter().all(|p| match p.path.first() {
            Some(&first) if first == r => {
                let tail = Particle::new(p.path[1..].to_vec(), p.head);
                child.contains(&tail) || subsumes(&child, &ParticleSet::singleton(tail))
            }
            _ => true,
        })
    })
}

/// Witness for a branch whose flat part is empty.
pub fn build_trivial_unifier(ng: &NormalizedGoal) -> Result<Substitution> {
    let n = ng.num_vars();
    let base: Vec<ParticleSet> = (0..n)
        .map(|x| match ng.guess[x] {
            Choice::Bot => ParticleSet::bottom(),
            Choice::Other { a: true } => match ng.constant {
                Some(a) => ParticleSet::singleton(Particle::bare(Head::Const(a))),
                None => ParticleSet::top(),
            },
            _ => ParticleSet::top(),
        })
        .collect();
    let mut gamma = base.clone();
    for _ in 0..=ng.registry.len() + 1 {
        let mut next = base.clone();
        for (x, r, xr) in ng.registry.iter() {
            if matches!(ng.guess[x as usize], Choice::Top | Choice::Bot) {
                continue;
            }
            next[x as usize] = next[x as usize].meet(&gamma[xr as usize].under(r));
        }
        if next == gamma {
            return Ok((0..n as u32)
                .map(|x| (x, gamma[x as usize].clone()))
                .collect());
        }
        gamma = next;
    }
    Err(Error::Defect(
        "trivial unifier did not stabilize within the registry bound".into(),
    ))
}

/// One particle creation.
#[derive(Clone, Debug, Serialize)]
pub struct TraceEntry {
    pub step: usize,
    /// Role depth of the particle, which is the construction round.
    pub depth: usize,
    pub shortcut: usize,
    pub particle: String,
}

/// A constructed witness with its creation log.
#[derive(Clone, Debug)]
pub struct Construction {
    /// Images for every variable of the normalized goal.
    pub witness: Substitution,
    pub trace: Vec<TraceEntry>,
    /// Largest particle depth in the witness.
    pub depth: usize,
}

enum Undo {
    Gamma(usize, Particle),
    Created(Particle, usize),
}

struct Builder<'a> {
    store: &'a ShortcutStore,
    gamma: Vec<BTreeSet<Particle>>,
    created: HashSet<(Particle, usize)>,
    trace: Vec<(Particle, usize)>,
    log: Vec<Undo>,
    budget: usize,
    depth_cap: usize,
}

type Checkpoint = (usize, usize);

impl Builder<'_> {
    fn checkpoint(&self) -> Checkpoint {
        (self.log.len(), self.trace.len())
    }

    fn rollback(&mut self, cp: Checkpoint) {
        while self.log.len() > cp.0 {
            match self.log.pop().expect("nonempty log") {
                Undo::Gamma(b, p) => {
                    self.gamma[b].remove(&p);
                }
                Undo::Created(p, s) => {
                    self.created.remove(&(p, s));
                }
            }
        }
        self.trace.truncate(cp.1);
    }

    fn main(&self, s: usize) -> u64 {
        self.store.shortcuts[s].main
    }

    fn prefix(&self, s: usize) -> u64 {
        self.store.shortcuts[s].prefix
    }

    /// Creates `p` in shortcut `s`: adds it to every main variable,
    /// discharges the prefix obligation and pushes it through resolvers.
    fn create(&mut self, p: Particle, s: usize) -> bool {
        if self.created.contains(&(p.clone(), s)) {
            return true;
        }
        if p.size() > self.depth_cap || self.budget == 0 {
            return false;
        }
        self.budget -= 1;
        self.created.insert((p.clone(), s));
        self.log.push(Undo::Created(p.clone(), s));
        self.trace.push((p.clone(), s));
        let mut m = self.main(s);
        while m != 0 {
            let b = m.trailing_zeros() as usize;
            m &= m - 1;
            if self.gamma[b].insert(p.clone()) {
                self.log.push(Undo::Gamma(b, p.clone()));
            }
        }
        if self.prefix(s) != 0 && !self.discharge(&p, s) {
            return false;
        }
        let roles = self.store.ctx.roles_in(self.main(s));
        for r in 0..64 {
            if roles & (1 << r) == 0 {
                continue;
            }
            let role = Role(r as u32);
            let mut done = false;
            for t in self.store.resolvers_of(s, role) {
                let cp = self.checkpoint();
                if self.create(p.under(role), t) {
                    done = true;
                    break;
                }
                self.rollback(cp);
            }
            if !done {
                return false;
            }
        }
        true
    }

    /// Ensures the prefix part of `s` holds a `⊥`-prefix of `p`, created in
    /// a supporting shortcut. Longer prefixes are tried first.
    fn discharge(&mut self, p: &Particle, s: usize) -> bool {
        let max_len = match p.head {
            Head::Bot if !p.path.is_empty() => p.path.len() - 1,
            Head::Const(_) => p.path.len(),
            _ => return false,
        };
        let supports = self.store.supports_of(s);
        for &t in &supports {
            for len in 0..=max_len {
                let q = Particle::new(p.path[..len].to_vec(), Head::Bot);
                if self.created.contains(&(q, t)) {
                    return true;
                }
            }
        }
        for len in (0..=max_len).rev() {
            for &t in &supports {
                let cp = self.checkpoint();
                if self.create_bottom(&p.path[..len], t) {
                    return true;
                }
                self.rollback(cp);
            }
        }
        false
    }

    /// Creates `∀u.⊥` in `t`, first creating `∀u'.⊥` (with `u = r u'`) in a
    /// shortcut that `t` resolves whenever some main variable of `t` has an
    /// `r`-decomposition.
    fn create_bottom(&mut self, u: &[Role], t: usize) -> bool {
        let target = Particle::new(u.to_vec(), Head::Bot);
        let Some((&r, rest)) = u.split_first() else {
            let ctx = &self.store.ctx;
            return self.main(t) & !ctx.bot == 0 && self.prefix(t) == 0 && self.create(target, t);
        };
        if self.store.ctx.defined(self.main(t), r) == 0 {
            return self.create(target, t);
        }
        for s2 in self.store.resolved_by(t, r) {
            let cp = self.checkpoint();
            if self.create_bottom(rest, s2) && self.create(target.clone(), t) {
                return true;
            }
            self.rollback(cp);
        }
        false
    }
}

/// Builds a witness from a successful main decision and checks it against
/// the normalized goal and the decreasing rule.
pub fn construct_unifier(ng: &NormalizedGoal, decision: &MainDecision) -> Result<Construction> {
    construct_unifier_with(ng, decision, DEFAULT_BUDGET)
}

pub fn construct_unifier_with(
    ng: &NormalizedGoal,
    decision: &MainDecision,
    budget: usize,
) -> Result<Construction> {
    if !decision.success {
        return Err(Error::Input("the main decision did not succeed".into()));
    }
    let store = &decision.store;
    let ctx = &store.ctx;
    let mut b = Builder {
        store,
        gamma: vec![BTreeSet::new(); ctx.num_vars()],
        created: HashSet::new(),
        trace: Vec::new(),
        log: Vec::new(),
        budget,
        depth_cap: store.alive_count(),
    };
    if ctx.bot != 0 {
        let s = decision
            .ini_bot()
            .ok_or_else(|| Error::Defect("missing initial bottom shortcut".into()))?;
        if !b.create(Particle::bot(), s) {
            return Err(construction_failed(&b, "bottom"));
        }
    }
    if ctx.a != 0 {
        let a = ng
            .constant
            .ok_or_else(|| Error::Defect("constant flag without a constant".into()))?;
        let mut placed = false;
        for s in decision.ini_a() {
            let cp = b.checkpoint();
            if b.create(Particle::bare(Head::Const(a)), s) {
                placed = true;
                break;
            }
            b.rollback(cp);
        }
        if !placed {
            return Err(construction_failed(&b, "constant"));
        }
    }
    let mut witness = Substitution::new();
    for (bit, set) in b.gamma.iter().enumerate() {
        if !set.is_empty() {
            witness.insert(ctx.vars[bit], reduce(set.iter().cloned()));
        }
    }
    if !verify_unifier(&ng.as_goal(), &witness) {
        return Err(Error::Defect(
            "constructed substitution does not solve the normalized goal".into(),
        ));
    }
    if !check_decreasing_rule(&witness, &ng.registry) {
        return Err(Error::Defect(
            "constructed substitution breaks the decreasing rule".into(),
        ));
    }
    let mut created = b.trace.clone();
    created.sort_by_key(|(p, _)| p.size());
    let trace: Vec<TraceEntry> = created
        .iter()
        .enumerate()
        .map(|(i, (p, s))| TraceEntry {
            step: i,
            depth: p.size(),
            shortcut: *s,
            particle: ng.vocab.render_particle(p),
        })
        .collect();
    let depth = witness.depth();
    Ok(Construction {
        witness,
        trace,
        depth,
    })
}

fn construction_failed(b: &Builder<'_>, what: &str) -> Error {
    let reason = if b.budget == 0 {
        "budget exhausted"
    } else {
        "no admissible creation order"
    };
    Error::Defect(format!("could not create the {what} particle: {reason}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concepts::{normalize, parse_concept, Vocab};
    use crate::normalizer::NormalizedGoal;

    fn vocab() -> Vocab {
        Vocab::new(["r"], ["A"], ["X", "X^r", "Z", "Z^r"])
    }

    fn set(v: &Vocab, text: &str) -> ParticleSet {
        normalize(&parse_concept(text).unwrap(), v).unwrap()
    }

    fn sub(v: &Vocab, pairs: &[(&str, &str)]) -> Substitution {
        pairs
            .iter()
            .map(|(x, c)| (v.var(x).unwrap(), set(v, c)))
            .collect()
    }

    #[test]
    fn decreasing_rule_rejects_example_two() {
        let v = vocab();
        let mut reg = Registry::new();
        let r = v.role("r").unwrap();
        reg.insert(v.var("Z").unwrap(), r, v.var("Z^r").unwrap())
            .unwrap();
        reg.insert(v.var("X").unwrap(), r, v.var("X^r").unwrap())
            .unwrap();
        let bogus = sub(
            &v,
            &[
                ("Z", "all r.bot"),
                ("Z^r", "top"),
                ("X", "all r.bot"),
                ("X^r", "bot"),
            ],
        );
        assert!(!check_decreasing_rule(&bogus, &reg));
        assert!(check_decreasing_rule(&sub(&v, &[("X", "top")]), &reg));
    }

    #[test]
    fn trivial_unifier_examples() {
        let v = Vocab::new(["r"], ["A"], ["X", "X^r"]);
        let x = v.var("X").unwrap();
        let xr = v.var("X^r").unwrap();
        let r = v.role("r").unwrap();
        let ng = NormalizedGoal::from_parts(
            v.clone(),
            vec![Choice::Bot, Choice::Top],
            vec![],
            vec![],
            None,
        )
        .unwrap();
        let g = build_trivial_unifier(&ng).unwrap();
        assert!(g.image(x).is_bottom());

        let ng = NormalizedGoal::from_parts(
            v.clone(),
            vec![Choice::Other { a: false }, Choice::Top],
            vec![(x, r, xr)],
            vec![],
            None,
        )
        .unwrap();
        let g = build_trivial_unifier(&ng).unwrap();
        assert!(g.iter().all(|(_, s)| s.is_top()));

        let ng = NormalizedGoal::from_parts(
            v.clone(),
            vec![Choice::Other { a: true }, Choice::Bot],
            vec![(x, r, xr)],
            vec![],
            v.constant("A"),
        )
        .unwrap();
        let g = build_trivial_unifier(&ng).unwrap();
        assert_eq!(v.render(&g.image(x)), "A and all r.bot");
        assert!(g.image(xr).is_bottom());
        assert!(verify_unifier(&ng.as_goal(), &g));
        assert!(check_decreasing_rule(&g, &ng.registry));
    }
}
