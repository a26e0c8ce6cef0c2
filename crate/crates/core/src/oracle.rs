//! Brute-force unifiability over bounded ground images.
//!
//! Independent of the normalizer and shortcut machinery: it only uses
//! `reduce`, `subsumes` and substitution application.

use crate::concepts::{reduce, subsumes, Head, Particle, ParticleSet, Role};
use crate::error::{Error, Result};
use crate::goal::{apply_substitution, Goal, Substitution};

/// Default cap on partial assignments visited by one search.
pub const DEFAULT_NODE_CAP: u64 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBounds {
    /// Longest role path in an image particle.
    pub max_depth: usize,
    /// Most particles in one image.
    pub max_width: usize,
}

impl OracleBounds {
    pub fn new(max_depth: usize, max_width: usize) -> Result<Self> {
        if max_width == 0 {
            return Err(Error::Input("oracle width must be at least 1".into()));
        }
        Ok(OracleBounds {
            max_depth,
            max_width,
        })
    }
}

/// Every reduced image with at most `max_width` particles of depth at most
/// `max_depth`, in a fixed order, each once. Includes `⊤` and `⊥`.
pub fn enumerate_images(roles: &[Role], constants: &[u32], b: OracleBounds) -> Vec<ParticleSet> {
    let mut heads: Vec<Head> = constants.iter().map(|&a| Head::Const(a)).collect();
    heads.push(Head::Bot);
    let mut alphabet = Vec::new();
    let mut paths: Vec<Vec<Role>> = vec![Vec::new()];
    for d in 0..=b.max_depth {
        for path in paths.iter().filter(|p| p.len() == d) {
            for &h in &heads {
                alphabet.push(Particle::new(path.clone(), h));
            }
        }
        if d < b.max_depth {
            let next: Vec<Vec<Role>> = paths
                .iter()
                .filter(|p| p.len() == d)
                .flat_map(|p| {
                    roles.iter().map(move |&r| {
                        let mut q = p.clone();
                        q.push(r);
                        q
                    })
                })
                .collect();
            paths.extend(next);
        }
    }
    let mut out = vec![ParticleSet::top()];
    let mut chosen = Vec::new();
    combinations(&alphabet, 0, b.max_width, &mut chosen, &mut out);
    out
}

fn combinations(
    alphabet: &[Particle],
    from: usize,
    left: usize,
    chosen: &mut Vec<Particle>,
    out: &mut Vec<ParticleSet>,
) {
    if left == 0 {
        return;
    }
    for i in from..alphabet.len() {
        chosen.push(alphabet[i].clone());
        let set = reduce(chosen.iter().cloned());
        if set.len() == chosen.len() {
            out.push(set);
            combinations(alphabet, i + 1, left - 1, chosen, out);
        }
        chosen.pop();
    }
}

/// Result of a bounded search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleVerdict {
    Witness(Substitution),
    /// Nothing found within the bounds; not a refutation.
    NoneWithinBounds,
}

pub fn brute_force_unifiable(g: &Goal, b: OracleBounds) -> Result<OracleVerdict> {
    brute_force_unifiable_with(g, b, DEFAULT_NODE_CAP)
}

/// Assigns variables in id order and checks each subsumption as soon as all
/// of its variables are assigned.
pub fn brute_force_unifiable_with(g: &Goal, b: OracleBounds, cap: u64) -> Result<OracleVerdict> {
    let roles: Vec<Role> = g.vocab.roles().collect();
    let constants: Vec<u32> = (0..g.vocab.num_consts() as u32).collect();
    let images = enumerate_images(&roles, &constants, b);
    let n = g.vocab.num_vars();
    // Subsumptions grouped by the largest variable they mention.
    let mut ready: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for (i, s) in g.subsumptions.iter().enumerate() {
        let last = s
            .lhs
            .iter()
            .chain(std::iter::once(&s.rhs))
            .filter_map(|p| match p.head {
                Head::Var(x) => Some(x as usize + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        ready[last].push(i);
    }
    let mut search = Search {
        g,
        images: &images,
        ready: &ready,
        sigma: Substitution::new(),
        nodes: 0,
        cap,
    };
    if !search.holds(0) {
        return Ok(OracleVerdict::NoneWithinBounds);
    }
    if search.assign(0, n)? {
        Ok(OracleVerdict::Witness(search.sigma))
    } else {
        Ok(OracleVerdict::NoneWithinBounds)
    }
}

struct Search<'a> {
    g: &'a Goal,
    images: &'a [ParticleSet],
    ready: &'a [Vec<usize>],
    sigma: Substitution,
    nodes: u64,
    cap: u64,
}

impl Search<'_> {
    fn holds(&self, level: usize) -> bool {
        self.ready[level].iter().all(|&i| {
            let s = &self.g.subsumptions[i];
            let lhs = apply_substitution(&self.sigma, &s.lhs);
            let rhs = apply_substitution(&self.sigma, &ParticleSet::singleton(s.rhs.clone()));
            subsumes(&lhs, &rhs)
        })
    }

    fn assign(&mut self, x: usize, n: usize) -> Result<bool> {
        if x == n {
            return Ok(true);
        }
        for image in self.images {
            self.nodes += 1;
            if self.nodes > self.cap {
                return Err(Error::Resource(format!(
                    "oracle visited more than {} assignments",
                    self.cap
                )));
            }
            self.sigma.insert(x as u32, image.clone());
            if self.holds(x + 1) && self.assign(x + 1, n)? {
                return Ok(true);
            }
        }
        self.sigma.insert(x as u32, ParticleSet::top());
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::goal::{parse_goal, verify_unifier};

    fn b(d: usize, w: usize) -> OracleBounds {
        OracleBounds::new(d, w).unwrap()
    }

    #[test]
    fn tiny_enumerations() {
        let imgs = enumerate_images(&[], &[0], b(0, 1));
        assert_eq!(
            imgs,
            vec![
                ParticleSet::top(),
                ParticleSet::singleton(Particle::bare(Head::Const(0))),
                ParticleSet::bottom(),
            ]
        );
        let imgs = enumerate_images(&[Role(0)], &[], b(1, 1));
        assert_eq!(imgs.len(), 3);
        assert!(imgs.contains(&ParticleSet::singleton(Particle::new(
            vec![Role(0)],
            Head::Bot
        ))));
    }

    #[test]
    fn enumeration_has_no_duplicates() {
        let imgs = enumerate_images(&[Role(0), Role(1)], &[0], b(2, 2));
        let set: std::collections::BTreeSet<_> = imgs.iter().cloned().collect();
        assert_eq!(set.len(), imgs.len());
        assert!(imgs.iter().all(|s| s.len() <= 2 && s.depth() <= 2));
    }

    #[test]
    fn example_goals() {
        let g = parse_goal("vars: X\nall r.B and X <= all r.X and A\n").unwrap();
        match brute_force_unifiable(&g, b(0, 1)).unwrap() {
            OracleVerdict::Witness(w) => {
                assert!(w.image(0).is_bottom());
                assert!(verify_unifier(&g, &w));
            }
            v => panic!("{v:?}"),
        }
        let g = parse_goal("vars: X, Z\nall r.all r.bot <= Z\nZ <= X\nX <= all r.bot\n").unwrap();
        assert_eq!(
            brute_force_unifiable(&g, b(3, 2)).unwrap(),
            OracleVerdict::NoneWithinBounds
        );
        let g = parse_goal("vars: X\nX <= X\n").unwrap();
        match brute_force_unifiable(&g, b(1, 1)).unwrap() {
            OracleVerdict::Witness(w) => assert!(w.image(0).is_top()),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn cap_is_a_resource_error() {
        let g = parse_goal("vars: X, Y\nX and Y <= A\nA <= bot\n").unwrap();
        assert!(matches!(
            brute_force_unifiable_with(&g, b(1, 1), 2),
            Ok(OracleVerdict::NoneWithinBounds)
        ));
        let g = parse_goal("vars: X, Y\nX <= Y\nY <= all r.X and A\n").unwrap();
        assert!(matches!(
            brute_force_unifiable_with(&g, b(2, 2), 3),
            Err(Error::Resource(_))
        ));
    }
}
