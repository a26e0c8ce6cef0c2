//! Unification goals, substitutions and decomposition registries.

use std::collections::{BTreeMap, BTreeSet};

use crate::concepts::{
    normalize, parse_concept, particles, reduce, subsumes, Concept, Head, Particle, ParticleSet,
    Role, Vocab,
};
use crate::error::{Error, Result};

/// `lhs ⊑? rhs` with a single-particle right-hand side.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GoalSubsumption {
    pub lhs: ParticleSet,
    pub rhs: Particle,
}

/// A unification problem over a fixed vocabulary.
#[derive(Clone, Debug)]
pub struct Goal {
    pub vocab: Vocab,
    pub subsumptions: Vec<GoalSubsumption>,
}

impl Goal {
    /// Constants occurring in some subsumption.
    pub fn constants(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        for s in &self.subsumptions {
            for p in s.lhs.iter().chain(std::iter::once(&s.rhs)) {
                if let Head::Const(a) = p.head {
                    out.insert(a);
                }
            }
        }
        out
    }

    /// Variables of the goal, in id order.
    pub fn variables(&self) -> impl Iterator<Item = u32> {
        0..self.vocab.num_vars() as u32
    }

    pub fn render_subsumption(&self, s: &GoalSubsumption) -> String {
        format!(
            "{} <= {}",
            self.vocab.render(&s.lhs),
            self.vocab.render_particle(&s.rhs)
        )
    }

    /// One line per subsumption, in goal order.
    pub fn render(&self) -> String {
        self.subsumptions
            .iter()
            .map(|s| self.render_subsumption(s) + "\n")
            .collect()
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

const KEYWORDS: [&str; 4] = ["top", "bot", "and", "all"];

fn name_list(body: &str, line: usize, what: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for part in body.split(',') {
        let name = part.trim();
        if name.is_empty() {
            if body.trim().is_empty() {
                break;
            }
            return Err(Error::Syntax {
                line,
                column: 1,
                message: format!("empty entry in {what} list"),
            });
        }
        if !is_ident(name) || KEYWORDS.contains(&name) {
            return Err(Error::Syntax {
                line,
                column: 1,
                message: format!("`{name}` is not a valid {what} name"),
            });
        }
        out.push(name.to_string());
    }
    Ok(out)
}

fn shift_column(e: Error, offset: usize) -> Error {
    match e {
        Error::Syntax {
            line,
            column,
            message,
        } => Error::Syntax {
            line,
            column: column + offset,
            message,
        },
        other => other,
    }
}

struct RawLine {
    line: usize,
    lhs: Concept,
    rhs: Concept,
    equivalence: bool,
}

/// Parses the line-oriented goal format.
///
/// `vars:` is required, `roles:` is optional, every other identifier is a
/// constant. `C == D` becomes `C <= D` and `D <= C`, and a conjunctive
/// right-hand side yields one subsumption per particle.
pub fn parse_goal(text: &str) -> Result<Goal> {
    let mut vars: Option<Vec<String>> = None;
    let mut roles: Vec<String> = Vec::new();
    let mut raw = Vec::new();
    for (i, full) in text.lines().enumerate() {
        let line = i + 1;
        let body = strip_comment(full);
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("vars:") {
            if vars.is_some() {
                return Err(Error::Syntax {
                    line,
                    column: 1,
                    message: "duplicate `vars:` line".into(),
                });
            }
            vars = Some(name_list(rest, line, "variable")?);
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("roles:") {
            roles.extend(name_list(rest, line, "role")?);
            continue;
        }
        let (pos, equivalence) = match (body.find("<="), body.find("==")) {
            (Some(a), Some(b)) => (a.min(b), b < a),
            (Some(a), None) => (a, false),
            (None, Some(b)) => (b, true),
            (None, None) => {
                return Err(Error::Syntax {
                    line,
                    column: 1,
                    message: "expected `<=` or `==`".into(),
                })
            }
        };
        let lhs = parse_concept(&body[..pos]).map_err(|e| e.at_line(line))?;
        let rhs = parse_concept(&body[pos + 2..])
            .map_err(|e| shift_column(e.at_line(line), body[..pos + 2].chars().count()))?;
        raw.push(RawLine {
            line,
            lhs,
            rhs,
            equivalence,
        });
    }
    let vars = vars.ok_or_else(|| Error::Input("missing `vars:` line".into()))?;
    let var_set: BTreeSet<&str> = vars.iter().map(String::as_str).collect();
    if var_set.len() != vars.len() {
        return Err(Error::Input("duplicate variable in `vars:` line".into()));
    }
    let mut names = BTreeSet::new();
    let mut role_names: BTreeSet<String> = roles.into_iter().collect();
    for r in &raw {
        for c in [&r.lhs, &r.rhs] {
            c.names(&mut names);
            c.roles(&mut role_names);
        }
    }
    let consts: Vec<String> = names
        .into_iter()
        .filter(|n| !var_set.contains(n.as_str()))
        .collect();
    let vocab = Vocab::new(role_names, consts, vars.iter().cloned());
    let mut subsumptions = Vec::new();
    for r in &raw {
        let lhs = normalize(&r.lhs, &vocab).map_err(|e| e.at_line(r.line))?;
        let rhs_raw = particles(&r.rhs, &vocab).map_err(|e| e.at_line(r.line))?;
        let rhs = reduce(rhs_raw.iter().cloned());
        push_split(&mut subsumptions, &lhs, &rhs, &rhs_raw);
        if r.equivalence {
            let lhs_raw = particles(&r.lhs, &vocab).map_err(|e| e.at_line(r.line))?;
            push_split(&mut subsumptions, &rhs, &lhs, &lhs_raw);
        }
    }
    Ok(Goal {
        vocab,
        subsumptions,
    })
}

/// Emits `lhs ⊑? P` for each `P` of the reduced `rhs`, in source order.
fn push_split(
    out: &mut Vec<GoalSubsumption>,
    lhs: &ParticleSet,
    rhs: &ParticleSet,
    order: &[Particle],
) {
    let mut seen = BTreeSet::new();
    for p in order {
        if rhs.contains(p) && seen.insert(p) {
            out.push(GoalSubsumption {
                lhs: lhs.clone(),
                rhs: p.clone(),
            });
        }
    }
}

/// One subgoal per occurring constant, with every other constant replaced by
/// `⊤`. Goals with at most one constant come back unchanged.
pub fn split_by_constant(g: &Goal) -> Vec<Goal> {
    let consts = g.constants();
    if consts.len() <= 1 {
        return vec![g.clone()];
    }
    consts
        .iter()
        .map(|&a| {
            let keep = |p: &Particle| match p.head {
                Head::Const(b) => b == a,
                _ => true,
            };
            let subsumptions = g
                .subsumptions
                .iter()
                .filter(|s| keep(&s.rhs))
                .map(|s| GoalSubsumption {
                    lhs: reduce(s.lhs.iter().filter(|p| keep(p)).cloned()),
                    rhs: s.rhs.clone(),
                })
                .collect();
            Goal {
                vocab: g.vocab.clone(),
                subsumptions,
            }
        })
        .collect()
}

/// Ground images per variable id; missing variables stand for `⊤`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<u32, ParticleSet>,
}

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn get(&self, x: u32) -> Option<&ParticleSet> {
        self.map.get(&x)
    }

    /// The image of `x`, `⊤` when unmapped.
    pub fn image(&self, x: u32) -> ParticleSet {
        self.map.get(&x).cloned().unwrap_or_default()
    }

    pub fn insert(&mut self, x: u32, image: ParticleSet) {
        self.map.insert(x, image);
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &ParticleSet)> + '_ {
        self.map.iter().map(|(k, v)| (*k, v))
    }

    pub fn is_ground(&self) -> bool {
        self.map.values().all(ParticleSet::is_ground)
    }

    /// Largest particle depth over all images.
    pub fn depth(&self) -> usize {
        self.map.values().map(ParticleSet::depth).max().unwrap_or(0)
    }

    /// Keeps only the given variables.
    pub fn restrict(&self, vars: impl IntoIterator<Item = u32>) -> Substitution {
        let keep: BTreeSet<u32> = vars.into_iter().collect();
        Substitution {
            map: self
                .map
                .iter()
                .filter(|(k, _)| keep.contains(k))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    /// Substitution file text for `vars`, sorted by name; `⊤` images are
    /// written out as `top`.
    pub fn render(&self, vocab: &Vocab, vars: impl IntoIterator<Item = u32>) -> String {
        let mut lines: Vec<(String, String)> = vars
            .into_iter()
            .map(|x| {
                let img = self.image(x);
                (vocab.var_name(x).to_string(), vocab.render(&img))
            })
            .collect();
        lines.sort();
        lines
            .into_iter()
            .map(|(x, c)| format!("{x} := {c}\n"))
            .collect()
    }
}

impl FromIterator<(u32, ParticleSet)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (u32, ParticleSet)>>(iter: I) -> Self {
        Substitution {
            map: iter.into_iter().collect(),
        }
    }
}

/// Replaces every `∀v.X` by `∀v.σ(X)` and reduces.
pub fn apply_substitution(sigma: &Substitution, s: &ParticleSet) -> ParticleSet {
    let mut out = Vec::new();
    for p in s {
        match p.head {
            Head::Var(x) => {
                if let Some(img) = sigma.get(x) {
                    for q in img {
                        let mut path = p.path.clone();
                        path.extend_from_slice(&q.path);
                        out.push(Particle::new(path, q.head));
                    }
                }
            }
            _ => out.push(p.clone()),
        }
    }
    reduce(out)
}

/// Whether `σ(lhs) ⊑ σ(rhs)` for every subsumption of `g`.
pub fn verify_unifier(g: &Goal, sigma: &Substitution) -> bool {
    g.subsumptions.iter().all(|s| {
        let lhs = apply_substitution(sigma, &s.lhs);
        let rhs = apply_substitution(sigma, &ParticleSet::singleton(s.rhs.clone()));
        subsumes(&lhs, &rhs)
    })
}

/// Per-variable union of images, reduced.
pub fn merge_substitutions<'a, I>(parts: I) -> Substitution
where
    I: IntoIterator<Item = &'a Substitution>,
{
    let mut map: BTreeMap<u32, ParticleSet> = BTreeMap::new();
    for s in parts {
        for (x, img) in s.iter() {
            let merged = match map.get(&x) {
                Some(prev) => prev.meet(img),
                None => img.clone(),
            };
            map.insert(x, merged);
        }
    }
    Substitution { map }
}

/// Display name of the decomposition variable of `base` along `roles`.
pub fn decomposition_name(base: &str, roles: &[&str]) -> String {
    if roles.is_empty() {
        base.to_string()
    } else {
        format!("{base}^{}", roles.join("."))
    }
}

/// Splits `X^r.s` into `("X", ["r", "s"])`.
pub fn split_decomposition_name(name: &str) -> Option<(&str, Vec<&str>)> {
    let (base, rest) = name.split_once('^')?;
    let roles: Vec<&str> = rest.split('.').collect();
    if is_ident(base) && roles.iter().all(|r| is_ident(r)) {
        Some((base, roles))
    } else {
        None
    }
}

/// Decomposition variables: `X^{wr}` has parent `X^w` via role `r`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Registry {
    parent: BTreeMap<u32, (u32, Role)>,
    child: BTreeMap<(u32, Role), u32>,
}

impl Registry {
    pub fn new() -> Self {
        Registry::default()
    }

    /// Registers `child` as the `r`-decomposition of `parent`.
    pub fn insert(&mut self, parent: u32, r: Role, child: u32) -> Result<()> {
        if let Some(&c) = self.child.get(&(parent, r)) {
            if c != child {
                return Err(Error::Input(
                    "two decomposition variables for the same variable and role".into(),
                ));
            }
            return Ok(());
        }
        if self.parent.contains_key(&child) {
            return Err(Error::Input(
                "decomposition variable with two parents".into(),
            ));
        }
        self.parent.insert(child, (parent, r));
        self.child.insert((parent, r), child);
        Ok(())
    }

    pub fn child(&self, x: u32, r: Role) -> Option<u32> {
        self.child.get(&(x, r)).copied()
    }

    pub fn parent(&self, x: u32) -> Option<(u32, Role)> {
        self.parent.get(&x).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    /// `(parent, role, child)` triples in parent order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, Role, u32)> + '_ {
        self.child.iter().map(|(&(x, r), &c)| (x, r, c))
    }
}

fn undeclared(line: usize, kind: &'static str, name: &str) -> Error {
    Error::Undeclared {
        line,
        kind,
        name: name.to_string(),
    }
}

/// Interns the decomposition variable `name` and its prefixes, registering
/// each step. Returns the variable id.
fn intern_decomposition(
    name: &str,
    line: usize,
    vocab: &mut Vocab,
    registry: &mut Registry,
) -> Result<u32> {
    if let Some(x) = vocab.var(name) {
        if split_decomposition_name(name).is_none() {
            return Ok(x);
        }
    }
    let (base, roles) =
        split_decomposition_name(name).ok_or_else(|| undeclared(line, "variable", name))?;
    let mut cur = vocab
        .var(base)
        .ok_or_else(|| undeclared(line, "variable", base))?;
    for i in 0..roles.len() {
        let r = vocab
            .role(roles[i])
            .ok_or_else(|| undeclared(line, "role", roles[i]))?;
        let child_name = decomposition_name(base, &roles[..=i]);
        let child = vocab.add_var(&child_name);
        registry.insert(cur, r, child)?;
        cur = child;
    }
    Ok(cur)
}

/// Parses `X := concept` lines. Left-hand sides may name decomposition
/// variables such as `X^r.s`, which are interned into `vocab`. Images must
/// be ground; unknown constants and roles are added to `vocab`.
pub fn parse_substitution(text: &str, vocab: &mut Vocab) -> Result<Substitution> {
    let mut registry = Registry::new();
    let mut out = Substitution::new();
    for (i, full) in text.lines().enumerate() {
        let line = i + 1;
        let body = strip_comment(full);
        if body.trim().is_empty() {
            continue;
        }
        let (lhs, rhs) = body.split_once(":=").ok_or_else(|| Error::Syntax {
            line,
            column: 1,
            message: "expected `:=`".into(),
        })?;
        let x = intern_decomposition(lhs.trim(), line, vocab, &mut registry)?;
        let offset = lhs.chars().count() + 2;
        let ast = parse_concept(rhs).map_err(|e| shift_column(e.at_line(line), offset))?;
        let mut names = BTreeSet::new();
        ast.names(&mut names);
        for n in &names {
            if vocab.var(n).is_some() {
                return Err(Error::Input(format!(
                    "line {line}: image mentions variable `{n}`; substitutions must be ground"
                )));
            }
            vocab.add_const(n);
        }
        let mut roles = BTreeSet::new();
        ast.roles(&mut roles);
        for r in &roles {
            vocab.add_role(r);
        }
        let img = normalize(&ast, vocab).map_err(|e| e.at_line(line))?;
        if out.get(x).is_some() {
            return Err(Error::Input(format!(
                "line {line}: variable `{}` assigned twice",
                vocab.var_name(x)
            )));
        }
        out.insert(x, img);
    }
    Ok(out)
}

/// Parses a registry sidecar: one decomposition variable name per line.
/// Prefixes are registered too, so `X^r.s` also registers `X^r`.
pub fn parse_registry(text: &str, vocab: &mut Vocab) -> Result<Registry> {
    let mut registry = Registry::new();
    for (i, full) in text.lines().enumerate() {
        let name = strip_comment(full).trim();
        if name.is_empty() {
            continue;
        }
        if split_decomposition_name(name).is_none() {
            return Err(Error::Syntax {
                line: i + 1,
                column: 1,
                message: format!("`{name}` is not a decomposition variable name"),
            });
        }
        intern_decomposition(name, i + 1, vocab, &mut registry)?;
    }
    Ok(registry)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE_ONE: &str = "vars: X\nall r.B and X <= all r.X and A\n";

    fn set(g: &Goal, text: &str) -> ParticleSet {
        normalize(&parse_concept(text).unwrap(), &g.vocab).unwrap()
    }

    #[test]
    fn conjunctive_rhs_splits() {
        let g = parse_goal("vars: X\nX <= all r.X and A\n").unwrap();
        assert_eq!(g.render(), "X <= all r.X\nX <= A\n");
    }

    #[test]
    fn equivalence_expands_twice() {
        let g = parse_goal("vars:\nA == A\n").unwrap();
        assert_eq!(g.subsumptions.len(), 2);
        assert!(verify_unifier(&g, &Substitution::new()));
    }

    #[test]
    fn top_rhs_is_dropped() {
        let g = parse_goal("vars: X\nX <= top\n").unwrap();
        assert!(g.subsumptions.is_empty());
    }

    #[test]
    fn missing_vars_line_is_an_error() {
        assert!(parse_goal("A <= A\n").is_err());
        assert!(parse_goal("vars: X\nX <= all . A\n").is_err());
    }

    #[test]
    fn syntax_errors_carry_line_and_column() {
        match parse_goal("vars: X\n\nX <= all . A\n") {
            Err(Error::Syntax { line, column, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(column, 10);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn split_example_one() {
        let g = parse_goal(EXAMPLE_ONE).unwrap();
        let parts = split_by_constant(&g);
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].render(), "X <= all r.X\nX <= A\n");
        assert_eq!(parts[1].render(), "X and all r.B <= all r.X\n");
    }

    #[test]
    fn split_keeps_small_goals() {
        let g = parse_goal("vars: X\nX <= A\n").unwrap();
        assert_eq!(split_by_constant(&g).len(), 1);
        let g = parse_goal("vars: X\nX <= all r.X\n").unwrap();
        assert_eq!(split_by_constant(&g).len(), 1);
    }

    #[test]
    fn apply_examples() {
        let g = parse_goal("vars: X\nX <= all r.X and all s.X and A\n").unwrap();
        let x = g.vocab.var("X").unwrap();
        let bot: Substitution = [(x, ParticleSet::bottom())].into_iter().collect();
        assert_eq!(
            g.vocab
                .render(&apply_substitution(&bot, &set(&g, "all r.X"))),
            "all r.bot"
        );
        let top: Substitution = [(x, ParticleSet::top())].into_iter().collect();
        assert_eq!(
            g.vocab
                .render(&apply_substitution(&top, &set(&g, "all r.X and A"))),
            "A"
        );
        let mixed: Substitution = [(x, set(&g, "A and all r.bot"))].into_iter().collect();
        assert_eq!(
            g.vocab
                .render(&apply_substitution(&mixed, &set(&g, "all s.X"))),
            "all s.A and all s.all r.bot"
        );
    }

    #[test]
    fn verify_example_one() {
        let g = parse_goal(EXAMPLE_ONE).unwrap();
        let x = g.vocab.var("X").unwrap();
        let bot: Substitution = [(x, ParticleSet::bottom())].into_iter().collect();
        assert!(verify_unifier(&g, &bot));
        let top: Substitution = [(x, ParticleSet::top())].into_iter().collect();
        assert!(!verify_unifier(&g, &top));
    }

    #[test]
    fn merge_example_one() {
        let g = parse_goal(EXAMPLE_ONE).unwrap();
        let x = g.vocab.var("X").unwrap();
        let a: Substitution = [(x, ParticleSet::bottom())].into_iter().collect();
        let b: Substitution = [(x, set(&g, "B"))].into_iter().collect();
        let m = merge_substitutions([&a, &b]);
        assert!(m.image(x).is_bottom());
        assert_eq!(merge_substitutions([&b]), b);
    }

    #[test]
    fn substitution_file_round_trip() {
        let mut g = parse_goal("vars: X, Y\nX <= all r.Y and A\n").unwrap();
        let s = parse_substitution("X := all r.bot and A\nX^r := bot\n", &mut g.vocab).unwrap();
        let xr = g.vocab.var("X^r").unwrap();
        assert!(s.image(xr).is_bottom());
        let text = s.render(&g.vocab, s.iter().map(|(x, _)| x).collect::<Vec<_>>());
        assert_eq!(text, "X := A and all r.bot\nX^r := bot\n");
        assert!(parse_substitution("X := Y\n", &mut g.vocab).is_err());
        assert!(parse_substitution("W := A\n", &mut g.vocab).is_err());
    }

    #[test]
    fn registry_is_prefix_closed() {
        let mut g = parse_goal("vars: X\nX <= all r.all s.X\n").unwrap();
        let reg = parse_registry("X^r.s\n", &mut g.vocab).unwrap();
        let x = g.vocab.var("X").unwrap();
        let r = g.vocab.role("r").unwrap();
        let s = g.vocab.role("s").unwrap();
        let xr = reg.child(x, r).unwrap();
        assert_eq!(g.vocab.var_name(xr), "X^r");
        let xrs = reg.child(xr, s).unwrap();
        assert_eq!(g.vocab.var_name(xrs), "X^r.s");
        assert_eq!(reg.parent(xrs), Some((xr, s)));
        assert_eq!(reg.len(), 2);
    }
}
