//! Concepts in normal form.
//!
//! A concept is kept as a set of particles `∀v.A`, where `v` is a role string
//! and `A` is a constant, a variable, `⊤` or `⊥`. Sets are reduced on
//! construction, so `⊤`-particles and `⊥`-dominated particles never appear.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// Interned role name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Role(pub u32);

/// The innermost symbol of a particle.
///
/// The derived order (`Bot < Const < Var < Top`) is the head-kind component of
/// the canonical particle order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Head {
    Bot,
    Const(u32),
    Var(u32),
    Top,
}

/// A particle `∀v.A`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Particle {
    pub path: Vec<Role>,
    pub head: Head,
}

impl Particle {
    pub fn new(path: Vec<Role>, head: Head) -> Self {
        Particle { path, head }
    }

    pub fn bare(head: Head) -> Self {
        Particle {
            path: Vec::new(),
            head,
        }
    }

    pub fn bot() -> Self {
        Particle::bare(Head::Bot)
    }

    /// Role depth of the particle.
    pub fn size(&self) -> usize {
        self.path.len()
    }

    /// `∀r.self`.
    pub fn under(&self, r: Role) -> Self {
        let mut path = Vec::with_capacity(self.path.len() + 1);
        path.push(r);
        path.extend_from_slice(&self.path);
        Particle {
            path,
            head: self.head,
        }
    }

    pub fn is_ground(&self) -> bool {
        !matches!(self.head, Head::Var(_))
    }
}

/// `u ≤ v` in the prefix order on role strings.
pub fn role_prefix(u: &[Role], v: &[Role]) -> bool {
    u.len() <= v.len() && v[..u.len()] == *u
}

/// `u < v` in the prefix order on role strings.
pub fn proper_role_prefix(u: &[Role], v: &[Role]) -> bool {
    u.len() < v.len() && v[..u.len()] == *u
}

/// Whether `p` is a prefix of `q`: `∀v.⊥` before `∀v'.⊥` with `v < v'`, or
/// before `∀v'.A` with `v ≤ v'` and `A` a constant.
pub fn is_prefix(p: &Particle, q: &Particle) -> bool {
    if p.head != Head::Bot {
        return false;
    }
    match q.head {
        Head::Bot => proper_role_prefix(&p.path, &q.path),
        Head::Const(_) => role_prefix(&p.path, &q.path),
        _ => false,
    }
}

/// A reduced set of particles; the empty set is `⊤`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParticleSet(BTreeSet<Particle>);

impl ParticleSet {
    pub fn top() -> Self {
        ParticleSet(BTreeSet::new())
    }

    pub fn bottom() -> Self {
        ParticleSet(BTreeSet::from([Particle::bot()]))
    }

    pub fn singleton(p: Particle) -> Self {
        reduce([p])
    }

    pub fn is_top(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_bottom(&self) -> bool {
        self.0.len() == 1 && self.0.contains(&Particle::bot())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, p: &Particle) -> bool {
        self.0.contains(p)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Particle> + '_ {
        self.0.iter()
    }

    pub fn is_ground(&self) -> bool {
        self.0.iter().all(Particle::is_ground)
    }

    /// Maximum role depth of a member, 0 for `⊤`.
    pub fn depth(&self) -> usize {
        self.0.iter().map(Particle::size).max().unwrap_or(0)
    }

    /// Conjunction with `other`.
    pub fn meet(&self, other: &ParticleSet) -> ParticleSet {
        reduce(self.0.iter().chain(other.0.iter()).cloned())
    }

    /// `∀r.self`.
    pub fn under(&self, r: Role) -> ParticleSet {
        ParticleSet(self.0.iter().map(|p| p.under(r)).collect())
    }
}

impl<'a> IntoIterator for &'a ParticleSet {
    type Item = &'a Particle;
    type IntoIter = std::collections::btree_set::Iter<'a, Particle>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl FromIterator<Particle> for ParticleSet {
    fn from_iter<I: IntoIterator<Item = Particle>>(iter: I) -> Self {
        reduce(iter)
    }
}

/// Deletes `⊤`-particles and every particle dominated by a `⊥`-particle.
pub fn reduce<I: IntoIterator<Item = Particle>>(particles: I) -> ParticleSet {
    let set: BTreeSet<Particle> = particles
        .into_iter()
        .filter(|p| p.head != Head::Top)
        .collect();
    if set.contains(&Particle::bot()) {
        return ParticleSet::bottom();
    }
    let bots: Vec<Vec<Role>> = set
        .iter()
        .filter(|p| p.head == Head::Bot)
        .map(|p| p.path.clone())
        .collect();
    if bots.is_empty() {
        return ParticleSet(set);
    }
    let kept = set
        .into_iter()
        .filter(|p| {
            !bots.iter().any(|b| match p.head {
                Head::Bot => proper_role_prefix(b, &p.path),
                _ => role_prefix(b, &p.path),
            })
        })
        .collect();
    ParticleSet(kept)
}

/// `c ⊑ d` for ground reduced sets: every particle of `d` is in `c` or is a
/// constant- or `⊥`-particle below some `⊥`-particle of `c`.
pub fn subsumes(c: &ParticleSet, d: &ParticleSet) -> bool {
    d.iter().all(|q| {
        c.contains(q)
            || (matches!(q.head, Head::Const(_) | Head::Bot)
                && c.iter()
                    .any(|p| p.head == Head::Bot && role_prefix(&p.path, &q.path)))
    })
}

/// Names of roles, constants and variables.
///
/// Ids are handed out in sorted order by [`Vocab::new`], so the derived
/// particle order coincides with the lexicographic order on names until
/// names are added later.
#[derive(Clone, Debug, Default)]
pub struct Vocab {
    roles: Vec<String>,
    consts: Vec<String>,
    vars: Vec<String>,
    role_ix: HashMap<String, u32>,
    const_ix: HashMap<String, u32>,
    var_ix: HashMap<String, u32>,
}

fn sorted_unique<I, S>(names: I) -> Vec<String>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let set: BTreeSet<String> = names.into_iter().map(Into::into).collect();
    set.into_iter().collect()
}

fn push_name(list: &mut Vec<String>, ix: &mut HashMap<String, u32>, name: &str) -> u32 {
    if let Some(&i) = ix.get(name) {
        return i;
    }
    let i = list.len() as u32;
    list.push(name.to_string());
    ix.insert(name.to_string(), i);
    i
}

impl Vocab {
    pub fn new<R, C, V, S1, S2, S3>(roles: R, consts: C, vars: V) -> Self
    where
        R: IntoIterator<Item = S1>,
        C: IntoIterator<Item = S2>,
        V: IntoIterator<Item = S3>,
        S1: Into<String>,
        S2: Into<String>,
        S3: Into<String>,
    {
        let mut v = Vocab::default();
        for r in sorted_unique(roles) {
            v.add_role(&r);
        }
        for c in sorted_unique(consts) {
            v.add_const(&c);
        }
        for x in sorted_unique(vars) {
            v.add_var(&x);
        }
        v
    }

    pub fn add_role(&mut self, name: &str) -> Role {
        Role(push_name(&mut self.roles, &mut self.role_ix, name))
    }

    pub fn add_const(&mut self, name: &str) -> u32 {
        push_name(&mut self.consts, &mut self.const_ix, name)
    }

    pub fn add_var(&mut self, name: &str) -> u32 {
        push_name(&mut self.vars, &mut self.var_ix, name)
    }

    pub fn role(&self, name: &str) -> Option<Role> {
        self.role_ix.get(name).copied().map(Role)
    }

    pub fn constant(&self, name: &str) -> Option<u32> {
        self.const_ix.get(name).copied()
    }

    pub fn var(&self, name: &str) -> Option<u32> {
        self.var_ix.get(name).copied()
    }

    pub fn role_name(&self, r: Role) -> &str {
        &self.roles[r.0 as usize]
    }

    pub fn const_name(&self, c: u32) -> &str {
        &self.consts[c as usize]
    }

    pub fn var_name(&self, x: u32) -> &str {
        &self.vars[x as usize]
    }

    pub fn roles(&self) -> impl Iterator<Item = Role> + '_ {
        (0..self.roles.len() as u32).map(Role)
    }

    pub fn num_roles(&self) -> usize {
        self.roles.len()
    }

    pub fn num_consts(&self) -> usize {
        self.consts.len()
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    fn sort_key(&self, p: &Particle) -> (Vec<String>, u8, String) {
        let path = p
            .path
            .iter()
            .map(|r| self.role_name(*r).to_string())
            .collect();
        let (kind, name) = match p.head {
            Head::Bot => (0, String::new()),
            Head::Const(c) => (1, self.const_name(c).to_string()),
            Head::Var(x) => (2, self.var_name(x).to_string()),
            Head::Top => (3, String::new()),
        };
        (path, kind, name)
    }

    pub fn render_particle(&self, p: &Particle) -> String {
        let mut out = String::new();
        for r in &p.path {
            out.push_str("all ");
            out.push_str(self.role_name(*r));
            out.push('.');
        }
        match p.head {
            Head::Bot => out.push_str("bot"),
            Head::Top => out.push_str("top"),
            Head::Const(c) => out.push_str(self.const_name(c)),
            Head::Var(x) => out.push_str(self.var_name(x)),
        }
        out
    }

    /// Canonical rendering: particles sorted by (path, head kind, head name)
    /// and joined with `and`; `⊤` renders as `top`.
    pub fn render<'a, I>(&self, particles: I) -> String
    where
        I: IntoIterator<Item = &'a Particle>,
    {
        let mut items: Vec<&Particle> = particles.into_iter().collect();
        if items.is_empty() {
            return "top".to_string();
        }
        items.sort_by_cached_key(|p| self.sort_key(p));
        items
            .iter()
            .map(|p| self.render_particle(p))
            .collect::<Vec<_>>()
            .join(" and ")
    }
}

/// Concept syntax tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Concept {
    Top,
    Bot,
    Name(String),
    And(Vec<Concept>),
    All(String, Box<Concept>),
}

impl Concept {
    /// Concept names occurring in the tree.
    pub fn names(&self, out: &mut BTreeSet<String>) {
        match self {
            Concept::Name(n) => {
                out.insert(n.clone());
            }
            Concept::And(cs) => cs.iter().for_each(|c| c.names(out)),
            Concept::All(_, c) => c.names(out),
            Concept::Top | Concept::Bot => {}
        }
    }

    /// Role names occurring in the tree.
    pub fn roles(&self, out: &mut BTreeSet<String>) {
        match self {
            Concept::All(r, c) => {
                out.insert(r.clone());
                c.roles(out);
            }
            Concept::And(cs) => cs.iter().for_each(|c| c.roles(out)),
            _ => {}
        }
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Concept::Top => write!(f, "top"),
            Concept::Bot => write!(f, "bot"),
            Concept::Name(n) => write!(f, "{n}"),
            Concept::And(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " and ")?;
                    }
                    match c {
                        Concept::And(_) => write!(f, "({c})")?,
                        _ => write!(f, "{c}")?,
                    }
                }
                Ok(())
            }
            Concept::All(r, c) => match **c {
                Concept::And(_) => write!(f, "all {r}.({c})"),
                _ => write!(f, "all {r}.{c}"),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Top,
    Bot,
    And,
    All,
    Dot,
    LParen,
    RParen,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic()
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn syntax(column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line: 1,
        column,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c == '.' {
            out.push((Tok::Dot, col));
            i += 1;
        } else if c == '(' {
            out.push((Tok::LParen, col));
            i += 1;
        } else if c == ')' {
            out.push((Tok::RParen, col));
            i += 1;
        } else if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let tok = match word.as_str() {
                "top" => Tok::Top,
                "bot" => Tok::Bot,
                "and" => Tok::And,
                "all" => Tok::All,
                _ => Tok::Ident(word),
            };
            out.push((tok, col));
        } else {
            return Err(syntax(col, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map(|(_, c)| *c).unwrap_or(self.end)
    }

    fn concept(&mut self) -> Result<Concept> {
        let mut parts = vec![self.atom()?];
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            parts.push(self.atom()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().expect("one part")
        } else {
            Concept::And(parts)
        })
    }

    fn atom(&mut self) -> Result<Concept> {
        let col = self.column();
        let tok = self.peek().cloned();
        match tok {
            Some(Tok::Top) => {
                self.pos += 1;
                Ok(Concept::Top)
            }
            Some(Tok::Bot) => {
                self.pos += 1;
                Ok(Concept::Bot)
            }
            Some(Tok::Ident(n)) => {
                self.pos += 1;
                Ok(Concept::Name(n))
            }
            Some(Tok::All) => {
                self.pos += 1;
                let role = match self.peek().cloned() {
                    Some(Tok::Ident(r)) => r,
                    _ => return Err(syntax(self.column(), "expected a role name after `all`")),
                };
                self.pos += 1;
                if self.peek() != Some(&Tok::Dot) {
                    return Err(syntax(self.column(), "expected `.` after the role name"));
                }
                self.pos += 1;
                let body = self.atom()?;
                Ok(Concept::All(role, Box::new(body)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.concept()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(syntax(self.column(), "expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(t) => Err(syntax(col, format!("unexpected {}", describe(&t)))),
            None => Err(syntax(col, "unexpected end of input")),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(n) => format!("identifier `{n}`"),
        Tok::Top => "`top`".into(),
        Tok::Bot => "`bot`".into(),
        Tok::And => "`and`".into(),
        Tok::All => "`all`".into(),
        Tok::Dot => "`.`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
    }
}

/// Parses the concept grammar. Errors carry a 1-based column; callers that
/// know the line number patch it in.
pub fn parse_concept(text: &str) -> Result<Concept> {
    let toks = tokenize(text)?;
    let end = text.chars().count() + 1;
    let mut p = Parser { toks, pos: 0, end };
    let c = p.concept()?;
    if p.pos != p.toks.len() {
        let col = p.column();
        let t = p.toks[p.pos].0.clone();
        return Err(syntax(col, format!("unexpected {}", describe(&t))));
    }
    Ok(c)
}

/// Brings `c` into reduced normal form. Names resolve to variables first,
/// then constants; unknown names and roles are errors.
pub fn normalize(c: &Concept, vocab: &Vocab) -> Result<ParticleSet> {
    Ok(reduce(particles(c, vocab)?))
}

/// The particles of `c` in source order, unreduced.
pub fn particles(c: &Concept, vocab: &Vocab) -> Result<Vec<Particle>> {
    let mut out = Vec::new();
    collect(c, vocab, &mut Vec::new(), &mut out)?;
    Ok(out)
}

fn collect(
    c: &Concept,
    vocab: &Vocab,
    path: &mut Vec<Role>,
    out: &mut Vec<Particle>,
) -> Result<()> {
    match c {
        Concept::Top => {}
        Concept::Bot => out.push(Particle::new(path.clone(), Head::Bot)),
        Concept::Name(n) => {
            let head = if let Some(x) = vocab.var(n) {
                Head::Var(x)
            } else if let Some(a) = vocab.constant(n) {
                Head::Const(a)
            } else {
                return Err(Error::Undeclared {
                    line: 1,
                    kind: "name",
                    name: n.clone(),
                });
            };
            out.push(Particle::new(path.clone(), head));
        }
        Concept::And(cs) => {
            for c in cs {
                collect(c, vocab, path, out)?;
            }
        }
        Concept::All(r, body) => {
            let role = vocab.role(r).ok_or_else(|| Error::Undeclared {
                line: 1,
                kind: "role",
                name: r.clone(),
            })?;
            path.push(role);
            collect(body, vocab, path, out)?;
            path.pop();
        }
    }
    Ok(())
}
