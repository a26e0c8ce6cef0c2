//! Shortcuts over a normalized goal and the decision loop built on them.
//!
//! Variables not guessed `⊤` are numbered into bit positions, so a shortcut
//! is a pair of `u64` masks. Resolve edges run from the resolved shortcut to
//! its resolver. Every stored shortcut above stage 0 has a resolver at a
//! strictly smaller stage for each role it needs.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use crate::concepts::Role;
use crate::error::{Error, Result};
use crate::normalizer::{FlatSubsumption, NormalizedGoal};

/// Default cap on the number of enumerated shortcuts.
pub const DEFAULT_MAX_SHORTCUTS: usize = 1 << 20;
/// Default cap on search nodes visited while enumerating.
pub const DEFAULT_MAX_NODES: usize = 1 << 26;

/// A pair `(S, P)` of disjoint variable sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Shortcut {
    pub main: u64,
    pub prefix: u64,
}

impl Shortcut {
    pub fn new(main: u64, prefix: u64) -> Self {
        Shortcut { main, prefix }
    }

    /// `S ∪ P`.
    pub fn span(&self) -> u64 {
        self.main | self.prefix
    }
}

fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let b = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(b)
        }
    })
}

/// Bit-level view of a normalized goal.
#[derive(Clone, Debug)]
pub struct Context {
    /// Variable id per bit.
    pub vars: Vec<u32>,
    bit_of: HashMap<u32, usize>,
    names: Vec<String>,
    role_names: Vec<String>,
    /// `S_ini^⊥`.
    pub bot: u64,
    /// `S_ini^A`.
    pub a: u64,
    flat: Vec<(u64, usize)>,
    flat_by_last: Vec<Vec<usize>>,
    /// Live `r`-decomposition variables, per role id.
    dec: Vec<u64>,
    /// Live variables with a registered `r`-decomposition, per role id.
    def: Vec<u64>,
    parent: Vec<Option<usize>>,
    all_dec: u64,
}

impl Context {
    pub fn new(ng: &NormalizedGoal) -> Result<Self> {
        let vars = ng.live_vars();
        if vars.len() > 64 {
            return Err(Error::Resource(format!(
                "{} live variables; at most 64 are supported",
                vars.len()
            )));
        }
        let bit_of: HashMap<u32, usize> = vars.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let mask_of = |xs: Vec<u32>| xs.iter().fold(0u64, |m, x| m | 1 << bit_of[x]);
        let nroles = ng.vocab.num_roles();
        let mut dec = vec![0u64; nroles];
        let mut def = vec![0u64; nroles];
        let mut parent = vec![None; vars.len()];
        for (x, r, xr) in ng.registry.iter() {
            let Some(&px) = bit_of.get(&x) else {
                if bit_of.contains_key(&xr) {
                    return Err(Error::Input(format!(
                        "decomposition variable `{}` has a `top` parent",
                        ng.vocab.var_name(xr)
                    )));
                }
                continue;
            };
            def[r.0 as usize] |= 1 << px;
            if let Some(&c) = bit_of.get(&xr) {
                dec[r.0 as usize] |= 1 << c;
                parent[c] = Some(px);
            }
        }
        let mut flat = Vec::new();
        let mut flat_by_last = vec![Vec::new(); vars.len()];
        for f in &ng.flat {
            let mut lhs = 0u64;
            for x in &f.lhs {
                let b = *bit_of.get(x).ok_or_else(|| {
                    Error::Input("flat subsumption mentions a `top` variable".into())
                })?;
                lhs |= 1 << b;
            }
            let rhs = *bit_of
                .get(&f.rhs)
                .ok_or_else(|| Error::Input("flat subsumption mentions a `top` variable".into()))?;
            let last = match lhs {
                0 => rhs,
                _ => (63 - lhs.leading_zeros() as usize).max(rhs),
            };
            flat_by_last[last].push(flat.len());
            flat.push((lhs, rhs));
        }
        let all_dec = dec.iter().fold(0, |m, d| m | d);
        Ok(Context {
            names: vars
                .iter()
                .map(|&x| ng.vocab.var_name(x).to_string())
                .collect(),
            role_names: ng
                .vocab
                .roles()
                .map(|r| ng.vocab.role_name(r).to_string())
                .collect(),
            bot: mask_of(ng.bot_vars()),
            a: mask_of(ng.a_vars()),
            vars,
            bit_of,
            flat,
            flat_by_last,
            dec,
            def,
            parent,
            all_dec,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_roles(&self) -> usize {
        self.dec.len()
    }

    pub fn role_name(&self, r: Role) -> &str {
        &self.role_names[r.0 as usize]
    }

    /// Mask of the named variables; `None` if some name is not live.
    pub fn mask(&self, names: &[&str]) -> Option<u64> {
        let mut m = 0;
        for n in names {
            let b = self.names.iter().position(|x| x == n)?;
            m |= 1 << b;
        }
        Some(m)
    }

    /// Mask of variable ids; ids of `⊤` variables are ignored.
    pub fn mask_of_ids(&self, ids: &[u32]) -> u64 {
        ids.iter()
            .filter_map(|x| self.bit_of.get(x))
            .fold(0, |m, b| m | 1 << b)
    }

    pub fn shortcut(&self, main: &[&str], prefix: &[&str]) -> Option<Shortcut> {
        Some(Shortcut::new(self.mask(main)?, self.mask(prefix)?))
    }

    /// Sorted names of the variables in `m`.
    pub fn names(&self, m: u64) -> Vec<String> {
        let mut out: Vec<String> = bits(m).map(|b| self.names[b].clone()).collect();
        out.sort();
        out
    }

    pub fn render(&self, s: &Shortcut) -> String {
        format!(
            "({{{}}}, {{{}}})",
            self.names(s.main).join(", "),
            self.names(s.prefix).join(", ")
        )
    }

    /// Role ids whose decomposition variables occur in `m`, as a mask.
    pub fn roles_in(&self, m: u64) -> u64 {
        self.dec
            .iter()
            .enumerate()
            .filter(|(_, d)| *d & m != 0)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    /// Parents of the `r`-decomposition variables in `m`.
    pub fn parents(&self, m: u64, r: Role) -> u64 {
        bits(m & self.dec[r.0 as usize])
            .map(|b| self.parent[b].expect("decomposition variable has a parent"))
            .fold(0, |acc, p| acc | 1 << p)
    }

    /// Live variables in `m` whose `r`-decomposition is registered.
    pub fn defined(&self, m: u64, r: Role) -> u64 {
        m & self.def[r.0 as usize]
    }

    pub fn satisfies_flat(&self, s: &Shortcut, f: &FlatSubsumption) -> bool {
        let lhs = self.mask_of_ids(&f.lhs);
        let rhs = self.mask_of_ids(&[f.rhs]);
        Self::satisfies(s, lhs, rhs)
    }

    fn satisfies(s: &Shortcut, lhs: u64, rhs: u64) -> bool {
        (s.main & rhs == 0 || lhs & s.span() != 0) && (s.prefix & rhs == 0 || lhs & s.prefix != 0)
    }

    pub fn is_shortcut(&self, s: &Shortcut) -> bool {
        s.main & s.prefix == 0
            && s.main != 0
            && (s.main & self.bot == 0 || (s.main & !self.bot == 0 && s.prefix == 0))
            && self
                .flat
                .iter()
                .all(|&(lhs, rhs)| Self::satisfies(s, lhs, 1 << rhs))
    }

    /// Whether `s2` resolves `s1` with respect to `r`.
    pub fn resolves(&self, s1: &Shortcut, s2: &Shortcut, r: Role) -> bool {
        let d = self.dec[r.0 as usize];
        if s1.main & d == 0 {
            return false;
        }
        let main_parents = self.parents(s1.main, r);
        let prefix_parents = self.parents(s1.prefix, r);
        main_parents & !s2.main == 0
            && prefix_parents & !s2.prefix == 0
            && self.defined(s2.main, r) & !main_parents == 0
            && self.defined(s2.prefix, r) & !prefix_parents == 0
            && (s1.main & !self.bot != 0 || s2.prefix & !self.bot == 0)
    }

    pub fn height_zero(&self, s: &Shortcut) -> bool {
        s.main & self.all_dec == 0
    }
}

/// `P(s1) = S(s2) ∪ P(s2)`.
pub fn depends_on(s1: &Shortcut, s2: &Shortcut) -> bool {
    s1.prefix == s2.span()
}

/// Computed shortcuts with their stages and edges.
#[derive(Clone, Debug)]
pub struct ShortcutStore {
    pub ctx: Context,
    /// Sorted by `(stage, main, prefix)`.
    pub shortcuts: Vec<Shortcut>,
    pub stage: Vec<usize>,
    pub alive: Vec<bool>,
    /// `(s1, r, s2)`: `s2` resolves `s1`. Stages may be equal; the resolver
    /// queries only follow edges with `stage[s2] < stage[s1]`.
    pub resolve: Vec<(usize, Role, usize)>,
    /// `(s, s')`: `s` depends on `s'`.
    pub depend: Vec<(usize, usize)>,
    index: HashMap<Shortcut, usize>,
    resolvers: HashMap<(usize, Role), Vec<usize>>,
    resolved: HashMap<(usize, Role), Vec<usize>>,
    supports: Vec<Vec<usize>>,
}

impl ShortcutStore {
    /// Assembles a store from explicit edges; every shortcut starts alive.
    pub fn from_parts(
        ctx: Context,
        shortcuts: Vec<Shortcut>,
        stage: Vec<usize>,
        resolve: Vec<(usize, Role, usize)>,
        depend: Vec<(usize, usize)>,
    ) -> Self {
        let n = shortcuts.len();
        let index = shortcuts.iter().enumerate().map(|(k, s)| (*s, k)).collect();
        let mut resolvers: HashMap<(usize, Role), Vec<usize>> = HashMap::new();
        let mut resolved: HashMap<(usize, Role), Vec<usize>> = HashMap::new();
        for &(a, r, b) in resolve.iter().filter(|e| stage[e.2] < stage[e.0]) {
            resolvers.entry((a, r)).or_default().push(b);
            resolved.entry((b, r)).or_default().push(a);
        }
        for v in resolvers.values_mut().chain(resolved.values_mut()) {
            v.sort_by_key(|&i| (stage[i], shortcuts[i]));
            v.dedup();
        }
        let mut supports = vec![Vec::new(); n];
        for &(a, b) in &depend {
            supports[a].push(b);
        }
        ShortcutStore {
            ctx,
            shortcuts,
            stage,
            alive: vec![true; n],
            resolve,
            depend,
            index,
            resolvers,
            resolved,
            supports,
        }
    }

    pub fn len(&self) -> usize {
        self.shortcuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shortcuts.is_empty()
    }

    pub fn alive_count(&self) -> usize {
        self.alive.iter().filter(|a| **a).count()
    }

    pub fn index_of(&self, s: &Shortcut) -> Option<usize> {
        self.index.get(s).copied()
    }

    /// Whether `s` is stored and still alive.
    pub fn contains(&self, s: &Shortcut) -> bool {
        self.index_of(s).is_some_and(|i| self.alive[i])
    }

    pub fn alive_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.alive[i])
    }

    /// Alive resolvers of `s` w.r.t. `r` at earlier stages, by `(stage, shortcut)`.
    pub fn resolvers_of(&self, s: usize, r: Role) -> Vec<usize> {
        self.alive_list(self.resolvers.get(&(s, r)))
    }

    /// Alive shortcuts at later stages that `s` resolves w.r.t. `r`.
    pub fn resolved_by(&self, s: usize, r: Role) -> Vec<usize> {
        self.alive_list(self.resolved.get(&(s, r)))
    }

    /// Alive shortcuts `s` depends on.
    pub fn supports_of(&self, s: usize) -> Vec<usize> {
        self.alive_list(Some(&self.supports[s]))
    }

    fn alive_list(&self, v: Option<&Vec<usize>>) -> Vec<usize> {
        v.map(|v| v.iter().copied().filter(|&i| self.alive[i]).collect())
            .unwrap_or_default()
    }

    fn height_zero(&self, i: usize) -> bool {
        self.ctx.height_zero(&self.shortcuts[i])
    }

    /// JSON dump; indices refer to the `shortcuts` array.
    pub fn to_json(&self) -> StoreDump {
        StoreDump {
            shortcuts: (0..self.len())
                .map(|i| ShortcutDump {
                    main: self.ctx.names(self.shortcuts[i].main),
                    prefix: self.ctx.names(self.shortcuts[i].prefix),
                    stage: self.stage[i],
                    alive: self.alive[i],
                })
                .collect(),
            resolve: self
                .resolve
                .iter()
                .map(|&(a, r, b)| (a, self.ctx.role_name(r).to_string(), b))
                .collect(),
            depend: self.depend.clone(),
        }
    }

    /// Graphviz rendering: solid role-labelled resolve edges, dotted
    /// dependency edges, dead shortcuts greyed out.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph shortcuts {\n  rankdir=LR;\n  node [shape=box];\n");
        for i in 0..self.len() {
            let style = if self.alive[i] {
                ""
            } else {
                ", color=gray, fontcolor=gray"
            };
            let label = format!(
                "{} stage {}",
                self.ctx.render(&self.shortcuts[i]),
                self.stage[i]
            );
            let _ = writeln!(
                out,
                "  s{i} [label=\"{}\"{style}];",
                label.replace('"', "\\\"")
            );
        }
        for &(a, r, b) in &self.resolve {
            let _ = writeln!(out, "  s{a} -> s{b} [label=\"{}\"];", self.ctx.role_name(r));
        }
        for &(a, b) in &self.depend {
            let _ = writeln!(out, "  s{a} -> s{b} [style=dotted];");
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ShortcutDump {
    pub main: Vec<String>,
    pub prefix: Vec<String>,
    pub stage: usize,
    pub alive: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StoreDump {
    pub shortcuts: Vec<ShortcutDump>,
    pub resolve: Vec<(usize, String, usize)>,
    pub depend: Vec<(usize, usize)>,
}

/// Limits for [`all_shortcuts`].
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub max_shortcuts: usize,
    pub max_nodes: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_shortcuts: DEFAULT_MAX_SHORTCUTS,
            max_nodes: DEFAULT_MAX_NODES,
        }
    }
}

struct Enumerator<'a> {
    ctx: &'a Context,
    limits: Limits,
    nodes: usize,
    out: Vec<Shortcut>,
}

impl Enumerator<'_> {
    fn walk(&mut self, b: usize, main: u64, prefix: u64) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.limits.max_nodes {
            return Err(Error::Resource(format!(
                "shortcut enumeration visited more than {} nodes",
                self.limits.max_nodes
            )));
        }
        if b == self.ctx.num_vars() {
            if main != 0 {
                if self.out.len() >= self.limits.max_shortcuts {
                    return Err(Error::Resource(format!(
                        "more than {} shortcuts",
                        self.limits.max_shortcuts
                    )));
                }
                self.out.push(Shortcut::new(main, prefix));
            }
            return Ok(());
        }
        let bit = 1u64 << b;
        let in_bot = self.ctx.bot & bit != 0;
        let bot_main = main & self.ctx.bot != 0;
        let other_main = main & !self.ctx.bot != 0;
        let options = [
            (main, prefix, true),
            (
                main | bit,
                prefix,
                if in_bot {
                    !other_main && prefix == 0
                } else {
                    !bot_main
                },
            ),
            (main, prefix | bit, !bot_main),
        ];
        for (m, p, ok) in options {
            if !ok {
                continue;
            }
            let s = Shortcut::new(m, p);
            let fine = self.ctx.flat_by_last[b].iter().all(|&i| {
                let (lhs, rhs) = self.ctx.flat[i];
                Context::satisfies(&s, lhs, 1 << rhs)
            });
            if fine {
                self.walk(b + 1, m, p)?;
            }
        }
        Ok(())
    }
}

/// Every pair passing [`Context::is_shortcut`], in enumeration order.
pub fn enumerate_shortcuts(ctx: &Context, limits: Limits) -> Result<Vec<Shortcut>> {
    let mut e = Enumerator {
        ctx,
        limits,
        nodes: 0,
        out: Vec::new(),
    };
    e.walk(0, 0, 0)?;
    Ok(e.out)
}

/// Stages shortcuts: height 0 first, then in rounds, admitting a shortcut
/// once every role of its decomposition variables has an earlier resolver.
pub fn all_shortcuts(ng: &NormalizedGoal) -> Result<ShortcutStore> {
    all_shortcuts_with(Context::new(ng)?, Limits::default())
}

pub fn all_shortcuts_with(ctx: Context, limits: Limits) -> Result<ShortcutStore> {
    let all = enumerate_shortcuts(&ctx, limits)?;
    let nroles = ctx.num_roles();
    let mut stage: Vec<Option<usize>> = vec![None; all.len()];
    // (role, S ∩ Def_r, P ∩ Def_r) -> stored shortcuts with that signature.
    let mut by_key: HashMap<(usize, u64, u64), Vec<usize>> = HashMap::new();
    let add_key = |by_key: &mut HashMap<(usize, u64, u64), Vec<usize>>, i: usize| {
        let s = all[i];
        for r in 0..nroles {
            let role = Role(r as u32);
            by_key
                .entry((r, ctx.defined(s.main, role), ctx.defined(s.prefix, role)))
                .or_default()
                .push(i);
        }
    };
    let mut pending = Vec::new();
    for (i, s) in all.iter().enumerate() {
        if ctx.height_zero(s) {
            stage[i] = Some(0);
            add_key(&mut by_key, i);
        } else {
            pending.push(i);
        }
    }
    let mut round = 0;
    while !pending.is_empty() {
        round += 1;
        let mut admitted = Vec::new();
        let mut rest = Vec::new();
        for &i in &pending {
            let s = all[i];
            let mut ok = true;
            for r in bits(ctx.roles_in(s.main)) {
                let role = Role(r as u32);
                let key = (r, ctx.parents(s.main, role), ctx.parents(s.prefix, role));
                let found = by_key.get(&key).is_some_and(|v| {
                    v.iter().any(|&j| {
                        stage[j].is_some_and(|st| st < round) && ctx.resolves(&s, &all[j], role)
                    })
                });
                if !found {
                    ok = false;
                    break;
                }
            }
            if ok {
                admitted.push(i);
            } else {
                rest.push(i);
            }
        }
        if admitted.is_empty() {
            break;
        }
        for &i in &admitted {
            stage[i] = Some(round);
            add_key(&mut by_key, i);
        }
        pending = rest;
    }

    let mut order: Vec<usize> = (0..all.len()).filter(|&i| stage[i].is_some()).collect();
    order.sort_by_key(|&i| (stage[i], all[i].main, all[i].prefix));
    let mut new_index = vec![usize::MAX; all.len()];
    for (k, &i) in order.iter().enumerate() {
        new_index[i] = k;
    }
    let shortcuts: Vec<Shortcut> = order.iter().map(|&i| all[i]).collect();
    let stages: Vec<usize> = order.iter().map(|&i| stage[i].expect("stored")).collect();

    // Edges of the whole relation, including ones between equal stages.
    let mut resolve: Vec<(usize, Role, usize)> = Vec::new();
    for &i in &order {
        let s = all[i];
        for r in bits(ctx.roles_in(s.main)) {
            let role = Role(r as u32);
            let key = (r, ctx.parents(s.main, role), ctx.parents(s.prefix, role));
            for &j in by_key.get(&key).into_iter().flatten() {
                if ctx.resolves(&s, &all[j], role) {
                    resolve.push((new_index[i], role, new_index[j]));
                }
            }
        }
    }
    resolve.sort_by_key(|&(a, r, b)| (a, r, stages[b], b));

    let mut by_span: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (k, s) in shortcuts.iter().enumerate() {
        by_span.entry(s.span()).or_default().push(k);
    }
    let mut depend = Vec::new();
    for (k, s) in shortcuts.iter().enumerate() {
        if s.prefix == 0 {
            continue;
        }
        for &t in by_span.get(&s.prefix).into_iter().flatten() {
            depend.push((k, t));
        }
    }

    Ok(ShortcutStore::from_parts(
        ctx, shortcuts, stages, resolve, depend,
    ))
}

/// One sweep removing shortcuts whose prefix part has no alive support.
pub fn check_existence(store: &ShortcutStore) -> ShortcutStore {
    let mut out = store.clone();
    for i in store.alive_indices() {
        if store.shortcuts[i].prefix != 0 && store.supports_of(i).is_empty() {
            out.alive[i] = false;
        }
    }
    out
}

/// One sweep removing shortcuts that miss an alive resolver for some role
/// of their decomposition variables, or cannot reach height 0 along alive
/// resolve edges.
pub fn check_validity(store: &ShortcutStore) -> ShortcutStore {
    let mut out = store.clone();
    let ctx = &store.ctx;
    for i in store.alive_indices() {
        let s = store.shortcuts[i];
        let missing =
            bits(ctx.roles_in(s.main)).any(|r| store.resolvers_of(i, Role(r as u32)).is_empty());
        if missing {
            out.alive[i] = false;
        }
    }
    let mut reach = vec![false; store.len()];
    let mut queue = VecDeque::new();
    for i in store.alive_indices() {
        if store.height_zero(i) {
            reach[i] = true;
            queue.push_back(i);
        }
    }
    let mut back: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(a, _, b) in &store.resolve {
        if store.alive[a] && store.alive[b] && store.stage[b] < store.stage[a] {
            back.entry(b).or_default().push(a);
        }
    }
    while let Some(b) = queue.pop_front() {
        for &a in back.get(&b).into_iter().flatten() {
            if !reach[a] {
                reach[a] = true;
                queue.push_back(a);
            }
        }
    }
    for i in store.alive_indices() {
        if !reach[i] {
            out.alive[i] = false;
        }
    }
    out
}

/// Repeats existence and validity sweeps until nothing changes; returns the
/// pruned store and the number of sweeps that removed something.
pub fn prune_to_fixpoint(store: &ShortcutStore) -> (ShortcutStore, usize) {
    let mut cur = store.clone();
    let mut passes = 0;
    loop {
        let before = cur.alive_count();
        cur = check_validity(&check_existence(&cur));
        if cur.alive_count() == before {
            return (cur, passes);
        }
        passes += 1;
    }
}

/// Which branch of the main loop decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    /// No `⊥`-variables.
    Fl0,
    /// `⊥`-variables but no constant flags.
    Pure,
    Full,
}

/// Outcome of the main loop on one normalized goal.
#[derive(Clone, Debug)]
pub struct MainDecision {
    pub case: Case,
    pub success: bool,
    /// Store after pruning (unpruned in the FL0 case).
    pub store: ShortcutStore,
    /// Total number of computed shortcuts.
    pub computed: usize,
    pub passes: usize,
}

impl MainDecision {
    pub fn ini_bot(&self) -> Option<usize> {
        let ctx = &self.store.ctx;
        if ctx.bot == 0 {
            return None;
        }
        self.store
            .index_of(&Shortcut::new(ctx.bot, 0))
            .filter(|&i| self.store.alive[i])
    }

    /// Alive candidates for `s^A_ini`: main part exactly the flagged
    /// variables, prefix part within the `⊥`-variables.
    pub fn ini_a(&self) -> Vec<usize> {
        let ctx = &self.store.ctx;
        if ctx.a == 0 {
            return Vec::new();
        }
        self.store
            .alive_indices()
            .filter(|&i| {
                let s = self.store.shortcuts[i];
                s.main == ctx.a && s.prefix & !ctx.bot == 0
            })
            .collect()
    }
}

/// Necessary condition checked before enumeration: the initial shortcuts
/// the case needs are at least shortcuts.
fn initial_candidates_exist(ctx: &Context, case: Case) -> bool {
    if case != Case::Fl0 && !ctx.is_shortcut(&Shortcut::new(ctx.bot, 0)) {
        return false;
    }
    if case == Case::Pure {
        return true;
    }
    if ctx.bot.count_ones() > 16 {
        return true;
    }
    // Every subset of the `⊥`-variables as prefix part.
    let mut p = 0u64;
    loop {
        if ctx.is_shortcut(&Shortcut::new(ctx.a, p)) {
            return true;
        }
        if p == ctx.bot {
            return false;
        }
        p = (p.wrapping_sub(ctx.bot)) & ctx.bot;
    }
}

pub fn main_decision(ng: &NormalizedGoal) -> Result<MainDecision> {
    main_decision_with(ng, Limits::default())
}

pub fn main_decision_with(ng: &NormalizedGoal, limits: Limits) -> Result<MainDecision> {
    let ctx = Context::new(ng)?;
    let case = match (ctx.bot == 0, ctx.a == 0) {
        (true, _) => Case::Fl0,
        (false, true) => Case::Pure,
        (false, false) => Case::Full,
    };
    if !initial_candidates_exist(&ctx, case) {
        return Ok(MainDecision {
            case,
            success: false,
            store: ShortcutStore::from_parts(ctx, Vec::new(), Vec::new(), Vec::new(), Vec::new()),
            computed: 0,
            passes: 0,
        });
    }
    let store = all_shortcuts_with(ctx, limits)?;
    let computed = store.len();
    let mut d = MainDecision {
        case,
        success: false,
        store,
        computed,
        passes: 0,
    };
    if case == Case::Fl0 {
        d.success = !d.ini_a().is_empty();
        return Ok(d);
    }
    let initial_ok =
        |d: &MainDecision| d.ini_bot().is_some() && (case == Case::Pure || !d.ini_a().is_empty());
    if !initial_ok(&d) {
        return Ok(d);
    }
    let (pruned, passes) = prune_to_fixpoint(&d.store);
    d.store = pruned;
    d.passes = passes;
    d.success = initial_ok(&d);
    Ok(d)
}
