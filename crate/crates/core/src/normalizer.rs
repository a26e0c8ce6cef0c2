//! Branch guesses, the implicit solver and flattening.
//!
//! A branch fixes, for every variable, whether its image is `⊤`, `⊥`, or
//! neither (optionally containing the constant). Normalization alternates
//! flattening with the solver until only flat subsumptions remain.

use std::collections::BTreeSet;

use serde_json::{json, Map, Value};

use crate::concepts::{reduce, Head, Particle, ParticleSet, Role, Vocab};
use crate::error::{Error, Result};
use crate::goal::{Goal, GoalSubsumption, Registry};

/// Guess for one variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Choice {
    Top,
    Other { a: bool },
    Bot,
}

impl Choice {
    pub fn a_flag(self) -> bool {
        matches!(self, Choice::Other { a: true })
    }

    pub fn label(self) -> &'static str {
        match self {
            Choice::Top => "top",
            Choice::Bot => "bot",
            Choice::Other { a: false } => "other",
            Choice::Other { a: true } => "other+A",
        }
    }
}

const WITH_CONSTANT: [Choice; 4] = [
    Choice::Top,
    Choice::Other { a: false },
    Choice::Other { a: true },
    Choice::Bot,
];
const WITHOUT_CONSTANT: [Choice; 3] = [Choice::Top, Choice::Other { a: false }, Choice::Bot];

/// Choices tried per variable, in search order.
pub fn choices(has_constant: bool) -> &'static [Choice] {
    if has_constant {
        &WITH_CONSTANT
    } else {
        &WITHOUT_CONSTANT
    }
}

/// `X_1 ⊓ … ⊓ X_n ⊑? Y` over variable ids; `lhs` is sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlatSubsumption {
    pub lhs: Vec<u32>,
    pub rhs: u32,
}

/// A normalized branch: start, increasing and flat subsumptions.
#[derive(Clone, Debug)]
pub struct NormalizedGoal {
    pub vocab: Vocab,
    /// Guess per variable id, decomposition variables included.
    pub guess: Vec<Choice>,
    pub registry: Registry,
    /// `(X, r, X^r)` in creation order.
    pub increasing: Vec<(u32, Role, u32)>,
    pub flat: Vec<FlatSubsumption>,
    pub constant: Option<u32>,
    /// Number of variables of the input goal; ids below are original.
    pub goal_vars: usize,
}

impl NormalizedGoal {
    /// Builds a normalized goal directly; the registry is derived from
    /// `increasing`.
    pub fn from_parts(
        vocab: Vocab,
        guess: Vec<Choice>,
        increasing: Vec<(u32, Role, u32)>,
        flat: Vec<FlatSubsumption>,
        constant: Option<u32>,
    ) -> Result<Self> {
        if guess.len() != vocab.num_vars() {
            return Err(Error::Input("one guess per variable is required".into()));
        }
        let mut registry = Registry::new();
        for &(x, r, xr) in &increasing {
            registry.insert(x, r, xr)?;
        }
        let mut flat: Vec<FlatSubsumption> = flat
            .into_iter()
            .map(|mut f| {
                f.lhs.sort_unstable();
                f.lhs.dedup();
                f
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        flat.sort();
        let goal_vars = vocab.num_vars();
        Ok(NormalizedGoal {
            vocab,
            guess,
            registry,
            increasing,
            flat,
            constant,
            goal_vars,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.guess.len()
    }

    /// Variables guessed `⊥`.
    pub fn bot_vars(&self) -> Vec<u32> {
        self.vars_where(|c| c == Choice::Bot)
    }

    /// Variables whose image must contain the constant.
    pub fn a_vars(&self) -> Vec<u32> {
        self.vars_where(Choice::a_flag)
    }

    /// Variables not guessed `⊤`.
    pub fn live_vars(&self) -> Vec<u32> {
        self.vars_where(|c| c != Choice::Top)
    }

    fn vars_where(&self, f: impl Fn(Choice) -> bool) -> Vec<u32> {
        (0..self.guess.len() as u32)
            .filter(|&x| f(self.guess[x as usize]))
            .collect()
    }

    fn name(&self, x: u32) -> &str {
        self.vocab.var_name(x)
    }

    /// Rendered start subsumptions, `X <= bot` before `X <= A`.
    pub fn render_start(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .bot_vars()
            .into_iter()
            .map(|x| format!("{} <= bot", self.name(x)))
            .collect();
        if let Some(a) = self.constant {
            out.extend(
                self.a_vars()
                    .into_iter()
                    .map(|x| format!("{} <= {}", self.name(x), self.vocab.const_name(a))),
            );
        }
        out
    }

    pub fn render_increasing(&self) -> Vec<String> {
        self.increasing
            .iter()
            .map(|&(x, r, xr)| {
                format!(
                    "{} <= all {}.{}",
                    self.name(x),
                    self.vocab.role_name(r),
                    self.name(xr)
                )
            })
            .collect()
    }

    pub fn render_flat(&self, f: &FlatSubsumption) -> String {
        let mut names: Vec<&str> = f.lhs.iter().map(|&x| self.name(x)).collect();
        names.sort_unstable();
        format!("{} <= {}", names.join(" and "), self.name(f.rhs))
    }

    pub fn render_flats(&self) -> Vec<String> {
        let mut out: Vec<String> = self.flat.iter().map(|f| self.render_flat(f)).collect();
        out.sort();
        out
    }

    /// Debug dump with concepts rendered as text.
    pub fn to_json(&self) -> Value {
        let mut guess = Map::new();
        for (x, c) in self.guess.iter().enumerate() {
            guess.insert(self.name(x as u32).to_string(), json!(c.label()));
        }
        json!({
            "start": self.render_start(),
            "increasing": self.render_increasing(),
            "flat": self.render_flats(),
            "guess": guess,
        })
    }

    /// Start, flat and increasing subsumptions as an ordinary goal.
    pub fn as_goal(&self) -> Goal {
        let var = |x: u32| Particle::bare(Head::Var(x));
        let mut subsumptions = Vec::new();
        for x in self.bot_vars() {
            subsumptions.push(GoalSubsumption {
                lhs: ParticleSet::singleton(var(x)),
                rhs: Particle::bot(),
            });
        }
        if let Some(a) = self.constant {
            for x in self.a_vars() {
                subsumptions.push(GoalSubsumption {
                    lhs: ParticleSet::singleton(var(x)),
                    rhs: Particle::bare(Head::Const(a)),
                });
            }
        }
        for f in &self.flat {
            subsumptions.push(GoalSubsumption {
                lhs: reduce(f.lhs.iter().map(|&x| var(x))),
                rhs: var(f.rhs),
            });
        }
        for &(x, r, xr) in &self.increasing {
            subsumptions.push(GoalSubsumption {
                lhs: ParticleSet::singleton(var(x)),
                rhs: var(xr).under(r),
            });
        }
        Goal {
            vocab: self.vocab.clone(),
            subsumptions,
        }
    }
}

/// Result of normalizing one (possibly partial) branch.
#[derive(Clone, Debug)]
pub enum Normalization {
    /// The guess does not cover this variable yet.
    Incomplete(u32),
    Failure,
    /// The solver discharged everything; no flat subsumptions remain.
    Success(NormalizedGoal),
    Normalized(NormalizedGoal),
}

#[derive(Clone, Debug)]
enum Step {
    NeedGuess(u32),
    Failure,
    Success,
    Normalized,
}

#[derive(Clone, Debug)]
struct State {
    vocab: Vocab,
    registry: Registry,
    guess: Vec<Option<Choice>>,
    constant: Option<u32>,
    roles: Vec<Role>,
    work: Vec<GoalSubsumption>,
    increasing: Vec<(u32, Role, u32)>,
    goal_vars: usize,
    steps: usize,
    step_bound: usize,
}

enum Verdict {
    Keep(GoalSubsumption),
    Solved,
    Failure,
}

impl State {
    fn new(goal: &Goal) -> Result<Self> {
        let consts = goal.constants();
        if consts.len() > 1 {
            return Err(Error::Input(
                "normalization expects at most one constant; split the goal first".into(),
            ));
        }
        let size: usize = goal
            .subsumptions
            .iter()
            .map(|s| s.lhs.iter().map(|p| p.size() + 1).sum::<usize>() + s.rhs.size() + 1)
            .sum();
        let roles: Vec<Role> = goal.vocab.roles().collect();
        let nvars = goal.vocab.num_vars();
        let step_bound = 64 + 16 * (size + 1) * (nvars + 1) * (roles.len() + 1);
        Ok(State {
            vocab: goal.vocab.clone(),
            registry: Registry::new(),
            guess: vec![None; nvars],
            constant: consts.into_iter().next(),
            roles,
            work: goal.subsumptions.clone(),
            increasing: Vec::new(),
            goal_vars: nvars,
            steps: 0,
            step_bound,
        })
    }

    fn choice(&self, x: u32) -> Choice {
        self.guess[x as usize].expect("guessed variable")
    }

    /// Fixes the guess for `x` and substitutes `⊤`/`⊥` guesses textually.
    fn assign(&mut self, x: u32, c: Choice) {
        self.guess[x as usize] = Some(c);
        let head = match c {
            Choice::Top => Head::Top,
            Choice::Bot => Head::Bot,
            Choice::Other { .. } => return,
        };
        let subst = |p: &Particle| {
            if p.head == Head::Var(x) {
                Particle::new(p.path.clone(), head)
            } else {
                p.clone()
            }
        };
        for s in &mut self.work {
            if s.lhs.iter().any(|p| p.head == Head::Var(x)) {
                s.lhs = reduce(s.lhs.iter().map(subst));
            }
            s.rhs = subst(&s.rhs);
        }
    }

    fn decomposition(&mut self, x: u32, r: Role) -> u32 {
        if let Some(xr) = self.registry.child(x, r) {
            return xr;
        }
        let parent = self.vocab.var_name(x);
        let role = self.vocab.role_name(r);
        let name = if parent.contains('^') {
            format!("{parent}.{role}")
        } else {
            format!("{parent}^{role}")
        };
        let xr = self.vocab.add_var(&name);
        self.guess.push(None);
        self.registry
            .insert(x, r, xr)
            .expect("fresh decomposition variable");
        self.increasing.push((x, r, xr));
        xr
    }

    fn minus_role(&mut self, p: &Particle, r: Role) -> Option<Particle> {
        match (p.path.first(), p.head) {
            (Some(&first), _) if first == r => Some(Particle::new(p.path[1..].to_vec(), p.head)),
            (Some(_), _) => None,
            (None, Head::Var(x)) => {
                let xr = self.decomposition(x, r);
                // An existing child may already be guessed `⊤` or `⊥`.
                let head = match self.guess[xr as usize] {
                    Some(Choice::Top) => Head::Top,
                    Some(Choice::Bot) => Head::Bot,
                    _ => Head::Var(xr),
                };
                Some(Particle::bare(head))
            }
            (None, _) => None,
        }
    }

    fn minus(&mut self, s: &GoalSubsumption, r: Role) -> GoalSubsumption {
        let lhs: Vec<Particle> = s.lhs.iter().filter_map(|p| self.minus_role(p, r)).collect();
        let rhs = self
            .minus_role(&s.rhs, r)
            .unwrap_or_else(|| Particle::bare(Head::Top));
        GoalSubsumption {
            lhs: reduce(lhs),
            rhs,
        }
    }

    fn a_supported(&self, lhs: &ParticleSet, a: Option<u32>) -> bool {
        lhs.iter().any(|p| {
            p.path.is_empty()
                && match p.head {
                    Head::Const(b) => Some(b) == a,
                    Head::Var(y) => self.choice(y).a_flag(),
                    _ => false,
                }
        })
    }

    /// Rules of the implicit solver, applied to one subsumption in order
    /// until none fires.
    fn solve_one(&self, mut s: GoalSubsumption) -> Verdict {
        loop {
            if s.lhs.contains(&Particle::bot()) {
                return Verdict::Solved;
            }
            if s.rhs == Particle::bot() {
                return Verdict::Failure;
            }
            if s.rhs.head == Head::Top {
                return Verdict::Solved;
            }
            let rhs_var = match (s.rhs.path.is_empty(), s.rhs.head) {
                (true, Head::Var(x)) => Some(x),
                _ => None,
            };
            if s.lhs.is_empty() && rhs_var.is_some() {
                return Verdict::Failure;
            }
            if s.lhs.contains(&s.rhs) {
                return Verdict::Solved;
            }
            if let (true, Head::Const(a)) = (s.rhs.path.is_empty(), s.rhs.head) {
                if self.a_supported(&s.lhs, Some(a)) {
                    return Verdict::Solved;
                }
                return Verdict::Failure;
            }
            if let Some(x) = rhs_var {
                if !self.choice(x).a_flag() {
                    let bare_const =
                        |p: &Particle| p.path.is_empty() && matches!(p.head, Head::Const(_));
                    if s.lhs.iter().any(bare_const) {
                        s.lhs = reduce(s.lhs.iter().filter(|p| !bare_const(p)).cloned());
                        continue;
                    }
                } else if !self.a_supported(&s.lhs, self.constant) {
                    return Verdict::Failure;
                }
            }
            return Verdict::Keep(s);
        }
    }

    fn solve(&mut self) -> Option<Step> {
        let work = std::mem::take(&mut self.work);
        for s in work {
            match self.solve_one(s) {
                Verdict::Keep(s) => self.work.push(s),
                Verdict::Solved => {}
                Verdict::Failure => return Some(Step::Failure),
            }
        }
        if self.work.is_empty() {
            return Some(Step::Success);
        }
        None
    }

    fn non_flat(s: &GoalSubsumption) -> bool {
        !s.rhs.path.is_empty()
            || s.lhs
                .iter()
                .any(|p| !p.path.is_empty() || matches!(p.head, Head::Const(_)))
    }

    fn flatten(&mut self, i: usize) {
        let s = self.work[i].clone();
        let mut replacement = Vec::new();
        if let Some(&r) = s.rhs.path.first() {
            replacement.push(self.minus(&s, r));
        } else if let Head::Var(x) = s.rhs.head {
            for r in self.roles.clone() {
                replacement.push(self.minus(&s, r));
            }
            if let (true, Some(a)) = (self.choice(x).a_flag(), self.constant) {
                let lhs = reduce(
                    s.lhs
                        .iter()
                        .filter(|p| {
                            p.path.is_empty() && matches!(p.head, Head::Var(_) | Head::Const(_))
                        })
                        .cloned(),
                );
                replacement.push(GoalSubsumption {
                    lhs,
                    rhs: Particle::bare(Head::Const(a)),
                });
            }
        }
        self.work.splice(i..=i, replacement);
    }

    fn run(&mut self) -> Result<Step> {
        loop {
            if let Some(x) = self.guess.iter().position(Option::is_none) {
                return Ok(Step::NeedGuess(x as u32));
            }
            if let Some(step) = self.solve() {
                return Ok(step);
            }
            match self.work.iter().position(Self::non_flat) {
                None => return Ok(Step::Normalized),
                Some(i) => self.flatten(i),
            }
            self.steps += 1;
            if self.steps > self.step_bound {
                return Err(Error::Defect(format!(
                    "normalization exceeded {} steps",
                    self.step_bound
                )));
            }
        }
    }

    fn finish(&self) -> NormalizedGoal {
        let flat: BTreeSet<FlatSubsumption> = self
            .work
            .iter()
            .map(|s| {
                let lhs = s
                    .lhs
                    .iter()
                    .map(|p| match p.head {
                        Head::Var(x) => x,
                        _ => unreachable!("flat subsumptions mention only variables"),
                    })
                    .collect();
                let rhs = match s.rhs.head {
                    Head::Var(x) => x,
                    _ => unreachable!("flat subsumptions mention only variables"),
                };
                FlatSubsumption { lhs, rhs }
            })
            .collect();
        NormalizedGoal {
            vocab: self.vocab.clone(),
            guess: self.guess.iter().map(|c| c.expect("complete")).collect(),
            registry: self.registry.clone(),
            increasing: self.increasing.clone(),
            flat: flat.into_iter().collect(),
            constant: self.constant,
            goal_vars: self.goal_vars,
        }
    }

    fn outcome(&self, step: Step) -> Normalization {
        match step {
            Step::NeedGuess(x) => Normalization::Incomplete(x),
            Step::Failure => Normalization::Failure,
            Step::Success => Normalization::Success(self.finish()),
            Step::Normalized => Normalization::Normalized(self.finish()),
        }
    }
}

/// Normalizes `goal` under `guess`, indexed by variable id. Decomposition
/// variables get ids in creation order; `Incomplete` names the first one
/// the guess does not cover.
pub fn normalize_goal(goal: &Goal, guess: &[Choice]) -> Result<Normalization> {
    let mut st = State::new(goal)?;
    loop {
        match st.run()? {
            Step::NeedGuess(x) => match guess.get(x as usize) {
                Some(&c) => st.assign(x, c),
                None => return Ok(Normalization::Incomplete(x)),
            },
            step => return Ok(st.outcome(step)),
        }
    }
}

/// Depth-first enumeration of complete branches.
///
/// Guesses for fresh decomposition variables are made when the variables
/// appear, by cloning the branch state, so a branch that fails early cuts
/// off all its extensions.
pub struct BranchIter {
    stack: Vec<(State, Vec<Choice>)>,
    options: &'static [Choice],
    error: Option<Error>,
}

impl BranchIter {
    pub fn new(goal: &Goal) -> Result<Self> {
        let st = State::new(goal)?;
        let options = choices(st.constant.is_some());
        Ok(BranchIter {
            stack: vec![(st, Vec::new())],
            options,
            error: None,
        })
    }
}

impl Iterator for BranchIter {
    type Item = Result<(Vec<Choice>, Normalization)>;

    fn next(&mut self) -> Option<Self::Item> {
        if let Some(e) = self.error.take() {
            return Some(Err(e));
        }
        while let Some((mut st, trail)) = self.stack.pop() {
            match st.run() {
                Err(e) => {
                    self.stack.clear();
                    return Some(Err(e));
                }
                Ok(Step::NeedGuess(x)) => {
                    for &c in self.options.iter().rev() {
                        let mut next = st.clone();
                        next.assign(x, c);
                        let mut t = trail.clone();
                        t.push(c);
                        self.stack.push((next, t));
                    }
                }
                Ok(step) => return Some(Ok((trail, st.outcome(step)))),
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::goal::parse_goal;

    const EXAMPLE_TWO: &str = "vars: X, Z\nall r.all r.bot <= Z\nZ <= X\nX <= all r.bot\n";

    fn other() -> Choice {
        Choice::Other { a: false }
    }

    fn complete(goal: &Goal, mut guess: Vec<Choice>, fill: Choice) -> Normalization {
        loop {
            match normalize_goal(goal, &guess).unwrap() {
                Normalization::Incomplete(x) => {
                    assert_eq!(x as usize, guess.len());
                    guess.push(fill);
                }
                n => return n,
            }
        }
    }

    #[test]
    fn one_variable_has_four_branches() {
        let g = parse_goal("vars: X\nX <= X and A\n").unwrap();
        let branches: Vec<_> = BranchIter::new(&g).unwrap().map(Result::unwrap).collect();
        let labels: Vec<_> = branches.iter().map(|(c, _)| c[0].label()).collect();
        assert_eq!(labels, ["top", "other", "other+A", "bot"]);
    }

    #[test]
    fn no_variables_single_branch() {
        let g = parse_goal("vars:\nA <= A\n").unwrap();
        let branches: Vec<_> = BranchIter::new(&g).unwrap().map(Result::unwrap).collect();
        assert_eq!(branches.len(), 1);
        assert!(matches!(branches[0].1, Normalization::Success(_)));
    }

    #[test]
    fn bottom_branch_solves_gamma_a() {
        let g = parse_goal("vars: X\nX <= all r.X\nX <= A\n").unwrap();
        match normalize_goal(&g, &[Choice::Bot]).unwrap() {
            Normalization::Success(ng) => assert_eq!(ng.render_start(), ["X <= bot"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn solver_rules() {
        let g = parse_goal("vars: X\nX <= all r.bot\n").unwrap();
        assert!(matches!(
            normalize_goal(&g, &[Choice::Bot]).unwrap(),
            Normalization::Success(_)
        ));
        let g = parse_goal("vars:\nB <= bot\n").unwrap();
        assert!(matches!(
            normalize_goal(&g, &[]).unwrap(),
            Normalization::Failure
        ));
        let g = parse_goal("vars: X\nX <= all r.X\n").unwrap();
        assert!(matches!(
            normalize_goal(&g, &[Choice::Top]).unwrap(),
            Normalization::Success(_)
        ));
        let g = parse_goal("vars: X\nA <= X\n").unwrap();
        assert!(matches!(
            normalize_goal(&g, &[other()]).unwrap(),
            Normalization::Failure
        ));
    }

    #[test]
    fn flatten_value_restriction() {
        let g = parse_goal("vars: X, Y\nX <= all r.Y\n").unwrap();
        match complete(&g, vec![other(), other()], other()) {
            Normalization::Normalized(ng) => {
                assert_eq!(ng.render_flats(), ["X^r <= Y"]);
                assert_eq!(ng.render_increasing(), ["X <= all r.X^r"]);
            }
            n => panic!("unexpected {n:?}"),
        }
    }

    #[test]
    fn flatten_variable_rhs() {
        let g = parse_goal("vars: X, Z\nall r.B and X <= Z\n").unwrap();
        match complete(&g, vec![other(), other()], other()) {
            Normalization::Normalized(ng) => {
                assert_eq!(ng.render_flats(), ["X^r <= Z^r"]);
            }
            n => panic!("unexpected {n:?}"),
        }
    }

    #[test]
    fn example_two_branch() {
        let g = parse_goal(EXAMPLE_TWO).unwrap();
        let mut found = false;
        for item in BranchIter::new(&g).unwrap() {
            let (_, n) = item.unwrap();
            if let Normalization::Normalized(ng) = n {
                let xr = ng.vocab.var("X^r").unwrap();
                let zr = ng.vocab.var("Z^r");
                if ng.guess[xr as usize] == Choice::Bot
                    && zr.map(|z| ng.guess[z as usize]) == Some(Choice::Top)
                {
                    assert_eq!(ng.render_start(), ["X^r <= bot"]);
                    assert_eq!(ng.render_flats(), ["Z <= X"]);
                    found = true;
                }
            }
        }
        assert!(found);
    }

    #[test]
    fn cycle_branch() {
        let g = parse_goal("vars: X, Y\nX <= all r.Y\nY <= all r.X\nX <= all r.A\n").unwrap();
        let a = Choice::Other { a: true };
        let n = complete(&g, vec![other(), other(), a, other()], other());
        match n {
            Normalization::Normalized(ng) => {
                assert_eq!(ng.render_flats(), ["X^r <= Y", "Y^r <= X"]);
                assert_eq!(ng.render_start(), ["X^r <= A"]);
            }
            n => panic!("unexpected {n:?}"),
        }
    }

    #[test]
    fn shape_of_normalized_goals() {
        let goals = [
            "vars: X, Y\nall r.X and Y <= all s.X and A\nX <= all r.all s.Y\n",
            // the second line reuses `X^r` after it was guessed
            "vars: X\nall r.X <= X\nX <= all r.X\n",
        ];
        let mut seen = 0;
        for item in goals
            .iter()
            .flat_map(|t| BranchIter::new(&parse_goal(t).unwrap()).unwrap())
        {
            if let (_, Normalization::Normalized(ng)) = item.unwrap() {
                seen += 1;
                for f in &ng.flat {
                    assert!(!f.lhs.is_empty());
                    for &x in f.lhs.iter().chain(std::iter::once(&f.rhs)) {
                        assert!(matches!(ng.guess[x as usize], Choice::Other { .. }));
                    }
                }
                for &(x, r, xr) in &ng.increasing {
                    assert_eq!(ng.registry.child(x, r), Some(xr));
                }
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn json_dump_has_sections() {
        let g = parse_goal("vars: X, Y\nX <= all r.Y\n").unwrap();
        if let Normalization::Normalized(ng) = complete(&g, vec![other(), other()], other()) {
            let v = ng.to_json();
            assert_eq!(v["flat"][0], "X^r <= Y");
            assert_eq!(v["guess"]["X^r"], "other");
        } else {
            panic!("expected a normalized goal");
        }
    }
}
