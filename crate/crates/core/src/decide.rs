//! Top-level decision: split by constant, search branches, build witnesses.

use serde::Serialize;
use serde_json::Value;

use crate::builder::{build_trivial_unifier, construct_unifier_with, TraceEntry, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::goal::{merge_substitutions, split_by_constant, verify_unifier, Goal, Substitution};
use crate::normalizer::{BranchIter, Normalization, NormalizedGoal};
use crate::shortcuts::{main_decision_with, Case, Limits, ShortcutStore};

/// Knobs for [`decide_unification`].
#[derive(Clone, Debug)]
pub struct Options {
    /// Cap on branches per subgoal; exceeding it is a resource error.
    pub max_branches: Option<usize>,
    pub limits: Limits,
    pub budget: usize,
    /// Keep the store of each deciding branch.
    pub keep_stores: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            max_branches: None,
            limits: Limits::default(),
            budget: DEFAULT_BUDGET,
            keep_stores: false,
        }
    }
}

/// How a successful branch was witnessed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// The implicit solver discharged everything.
    Solver,
    /// Flat subsumptions only, no start subsumptions.
    AllTop,
    Shortcuts,
}

/// Diagnostics for one subgoal.
#[derive(Clone, Debug, Serialize)]
pub struct SubgoalReport {
    pub constant: Option<String>,
    pub unifiable: bool,
    pub branches: usize,
    pub route: Option<Route>,
    pub case: Option<Case>,
    pub shortcuts: Option<usize>,
    pub alive: Option<usize>,
    pub passes: Option<usize>,
    pub witness_depth: Option<usize>,
    pub normalized: Option<Value>,
    pub defects: Vec<String>,
    #[serde(skip)]
    pub trace: Vec<TraceEntry>,
    #[serde(skip)]
    pub store: Option<ShortcutStore>,
    #[serde(skip)]
    pub normalized_goal: Option<NormalizedGoal>,
    #[serde(skip)]
    pub witness: Option<Substitution>,
}

/// Verdict with witness and per-subgoal diagnostics.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub unifiable: bool,
    /// Images of the goal's variables; absent on a negative verdict or when
    /// construction failed.
    pub witness: Option<Substitution>,
    pub subgoals: Vec<SubgoalReport>,
}

impl Outcome {
    pub fn defects(&self) -> Vec<String> {
        self.subgoals
            .iter()
            .flat_map(|s| s.defects.iter().cloned())
            .collect()
    }
}

pub fn decide_unification(goal: &Goal, opts: &Options) -> Result<Outcome> {
    let mut subgoals = Vec::new();
    for sub in split_by_constant(goal) {
        let report = decide_subgoal(&sub, opts)?;
        let ok = report.unifiable;
        subgoals.push(report);
        if !ok {
            return Ok(Outcome {
                unifiable: false,
                witness: None,
                subgoals,
            });
        }
    }
    let witness = if subgoals.iter().all(|s| s.witness.is_some()) {
        let merged = merge_substitutions(subgoals.iter().filter_map(|s| s.witness.as_ref()));
        let merged = merged.restrict(goal.variables());
        if verify_unifier(goal, &merged) {
            Some(merged)
        } else {
            if let Some(last) = subgoals.last_mut() {
                last.defects
                    .push("merged witness does not solve the goal".into());
            }
            None
        }
    } else {
        None
    };
    Ok(Outcome {
        unifiable: true,
        witness,
        subgoals,
    })
}

fn decide_subgoal(goal: &Goal, opts: &Options) -> Result<SubgoalReport> {
    let constant = goal
        .constants()
        .into_iter()
        .next()
        .map(|a| goal.vocab.const_name(a).to_string());
    let mut report = SubgoalReport {
        constant,
        unifiable: false,
        branches: 0,
        route: None,
        case: None,
        shortcuts: None,
        alive: None,
        passes: None,
        witness_depth: None,
        normalized: None,
        defects: Vec::new(),
        trace: Vec::new(),
        store: None,
        normalized_goal: None,
        witness: None,
    };
    for item in BranchIter::new(goal)? {
        let (_, n) = item?;
        report.branches += 1;
        if let Some(cap) = opts.max_branches {
            if report.branches > cap {
                return Err(Error::Resource(format!("more than {cap} branches")));
            }
        }
        let ng = match n {
            Normalization::Failure | Normalization::Incomplete(_) => continue,
            Normalization::Success(ng) => {
                let w = build_trivial_unifier(&ng)?;
                if accept(goal, &ng, w, Route::Solver, &mut report) {
                    return Ok(report);
                }
                continue;
            }
            Normalization::Normalized(ng) => ng,
        };
        if ng.bot_vars().is_empty() && ng.a_vars().is_empty() {
            if accept(goal, &ng, Substitution::new(), Route::AllTop, &mut report) {
                return Ok(report);
            }
            continue;
        }
        let d = main_decision_with(&ng, opts.limits)?;
        if !d.success {
            continue;
        }
        let first = !report.unifiable;
        if first {
            report.unifiable = true;
            report.route = Some(Route::Shortcuts);
            record(&mut report, &ng, &d, opts);
        }
        match construct_unifier_with(&ng, &d, opts.budget) {
            Ok(c) => {
                let w = c.witness.restrict(goal.variables());
                if verify_unifier(goal, &w) {
                    record(&mut report, &ng, &d, opts);
                    report.route = Some(Route::Shortcuts);
                    report.witness_depth = Some(c.depth);
                    report.trace = c.trace;
                    report.witness = Some(c.witness);
                    return Ok(report);
                }
                report
                    .defects
                    .push("constructed witness does not solve the subgoal".into());
            }
            Err(Error::Defect(m)) => report.defects.push(m),
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

fn record(
    report: &mut SubgoalReport,
    ng: &NormalizedGoal,
    d: &crate::shortcuts::MainDecision,
    opts: &Options,
) {
    report.case = Some(d.case);
    report.shortcuts = Some(d.computed);
    report.alive = Some(d.store.alive_count());
    report.passes = Some(d.passes);
    report.normalized = Some(ng.to_json());
    report.normalized_goal = Some(ng.clone());
    if opts.keep_stores {
        report.store = Some(d.store.clone());
    }
}

/// Records a solver or all-top witness if it checks out.
fn accept(
    goal: &Goal,
    ng: &NormalizedGoal,
    w: Substitution,
    route: Route,
    report: &mut SubgoalReport,
) -> bool {
    let restricted = w.restrict(goal.variables());
    if !verify_unifier(goal, &restricted) {
        report
            .defects
            .push(format!("{route:?} witness does not solve the subgoal"));
        return false;
    }
    report.unifiable = true;
    report.route = Some(route);
    report.normalized = Some(ng.to_json());
    report.normalized_goal = Some(ng.clone());
    report.witness_depth = Some(w.depth());
    report.witness = Some(w);
    true
}
