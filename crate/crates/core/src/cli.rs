//! Command-line front end.
//!
//! Exit codes: 0 positive verdict, 1 negative verdict, 2 input or usage
//! error, 3 resource cap or internal defect.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::builder::check_decreasing_rule;
use crate::concepts::{normalize, parse_concept, subsumes, Vocab};
use crate::decide::{decide_unification, Options};
use crate::error::{Error, Result};
use crate::goal::{
    parse_goal, parse_registry, parse_substitution, verify_unifier, Goal, Substitution,
};
use crate::oracle::{brute_force_unifiable, OracleBounds, OracleVerdict};

pub const EXIT_POSITIVE: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

const SCHEMA: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "flbot", version, about = "Unification of FL⊥ concepts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide a ground subsumption `C <= D` (or `C == D`).
    Check {
        /// File holding one subsumption line, `-` for stdin.
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Decide unifiability of a goal file.
    Unify {
        goal: PathBuf,
        /// Write the witness; defaults to the goal path with a `.subst` extension.
        #[arg(long, num_args = 0..=1, value_name = "PATH")]
        emit: Option<Option<PathBuf>>,
        #[arg(long)]
        json: bool,
        /// Write the deciding shortcut stores as DOT, plus `<PATH>.json`.
        #[arg(long, value_name = "PATH")]
        dump_shortcuts: Option<PathBuf>,
        /// Write witness construction steps as JSON lines.
        #[arg(long, value_name = "PATH")]
        trace_construction: Option<PathBuf>,
        #[arg(long, value_name = "N")]
        max_branches: Option<usize>,
    },
    /// Check that a substitution solves a goal.
    Verify {
        goal: PathBuf,
        substitution: PathBuf,
        /// Decomposition registry; also checks the decreasing rule.
        #[arg(long, value_name = "PATH")]
        registry: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Search bounded ground substitutions by brute force.
    Oracle {
        goal: PathBuf,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 2)]
        width: usize,
        #[arg(long)]
        json: bool,
    },
}

/// Runs the CLI on process arguments and standard streams.
pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the CLI with explicit arguments (program name first) and streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_INPUT;
            }
            let _ = write!(out, "{e}");
            return EXIT_POSITIVE;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Resource(_) | Error::Defect(_) => EXIT_RESOURCE,
        _ => EXIT_INPUT,
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Check { input, json } => check(&input, json, out),
        Command::Unify {
            goal,
            emit,
            json,
            dump_shortcuts,
            trace_construction,
            max_branches,
        } => {
            let emit = emit.map(|p| p.unwrap_or_else(|| goal.with_extension("subst")));
            let opts = Options {
                max_branches,
                keep_stores: dump_shortcuts.is_some(),
                ..Options::default()
            };
            unify(
                &goal,
                &opts,
                UnifyOutputs {
                    emit: emit.as_deref(),
                    json,
                    dump: dump_shortcuts.as_deref(),
                    trace: trace_construction.as_deref(),
                },
                out,
                err,
            )
        }
        Command::Verify {
            goal,
            substitution,
            registry,
            json,
        } => verify(&goal, &substitution, registry.as_deref(), json, out),
        Command::Oracle {
            goal,
            depth,
            width,
            json,
        } => oracle(&goal, OracleBounds::new(depth, width)?, json, out),
    }
}

fn read(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s)?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn emit_json(
    out: &mut dyn Write,
    result: bool,
    witness: Option<Value>,
    diagnostics: Option<Value>,
) -> Result<()> {
    let mut m = Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("result".into(), json!(result));
    if let Some(w) = witness {
        m.insert("witness".into(), w);
    }
    if let Some(d) = diagnostics {
        m.insert("diagnostics".into(), d);
    }
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&Value::Object(m)).expect("json")
    )?;
    Ok(())
}

fn witness_json(sigma: &Substitution, vocab: &Vocab, vars: impl IntoIterator<Item = u32>) -> Value {
    let m: Map<String, Value> = vars
        .into_iter()
        .map(|x| {
            (
                vocab.var_name(x).to_string(),
                json!(vocab.render(&sigma.image(x))),
            )
        })
        .collect();
    Value::Object(m)
}

/// Parses a single ground subsumption line; every name is a constant.
fn check(input: &Path, json: bool, out: &mut dyn Write) -> Result<i32> {
    let text = read(input)?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let Some((line, body)) = lines.next() else {
        return Err(Error::Input("no subsumption line".into()));
    };
    if let Some((extra, _)) = lines.next() {
        return Err(Error::Input(format!(
            "line {extra}: expected a single subsumption"
        )));
    }
    let (op, at) = if let Some(at) = body.find("<=") {
        ("<=", at)
    } else if let Some(at) = body.find("==") {
        ("==", at)
    } else {
        return Err(Error::Syntax {
            line,
            column: 1,
            message: "expected `<=` or `==`".into(),
        });
    };
    let lhs = parse_concept(&body[..at]).map_err(|e| e.at_line(line))?;
    let rhs = parse_concept(&body[at + 2..]).map_err(|e| shift(e, line, at + 2))?;
    let mut names = BTreeSet::new();
    let mut roles = BTreeSet::new();
    for c in [&lhs, &rhs] {
        c.names(&mut names);
        c.roles(&mut roles);
    }
    let vocab = Vocab::new(roles, names, Vec::<String>::new());
    let c = normalize(&lhs, &vocab)?;
    let d = normalize(&rhs, &vocab)?;
    let holds = subsumes(&c, &d) && (op == "<=" || subsumes(&d, &c));
    if json {
        emit_json(out, holds, None, None)?;
    } else {
        writeln!(out, "{}", if holds { "HOLDS" } else { "DOES_NOT_HOLD" })?;
    }
    Ok(if holds { EXIT_POSITIVE } else { EXIT_NEGATIVE })
}

fn shift(e: Error, line: usize, by: usize) -> Error {
    match e {
        Error::Syntax {
            column, message, ..
        } => Error::Syntax {
            line,
            column: column + by,
            message,
        },
        other => other.at_line(line),
    }
}

struct UnifyOutputs<'a> {
    emit: Option<&'a Path>,
    json: bool,
    dump: Option<&'a Path>,
    trace: Option<&'a Path>,
}

fn unify(
    path: &Path,
    opts: &Options,
    outputs: UnifyOutputs<'_>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let goal = parse_goal(&read(path)?)?;
    let outcome = decide_unification(&goal, opts)?;
    for d in outcome.defects() {
        writeln!(err, "warning: {d}")?;
    }
    if let Some(p) = outputs.dump {
        let mut dot = String::new();
        let mut dumps = Vec::new();
        for (i, s) in outcome.subgoals.iter().enumerate() {
            if let Some(store) = &s.store {
                dot.push_str(&store.to_dot());
                dumps.push(json!({"subgoal": i, "store": store.to_json()}));
            }
        }
        write_file(p, &dot)?;
        let mut jp = p.as_os_str().to_owned();
        jp.push(".json");
        write_file(
            Path::new(&jp),
            &(serde_json::to_string_pretty(&dumps).expect("json") + "\n"),
        )?;
    }
    if let Some(p) = outputs.trace {
        let mut text = String::new();
        for (i, s) in outcome.subgoals.iter().enumerate() {
            for t in &s.trace {
                let line = json!({
                    "subgoal": i,
                    "step": t.step,
                    "depth": t.depth,
                    "shortcut": t.shortcut,
                    "particle": t.particle,
                });
                text.push_str(&line.to_string());
                text.push('\n');
            }
        }
        write_file(p, &text)?;
    }
    if let Some(p) = outputs.emit {
        match &outcome.witness {
            Some(w) => write_file(p, &w.render(&goal.vocab, goal.variables()))?,
            None if outcome.unifiable => writeln!(err, "warning: no witness to emit")?,
            None => {}
        }
    }
    if outputs.json {
        let diagnostics = json!({
            "subgoals": outcome.subgoals,
            "defects": outcome.defects(),
        });
        let witness = outcome
            .witness
            .as_ref()
            .map(|w| witness_json(w, &goal.vocab, goal.variables()));
        emit_json(out, outcome.unifiable, witness, Some(diagnostics))?;
    } else {
        writeln!(
            out,
            "{}",
            if outcome.unifiable {
                "UNIFIABLE"
            } else {
                "NOT_UNIFIABLE"
            }
        )?;
    }
    Ok(if outcome.unifiable {
        EXIT_POSITIVE
    } else {
        EXIT_NEGATIVE
    })
}

fn verify(
    goal_path: &Path,
    subst_path: &Path,
    registry: Option<&Path>,
    json: bool,
    out: &mut dyn Write,
) -> Result<i32> {
    let goal = parse_goal(&read(goal_path)?)?;
    let mut vocab = goal.vocab.clone();
    let sigma = parse_substitution(&read(subst_path)?, &mut vocab)?;
    let registry = match registry {
        Some(p) => Some(parse_registry(&read(p)?, &mut vocab)?),
        None => None,
    };
    let unifier = verify_unifier(&goal, &sigma);
    let decreasing = registry.as_ref().map(|r| check_decreasing_rule(&sigma, r));
    let ok = unifier && decreasing.unwrap_or(true);
    if json {
        let mut d = Map::new();
        d.insert("unifier".into(), json!(unifier));
        if let Some(dec) = decreasing {
            d.insert("decreasing_rule".into(), json!(dec));
        }
        emit_json(out, ok, None, Some(Value::Object(d)))?;
    } else {
        writeln!(out, "{}", if unifier { "UNIFIER" } else { "NOT_A_UNIFIER" })?;
        if let Some(dec) = decreasing {
            writeln!(
                out,
                "{}",
                if dec {
                    "DECREASING_RULE_HOLDS"
                } else {
                    "DECREASING_RULE_VIOLATED"
                }
            )?;
        }
    }
    Ok(if ok { EXIT_POSITIVE } else { EXIT_NEGATIVE })
}

fn oracle(path: &Path, bounds: OracleBounds, json: bool, out: &mut dyn Write) -> Result<i32> {
    let goal: Goal = parse_goal(&read(path)?)?;
    let verdict = brute_force_unifiable(&goal, bounds)?;
    let found = matches!(verdict, OracleVerdict::Witness(_));
    if json {
        let witness = match &verdict {
            OracleVerdict::Witness(w) => Some(witness_json(w, &goal.vocab, goal.variables())),
            OracleVerdict::NoneWithinBounds => None,
        };
        let diagnostics = json!({
            "depth": bounds.max_depth,
            "width": bounds.max_width,
            "verdict": if found { "witness" } else { "none-within-bounds" },
        });
        emit_json(out, found, witness, Some(diagnostics))?;
    } else {
        match &verdict {
            OracleVerdict::Witness(w) => {
                writeln!(out, "WITNESS")?;
                write!(out, "{}", w.render(&goal.vocab, goal.variables()))?;
            }
            OracleVerdict::NoneWithinBounds => writeln!(out, "NONE_WITHIN_BOUNDS")?,
        }
    }
    Ok(if found { EXIT_POSITIVE } else { EXIT_NEGATIVE })
}
