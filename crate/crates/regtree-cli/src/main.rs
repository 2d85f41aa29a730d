//! `regtree`: command-line front end to the regtree library.
//!
//! Every command prints a JSON report on stdout and a one-line summary on stderr.
//! Exit status is 0 on success, 1 when the answer to a decision is "no", and 2 on
//! malformed input or any other error.

mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use regtree::algebras::{recognises, rho, Reach, ReachabilityAlgebra};
use regtree::automata::{accepts, bisim_closure, compile_algebra, dpa_for, emit_disjunctive_formula, AcceptanceSpec, UnfoldAutomaton};
use regtree::corpus::{Gen, Shape};
use regtree::equiv::{bisimilar, unfold_equivalent, BisimVerdict, UnfoldVerdict};
use regtree::model::json::{nested_from_value, system_to_doc, ts_to_doc};
use regtree::model::validate::{validate, validate_in};
use regtree::model::{SetSystem, Sym};
use regtree::monad::{flatten, pieces, plug};
use regtree::morphism::{check_morphism, find_morphism_with, pullback, SearchMode};
use regtree::reference::reference_checks;
use regtree::resolutions::{profile, yield_equal_bounded, yields, Bounds};
use regtree::ya::{build_delta, extremal_context, presentation_accepts, validate_presentation, Presentation};

use io::{doc, id_map, load_presentation, load_system, load_ts, par_map, parse_alphabet, parse_map, read_input, shipped_presentation, workers};

const SCHEMA: &str = "regtree.report/1";

#[derive(Parser)]
#[command(name = "regtree", version, about = "Set-systems, unfoldings, yields, algebras and automata for regular trees")]
struct Cli {
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Print only the result value, without the report envelope.
    #[arg(long, global = true)]
    raw: bool,
    /// No summary line on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check well-formedness of set-systems (JSON documents or expressions).
    Validate {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Ranked alphabet as `name:rank,...`.
        #[arg(long)]
        alphabet: Option<String>,
    },
    /// Flatten a set-system of set-systems.
    Flatten { input: PathBuf },
    /// Plug a set-system into the hole of a closed context.
    Plug {
        #[arg(long)]
        context: PathBuf,
        #[arg(long)]
        system: PathBuf,
    },
    /// Split a closed context into its pieces.
    Pieces { context: PathBuf },
    /// Check or search morphisms.
    Morphism {
        #[command(subcommand)]
        op: MorphismOp,
    },
    /// Pullback of two morphisms into a common target.
    Pullback(PullbackArgs),
    /// Decide equivalences.
    Decide {
        #[command(subcommand)]
        question: Decide,
    },
    /// Direct resolutions (init- and root-yields) with bounded memory.
    Yields {
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        memory: usize,
        /// Compare bounded yields with this set-system instead of listing them.
        #[arg(long)]
        against: Option<PathBuf>,
    },
    /// Profile of a set-system over the reachability algebra.
    Profile {
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        memory: usize,
        #[arg(long, default_value_t = 3)]
        max_m: usize,
        /// Letters of the reachability algebra, comma separated.
        #[arg(long, default_value = "b")]
        letters: String,
        /// Root-profile (of the uprooted system).
        #[arg(long)]
        root: bool,
        /// Only small maps.
        #[arg(long)]
        small: bool,
    },
    /// Evaluate and recognise a closed system in a finite algebra.
    Recognise {
        #[arg(long, value_enum, default_value_t = AlgebraKind::Reach)]
        algebra: AlgebraKind,
        #[arg(long, default_value = "b")]
        letters: String,
        #[arg(long, value_enum, default_value_t = Accept::Empty)]
        accept: Accept,
        #[arg(long)]
        input: PathBuf,
    },
    /// Finite yield-algebra presentations.
    Ya {
        #[command(subcommand)]
        op: YaOp,
    },
    /// Unfold-automata.
    Aut {
        #[command(subcommand)]
        op: AutOp,
    },
    /// Seeded random instances.
    Corpus {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, value_enum, default_value_t = CorpusKind::Systems)]
        kind: CorpusKind,
        #[arg(long, default_value_t = 5)]
        max_vertices: usize,
        #[arg(long, default_value_t = 0)]
        rank: usize,
        #[arg(long, default_value = "a2:2,a1:1,b1:1,c0:0")]
        alphabet: String,
    },
    /// Worked examples with known answers.
    Suite {
        /// Run the reference examples (the default and only suite).
        #[arg(long)]
        examples: bool,
        /// Only examples whose name contains this text.
        #[arg(long)]
        filter: Option<String>,
    },
}

#[derive(Subcommand)]
enum MorphismOp {
    /// Check a given vertex map, listed as target ids in source vertex order.
    Check {
        #[arg(long)]
        lhs: PathBuf,
        #[arg(long)]
        rhs: PathBuf,
        #[arg(long)]
        map: String,
    },
    /// Search for a morphism.
    Find {
        #[arg(long)]
        lhs: PathBuf,
        #[arg(long)]
        rhs: PathBuf,
        #[arg(long)]
        locally_surjective: bool,
    },
    Pullback(PullbackArgs),
}

#[derive(Args)]
struct PullbackArgs {
    #[arg(long)]
    left: PathBuf,
    #[arg(long)]
    right: PathBuf,
    #[arg(long)]
    base: PathBuf,
    /// Morphism left → base; searched for when absent.
    #[arg(long)]
    left_map: Option<String>,
    #[arg(long)]
    right_map: Option<String>,
    /// Keep only the part reachable from initial and root vertices.
    #[arg(long)]
    trim: bool,
}

#[derive(Subcommand)]
enum Decide {
    /// Unfold-equivalence of two systems.
    UnfoldEq {
        #[arg(long)]
        lhs: PathBuf,
        #[arg(long)]
        rhs: PathBuf,
        /// Write the common unfolding (or the distinction) here.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Bisimilarity of transition systems (documents or encoded systems).
    Bisim {
        #[arg(long)]
        lhs: PathBuf,
        #[arg(long)]
        rhs: PathBuf,
        #[arg(long)]
        witness: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum YaOp {
    /// Check every law of a presentation.
    Validate {
        #[arg(long)]
        presentation: String,
    },
    /// Does the presentation accept a closed system?
    Eval {
        #[arg(long)]
        presentation: String,
        #[arg(long)]
        input: PathBuf,
    },
    /// Componentwise-minimal context around a letter.
    Extremal(ContextArgs),
    /// The deterministic element δ below a letter in a context.
    Delta(ContextArgs),
}

#[derive(Args)]
struct ContextArgs {
    #[arg(long)]
    presentation: String,
    #[arg(long)]
    letter: String,
    /// Y1 names m0..mk, comma separated.
    #[arg(long)]
    context: String,
}

#[derive(Subcommand)]
enum AutOp {
    /// Compile a presentation into an unfold-automaton.
    Compile {
        #[arg(long)]
        presentation: String,
        /// Use the hand-written parity automaton of a shipped presentation.
        #[arg(long)]
        dpa: bool,
    },
    /// Membership of closed systems.
    Accept {
        #[arg(long)]
        automaton: String,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Closure under bisimulation, for automata over valuation symbols.
    Closure {
        #[arg(long)]
        automaton: String,
    },
    /// The disjunctive modal formula of an automaton.
    EmitFormula {
        #[arg(long)]
        automaton: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgebraKind {
    Reach,
}

#[derive(Clone, Copy, ValueEnum)]
enum Accept {
    /// Accept ⊥: some letter is reachable.
    Bottom,
    /// Accept ∅: no letter is reachable.
    Empty,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorpusKind {
    Systems,
    SetSystems,
    TransitionSystems,
    Games,
}

/// What a command produced: the result value, a verdict for decisions, and a summary.
struct Outcome {
    result: Value,
    verdict: Option<bool>,
    summary: String,
}

impl Outcome {
    fn done(result: Value, summary: impl Into<String>) -> Self {
        Outcome { result, verdict: None, summary: summary.into() }
    }

    fn decided(result: Value, verdict: bool, summary: impl Into<String>) -> Self {
        Outcome { result, verdict: Some(verdict), summary: summary.into() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = command_name(&cli.command);
    match run(&cli.command) {
        Ok(out) => {
            let body = if cli.raw {
                out.result
            } else {
                json!({ "schema": SCHEMA, "command": name, "verdict": out.verdict, "summary": out.summary, "result": out.result })
            };
            let text = serde_json::to_string_pretty(&body).expect("serializable") + "\n";
            let written = match &cli.output {
                Some(path) => std::fs::write(path, &text).with_context(|| format!("{}: cannot write", path.display())),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("regtree: {e:#}");
                return ExitCode::from(2);
            }
            if !cli.quiet {
                eprintln!("{name}: {}", out.summary);
            }
            if out.verdict == Some(false) {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("regtree {name}: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::Flatten { .. } => "flatten",
        Command::Plug { .. } => "plug",
        Command::Pieces { .. } => "pieces",
        Command::Morphism { op: MorphismOp::Check { .. } } => "morphism check",
        Command::Morphism { op: MorphismOp::Find { .. } } => "morphism find",
        Command::Morphism { op: MorphismOp::Pullback(_) } | Command::Pullback(_) => "pullback",
        Command::Decide { question: Decide::UnfoldEq { .. } } => "decide unfold-eq",
        Command::Decide { question: Decide::Bisim { .. } } => "decide bisim",
        Command::Yields { .. } => "yields",
        Command::Profile { .. } => "profile",
        Command::Recognise { .. } => "recognise",
        Command::Ya { op: YaOp::Validate { .. } } => "ya validate",
        Command::Ya { op: YaOp::Eval { .. } } => "ya eval",
        Command::Ya { op: YaOp::Extremal(_) } => "ya extremal",
        Command::Ya { op: YaOp::Delta(_) } => "ya delta",
        Command::Aut { op: AutOp::Compile { .. } } => "aut compile",
        Command::Aut { op: AutOp::Accept { .. } } => "aut accept",
        Command::Aut { op: AutOp::Closure { .. } } => "aut closure",
        Command::Aut { op: AutOp::EmitFormula { .. } } => "aut emit-formula",
        Command::Corpus { .. } => "corpus",
        Command::Suite { .. } => "suite",
    }
}

fn run(c: &Command) -> Result<Outcome> {
    match c {
        Command::Validate { inputs, alphabet } => validate_cmd(inputs, alphabet.as_deref()),
        Command::Flatten { input } => {
            let value: Value = serde_json::from_str(&read_input(input)?).map_err(|e| io::json_error(input, e))?;
            let n = nested_from_value(&value, None).with_context(|| input.display().to_string())?;
            let s = flatten(&n)?;
            let summary = format!("{} outer vertices, flattening {}", n.len(), s.summary());
            Ok(Outcome::done(doc(&s), summary))
        }
        Command::Plug { context, system } => {
            let (c, s) = (load_system(context, None)?, load_system(system, None)?);
            let r = plug(&c, &s)?;
            let summary = r.summary();
            Ok(Outcome::done(doc(&r), summary))
        }
        Command::Pieces { context } => {
            let p = pieces(&load_system(context, None)?)?;
            let parts: Vec<Value> = p.parts.iter().map(doc).collect();
            let summary = format!("{} pieces", parts.len());
            Ok(Outcome::done(json!({ "pieces": parts, "hole_initial": p.hole_initial, "hole_root": p.hole_root }), summary))
        }
        Command::Morphism { op } => morphism_cmd(op),
        Command::Pullback(args) => pullback_cmd(args),
        Command::Decide { question } => decide_cmd(question),
        Command::Yields { input, memory, against } => yields_cmd(input, *memory, against.as_deref()),
        Command::Profile { input, memory, max_m, letters, root, small } => {
            let alg = ReachabilityAlgebra::new(letters.split(',').map(str::trim).filter(|l| !l.is_empty()));
            let s = load_system(input, None)?;
            let p = profile(&alg, &s, *root, *small, Bounds::memory(*memory), *max_m)?;
            let summary = format!("{} pairs{}", p.pairs.len(), if p.complete { "" } else { " (enumeration limit hit)" });
            Ok(Outcome::done(serde_json::to_value(&p)?, summary))
        }
        Command::Recognise { algebra: AlgebraKind::Reach, letters, accept, input } => {
            let alg = ReachabilityAlgebra::new(letters.split(',').map(str::trim).filter(|l| !l.is_empty()));
            let s = load_system(input, None)?;
            let accepting = match accept {
                Accept::Bottom => Reach::bottom(0),
                Accept::Empty => Reach::set(0, []),
            };
            let value = rho(&alg, &s)?;
            let yes = recognises(&alg, &[accepting], &s)?;
            let summary = format!("value {value}, {}", if yes { "accepted" } else { "rejected" });
            Ok(Outcome::decided(json!({ "value": value, "accepted": yes }), yes, summary))
        }
        Command::Ya { op } => ya_cmd(op),
        Command::Aut { op } => aut_cmd(op),
        Command::Corpus { seed, count, kind, max_vertices, rank, alphabet } => corpus_cmd(*seed, *count, *kind, *max_vertices, *rank, alphabet),
        Command::Suite { examples: _, filter } => {
            let checks: Vec<_> = reference_checks().into_iter().filter(|c| filter.as_ref().is_none_or(|f| c.name.contains(f.as_str()))).collect();
            let passed = checks.iter().filter(|c| c.passed).count();
            let summary = format!("{passed}/{} examples passed", checks.len());
            Ok(Outcome::decided(serde_json::to_value(&checks)?, passed == checks.len(), summary))
        }
    }
}

fn validate_cmd(inputs: &[PathBuf], alphabet: Option<&str>) -> Result<Outcome> {
    let alpha = alphabet.map(parse_alphabet).transpose()?;
    let systems = inputs.iter().map(|p| load_system(p, alpha.as_ref())).collect::<Result<Vec<_>>>()?;
    let reports = par_map(&systems, workers()?, |s| match &alpha {
        Some(a) => validate_in(s, a),
        None => validate(s),
    });
    let valid = reports.iter().filter(|r| r.is_valid()).count();
    let items: Vec<Value> = inputs.iter().zip(&reports).map(|(p, r)| json!({ "input": p.display().to_string(), "valid": r.is_valid(), "report": r })).collect();
    let summary = format!("{valid}/{} valid", inputs.len());
    Ok(Outcome::decided(Value::Array(items), valid == inputs.len(), summary))
}

fn morphism_cmd(op: &MorphismOp) -> Result<Outcome> {
    match op {
        MorphismOp::Check { lhs, rhs, map } => {
            let (s, t) = (load_system(lhs, None)?, load_system(rhs, None)?);
            let m = parse_map(map, &s, &t)?;
            let check = check_morphism(&s, &t, &m)?;
            let summary = if check.is_locally_surjective() {
                "locally surjective morphism"
            } else if check.is_morphism() {
                "morphism, not locally surjective"
            } else {
                "not a morphism"
            };
            Ok(Outcome::decided(serde_json::to_value(&check)?, check.is_morphism(), summary))
        }
        MorphismOp::Find { lhs, rhs, locally_surjective } => {
            let (s, t) = (load_system(lhs, None)?, load_system(rhs, None)?);
            let found = find_morphism_with(&s, &t, SearchMode { locally_surjective: *locally_surjective });
            let summary = if found.is_some() { "found" } else { "none exists" };
            let map = found.as_ref().map(|m| id_map(&s, &t, m));
            Ok(Outcome::decided(json!({ "map": map }), found.is_some(), summary))
        }
        MorphismOp::Pullback(args) => pullback_cmd(args),
    }
}

fn pullback_cmd(a: &PullbackArgs) -> Result<Outcome> {
    let (s, s2, t) = (load_system(&a.left, None)?, load_system(&a.right, None)?, load_system(&a.base, None)?);
    let map_of = |given: &Option<String>, from: &SetSystem<Sym>, which: &str| -> Result<Vec<usize>> {
        match given {
            Some(text) => {
                let m = parse_map(text, from, &t)?;
                if !check_morphism(from, &t, &m)?.is_morphism() {
                    bail!("--{which}-map is not a morphism into the base");
                }
                Ok(m)
            }
            None => find_morphism_with(from, &t, SearchMode::default()).with_context(|| format!("no morphism from the {which} system into the base")),
        }
    };
    let (eta, eta2) = (map_of(&a.left_map, &s, "left")?, map_of(&a.right_map, &s2, "right")?);
    let pb = pullback(&s, &eta, &s2, &eta2, a.trim)?;
    let pairs: Vec<Value> = pb.pairs.iter().map(|&(v, w)| json!([s.vertices[v].id, s2.vertices[w].id])).collect();
    let summary = pb.system.summary();
    Ok(Outcome::done(json!({ "system": doc(&pb.system), "pairs": pairs }), summary))
}

fn write_witness(path: Option<&Path>, value: &Value) -> Result<()> {
    if let Some(p) = path {
        std::fs::write(p, serde_json::to_string_pretty(value)? + "\n").with_context(|| format!("{}: cannot write", p.display()))?;
    }
    Ok(())
}

fn decide_cmd(q: &Decide) -> Result<Outcome> {
    match q {
        Decide::UnfoldEq { lhs, rhs, witness } => {
            let (s, t) = (load_system(lhs, None)?, load_system(rhs, None)?);
            match unfold_equivalent(&s, &t)? {
                UnfoldVerdict::Equivalent(u) => {
                    let w = doc(&u.system);
                    write_witness(witness.as_deref(), &w)?;
                    let summary = format!("unfold-equivalent, common unfolding has {} vertices", u.system.len());
                    Ok(Outcome::decided(json!({ "equivalent": true, "common_unfolding": w }), true, summary))
                }
                UnfoldVerdict::Different(d) => {
                    let w = serde_json::to_value(&d)?;
                    write_witness(witness.as_deref(), &w)?;
                    let summary = format!("not unfold-equivalent: {}", d.reason);
                    Ok(Outcome::decided(json!({ "equivalent": false, "distinction": w }), false, summary))
                }
            }
        }
        Decide::Bisim { lhs, rhs, witness } => {
            let (a, b) = (load_ts(lhs)?, load_ts(rhs)?);
            let verdict = bisimilar(&a, &b);
            let w = match &verdict {
                BisimVerdict::Bisimilar { relation } => Value::Array(relation.iter().map(|&(x, y)| json!([a.ids[x], b.ids[y]])).collect()),
                BisimVerdict::NotBisimilar { round } => json!({ "round": round }),
            };
            write_witness(witness.as_deref(), &w)?;
            let summary = match &verdict {
                BisimVerdict::Bisimilar { relation } => format!("bisimilar, relation of {} pairs", relation.len()),
                BisimVerdict::NotBisimilar { round } => format!("not bisimilar, split at round {round}"),
            };
            Ok(Outcome::decided(json!({ "bisimilar": verdict.holds(), "witness": w, "lhs": ts_to_doc(&a), "rhs": ts_to_doc(&b) }), verdict.holds(), summary))
        }
    }
}

fn yields_cmd(input: &Path, memory: usize, against: Option<&Path>) -> Result<Outcome> {
    let s = load_system(input, None)?;
    let bounds = Bounds::memory(memory);
    match against {
        None => {
            let y = yields(&s, bounds);
            let init: Vec<Value> = y.init.systems.iter().map(doc).collect();
            let root: Vec<Value> = y.root_yields().iter().map(doc).collect();
            let complete = y.init.complete && y.uprooted.complete;
            let summary = format!("{} init-yields, {} root-yields up to unfold-equivalence", init.len(), root.len());
            Ok(Outcome::done(json!({ "memory": memory, "complete": complete, "init": init, "root": root }), summary))
        }
        Some(other) => {
            let t = load_system(other, None)?;
            match yield_equal_bounded(&s, &t, bounds)? {
                None => Ok(Outcome::decided(json!({ "memory": memory, "equal": true }), true, format!("no difference among yields with memory {memory}"))),
                Some((left, w)) => {
                    let side = if left { "input" } else { "other" };
                    let summary = format!("the {side} set-system has a yield the other lacks");
                    Ok(Outcome::decided(json!({ "memory": memory, "equal": false, "only_in": side, "witness": doc(&w) }), false, summary))
                }
            }
        }
    }
}

fn context_of(p: &Presentation, args: &ContextArgs) -> Result<(Vec<usize>, regtree::ya::RankedElementRep)> {
    let m = args.context.split(',').map(|n| p.one(n.trim())).collect::<regtree::Result<Vec<_>>>()?;
    Ok((m, p.letter_rep(&args.letter)?))
}

fn ya_cmd(op: &YaOp) -> Result<Outcome> {
    match op {
        YaOp::Validate { presentation } => {
            let p = load_presentation(presentation)?;
            let r = validate_presentation(&p);
            let summary = format!("{} checks, {} violations", r.checked, r.violations.len());
            Ok(Outcome::decided(serde_json::to_value(&r)?, r.holds(), summary))
        }
        YaOp::Eval { presentation, input } => {
            let p = load_presentation(presentation)?;
            let s = load_system(input, Some(&p.alphabet()))?;
            let yes = presentation_accepts(&p, &s)?;
            Ok(Outcome::decided(json!({ "accepted": yes }), yes, if yes { "accepted" } else { "rejected" }))
        }
        YaOp::Extremal(args) => {
            let p = load_presentation(&args.presentation)?;
            let (t, a) = context_of(&p, args)?;
            let x = extremal_context(&p, &t, &a)?;
            let names: Vec<&str> = x.m.iter().map(|&y| p.y1[y].as_str()).collect();
            let summary = format!("m = ({})", names.join(", "));
            Ok(Outcome::decided(json!({ "m": names, "checks": x }), x.holds(), summary))
        }
        YaOp::Delta(args) => {
            let p = load_presentation(&args.presentation)?;
            let (m, a) = context_of(&p, args)?;
            let out = build_delta(&p, &m, &a)?;
            let summary = format!("δ = {}", p.show_rep(&out.delta));
            Ok(Outcome::decided(json!({ "delta": p.show_rep(&out.delta), "checks": out }), out.holds(), summary))
        }
    }
}

/// An automaton document, or the name of a shipped presentation to compile.
fn load_automaton(arg: &str) -> Result<UnfoldAutomaton> {
    let path = Path::new(arg);
    if path.exists() {
        return UnfoldAutomaton::from_json(&read_input(path)?).with_context(|| arg.to_string());
    }
    Ok(compile_algebra(&shipped_presentation(arg)?)?)
}

fn automaton_value(aut: &UnfoldAutomaton) -> Result<Value> {
    Ok(serde_json::from_str(&aut.to_json())?)
}

fn aut_cmd(op: &AutOp) -> Result<Outcome> {
    match op {
        AutOp::Compile { presentation, dpa } => {
            let p = load_presentation(presentation)?;
            let mut aut = compile_algebra(&p)?;
            if *dpa {
                let d = dpa_for(presentation).with_context(|| format!("no parity automaton ships with `{presentation}`"))?;
                aut = aut.with_omega(AcceptanceSpec::Dpa { dpa: d })?;
            }
            let summary = format!("{} Y1 states, {} Y0 states", aut.x1.len(), aut.x0.len());
            Ok(Outcome::done(automaton_value(&aut)?, summary))
        }
        AutOp::Accept { automaton, inputs } => {
            let aut = load_automaton(automaton)?;
            let systems = inputs.iter().map(|p| load_system(p, Some(&aut.alphabet))).collect::<Result<Vec<_>>>()?;
            let verdicts = par_map(&systems, workers()?, |s| accepts(&aut, s));
            let mut items = Vec::new();
            let mut accepted = 0;
            for (p, v) in inputs.iter().zip(verdicts) {
                let m = v.with_context(|| p.display().to_string())?;
                accepted += usize::from(m.accepted);
                items.push(json!({ "input": p.display().to_string(), "accepted": m.accepted, "run": m.run, "work": m.work }));
            }
            let summary = format!("{accepted}/{} accepted", inputs.len());
            Ok(Outcome::decided(Value::Array(items), accepted == inputs.len(), summary))
        }
        AutOp::Closure { automaton } => {
            let closed = bisim_closure(&load_automaton(automaton)?)?;
            let summary = format!("{} symbols", closed.alphabet.symbols.len());
            Ok(Outcome::done(automaton_value(&closed)?, summary))
        }
        AutOp::EmitFormula { automaton } => {
            let text = emit_disjunctive_formula(&load_automaton(automaton)?)?;
            let lines: Vec<&str> = text.lines().collect();
            let summary = format!("{} valuations", lines.len());
            Ok(Outcome::done(json!(lines), summary))
        }
    }
}

/// splitmix64, to give every corpus item its own seed.
fn item_seed(seed: u64, i: usize) -> u64 {
    let mut z = seed.wrapping_add((i as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn corpus_cmd(seed: u64, count: usize, kind: CorpusKind, max_vertices: usize, rank: usize, alphabet: &str) -> Result<Outcome> {
    if max_vertices == 0 {
        bail!("--max-vertices must be positive");
    }
    let alpha = parse_alphabet(alphabet)?;
    let indices: Vec<usize> = (0..count).collect();
    let items = par_map(&indices, workers()?, |&i| {
        let mut g = Gen::new(item_seed(seed, i));
        match kind {
            CorpusKind::Systems => serde_json::to_value(system_to_doc(&g.system(&alpha, rank, max_vertices))),
            CorpusKind::SetSystems => serde_json::to_value(system_to_doc(&g.set_system(&alpha, rank, Shape::set_system(max_vertices)))),
            CorpusKind::TransitionSystems => serde_json::to_value(ts_to_doc(&g.transition_system(max_vertices, &["p", "q"], 3))),
            CorpusKind::Games => serde_json::to_value(g.parity_game(max_vertices, 4)),
        }
    });
    let items = items.into_iter().collect::<serde_json::Result<Vec<_>>>()?;
    let summary = format!("{count} items from seed {seed}");
    Ok(Outcome::done(json!({ "seed": seed, "count": count, "items": items }), summary))
}
