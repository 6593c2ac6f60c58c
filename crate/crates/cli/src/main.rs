use clap::{Parser, Subcommand};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use ttdef_core::analysis::Analyzer;
use ttdef_core::constructions::{associate, compose_dtr};
use ttdef_core::functionality::{is_functional, FunctionalityVerdict};
use ttdef_core::model::{check_monadic, parse_spec_file, render_att, render_spec, render_tdtt, AttSpec, Decl, PairedSpec};
use ttdef_core::pipeline::{decide_dtr, BudgetConfig};
use ttdef_core::semantics::{enumerate_outputs, trace_att};
use ttdef_core::trees::Tree;
use ttdef_core::words::{build_two_way, one_way_definability, replay_certificate, Certificate, DefinabilityResult, TwoWayWord};

#[derive(Parser)]
#[command(name = "ttdef", version, about = "Attributed tree transducers with monadic output: analysis and dt^R decision")]
struct Cli {
    /// Machine-readable output
    #[arg(long, global = true)]
    json: bool,
    /// Budget file of `key = value` lines (default: $TTDEF_CONFIG)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Stage timings and derivations on stderr
    #[arg(long, global = true)]
    trace: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and check a spec file
    Validate { file: PathBuf },
    /// Evaluate the main declaration on a tree
    Eval { file: PathBuf, tree: String },
    /// Circularity, visiting pair sets, variation and single path
    Analyze { file: PathBuf },
    /// Build the associated att with look-ahead
    Associate {
        file: PathBuf,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Build the two-way word transducer
    ToTwoWay {
        file: PathBuf,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// One-way definability of a two-way transducer
    Definable {
        file: PathBuf,
        /// Replay a certificate instead of searching
        #[arg(long)]
        replay: Option<PathBuf>,
        #[arg(long)]
        budget_words: Option<usize>,
    },
    /// Synthesize the one-way transducer
    Synthesize {
        file: PathBuf,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Run the full decision pipeline
    Decide {
        file: PathBuf,
        /// Artifact directory
        #[arg(long, default_value = "ttdef-out")]
        out: PathBuf,
    },
    /// Functionality check
    Functional { file: PathBuf },
    /// Compose two dt^R (or look-around) specs
    Compose {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
}

struct Ctx {
    json: bool,
    trace: bool,
    cfg: BudgetConfig,
}

type Res = Result<u8, String>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind::*;
            if matches!(e.kind(), DisplayHelp | DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn load_config(path: Option<PathBuf>) -> Result<BudgetConfig, String> {
    let path = path.or_else(|| std::env::var_os("TTDEF_CONFIG").map(PathBuf::from));
    match path {
        None => Ok(BudgetConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(&p).map_err(|e| format!("{}: {e}", p.display()))?;
            BudgetConfig::parse(&text).map_err(|e| format!("{}: {e}", p.display()))
        }
    }
}

fn load(path: &Path) -> Result<Decl, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let f = parse_spec_file(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(f.main().clone())
}

fn load_att(path: &Path) -> Result<AttSpec, String> {
    match load(path)? {
        Decl::Att(a) => Ok(a),
        d => Err(format!("{}: expected an att, got {} `{}`", path.display(), kind(&d), d.name())),
    }
}

fn kind(d: &Decl) -> &'static str {
    match d {
        Decl::Att(_) => "att",
        Decl::Tdtt(_) => "tdtt",
        Decl::Relabeling(_) => "relabeling",
        Decl::Pair(p) => p.kind(),
    }
}

fn emit(ctx: &Ctx, text: &str, to: &Option<PathBuf>) -> Res {
    match to {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display()))?;
            if ctx.json {
                println!("{}", serde_json::json!({ "written": p.display().to_string() }));
            } else {
                println!("wrote {}", p.display());
            }
        }
        None => print!("{text}"),
    }
    Ok(0)
}

fn print_json<T: Serialize>(x: &T) {
    println!("{}", serde_json::to_string_pretty(x).expect("serializable"));
}

/// A monadic-input att is taken as is; anything else goes through associate.
fn two_way_of(a: AttSpec) -> Result<TwoWayWord, String> {
    if a.input.is_monadic() {
        TwoWayWord::new(a).map_err(|e| e.to_string())
    } else {
        let h = associate(&a).map_err(|e| format!("associate: {e}"))?;
        build_two_way(&h).map_err(|e| format!("build_two_way: {e}"))
    }
}

fn run(cli: Cli) -> Res {
    let ctx = Ctx {
        json: cli.json,
        trace: cli.trace,
        cfg: load_config(cli.config)?,
    };
    match cli.cmd {
        Cmd::Validate { file } => {
            let d = load(&file)?;
            let monadic = match &d {
                Decl::Att(a) => Some(check_monadic(a).verdict),
                _ => None,
            };
            if ctx.json {
                print_json(&serde_json::json!({"name": d.name(), "kind": kind(&d), "monadic_output": monadic}));
            } else {
                println!("{} `{}` ok", kind(&d), d.name());
                if let Some(m) = monadic {
                    println!("monadic output: {m}");
                }
            }
            Ok(0)
        }
        Cmd::Eval { file, tree } => {
            let d = load(&file)?;
            let s = Tree::parse(&tree, d.input()).map_err(|e| format!("tree: {e}"))?;
            if ctx.trace {
                if let Decl::Att(a) = &d {
                    eprint!("{}", trace_att(a, &s, &ctx.cfg.steps()).to_json_lines());
                }
            }
            let (outs, complete) = enumerate_outputs(&d, &s, &ctx.cfg.steps());
            let outs: Vec<String> = outs.iter().map(|t| t.to_string()).collect();
            if ctx.json {
                print_json(&serde_json::json!({"input": s.to_string(), "outputs": outs, "complete": complete}));
            } else if outs.is_empty() {
                println!("undefined");
            } else {
                for o in &outs {
                    println!("{o}");
                }
            }
            Ok(if complete { 0 } else { 2 })
        }
        Cmd::Analyze { file } => {
            let a = load_att(&file)?;
            let r = Analyzer::new(&a).map_err(|e| format!("analyze: {e}"))?.report();
            if ctx.json {
                print_json(&r);
            } else {
                println!("circular: {}", r.circular);
                println!("isd count: {}", r.isds.len());
                for (psi, v) in r.visiting_sets.iter().zip(&r.variations) {
                    let shown: Vec<String> = psi.iter().map(|[b, a]| format!("({b},{a})")).collect();
                    println!("visiting {{{}}}: {}", shown.join(","), serde_json::to_string(v).expect("serializable"));
                }
                println!("kappa: {}", r.kappa);
                println!("single path: {}", serde_json::to_string(&r.single_path).expect("serializable"));
            }
            Ok(0)
        }
        Cmd::Associate { file, emit: to } => {
            let a = load_att(&file)?;
            let h = associate(&a).map_err(|e| format!("associate: {e}"))?;
            let text = render_spec(&Decl::Pair(h.to_paired(&format!("{}_assoc", a.name))));
            emit(&ctx, &text, &to)
        }
        Cmd::ToTwoWay { file, emit: to } => {
            let a = load_att(&file)?;
            let tw = two_way_of(a)?;
            emit(&ctx, &render_att(&tw.att), &to)
        }
        Cmd::Definable { file, replay, budget_words } => {
            let tw = two_way_of(load_att(&file)?)?;
            if let Some(p) = replay {
                let text = std::fs::read_to_string(&p).map_err(|e| format!("{}: {e}", p.display()))?;
                let cert: Certificate = serde_json::from_str(&text)
                    .or_else(|_| {
                        let v: serde_json::Value = serde_json::from_str(&text)?;
                        serde_json::from_value(v["certificate"].clone())
                    })
                    .map_err(|e| format!("{}: not a certificate: {e}", p.display()))?;
                return match replay_certificate(&tw, &cert) {
                    Ok(()) => {
                        println!("{}", if ctx.json { r#"{"replay":"ok"}"# } else { "certificate replays" });
                        Ok(0)
                    }
                    Err(e) => Err(format!("certificate rejected: {e}")),
                };
            }
            let mut b = ctx.cfg.definability();
            if let Some(n) = budget_words {
                b.budget_words = n;
            }
            let r = one_way_definability(&tw, &b).map_err(|e| e.to_string())?;
            if ctx.json {
                print_json(&r);
            } else {
                match &r {
                    DefinabilityResult::Definable { verified_length, verified_words, .. } => {
                        println!("definable (verified on {verified_words} words up to length {verified_length})")
                    }
                    DefinabilityResult::NotDefinable { certificate } => {
                        println!("not definable");
                        println!("{}", serde_json::to_string(certificate).expect("serializable"));
                    }
                    DefinabilityResult::Unknown { reason } => println!("unknown: {reason}"),
                }
            }
            Ok(if matches!(r, DefinabilityResult::Unknown { .. }) { 2 } else { 0 })
        }
        Cmd::Synthesize { file, emit: to } => {
            let a = load_att(&file)?;
            let tw = two_way_of(a)?;
            match one_way_definability(&tw, &ctx.cfg.definability()).map_err(|e| e.to_string())? {
                DefinabilityResult::Definable { transducer, .. } => {
                    let t = transducer.to_tdtt(&format!("{}_O", tw.att.name), &tw.att.input, &tw.att.output);
                    emit(&ctx, &render_tdtt(&t), &to)
                }
                DefinabilityResult::NotDefinable { .. } => {
                    println!("not definable");
                    Ok(0)
                }
                DefinabilityResult::Unknown { reason } => {
                    println!("unknown: {reason}");
                    Ok(2)
                }
            }
        }
        Cmd::Decide { file, out } => {
            let d = load(&file)?;
            let r = decide_dtr(&d, &ctx.cfg).map_err(|e| e.to_string())?;
            r.persist(&out).map_err(|e| format!("{}: {e}", out.display()))?;
            if ctx.trace {
                for (stage, ms) in &r.timings_ms {
                    eprintln!("{stage}: {ms} ms");
                }
            }
            if ctx.json {
                println!("{}", r.to_json());
            } else {
                for s in &r.stages {
                    match &s.artifact {
                        Some(a) => println!("{:<28} {} [{}]", s.stage, s.verdict, out.join(a).display()),
                        None => println!("{:<28} {}", s.stage, s.verdict),
                    }
                }
                match &r.answer {
                    ttdef_core::pipeline::Answer::Yes { spec } => println!("answer: Yes ({})", out.join(spec).display()),
                    ttdef_core::pipeline::Answer::No { reason, witness } => {
                        println!("answer: No, {reason} ({})", out.join(witness).display())
                    }
                    ttdef_core::pipeline::Answer::Unknown { stage, reason } => println!("answer: Unknown at {stage}: {reason}"),
                }
            }
            Ok(r.exit_code() as u8)
        }
        Cmd::Functional { file } => {
            let d = load(&file)?;
            let v = is_functional(&d, &ctx.cfg.functionality()).map_err(|e| e.to_string())?;
            if ctx.json {
                print_json(&v);
            } else {
                match &v {
                    FunctionalityVerdict::NotFunctional { input, outputs, .. } => {
                        println!("not functional: {input} -> {} and {}", outputs.0, outputs.1)
                    }
                    FunctionalityVerdict::ProductiveCycle { .. } => println!("productive cycle"),
                    FunctionalityVerdict::FunctionalUpTo { depth, checked } => {
                        println!("functional up to depth {depth} ({checked} inputs)")
                    }
                    FunctionalityVerdict::Inconclusive { input } => println!("inconclusive at {input}"),
                }
            }
            Ok(if matches!(v, FunctionalityVerdict::Inconclusive { .. }) { 2 } else { 0 })
        }
        Cmd::Compose { first, second, emit: to } => {
            let pair = |p: &Path| match load(p)? {
                Decl::Pair(x @ (PairedSpec::DtR { .. } | PairedSpec::LookAround(_))) => Ok(x),
                d => Err(format!("{}: expected dtR or lookaround, got {}", p.display(), kind(&d))),
            };
            let (a, b) = (pair(&first)?, pair(&second)?);
            let name = format!("{}_{}", a.name(), b.name());
            let c = compose_dtr(&a, &b, &name).map_err(|e| format!("compose: {e}"))?;
            emit(&ctx, &render_spec(&Decl::Pair(c)), &to)
        }
    }
}
