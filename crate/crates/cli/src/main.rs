//! `dtl`: satisfiability, model checking and automaton export for anchored
//! distributed temporal logic.
//!
//! Exit codes: 0 SAT / verdict holds, 1 UNSAT / verdict fails, 2 usage or
//! input error, 3 resource cap reached, 4 internal inconsistency.

mod spec;
mod wordfile;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use dtl_core::automata::Gnba;
use dtl_core::automata::Letter;
use dtl_core::dalpha::{satisfiable_in, verify_witness, DtlAutomaton, DtlConstraints, SatOptions};
use dtl_core::export::{symbol_letter, to_dot, valuation_letter, JsonAutomaton};
use dtl_core::formula::GlobalFormula;
use dtl_core::product::Dnba;
use dtl_core::semantics::{derive_structure, sat_global};
use dtl_core::tableau::build_local_gnba;
use dtl_core::word::{fmt_word, is_fair, unfair_error};
use dtl_core::DtlError;

use spec::{parse_spec, Spec};
use wordfile::{parse_word_file, word_to_json};

#[derive(Parser)]
#[command(name = "dtl", version, about = "Büchi automata for anchored distributed temporal logic")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide satisfiability of the spec's formula.
    Sat {
        spec: PathBuf,
        /// Decide the negation instead (UNSAT means the formula is valid).
        #[arg(long)]
        negate: bool,
        /// Write the witness word here, in the word file format.
        #[arg(long, value_name = "PATH")]
        witness: Option<PathBuf>,
        /// Re-check the witness against the trace semantics.
        #[arg(long)]
        verify: bool,
        #[arg(long, value_name = "N", default_value_t = 2_000_000)]
        max_states: usize,
        /// Seconds.
        #[arg(long, value_name = "S")]
        timeout: Option<f64>,
    },
    /// Check one lasso word against the formula, semantically and by automaton.
    Check {
        spec: PathBuf,
        #[arg(long, value_name = "PATH")]
        word: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Write an automaton to a file.
    Export {
        spec: PathBuf,
        /// `local:<agent>`, `product` or `constrained`.
        #[arg(long)]
        stage: String,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        #[arg(long, value_name = "N", default_value_t = 2_000_000)]
        max_states: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

/// Everything that ends a command other than a verdict.
#[derive(Debug)]
enum Failure {
    Input(String),
    Cap(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Cap(_) => 3,
            Failure::Internal(_) => 4,
        }
    }
}

impl From<DtlError> for Failure {
    fn from(e: DtlError) -> Self {
        match e {
            DtlError::ResourceExhausted(_) => Failure::Cap(e.to_string()),
            DtlError::Internal(_) | DtlError::MisalignedRun(_) | DtlError::LabelMismatch { .. } => {
                Failure::Internal(e.to_string())
            }
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "error: {m}"),
            Failure::Cap(m) => write!(f, "resource limit: {m}"),
            Failure::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_spec(path: &Path) -> Result<Spec, Failure> {
    parse_spec(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn cmd_sat(path: &Path, negate: bool, witness: Option<&Path>, verify: bool, max_states: usize, timeout: Option<f64>) -> Outcome {
    let spec = load_spec(path)?;
    let mut alpha = spec.formula()?.clone();
    if negate {
        alpha = GlobalFormula::not(alpha);
    }
    let timeout = match timeout {
        Some(s) if !(s.is_finite() && s > 0.0) => return Err(Failure::Input("--timeout must be a positive number of seconds".into())),
        t => t.map(Duration::from_secs_f64),
    };
    let opts = SatOptions {
        max_states,
        timeout,
        verify: false,
        ..SatOptions::default()
    };
    let d = DtlAutomaton::new(&spec.sig, &alpha, DtlConstraints::default())?;
    match satisfiable_in(&d, &opts)? {
        None => {
            println!("UNSAT");
            Ok(1)
        }
        Some(w) => {
            println!("SAT");
            println!("witness: {}", fmt_word(&spec.sig, &w.word));
            if verify {
                verify_witness(&d, &w).map_err(|e| Failure::Internal(format!("witness failed verification: {e}")))?;
                println!("verified: fair, accepted by the automaton, model of the formula");
            }
            if let Some(p) = witness {
                write(p, &word_to_json(&w.word, &spec.sig))?;
            }
            Ok(0)
        }
    }
}

fn cmd_check(path: &Path, word: &Path, as_json: bool) -> Outcome {
    let spec = load_spec(path)?;
    let alpha = spec.formula()?;
    let w = parse_word_file(&read(word)?, &spec.sig).map_err(|e| Failure::Input(format!("{}: {e}", word.display())))?;
    if !is_fair(&w, spec.sig.num_agents()) {
        return Err(Failure::Input(format!("{}: {}", word.display(), unfair_error(&w, &spec.sig))));
    }
    let semantic = sat_global(&derive_structure(&w, spec.sig.num_agents())?, alpha);
    let automaton = DtlAutomaton::new(&spec.sig, alpha, DtlConstraints::default())?.accepts(&w);
    if as_json {
        let report = json!({ "semantics": semantic, "automaton": automaton, "agree": semantic == automaton });
        println!("{report}");
    } else {
        println!("semantics: {}", if semantic { "model" } else { "not a model" });
        println!("automaton: {}", if automaton { "accepted" } else { "rejected" });
    }
    if semantic != automaton {
        return Err(Failure::Internal("the semantic and automaton verdicts disagree".into()));
    }
    Ok(if semantic { 0 } else { 1 })
}

fn render<L: Letter>(g: &Gnba<L>, format: Format, letter: impl Fn(&L) -> String) -> String {
    match format {
        Format::Dot => to_dot(g, letter),
        Format::Json => JsonAutomaton::from_gnba(g, letter).to_json(),
    }
}

fn cmd_export(path: &Path, stage: &str, format: Format, out: &Path, max_states: usize) -> Outcome {
    let spec = load_spec(path)?;
    let sig = &spec.sig;
    let (text, states) = match stage.split_once(':') {
        Some(("local", name)) => {
            let i = sig.agent(name)?;
            let g = build_local_gnba(sig, spec.formula()?, i)?;
            (render(&g, format, |v| sig.fmt_valuation(i, *v)), g.ts.num_states())
        }
        None if stage == "product" && !spec.automata.is_empty() => {
            let d = Dnba::build(spec.automata.clone())?;
            let g = d.as_gnba();
            (render(g, format, symbol_letter), g.ts.num_states())
        }
        None if stage == "product" || stage == "constrained" => {
            let (constraints, prune) = if stage == "product" {
                (DtlConstraints::none(), false)
            } else {
                (DtlConstraints::default(), true)
            };
            let g = DtlAutomaton::new(sig, spec.formula()?, constraints)?.explicit(prune, max_states)?;
            (render(&g, format, valuation_letter(sig)), g.ts.num_states())
        }
        _ => {
            return Err(Failure::Input(format!(
                "unknown stage `{stage}`; expected `local:<agent>`, `product` or `constrained`"
            )))
        }
    };
    write(out, &text)?;
    println!("wrote {} ({states} states)", out.display());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let r = match &cli.cmd {
        Cmd::Sat {
            spec,
            negate,
            witness,
            verify,
            max_states,
            timeout,
        } => cmd_sat(spec, *negate, witness.as_deref(), *verify, *max_states, *timeout),
        Cmd::Check { spec, word, json } => cmd_check(spec, word, *json),
        Cmd::Export {
            spec,
            stage,
            format,
            out,
            max_states,
        } => cmd_export(spec, stage, *format, out, *max_states),
    };
    match r {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code())
        }
    }
}
