//! `cohmin`: command-line front end for the transducer toolkit.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cohmin_core::algebra::{compose, interact, intersect, project};
use cohmin_core::coherence::{
    bisim_minimize_with, coherent_difference, coherent_minimize_with, coherent_simulation,
    quotient, Minimized, MinimizeOptions,
};
use cohmin_core::format::{
    parse_regex_file, parse_sfst, parse_trace, sfst_to_dot, to_dot, write_sfst, write_transducer,
};
use cohmin_core::protocol::monitor;
use cohmin_core::symbolic::{
    expand, is_symbolic_protocol, sfst_bisim_minimize, sfst_coherent_minimize,
    sfst_coherent_simulation, GuardMode, Sfst,
};
use cohmin_core::{Error, Signature, Transducer};

#[derive(Parser, Debug)]
#[command(name = "cohmin", version, about = "Protocol-aware transducer minimisation")]
struct Cli {
    /// Write the main result here instead of standard output.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Policy {
    Coherent,
    Bisim,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and check a model.
    Validate { file: PathBuf },
    /// List every trace up to a length.
    Traces {
        #[arg(long, default_value_t = 4)]
        depth: usize,
        file: PathBuf,
    },
    /// Synchronous product over a shared signature.
    Intersect { left: PathBuf, right: PathBuf },
    /// Product that synchronises on shared labels and interleaves the rest.
    Interact { left: PathBuf, right: PathBuf },
    /// Interaction with the shared labels hidden.
    Compose { left: PathBuf, right: PathBuf },
    /// Hide every label not listed.
    Project {
        #[arg(long, value_delimiter = ',')]
        inputs: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        outputs: Vec<String>,
        file: PathBuf,
    },
    /// Minimise under a protocol, or by bisimulation.
    Minimize {
        #[arg(long, value_enum, default_value_t = Policy::Coherent)]
        policy: Policy,
        #[arg(long)]
        protocol: Option<PathBuf>,
        /// `structural`, `bounded-semantic` or `bounded-semantic:LO..HI`.
        #[arg(long, default_value = "structural", value_parser = parse_guard_mode)]
        guard_mode: GuardMode,
        #[arg(long)]
        keep_unreachable: bool,
        file: PathBuf,
    },
    /// Print the greatest coherent simulation.
    Relation {
        #[arg(long)]
        protocol: PathBuf,
        #[arg(long, default_value = "structural", value_parser = parse_guard_mode)]
        guard_mode: GuardMode,
        file: PathBuf,
    },
    /// Bounded coherent equivalence of two transducers.
    Equiv {
        #[arg(long)]
        protocol: PathBuf,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        left: PathBuf,
        right: PathBuf,
    },
    /// Merge two states.
    Quotient {
        #[arg(long, value_delimiter = ',', num_args = 1)]
        pair: Vec<String>,
        file: PathBuf,
    },
    /// Explicit transducer of a symbolic one over a value range.
    Expand {
        #[arg(long, allow_hyphen_values = true)]
        lo: i64,
        #[arg(long, allow_hyphen_values = true)]
        hi: i64,
        file: PathBuf,
    },
    /// Check a trace against a protocol.
    Monitor {
        #[arg(long)]
        protocol: PathBuf,
        #[arg(long)]
        trace: PathBuf,
    },
    /// Graphviz rendering.
    Dot { file: PathBuf },
}

fn parse_guard_mode(s: &str) -> Result<GuardMode, String> {
    match s {
        "structural" => return Ok(GuardMode::Structural),
        "bounded-semantic" => return Ok(GuardMode::DEFAULT_SEMANTIC),
        _ => {}
    }
    let range = s
        .strip_prefix("bounded-semantic:")
        .ok_or_else(|| format!("unknown guard mode `{s}`"))?;
    let (lo, hi) = range
        .split_once("..")
        .ok_or_else(|| format!("expected LO..HI, got `{range}`"))?;
    let lo: i64 = lo.trim().parse().map_err(|e| format!("bad bound `{lo}`: {e}"))?;
    let hi: i64 = hi.trim().parse().map_err(|e| format!("bad bound `{hi}`: {e}"))?;
    if lo > hi {
        return Err(format!("empty range {lo}..{hi}"));
    }
    Ok(GuardMode::BoundedSemantic { lo, hi })
}

/// Failure of a command, already mapped to its exit code.
enum Failure {
    Input(String),
    Limit(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_resource_limit() {
            Failure::Limit(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

type Outcome = Result<bool, Failure>;

enum Model {
    Plain(Transducer),
    Symbolic(Sfst),
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn located(path: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |e| {
        let f = Failure::from(e);
        match f {
            Failure::Input(m) => Failure::Input(format!("{}: {m}", path.display())),
            Failure::Limit(m) => Failure::Limit(format!("{}: {m}", path.display())),
        }
    }
}

fn is_regex_file(text: &str) -> bool {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim_start())
        .any(|l| l.starts_with("regex ") || l == "regex")
}

fn load(path: &Path) -> Result<Model, Failure> {
    let text = read(path)?;
    if is_regex_file(&text) {
        let t = parse_regex_file(&text)
            .and_then(|f| f.compile())
            .map_err(located(path))?;
        return Ok(Model::Plain(t));
    }
    let m = parse_sfst(&text).map_err(located(path))?;
    if m.registers().is_empty() && is_symbolic_protocol(&m) {
        Ok(Model::Plain(m.skeleton()))
    } else {
        Ok(Model::Symbolic(m))
    }
}

fn load_plain(path: &Path) -> Result<Transducer, Failure> {
    match load(path)? {
        Model::Plain(t) => Ok(t),
        Model::Symbolic(_) => Err(Failure::Input(format!(
            "{}: symbolic model not supported here; run `expand` first",
            path.display()
        ))),
    }
}

/// Destination for the main result.
struct Sink<'a> {
    file: Option<&'a Path>,
}

impl Sink<'_> {
    fn emit(&self, text: &str) -> Result<(), Failure> {
        match self.file {
            Some(p) => fs::write(p, text)
                .map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
            None => {
                let mut out = io::stdout().lock();
                out.write_all(text.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|e| Failure::Input(format!("stdout: {e}")))
            }
        }
    }

    /// Model to the sink; the log follows it on stdout either way.
    fn emit_with_log(&self, model: &str, log: &str) -> Result<(), Failure> {
        self.emit(model)?;
        if !log.is_empty() {
            print!("{log}");
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Outcome {
    let sink = Sink {
        file: cli.output.as_deref(),
    };
    match cli.command {
        Command::Validate { file } => {
            let summary = match load(&file)? {
                Model::Plain(t) => format!(
                    "ok: {} states, {} transitions\n",
                    t.states().len(),
                    t.transitions().len()
                ),
                Model::Symbolic(m) => format!(
                    "ok: {} states, {} registers, {} transitions\n",
                    m.states().len(),
                    m.registers().len(),
                    m.transitions().len()
                ),
            };
            sink.emit(&summary)?;
        }
        Command::Traces { depth, file } => {
            let t = load_plain(&file)?;
            let traces = t.traces_upto(depth)?;
            let text: String = traces.iter().map(|w| format!("{w}\n")).collect();
            sink.emit(&text)?;
        }
        Command::Intersect { left, right } => {
            let t = intersect(&load_plain(&left)?, &load_plain(&right)?)?;
            sink.emit(&write_transducer(&t))?;
        }
        Command::Interact { left, right } => {
            let t = interact(&load_plain(&left)?, &load_plain(&right)?)?;
            sink.emit(&write_transducer(&t))?;
        }
        Command::Compose { left, right } => {
            let t = compose(&load_plain(&left)?, &load_plain(&right)?)?;
            sink.emit(&write_transducer(&t))?;
        }
        Command::Project {
            inputs,
            outputs,
            file,
        } => {
            let t = load_plain(&file)?;
            let ins: Vec<&str> = inputs.iter().map(String::as_str).collect();
            let outs: Vec<&str> = outputs.iter().map(String::as_str).collect();
            let keep = Signature::from_names(&ins, &outs)?;
            sink.emit(&write_transducer(&project(&t, &keep)?))?;
        }
        Command::Minimize {
            policy,
            protocol,
            guard_mode,
            keep_unreachable,
            file,
        } => {
            let opts = MinimizeOptions { keep_unreachable };
            let model = load(&file)?;
            let protocol = match (policy, protocol) {
                (Policy::Coherent, None) => {
                    return Err(Failure::Input(
                        "--policy coherent needs --protocol".into(),
                    ))
                }
                (_, p) => p.map(|p| load_plain(&p)).transpose()?,
            };
            match model {
                Model::Plain(t) => {
                    let m: Minimized<Transducer> = match (policy, protocol) {
                        (Policy::Coherent, Some(p)) => coherent_minimize_with(&t, &p, opts)?,
                        _ => bisim_minimize_with(&t, opts),
                    };
                    sink.emit_with_log(&write_transducer(&m.model), &m.log())?;
                }
                Model::Symbolic(t) => {
                    let m = match (policy, protocol) {
                        (Policy::Coherent, Some(p)) => sfst_coherent_minimize(
                            &t,
                            &Sfst::from_transducer(&p),
                            guard_mode,
                            opts,
                        )?,
                        _ => sfst_bisim_minimize(&t, guard_mode, opts)?,
                    };
                    sink.emit_with_log(&write_sfst(&m.model), &m.log())?;
                }
            }
        }
        Command::Relation {
            protocol,
            guard_mode,
            file,
        } => {
            let p = load_plain(&protocol)?;
            let rel = match load(&file)? {
                Model::Plain(t) => coherent_simulation(&t, &p)?,
                Model::Symbolic(t) => {
                    sfst_coherent_simulation(&t, &Sfst::from_transducer(&p), guard_mode)?
                }
            };
            sink.emit(&rel.to_string())?;
        }
        Command::Equiv {
            protocol,
            depth,
            left,
            right,
        } => {
            let p = load_plain(&protocol)?;
            let diff = coherent_difference(&load_plain(&left)?, &load_plain(&right)?, &p, depth)?;
            return match diff {
                None => {
                    sink.emit(&format!("equivalent up to depth {depth}\n"))?;
                    Ok(true)
                }
                Some(w) => {
                    sink.emit(&format!("different: {w}\n"))?;
                    Ok(false)
                }
            };
        }
        Command::Quotient { pair, file } => {
            let [a, b] = pair.as_slice() else {
                return Err(Failure::Input("--pair expects exactly two states `s1,s2`".into()));
            };
            let t = load_plain(&file)?;
            sink.emit(&write_transducer(&quotient(&t, a, b)?))?;
        }
        Command::Expand { lo, hi, file } => {
            if lo > hi {
                return Err(Failure::Input(format!("empty range {lo}..{hi}")));
            }
            let m = match load(&file)? {
                Model::Plain(t) => Sfst::from_transducer(&t),
                Model::Symbolic(m) => m,
            };
            sink.emit(&write_transducer(&expand(&m, lo, hi)?.transducer))?;
        }
        Command::Monitor { protocol, trace } => {
            let p = load_plain(&protocol)?;
            let w = parse_trace(&read(&trace)?).map_err(located(&trace))?;
            let verdict = monitor(&p, &w)?;
            sink.emit(&format!("{verdict}\n"))?;
            return Ok(verdict.is_ok());
        }
        Command::Dot { file } => {
            let text = match load(&file)? {
                Model::Plain(t) => to_dot(&t),
                Model::Symbolic(m) => sfst_to_dot(&m),
            };
            sink.emit(&text)?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Limit(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(4)
        }
    }
}

