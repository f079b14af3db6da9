use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::{One, Zero};

use nonlocal::boxes::{check_non_signaling, make_correlated, make_even_parity, make_full_correlation, make_npr};
use nonlocal::boxfile::{box_to_json, load_box};
use nonlocal::commcost::{plan, verify_plan_end_to_end};
use nonlocal::distill::{iterate, MAX_VALIDATE_PARTIES};
use nonlocal::locality::{decide_locality, CertificateKind, Locality, MAX_LOCALITY_PARTIES};
use nonlocal::rational::{format_rational, parse_unit};
use nonlocal::report::analyze;
use nonlocal::wiring::{builtin_wiring, compose_triangle, evaluate_wiring, load_wiring};
use nonlocal::{AnfFunction, BoxTable, Error};

/// Rounds of distillation replayed through the wiring engine by `--validate`.
const VALIDATE_ROUNDS: usize = 3;

#[derive(Parser)]
#[command(name = "nonlocal", version, about = "Exact analysis of n-party non-signaling boxes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or inspect box files.
    #[command(subcommand)]
    Box(BoxCommand),
    /// Exact trajectory of repeated distillation, as CSV.
    Distill(DistillArgs),
    /// Channel counts and amplification plan for a Boolean function.
    Analyze(AnalyzeArgs),
    /// Apply wirings to boxes.
    #[command(subcommand)]
    Wiring(WiringCommand),
}

#[derive(Subcommand)]
enum BoxCommand {
    /// Write a named box to a box file.
    Build(BuildArgs),
    /// Report non-signaling and locality of a box file.
    Check { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum BoxType {
    Npr,
    EvenParity,
    Correlated,
    Full,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long = "type", value_enum)]
    kind: BoxType,
    #[arg(long)]
    n: usize,
    /// Weight of the PR box in a correlated box, as `p/q`.
    #[arg(long)]
    eps: Option<String>,
    /// ANF expression for a full-correlation box, e.g. `x1*x2 + x3`.
    #[arg(long)]
    expr: Option<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DistillArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    eps: String,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Replay the first rounds through the wiring engine.
    #[arg(long)]
    validate: bool,
    /// Add the distance to the PR box as a column.
    #[arg(long)]
    with_distance: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    expr: String,
    /// Number of parties; defaults to the largest variable index.
    #[arg(long)]
    n: Option<usize>,
    /// Run the plan on exact boxes.
    #[arg(long)]
    verify: bool,
    #[arg(long, default_value = "1/2")]
    eps: String,
    #[arg(long, default_value_t = 1)]
    steps: usize,
}

#[derive(Subcommand)]
enum WiringCommand {
    /// Evaluate a wiring on box files.
    Eval(EvalArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// `identity`, `xor`, `bs`, or a wiring file.
    #[arg(long)]
    wiring: String,
    #[arg(long, num_args = 1.., required = true)]
    boxes: Vec<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    // die quietly like other filters when a downstream pipe closes
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            let precondition = matches!(
                err.downcast_ref::<Error>(),
                Some(Error::Precondition(_) | Error::UnreachableExactly(_) | Error::SizeLimit(_))
            );
            ExitCode::from(if precondition { 2 } else { 1 })
        }
    }
}

fn run(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Box(BoxCommand::Build(args)) => build(args),
        Command::Box(BoxCommand::Check { file }) => check(&file),
        Command::Distill(args) => distill(args),
        Command::Analyze(args) => analyze_cmd(args),
        Command::Wiring(WiringCommand::Eval(args)) => eval(args),
    }
}

/// Writes `text` to `path`, or to stdout without one.
fn emit(text: &str, path: Option<&Path>) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => io::stdout().write_all(text.as_bytes()).context("writing to stdout"),
    }
}

fn build(args: BuildArgs) -> anyhow::Result<ExitCode> {
    let p = match args.kind {
        BoxType::Npr => make_npr(args.n)?,
        BoxType::EvenParity => make_even_parity(args.n)?,
        BoxType::Correlated => {
            let Some(eps) = &args.eps else { bail!("--type correlated needs --eps") };
            make_correlated(args.n, &parse_unit(eps, "eps")?)?
        }
        BoxType::Full => {
            let Some(expr) = &args.expr else { bail!("--type full needs --expr") };
            make_full_correlation(&AnfFunction::parse(expr, args.n)?)?
        }
    };
    emit(&box_to_json(&p), args.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn check(file: &Path) -> anyhow::Result<ExitCode> {
    let p = load_box(file)?;
    let n = p.n();
    println!("parties: {n}");
    match check_non_signaling(&p) {
        Ok(()) => println!("non-signaling: yes"),
        Err(w) => println!("non-signaling: no ({})", w.describe(n)),
    }
    if n > MAX_LOCALITY_PARTIES {
        println!("local: undecided (locality is decided for at most {MAX_LOCALITY_PARTIES} parties)");
        return Ok(ExitCode::SUCCESS);
    }
    match decide_locality(&p)? {
        Locality::Local(model) => {
            println!("local: yes");
            println!("model: {model}");
            println!("model reproduces box: {}", if model.reproduces(&p) { "yes" } else { "no" });
        }
        Locality::NonLocal(cert) => {
            println!("local: no");
            let kind = match cert.kind() {
                CertificateKind::BellInequality => "Bell inequality",
                CertificateKind::Signaling(_) => "signaling functional",
            };
            println!(
                "certificate: {kind} with value {} against local bound {}",
                format_rational(&cert.value(&p)),
                format_rational(&cert.local_bound())
            );
            println!("certificate verified: {}", if cert.verify(&p) { "yes" } else { "no" });
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn distill(args: DistillArgs) -> anyhow::Result<ExitCode> {
    let eps = parse_unit(&args.eps, "eps")?;
    // with an output file the notices can go to stdout; otherwise keep stdout pure CSV
    let notice = |line: String| {
        if args.output.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    };
    let fixed = eps.is_zero() || eps.is_one();
    let trajectory = iterate(args.n, &eps, if fixed { 0 } else { args.steps })?;
    emit(&trajectory.to_csv(args.with_distance), args.output.as_deref())?;
    if fixed {
        notice(format!("eps = {} is a fixed point of the distillation map", format_rational(&eps)));
    }
    if args.validate {
        if args.n > MAX_VALIDATE_PARTIES {
            bail!(Error::PartyCount { n: args.n, min: 2, max: MAX_VALIDATE_PARTIES });
        }
        let rounds = trajectory.steps().min(VALIDATE_ROUNDS);
        let mut current = make_correlated(args.n, &eps)?;
        let mut matched = true;
        for k in 1..=rounds {
            current = compose_triangle(&current, &current)?;
            matched &= current == make_correlated(args.n, &trajectory.eps()[k])?;
        }
        if rounds == 0 {
            matched = compose_triangle(&current, &current)? == current;
        }
        notice(format!(
            "wiring oracle: {} ({} rounds replayed)",
            if matched { "MATCH" } else { "MISMATCH" },
            rounds.max(1)
        ));
        if !matched {
            return Ok(ExitCode::from(1));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn analyze_cmd(args: AnalyzeArgs) -> anyhow::Result<ExitCode> {
    let n = match args.n {
        Some(n) => n,
        None => highest_variable(&args.expr),
    };
    let f = AnfFunction::parse(&args.expr, n)?;
    let report = analyze(&f)?;
    print!("{report}");
    if args.verify {
        let p = plan(&f)?;
        let outcome = verify_plan_end_to_end(&p, &parse_unit(&args.eps, "eps")?, args.steps)?;
        print!("{outcome}");
        if !outcome.succeeded() {
            return Ok(ExitCode::from(1));
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Largest `k` appearing as `x<k>`, or 1 when there is none; the parser
/// reports anything malformed.
fn highest_variable(expr: &str) -> usize {
    let bytes = expr.as_bytes();
    let mut best = 1;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'x' {
            let digits: String = expr[i + 1..].chars().take_while(|c| c.is_ascii_digit()).collect();
            if let Ok(k) = digits.parse::<usize>() {
                best = best.max(k);
            }
            i += 1 + digits.len();
        } else {
            i += 1;
        }
    }
    best
}

fn eval(args: EvalArgs) -> anyhow::Result<ExitCode> {
    let boxes: Vec<BoxTable> = args.boxes.iter().map(|p| load_box(p)).collect::<Result<_, _>>()?;
    let n = boxes[0].n();
    let wiring = match builtin_wiring(&args.wiring, n)? {
        Some(w) => w,
        None => load_wiring(Path::new(&args.wiring))?,
    };
    let out = evaluate_wiring(&boxes, &wiring)?;
    emit(&box_to_json(&out), args.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}
