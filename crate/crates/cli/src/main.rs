use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use dicesmith::dice::{self, DiceError, DiceOptions, DiceSet, VerifyReport, DEFAULT_MAX_N};
use dicesmith::homeo::{to_unit_interval, QuadratureConfig};
use dicesmith::partition::{self, PartitionError};
use dicesmith::synth::{self, SynthError, DEFAULT_EPS};
use dicesmith::tournament::{self, Tournament, TournamentError, PRESETS};

/// Build and check proper dice whose beat relation is a given tournament.
#[derive(Parser)]
#[command(name = "dicesmith", version)]
struct Cli {
    /// Log progress to stderr; repeat for more detail.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize verified proper dice for a tournament.
    Synth(SynthArgs),
    /// Report exact beat probabilities of a dice file.
    Verify(VerifyArgs),
    /// Sample a regular partition realizing a tournament.
    Partition(PartitionArgs),
    /// Build a universal prefix by repeated simple extension.
    Universal(UniversalArgs),
    /// Print a built-in tournament, or list them.
    Preset(PresetArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Tournament JSON file.
    #[arg(long)]
    tournament: Option<PathBuf>,
    /// Built-in tournament name.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    source: Source,
    /// Dice file to write.
    #[arg(long)]
    out: PathBuf,
    /// Report file; printed to stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Extend the dice to exactly this many sides.
    #[arg(long)]
    sides: Option<usize>,
    /// Distance budget of the continuous construction.
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest quantization size tried.
    #[arg(long, default_value_t = DEFAULT_MAX_N)]
    max_n: usize,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    dice: PathBuf,
    /// Reference tournament JSON file.
    #[arg(long, conflicts_with = "preset")]
    tournament: Option<PathBuf>,
    /// Built-in reference tournament.
    #[arg(long)]
    preset: Option<String>,
    /// Report file; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PartitionArgs {
    #[command(flatten)]
    source: Source,
    /// Elements per block; defaults to the sampling bound for the
    /// synthesized margin.
    #[arg(long)]
    block_size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    /// Small blocks rarely realize the tournament, so the default is generous.
    #[arg(long, default_value_t = 10_000)]
    max_attempts: usize,
    /// Partition file; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct UniversalArgs {
    /// Number of simple extension steps.
    #[arg(long)]
    iterations: usize,
    /// Starting tournament file; a single vertex when omitted.
    #[arg(long, conflicts_with = "preset")]
    tournament: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// Tournament file; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PresetArgs {
    /// Preset name; all names are listed when omitted.
    name: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exit codes: 1 verified mismatch, 2 invalid input, 3 construction failure.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl ToString) -> Self {
        Failure { code: 2, message: message.to_string() }
    }

    fn construction(message: impl ToString) -> Self {
        Failure { code: 3, message: message.to_string() }
    }
}

impl From<TournamentError> for Failure {
    fn from(e: TournamentError) -> Self {
        match e {
            TournamentError::TooLarge(_) => Failure::construction(e),
            _ => Failure::invalid(e),
        }
    }
}

impl From<DiceError> for Failure {
    fn from(e: DiceError) -> Self {
        match e {
            DiceError::SynthesisFailure(_)
            | DiceError::TargetUnreachable { .. }
            | DiceError::RepairFailure { .. }
            | DiceError::Synth(_)
            | DiceError::Homeo(_) => Failure::construction(e),
            _ => Failure::invalid(e),
        }
    }
}

impl From<SynthError> for Failure {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::InvalidEps(_) => Failure::invalid(e),
            _ => Failure::construction(e),
        }
    }
}

impl From<PartitionError> for Failure {
    fn from(e: PartitionError) -> Self {
        match e {
            PartitionError::MaxAttemptsExceeded { .. } | PartitionError::TooLarge { .. } | PartitionError::Homeo(_) => {
                Failure::construction(e)
            }
            _ => Failure::invalid(e),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Synth(a) => cmd_synth(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Partition(a) => cmd_partition(a),
        Command::Universal(a) => cmd_universal(a),
        Command::Preset(a) => cmd_preset(a),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))
}

/// Writes `text` plus a newline to `path`, or to stdout.
fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, format!("{text}\n"))
            .map_err(|e| Failure::invalid(format!("cannot write {}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("report serializes")
}

fn load_tournament(file: Option<&Path>, preset: Option<&str>) -> Result<Option<Tournament>, Failure> {
    Ok(match (file, preset) {
        (Some(p), _) => Some(Tournament::from_json(&read(p)?)?),
        (None, Some(name)) => Some(tournament::preset(name)?),
        (None, None) => None,
    })
}

fn source(s: &Source) -> Result<Tournament, Failure> {
    Ok(load_tournament(s.tournament.as_deref(), s.preset.as_deref())?.expect("clap requires a source"))
}

fn check_eps(eps: f64) -> Result<(), Failure> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Failure::invalid(format!("--eps must lie in (0, 1), got {eps}")))
    }
}

/// Diagnostic floats are written with 17 significant digits.
fn fl(x: f64) -> Value {
    Value::String(format!("{x:.16e}"))
}

fn cmd_synth(a: SynthArgs) -> Result<u8, Failure> {
    let t = source(&a.source)?;
    check_eps(a.eps)?;
    if a.max_n < dice::FIRST_N {
        return Err(Failure::invalid(format!("--max-n must be at least {}", dice::FIRST_N)));
    }
    let opts = DiceOptions {
        target_sides: a.sides,
        seed: a.seed,
        eps: a.eps,
        max_n: a.max_n,
        quad: QuadratureConfig::from_env(),
    };
    let ds = dice::synthesize_dice(&t, &opts)?;
    let verify = dice::verify(&ds, &t);
    if verify.matches != Some(true) {
        return Err(Failure::construction("synthesized dice failed verification"));
    }
    let p = ds.provenance().expect("synthesized dice carry provenance");
    let report = json!({
        "tournament": t.to_file(),
        "sides": ds.sides(),
        "quantized_sides": p.quantized_sides,
        "extension": p.extension.map(|(m, s)| json!({"M": m, "S": s})),
        "seed": p.seed,
        "eps": fl(p.eps),
        "achieved_eps": fl(p.achieved_eps),
        "margin_floor": fl(p.margin_floor),
        "z_values": p.z_values.iter().map(|&z| fl(z)).collect::<Vec<_>>(),
        "delta_schedule": p.delta_schedule.iter().map(|&(v, d)| json!([v, fl(d)])).collect::<Vec<_>>(),
        "continuous_margins": p.continuous_margins.iter().map(|&(i, j, m)| json!([i, j, fl(m)])).collect::<Vec<_>>(),
        "escalation": p.escalation,
        "proper_margin": p.proper_margin,
        "verify": verify_value(&verify),
    });
    emit(Some(&a.out), &ds.to_json())?;
    emit(a.report.as_deref(), &pretty(&report))?;
    Ok(0)
}

fn verify_value(r: &VerifyReport) -> Value {
    serde_json::to_value(r).expect("report serializes")
}

fn cmd_verify(a: VerifyArgs) -> Result<u8, Failure> {
    let ds = DiceSet::from_json(&read(&a.dice)?)?;
    let reference = load_tournament(a.tournament.as_deref(), a.preset.as_deref())?;
    let report = dice::inspect(&ds, reference.as_ref());
    emit(a.out.as_deref(), &pretty(&verify_value(&report)))?;
    let ok = match report.matches {
        Some(m) => m,
        None => report.unoriented.is_empty(),
    };
    Ok(if ok { 0 } else { 1 })
}

fn cmd_partition(a: PartitionArgs) -> Result<u8, Failure> {
    let t = source(&a.source)?;
    check_eps(a.eps)?;
    let quad = QuadratureConfig::from_env();
    let res = synth::synthesize(&t, a.eps, &quad)?;
    let size = match a.block_size {
        Some(0) => return Err(Failure::invalid("--block-size must be positive")),
        Some(n) => n,
        None if t.n() == 1 => 1,
        None => {
            let margin = partition::continuous_margin(&t, &res.tuple, &quad)?;
            let bound = partition::min_n_bound(t.n(), margin);
            usize::try_from(bound).map_err(|_| Failure::construction("sampling bound overflows"))?
        }
    };
    log::info!("sampling blocks of {size}");
    let cdfs: Vec<_> = res.tuple.iter().map(to_unit_interval).collect();
    let out = partition::sample_partition(&t, &cdfs, size, a.seed, a.max_attempts)?;
    log::info!("accepted attempt {} ({} collisions)", out.attempts, out.collisions);
    emit(a.out.as_deref(), &out.scheme.to_json())?;
    Ok(0)
}

fn cmd_universal(a: UniversalArgs) -> Result<u8, Failure> {
    let base = load_tournament(a.tournament.as_deref(), a.preset.as_deref())?.unwrap_or_else(Tournament::trivial);
    let u = tournament::universal_prefix(&base, a.iterations)?;
    emit(a.out.as_deref(), &u.to_json())?;
    Ok(0)
}

fn cmd_preset(a: PresetArgs) -> Result<u8, Failure> {
    match a.name {
        Some(name) => emit(a.out.as_deref(), &tournament::preset(&name)?.to_json())?,
        None => emit(a.out.as_deref(), &PRESETS.join("\n"))?,
    }
    Ok(0)
}
