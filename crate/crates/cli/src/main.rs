//! `renyikit` command-line front end.
//!
//! Exit codes: 0 success, 2 parse or usage error, 3 domain error, 4 a
//! verification check failed.

mod commands;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use renyikit::channel::SecondChannel;
use renyikit::qmat::json::channel_from_json;
use renyikit::verify::Suite;

use commands::{ExponentKind, ProtocolSource, StrategySource};
use output::{Format, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] renyikit::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{failed} of {total} checks failed")]
    VerifyFailed { failed: usize, total: usize },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(renyikit::Error::Domain(_)) => 3,
            CliError::Lib(_) | CliError::Usage(_) => 2,
            CliError::VerifyFailed { .. } => 4,
        }
    }
}

#[derive(Parser)]
#[command(name = "renyikit", version, about = "Quantum Rényi divergences and channel discrimination exponents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatePair {
    /// State JSON for the null hypothesis.
    #[arg(long)]
    rho: PathBuf,
    /// State JSON for the alternative hypothesis.
    #[arg(long)]
    sigma: PathBuf,
}

#[derive(Args)]
struct ChannelArgs {
    /// Channel JSON file.
    #[arg(long, conflicts_with = "preset")]
    channel: Option<PathBuf>,
    /// Named preset such as `identity_2` or `illumination_toy_0.8_0.1`.
    #[arg(long)]
    preset: Option<String>,
    /// Replacer output state JSON (defaults to the preset's alternative, else I/d).
    #[arg(long)]
    sigma: Option<PathBuf>,
}

impl ChannelArgs {
    fn load(&self) -> Result<(renyikit::qmat::KrausChannel, renyikit::qmat::ReplacerSpec), CliError> {
        let sigma = self.sigma.as_deref().map(commands::load_state).transpose()?;
        let (ch, shipped) = commands::load_channel(self.channel.as_ref(), self.preset.as_deref(), sigma.as_ref())?;
        let spec = commands::replacer_for(&ch, sigma, shipped)?;
        Ok((ch, spec))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Rényi divergences of two states over a list of orders.
    Divergence {
        #[command(flatten)]
        states: StatePair,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
        alpha: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "petz,sandwiched")]
        family: Vec<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Hypothesis-testing relative entropy with an optimal test.
    HypothesisTest {
        #[command(flatten)]
        states: StatePair,
        #[arg(long, value_delimiter = ',', default_value = "0.1")]
        epsilon: Vec<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Discrimination exponents of a channel against a replacer.
    Exponent {
        #[arg(long, value_enum)]
        kind: ExponentKind,
        #[command(flatten)]
        channel: ChannelArgs,
        /// Rate grid for `sc` and `composite`.
        #[arg(long, value_delimiter = ',')]
        r: Vec<f64>,
        /// Rate grid for `feedback`.
        #[arg(long, value_delimiter = ',')]
        rate: Vec<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Channel Rényi divergence against a second channel or a replacer.
    ChannelDivergence {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Second channel JSON; the replacer is used when absent.
        #[arg(long)]
        channel2: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        alpha: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "sandwiched")]
        family: Vec<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Channel Rényi mutual information.
    MutualInfo {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        alpha: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "sandwiched")]
        family: Vec<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run adaptive strategies under both hypotheses and check the converse bounds.
    SimulateAdaptive {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Strategy JSON file.
        #[arg(long, conflicts_with_all = ["random_rounds", "optimal_tensor"])]
        strategy: Option<PathBuf>,
        /// Number of rounds of seeded random strategies (one per seed).
        #[arg(long)]
        random_rounds: Option<usize>,
        /// Number of rounds of the tensor strategy built on the optimal input.
        #[arg(long, conflicts_with = "random_rounds")]
        optimal_tensor: Option<usize>,
        #[arg(long, default_value = "0..10")]
        seeds: String,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        alpha: Vec<f64>,
        /// Replace the final test by the Neyman–Pearson test at this type-I error.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run feedback-assisted communication protocols and check the success bound.
    SimulateFeedback {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Protocol JSON file.
        #[arg(long, conflicts_with_all = ["superdense", "random_messages"])]
        protocol: Option<PathBuf>,
        /// Superdense coding over the channel (qubit channels only).
        #[arg(long, conflicts_with = "random_messages")]
        superdense: bool,
        /// Message count of seeded random protocols (one per seed).
        #[arg(long)]
        random_messages: Option<usize>,
        #[arg(long, default_value_t = 1)]
        uses: usize,
        #[arg(long, default_value = "0..10")]
        seeds: String,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        alpha: Vec<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a property suite over seeded random instances.
    Verify {
        /// Suite name: dpi, monotone-alpha, lemma4, lemma6, appendixA, renyi-cb,
        /// nagaoka, minimax, feedback-bound, stein-classical.
        suite: String,
        /// `a..b` (end exclusive) or a comma-separated list.
        #[arg(long, default_value = "0..100")]
        seeds: String,
        /// Replaces every tolerance of the suite.
        #[arg(long)]
        tol: Option<f64>,
        /// Write every check record as one JSON line to this file.
        #[arg(long)]
        log: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// List presets, or print one as channel JSON.
    Presets {
        name: Option<String>,
        /// Print the preset's alternative replacer state instead of the channel.
        #[arg(long)]
        alternative: bool,
        /// Replacer state for the `replacer` preset.
        #[arg(long)]
        sigma: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// `a..b` (end exclusive) or `s1,s2,...`.
fn parse_seeds(s: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::Usage(format!("invalid seed list '{s}' (expected a..b or a comma-separated list)"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        return if a < b { Ok((a..b).collect()) } else { Err(bad()) };
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

fn emit_text(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    let io_err = |e: io::Error| CliError::Lib(renyikit::Error::Io(e));
    match out {
        Some(p) => std::fs::write(p, format!("{text}\n")).map_err(io_err),
        None => writeln!(io::stdout(), "{text}").map_err(io_err),
    }
}

fn emit(table: &Table, o: &OutputArgs) -> Result<(), CliError> {
    let io_err = |e: io::Error| CliError::Lib(renyikit::Error::Io(e));
    match &o.out {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).map_err(io_err)?);
            table.write(o.format, &mut w).map_err(io_err)?;
            w.flush().map_err(io_err)
        }
        None => table.write(o.format, &mut io::stdout().lock()).map_err(io_err),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Divergence { states, alpha, family, output } => {
            emit(&commands::divergence(&states.rho, &states.sigma, &alpha, &commands::families(&family)?)?, &output)
        }
        Command::HypothesisTest { states, epsilon, output } => {
            emit(&commands::hypothesis_test(&states.rho, &states.sigma, &epsilon)?, &output)
        }
        Command::Exponent { kind, channel, r, rate, output } => {
            let (ch, sigma) = channel.load()?;
            let rates = if kind == ExponentKind::Feedback { rate } else { r };
            emit(&commands::exponent(kind, &ch, &sigma, &rates)?, &output)
        }
        Command::ChannelDivergence { channel, channel2, alpha, family, output } => {
            let (ch, sigma) = channel.load()?;
            let second = match channel2 {
                Some(p) => SecondChannel::Channel(channel_from_json(
                    &std::fs::read_to_string(&p)
                        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?,
                )?),
                None => SecondChannel::Replacer(sigma),
            };
            emit(&commands::channel_divergence(&ch, second, &alpha, &commands::families(&family)?)?, &output)
        }
        Command::MutualInfo { channel, alpha, family, output } => {
            let (ch, _) = channel.load()?;
            emit(&commands::mutual_info(&ch, &alpha, &commands::families(&family)?)?, &output)
        }
        Command::SimulateAdaptive {
            channel,
            strategy,
            random_rounds,
            optimal_tensor,
            seeds,
            alpha,
            epsilon,
            tol,
            output,
        } => {
            let (ch, sigma) = channel.load()?;
            let source = match (strategy, random_rounds, optimal_tensor) {
                (Some(p), _, _) => StrategySource::File(p),
                (None, Some(n), _) => StrategySource::Random { rounds: n, seeds: parse_seeds(&seeds)? },
                (None, None, Some(n)) => StrategySource::OptimalTensor { rounds: n },
                _ => {
                    return Err(CliError::Usage(
                        "give one of --strategy, --random-rounds and --optimal-tensor".into(),
                    ))
                }
            };
            let tol = tol.unwrap_or(commands::DEFAULT_BOUND_TOL);
            emit(&commands::simulate_adaptive(source, &ch, &sigma, &alpha, epsilon, tol)?, &output)
        }
        Command::SimulateFeedback {
            channel,
            protocol,
            superdense,
            random_messages,
            uses,
            seeds,
            alpha,
            tol,
            output,
        } => {
            let (ch, sigma) = channel.load()?;
            let source = match (protocol, superdense, random_messages) {
                (Some(p), _, _) => ProtocolSource::File(p),
                (None, true, _) => ProtocolSource::Superdense,
                (None, false, Some(m)) => ProtocolSource::Random { uses, messages: m, seeds: parse_seeds(&seeds)? },
                _ => {
                    return Err(CliError::Usage(
                        "give one of --protocol, --superdense and --random-messages".into(),
                    ))
                }
            };
            let tol = tol.unwrap_or(commands::DEFAULT_BOUND_TOL);
            emit(&commands::simulate_feedback(source, &ch, &sigma, &alpha, tol)?, &output)
        }
        Command::Verify { suite, seeds, tol, log, output } => {
            let suite: Suite = suite.parse().map_err(|e: renyikit::Error| CliError::Usage(e.to_string()))?;
            let (table, records) = commands::verify(suite, &parse_seeds(&seeds)?, tol)?;
            if let Some(path) = log {
                let lines: Vec<String> = records.iter().map(|r| r.to_json_line()).collect();
                emit_text(&lines.join("\n"), Some(&path))?;
            }
            emit(&table, &output)?;
            let failed = records.iter().filter(|r| !r.ok).count();
            if failed > 0 {
                return Err(CliError::VerifyFailed { failed, total: records.len() });
            }
            Ok(())
        }
        Command::Presets { name, alternative, sigma, output } => match name {
            None => emit(&commands::preset_list(), &output),
            Some(name) => {
                let sigma = sigma.as_deref().map(commands::load_state).transpose()?;
                emit_text(&commands::preset_json(&name, sigma.as_ref(), alternative)?, output.out.as_ref())
            }
        },
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("RENYIKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("RENYIKIT_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure threads: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("0..3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds("5, 9").unwrap(), vec![5, 9]);
        assert!(parse_seeds("3..3").is_err());
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::Lib(renyikit::Error::Domain("x".into())).exit_code(), 3);
        assert_eq!(CliError::VerifyFailed { failed: 1, total: 2 }.exit_code(), 4);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
