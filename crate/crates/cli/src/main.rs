use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use cdsim::circuit::{Circuit, NonadaptiveCircuit};
use cdsim::{tolerances, BitString};
use cdsim_cli::experiments::{self, Depth3Config, GameConfig, GameInput, PostselectConfig};
use cdsim_cli::{criteria, fixtures, read_json, ResultRecord};
use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "cdsim", version, about = "Gate-teleportation compilation and classical simulation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compile a source circuit and write its flattened form
    Compile {
        /// Source circuit JSON
        #[arg(long)]
        input: PathBuf,
        /// Guess string (defaults to the identity-correction guess)
        #[arg(long)]
        guess: Option<BitString>,
        /// Where to write the flattened circuit; provenance goes next to it
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact and sampled post-selection on a flattened circuit
    Postselect {
        #[arg(long)]
        input: PathBuf,
        /// Source circuit to compare the post-selected distribution with
        #[arg(long)]
        source: Option<PathBuf>,
        /// Shots to sample; 0 reports exact values only
        #[arg(long, default_value_t = 0)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Overrides the total-variation tolerance
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Blockwise depth-3 oracle, checked against brute force at small widths
    Depth3 {
        /// Circuit JSON; a random depth-3 circuit of `--width` otherwise
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 12)]
        width: usize,
        #[arg(long, default_value_t = 10)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Set-size game on a planted set or a source circuit
    Amgame {
        /// Set specification or source circuit JSON
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = 32.0)]
        d: f64,
        /// Guess width for planted sets (defaults to n - 1)
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        coin_width: Option<u32>,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also emit one JSON line per trial
        #[arg(long)]
        transcripts: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact Bell-outcome marginals of flattened circuits
    BellUniformity {
        /// Source circuit JSON; seeded random fixtures otherwise
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        guess: Option<BitString>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Every acceptance criterion
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit(out: Option<&Path>, records: &[ResultRecord], extra: &[String]) -> Result<bool> {
    let mut w = sink(out)?;
    for r in records {
        writeln!(w, "{}", r.to_json_line())?;
        eprintln!("{r}");
    }
    for line in extra {
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(records.iter().all(|r| r.pass))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Compile { input, guess, out } => {
            let src: Circuit = read_json(&input)?;
            let compiled = experiments::compile(&src, guess.as_ref())?;
            std::fs::write(&out, serde_json::to_string_pretty(&compiled.circuit)?)
                .with_context(|| format!("writing {}", out.display()))?;
            let prov = out.with_extension("provenance.json");
            std::fs::write(&prov, serde_json::to_string_pretty(&compiled.provenance)?)
                .with_context(|| format!("writing {}", prov.display()))?;
            emit(None, &[compiled.record], &[])
        }
        Command::Postselect { input, source, trials, seed, tolerance, out } => {
            let nc: NonadaptiveCircuit = read_json(&input)?;
            let src: Option<Circuit> = source.as_deref().map(read_json).transpose()?;
            let cfg = PostselectConfig {
                trials,
                seed,
                tv_tolerance: tolerance.unwrap_or(tolerances::POSTSELECTION_TV),
                ..Default::default()
            };
            emit(out.as_deref(), &[experiments::postselect(&nc, src.as_ref(), &cfg)?], &[])
        }
        Command::Depth3 { input, width, trials, seed, tolerance, out } => {
            let circuit = match input {
                Some(p) => read_json(&p)?,
                None => cdsim::random::random_depth3_circuit(width, 0.6, &mut cdsim::rng::seeded(seed))?,
            };
            let cfg = Depth3Config {
                trials,
                seed,
                tolerance: tolerance.unwrap_or(tolerances::DEPTH3),
            };
            emit(out.as_deref(), &[experiments::depth3(&circuit, &cfg)?], &[])
        }
        Command::Amgame { input, epsilon, d, k, coin_width, trials, seed, transcripts, out } => {
            let text = std::fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let game = GameInput::from_json(&text).with_context(|| format!("parsing {}", input.display()))?;
            let cfg = GameConfig { epsilon, d, k, coin_width, trials, seed };
            let run = experiments::amgame(&game, &cfg)?;
            let lines = if transcripts {
                run.transcripts
                    .iter()
                    .enumerate()
                    .map(|(i, t)| serde_json::json!({ "trial": i, "transcript": t }).to_string())
                    .collect()
            } else {
                Vec::new()
            };
            emit(out.as_deref(), &[run.record], &lines)
        }
        Command::BellUniformity { input, guess, seed, tolerance, out } => {
            let sources = match input {
                Some(p) => vec![read_json(&p)?],
                None => fixtures::gc_sources(seed, 10, 3)?,
            };
            let tol = tolerance.unwrap_or(tolerances::BELL_UNIFORMITY);
            emit(out.as_deref(), &[experiments::bell_uniformity(&sources, guess.as_ref(), seed, tol)?], &[])
        }
        Command::Selftest { seed, out } => emit(out.as_deref(), &criteria::run_all(seed)?, &[]),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
