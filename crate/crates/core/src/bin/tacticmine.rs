//! Command-line pipeline: ingest session logs, train tactic models,
//! select the state count by BIC, decode sessions, simulate corpora,
//! and emit reports.

use std::fs::{self, File};
use std::io::Write;
use std::path::PathBuf;

use chrono::{Duration, TimeZone, Utc};
use clap::{Parser, Subcommand};
use serde_json::json;

use tacticmine::corpus::EncodedCorpus;
use tacticmine::error::{Error, Result};
use tacticmine::hmm::{self, TrainConfig};
use tacticmine::ingest::{self, LogFormat, UnknownHandling};
use tacticmine::model_file::ModelFile;
use tacticmine::report::{self, HeatmapFormat};
use tacticmine::selection::{self, SampleSizeMode};
use tacticmine::simulate::{self, LengthDistribution, PlantedSpec};
use tacticmine::ActionAlphabet;

#[derive(Parser)]
#[command(name = "tacticmine", version, about = "Discover latent search tactics in session action logs")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for all randomness (restart initializations, sampling).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Independent EM restarts per training run.
    #[arg(long, global = true, default_value_t = 10)]
    restarts: usize,

    /// Maximum EM iterations per restart.
    #[arg(long, global = true, default_value_t = 500)]
    max_iters: usize,

    /// Stop when the log-likelihood improvement falls below this.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,

    /// Input log format: csv or jsonl.
    #[arg(long, global = true, default_value = "csv")]
    format: LogFormat,

    /// Preset comma-separated action alphabet (e.g. Q,V,S,W,T);
    /// otherwise built from the log in first-appearance order.
    #[arg(long, global = true)]
    alphabet: Option<String>,

    /// Handling of actions outside the alphabet: strict or drop.
    #[arg(long, global = true, default_value = "strict")]
    unknown: UnknownHandling,

    /// BIC sample size: total events or number of sequences.
    #[arg(long, global = true, default_value = "events")]
    sample_size_mode: SampleSizeMode,

    /// Emission pruning threshold for reports.
    #[arg(long, global = true, default_value_t = 0.05)]
    threshold: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Train an M-state tactic model on a session log.
    Train {
        /// Session log file.
        #[arg(long)]
        input: PathBuf,
        /// Number of hidden tactics.
        #[arg(short = 'm', long)]
        num_states: usize,
        /// Output model file (JSON).
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep candidate state counts and report the BIC curve.
    Select {
        #[arg(long)]
        input: PathBuf,
        /// Smallest candidate M (inclusive).
        #[arg(long)]
        m_min: usize,
        /// Largest candidate M (inclusive).
        #[arg(long)]
        m_max: usize,
        /// Optional JSON output for the full curve.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Viterbi-decode each session into its tactic path (JSONL).
    Decode {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a synthetic corpus from a model.
    Simulate {
        /// Use the built-in five-tactic reference model.
        #[arg(long, conflicts_with = "model")]
        paper_model: bool,
        /// Generating model file.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Number of sessions.
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// Fixed session length.
        #[arg(long, conflicts_with_all = ["len_min", "len_max"])]
        len: Option<usize>,
        /// Minimum session length (uniform range).
        #[arg(long, requires = "len_max")]
        len_min: Option<usize>,
        /// Maximum session length (uniform range).
        #[arg(long, requires = "len_min")]
        len_max: Option<usize>,
        /// Output corpus CSV.
        #[arg(long)]
        out: PathBuf,
        /// Sidecar JSON with the planted model and hidden paths.
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Emit the tactic report for a trained model.
    Report {
        #[arg(long)]
        model: PathBuf,
        /// SVG heatmap output path.
        #[arg(long)]
        heatmap: Option<PathBuf>,
        /// Full report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Schema-check a model file.
    Validate {
        #[arg(long)]
        model: PathBuf,
    },
}

fn preset_alphabet(spec: &Option<String>) -> Result<Option<ActionAlphabet>> {
    match spec {
        None => Ok(None),
        Some(list) => Ok(Some(ActionAlphabet::new(
            list.split(',').map(str::trim).map(String::from),
        )?)),
    }
}

fn load_corpus(cli: &Cli, input: &PathBuf) -> Result<EncodedCorpus> {
    let file = File::open(input)?;
    let events = ingest::parse(file, cli.format)?;
    let alphabet = match preset_alphabet(&cli.alphabet)? {
        Some(a) => a,
        None => ingest::build_alphabet(&events)?,
    };
    ingest::encode(&events, &alphabet, cli.unknown)
}

fn train_config(cli: &Cli) -> TrainConfig {
    TrainConfig {
        restarts: cli.restarts,
        max_iters: cli.max_iters,
        tol: cli.tol,
        seed: cli.seed,
    }
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Train {
            input,
            num_states,
            out,
        } => {
            let corpus = load_corpus(&cli, input)?;
            let config = train_config(&cli);
            let outcome = hmm::train(&corpus, *num_states, &config)?;
            let provenance = json!({
                "input": input.display().to_string(),
                "config": config,
                "m": num_states,
                "corpus": {
                    "sequences": corpus.sequences.len(),
                    "events": corpus.total_events(),
                },
                "log_likelihood": outcome.log_likelihood,
                "iterations": outcome.iterations,
            });
            ModelFile::from_model(&outcome.model, provenance).save(out)?;
            println!(
                "log_likelihood = {:.6}, iterations = {}",
                outcome.log_likelihood, outcome.iterations
            );
            Ok(())
        }
        Command::Select {
            input,
            m_min,
            m_max,
            json,
        } => {
            let corpus = load_corpus(&cli, input)?;
            let curve = selection::sweep(
                &corpus,
                *m_min..=*m_max,
                &train_config(&cli),
                cli.sample_size_mode,
            )?;
            print!("{}", curve.to_table());
            println!("best_M = {}", curve.best_m);
            if let Some(path) = json {
                let mut text = serde_json::to_string_pretty(&curve)?;
                text.push('\n');
                fs::write(path, text)?;
            }
            Ok(())
        }
        Command::Decode { model, input, out } => {
            let model = ModelFile::load(model)?.to_model()?;
            let file = File::open(input)?;
            let events = ingest::parse(file, cli.format)?;
            let corpus = ingest::encode(&events, model.alphabet(), cli.unknown)?;
            let mut lines = String::new();
            for seq in &corpus.sequences {
                let (path, log_prob) = model.viterbi(seq)?;
                let record = json!({
                    "session_id": seq.session_id,
                    "actions": corpus.decode(seq),
                    "tactics": path,
                    "log_prob": log_prob,
                });
                lines.push_str(&serde_json::to_string(&record)?);
                lines.push('\n');
            }
            match out {
                Some(path) => fs::write(path, lines)?,
                None => print!("{lines}"),
            }
            Ok(())
        }
        Command::Simulate {
            paper_model,
            model,
            n,
            len,
            len_min,
            len_max,
            out,
            sidecar,
        } => {
            let generating = match (paper_model, model) {
                (true, _) => simulate::paper_planted_model(),
                (false, Some(path)) => ModelFile::load(path)?.to_model()?,
                (false, None) => {
                    return Err(Error::InvalidArgument(
                        "simulate needs --paper-model or --model <file>".into(),
                    ))
                }
            };
            let lengths = match (len, len_min, len_max) {
                (Some(l), _, _) => LengthDistribution::Fixed(*l),
                (None, Some(a), Some(b)) => LengthDistribution::Uniform(*a, *b),
                _ => LengthDistribution::Fixed(100),
            };
            let spec = PlantedSpec {
                model: generating,
                n_sequences: *n,
                lengths,
                seed: cli.seed,
            };
            let (corpus, hidden_paths) = simulate::sample(&spec)?;
            fs::write(out, corpus_to_csv(&corpus))?;
            if let Some(path) = sidecar {
                let body = json!({
                    "model": ModelFile::from_model(&spec.model, json!({
                        "note": "prior and transition values are artifact constants, not published figures",
                        "seed": cli.seed,
                    })),
                    "n_sequences": n,
                    "lengths": lengths,
                    "seed": cli.seed,
                    "hidden_paths": hidden_paths,
                });
                let mut text = serde_json::to_string_pretty(&body)?;
                text.push('\n');
                fs::write(path, text)?;
            }
            println!(
                "wrote {} sessions ({} events)",
                corpus.sequences.len(),
                corpus.total_events()
            );
            Ok(())
        }
        Command::Report {
            model,
            heatmap,
            json,
        } => {
            let model = ModelFile::load(model)?.to_model()?;
            let report = report::build_report(&model, cli.threshold)?;
            print!("{}", report.to_text());
            if let Some(path) = heatmap {
                let svg = report::render_heatmap(model.transition(), HeatmapFormat::Svg)?;
                fs::write(path, svg)?;
            }
            if let Some(path) = json {
                let mut text = serde_json::to_string_pretty(&report)?;
                text.push('\n');
                fs::write(path, text)?;
            }
            Ok(())
        }
        Command::Validate { model } => {
            let file = ModelFile::load(model)?;
            println!(
                "ok: {} states over alphabet [{}]",
                file.m,
                file.alphabet.join(",")
            );
            Ok(())
        }
    }
}

fn corpus_to_csv(corpus: &EncodedCorpus) -> String {
    let base = Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap();
    let mut out = String::from("session_id,timestamp,action\n");
    for seq in &corpus.sequences {
        for (t, name) in corpus.decode(seq).iter().enumerate() {
            let ts = (base + Duration::seconds(t as i64)).format("%Y-%m-%dT%H:%M:%SZ");
            out.push_str(&format!("{},{},{}\n", seq.session_id, ts, name));
        }
    }
    out
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        let code = e.exit_code();
        let _ = writeln!(std::io::stderr(), "error: {e}");
        std::process::exit(code);
    }
}
