use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde_json::json;

use nearmiss::contrast::{contrast, rank, select_far, select_near, MissKind, SimilarityMetric};
use nearmiss::error::{Error, GenerateError};
use nearmiss::explain::{
    propositionalize_sequence, propositionalize_trace, trace, FeatureSet, Origin,
};
use nearmiss::harness::evaluate::{evaluate, EvalConfigs};
use nearmiss::harness::generator::{generate, GeneratorConfig};
use nearmiss::harness::verbalize::verbalize;
use nearmiss::learner::{learn, LearnerConfig};
use nearmiss::logic::FactSet;
use nearmiss::sequence::{Dataset, Ident, Mode, SequenceRecord};

#[derive(Parser)]
#[command(
    name = "nearmiss",
    version,
    about = "Learns Horn-clause theories over AU interval sequences and explains \
             classifications through contrastive near misses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled dataset.
    Generate {
        /// Built-in configuration: default, attribute-separable or
        /// relational-separable.
        #[arg(long, default_value = "default")]
        preset: String,
        /// Generator configuration JSON; overrides the preset.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Random seed; the NEARMISS_SEED environment variable wins.
        #[arg(long)]
        seed: Option<u64>,
        /// Dataset destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learn a Horn-clause theory for one class.
    Learn {
        #[arg(long)]
        data: PathBuf,
        /// Class to learn a theory for.
        #[arg(long)]
        class: String,
        #[arg(long, value_parser = parse_mode, default_value = "attributes")]
        mode: Mode,
        /// Longest clause body searched.
        #[arg(long)]
        max_literals: Option<usize>,
        /// Beam width of the clause search.
        #[arg(long)]
        beam: Option<usize>,
        /// Negatives a clause may cover.
        #[arg(long)]
        noise: Option<usize>,
        /// Theory destination; stdout when omitted, with the coverage
        /// report printed only when writing to a file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Explain one sequence's classification against a contrast class.
    Explain {
        #[arg(long)]
        data: PathBuf,
        /// Sequence to explain.
        #[arg(long)]
        target: String,
        #[arg(long, value_parser = parse_metric, default_value = "jaccard")]
        metric: SimilarityMetric,
        #[arg(long, value_parser = parse_mode, default_value = "attributes")]
        mode: Mode,
        /// Feature origin: trace or full-bk.
        #[arg(long, value_parser = parse_basis, default_value = "trace")]
        basis: Origin,
        /// Contrast example choice: near or far.
        #[arg(long, value_parser = parse_miss, default_value = "near")]
        miss: MissKind,
    },
    /// Train both modes and report miss statistics for every cell.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        /// Report JSON destination; stdout when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Optional CSV destination for the pooled cells.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn parse_mode(token: &str) -> Result<Mode, String> {
    match token {
        "attributes" => Ok(Mode::Attributes),
        "relations" => Ok(Mode::Relations),
        _ => Err(format!("expected attributes|relations, got {token:?}")),
    }
}

fn parse_metric(token: &str) -> Result<SimilarityMetric, String> {
    match token {
        "jaccard" => Ok(SimilarityMetric::Jaccard),
        "overlap" => Ok(SimilarityMetric::Overlap),
        _ => Err(format!("expected jaccard|overlap, got {token:?}")),
    }
}

fn parse_basis(token: &str) -> Result<Origin, String> {
    match token {
        "trace" => Ok(Origin::Trace),
        "full-bk" => Ok(Origin::FullBk),
        _ => Err(format!("expected trace|full-bk, got {token:?}")),
    }
}

fn parse_miss(token: &str) -> Result<MissKind, String> {
    match token {
        "near" => Ok(MissKind::Near),
        "far" => Ok(MissKind::Far),
        _ => Err(format!("expected near|far, got {token:?}")),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(error) => {
            let code = match error.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = error.print();
            process::exit(code);
        }
    };
    if let Err(error) = run(cli) {
        eprintln!("error: {error}");
        process::exit(error.exit_code());
    }
}

fn load_dataset(path: &PathBuf) -> Result<Dataset, Error> {
    let text = fs::read_to_string(path)?;
    Ok(Dataset::parse(&text)?)
}

/// Writes to stdout, exiting quietly if the reading end went away.
fn emit(content: &str) {
    use std::io::Write;
    let mut stdout = std::io::stdout().lock();
    if let Err(error) = stdout.write_all(content.as_bytes()) {
        if error.kind() == std::io::ErrorKind::BrokenPipe {
            process::exit(0);
        }
        eprintln!("error: io: {error}");
        process::exit(1);
    }
}

fn write_or_print(out: Option<PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, content)?,
        None => emit(content),
    }
    Ok(())
}

fn effective_seed(flag: Option<u64>, config_seed: u64) -> Result<u64, Error> {
    if let Ok(raw) = std::env::var("NEARMISS_SEED") {
        return raw.trim().parse().map_err(|_| {
            GenerateError::InvalidConfig(format!(
                "NEARMISS_SEED must be an unsigned integer, got {raw:?}"
            ))
            .into()
        });
    }
    Ok(flag.unwrap_or(config_seed))
}

fn learner_config(
    mode: Mode,
    max_literals: Option<usize>,
    beam: Option<usize>,
    noise: Option<usize>,
) -> LearnerConfig {
    let mut config = match mode {
        Mode::Attributes => LearnerConfig::attributes(),
        Mode::Relations => LearnerConfig::relations(),
    };
    if let Some(limit) = max_literals {
        config.max_body_literals = limit;
    }
    if let Some(width) = beam {
        config.beam_width = width;
    }
    if let Some(allowed) = noise {
        config.noise = allowed;
    }
    config
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Generate {
            preset,
            config,
            seed,
            out,
        } => {
            let mut generator = match config {
                Some(path) => {
                    let text = fs::read_to_string(path)?;
                    serde_json::from_str::<GeneratorConfig>(&text).map_err(|error| {
                        GenerateError::InvalidConfig(format!("config parse: {error}"))
                    })?
                }
                None => GeneratorConfig::preset(&preset).ok_or_else(|| {
                    GenerateError::InvalidConfig(format!("unknown preset {preset:?}"))
                })?,
            };
            generator.seed = effective_seed(seed, generator.seed)?;
            let dataset = generate(&generator)?;
            write_or_print(out, &dataset.render())
        }
        Command::Learn {
            data,
            class,
            mode,
            max_literals,
            beam,
            noise,
            out,
        } => {
            let dataset = load_dataset(&data)?;
            let class = Ident::new(class)?;
            let config = learner_config(mode, max_literals, beam, noise);
            let outcome = learn(&dataset, &class, &config)?;
            match out {
                Some(path) => {
                    fs::write(path, outcome.theory.render())?;
                    let report =
                        serde_json::to_string_pretty(&outcome.report).expect("report serializes");
                    emit(&report);
                    emit("\n");
                }
                None => emit(&outcome.theory.render()),
            }
            Ok(())
        }
        Command::Explain {
            data,
            target,
            metric,
            mode,
            basis,
            miss,
        } => {
            let dataset = load_dataset(&data)?;
            let target_id = Ident::new(target)?;
            let target_sequence = dataset
                .sequence(&target_id)
                .ok_or_else(|| Error::UnknownTarget(target_id.to_string()))?;
            let config = learner_config(mode, None, None, None);
            let mut theories = BTreeMap::new();
            for class in &dataset.classes {
                theories.insert(class.clone(), learn(&dataset, class, &config)?.theory);
            }
            let features = |sequence: &SequenceRecord| -> FeatureSet {
                match basis {
                    Origin::FullBk => {
                        propositionalize_sequence(sequence, mode, &config.relation_config)
                    }
                    Origin::Trace => {
                        let facts = FactSet::for_mode(sequence, mode, &config.relation_config);
                        propositionalize_trace(&trace(&theories[&sequence.label], &facts), mode)
                    }
                }
            };
            let target_features = features(target_sequence);
            let pool: Vec<(&Ident, FeatureSet)> = dataset
                .sequences
                .iter()
                .filter(|s| s.label != target_sequence.label)
                .map(|s| (&s.id, features(s)))
                .collect();
            let pool_refs: Vec<&FeatureSet> = pool.iter().map(|(_, f)| f).collect();
            let ranking = rank(&target_features, &pool_refs, metric)?;
            let selected = match miss {
                MissKind::Near => select_near(&ranking),
                MissKind::Far => select_far(&ranking),
            };
            if selected.is_empty() {
                let result = json!({
                    "target": target_id.as_str(),
                    "kind": miss.as_str(),
                    "metric": metric.as_str(),
                    "mode": mode.as_str(),
                    "basis": basis.as_str(),
                    "misses": [],
                    "note": "no near misses",
                });
                emit(&result.to_string());
                emit("\n");
                return Ok(());
            }
            let by_id: BTreeMap<&Ident, &FeatureSet> =
                pool.iter().map(|(id, f)| (*id, f)).collect();
            for miss_id in &selected {
                let explanation = contrast(&target_features, by_id[miss_id], miss, metric)?;
                emit(&explanation.to_json());
                emit("\n");
                emit(&verbalize(&explanation));
            }
            Ok(())
        }
        Command::Evaluate { data, report, csv } => {
            let dataset = load_dataset(&data)?;
            let evaluation = evaluate(&dataset, &EvalConfigs::default());
            write_or_print(report, &evaluation.to_json())?;
            if let Some(path) = csv {
                fs::write(path, evaluation.to_csv())?;
            }
            Ok(())
        }
    }
}
