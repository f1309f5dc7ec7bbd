use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use qlfact_core::config::{ChronoSetting, RunConfig};
use qlfact_core::corpus::{load_dataset, save_dataset, validate_stats};
use qlfact_core::evalkit::EvalReport;
use qlfact_core::features::parse_group_list;
use qlfact_core::pipeline::{
    ablate, evaluate, load_or_compute, search_log_jsonl, to_json, train_full, EvaluateOptions,
    FeatureStore, Manifest, Pipeline,
};
use qlfact_core::resources::Resources;
use qlfact_core::semeval::convert_semeval;

#[derive(Parser)]
#[command(name = "qlfact", version, about = "Fact checking of answers in community question answering")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for feature extraction and cross-validation.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// More log output (repeatable).
    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Overrides {
    /// Comma-separated feature groups (overrides evaluation.groups).
    #[arg(long)]
    groups: Option<String>,
    /// Overrides seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides output_dir.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Overrides model.lambda.
    #[arg(long)]
    lambda: Option<f64>,
    /// Overrides model.epochs.
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Chrono {
    Auto,
    Ascending,
    Descending,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Print dataset statistics.
    ValidateData {
        /// Dataset to check instead of the configured one.
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Fail unless the statistics match the published label distribution.
        #[arg(long)]
        expect_paper: bool,
    },
    /// Convert SemEval XML files to the JSON Lines dataset format.
    Convert {
        /// XML files, read in order; repeated thread ids keep the first.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, short)]
        output: PathBuf,
        /// Offset of the forum timestamps from UTC, in minutes.
        #[arg(long, default_value_t = 180, allow_hyphen_values = true)]
        utc_offset_minutes: i32,
    },
    /// Extract and cache the feature files of the selected groups.
    Featurize {
        #[command(flatten)]
        overrides: Overrides,
        /// Recompute even when cached files are current.
        #[arg(long)]
        refresh: bool,
    },
    /// Fit one model on all labelled answers and save it.
    Train {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        refresh: bool,
    },
    /// Leave-one-thread-out evaluation of groups, ensembles and baselines.
    Evaluate {
        #[command(flatten)]
        overrides: Overrides,
        /// Show the published scores next to the computed ones.
        #[arg(long)]
        expect_paper: bool,
        #[arg(long)]
        no_ensembles: bool,
        #[arg(long)]
        no_importance: bool,
        /// Order of the chronological baseline (overrides evaluation.chronological).
        #[arg(long, value_enum)]
        chronological: Option<Chrono>,
        #[arg(long)]
        refresh: bool,
    },
    /// Evaluate the four retrieval variants of the high-quality post group.
    Ablate {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        expect_paper: bool,
    },
    /// Render a saved report.
    Report {
        /// Report JSON (default: report.json in the output directory).
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run the web and forum queries against the record.* providers and
    /// save the results as fixture files.
    RecordFixtures {
        #[command(flatten)]
        overrides: Overrides,
    },
}

/// A run that finished but found the data invalid.
#[derive(Debug)]
struct ValidationFailure(String);

impl std::fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ValidationFailure {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<ValidationFailure>() => {
            eprintln!("validation failed: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: Option<&Path>, overrides: &Overrides) -> anyhow::Result<RunConfig> {
    let Some(path) = path else {
        bail!("this command needs --config <file>");
    };
    let mut cfg = RunConfig::load(path)?;
    if let Some(g) = &overrides.groups {
        parse_group_list(g)?;
        cfg.evaluation.groups = g.clone();
    }
    if let Some(s) = overrides.seed {
        cfg.seed = s;
    }
    if let Some(d) = &overrides.output_dir {
        cfg.output_dir = std::env::current_dir()?.join(d);
    }
    if let Some(l) = overrides.lambda {
        cfg.model.lambda = l;
    }
    if let Some(e) = overrides.epochs {
        cfg.model.epochs = e;
    }
    cfg.check()?;
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon_pool(jobs)?;
    }
    let config = cli.config.as_deref();
    match cli.command {
        Command::ValidateData { dataset, expect_paper } => validate_data(config, dataset, expect_paper),
        Command::Convert {
            inputs,
            output,
            utc_offset_minutes,
        } => convert(&inputs, &output, utc_offset_minutes),
        Command::Featurize { overrides, refresh } => featurize(&load_config(config, &overrides)?, refresh),
        Command::Train { overrides, refresh } => train(&load_config(config, &overrides)?, refresh),
        Command::Evaluate {
            overrides,
            expect_paper,
            no_ensembles,
            no_importance,
            chronological,
            refresh,
        } => {
            let mut cfg = load_config(config, &overrides)?;
            if let Some(c) = chronological {
                cfg.evaluation.chronological = match c {
                    Chrono::Auto => ChronoSetting::Auto,
                    Chrono::Ascending => ChronoSetting::Ascending,
                    Chrono::Descending => ChronoSetting::Descending,
                };
            }
            if no_ensembles {
                cfg.evaluation.ensembles = false;
            }
            if no_importance {
                cfg.evaluation.importance = false;
            }
            run_evaluate(&cfg, expect_paper, refresh)
        }
        Command::Ablate {
            overrides,
            expect_paper,
        } => run_ablate(&load_config(config, &overrides)?, expect_paper),
        Command::Report { input, format } => report(config, input, format),
        Command::RecordFixtures { overrides } => record_fixtures(&load_config(config, &overrides)?),
    }
}

fn rayon_pool(jobs: usize) -> anyhow::Result<()> {
    if jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    qlfact_core::pipeline::set_jobs(jobs)?;
    Ok(())
}

fn validate_data(config: Option<&Path>, dataset: Option<PathBuf>, expect_paper: bool) -> anyhow::Result<()> {
    let path = match (dataset, config) {
        (Some(p), _) => p,
        (None, Some(c)) => {
            let cfg = RunConfig::load(c)?;
            cfg.resolve(&cfg.data.dataset)
        }
        (None, None) => bail!("validate-data needs --dataset <file> or --config <file>"),
    };
    let threads = load_dataset(&path)?;
    let stats = validate_stats(&threads);
    print!("{}", stats.render());
    if expect_paper {
        let mismatches = stats.compare_with_published();
        if !mismatches.is_empty() {
            let lines: Vec<String> = mismatches.iter().map(|m| m.to_string()).collect();
            return Err(ValidationFailure(lines.join("; ")).into());
        }
        println!("matches the published label distribution");
    }
    Ok(())
}

fn convert(inputs: &[PathBuf], output: &Path, offset_minutes: i32) -> anyhow::Result<()> {
    let offset = chrono::FixedOffset::east_opt(offset_minutes * 60).context("UTC offset out of range")?;
    let mut threads = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for input in inputs {
        if input == output {
            bail!("output {} would overwrite an input", output.display());
        }
        let xml = std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
        for t in convert_semeval(&xml, offset).with_context(|| format!("converting {}", input.display()))? {
            if seen.insert(t.question.id.clone()) {
                threads.push(t);
            } else {
                log::warn!("{}: thread {} already converted; skipped", input.display(), t.question.id);
            }
        }
    }
    save_dataset(&threads, output)?;
    let stats = validate_stats(&threads);
    log::info!(
        "wrote {} threads ({} labelled answers) to {}",
        stats.n_questions,
        stats.n_annotated_answers,
        output.display()
    );
    Ok(())
}

fn featurize(cfg: &RunConfig, refresh: bool) -> anyhow::Result<()> {
    let res = Resources::load(cfg)?;
    let groups = cfg.groups()?;
    let pipeline = Pipeline::new(&res)?;
    let store = FeatureStore::new(&res);
    let (table, log) = load_or_compute(&pipeline, &store, &groups, refresh)?;
    let out = cfg.output_dir();
    let mut manifest = Manifest::new("featurize", &res);
    for g in &groups {
        manifest.record_file(&format!("features/{}.json", g.key()), &store.path(g.key()))?;
    }
    if !log.is_empty() {
        manifest.write_output("queries.jsonl", &out.join("queries.jsonl"), &search_log_jsonl(&log)?)?;
    }
    manifest.save(&out)?;
    println!(
        "{} answers, {} features in {} groups under {}",
        table.len(),
        table.dimension(),
        groups.len(),
        store.dir().display()
    );
    Ok(())
}

fn train(cfg: &RunConfig, refresh: bool) -> anyhow::Result<()> {
    let res = Resources::load(cfg)?;
    let groups = cfg.groups()?;
    let pipeline = Pipeline::new(&res)?;
    let store = FeatureStore::new(&res);
    let (table, _) = load_or_compute(&pipeline, &store, &groups, refresh)?;
    let data = qlfact_core::evalkit::EvalData::from_threads(&res.threads);
    let model = train_full(&table, &data, &res)?;
    let out = cfg.output_dir();
    let path = out.join("model.json");
    let mut manifest = Manifest::new("train", &res);
    manifest.write_output("model.json", &path, &to_json(&model)?)?;
    manifest.save(&out)?;
    println!("model with {} features written to {}", model.dimension(), path.display());
    Ok(())
}

fn run_evaluate(cfg: &RunConfig, expect_paper: bool, refresh: bool) -> anyhow::Result<()> {
    let res = Resources::load(cfg)?;
    let opts = EvaluateOptions {
        groups: cfg.groups()?,
        ensembles: cfg.evaluation.ensembles,
        importance: cfg.evaluation.importance,
        expect_paper,
        refresh,
    };
    let result = evaluate(&res, &opts)?;
    let out = cfg.output_dir();
    let mut manifest = Manifest::new("evaluate", &res);
    let text = result.report.render_text();
    manifest.write_output("report.txt", &out.join("report.txt"), &text)?;
    manifest.write_output("report.json", &out.join("report.json"), &result.report.to_json()?)?;
    manifest.write_output("model.json", &out.join("model.json"), &to_json(&result.model)?)?;
    if !result.search_log.is_empty() {
        manifest.write_output(
            "queries.jsonl",
            &out.join("queries.jsonl"),
            &search_log_jsonl(&result.search_log)?,
        )?;
    }
    manifest.save(&out)?;
    print!("{text}");
    Ok(())
}

fn run_ablate(cfg: &RunConfig, expect_paper: bool) -> anyhow::Result<()> {
    let res = Resources::load(cfg)?;
    let report = ablate(&res, expect_paper)?;
    let out = cfg.output_dir();
    let mut manifest = Manifest::new("ablate", &res);
    let text = report.render_text();
    manifest.write_output("ablation.txt", &out.join("ablation.txt"), &text)?;
    manifest.write_output("ablation.json", &out.join("ablation.json"), &report.to_json()?)?;
    manifest.save(&out)?;
    print!("{text}");
    Ok(())
}

fn report(config: Option<&Path>, input: Option<PathBuf>, format: Format) -> anyhow::Result<()> {
    let path = match (input, config) {
        (Some(p), _) => p,
        (None, Some(c)) => RunConfig::load(c)?.output_dir().join("report.json"),
        (None, None) => bail!("report needs --input <report.json> or --config <file>"),
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let report = EvalReport::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    match format {
        Format::Text => print!("{}", report.render_text()),
        Format::Json => print!("{}", report.to_json()?),
    }
    Ok(())
}

fn record_fixtures(cfg: &RunConfig) -> anyhow::Result<()> {
    let rec = &cfg.record;
    if rec.web.is_none() && rec.forum.is_none() {
        bail!("record-fixtures needs record.web or record.forum in the config");
    }
    let res = Resources::load(cfg)?;
    let pipeline = Pipeline::new(&res)?;
    let web = rec.web.as_ref().map(|s| res.provider(s)).transpose()?;
    let forum = rec.forum.as_ref().map(|s| res.provider(s)).transpose()?;
    let (web, forum) = pipeline.record(web, forum)?;
    let out = cfg.output_dir();
    let mut manifest = Manifest::new("record-fixtures", &res);
    for (name, fixture, dest, default) in [
        ("web", web, &rec.web_out, "fixtures/web.jsonl"),
        ("forum", forum, &rec.forum_out, "fixtures/forum.jsonl"),
    ] {
        let Some(fixture) = fixture else { continue };
        let path = match dest {
            Some(p) => cfg.resolve(p),
            None => out.join(default),
        };
        if cfg.referenced_files().iter().any(|(_, p)| *p == path) {
            bail!("record.{name}_out would overwrite an input");
        }
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        fixture.save(&path)?;
        manifest.record_file(&format!("{name} fixture"), &path)?;
        println!("{} {name} queries recorded to {}", fixture.len(), path.display());
    }
    manifest.save(&out)?;
    Ok(())
}
