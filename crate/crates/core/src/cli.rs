//! Command-line front end: `score`, `eval`, `select` and `synth`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::ds::Execution;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, DEFAULT_T_GRID};
use crate::binning::DEFAULT_K_BINS;
use crate::ingest::{
    load_features, load_logits, load_scores, write_binned_curve, write_curve, write_scores,
    write_scores_to, write_surface,
};
use crate::report::{evaluate, render, select_report, EvalOptions, ReportFormat};
use crate::scoring::{score_eval_set, FitArtifacts, Inputs, Method, ScoringConfig};
use crate::selection::Mode;
use crate::single::risk_coverage_curve;
use crate::synth::{generate, Preset, SynthConfig};

#[derive(Debug, Parser)]
#[command(name = "dualscore", version, about = "Double-scoring reliability metrics for mixed ID/OOD evaluation sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute post-hoc confidence scores from logits and/or features.
    Score(ScoreArgs),
    /// Evaluate single and double scoring metrics on a scores file.
    Eval(EvalArgs),
    /// Select thresholds on a validation split and apply them to a test split.
    Select(SelectArgs),
    /// Write a seeded synthetic scores file.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct ScoreArgs {
    /// Logits CSV to score.
    #[arg(long)]
    logits: Option<PathBuf>,
    /// Features CSV to score, row-aligned with --logits.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Logits CSV whose ID rows fit the artifacts.
    #[arg(long)]
    fit: Option<PathBuf>,
    /// Features CSV whose ID rows fit the artifacts.
    #[arg(long)]
    fit_features: Option<PathBuf>,
    /// Comma-separated methods, e.g. `msp,energy,knn`.
    #[arg(long)]
    method: String,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    pca_dim: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    temperature: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    id_channel: String,
    #[arg(long)]
    ood_channel: String,
    /// Quantile thresholds per channel; 0 uses every distinct value.
    #[arg(long, default_value_t = DEFAULT_T_GRID)]
    grid: usize,
    #[arg(long, default_value_t = DEFAULT_K_BINS)]
    bins: usize,
    /// Export the threshold-pair surface as CSV.
    #[arg(long)]
    surface: Option<PathBuf>,
    /// Export the ID channel's risk-coverage curve as CSV.
    #[arg(long)]
    curve: Option<PathBuf>,
    /// Export the binned double-scoring risk-coverage curve as CSV.
    #[arg(long)]
    ds_curve: Option<PathBuf>,
    /// Cross-check against the brute-force reference (small sets only).
    #[arg(long, hide = true)]
    oracle: bool,
    #[arg(long)]
    parallel: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Debug, Args)]
struct SelectArgs {
    #[arg(long)]
    val: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long)]
    id_channel: String,
    #[arg(long)]
    ood_channel: String,
    #[arg(long, value_enum, default_value_t = ModeArg::All)]
    mode: ModeArg,
    #[arg(long, default_value_t = DEFAULT_T_GRID)]
    grid: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_id: Option<usize>,
    #[arg(long)]
    n_ood: Option<usize>,
    #[arg(long)]
    acc: Option<f64>,
    #[arg(long, value_enum, default_value_t = PresetArg::Far)]
    preset: PresetArg,
    /// JSON synthetic config; required by `--preset custom`.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Markdown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Id,
    Ood,
    Double,
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetArg {
    Near,
    Far,
    Custom,
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Help and version requests print and succeed.
pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            return Err(Error::Usage(first.trim_start_matches("error: ").to_string()));
        }
    };
    match cli.command {
        Command::Score(args) => score(args),
        Command::Eval(args) => eval(args),
        Command::Select(args) => select(args),
        Command::Synth(args) => synth(args),
    }
}

/// Formats an error as the single diagnostic line printed by the binary.
pub fn error_line(err: &Error) -> String {
    let message = err.to_string().replace(['\n', '\r'], " ");
    format!("error: kind={} message={message}", err.kind())
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn report_format(format: Option<FormatArg>, out: Option<&Path>) -> ReportFormat {
    match format {
        Some(FormatArg::Json) => ReportFormat::Json,
        Some(FormatArg::Markdown) => ReportFormat::Markdown,
        None => out.map_or(ReportFormat::Json, ReportFormat::from_path),
    }
}

fn score(args: ScoreArgs) -> Result<()> {
    let methods = Method::parse_list(&args.method)?;
    let logits = args.logits.as_deref().map(load_logits).transpose()?;
    let features = args.features.as_deref().map(load_features).transpose()?;
    let fit_logits = args.fit.as_deref().map(load_logits).transpose()?;
    let fit_features = args.fit_features.as_deref().map(load_features).transpose()?;
    let target = Inputs::new(logits.as_deref(), features.as_deref());
    for &m in &methods {
        if m.needs_logits() && target.logits.is_none() {
            return Err(Error::Usage(format!("method `{m}` needs --logits")));
        }
        if m.needs_features() && target.features.is_none() {
            return Err(Error::Usage(format!("method `{m}` needs --features")));
        }
    }
    if target.logits.is_none() {
        return Err(Error::Usage(
            "--logits is required: correctness of ID rows comes from the logit argmax".into(),
        ));
    }
    let config = ScoringConfig {
        temperature: args.temperature,
        knn_k: args.k,
        pca_dim: args.pca_dim,
    };
    for &m in &methods {
        let (logits, features) = m.fit_inputs();
        if logits && fit_logits.is_none() {
            return Err(Error::Usage(format!("method `{m}` needs --fit")));
        }
        if features && fit_features.is_none() {
            return Err(Error::Usage(format!("method `{m}` needs --fit-features")));
        }
    }
    let fit = Inputs::new(fit_logits.as_deref(), fit_features.as_deref());
    let artifacts = FitArtifacts::fit(&methods, fit, &config)?;
    let set = score_eval_set(&methods, &artifacts, &config, target)?;
    match args.out {
        Some(path) => write_scores(&set, path),
        None => {
            let mut buf = Vec::new();
            write_scores_to(&set, &mut buf).map_err(|e| Error::io("<stdout>", e))?;
            emit(&String::from_utf8_lossy(&buf), None)
        }
    }
}

fn eval(args: EvalArgs) -> Result<()> {
    let set = load_scores(&args.scores)?;
    let options = EvalOptions {
        id_channel: args.id_channel,
        ood_channel: args.ood_channel,
        grid: GridSpec::from_count(args.grid),
        k_bins: args.bins,
        execution: if args.parallel {
            Execution::Parallel
        } else {
            Execution::Sequential
        },
        oracle: args.oracle,
    };
    let evaluation = evaluate(&set, &options)?;
    if let Some(path) = &args.surface {
        write_surface(&evaluation.sweep.surface(), path)?;
    }
    if let Some(path) = &args.curve {
        let axis = options.grid.axis(set.channel(&options.id_channel)?, true)?;
        write_curve(&risk_coverage_curve(&set, &options.id_channel, &axis)?, path)?;
    }
    if let Some(path) = &args.ds_curve {
        write_binned_curve(&evaluation.curve, path)?;
    }
    let format = report_format(args.format, args.out.as_deref());
    emit(&render(&evaluation.report, format), args.out.as_deref())
}

fn select(args: SelectArgs) -> Result<()> {
    let val = args.val.ok_or_else(|| Error::Usage("--val is required".into()))?;
    let test = args.test.ok_or_else(|| Error::Usage("--test is required".into()))?;
    let val = load_scores(val)?;
    let test = load_scores(test)?;
    let modes: Vec<Mode> = match args.mode {
        ModeArg::Id => vec![Mode::IdOnly],
        ModeArg::Ood => vec![Mode::OodOnly],
        ModeArg::Double => vec![Mode::Double],
        ModeArg::All => Mode::ALL.to_vec(),
    };
    let report = select_report(
        &val,
        &test,
        &args.id_channel,
        &args.ood_channel,
        &modes,
        GridSpec::from_count(args.grid),
    )?;
    let format = report_format(args.format, args.out.as_deref());
    emit(&render(&report, format), args.out.as_deref())
}

fn synth(args: SynthArgs) -> Result<()> {
    let mut config = match (args.preset, &args.config) {
        (_, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str::<SynthConfig>(&text).map_err(|source| Error::Json {
                path: path.clone(),
                source,
            })?
        }
        (PresetArg::Custom, None) => {
            return Err(Error::Usage("--preset custom needs --config".into()))
        }
        (preset, None) => {
            let preset = match preset {
                PresetArg::Near => Preset::Near,
                _ => Preset::Far,
            };
            SynthConfig::preset(preset, 1000, 1000, 0.8, 0)?
        }
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(n) = args.n_id {
        config.n_id = n;
    }
    if let Some(n) = args.n_ood {
        config.n_ood = n;
    }
    if let Some(acc) = args.acc {
        config.id_accuracy = acc;
    }
    let set = generate(&config)?;
    match args.out {
        Some(path) => write_scores(&set, path),
        None => {
            let mut buf = Vec::new();
            write_scores_to(&set, &mut buf).map_err(|e| Error::io("<stdout>", e))?;
            emit(&String::from_utf8_lossy(&buf), None)
        }
    }
}
