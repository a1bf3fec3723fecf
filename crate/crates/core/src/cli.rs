//! `topicprune` command line.
//!
//! Exit codes: 0 success, 2 configuration or parameter error, 3 partial
//! results, 4 I/O or file-format error. Every subcommand overwrites its
//! outputs, so repeating a command with the same inputs gives the same
//! files.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::corpus::{generate_corpus, DgpConfig};
use crate::dtm::build_dtm;
use crate::error::{Error, Result};
use crate::experiment::{self, ExperimentConfig, RunOptions};
use crate::io;
use crate::lda::{fit_lda, GibbsConfig};
use crate::metrics::{evaluate, EvalConfig, TopicComparison};
use crate::pruning::{match_tf_threshold, Criterion, PruningRule};

/// Environment variable that replaces `master_seed` of an experiment.
pub const SEED_ENV: &str = "TOPICPRUNE_SEED";

#[derive(Debug, Parser)]
#[command(name = "topicprune", version, about = "Vocabulary pruning experiments for LDA topic models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a synthetic corpus with its ground truth.
    Generate(GenerateArgs),
    /// Remove infrequent terms from a document-term matrix.
    Prune(PruneArgs),
    /// Fit LDA by collapsed Gibbs sampling.
    Fit(FitArgs),
    /// Compare a fitted model with the true topics.
    Evaluate(EvaluateArgs),
    /// Run a Monte Carlo experiment.
    Experiment(ExperimentArgs),
    /// Summarize cell files into aggregate.csv and vocab_curve.csv.
    Aggregate(AggregateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    Dgp1,
    Dgp2,
    Desk,
}

impl Preset {
    fn dgp(self, seed: u64) -> DgpConfig {
        match self {
            Preset::Dgp1 => DgpConfig::dgp1(seed),
            Preset::Dgp2 => DgpConfig::dgp2(seed),
            Preset::Desk => DgpConfig::desk(seed),
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Corpus parameters as JSON.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Overrides the seed of the config or preset.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PruneArgs {
    #[arg(long, value_parser = parse_criterion)]
    pub criterion: Criterion,
    /// Relative document-frequency cut-off. With termfreq or tfidf it sets
    /// the target vocabulary size instead.
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// Minimum corpus count (termfreq).
    #[arg(long)]
    pub min_count: Option<u64>,
    /// Number of terms to keep (tfidf).
    #[arg(long)]
    pub top_v: Option<usize>,
    /// Input matrix in coordinate format.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Matrix in coordinate format.
    #[arg(long)]
    pub dtm: PathBuf,
    /// Sampler settings as JSON.
    #[arg(long, conflicts_with = "topics", required_unless_present = "topics")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub topics: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub sweeps: Option<usize>,
    /// Average estimates over the post-burn-in sweeps.
    #[arg(long)]
    pub average: bool,
    /// Output directory for phi.csv, theta.csv and trace.csv.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// beta.csv or a corpus directory.
    #[arg(long)]
    pub truth: PathBuf,
    /// Model directory written by `fit`.
    #[arg(long)]
    pub model: PathBuf,
    /// The matrix the model was fit on.
    #[arg(long)]
    pub dtm: PathBuf,
    /// Metric settings as JSON.
    #[arg(long)]
    pub eval_config: Option<PathBuf>,
    /// Where to write the record; standard output if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional CSV of every match.
    #[arg(long)]
    pub matches: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub config: Option<PathBuf>,
    /// Desk-scale preset.
    #[arg(long, value_enum)]
    pub preset: Option<ExperimentPreset>,
    /// Overrides output_dir.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides n_replications.
    #[arg(long)]
    pub replications: Option<usize>,
    /// Keep finished cells of an earlier run.
    #[arg(long)]
    pub resume: bool,
    /// Maximum number of cells computed at once.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ExperimentPreset {
    Desk,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// Directory of cell files.
    #[arg(long)]
    pub cells: PathBuf,
    /// Path of aggregate.csv; vocab_curve.csv goes next to it.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_criterion(s: &str) -> std::result::Result<Criterion, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Error(Error),
    Partial(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Error(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Partial(_) => 3,
            CliError::Error(Error::Io { .. } | Error::Format { .. }) => 4,
            CliError::Error(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Error(e) => write!(f, "{e}"),
            CliError::Partial(m) => f.write_str(m),
        }
    }
}

/// Parses the process arguments, runs the command and maps the outcome to
/// an exit code.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("topicprune: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(cli: Cli) -> std::result::Result<(), CliError> {
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Prune(a) => prune(a),
        Command::Fit(a) => fit(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Experiment(a) => run_experiment(a),
        Command::Aggregate(a) => aggregate(a),
    }
}

fn generate(a: GenerateArgs) -> std::result::Result<(), CliError> {
    let mut config = match (&a.config, a.preset) {
        (Some(path), _) => io::read_json::<DgpConfig>(path)?,
        (None, Some(p)) => p.dgp(0),
        (None, None) => unreachable!("clap requires one of them"),
    };
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    config.validate()?;
    let corpus = generate_corpus(&config)?;
    io::write_corpus(&a.out, &corpus)?;
    io::write_dtm(&a.out.join(io::DTM_FILE), &build_dtm(&corpus.docs)?)?;
    println!(
        "generated {} documents, {} tokens, {} distinct terms in {}",
        corpus.n_docs(),
        corpus.total_tokens(),
        corpus.distinct_terms(),
        a.out.display()
    );
    Ok(())
}

fn prune(a: PruneArgs) -> std::result::Result<(), CliError> {
    let bad = |m: &str| CliError::Error(Error::InvalidParameter(m.to_string()));
    // flags are checked before anything is read
    let rule_from = |dtm: &crate::dtm::DocumentTermMatrix| -> Result<PruningRule> {
        let target = |c: f64| -> Result<usize> {
            Ok(PruningRule::RelativeDocFreq(c).apply(dtm)?.n_terms())
        };
        Ok(match (a.criterion, a.cutoff, a.min_count, a.top_v) {
            (Criterion::DocFreq, Some(c), None, None) => PruningRule::RelativeDocFreq(c),
            (Criterion::TermFreq, None, Some(m), None) => PruningRule::AbsoluteTermFreq(m),
            (Criterion::TermFreq, Some(c), None, None) => {
                PruningRule::AbsoluteTermFreq(match_tf_threshold(dtm, target(c)?))
            }
            (Criterion::Tfidf, None, None, Some(v)) => PruningRule::TfidfTopV(v),
            (Criterion::Tfidf, Some(c), None, None) => PruningRule::TfidfTopV(target(c)?),
            _ => unreachable!("validated below"),
        })
    };
    let valid = matches!(
        (a.criterion, a.cutoff.is_some(), a.min_count.is_some(), a.top_v.is_some()),
        (Criterion::DocFreq, true, false, false)
            | (Criterion::TermFreq, true, false, false)
            | (Criterion::TermFreq, false, true, false)
            | (Criterion::Tfidf, true, false, false)
            | (Criterion::Tfidf, false, false, true)
    );
    if !valid {
        return Err(bad(
            "docfreq takes --cutoff; termfreq takes --min-count or --cutoff; tfidf takes --top-v or --cutoff",
        ));
    }
    if let Some(c) = a.cutoff {
        PruningRule::RelativeDocFreq(c).validate()?;
    }
    let dtm = io::read_dtm(&a.input)?;
    let rule = rule_from(&dtm)?;
    let pruned = rule.apply(&dtm)?;
    io::write_dtm(&a.out, &pruned)?;
    println!(
        "{rule:?}: kept {} of {} terms",
        pruned.n_terms(),
        dtm.n_terms()
    );
    Ok(())
}

fn fit(a: FitArgs) -> std::result::Result<(), CliError> {
    let mut config = match (&a.config, a.topics) {
        (Some(path), _) => io::read_json::<GibbsConfig>(path)?,
        (None, Some(k)) => GibbsConfig::new(k, 0),
        (None, None) => unreachable!("clap requires one of them"),
    };
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(b) = a.burn_in {
        config.burn_in = b;
    }
    if let Some(n) = a.sweeps {
        config.n_sweeps = n;
    }
    config.average_samples |= a.average;
    config.validate()?;
    let dtm = io::read_dtm(&a.dtm)?;
    let model = fit_lda(&dtm, &config)?;
    io::write_model(&a.out, &model)?;
    let ll = model.log_likelihood_trace.last().map_or(f64::NAN, |&(_, l)| l);
    println!(
        "fit K={} on {} terms, {} tokens; final log likelihood {ll:.6}",
        config.n_topics,
        dtm.n_terms(),
        dtm.total_tokens()
    );
    Ok(())
}

fn write_matches(path: &Path, cmp: &TopicComparison) -> Result<()> {
    let mut out = String::from("kind,metric,est_topic,true_topic,score,accepted\n");
    for (m, _) in [&cmp.cosine, &cmp.js, &cmp.rbo] {
        for p in &m.pairs {
            out.push_str(&format!(
                "best,{},{},{},{},{}\n",
                m.metric.name(),
                p.est_topic,
                p.true_topic,
                io::fmt_f64(p.score),
                p.accepted
            ));
        }
    }
    for (&(e, t), &d) in cmp.fit_assignment.pairs.iter().zip(&cmp.fit_distances) {
        out.push_str(&format!("one_to_one,fit,{e},{t},{},\n", io::fmt_f64(d)));
    }
    io::write_atomic(path, out.as_bytes())
}

fn evaluate_cmd(a: EvaluateArgs) -> std::result::Result<(), CliError> {
    let eval_config = match &a.eval_config {
        Some(p) => io::read_json::<EvalConfig>(p)?,
        None => EvalConfig::default(),
    };
    let (_, truth) = io::read_ground_truth(&a.truth)?;
    let dtm = io::read_dtm(&a.dtm)?;
    let model = io::read_model(&a.model)?.into_model(&dtm)?;
    let (record, cmp) = evaluate(&truth, &model, &dtm, &eval_config)?;
    let json = serde_json::to_string_pretty(&record).expect("record serializes");
    match &a.out {
        Some(p) => io::write_atomic(p, format!("{json}\n").as_bytes())?,
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{json}").map_err(|e| Error::io("<stdout>", e))?;
        }
    }
    if let Some(p) = &a.matches {
        write_matches(p, &cmp)?;
    }
    Ok(())
}

fn seed_override() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("{SEED_ENV}={s:?} is not a 64-bit unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn run_experiment(a: ExperimentArgs) -> std::result::Result<(), CliError> {
    let mut config = match (&a.config, a.preset) {
        (Some(path), _) => io::read_json::<ExperimentConfig>(path)?,
        (None, Some(ExperimentPreset::Desk)) => ExperimentConfig::desk(0, "desk_experiment"),
        (None, None) => unreachable!("clap requires one of them"),
    };
    if let Some(out) = a.out {
        config.output_dir = out;
    }
    if let Some(n) = a.replications {
        config.n_replications = n;
    }
    if let Some(seed) = seed_override()? {
        config.master_seed = seed;
    }
    if a.jobs == Some(0) {
        return Err(Error::Config("--jobs must be at least 1".into()).into());
    }
    config.validate()?;
    let options = RunOptions {
        resume: a.resume,
        jobs: a.jobs,
    };
    let total = config.cell_keys().len();
    let result = experiment::run_experiment(&config, &options, &|cell| {
        let status = match (&cell.evaluation, cell.absent) {
            (Some(e), _) => format!(
                "V={} fit={:.4} recall(cos/js/rbo)={:.2}/{:.2}/{:.2}",
                cell.vocab_size.unwrap_or(0),
                e.model_fit,
                e.recall_cosine,
                e.recall_js,
                e.recall_rbo
            ),
            (None, reason) => format!("absent ({reason:?})"),
        };
        println!("cell {} cutoff={} {status}", cell.key.file_name(), cell.cutoff);
    })?;
    let s = &result.stats;
    println!(
        "{} of {total} cells: {} computed, {} reused, {} absent; output in {}",
        result.cells.len(),
        s.computed,
        s.reused,
        s.absent,
        config.output_dir.display()
    );
    if result.is_complete() {
        Ok(())
    } else {
        for f in &result.failures {
            eprintln!("cell {} failed: {}", f.key.file_name(), f.message);
        }
        Err(CliError::Partial(format!(
            "{} cells missing; see {}",
            result.missing.len(),
            config.output_dir.join(experiment::MANIFEST_FILE).display()
        )))
    }
}

fn aggregate(a: AggregateArgs) -> std::result::Result<(), CliError> {
    let cells = experiment::read_cells(&a.cells)?;
    if cells.is_empty() {
        return Err(Error::InvalidInput(format!("no cell files in {}", a.cells.display())).into());
    }
    let table = experiment::aggregate(&cells);
    io::write_atomic(&a.out, table.to_csv().as_bytes())?;
    let dir = a.out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    if let Some(curve) = experiment::vocab_curve(&cells) {
        io::write_atomic(&dir.join(experiment::VOCAB_CURVE_FILE), curve.to_csv().as_bytes())?;
    }
    println!("aggregated {} cells into {}", cells.len(), a.out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Partial(String::new()).exit_code(), 3);
        assert_eq!(CliError::from(Error::Config("x".into())).exit_code(), 2);
        let io = Error::io("p", std::io::Error::other("x"));
        assert_eq!(CliError::from(io).exit_code(), 4);
    }
}
