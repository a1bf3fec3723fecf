//! Monte Carlo runs over replications, pruning criteria and cut-offs.
//!
//! Each replication draws one corpus. For every criterion and cut-off the
//! corpus is pruned, one LDA model is fit and evaluated against the true
//! topics. Every such cell is written to its own JSON file under
//! `output_dir/cells`, so an interrupted run can be resumed.
//!
//! Seeds: replication `r` uses `derive_seed(master_seed, [r])` for its
//! corpus, and the LDA chain of cut-off `i` uses
//! `derive_seed(replication_seed, [1, i])`. The criterion is deliberately
//! not part of the LDA seed, so the three criteria fit identical chains at
//! cut-off 0.

mod aggregate;

pub use aggregate::{aggregate, quantile, summarize, vocab_curve, AggregateRow, AggregateTable, Summary, VocabCurve, VocabCurveRow};

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{generate_corpus, DgpConfig, SyntheticCorpus};
use crate::dtm::{build_dtm, DocumentTermMatrix};
use crate::error::{Error, Result};
use crate::io;
use crate::lda::{fit_lda, GibbsConfig};
use crate::metrics::{evaluate, EvalConfig, EvaluationRecord};
use crate::pruning::{match_tf_threshold, Criterion, CutoffSchedule, PruningRule};
use crate::seed::derive_seed;

pub const CELLS_DIR: &str = "cells";
pub const CONFIG_ECHO: &str = "config.json";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const VOCAB_CURVE_FILE: &str = "vocab_curve.csv";
pub const MANIFEST_FILE: &str = "missing_cells.json";

/// Full description of one Monte Carlo study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Corpus parameters; `seed` is replaced per replication.
    pub dgp: DgpConfig,
    pub n_replications: usize,
    pub criteria: Vec<Criterion>,
    pub schedule: CutoffSchedule,
    /// Sampler parameters; `seed` is replaced per cell.
    pub gibbs: GibbsConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    pub master_seed: u64,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// 300 documents of about 300 tokens, V = 3000, K = 10, 10
    /// replications, all criteria, cut-offs 0% to 10% in steps of 0.5%.
    pub fn desk(master_seed: u64, output_dir: impl Into<PathBuf>) -> Self {
        let mut gibbs = GibbsConfig::new(10, 0);
        gibbs.trace_every = 10;
        ExperimentConfig {
            dgp: DgpConfig::desk(0),
            n_replications: 10,
            criteria: Criterion::ALL.to_vec(),
            schedule: CutoffSchedule::desk(),
            gibbs,
            eval: EvalConfig::default(),
            master_seed,
            output_dir: output_dir.into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.dgp.validate()?;
        self.gibbs.validate()?;
        if self.n_replications == 0 {
            return Err(Error::Config("n_replications must be at least 1".into()));
        }
        if self.criteria.is_empty() {
            return Err(Error::Config("at least one criterion is required".into()));
        }
        let distinct: BTreeSet<_> = self.criteria.iter().collect();
        if distinct.len() != self.criteria.len() {
            return Err(Error::Config("criteria must not repeat".into()));
        }
        Ok(())
    }

    pub fn replication_seed(&self, replication: usize) -> u64 {
        derive_seed(self.master_seed, &[replication as u64])
    }

    pub fn lda_seed(&self, replication: usize, cutoff_index: usize) -> u64 {
        derive_seed(self.replication_seed(replication), &[1, cutoff_index as u64])
    }

    /// Every cell key, replications outermost.
    pub fn cell_keys(&self) -> Vec<CellKey> {
        let mut criteria = self.criteria.clone();
        criteria.sort();
        let mut keys = Vec::new();
        for replication in 0..self.n_replications {
            for &criterion in &criteria {
                for cutoff_index in 0..self.schedule.len() {
                    keys.push(CellKey {
                        replication,
                        criterion,
                        cutoff_index,
                    });
                }
            }
        }
        keys
    }

    pub fn cells_dir(&self) -> PathBuf {
        self.output_dir.join(CELLS_DIR)
    }
}

/// Coordinates of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub replication: usize,
    pub criterion: Criterion,
    pub cutoff_index: usize,
}

impl CellKey {
    pub fn file_name(&self) -> String {
        format!(
            "r{:04}_{}_c{:03}.json",
            self.replication, self.criterion, self.cutoff_index
        )
    }
}

/// Why a cell has no model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbsentReason {
    /// The pruning rule removed every term.
    EmptyVocabulary,
    /// The document-frequency cut-off that sets the target size removed
    /// every term, so there is no size to match.
    NoTargetSize,
}

/// Everything recorded for one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    #[serde(flatten)]
    pub key: CellKey,
    pub cutoff: f64,
    pub replication_seed: u64,
    pub lda_seed: u64,
    /// Distinct terms of the unpruned corpus.
    pub full_vocab_size: usize,
    pub rule: Option<PruningRule>,
    pub vocab_size: Option<usize>,
    /// `1 - vocab_size / full_vocab_size`.
    pub removed_share: Option<f64>,
    pub evaluation: Option<EvaluationRecord>,
    pub absent: Option<AbsentReason>,
}

/// One corpus and the quantities every cell of its replication shares.
#[derive(Debug, Clone)]
pub struct ReplicationData {
    pub replication: usize,
    pub seed: u64,
    pub corpus: SyntheticCorpus,
    pub dtm: DocumentTermMatrix,
    /// Vocabulary size left by each document-frequency cut-off.
    pub df_sizes: Vec<Option<usize>>,
}

/// Draws the corpus of one replication.
pub fn prepare_replication(config: &ExperimentConfig, replication: usize) -> Result<ReplicationData> {
    let seed = config.replication_seed(replication);
    let corpus = generate_corpus(&config.dgp.clone().with_seed(seed))?;
    let dtm = build_dtm(&corpus.docs)?;
    let df_sizes = config
        .schedule
        .values()
        .iter()
        .map(|&c| match PruningRule::RelativeDocFreq(c).apply(&dtm) {
            Ok(m) => Ok(Some(m.n_terms())),
            Err(Error::EmptyVocabulary(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    Ok(ReplicationData {
        replication,
        seed,
        corpus,
        dtm,
        df_sizes,
    })
}

/// Prunes, fits and evaluates one cell of a prepared replication.
pub fn compute_cell(config: &ExperimentConfig, data: &ReplicationData, key: CellKey) -> Result<CellRecord> {
    let idx = key.cutoff_index;
    let cutoff = config.schedule.values()[idx];
    let full = data.dtm.n_terms();
    let lda_seed = config.lda_seed(key.replication, idx);
    let mut record = CellRecord {
        key,
        cutoff,
        replication_seed: data.seed,
        lda_seed,
        full_vocab_size: full,
        rule: None,
        vocab_size: None,
        removed_share: None,
        evaluation: None,
        absent: None,
    };
    let rule = match key.criterion {
        Criterion::DocFreq => Some(PruningRule::RelativeDocFreq(cutoff)),
        Criterion::TermFreq => data.df_sizes[idx]
            .map(|v| PruningRule::AbsoluteTermFreq(match_tf_threshold(&data.dtm, v))),
        Criterion::Tfidf => data.df_sizes[idx].map(PruningRule::TfidfTopV),
    };
    let Some(rule) = rule else {
        record.absent = Some(AbsentReason::NoTargetSize);
        return Ok(record);
    };
    record.rule = Some(rule);
    let pruned = match rule.apply(&data.dtm) {
        Ok(m) => m,
        Err(Error::EmptyVocabulary(_)) => {
            record.vocab_size = Some(0);
            record.removed_share = Some(1.0);
            record.absent = Some(AbsentReason::EmptyVocabulary);
            return Ok(record);
        }
        Err(e) => return Err(e),
    };
    let v = pruned.n_terms();
    record.vocab_size = Some(v);
    record.removed_share = Some(1.0 - v as f64 / full as f64);
    let model = fit_lda(&pruned, &config.gibbs.clone().with_seed(lda_seed))?;
    let (eval, _) = evaluate(&data.corpus.beta, &model, &pruned, &config.eval)?;
    record.evaluation = Some(eval);
    Ok(record)
}

/// Recomputes a single cell from scratch.
pub fn run_cell(config: &ExperimentConfig, key: CellKey) -> Result<CellRecord> {
    compute_cell(config, &prepare_replication(config, key.replication)?, key)
}

/// All cells of one replication, in key order, computed in parallel.
pub fn run_replication(config: &ExperimentConfig, replication: usize) -> Result<Vec<CellRecord>> {
    let data = prepare_replication(config, replication)?;
    config
        .cell_keys()
        .into_iter()
        .filter(|k| k.replication == replication)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&k| compute_cell(config, &data, k))
        .collect()
}

/// How [`run_experiment`] treats existing output.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Keep valid cell files from an earlier run with the same config.
    /// Without it every cell is recomputed and overwritten.
    pub resume: bool,
    /// Maximum number of cells computed at once; `None` uses every core.
    pub jobs: Option<usize>,
}

/// A cell that could not be computed or stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub key: CellKey,
    pub message: String,
}

/// Counters of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    pub total: usize,
    pub computed: usize,
    pub reused: usize,
    pub absent: usize,
}

/// Outcome of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    /// Every cell present on disk at the end of the run, in key order.
    pub cells: Vec<CellRecord>,
    pub stats: RunStats,
    pub failures: Vec<CellFailure>,
    /// Cells without a record; non-empty only after a failure.
    pub missing: Vec<CellKey>,
}

impl ExperimentResult {
    pub fn is_complete(&self) -> bool {
        self.missing.is_empty()
    }
}

/// Manifest written when a run stops early.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingManifest {
    pub missing: Vec<String>,
    pub failures: Vec<CellFailure>,
}

fn read_cell(path: &Path, key: CellKey) -> Option<CellRecord> {
    let text = fs::read_to_string(path).ok()?;
    let cell: CellRecord = serde_json::from_str(&text).ok()?;
    (cell.key == key).then_some(cell)
}

fn check_config_echo(config: &ExperimentConfig, resume: bool) -> Result<()> {
    let path = config.output_dir.join(CONFIG_ECHO);
    if resume && path.exists() {
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let old: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let new = serde_json::to_value(config).expect("config serializes");
        if old != new {
            return Err(Error::Config(format!(
                "{} was written by a different config; rerun without resume",
                path.display()
            )));
        }
    }
    io::write_json(&path, config)
}

/// Runs every missing cell, persisting each as soon as it is done, then
/// writes the aggregate tables.
///
/// Replications run one after another and the cells of a replication run
/// in parallel on at most `options.jobs` threads. `on_cell` sees every
/// newly computed cell. If a cell fails, the run stops after the current
/// replication and writes `missing_cells.json`.
pub fn run_experiment(
    config: &ExperimentConfig,
    options: &RunOptions,
    on_cell: &(dyn Fn(&CellRecord) + Sync),
) -> Result<ExperimentResult> {
    config.validate()?;
    let cells_dir = config.cells_dir();
    fs::create_dir_all(&cells_dir).map_err(|e| Error::io(&cells_dir, e))?;
    check_config_echo(config, options.resume)?;
    let _ = fs::remove_file(config.output_dir.join(MANIFEST_FILE));

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = options.jobs {
        builder = builder.num_threads(jobs.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    let keys = config.cell_keys();
    let mut stats = RunStats {
        total: keys.len(),
        ..RunStats::default()
    };
    let mut cells = Vec::with_capacity(keys.len());
    let mut failures = Vec::new();

    for replication in 0..config.n_replications {
        let rep_keys: Vec<CellKey> = keys.iter().copied().filter(|k| k.replication == replication).collect();
        let mut todo = Vec::new();
        for &k in &rep_keys {
            let existing = if options.resume {
                read_cell(&cells_dir.join(k.file_name()), k)
            } else {
                None
            };
            match existing {
                Some(cell) => {
                    stats.reused += 1;
                    cells.push(cell);
                }
                None => todo.push(k),
            }
        }
        if todo.is_empty() {
            continue;
        }
        let data = match prepare_replication(config, replication) {
            Ok(d) => d,
            Err(e) => {
                failures.extend(todo.iter().map(|&key| CellFailure {
                    key,
                    message: e.to_string(),
                }));
                break;
            }
        };
        let outcomes: Vec<(CellKey, Result<CellRecord>)> = pool.install(|| {
            todo.par_iter()
                .map(|&k| {
                    let out = compute_cell(config, &data, k).and_then(|cell| {
                        io::write_json(&cells_dir.join(k.file_name()), &cell)?;
                        on_cell(&cell);
                        Ok(cell)
                    });
                    (k, out)
                })
                .collect()
        });
        for (key, out) in outcomes {
            match out {
                Ok(cell) => {
                    stats.computed += 1;
                    cells.push(cell);
                }
                Err(e) => failures.push(CellFailure {
                    key,
                    message: e.to_string(),
                }),
            }
        }
        if !failures.is_empty() {
            break;
        }
    }

    cells.sort_by_key(|c| c.key);
    stats.absent = cells.iter().filter(|c| c.absent.is_some()).count();
    let present: BTreeSet<CellKey> = cells.iter().map(|c| c.key).collect();
    let missing: Vec<CellKey> = keys.into_iter().filter(|k| !present.contains(k)).collect();

    if missing.is_empty() {
        write_tables(&config.output_dir, &cells)?;
    } else {
        let manifest = MissingManifest {
            missing: missing.iter().map(CellKey::file_name).collect(),
            failures: failures.clone(),
        };
        io::write_json(&config.output_dir.join(MANIFEST_FILE), &manifest)?;
    }
    Ok(ExperimentResult {
        cells,
        stats,
        failures,
        missing,
    })
}

/// Writes `aggregate.csv` and, when the document-frequency criterion is
/// present, `vocab_curve.csv` into `dir`.
pub fn write_tables(dir: &Path, cells: &[CellRecord]) -> Result<()> {
    io::write_atomic(&dir.join(AGGREGATE_FILE), aggregate(cells).to_csv().as_bytes())?;
    if let Some(curve) = vocab_curve(cells) {
        io::write_atomic(&dir.join(VOCAB_CURVE_FILE), curve.to_csv().as_bytes())?;
    }
    Ok(())
}

/// Reads every `*.json` cell file in `dir`, sorted by key.
pub fn read_cells(dir: &Path) -> Result<Vec<CellRecord>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut cells = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_none_or(|e| e != "json") {
            continue;
        }
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let cell: CellRecord =
            serde_json::from_str(&text).map_err(|e| Error::format(&path, e.to_string()))?;
        cells.push(cell);
    }
    cells.sort_by_key(|c| c.key);
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(dir: &Path) -> ExperimentConfig {
        ExperimentConfig {
            dgp: DgpConfig::new(30, 40.0, 60, 3, 0),
            n_replications: 2,
            criteria: vec![Criterion::DocFreq],
            schedule: CutoffSchedule::new(vec![0.0, 0.05, 0.1]).unwrap(),
            gibbs: GibbsConfig::new(3, 0).with_sweeps(10, 30),
            eval: EvalConfig::default(),
            master_seed: 11,
            output_dir: dir.to_path_buf(),
        }
    }

    #[test]
    fn cardinality_and_removed_share() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny(dir.path());
        let res = run_experiment(&cfg, &RunOptions::default(), &|_| {}).unwrap();
        assert_eq!(res.cells.len(), 6);
        assert_eq!(res.stats.computed, 6);
        for c in &res.cells {
            let v = c.vocab_size.unwrap();
            assert_eq!(c.removed_share.unwrap(), 1.0 - v as f64 / c.full_vocab_size as f64);
        }
        assert!(dir.path().join(AGGREGATE_FILE).exists());
        assert!(dir.path().join(VOCAB_CURVE_FILE).exists());
        assert_eq!(read_cells(&cfg.cells_dir()).unwrap(), res.cells);
    }

    #[test]
    fn isolated_cell_equals_batch_cell() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny(dir.path());
        cfg.criteria = Criterion::ALL.to_vec();
        let batch = run_replication(&cfg, 1).unwrap();
        let key = CellKey {
            replication: 1,
            criterion: Criterion::Tfidf,
            cutoff_index: 2,
        };
        let alone = run_cell(&cfg, key).unwrap();
        assert_eq!(batch.iter().find(|c| c.key == key).unwrap(), &alone);
        assert_eq!(run_replication(&cfg, 1).unwrap(), batch);
    }

    #[test]
    fn criteria_coincide_at_cutoff_zero() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny(dir.path());
        cfg.criteria = Criterion::ALL.to_vec();
        let cells = run_replication(&cfg, 0).unwrap();
        let at_zero: Vec<&CellRecord> = cells.iter().filter(|c| c.key.cutoff_index == 0).collect();
        assert_eq!(at_zero.len(), 3);
        for c in &at_zero[1..] {
            assert_eq!(c.evaluation, at_zero[0].evaluation);
            assert_eq!(c.vocab_size, at_zero[0].vocab_size);
        }
    }

    #[test]
    fn empty_vocabulary_is_absent() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny(dir.path());
        cfg.criteria = Criterion::ALL.to_vec();
        cfg.schedule = CutoffSchedule::new(vec![0.0, 1.0]).unwrap();
        cfg.n_replications = 1;
        cfg.dgp = DgpConfig::new(30, 5.0, 500, 3, 0);
        let res = run_experiment(&cfg, &RunOptions::default(), &|_| {}).unwrap();
        assert!(res.is_complete());
        let absent: Vec<_> = res.cells.iter().filter(|c| c.key.cutoff_index == 1).collect();
        assert_eq!(absent[0].absent, Some(AbsentReason::EmptyVocabulary));
        assert_eq!(absent[1].absent, Some(AbsentReason::NoTargetSize));
        assert_eq!(res.stats.absent, 3);
        let table = aggregate(&res.cells);
        let row = table.get(Criterion::DocFreq, 1, "recall_js").unwrap();
        assert_eq!((row.n, row.summary), (0, None));
    }

    #[test]
    fn resume_recomputes_only_missing_cells() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny(dir.path());
        let first = run_experiment(&cfg, &RunOptions::default(), &|_| {}).unwrap();
        let aggregate_before = fs::read(dir.path().join(AGGREGATE_FILE)).unwrap();
        for k in [&first.cells[1].key, &first.cells[4].key] {
            fs::remove_file(cfg.cells_dir().join(k.file_name())).unwrap();
        }
        fs::write(cfg.cells_dir().join(first.cells[5].key.file_name()), "{truncated").unwrap();
        let seen = std::sync::Mutex::new(Vec::new());
        let opts = RunOptions {
            resume: true,
            jobs: Some(2),
        };
        let second = run_experiment(&cfg, &opts, &|c| seen.lock().unwrap().push(c.key)).unwrap();
        assert_eq!(second.stats.computed, 3);
        assert_eq!(second.stats.reused, 3);
        let mut seen = seen.into_inner().unwrap();
        seen.sort();
        assert_eq!(seen, vec![first.cells[1].key, first.cells[4].key, first.cells[5].key]);
        assert_eq!(second.cells, first.cells);
        assert_eq!(fs::read(dir.path().join(AGGREGATE_FILE)).unwrap(), aggregate_before);
    }

    #[test]
    fn resume_rejects_changed_config() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny(dir.path());
        cfg.n_replications = 1;
        cfg.schedule = CutoffSchedule::new(vec![0.0]).unwrap();
        run_experiment(&cfg, &RunOptions::default(), &|_| {}).unwrap();
        cfg.master_seed += 1;
        let opts = RunOptions {
            resume: true,
            jobs: None,
        };
        assert!(matches!(run_experiment(&cfg, &opts, &|_| {}), Err(Error::Config(_))));
    }

    #[test]
    fn io_failure_leaves_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny(dir.path());
        // a directory where a cell file should go makes the rename fail
        let blocker = cfg.cells_dir().join(cfg.cell_keys()[2].file_name());
        fs::create_dir_all(blocker.join("x")).unwrap();
        let res = run_experiment(&cfg, &RunOptions::default(), &|_| {}).unwrap();
        assert!(!res.is_complete());
        assert_eq!(res.failures.len(), 1);
        // the run stops after the failing replication
        assert_eq!(res.missing.len(), 4);
        let manifest: MissingManifest = io::read_json(&dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(manifest.missing.len(), 4);
        assert!(!dir.path().join(AGGREGATE_FILE).exists());
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = ExperimentConfig::desk(3, "out");
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&text).unwrap(), cfg);
        assert_eq!(cfg.cell_keys().len(), 10 * 3 * 21);
        assert_eq!(cfg.dgp.n_topics, 10);
    }
}
