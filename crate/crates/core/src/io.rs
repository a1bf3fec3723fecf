//! On-disk formats.
//!
//! * Corpus: `corpus.txt.gz`, one document per line as `doc_id<TAB>tok tok ...`,
//!   and `assignments.txt.gz` with the token topics in the same layout.
//! * Ground truth: `beta.csv` (K x V) and `theta.csv` (D x K).
//! * Fitted model: `phi.csv` (K x V'), `theta.csv` (D x K) and `trace.csv`.
//! * Document-term matrix: coordinate text, `doc term count` per line.
//!
//! Every matrix and coordinate file starts with a one-line JSON header.
//! Floats are written with 17 significant digits, which round-trips `f64`
//! exactly.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::corpus::{DgpConfig, SyntheticCorpus, TopicWordMatrix};
use crate::dtm::DocumentTermMatrix;
use crate::error::{Error, Result};
use crate::lda::{EstimatedModel, GibbsConfig};

pub const CORPUS_FILE: &str = "corpus.txt.gz";
pub const ASSIGNMENTS_FILE: &str = "assignments.txt.gz";
pub const BETA_FILE: &str = "beta.csv";
pub const THETA_FILE: &str = "theta.csv";
pub const PHI_FILE: &str = "phi.csv";
pub const TRACE_FILE: &str = "trace.csv";
pub const DTM_FILE: &str = "dtm.txt";

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header line of a dense matrix file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixHeader<C> {
    pub kind: String,
    pub rows: usize,
    pub cols: usize,
    /// Original term ids of the columns, for matrices over a pruned vocabulary.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<u32>>,
    pub config: C,
}

/// Header line of a coordinate-format matrix file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtmHeader {
    pub n_docs: usize,
    pub n_terms: usize,
    pub terms: Vec<u32>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

/// Writes `bytes` to `path` through a temporary sibling and a rename, so
/// readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid_parameter(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn json_line<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("headers serialize")
}

fn parse_header<T: DeserializeOwned>(path: &Path, line: Option<std::io::Result<String>>) -> Result<T> {
    let line = line
        .ok_or_else(|| Error::format(path, "missing header line"))?
        .map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&line).map_err(|e| Error::format(path, format!("header: {e}")))
}

// ---------------------------------------------------------------- matrices

/// Writes a dense matrix with a JSON header line.
pub fn write_matrix<'a, C: Serialize>(
    path: &Path,
    header: &MatrixHeader<C>,
    rows: impl IntoIterator<Item = &'a [f64]>,
) -> Result<()> {
    let mut w = create(path)?;
    let body = || -> std::io::Result<()> {
        writeln!(w, "{}", json_line(header))?;
        for row in rows {
            let line: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        w.flush()
    };
    body().map_err(|e| Error::io(path, e))
}

/// Reads a dense matrix written by [`write_matrix`].
pub fn read_matrix<C: DeserializeOwned>(path: &Path) -> Result<(MatrixHeader<C>, Vec<Vec<f64>>)> {
    let mut lines = open(path)?.lines();
    let header: MatrixHeader<C> = parse_header(path, lines.next())?;
    let mut rows = Vec::with_capacity(header.rows);
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::format(path, format!("line {}: {e}", i + 2)))?;
        if row.len() != header.cols {
            return Err(Error::format(
                path,
                format!("line {}: {} values, header says {}", i + 2, row.len(), header.cols),
            ));
        }
        rows.push(row);
    }
    if rows.len() != header.rows {
        return Err(Error::format(
            path,
            format!("{} rows, header says {}", rows.len(), header.rows),
        ));
    }
    Ok((header, rows))
}

// ------------------------------------------------------------------ corpus

fn write_token_lines(path: &Path, docs: &[Vec<u32>]) -> Result<()> {
    let file = create(path)?;
    let mut gz = GzEncoder::new(file, Compression::fast());
    let mut body = || -> std::io::Result<()> {
        let mut line = String::new();
        for (d, doc) in docs.iter().enumerate() {
            line.clear();
            line.push_str(&d.to_string());
            line.push('\t');
            for (i, t) in doc.iter().enumerate() {
                if i > 0 {
                    line.push(' ');
                }
                line.push_str(&t.to_string());
            }
            line.push('\n');
            gz.write_all(line.as_bytes())?;
        }
        gz.try_finish()?;
        gz.get_mut().flush()
    };
    body().map_err(|e| Error::io(path, e))
}

fn read_token_lines(path: &Path) -> Result<Vec<Vec<u32>>> {
    let mut text = String::new();
    GzDecoder::new(open(path)?)
        .read_to_string(&mut text)
        .map_err(|e| Error::io(path, e))?;
    let mut docs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let bad = |m: String| Error::format(path, format!("line {}: {m}", i + 1));
        let (id, toks) = line
            .split_once('\t')
            .ok_or_else(|| bad("expected `doc_id<TAB>tokens`".into()))?;
        let id: usize = id.parse().map_err(|e| bad(format!("doc id: {e}")))?;
        if id != docs.len() {
            return Err(bad(format!("document id {id}, expected {}", docs.len())));
        }
        let doc = toks
            .split_ascii_whitespace()
            .map(str::parse::<u32>)
            .collect::<std::result::Result<Vec<u32>, _>>()
            .map_err(|e| bad(format!("token: {e}")))?;
        docs.push(doc);
    }
    Ok(docs)
}

/// Writes tokens, assignments and ground truth into `dir`.
pub fn write_corpus(dir: &Path, corpus: &SyntheticCorpus) -> Result<()> {
    write_token_lines(&dir.join(CORPUS_FILE), &corpus.docs)?;
    write_token_lines(&dir.join(ASSIGNMENTS_FILE), &corpus.z)?;
    let beta = &corpus.beta;
    write_matrix(
        &dir.join(BETA_FILE),
        &MatrixHeader {
            kind: "beta".into(),
            rows: beta.n_topics(),
            cols: beta.n_terms(),
            terms: None,
            config: &corpus.config,
        },
        beta.rows(),
    )?;
    write_matrix(
        &dir.join(THETA_FILE),
        &MatrixHeader {
            kind: "theta".into(),
            rows: corpus.thetas.len(),
            cols: beta.n_topics(),
            terms: None,
            config: &corpus.config,
        },
        corpus.thetas.iter().map(Vec::as_slice),
    )
}

/// Reads the tokens of `dir/corpus.txt.gz`.
pub fn read_documents(dir: &Path) -> Result<Vec<Vec<u32>>> {
    read_token_lines(&dir.join(CORPUS_FILE))
}

/// Reads a ground-truth topic-word matrix. `path` is either `beta.csv` or
/// a corpus directory containing it.
pub fn read_ground_truth(path: &Path) -> Result<(DgpConfig, TopicWordMatrix)> {
    let path = if path.is_dir() { path.join(BETA_FILE) } else { path.to_path_buf() };
    let (header, rows) = read_matrix::<DgpConfig>(&path)?;
    let beta = TopicWordMatrix::from_rows(rows).map_err(|e| Error::format(&path, e.to_string()))?;
    Ok((header.config, beta))
}

/// Reads back everything [`write_corpus`] wrote.
pub fn read_corpus(dir: &Path) -> Result<SyntheticCorpus> {
    let (config, beta) = read_ground_truth(&dir.join(BETA_FILE))?;
    let (_, thetas) = read_matrix::<DgpConfig>(&dir.join(THETA_FILE))?;
    let docs = read_documents(dir)?;
    let z = read_token_lines(&dir.join(ASSIGNMENTS_FILE))?;
    if docs.len() != z.len() || docs.len() != thetas.len() {
        return Err(Error::format(dir, "tokens, assignments and theta disagree on the document count"));
    }
    Ok(SyntheticCorpus {
        config,
        beta,
        docs,
        thetas,
        z,
    })
}

// --------------------------------------------------------------------- dtm

/// Writes a document-term matrix in coordinate format.
pub fn write_dtm(path: &Path, dtm: &DocumentTermMatrix) -> Result<()> {
    let header = DtmHeader {
        n_docs: dtm.n_docs(),
        n_terms: dtm.n_terms(),
        terms: dtm.vocab().terms().to_vec(),
    };
    let mut w = create(path)?;
    let mut body = || -> std::io::Result<()> {
        writeln!(w, "{}", json_line(&header))?;
        for (d, t, n) in dtm.triplets() {
            writeln!(w, "{d} {t} {n}")?;
        }
        w.flush()
    };
    body().map_err(|e| Error::io(path, e))
}

/// Reads a matrix written by [`write_dtm`].
pub fn read_dtm(path: &Path) -> Result<DocumentTermMatrix> {
    let mut lines = open(path)?.lines();
    let header: DtmHeader = parse_header(path, lines.next())?;
    if header.terms.len() != header.n_terms {
        return Err(Error::format(path, "term list length differs from n_terms"));
    }
    let mut entries = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |m: &str| Error::format(path, format!("line {}: {m}", i + 2));
        let mut it = line.split_ascii_whitespace();
        let mut field = |name: &str| -> Result<u64> {
            it.next()
                .ok_or_else(|| bad(&format!("missing {name}")))?
                .parse()
                .map_err(|_| bad(&format!("bad {name}")))
        };
        let d = field("doc")? as usize;
        let t = u32::try_from(field("term")?).map_err(|_| bad("term id too large"))?;
        let n = u32::try_from(field("count")?).map_err(|_| bad("count too large"))?;
        entries.push((d, t, n));
    }
    DocumentTermMatrix::from_triplets(header.n_docs, header.terms, entries)
        .map_err(|e| Error::format(path, e.to_string()))
}

// ------------------------------------------------------------------- model

/// A fitted model as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredModel {
    pub phi: TopicWordMatrix,
    pub terms: Vec<u32>,
    pub theta_hat: Vec<Vec<f64>>,
    pub log_likelihood_trace: Vec<(usize, f64)>,
    pub config: GibbsConfig,
}

impl StoredModel {
    /// Reattaches the matrix the model was fit on. Fails if its vocabulary
    /// differs from the stored term list.
    pub fn into_model(self, dtm: &DocumentTermMatrix) -> Result<EstimatedModel> {
        if dtm.vocab().terms() != self.terms.as_slice() {
            return Err(Error::invalid_input(
                "model vocabulary differs from the matrix vocabulary",
            ));
        }
        Ok(EstimatedModel {
            phi: self.phi,
            theta_hat: self.theta_hat,
            vocab: dtm.vocab().clone(),
            log_likelihood_trace: self.log_likelihood_trace,
            config: self.config,
        })
    }
}

/// Writes `phi.csv`, `theta.csv` and `trace.csv` into `dir`.
pub fn write_model(dir: &Path, model: &EstimatedModel) -> Result<()> {
    let terms = model.vocab.terms().to_vec();
    write_matrix(
        &dir.join(PHI_FILE),
        &MatrixHeader {
            kind: "phi".into(),
            rows: model.phi.n_topics(),
            cols: model.phi.n_terms(),
            terms: Some(terms.clone()),
            config: &model.config,
        },
        model.phi.rows(),
    )?;
    write_matrix(
        &dir.join(THETA_FILE),
        &MatrixHeader {
            kind: "theta_hat".into(),
            rows: model.theta_hat.len(),
            cols: model.phi.n_topics(),
            terms: Some(terms),
            config: &model.config,
        },
        model.theta_hat.iter().map(Vec::as_slice),
    )?;
    let path = dir.join(TRACE_FILE);
    let mut w = create(&path)?;
    let mut body = || -> std::io::Result<()> {
        writeln!(w, "sweep,log_likelihood")?;
        for &(s, ll) in &model.log_likelihood_trace {
            writeln!(w, "{s},{}", fmt_f64(ll))?;
        }
        w.flush()
    };
    body().map_err(|e| Error::io(&path, e))
}

/// Reads a model directory written by [`write_model`]. A missing
/// `trace.csv` gives an empty trace.
pub fn read_model(dir: &Path) -> Result<StoredModel> {
    let phi_path = dir.join(PHI_FILE);
    let (header, rows) = read_matrix::<GibbsConfig>(&phi_path)?;
    let terms = header
        .terms
        .ok_or_else(|| Error::format(&phi_path, "header lacks the term list"))?;
    if terms.len() != header.cols {
        return Err(Error::format(&phi_path, "term list length differs from the column count"));
    }
    let phi = TopicWordMatrix::from_rows(rows).map_err(|e| Error::format(&phi_path, e.to_string()))?;
    let (_, theta_hat) = read_matrix::<GibbsConfig>(&dir.join(THETA_FILE))?;
    let trace_path = dir.join(TRACE_FILE);
    let log_likelihood_trace = if trace_path.exists() {
        read_trace(&trace_path)?
    } else {
        Vec::new()
    };
    Ok(StoredModel {
        phi,
        terms,
        theta_hat,
        log_likelihood_trace,
        config: header.config,
    })
}

fn read_trace(path: &Path) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate().skip(1) {
        let line = line.map_err(|e| Error::io(path, e))?;
        let parsed = line
            .split_once(',')
            .and_then(|(s, v)| Some((s.parse().ok()?, v.parse().ok()?)));
        out.push(parsed.ok_or_else(|| Error::format(path, format!("line {}", i + 1)))?);
    }
    Ok(out)
}

/// Reads and parses a JSON file. Syntax errors report line and column.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::Config(format!(
            "{}: {e} (line {}, column {})",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

/// Serializes `value` as pretty JSON and writes it atomically.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("values serialize");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
