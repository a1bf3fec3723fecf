//! Sparse document-term matrices and their vocabulary statistics.

use crate::error::{Error, Result};

/// Retained terms with their document and corpus frequencies.
///
/// `terms` holds original term ids in ascending order; position `j` in
/// `terms` is column `j` of the matrix that owns this vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<u32>,
    df: Vec<u32>,
    cf: Vec<u64>,
    n_docs: usize,
}

impl Vocabulary {
    pub fn terms(&self) -> &[u32] {
        &self.terms
    }

    /// Number of documents containing each retained term.
    pub fn df(&self) -> &[u32] {
        &self.df
    }

    /// Total occurrences of each retained term.
    pub fn cf(&self) -> &[u64] {
        &self.cf
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Column index of an original term id.
    pub fn column_of(&self, term: u32) -> Option<usize> {
        self.terms.binary_search(&term).ok()
    }
}

/// Document x term count matrix in compressed row layout.
///
/// Rows are never dropped: a document with no retained terms stays as an
/// all-zero row so row indices keep lining up with per-document ground
/// truth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentTermMatrix {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    counts: Vec<u32>,
    vocab: Vocabulary,
}

impl DocumentTermMatrix {
    pub fn n_docs(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn n_terms(&self) -> usize {
        self.vocab.len()
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Non-zero entries of row `d` as `(column, count)`, columns ascending.
    pub fn row(&self, d: usize) -> impl ExactSizeIterator<Item = (usize, u32)> + '_ {
        let span = self.row_ptr[d]..self.row_ptr[d + 1];
        self.cols[span.clone()]
            .iter()
            .zip(&self.counts[span])
            .map(|(&c, &n)| (c as usize, n))
    }

    /// Number of retained tokens in document `d`.
    pub fn doc_len(&self, d: usize) -> u64 {
        self.row(d).map(|(_, n)| u64::from(n)).sum()
    }

    pub fn total_tokens(&self) -> u64 {
        self.vocab.cf.iter().sum()
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// All non-zero entries as `(doc, original term id, count)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, u32, u32)> + '_ {
        (0..self.n_docs())
            .flat_map(move |d| self.row(d).map(move |(c, n)| (d, self.vocab.terms[c], n)))
    }

    pub fn to_dense(&self) -> Vec<Vec<u32>> {
        (0..self.n_docs())
            .map(|d| {
                let mut dense = vec![0; self.n_terms()];
                for (c, n) in self.row(d) {
                    dense[c] = n;
                }
                dense
            })
            .collect()
    }

    /// Rebuilds a matrix from coordinate entries keyed by original term id.
    ///
    /// Every id in `terms` must occur in at least one entry; duplicate
    /// `(doc, term)` coordinates are summed.
    pub fn from_triplets(
        n_docs: usize,
        terms: Vec<u32>,
        entries: impl IntoIterator<Item = (usize, u32, u32)>,
    ) -> Result<Self> {
        if n_docs == 0 {
            return Err(Error::invalid_input("matrix needs at least one document"));
        }
        if terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid_input("term list must be strictly ascending"));
        }
        let mut rows: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n_docs];
        for (d, term, n) in entries {
            if d >= n_docs {
                return Err(Error::invalid_input(format!("document {d} out of range")));
            }
            let col = terms
                .binary_search(&term)
                .map_err(|_| Error::invalid_input(format!("term {term} not in term list")))?;
            if n > 0 {
                rows[d].push((col as u32, n));
            }
        }
        let n_terms = terms.len();
        let m = Self::from_rows(rows, terms);
        if let Some(j) = (0..n_terms).find(|&j| m.vocab.df[j] == 0) {
            return Err(Error::invalid_input(format!(
                "term {} has no occurrences",
                m.vocab.terms[j]
            )));
        }
        Ok(m)
    }

    fn from_rows(rows: Vec<Vec<(u32, u32)>>, terms: Vec<u32>) -> Self {
        let n_docs = rows.len();
        let n_terms = terms.len();
        let mut row_ptr = Vec::with_capacity(n_docs + 1);
        let mut cols = Vec::new();
        let mut counts = Vec::new();
        let mut df = vec![0u32; n_terms];
        let mut cf = vec![0u64; n_terms];
        row_ptr.push(0);
        for mut row in rows {
            row.sort_unstable_by_key(|&(c, _)| c);
            let mut last: Option<u32> = None;
            for (c, n) in row {
                if last == Some(c) {
                    *counts.last_mut().expect("entry exists") += n;
                } else {
                    cols.push(c);
                    counts.push(n);
                    df[c as usize] += 1;
                    last = Some(c);
                }
                cf[c as usize] += u64::from(n);
            }
            row_ptr.push(cols.len());
        }
        DocumentTermMatrix {
            row_ptr,
            cols,
            counts,
            vocab: Vocabulary {
                terms,
                df,
                cf,
                n_docs,
            },
        }
    }

    /// Keeps only the given original term ids. Every id must be part of
    /// the current vocabulary.
    pub fn restrict(&self, keep: &[u32]) -> Result<Self> {
        let mut mask = vec![false; self.n_terms()];
        for &t in keep {
            let col = self.vocab.column_of(t).ok_or_else(|| {
                Error::invalid_parameter(format!("term {t} is not in the vocabulary"))
            })?;
            mask[col] = true;
        }
        self.restrict_columns(&mask)
    }

    /// Keeps the columns whose mask entry is set.
    pub fn restrict_columns(&self, mask: &[bool]) -> Result<Self> {
        assert_eq!(mask.len(), self.n_terms(), "mask length must match the vocabulary");
        let mut remap = vec![u32::MAX; self.n_terms()];
        let mut terms = Vec::new();
        for (j, _) in mask.iter().enumerate().filter(|(_, &k)| k) {
            remap[j] = terms.len() as u32;
            terms.push(self.vocab.terms[j]);
        }
        if terms.is_empty() {
            return Err(Error::EmptyVocabulary(
                "no terms left after restriction".to_string(),
            ));
        }
        let rows = (0..self.n_docs())
            .map(|d| {
                self.row(d)
                    .filter(|&(c, _)| mask[c])
                    .map(|(c, n)| (remap[c], n))
                    .collect()
            })
            .collect();
        Ok(Self::from_rows(rows, terms))
    }
}

/// Counts every observed term of every document.
///
/// The vocabulary is exactly the set of term ids that occur at least once.
pub fn build_dtm<D: AsRef<[u32]>>(docs: &[D]) -> Result<DocumentTermMatrix> {
    if docs.is_empty() {
        return Err(Error::invalid_input("corpus has no documents"));
    }
    let max_id = docs
        .iter()
        .flat_map(|d| d.as_ref().iter().copied())
        .max();
    let mut column = vec![u32::MAX; max_id.map_or(0, |m| m as usize + 1)];
    for &w in docs.iter().flat_map(|d| d.as_ref()) {
        column[w as usize] = 0;
    }
    let mut terms = Vec::new();
    for (id, slot) in column.iter_mut().enumerate() {
        if *slot == 0 {
            *slot = terms.len() as u32;
            terms.push(id as u32);
        }
    }

    let rows = docs
        .iter()
        .map(|doc| {
            let mut cols: Vec<u32> = doc.as_ref().iter().map(|&w| column[w as usize]).collect();
            cols.sort_unstable();
            let mut row: Vec<(u32, u32)> = Vec::new();
            for c in cols {
                match row.last_mut() {
                    Some((last, n)) if *last == c => *n += 1,
                    _ => row.push((c, 1)),
                }
            }
            row
        })
        .collect();
    Ok(DocumentTermMatrix::from_rows(rows, terms))
}
