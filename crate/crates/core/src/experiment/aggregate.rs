//! Summaries across replications.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::CellRecord;
use crate::io::fmt_f64;
use crate::metrics::EvaluationRecord;
use crate::pruning::Criterion;

/// Mean and the 20% and 80% quantiles of one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub q20: f64,
    pub q80: f64,
}

/// Quantile of sorted data by linear interpolation between order
/// statistics: position `(n - 1) p`.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `None` for an empty sample. Values are sorted before summing, so the
/// result does not depend on their order.
pub fn summarize(values: &[f64]) -> Option<Summary> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(Summary {
        mean: v.iter().sum::<f64>() / v.len() as f64,
        q20: quantile(&v, 0.2),
        q80: quantile(&v, 0.8),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub criterion: Criterion,
    pub cutoff_index: usize,
    pub cutoff: f64,
    pub metric: &'static str,
    pub summary: Option<Summary>,
    /// Replications with a value; absent cells are not counted.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateTable {
    pub rows: Vec<AggregateRow>,
}

impl AggregateTable {
    pub const HEADER: &'static str = "criterion,cutoff,metric,mean,q20,q80,n";

    pub fn get(&self, criterion: Criterion, cutoff_index: usize, metric: &str) -> Option<&AggregateRow> {
        self.rows
            .iter()
            .find(|r| r.criterion == criterion && r.cutoff_index == cutoff_index && r.metric == metric)
    }

    /// Rows of one criterion and metric, by cut-off.
    pub fn series(&self, criterion: Criterion, metric: &str) -> Vec<&AggregateRow> {
        self.rows
            .iter()
            .filter(|r| r.criterion == criterion && r.metric == metric)
            .collect()
    }

    /// Empty sample rows leave mean, q20 and q80 blank.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::HEADER);
        out.push('\n');
        for r in &self.rows {
            let (mean, q20, q80) = match r.summary {
                Some(s) => (fmt_f64(s.mean), fmt_f64(s.q20), fmt_f64(s.q80)),
                None => Default::default(),
            };
            writeln!(
                out,
                "{},{},{},{mean},{q20},{q80},{}",
                r.criterion,
                fmt_f64(r.cutoff),
                r.metric,
                r.n
            )
            .expect("writing to a String");
        }
        out
    }
}

fn group(cells: &[CellRecord]) -> BTreeMap<(Criterion, usize), Vec<&CellRecord>> {
    let mut groups: BTreeMap<(Criterion, usize), Vec<&CellRecord>> = BTreeMap::new();
    for c in cells {
        groups.entry((c.key.criterion, c.key.cutoff_index)).or_default().push(c);
    }
    groups
}

/// Per criterion, cut-off and metric: mean, q20, q80 and count over
/// replications. Metrics are the six evaluation scores followed by
/// `vocab_size` and `removed_share`.
pub fn aggregate(cells: &[CellRecord]) -> AggregateTable {
    let mut rows = Vec::new();
    for ((criterion, cutoff_index), group) in group(cells) {
        let cutoff = group[0].cutoff;
        let evals: Vec<&EvaluationRecord> = group.iter().filter_map(|c| c.evaluation.as_ref()).collect();
        for (m, metric) in EvaluationRecord::METRICS.into_iter().enumerate() {
            let values: Vec<f64> = evals.iter().map(|e| e.values()[m].1).collect();
            rows.push(AggregateRow {
                criterion,
                cutoff_index,
                cutoff,
                metric,
                summary: summarize(&values),
                n: values.len(),
            });
        }
        let sizes: Vec<f64> = group.iter().filter_map(|c| c.vocab_size).map(|v| v as f64).collect();
        let shares: Vec<f64> = group.iter().filter_map(|c| c.removed_share).collect();
        for (metric, values) in [("vocab_size", sizes), ("removed_share", shares)] {
            rows.push(AggregateRow {
                criterion,
                cutoff_index,
                cutoff,
                metric,
                summary: summarize(&values),
                n: values.len(),
            });
        }
    }
    AggregateTable { rows }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VocabCurveRow {
    pub cutoff: f64,
    pub size: Summary,
    pub min: usize,
    pub max: usize,
    pub removed_share: Summary,
    pub n: usize,
}

/// Realized vocabulary size against the document-frequency cut-off.
#[derive(Debug, Clone, PartialEq)]
pub struct VocabCurve {
    pub rows: Vec<VocabCurveRow>,
}

impl VocabCurve {
    pub const HEADER: &'static str =
        "cutoff,mean_vocab_size,q20_vocab_size,q80_vocab_size,min_vocab_size,max_vocab_size,mean_removed_share,n";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::HEADER);
        out.push('\n');
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                fmt_f64(r.cutoff),
                fmt_f64(r.size.mean),
                fmt_f64(r.size.q20),
                fmt_f64(r.size.q80),
                r.min,
                r.max,
                fmt_f64(r.removed_share.mean),
                r.n
            )
            .expect("writing to a String");
        }
        out
    }
}

/// `None` when no document-frequency cell is present.
pub fn vocab_curve(cells: &[CellRecord]) -> Option<VocabCurve> {
    let df: Vec<CellRecord> = cells
        .iter()
        .filter(|c| c.key.criterion == Criterion::DocFreq)
        .cloned()
        .collect();
    let rows: Vec<VocabCurveRow> = group(&df)
        .into_values()
        .filter_map(|g| {
            let sizes: Vec<usize> = g.iter().filter_map(|c| c.vocab_size).collect();
            let as_f: Vec<f64> = sizes.iter().map(|&v| v as f64).collect();
            let shares: Vec<f64> = g.iter().filter_map(|c| c.removed_share).collect();
            Some(VocabCurveRow {
                cutoff: g[0].cutoff,
                size: summarize(&as_f)?,
                min: *sizes.iter().min()?,
                max: *sizes.iter().max()?,
                removed_share: summarize(&shares)?,
                n: sizes.len(),
            })
        })
        .collect();
    (!rows.is_empty()).then_some(VocabCurve { rows })
}
