//! MQM error annotations, per-category oracle metrics and the alignment of
//! meta-evaluation scores with category importance, weight and count.
//!
//! Scores are negated penalty totals: an unannotated translation scores 0
//! and every error lowers the score by its weight. Weights within a
//! (cell, category) are summed in ascending order and categories in name
//! order, so every matrix here is independent of record order and the
//! category oracles add up to the total matrix exactly.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{PairedData, ScoreMatrix};
use crate::meta::Statistic;
use crate::scalar::{compensated_sum, Scalar};
use crate::stats::spearman;

pub const MQM_HEADER: &str = "segment_id\tsystem_id\tcategory\tweight";

/// One error annotation; `weight` is the penalty magnitude.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MqmRecord<T> {
    pub segment_id: String,
    pub system_id: String,
    pub category: String,
    pub weight: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryStats<T> {
    pub category: String,
    pub count: usize,
    pub avg_weight: T,
    /// Sum of weights.
    pub importance: T,
}

pub fn load_mqm<T: Scalar>(path: impl AsRef<Path>) -> Result<Vec<MqmRecord<T>>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_mqm_tsv(&text)
}

/// Parses MQM TSV. A file with no lines at all is an empty record list.
pub fn parse_mqm_tsv<T: Scalar>(text: &str) -> Result<Vec<MqmRecord<T>>> {
    let mut records = Vec::new();
    let mut saw_header = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !saw_header {
            if line != MQM_HEADER {
                return Err(Error::parse(
                    line_no,
                    format!("expected header {MQM_HEADER:?}, found {line:?}"),
                ));
            }
            saw_header = true;
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(Error::parse(
                line_no,
                format!("expected 4 tab-separated columns, found {}", cols.len()),
            ));
        }
        if cols[2].is_empty() {
            return Err(Error::parse(line_no, "empty category"));
        }
        let weight: f64 = cols[3]
            .trim()
            .parse()
            .ok()
            .filter(|w: &f64| w.is_finite())
            .ok_or_else(|| Error::parse(line_no, format!("invalid weight {:?}", cols[3])))?;
        if weight < 0.0 {
            return Err(Error::NegativeWeight { line: line_no, weight });
        }
        records.push(MqmRecord {
            segment_id: cols[0].to_owned(),
            system_id: cols[1].to_owned(),
            category: cols[2].to_owned(),
            weight: T::lit(weight),
        });
    }
    Ok(records)
}

/// A fully present all-zero template over the systems and segments that
/// appear in `records`, in first-appearance order.
pub fn axes_from_records<T: Scalar>(records: &[MqmRecord<T>]) -> Result<ScoreMatrix<T>> {
    if records.is_empty() {
        return Err(Error::NoRecords);
    }
    let mut systems: Vec<String> = Vec::new();
    let mut segments: Vec<String> = Vec::new();
    for r in records {
        if !systems.contains(&r.system_id) {
            systems.push(r.system_id.clone());
        }
        if !segments.contains(&r.segment_id) {
            segments.push(r.segment_id.clone());
        }
    }
    let n = systems.len() * segments.len();
    ScoreMatrix::new(systems, segments, vec![Some(T::zero()); n])
}

type CellIndex = (usize, usize);

/// Per cell, per category (name order): sum of weights.
fn cell_category_sums<'r, T: Scalar>(
    records: &'r [MqmRecord<T>],
    axes: &ScoreMatrix<T>,
    only: Option<&str>,
) -> Result<HashMap<CellIndex, BTreeMap<&'r str, T>>> {
    let sys_ix: HashMap<&str, usize> = axes
        .systems()
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let seg_ix: HashMap<&str, usize> = axes
        .segments()
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let mut weights: HashMap<CellIndex, BTreeMap<&str, Vec<T>>> = HashMap::new();
    for r in records {
        let (Some(&s), Some(&m)) = (sys_ix.get(r.system_id.as_str()), seg_ix.get(r.segment_id.as_str())) else {
            return Err(Error::UnknownCell {
                segment: r.segment_id.clone(),
                system: r.system_id.clone(),
            });
        };
        if only.is_some_and(|c| c != r.category) {
            continue;
        }
        weights
            .entry((s, m))
            .or_default()
            .entry(r.category.as_str())
            .or_default()
            .push(r.weight);
    }
    Ok(weights
        .into_iter()
        .map(|(cell, cats)| {
            let sums = cats
                .into_iter()
                .map(|(c, mut w)| {
                    w.sort_by(|a, b| a.partial_cmp(b).expect("finite weights"));
                    (c, compensated_sum(w))
                })
                .collect();
            (cell, sums)
        })
        .collect())
}

fn negated_totals<T: Scalar>(
    axes: &ScoreMatrix<T>,
    sums: &HashMap<CellIndex, BTreeMap<&str, T>>,
) -> Result<ScoreMatrix<T>> {
    let m = axes.num_segments();
    let values = (0..axes.num_systems() * m)
        .map(|i| {
            let cell = (i / m, i % m);
            match sums.get(&cell) {
                Some(cats) => Some(cats.values().fold(T::zero(), |acc, &w| acc + (-w))),
                None => axes.values()[i].map(|_| T::zero()),
            }
        })
        .collect();
    axes.with_values(values)
}

/// Human score matrix: each cell is minus the sum of its records' weights.
/// Cells without records score 0; template cells that are missing and have
/// no records stay missing.
pub fn total_human_scores<T: Scalar>(records: &[MqmRecord<T>], axes: &ScoreMatrix<T>) -> Result<ScoreMatrix<T>> {
    negated_totals(axes, &cell_category_sums(records, axes, None)?)
}

/// Oracle metric that sees only the errors of `category`.
pub fn oracle_metric<T: Scalar>(
    records: &[MqmRecord<T>],
    category: &str,
    axes: &ScoreMatrix<T>,
) -> Result<ScoreMatrix<T>> {
    if !records.iter().any(|r| r.category == category) {
        log::warn!("category {category:?} has no records; oracle is all zero");
    }
    negated_totals(axes, &cell_category_sums(records, axes, Some(category))?)
}

/// One row per category, sorted by name.
pub fn category_stats<T: Scalar>(records: &[MqmRecord<T>]) -> Vec<CategoryStats<T>> {
    let mut by_category: BTreeMap<&str, Vec<T>> = BTreeMap::new();
    for r in records {
        by_category.entry(r.category.as_str()).or_default().push(r.weight);
    }
    by_category
        .into_iter()
        .map(|(category, mut w)| {
            w.sort_by(|a, b| a.partial_cmp(b).expect("finite weights"));
            let count = w.len();
            let importance = compensated_sum(w);
            CategoryStats {
                category: category.to_owned(),
                count,
                avg_weight: importance / T::from_count(count),
                importance,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentRow<T> {
    #[serde(flatten)]
    pub stats: CategoryStats<T>,
    /// Oracle score per statistic, in report statistic order.
    pub scores: Vec<T>,
}

/// Spearman correlations of one statistic's oracle scores with the
/// category columns; `None` when undefined.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpearmanRow<T> {
    pub statistic: Statistic,
    pub vs_importance: Option<T>,
    pub vs_avg_weight: Option<T>,
    pub vs_count: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentReport<T> {
    pub statistics: Vec<Statistic>,
    pub rows: Vec<AlignmentRow<T>>,
    pub spearman: Vec<SpearmanRow<T>>,
}

pub const MIN_CATEGORIES: usize = 3;

/// Scores every category oracle against the total human scores and
/// correlates the scores with importance, average weight and count.
pub fn alignment_report<T: Scalar>(
    records: &[MqmRecord<T>],
    axes: &ScoreMatrix<T>,
    statistics: &[Statistic],
) -> Result<AlignmentReport<T>> {
    let categories = category_stats(records);
    if categories.len() < MIN_CATEGORIES {
        return Err(Error::TooFewCategories {
            needed: MIN_CATEGORIES,
            found: categories.len(),
        });
    }
    let human = total_human_scores(records, axes)?;
    let rows = categories
        .into_par_iter()
        .map(|stats| {
            let oracle = oracle_metric(records, &stats.category, axes)?;
            let d = PairedData::new(oracle, human.clone())?;
            let scores = statistics
                .iter()
                .map(|s| s.score(&d).map(|m| m.value))
                .collect::<Result<Vec<T>>>()?;
            Ok(AlignmentRow { stats, scores })
        })
        .collect::<Result<Vec<_>>>()?;

    let importance: Vec<T> = rows.iter().map(|r| r.stats.importance).collect();
    let avg_weight: Vec<T> = rows.iter().map(|r| r.stats.avg_weight).collect();
    let count: Vec<T> = rows.iter().map(|r| T::from_count(r.stats.count)).collect();
    let spearman = statistics
        .iter()
        .enumerate()
        .map(|(i, &statistic)| {
            let scores: Vec<T> = rows.iter().map(|r| r.scores[i]).collect();
            Ok(SpearmanRow {
                statistic,
                vs_importance: spearman(&scores, &importance)?.value,
                vs_avg_weight: spearman(&scores, &avg_weight)?.value,
                vs_count: spearman(&scores, &count)?.value,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(AlignmentReport {
        statistics: statistics.to_vec(),
        rows,
        spearman,
    })
}

fn fmt3<T: Scalar>(v: Option<T>) -> String {
    match v {
        Some(v) => format!("{:.3}", v.as_f64()),
        None => "NA".to_owned(),
    }
}

/// Category table followed by a blank line and the Spearman block.
pub fn report_to_tsv<T: Scalar>(report: &AlignmentReport<T>) -> String {
    let mut out = String::from("category\timportance\tcount\tavg_weight");
    for s in &report.statistics {
        write!(out, "\t{s}").unwrap();
    }
    out.push('\n');
    for row in &report.rows {
        let c = &row.stats;
        write!(
            out,
            "{}\t{}\t{}\t{}",
            c.category,
            fmt3(Some(c.importance)),
            c.count,
            fmt3(Some(c.avg_weight))
        )
        .unwrap();
        for &v in &row.scores {
            write!(out, "\t{}", fmt3(Some(v))).unwrap();
        }
        out.push('\n');
    }
    out.push_str("\nstatistic\tspearman_importance\tspearman_avg_weight\tspearman_count\n");
    for s in &report.spearman {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            s.statistic,
            fmt3(s.vs_importance),
            fmt3(s.vs_avg_weight),
            fmt3(s.vs_count)
        )
        .unwrap();
    }
    out
}
