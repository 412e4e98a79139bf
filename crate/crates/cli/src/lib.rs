//! Command implementations behind the `segeval` binary.
//!
//! Each command returns the bytes it would write, so the binary and the
//! tests share one code path.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use segeval::oracle::{axes_from_records, report_to_tsv};
use segeval::{
    alignment_report, curves_to_csv, load_mqm, load_scores, pair, scores_to_tsv, sweep, synthetic_mqm, Detail, Dropped,
    NoiseKind, ScoreMatrix64, ScoresFormat, Statistic,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_DEGENERATE: i32 = 2;

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_REPLICATES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Tsv,
    Json,
}

/// Exit code for an error: 2 when a statistic was undefined on the data, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    let degenerate = err
        .chain()
        .filter_map(|e| e.downcast_ref::<segeval::Error>())
        .any(segeval::Error::is_degenerate);
    if degenerate {
        EXIT_DEGENERATE
    } else {
        EXIT_INPUT
    }
}

/// Parses `pdp,acceq,global,segwise`; duplicates are an error.
pub fn parse_stats(s: &str) -> Result<Vec<Statistic>> {
    let mut out: Vec<Statistic> = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let stat: Statistic = part.parse()?;
        if out.contains(&stat) {
            bail!("statistic {stat} listed twice");
        }
        out.push(stat);
    }
    if out.is_empty() {
        bail!("no statistics selected");
    }
    Ok(out)
}

pub fn parse_levels(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            let v: f64 = p.trim().parse().with_context(|| format!("invalid level {p:?}"))?;
            if !v.is_finite() {
                bail!("invalid level {p:?}");
            }
            Ok(v)
        })
        .collect()
}

/// `name=path`
pub fn parse_metric_arg(s: &str) -> Result<(String, PathBuf)> {
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok((name.to_owned(), PathBuf::from(path))),
        _ => bail!("expected --metric name=path, got {s:?}"),
    }
}

fn load(path: &Path) -> Result<ScoreMatrix64> {
    load_scores(path, ScoresFormat::Tsv).with_context(|| format!("reading {}", path.display()))
}

/// Standard competition ranking (1224) of `values`, higher is better.
pub fn competition_ranks(values: &[f64]) -> Vec<usize> {
    values
        .iter()
        .map(|v| 1 + values.iter().filter(|o| *o > v).count())
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct RankedScore {
    pub value: f64,
    pub rank: usize,
    pub detail: Detail<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricRow {
    pub metric: String,
    pub scores: Vec<RankedScore>,
    pub dropped: Dropped,
}

#[derive(Debug, Clone, Serialize)]
pub struct RankingTable {
    pub statistics: Vec<Statistic>,
    pub rows: Vec<MetricRow>,
}

impl RankingTable {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("metric");
        for s in &self.statistics {
            write!(out, "\t{s}\t{s}_rank").unwrap();
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.metric);
            for sc in &row.scores {
                write!(out, "\t{:.3}\t{}", sc.value, sc.rank).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Scores every metric against the human matrix and ranks them per statistic.
pub fn evaluate(
    human: &ScoreMatrix64,
    metrics: &[(String, ScoreMatrix64)],
    statistics: &[Statistic],
) -> Result<RankingTable> {
    if metrics.is_empty() {
        bail!("no metrics given");
    }
    let scored = metrics
        .par_iter()
        .map(|(name, x)| {
            let d = pair(x, human).with_context(|| format!("pairing metric {name}"))?;
            let scores = statistics
                .iter()
                .map(|s| s.score(&d).with_context(|| format!("metric {name}")))
                .collect::<Result<Vec<_>>>()?;
            Ok((name.clone(), scores, d.dropped()))
        })
        .collect::<Result<Vec<_>>>()?;

    let ranks: Vec<Vec<usize>> = (0..statistics.len())
        .map(|i| competition_ranks(&scored.iter().map(|(_, s, _)| s[i].value).collect::<Vec<_>>()))
        .collect();

    let mut rows: Vec<MetricRow> = scored
        .into_iter()
        .enumerate()
        .map(|(m, (metric, scores, dropped))| MetricRow {
            metric,
            scores: scores
                .into_iter()
                .enumerate()
                .map(|(i, s)| RankedScore {
                    value: s.value,
                    rank: ranks[i][m],
                    detail: s.detail,
                })
                .collect(),
            dropped,
        })
        .collect();

    let sort_by = statistics.iter().position(|&s| s == Statistic::Pdp).unwrap_or(0);
    rows.sort_by_key(|r| r.scores[sort_by].rank);
    Ok(RankingTable {
        statistics: statistics.to_vec(),
        rows,
    })
}

pub fn cmd_evaluate(
    human: &Path,
    metrics: &[(String, PathBuf)],
    statistics: &[Statistic],
    format: OutputFormat,
) -> Result<Vec<u8>> {
    let y = load(human)?;
    let xs = metrics
        .iter()
        .map(|(name, path)| Ok((name.clone(), load(path)?)))
        .collect::<Result<Vec<_>>>()?;
    let table = evaluate(&y, &xs, statistics)?;
    Ok(match format {
        OutputFormat::Tsv => table.to_tsv().into_bytes(),
        OutputFormat::Json => json_bytes(&table)?,
    })
}

pub fn cmd_noise(
    human: &Path,
    kind: NoiseKind,
    levels: &[f64],
    statistics: &[Statistic],
    replicates: usize,
    seed: u64,
) -> Result<Vec<u8>> {
    let y = load(human)?;
    let curves = sweep(&y, statistics, kind, levels, replicates, seed)?;
    Ok(curves_to_csv(&curves).into_bytes())
}

pub fn cmd_oracle(
    mqm: &Path,
    template: Option<&Path>,
    statistics: &[Statistic],
    format: OutputFormat,
) -> Result<Vec<u8>> {
    let records = load_mqm::<f64>(mqm).with_context(|| format!("reading {}", mqm.display()))?;
    if records.is_empty() {
        return Err(segeval::Error::NoRecords).with_context(|| format!("reading {}", mqm.display()));
    }
    let axes = match template {
        Some(path) => load(path)?,
        None => axes_from_records(&records)?,
    };
    let report = alignment_report(&records, &axes, statistics)?;
    Ok(match format {
        OutputFormat::Tsv => report_to_tsv(&report).into_bytes(),
        OutputFormat::Json => json_bytes(&report)?,
    })
}

pub fn cmd_synth(systems: usize, segments: usize, seed: u64) -> Result<Vec<u8>> {
    let y: ScoreMatrix64 = synthetic_mqm(systems, segments, seed)?;
    let mut out = format!("# synthetic MQM-like scores: systems={systems} segments={segments} seed={seed}\n");
    out.push_str(&scores_to_tsv(&y));
    Ok(out.into_bytes())
}

fn json_bytes<S: Serialize>(value: &S) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}
