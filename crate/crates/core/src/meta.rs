//! Segment-level meta-evaluation statistics over a [`PairedData`].
//!
//! * Global Pearson: Pearson over every jointly present cell.
//! * Segment-wise Pearson: unweighted mean of per-segment Pearson values.
//! * `acc_eq`: pairwise ranking accuracy that credits correctly predicted
//!   ties, with a tie threshold on metric differences.
//! * PDP: Pearson over intra-segment ordered pairwise differences.
//!
//! Whenever a correlation is undefined (constant predictions) the reported
//! value is 0 and the [`Detail`] records it.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::PairedData;
use crate::scalar::{CompensatedSum, Scalar};
use crate::stats::pearson;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    #[serde(rename = "global")]
    GlobalPearson,
    #[serde(rename = "segwise")]
    SegmentwisePearson,
    #[serde(rename = "acceq")]
    AccEq,
    Pdp,
}

impl Statistic {
    pub const ALL: [Statistic; 4] = [
        Statistic::GlobalPearson,
        Statistic::SegmentwisePearson,
        Statistic::AccEq,
        Statistic::Pdp,
    ];

    /// Short name used on the command line and in reports.
    pub fn key(self) -> &'static str {
        match self {
            Statistic::GlobalPearson => "global",
            Statistic::SegmentwisePearson => "segwise",
            Statistic::AccEq => "acceq",
            Statistic::Pdp => "pdp",
        }
    }

    /// Scores `d` with this statistic; `acc_eq` is tie-calibrated.
    pub fn score<T: Scalar>(self, d: &PairedData<T>) -> Result<MetaScore<T>> {
        match self {
            Statistic::GlobalPearson => global_pearson(d),
            Statistic::SegmentwisePearson => segmentwise_pearson(d),
            Statistic::AccEq => calibrate_acc_eq(d),
            Statistic::Pdp => Ok(pdp(d)),
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "global" | "global_pearson" => Ok(Statistic::GlobalPearson),
            "segwise" | "segmentwise" | "segwise_pearson" => Ok(Statistic::SegmentwisePearson),
            "acceq" | "acc_eq" => Ok(Statistic::AccEq),
            "pdp" => Ok(Statistic::Pdp),
            other => Err(Error::InvalidArgument(format!("unknown statistic {other:?}"))),
        }
    }
}

/// Statistic-specific bookkeeping attached to a [`MetaScore`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Detail<T> {
    Global {
        cells: usize,
        undefined: bool,
    },
    Segmentwise {
        used: usize,
        skipped: usize,
        /// Used segments whose Pearson was undefined and counted as 0.
        undefined: usize,
    },
    AccEq {
        epsilon: T,
        correct: usize,
        pairs: usize,
    },
    Pdp {
        entries: usize,
        constant_prediction: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetaScore<T> {
    pub statistic: Statistic,
    pub value: T,
    pub detail: Detail<T>,
}

pub fn global_pearson<T: Scalar>(d: &PairedData<T>) -> Result<MetaScore<T>> {
    let (xs, ys) = d.joint_cells();
    if xs.len() < 2 {
        return Err(Error::Degenerate {
            statistic: Statistic::GlobalPearson,
            reason: "fewer than 2 jointly present cells",
        });
    }
    let r = pearson(&xs, &ys)?;
    Ok(MetaScore {
        statistic: Statistic::GlobalPearson,
        value: r.or_zero(),
        detail: Detail::Global {
            cells: xs.len(),
            undefined: !r.is_defined(),
        },
    })
}

pub fn segmentwise_pearson<T: Scalar>(d: &PairedData<T>) -> Result<MetaScore<T>> {
    let mut sum = CompensatedSum::new();
    let (mut used, mut skipped, mut undefined) = (0, 0, 0);
    for m in 0..d.num_segments() {
        let (xs, ys) = d.segment_scores(m);
        if xs.len() < 2 {
            skipped += 1;
            continue;
        }
        used += 1;
        match pearson(&xs, &ys)?.value {
            Some(r) => sum.add(r),
            None => undefined += 1,
        }
    }
    if used == 0 {
        return Err(Error::Degenerate {
            statistic: Statistic::SegmentwisePearson,
            reason: "no segment has 2 jointly present systems",
        });
    }
    Ok(MetaScore {
        statistic: Statistic::SegmentwisePearson,
        value: sum.value() / T::from_count(used),
        detail: Detail::Segmentwise {
            used,
            skipped,
            undefined,
        },
    })
}

/// One intra-segment ordered difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseDiff<'a, T> {
    pub segment_id: &'a str,
    pub systems: (&'a str, &'a str),
    pub dx: T,
    pub dy: T,
}

/// Intra-segment ordered pairwise differences of metric and human scores.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PairwiseDiffSet<'a, T> {
    pub entries: Vec<PairwiseDiff<'a, T>>,
}

impl<T: Scalar> PairwiseDiffSet<'_, T> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dx(&self) -> Vec<T> {
        self.entries.iter().map(|e| e.dx).collect()
    }

    pub fn dy(&self) -> Vec<T> {
        self.entries.iter().map(|e| e.dy).collect()
    }
}

/// Calls `f(segment, i, j, dx, dy)` for every ordered pair of distinct
/// jointly present systems, in segment order then row-major over `(i, j)`.
fn for_each_ordered_pair<T: Scalar>(d: &PairedData<T>, mut f: impl FnMut(usize, usize, usize, T, T)) {
    let mut present: Vec<(usize, T, T)> = Vec::with_capacity(d.num_systems());
    for m in 0..d.num_segments() {
        present.clear();
        present.extend((0..d.num_systems()).filter_map(|s| d.joint(s, m).map(|(x, y)| (s, x, y))));
        if present.len() < 2 {
            continue;
        }
        for &(si, xi, yi) in &present {
            for &(sj, xj, yj) in &present {
                if si != sj {
                    f(m, si, sj, xi - xj, yi - yj);
                }
            }
        }
    }
}

pub fn build_pairwise_diffs<T: Scalar>(d: &PairedData<T>) -> PairwiseDiffSet<'_, T> {
    let systems = d.human().systems();
    let segments = d.human().segments();
    let mut entries = Vec::new();
    for_each_ordered_pair(d, |m, i, j, dx, dy| {
        entries.push(PairwiseDiff {
            segment_id: segments[m].as_str(),
            systems: (systems[i].as_str(), systems[j].as_str()),
            dx,
            dy,
        })
    });
    PairwiseDiffSet { entries }
}

/// Pairwise Difference Pearson. Degenerate inputs (no pairs, or constant
/// differences on either side) score 0.
pub fn pdp<T: Scalar>(d: &PairedData<T>) -> MetaScore<T> {
    let mut dx = Vec::new();
    let mut dy = Vec::new();
    for_each_ordered_pair(d, |_, _, _, a, b| {
        dx.push(a);
        dy.push(b);
    });
    let r = pearson(&dx, &dy).expect("equal lengths");
    MetaScore {
        statistic: Statistic::Pdp,
        value: r.or_zero(),
        detail: Detail::Pdp {
            entries: dx.len(),
            constant_prediction: !r.is_defined(),
        },
    }
}

/// Unordered intra-segment pair as seen by `acc_eq`.
#[derive(Debug, Clone, Copy)]
struct TiePair<T> {
    abs_dx: T,
    human_tie: bool,
    /// Metric and human differences have the same nonzero sign.
    concordant: bool,
}

fn tie_pairs<T: Scalar>(d: &PairedData<T>) -> Vec<TiePair<T>> {
    let mut out = Vec::new();
    for_each_ordered_pair(d, |_, i, j, dx, dy| {
        if i < j {
            let human_tie = dy == T::zero();
            out.push(TiePair {
                abs_dx: dx.abs(),
                human_tie,
                concordant: !human_tie && dx != T::zero() && (dx > T::zero()) == (dy > T::zero()),
            });
        }
    });
    out
}

fn no_pairs() -> Error {
    Error::Degenerate {
        statistic: Statistic::AccEq,
        reason: "no intra-segment system pairs",
    }
}

/// Pairwise accuracy with metric ties defined by `|dx| <= epsilon` and
/// human ties by exact equality.
pub fn acc_eq<T: Scalar>(d: &PairedData<T>, epsilon: T) -> Result<MetaScore<T>> {
    if !epsilon.is_finite() || epsilon < T::zero() {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be a finite nonnegative number, got {epsilon}"
        )));
    }
    let pairs = tie_pairs(d);
    if pairs.is_empty() {
        return Err(no_pairs());
    }
    let correct = pairs
        .iter()
        .filter(|p| {
            if p.human_tie {
                p.abs_dx <= epsilon
            } else {
                p.abs_dx > epsilon && p.concordant
            }
        })
        .count();
    Ok(MetaScore {
        statistic: Statistic::AccEq,
        value: T::from_count(correct) / T::from_count(pairs.len()),
        detail: Detail::AccEq {
            epsilon,
            correct,
            pairs: pairs.len(),
        },
    })
}

/// `acc_eq` at the tie threshold that maximizes it.
///
/// The objective is a step function of epsilon that only changes at observed
/// `|dx|` values, so evaluating 0 and every distinct `|dx|` covers the whole
/// candidate set (a midpoint always ties with the breakpoint below it).
/// Ties in the objective go to the smallest epsilon.
pub fn calibrate_acc_eq<T: Scalar>(d: &PairedData<T>) -> Result<MetaScore<T>> {
    let mut pairs = tie_pairs(d);
    if pairs.is_empty() {
        return Err(no_pairs());
    }
    pairs.sort_by(|a, b| a.abs_dx.partial_cmp(&b.abs_dx).expect("finite"));
    let total_concordant = pairs.iter().filter(|p| p.concordant).count();

    // With epsilon = e: correct = ties with |dx| <= e + concordant with |dx| > e.
    let mut best_correct = 0;
    let mut best_eps = T::zero();
    let mut first = true;
    let (mut ties_in, mut conc_in) = (0usize, 0usize);
    let mut k = 0;
    let mut eps = T::zero();
    loop {
        while k < pairs.len() && pairs[k].abs_dx <= eps {
            ties_in += pairs[k].human_tie as usize;
            conc_in += pairs[k].concordant as usize;
            k += 1;
        }
        let correct = ties_in + (total_concordant - conc_in);
        if first || correct > best_correct {
            best_correct = correct;
            best_eps = eps;
            first = false;
        }
        if k == pairs.len() {
            break;
        }
        eps = pairs[k].abs_dx;
    }

    Ok(MetaScore {
        statistic: Statistic::AccEq,
        value: T::from_count(best_correct) / T::from_count(pairs.len()),
        detail: Detail::AccEq {
            epsilon: best_eps,
            correct: best_correct,
            pairs: pairs.len(),
        },
    })
}
