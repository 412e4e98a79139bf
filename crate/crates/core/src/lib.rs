//! Segment-level meta-evaluation of machine translation metrics.
//!
//! A metric's scores `X` and human scores `Y` are system x segment matrices
//! ([`ScoreMatrix`]). This crate compares them with four statistics
//! ([`Statistic`]): Global Pearson, Segment-wise Pearson, tie-calibrated
//! `acc_eq` and Pairwise Difference Pearson (PDP). PDP is Pearson over
//! intra-segment pairwise differences: it pools every segment like Global
//! Pearson but never compares translations of different source segments.
//!
//! Around the statistics sit a noise harness that measures how much each
//! statistic degrades under perturbations of `Y` ([`noise`]), a synthetic
//! MQM-like score generator ([`synth`]) and an MQM error-category oracle
//! analysis ([`oracle`]).
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix it to one of those.
//!
//! ```
//! use segeval::{pair, pdp, ScoreMatrix64};
//!
//! let human = ScoreMatrix64::from_rows(&["a", "b", "c"], &["s1", "s2"], &[
//!     vec![0.0, -5.0],
//!     vec![-1.0, -25.0],
//!     vec![-6.0, 0.0],
//! ])?;
//! // constant within every segment: no intra-segment signal
//! let sentinel = human.map(|_| 0.5);
//! let d = pair(&sentinel, &human)?;
//! assert_eq!(pdp(&d).value, 0.0);
//! # Ok::<(), segeval::Error>(())
//! ```

pub mod error;
pub mod matrix;
pub mod meta;
pub mod noise;
pub mod oracle;
pub mod scalar;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use matrix::{
    load_scores, pair, parse_scores_tsv, scores_to_tsv, segment_slices, write_scores, Dropped, PairedData, ScoreMatrix,
    ScoresFormat, SegmentSlice,
};
pub use meta::{
    acc_eq, build_pairwise_diffs, calibrate_acc_eq, global_pearson, pdp, segmentwise_pearson, Detail, MetaScore,
    PairwiseDiff, PairwiseDiffSet, Statistic,
};
pub use noise::{
    curves_to_csv, derive_seed, inject_noise, sample_random_baseline, sdp, sweep, NoiseKind, NoiseSpec, SdpCurve,
};
pub use oracle::{
    alignment_report, category_stats, load_mqm, oracle_metric, total_human_scores, AlignmentReport, CategoryStats,
    MqmRecord,
};
pub use scalar::Scalar;
pub use stats::{pairwise_differences, pearson, spearman, CorrelationResult};
pub use synth::synthetic_mqm;

pub type ScoreMatrix64 = ScoreMatrix<f64>;
pub type ScoreMatrix32 = ScoreMatrix<f32>;
pub type PairedData64 = PairedData<f64>;
pub type PairedData32 = PairedData<f32>;
pub type MetaScore64 = MetaScore<f64>;
pub type MetaScore32 = MetaScore<f32>;
pub type NoiseSpec64 = NoiseSpec<f64>;
pub type SdpCurve64 = SdpCurve<f64>;
pub type MqmRecord64 = MqmRecord<f64>;
pub type CategoryStats64 = CategoryStats<f64>;
pub type AlignmentReport64 = AlignmentReport<f64>;
