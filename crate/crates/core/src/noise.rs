//! Noise injection and the score degradation proportion (SDP).
//!
//! SDP compares how far a statistic falls when the human matrix `Y` is
//! scored against a perturbed copy of itself, relative to how far it falls
//! against a random resample of `Y`:
//!
//! ```text
//! SDP = (theta(Y, Y) - theta(Y, X_noise)) / (theta(Y, Y) - theta(Y, X_rand))
//! ```
//!
//! All randomness is derived from one `u64` seed. Replicate `r` of level
//! index `l` under noise kind `k` uses `derive_seed(seed, &[k, l, r])`; the
//! random baseline uses kind code [`BASELINE_CODE`] and level index 0. Each
//! derived seed feeds a ChaCha8 generator.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{PairedData, ScoreMatrix};
use crate::meta::Statistic;
use crate::scalar::{CompensatedSum, Scalar};

/// Kind code mixed into seeds of random-baseline draws.
pub const BASELINE_CODE: u64 = 4;

/// Denominators smaller than this make SDP meaningless.
pub const MIN_DENOMINATOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    /// i.i.d. N(0, level^2) added to every present cell.
    Random,
    /// One present cell overwritten with `level`.
    Outlier,
    /// `level` added to every cell of one system.
    #[serde(rename = "system")]
    SystemBias,
    /// One N(0, level^2) draw per segment added to all of its cells.
    #[serde(rename = "segment")]
    SegmentBias,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 4] = [
        NoiseKind::Random,
        NoiseKind::Outlier,
        NoiseKind::SystemBias,
        NoiseKind::SegmentBias,
    ];

    pub fn code(self) -> u64 {
        match self {
            NoiseKind::Random => 0,
            NoiseKind::Outlier => 1,
            NoiseKind::SystemBias => 2,
            NoiseKind::SegmentBias => 3,
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            NoiseKind::Random => "random",
            NoiseKind::Outlier => "outlier",
            NoiseKind::SystemBias => "system",
            NoiseKind::SegmentBias => "segment",
        }
    }

    /// Whether `level` is a standard deviation (and so must be >= 0).
    fn level_is_scale(self) -> bool {
        matches!(self, NoiseKind::Random | NoiseKind::SegmentBias)
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "random" => Ok(NoiseKind::Random),
            "outlier" => Ok(NoiseKind::Outlier),
            "system" | "system_bias" => Ok(NoiseKind::SystemBias),
            "segment" | "segment_bias" => Ok(NoiseKind::SegmentBias),
            other => Err(Error::InvalidArgument(format!("unknown noise kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec<T> {
    pub kind: NoiseKind,
    pub level: T,
    pub seed: u64,
}

impl<T: Scalar> NoiseSpec<T> {
    pub fn new(kind: NoiseKind, level: T, seed: u64) -> Result<Self> {
        check_level(kind, level)?;
        Ok(Self { kind, level, seed })
    }
}

fn check_level<T: Scalar>(kind: NoiseKind, level: T) -> Result<()> {
    if !level.is_finite() || (kind.level_is_scale() && level < T::zero()) {
        return Err(Error::InvalidNoiseLevel {
            kind: kind.key(),
            level: level.as_f64(),
        });
    }
    Ok(())
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `h = splitmix64(seed)`, then `h = splitmix64(h ^ field)` for each field.
pub fn derive_seed(seed: u64, fields: &[u64]) -> u64 {
    fields.iter().fold(splitmix64(seed), |h, &f| splitmix64(h ^ f))
}

fn no_present_cells() -> Error {
    Error::InvalidMatrix("matrix has no present cells".into())
}

/// Returns a perturbed copy of `y`. Missing cells stay missing.
pub fn inject_noise<T>(y: &ScoreMatrix<T>, spec: &NoiseSpec<T>) -> Result<ScoreMatrix<T>>
where
    T: Scalar,
    StandardNormal: Distribution<T>,
{
    check_level(spec.kind, spec.level)?;
    if y.present_count() == 0 {
        return Err(no_present_cells());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let level = spec.level;
    let m = y.num_segments();
    let mut values = y.values().to_vec();

    match spec.kind {
        NoiseKind::Random => {
            for v in values.iter_mut().flatten() {
                let z: T = StandardNormal.sample(&mut rng);
                *v += level * z;
            }
        }
        NoiseKind::Outlier => {
            let k = rng.random_range(0..y.present_count());
            let cell = values.iter_mut().flatten().nth(k).expect("k < present count");
            *cell = level;
        }
        NoiseKind::SystemBias => {
            let candidates: Vec<usize> = (0..y.num_systems())
                .filter(|&s| (0..m).any(|j| y.get(s, j).is_some()))
                .collect();
            let s = candidates[rng.random_range(0..candidates.len())];
            for v in values[s * m..(s + 1) * m].iter_mut().flatten() {
                *v += level;
            }
        }
        NoiseKind::SegmentBias => {
            let shifts: Vec<T> = (0..m)
                .map(|_| {
                    let z: T = StandardNormal.sample(&mut rng);
                    level * z
                })
                .collect();
            for (i, v) in values.iter_mut().enumerate() {
                if let Some(v) = v {
                    *v += shifts[i % m];
                }
            }
        }
    }
    y.with_values(values)
}

/// Fills every present position with a draw (with replacement) from the
/// present values of `y`.
pub fn sample_random_baseline<T: Scalar>(y: &ScoreMatrix<T>, seed: u64) -> Result<ScoreMatrix<T>> {
    let pool: Vec<T> = y.values().iter().flatten().copied().collect();
    if pool.is_empty() {
        return Err(no_present_cells());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = y
        .values()
        .iter()
        .map(|v| v.map(|_| pool[rng.random_range(0..pool.len())]))
        .collect();
    y.with_values(values)
}

/// Statistic of `x` scored against human `y`.
fn theta<T: Scalar>(statistic: Statistic, y: &ScoreMatrix<T>, x: ScoreMatrix<T>) -> Result<T> {
    let d = PairedData::new(x, y.clone())?;
    Ok(statistic.score(&d)?.value)
}

fn thetas<T: Scalar>(statistics: &[Statistic], y: &ScoreMatrix<T>, x: &ScoreMatrix<T>) -> Result<Vec<T>> {
    statistics.iter().map(|&s| theta(s, y, x.clone())).collect()
}

fn mean<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    let mut n = 0;
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
        n += 1;
    }
    acc.value() / T::from_count(n)
}

/// Mean over replicates of `(identity - noisy[r]) / (identity - mean(baseline))`.
pub fn degradation_proportion<T: Scalar>(statistic: Statistic, identity: T, noisy: &[T], baseline: &[T]) -> Result<T> {
    if noisy.is_empty() || baseline.is_empty() {
        return Err(Error::InvalidArgument("need at least one replicate".into()));
    }
    let denominator = identity - mean(baseline.iter().copied());
    if denominator.is_nan() || denominator.abs() < T::lit(MIN_DENOMINATOR) {
        return Err(Error::DegenerateDenominator {
            statistic,
            denominator: denominator.as_f64(),
        });
    }
    Ok(mean(noisy.iter().map(|&t| (identity - t) / denominator)))
}

/// Statistic values of `y` against itself and the mean-able random baselines.
struct Reference<T> {
    identity: Vec<T>,
    /// `baseline[r][s]`
    baseline: Vec<Vec<T>>,
}

fn reference<T: Scalar>(
    y: &ScoreMatrix<T>,
    statistics: &[Statistic],
    replicates: usize,
    seed: u64,
) -> Result<Reference<T>> {
    let identity = thetas(statistics, y, y)?;
    let baseline = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let x = sample_random_baseline(y, derive_seed(seed, &[BASELINE_CODE, 0, r]))?;
            thetas(statistics, y, &x)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Reference { identity, baseline })
}

/// `noisy[r][s]` for one level.
fn noisy_thetas<T>(
    y: &ScoreMatrix<T>,
    statistics: &[Statistic],
    kind: NoiseKind,
    level: T,
    level_index: u64,
    replicates: usize,
    seed: u64,
) -> Result<Vec<Vec<T>>>
where
    T: Scalar,
    StandardNormal: Distribution<T>,
{
    (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let spec = NoiseSpec {
                kind,
                level,
                seed: derive_seed(seed, &[kind.code(), level_index, r]),
            };
            thetas(statistics, y, &inject_noise(y, &spec)?)
        })
        .collect()
}

fn column<T: Copy>(rows: &[Vec<T>], s: usize) -> Vec<T> {
    rows.iter().map(|row| row[s]).collect()
}

/// SDP of one statistic at one noise setting; `spec.seed` is the base seed
/// the replicate seeds are derived from.
pub fn sdp<T>(y: &ScoreMatrix<T>, statistic: Statistic, spec: &NoiseSpec<T>, replicates: usize) -> Result<T>
where
    T: Scalar,
    StandardNormal: Distribution<T>,
{
    if replicates == 0 {
        return Err(Error::InvalidArgument("replicates must be at least 1".into()));
    }
    check_level(spec.kind, spec.level)?;
    let stats = [statistic];
    let reference = reference(y, &stats, replicates, spec.seed)?;
    let noisy = noisy_thetas(y, &stats, spec.kind, spec.level, 0, replicates, spec.seed)?;
    degradation_proportion(
        statistic,
        reference.identity[0],
        &column(&noisy, 0),
        &column(&reference.baseline, 0),
    )
}

/// SDP as a function of noise level for one statistic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SdpCurve<T> {
    pub statistic: Statistic,
    pub kind: NoiseKind,
    /// `(level, sdp)` sorted by level.
    pub points: Vec<(T, T)>,
    pub replicates: usize,
    pub seed: u64,
}

/// One curve per statistic over `levels`, which must be strictly increasing.
pub fn sweep<T>(
    y: &ScoreMatrix<T>,
    statistics: &[Statistic],
    kind: NoiseKind,
    levels: &[T],
    replicates: usize,
    seed: u64,
) -> Result<Vec<SdpCurve<T>>>
where
    T: Scalar,
    StandardNormal: Distribution<T>,
{
    if levels.is_empty() {
        return Err(Error::InvalidLevels("no levels given".into()));
    }
    if levels
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
    {
        return Err(Error::InvalidLevels("levels must be strictly increasing".into()));
    }
    for &level in levels {
        check_level(kind, level)?;
    }
    if replicates == 0 {
        return Err(Error::InvalidArgument("replicates must be at least 1".into()));
    }
    if statistics.is_empty() {
        return Err(Error::InvalidArgument("no statistics selected".into()));
    }

    let reference = reference(y, statistics, replicates, seed)?;
    let mut curves: Vec<SdpCurve<T>> = statistics
        .iter()
        .map(|&statistic| SdpCurve {
            statistic,
            kind,
            points: Vec::with_capacity(levels.len()),
            replicates,
            seed,
        })
        .collect();

    for (li, &level) in levels.iter().enumerate() {
        let noisy = noisy_thetas(y, statistics, kind, level, li as u64, replicates, seed)?;
        for (s, curve) in curves.iter_mut().enumerate() {
            let value = degradation_proportion(
                curve.statistic,
                reference.identity[s],
                &column(&noisy, s),
                &column(&reference.baseline, s),
            )?;
            curve.points.push((level, value));
        }
    }
    Ok(curves)
}

/// Header of the curve CSV.
pub const CURVE_CSV_HEADER: &str = "statistic,kind,level,sdp,replicates,seed";

/// Renders curves as CSV, one row per (statistic, level).
pub fn curves_to_csv<T: Scalar>(curves: &[SdpCurve<T>]) -> String {
    let mut out = String::from(CURVE_CSV_HEADER);
    out.push('\n');
    for c in curves {
        for (level, sdp) in &c.points {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                c.statistic, c.kind, level, sdp, c.replicates, c.seed
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meta::pdp;
    use approx::assert_abs_diff_eq;

    fn demo() -> ScoreMatrix<f64> {
        ScoreMatrix::from_rows(
            &["a", "b", "c", "d"],
            &["s1", "s2", "s3"],
            &[
                vec![0., -5., -1.],
                vec![-1., -6., -25.],
                vec![-3., 0., -2.],
                vec![-7., -1., 0.],
            ],
        )
        .unwrap()
    }

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the reference SplitMix64 generator seeded with 0
        // are splitmix64(0), splitmix64(0x9e3779b97f4a7c15), ...
        assert_eq!(splitmix64(0), 0xe220_a839_7b1d_cdaf);
        assert_eq!(splitmix64(0x9e37_79b9_7f4a_7c15), 0x6e78_9e6a_a1b9_65f4);
        assert_ne!(derive_seed(1, &[0, 0, 0]), derive_seed(1, &[0, 0, 1]));
        assert_eq!(derive_seed(7, &[]), splitmix64(7));
    }

    #[test]
    fn kind_names_round_trip() {
        for k in NoiseKind::ALL {
            assert_eq!(k.key().parse::<NoiseKind>().unwrap(), k);
        }
        assert!("gaussian".parse::<NoiseKind>().is_err());
    }

    #[test]
    fn level_validation() {
        assert!(NoiseSpec::new(NoiseKind::Random, -1.0, 0).is_err());
        assert!(NoiseSpec::new(NoiseKind::SegmentBias, -0.5, 0).is_err());
        assert!(NoiseSpec::new(NoiseKind::Outlier, -100.0, 0).is_ok());
        assert!(NoiseSpec::new(NoiseKind::SystemBias, -3.0, 0).is_ok());
        assert!(NoiseSpec::new(NoiseKind::Outlier, f64::NAN, 0).is_err());
    }

    #[test]
    fn zero_level_leaves_matrix_unchanged() {
        let y = demo();
        for kind in [NoiseKind::Random, NoiseKind::SystemBias, NoiseKind::SegmentBias] {
            let x = inject_noise(&y, &NoiseSpec::new(kind, 0.0, 11).unwrap()).unwrap();
            assert_eq!(x, y, "{kind}");
        }
    }

    #[test]
    fn outlier_overwrites_exactly_one_cell() {
        let y = demo();
        let x = inject_noise(&y, &NoiseSpec::new(NoiseKind::Outlier, -1000.0, 3).unwrap()).unwrap();
        let changed: Vec<_> = x.values().iter().zip(y.values()).filter(|(a, b)| a != b).collect();
        assert_eq!(changed.len(), 1);
        assert_eq!(*changed[0].0, Some(-1000.0));
    }

    #[test]
    fn system_bias_shifts_one_row() {
        let y = demo();
        let x = inject_noise(&y, &NoiseSpec::new(NoiseKind::SystemBias, 2.5, 5).unwrap()).unwrap();
        let shifted: Vec<usize> = (0..4).filter(|&s| (0..3).any(|m| x.get(s, m) != y.get(s, m))).collect();
        assert_eq!(shifted.len(), 1);
        let s = shifted[0];
        for m in 0..3 {
            assert_eq!(x.get(s, m).unwrap(), y.get(s, m).unwrap() + 2.5);
        }
    }

    #[test]
    fn segment_bias_keeps_within_segment_structure() {
        let y = demo();
        let x = inject_noise(&y, &NoiseSpec::new(NoiseKind::SegmentBias, 10.0, 9).unwrap()).unwrap();
        let d = PairedData::new(x, y.clone()).unwrap();
        let identity = PairedData::new(y.clone(), y).unwrap();
        assert_abs_diff_eq!(pdp(&d).value, pdp(&identity).value, epsilon = 1e-10);
    }

    #[test]
    fn missing_cells_stay_missing() {
        let y = ScoreMatrix::new(
            vec!["a".into(), "b".into()],
            vec!["s".into(), "t".into()],
            vec![Some(1.0), None, Some(-2.0), Some(0.0)],
        )
        .unwrap();
        for kind in NoiseKind::ALL {
            let x = inject_noise(&y, &NoiseSpec::new(kind, 3.0, 1).unwrap()).unwrap();
            assert_eq!(x.get(0, 1), None);
            assert_eq!(x.present_count(), 3);
        }
        let all_missing = y.with_values(vec![None; 4]).unwrap();
        assert!(inject_noise(&all_missing, &NoiseSpec::new(NoiseKind::Random, 1.0, 0).unwrap()).is_err());
        assert!(sample_random_baseline(&all_missing, 0).is_err());
    }

    #[test]
    fn injection_is_deterministic() {
        let y = demo();
        let spec = NoiseSpec::new(NoiseKind::Random, 5.0, 1234).unwrap();
        let a = inject_noise(&y, &spec).unwrap();
        let b = inject_noise(&y, &spec).unwrap();
        let bits = |m: &ScoreMatrix<f64>| m.values().iter().map(|v| v.map(f64::to_bits)).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(a, y);
    }

    #[test]
    fn baseline_draws_from_observed_values() {
        let y = demo();
        let pool: Vec<f64> = y.values().iter().flatten().copied().collect();
        let x = sample_random_baseline(&y, 77).unwrap();
        assert!(x.values().iter().flatten().all(|v| pool.contains(v)));
        assert_eq!(x, sample_random_baseline(&y, 77).unwrap());

        let flat = y.map(|_| -4.0);
        let x = sample_random_baseline(&flat, 1).unwrap();
        assert!(x.values().iter().flatten().all(|&v| v == -4.0));
    }

    #[test]
    fn degradation_proportion_definitions() {
        let s = Statistic::Pdp;
        // X_noise drawn exactly like X_rand
        let baseline = [0.1, 0.3, -0.2];
        assert_abs_diff_eq!(
            degradation_proportion(s, 1.0, &baseline, &baseline).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_eq!(degradation_proportion(s, 1.0, &[1.0, 1.0], &baseline).unwrap(), 0.0);
        assert!(matches!(
            degradation_proportion(s, 0.5, &[0.4], &[0.5]),
            Err(Error::DegenerateDenominator {
                statistic: Statistic::Pdp,
                ..
            })
        ));
    }

    #[test]
    fn sdp_is_zero_without_noise() {
        let y = demo();
        for s in Statistic::ALL {
            let v = sdp(&y, s, &NoiseSpec::new(NoiseKind::Random, 0.0, 3).unwrap(), 4).unwrap();
            assert_eq!(v, 0.0, "{s}");
        }
    }

    #[test]
    fn sweep_validates_levels() {
        let y = demo();
        let stats = [Statistic::Pdp];
        assert!(sweep(&y, &stats, NoiseKind::Random, &[], 2, 0).is_err());
        assert!(sweep(&y, &stats, NoiseKind::Random, &[1.0, 1.0], 2, 0).is_err());
        assert!(sweep(&y, &stats, NoiseKind::Random, &[2.0, 1.0], 2, 0).is_err());
        assert!(sweep(&y, &stats, NoiseKind::Random, &[-1.0, 1.0], 2, 0).is_err());
        assert!(sweep(&y, &stats, NoiseKind::Random, &[0.0], 0, 0).is_err());
    }

    #[test]
    fn sweep_at_zero_level() {
        let y = demo();
        let curves = sweep(&y, &Statistic::ALL, NoiseKind::SegmentBias, &[0.0], 3, 8).unwrap();
        assert_eq!(curves.len(), 4);
        for c in &curves {
            assert_eq!(c.points, vec![(0.0, 0.0)]);
        }
        let csv = curves_to_csv(&curves);
        assert!(csv.starts_with("statistic,kind,level,sdp,replicates,seed\n"));
        assert!(csv.contains("pdp,segment,0,0,3,8\n"));
    }
}
