//! System x segment score matrices, metric/human pairing and the scores TSV format.
//!
//! A [`ScoreMatrix`] stores one entry per (system, segment) cell; an entry is
//! either a finite score or missing. Statistics downstream are pairwise
//! complete: a cell missing on either side of a [`PairedData`] is ignored.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Header line of the scores TSV format.
pub const SCORES_HEADER: &str = "segment_id\tsystem_id\tscore";

/// Token used for a missing score.
pub const MISSING_TOKEN: &str = "NA";

/// On-disk formats accepted by [`load_scores`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoresFormat {
    #[default]
    Tsv,
}

/// N systems x M segments, row-major by system.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix<T> {
    systems: Vec<String>,
    segments: Vec<String>,
    values: Vec<Option<T>>,
}

fn check_unique(ids: &[String], axis: &'static str) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateId { axis, id: id.clone() });
        }
    }
    Ok(())
}

impl<T: Scalar> ScoreMatrix<T> {
    /// Builds a matrix from its axes and a row-major (system-major) grid.
    pub fn new(systems: Vec<String>, segments: Vec<String>, values: Vec<Option<T>>) -> Result<Self> {
        if systems.is_empty() || segments.is_empty() {
            return Err(Error::InvalidMatrix(format!(
                "need at least one system and one segment, got {}x{}",
                systems.len(),
                segments.len()
            )));
        }
        if values.len() != systems.len() * segments.len() {
            return Err(Error::InvalidMatrix(format!(
                "{} values for a {}x{} grid",
                values.len(),
                systems.len(),
                segments.len()
            )));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite score".into()));
        }
        check_unique(&systems, "system")?;
        check_unique(&segments, "segment")?;
        Ok(Self {
            systems,
            segments,
            values,
        })
    }

    /// Builds a fully present matrix from per-system rows.
    pub fn from_rows<S: AsRef<str>>(systems: &[S], segments: &[S], rows: &[Vec<T>]) -> Result<Self> {
        if rows.len() != systems.len() || rows.iter().any(|r| r.len() != segments.len()) {
            return Err(Error::InvalidMatrix("row shape does not match axes".into()));
        }
        Self::new(
            systems.iter().map(|s| s.as_ref().to_owned()).collect(),
            segments.iter().map(|s| s.as_ref().to_owned()).collect(),
            rows.iter().flatten().map(|&v| Some(v)).collect(),
        )
    }

    /// Same axes, new values.
    pub fn with_values(&self, values: Vec<Option<T>>) -> Result<Self> {
        Self::new(self.systems.clone(), self.segments.clone(), values)
    }

    /// Applies `f` to every present entry. `f` must return finite values.
    pub fn map(&self, mut f: impl FnMut(T) -> T) -> Self {
        let values = self.values.iter().map(|v| v.map(&mut f)).collect();
        Self::new(self.systems.clone(), self.segments.clone(), values).expect("map produced a non-finite score")
    }

    pub fn systems(&self) -> &[String] {
        &self.systems
    }

    pub fn segments(&self) -> &[String] {
        &self.segments
    }

    pub fn num_systems(&self) -> usize {
        self.systems.len()
    }

    pub fn num_segments(&self) -> usize {
        self.segments.len()
    }

    /// Row-major (system-major) entries.
    pub fn values(&self) -> &[Option<T>] {
        &self.values
    }

    #[inline]
    pub fn get(&self, system: usize, segment: usize) -> Option<T> {
        self.values[system * self.segments.len() + segment]
    }

    pub fn present_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn system_index(&self, id: &str) -> Option<usize> {
        self.systems.iter().position(|s| s == id)
    }

    pub fn segment_index(&self, id: &str) -> Option<usize> {
        self.segments.iter().position(|s| s == id)
    }

    fn same_axes(&self, other: &Self) -> bool {
        self.systems == other.systems && self.segments == other.segments
    }
}

/// Reads a scores file.
pub fn load_scores<T: Scalar>(path: impl AsRef<Path>, format: ScoresFormat) -> Result<ScoreMatrix<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    match format {
        ScoresFormat::Tsv => parse_scores_tsv(&text),
    }
}

/// Parses the scores TSV format from text.
pub fn parse_scores_tsv<T: Scalar>(text: &str) -> Result<ScoreMatrix<T>> {
    let mut systems: Vec<String> = Vec::new();
    let mut segments: Vec<String> = Vec::new();
    let mut system_ix: HashMap<String, usize> = HashMap::new();
    let mut segment_ix: HashMap<String, usize> = HashMap::new();
    let mut cells: HashMap<(usize, usize), Option<T>> = HashMap::new();
    let mut saw_header = false;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !saw_header {
            if line != SCORES_HEADER {
                return Err(Error::parse(
                    line_no,
                    format!("expected header {SCORES_HEADER:?}, found {line:?}"),
                ));
            }
            saw_header = true;
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::parse(
                line_no,
                format!("expected 3 tab-separated columns, found {}", cols.len()),
            ));
        }
        let (segment, system, token) = (cols[0], cols[1], cols[2]);
        let score = parse_score::<T>(token).ok_or_else(|| Error::parse(line_no, format!("invalid score {token:?}")))?;

        let seg = *segment_ix.entry(segment.to_owned()).or_insert_with(|| {
            segments.push(segment.to_owned());
            segments.len() - 1
        });
        let sys = *system_ix.entry(system.to_owned()).or_insert_with(|| {
            systems.push(system.to_owned());
            systems.len() - 1
        });
        if cells.insert((sys, seg), score).is_some() {
            return Err(Error::DuplicateCell {
                segment: segment.to_owned(),
                system: system.to_owned(),
            });
        }
    }

    if cells.is_empty() {
        return Err(Error::NoRows);
    }
    let m = segments.len();
    let mut values = vec![None; systems.len() * m];
    for ((sys, seg), v) in cells {
        values[sys * m + seg] = v;
    }
    ScoreMatrix::new(systems, segments, values)
}

/// `Some(None)` for the missing token, `None` for garbage.
fn parse_score<T: Scalar>(token: &str) -> Option<Option<T>> {
    if token == MISSING_TOKEN {
        return Some(None);
    }
    let v: f64 = token.trim().parse().ok()?;
    if !v.is_finite() {
        return None;
    }
    let v = T::from_f64(v)?;
    v.is_finite().then_some(Some(v))
}

/// Renders a matrix in the scores TSV format, one row per cell in
/// segment-major order. Missing cells are written as `NA`.
pub fn scores_to_tsv<T: Scalar>(matrix: &ScoreMatrix<T>) -> String {
    let mut out = String::new();
    out.push_str(SCORES_HEADER);
    out.push('\n');
    for (seg_i, seg) in matrix.segments().iter().enumerate() {
        for (sys_i, sys) in matrix.systems().iter().enumerate() {
            match matrix.get(sys_i, seg_i) {
                Some(v) => writeln!(out, "{seg}\t{sys}\t{v}"),
                None => writeln!(out, "{seg}\t{sys}\t{MISSING_TOKEN}"),
            }
            .expect("write to String");
        }
    }
    out
}

pub fn write_scores<T: Scalar>(matrix: &ScoreMatrix<T>, mut w: impl Write) -> io::Result<()> {
    w.write_all(scores_to_tsv(matrix).as_bytes())
}

/// How many axis entries were dropped from each side by [`pair`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Dropped {
    pub metric_systems: usize,
    pub metric_segments: usize,
    pub human_systems: usize,
    pub human_segments: usize,
}

impl Dropped {
    pub fn total(&self) -> usize {
        self.metric_systems + self.metric_segments + self.human_systems + self.human_segments
    }
}

/// Metric scores `x` and human scores `y` over identical axes.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedData<T> {
    x: ScoreMatrix<T>,
    y: ScoreMatrix<T>,
    dropped: Dropped,
}

impl<T: Scalar> PairedData<T> {
    /// Pairs two matrices that already share axes (same ids, same order).
    pub fn new(x: ScoreMatrix<T>, y: ScoreMatrix<T>) -> Result<Self> {
        if !x.same_axes(&y) {
            return Err(Error::AxisMismatch);
        }
        Ok(Self {
            x,
            y,
            dropped: Dropped::default(),
        })
    }

    pub fn metric(&self) -> &ScoreMatrix<T> {
        &self.x
    }

    pub fn human(&self) -> &ScoreMatrix<T> {
        &self.y
    }

    pub fn dropped(&self) -> Dropped {
        self.dropped
    }

    pub fn num_systems(&self) -> usize {
        self.y.num_systems()
    }

    pub fn num_segments(&self) -> usize {
        self.y.num_segments()
    }

    /// `(x, y)` at a cell when both sides are present.
    #[inline]
    pub fn joint(&self, system: usize, segment: usize) -> Option<(T, T)> {
        Some((self.x.get(system, segment)?, self.y.get(system, segment)?))
    }

    /// All jointly present cells, system-major.
    pub fn joint_cells(&self) -> (Vec<T>, Vec<T>) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (x, y) in self.x.values().iter().zip(self.y.values()) {
            if let (Some(x), Some(y)) = (x, y) {
                xs.push(*x);
                ys.push(*y);
            }
        }
        (xs, ys)
    }

    /// Jointly present scores of one segment, in system order.
    pub fn segment_scores(&self, segment: usize) -> (Vec<T>, Vec<T>) {
        (0..self.num_systems()).filter_map(|s| self.joint(s, segment)).unzip()
    }

    /// Replaces the metric matrix; the new one must share the human axes.
    pub fn with_metric(&self, x: ScoreMatrix<T>) -> Result<Self> {
        let mut d = Self::new(x, self.y.clone())?;
        d.dropped = self.dropped;
        Ok(d)
    }
}

fn intersect(metric: &[String], human: &[String]) -> (Vec<String>, usize, usize) {
    let metric_set: HashSet<&str> = metric.iter().map(String::as_str).collect();
    let kept: Vec<String> = human
        .iter()
        .filter(|id| metric_set.contains(id.as_str()))
        .cloned()
        .collect();
    (kept.clone(), metric.len() - kept.len(), human.len() - kept.len())
}

fn restrict<T: Scalar>(m: &ScoreMatrix<T>, systems: &[String], segments: &[String]) -> Result<ScoreMatrix<T>> {
    let sys_ix: HashMap<&str, usize> = m.systems().iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let seg_ix: HashMap<&str, usize> = m.segments().iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut values = Vec::with_capacity(systems.len() * segments.len());
    for sys in systems {
        let si = sys_ix[sys.as_str()];
        for seg in segments {
            values.push(m.get(si, seg_ix[seg.as_str()]));
        }
    }
    ScoreMatrix::new(systems.to_vec(), segments.to_vec(), values)
}

/// Aligns metric `x` with human `y` on the intersection of their axes,
/// keeping the human ordering.
pub fn pair<T: Scalar>(x: &ScoreMatrix<T>, y: &ScoreMatrix<T>) -> Result<PairedData<T>> {
    let (systems, x_sys_dropped, y_sys_dropped) = intersect(x.systems(), y.systems());
    if systems.is_empty() {
        return Err(Error::EmptyIntersection("system"));
    }
    let (segments, x_seg_dropped, y_seg_dropped) = intersect(x.segments(), y.segments());
    if segments.is_empty() {
        return Err(Error::EmptyIntersection("segment"));
    }
    let dropped = Dropped {
        metric_systems: x_sys_dropped,
        metric_segments: x_seg_dropped,
        human_systems: y_sys_dropped,
        human_segments: y_seg_dropped,
    };
    if dropped.total() > 0 {
        log::warn!(
            "pairing dropped {} metric systems, {} metric segments, {} human systems, {} human segments",
            dropped.metric_systems,
            dropped.metric_segments,
            dropped.human_systems,
            dropped.human_segments
        );
    }
    let xr = restrict(x, &systems, &segments)?;
    let yr = restrict(y, &systems, &segments)?;
    Ok(PairedData { x: xr, y: yr, dropped })
}

/// Jointly present scores of one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSlice<'a, T> {
    pub segment_id: &'a str,
    pub x_scores: Vec<(&'a str, T)>,
    pub y_scores: Vec<(&'a str, T)>,
}

impl<T: Scalar> SegmentSlice<'_, T> {
    pub fn len(&self) -> usize {
        self.x_scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_scores.is_empty()
    }
}

/// One slice per segment, including slices with fewer than two systems.
pub fn segment_slices<T: Scalar>(d: &PairedData<T>) -> Vec<SegmentSlice<'_, T>> {
    let systems = d.human().systems();
    d.human()
        .segments()
        .iter()
        .enumerate()
        .map(|(m, seg)| {
            let mut x_scores = Vec::new();
            let mut y_scores = Vec::new();
            for (s, sys) in systems.iter().enumerate() {
                if let Some((x, y)) = d.joint(s, m) {
                    x_scores.push((sys.as_str(), x));
                    y_scores.push((sys.as_str(), y));
                }
            }
            SegmentSlice {
                segment_id: seg.as_str(),
                x_scores,
                y_scores,
            }
        })
        .collect()
}
