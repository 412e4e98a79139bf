//! Scalar statistics: moments, Pearson, Spearman and pairwise differences.
//!
//! Moments are population moments (divide by n) with compensated
//! accumulation. A correlation whose inputs have zero variance, or fewer than
//! two points, is reported as undefined rather than as a sentinel number.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{compensated_sum, CompensatedSum, Scalar};

/// Correlation value (None when undefined) and the number of pairs used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationResult<T> {
    pub value: Option<T>,
    pub n: usize,
}

impl<T: Scalar> CorrelationResult<T> {
    pub fn undefined(n: usize) -> Self {
        Self { value: None, n }
    }

    pub fn is_defined(&self) -> bool {
        self.value.is_some()
    }

    /// The value, with undefined mapped to zero.
    pub fn or_zero(&self) -> T {
        self.value.unwrap_or_else(T::zero)
    }
}

pub fn mean<T: Scalar>(u: &[T]) -> Option<T> {
    if u.is_empty() {
        return None;
    }
    Some(compensated_sum(u.iter().copied()) / T::from_count(u.len()))
}

/// Population variance.
pub fn variance<T: Scalar>(u: &[T]) -> Option<T> {
    let m = mean(u)?;
    let ss = compensated_sum(u.iter().map(|&x| (x - m) * (x - m)));
    Some(ss / T::from_count(u.len()))
}

/// Population covariance.
pub fn covariance<T: Scalar>(u: &[T], v: &[T]) -> Result<Option<T>> {
    check_len(u, v)?;
    let (Some(mu), Some(mv)) = (mean(u), mean(v)) else {
        return Ok(None);
    };
    let s = compensated_sum(u.iter().zip(v).map(|(&a, &b)| (a - mu) * (b - mv)));
    Ok(Some(s / T::from_count(u.len())))
}

fn check_len<T>(u: &[T], v: &[T]) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch(u.len(), v.len()));
    }
    Ok(())
}

fn is_constant<T: Scalar>(u: &[T]) -> bool {
    u.windows(2).all(|w| w[0] == w[1])
}

/// Pearson correlation of two equal-length vectors.
pub fn pearson<T: Scalar>(u: &[T], v: &[T]) -> Result<CorrelationResult<T>> {
    check_len(u, v)?;
    let n = u.len();
    if n < 2 || is_constant(u) || is_constant(v) {
        return Ok(CorrelationResult::undefined(n));
    }
    let mu = mean(u).expect("nonempty");
    let mv = mean(v).expect("nonempty");
    let mut sxx = CompensatedSum::new();
    let mut syy = CompensatedSum::new();
    let mut sxy = CompensatedSum::new();
    for (&a, &b) in u.iter().zip(v) {
        let da = a - mu;
        let db = b - mv;
        sxx.add(da * da);
        syy.add(db * db);
        sxy.add(da * db);
    }
    // Cov / sqrt(Var Var); the 1/n factors cancel.
    let (sxx, syy, sxy) = (sxx.value(), syy.value(), sxy.value());
    if sxx <= T::zero() || syy <= T::zero() {
        return Ok(CorrelationResult::undefined(n));
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Ok(CorrelationResult {
        value: Some(r.max(-T::one()).min(T::one())),
        n,
    })
}

/// Fractional ranks starting at 1; tied values share the mean of their span.
pub fn fractional_ranks<T: Scalar>(u: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..u.len()).collect();
    order.sort_by(|&a, &b| u[a].partial_cmp(&u[b]).expect("finite scores"));
    let mut ranks = vec![T::zero(); u.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && u[order[end]] == u[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1 ..= end
        let rank = T::from_count(start + 1 + end) / T::lit(2.0);
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation (Pearson of fractional ranks).
pub fn spearman<T: Scalar>(u: &[T], v: &[T]) -> Result<CorrelationResult<T>> {
    check_len(u, v)?;
    pearson(&fractional_ranks(u), &fractional_ranks(v))
}

/// Every ordered difference `u[i] - u[j]`, row-major over `(i, j)`.
/// Without `include_self` the `i == j` zeros are skipped.
pub fn pairwise_differences<T: Scalar>(u: &[T], include_self: bool) -> Vec<T> {
    let n = u.len();
    let mut out = Vec::with_capacity(if include_self { n * n } else { n * n.saturating_sub(1) });
    for (i, &a) in u.iter().enumerate() {
        for (j, &b) in u.iter().enumerate() {
            if include_self || i != j {
                out.push(a - b);
            }
        }
    }
    out
}
