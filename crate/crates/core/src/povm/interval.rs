use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Finite union of disjoint closed intervals of the real line, possibly
/// unbounded at either end.
///
/// Stored as strictly increasing finite boundaries at which membership
/// toggles, plus whether the set contains a neighbourhood of `-∞`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet<T: Real> {
    boundaries: Vec<T>,
    lower_unbounded: bool,
}

impl<T: Real> IntervalSet<T> {
    pub fn new(boundaries: Vec<T>, lower_unbounded: bool) -> Result<Self> {
        if let Some(bad) = boundaries.iter().find(|b| !b.is_finite_value()) {
            return Err(Error::InvalidIntervals(format!(
                "non-finite boundary {}",
                bad.to_f64_lossy()
            )));
        }
        if boundaries.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidIntervals("boundaries must be strictly increasing".into()));
        }
        Ok(Self {
            boundaries,
            lower_unbounded,
        })
    }

    pub fn empty() -> Self {
        Self {
            boundaries: Vec::new(),
            lower_unbounded: false,
        }
    }

    pub fn real_line() -> Self {
        Self {
            boundaries: Vec::new(),
            lower_unbounded: true,
        }
    }

    /// `[a, b]`; either end may be infinite.
    pub fn interval(a: T, b: T) -> Result<Self> {
        Self::from_segments(&[(a, b)])
    }

    /// Union of `[a_i, b_i]` given in increasing, non-overlapping order.
    /// `-∞` is allowed only as the first lower end and `+∞` only as the last upper end.
    pub fn from_segments(segments: &[(T, T)]) -> Result<Self> {
        let mut boundaries = Vec::with_capacity(2 * segments.len());
        let mut lower_unbounded = false;
        let last = segments.len().saturating_sub(1);
        for (k, &(a, b)) in segments.iter().enumerate() {
            if !(a < b) {
                return Err(Error::InvalidIntervals(format!(
                    "segment [{}, {}] is empty",
                    a.to_f64_lossy(),
                    b.to_f64_lossy()
                )));
            }
            if a == -T::infinity() {
                if k != 0 {
                    return Err(Error::InvalidIntervals("-inf only allowed on the first segment".into()));
                }
                lower_unbounded = true;
            } else {
                boundaries.push(a);
            }
            if b == T::infinity() {
                if k != last {
                    return Err(Error::InvalidIntervals("+inf only allowed on the last segment".into()));
                }
            } else {
                boundaries.push(b);
            }
        }
        Self::new(boundaries, lower_unbounded)
    }

    /// Pairs sorted values as `[v0,v1] ∪ [v2,v3] ∪ …`; the unsorted optimizer
    /// parameterization. Coincident values cancel. Odd length leaves the last
    /// interval open to `+∞`.
    pub fn from_unsorted(values: &[T]) -> Self {
        let mut v: Vec<T> = values.iter().copied().filter(|x| x.is_finite_value()).collect();
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let mut boundaries: Vec<T> = Vec::with_capacity(v.len());
        for x in v {
            if boundaries.last() == Some(&x) {
                boundaries.pop();
            } else {
                boundaries.push(x);
            }
        }
        Self {
            boundaries,
            lower_unbounded: false,
        }
    }

    pub fn boundaries(&self) -> &[T] {
        &self.boundaries
    }

    pub fn lower_unbounded(&self) -> bool {
        self.lower_unbounded
    }

    pub fn upper_unbounded(&self) -> bool {
        self.lower_unbounded ^ (self.boundaries.len() % 2 == 1)
    }

    pub fn is_empty(&self) -> bool {
        self.boundaries.is_empty() && !self.lower_unbounded
    }

    pub fn complement(&self) -> Self {
        Self {
            boundaries: self.boundaries.clone(),
            lower_unbounded: !self.lower_unbounded,
        }
    }

    /// Membership, boundaries included.
    pub fn contains(&self, x: T) -> bool {
        if self.boundaries.contains(&x) {
            return true;
        }
        let crossed = self.boundaries.iter().filter(|&&b| b < x).count();
        self.lower_unbounded ^ (crossed % 2 == 1)
    }

    /// The intervals `(lo, hi)` in increasing order, with `±∞` for unbounded ends.
    pub fn segments(&self) -> Vec<(T, T)> {
        let mut out = Vec::new();
        let mut inside = self.lower_unbounded;
        let mut start = -T::infinity();
        for &b in &self.boundaries {
            if inside {
                out.push((start, b));
            } else {
                start = b;
            }
            inside = !inside;
        }
        if inside {
            out.push((start, T::infinity()));
        }
        out
    }

    /// Number of intervals in the union.
    pub fn len(&self) -> usize {
        self.segments().len()
    }

    /// Scales every boundary by `factor > 0` (quadrature unit change).
    pub fn rescaled(&self, factor: T) -> Self {
        Self {
            boundaries: self.boundaries.iter().map(|b| *b * factor).collect(),
            lower_unbounded: self.lower_unbounded,
        }
    }

    /// Mirror image `x → -x`.
    pub fn reflected(&self) -> Self {
        let boundaries: Vec<T> = self.boundaries.iter().rev().map(|b| -*b).collect();
        Self {
            lower_unbounded: self.upper_unbounded(),
            boundaries,
        }
    }
}

impl IntervalSet<f64> {
    /// Conversion between scalar types.
    pub fn cast<U: Real>(&self) -> IntervalSet<U> {
        IntervalSet {
            boundaries: self.boundaries.iter().map(|b| U::lit(*b)).collect(),
            lower_unbounded: self.lower_unbounded,
        }
    }
}
