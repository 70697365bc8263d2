use std::fmt;

use serde::{Deserialize, Serialize};

use super::Rational;
use crate::error::{Error, Result};

/// Continuous, nondecreasing piecewise-linear function on `[0, ∞)`.
///
/// `breakpoints` are the interior kinks, strictly increasing and positive;
/// `slopes[i]` is the slope on the i-th segment, so there is always one more
/// slope than breakpoints. Convexity is not required by the type, but only
/// convex functions can be encoded in the LP (see [`is_convex`](Self::is_convex)).
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiecewiseLinearFn {
    breakpoints: Vec<Rational>,
    initial_value: Rational,
    slopes: Vec<Rational>,
}

/// An affine piece `slope * t + intercept`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub slope: Rational,
    pub intercept: Rational,
}

impl PiecewiseLinearFn {
    pub fn new(breakpoints: Vec<Rational>, initial_value: Rational, slopes: Vec<Rational>) -> Result<Self> {
        if slopes.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidFunction(format!(
                "{} breakpoints need {} slopes, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                slopes.len()
            )));
        }
        if let Some(first) = breakpoints.first() {
            if !first.is_positive() {
                return Err(Error::InvalidFunction("breakpoints must be positive".into()));
            }
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidFunction("breakpoints must be strictly increasing".into()));
        }
        if slopes.iter().any(Rational::is_negative) {
            return Err(Error::InvalidFunction("slopes must be nonnegative (regular criterion)".into()));
        }
        Ok(PiecewiseLinearFn { breakpoints, initial_value, slopes })
    }

    /// `slope * t + intercept` for `t ≥ 0`.
    pub fn affine(slope: Rational, intercept: Rational) -> Result<Self> {
        Self::new(Vec::new(), intercept, vec![slope])
    }

    /// `C_j`.
    pub fn identity() -> Self {
        Self::affine(Rational::one(), Rational::zero()).expect("valid")
    }

    /// `weight * max(0, t - due)`.
    pub fn tardiness(weight: Rational, due: Rational) -> Result<Self> {
        if due.is_positive() {
            Self::new(vec![due], Rational::zero(), vec![Rational::zero(), weight])
        } else {
            let intercept = -(&weight * &due);
            Self::affine(weight, intercept)
        }
    }

    /// `t - due`; negative values are allowed.
    pub fn lateness(due: Rational) -> Self {
        Self::affine(Rational::one(), -due).expect("valid")
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn initial_value(&self) -> &Rational {
        &self.initial_value
    }

    pub fn slopes(&self) -> &[Rational] {
        &self.slopes
    }

    pub fn is_convex(&self) -> bool {
        self.slopes.windows(2).all(|w| w[0] <= w[1])
    }

    fn segment_index(&self, t: &Rational) -> usize {
        self.breakpoints.partition_point(|b| b <= t)
    }

    /// Slope of the segment starting at or containing `t` (right derivative).
    pub fn slope_at(&self, t: &Rational) -> &Rational {
        &self.slopes[self.segment_index(t)]
    }

    pub fn value_at(&self, t: &Rational) -> Rational {
        let mut value = self.initial_value.clone();
        let mut left = Rational::zero();
        for (b, s) in self.breakpoints.iter().zip(&self.slopes) {
            if t <= b {
                return value + s * (t - &left);
            }
            value += s * (b - &left);
            left = b.clone();
        }
        value + self.slopes.last().expect("at least one slope") * (t - &left)
    }

    /// Affine extension of every segment. For a convex function the value at
    /// any `t ≥ 0` is the maximum over these.
    pub fn segments(&self) -> Vec<Segment> {
        let mut out = Vec::with_capacity(self.slopes.len());
        let mut left = Rational::zero();
        let mut value = self.initial_value.clone();
        for (i, slope) in self.slopes.iter().enumerate() {
            out.push(Segment { slope: slope.clone(), intercept: &value - slope * &left });
            if let Some(b) = self.breakpoints.get(i) {
                value += slope * (b - &left);
                left = b.clone();
            }
        }
        out
    }
}

impl fmt::Debug for PiecewiseLinearFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PL(f(0)={}", self.initial_value)?;
        for (i, s) in self.slopes.iter().enumerate() {
            match i.checked_sub(1).map(|k| &self.breakpoints[k]) {
                Some(b) => write!(f, ", @{b}:{s}")?,
                None => write!(f, ", {s}")?,
            }
        }
        write!(f, ")")
    }
}
