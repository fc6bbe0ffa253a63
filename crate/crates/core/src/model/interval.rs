//! Inclusive frame intervals and the center/length canonical form.

use crate::error::{Error, Result};

/// Inclusive frame interval `[onset, offset]`.
///
/// Signed so that fixed-length detection windows near the start of a video
/// may extend past frame 0 without wrapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub onset: i64,
    pub offset: i64,
}

impl Interval {
    pub fn new(onset: i64, offset: i64) -> Result<Self> {
        if offset < onset {
            return Err(Error::Argument(format!(
                "interval offset {offset} precedes onset {onset}"
            )));
        }
        Ok(Interval { onset, offset })
    }

    /// Rebuilds the interval from its canonical `(center, length)` form.
    pub fn from_center(center: i64, length: i64) -> Result<Self> {
        if length < 1 {
            return Err(Error::Argument(format!("interval length {length} < 1")));
        }
        let onset = center - (length - 1) / 2;
        Ok(Interval {
            onset,
            offset: onset + length - 1,
        })
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> i64 {
        self.offset - self.onset + 1
    }

    /// Floor of the midpoint.
    pub fn center(&self) -> i64 {
        (self.onset + self.offset).div_euclid(2)
    }

    /// Number of frames shared with `other`, inclusive endpoints.
    pub fn intersection(&self, other: &Interval) -> i64 {
        let lo = self.onset.max(other.onset);
        let hi = self.offset.min(other.offset);
        (hi - lo + 1).max(0)
    }
}

/// `(onset, offset)` to `(center, length)`.
pub fn interval_conversion(onset: usize, offset: usize) -> Result<(usize, usize)> {
    if offset < onset {
        return Err(Error::Argument(format!(
            "interval offset {offset} precedes onset {onset}"
        )));
    }
    Ok(((onset + offset) / 2, offset - onset + 1))
}

/// `(center, length)` back to `(onset, offset)`.
pub fn interval_inverse(center: usize, length: usize) -> Result<(usize, usize)> {
    if length == 0 {
        return Err(Error::Argument("interval length must be at least 1".into()));
    }
    let half = (length - 1) / 2;
    let onset = center
        .checked_sub(half)
        .ok_or_else(|| Error::Argument(format!("center {center} with length {length} starts before frame 0")))?;
    Ok((onset, onset + length - 1))
}
