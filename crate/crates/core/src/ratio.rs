//! Exact rational values for per-sequence statistics.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_rational::Ratio as Rational;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// An exact fraction kept in lowest terms with a positive denominator.
///
/// Frequencies lie in `[0, 1]`; differences of two frequencies lie in `[-1, 1]`.
/// Aggregates over whole enumerations can have large numerators, hence `i128`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ratio(Rational<i128>);

impl Ratio {
    pub const ZERO: Ratio = Ratio(Rational::new_raw(0, 1));
    pub const ONE: Ratio = Ratio(Rational::new_raw(1, 1));

    /// Panics if `den` is zero.
    pub fn new(num: i128, den: i128) -> Self {
        Ratio(Rational::new(num, den))
    }

    /// `successes / eligible`, or `None` when nothing was eligible.
    pub fn from_counts(successes: u64, eligible: u64) -> Option<Self> {
        (eligible > 0).then(|| Ratio::new(successes as i128, eligible as i128))
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    pub fn scale(&self, factor: i128) -> Self {
        Ratio(self.0 * factor)
    }

    pub fn div_int(&self, divisor: i128) -> Self {
        Ratio(self.0 / divisor)
    }
}

impl Add for Ratio {
    type Output = Ratio;
    fn add(self, rhs: Ratio) -> Ratio {
        Ratio(self.0 + rhs.0)
    }
}

impl Sub for Ratio {
    type Output = Ratio;
    fn sub(self, rhs: Ratio) -> Ratio {
        Ratio(self.0 - rhs.0)
    }
}

impl Neg for Ratio {
    type Output = Ratio;
    fn neg(self) -> Ratio {
        Ratio(-self.0)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Debug for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Ratio", 2)?;
        s.serialize_field("num", &self.numer())?;
        s.serialize_field("den", &self.denom())?;
        s.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_terms() {
        let r = Ratio::new(6, 9);
        assert_eq!((r.numer(), r.denom()), (2, 3));
        let r = Ratio::new(3, -6);
        assert_eq!((r.numer(), r.denom()), (-1, 2));
    }

    #[test]
    fn from_counts_undefined_on_zero() {
        assert_eq!(Ratio::from_counts(0, 0), None);
        assert_eq!(Ratio::from_counts(3, 3), Some(Ratio::ONE));
    }

    #[test]
    fn ordering_is_numeric() {
        assert!(Ratio::new(1, 3) < Ratio::new(1, 2));
        assert!(Ratio::new(-1, 2) < Ratio::ZERO);
        assert_eq!(Ratio::new(1, 2) - Ratio::ONE, Ratio::new(-1, 2));
    }
}
