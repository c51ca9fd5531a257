//! Floating-point abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, NumAssign};

/// Real scalar used throughout the solver.
///
/// Implemented for `f32` and `f64`. The acceptance tolerances (down to
/// `1e-12`) are only meaningful in `f64`; `f32` is supported for cheap
/// exploratory runs.
pub trait Scalar:
    Float + FloatConst + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Never fails for finite inputs.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as num_traits::NumCast>::from(v).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize(v: usize) -> Self {
        <Self as num_traits::NumCast>::from(v).expect("usize representable")
    }

    #[inline]
    fn to_f64(self) -> f64 {
        <f64 as num_traits::NumCast>::from(self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Scalar> CompensatedSum<T> {
    pub fn new() -> Self {
        Self { sum: T::zero(), carry: T::zero() }
    }

    #[inline]
    pub fn add(&mut self, v: T) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.carry
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn compensated_sum<T: Scalar, I: IntoIterator<Item = T>>(it: I) -> T {
    let mut acc = CompensatedSum::new();
    for v in it {
        acc.add(v);
    }
    acc.value()
}

/// Shortest decimal string that parses back to the same `f64`.
pub fn format_exact<T: Scalar>(x: T) -> String {
    ryu::Buffer::new().format(x.to_f64()).to_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let vals = [1.0e16_f64, 1.0, -1.0e16, 1.0];
        assert_eq!(compensated_sum(vals), 2.0);
        assert_ne!(vals.iter().sum::<f64>(), 2.0);
    }

    #[test]
    fn literal_conversion_f32() {
        assert_eq!(f32::lit(0.5), 0.5_f32);
        assert_eq!(f64::from_usize(7), 7.0);
    }

    #[test]
    fn exact_formatting_round_trips() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 6.02e23, 0.0, -2.5] {
            assert_eq!(format_exact(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_exact(0.5), "0.5");
        assert_eq!(format_exact(f64::INFINITY), "inf");
    }
}
