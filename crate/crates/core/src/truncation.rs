//! Cut-off kernels `K_n`, `S_n` and truncated initial data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DensityProfile, InitialData};
use crate::kernels::{CoagulationKernel, FragmentationKernel};
use crate::scalar::Scalar;

/// Cut-off level `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationParams<T> {
    pub n: T,
}

impl<T: Scalar> TruncationParams<T> {
    pub fn new(n: T) -> Result<Self> {
        if !(n > T::zero()) || n.is_nan() {
            return Err(Error::Domain(format!("truncation level must be positive, got {n}")));
        }
        Ok(Self { n })
    }

    /// `K_n(x, y)`: `K(x, y)` when `x + y < n`, else zero.
    #[inline]
    pub fn coagulation(&self, k: &CoagulationKernel<T>, x: T, y: T) -> T {
        if x + y < self.n {
            k.eval(x, y)
        } else {
            T::zero()
        }
    }

    /// `S_n(x)`: `S(x)` when `x < n`, else zero.
    #[inline]
    pub fn selection(&self, f: &FragmentationKernel<T>, x: T) -> T {
        if x < self.n {
            f.selection_unchecked(x)
        } else {
            T::zero()
        }
    }
}

/// Initial data restricted to `]0, n[`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedInitial<T> {
    pub data: InitialData<T>,
    pub n: T,
}

impl<T: Scalar> DensityProfile<T> for TruncatedInitial<T> {
    fn moment_over(&self, lo: T, hi: T, p: u32) -> T {
        self.data.moment_over(lo, hi.min(self.n), p)
    }
}

/// `f_0^n = f_0 1_{]0, n[}`. Fails when `f_0` is invalid or has infinite norm.
pub fn truncate_initial<T: Scalar>(f0: &InitialData<T>, n: TruncationParams<T>) -> Result<TruncatedInitial<T>> {
    f0.validate()?;
    let norm = f0.norm();
    if !norm.is_finite() {
        return Err(Error::InvalidInitialData(format!("‖f0‖ = {norm} is not finite")));
    }
    Ok(TruncatedInitial { data: f0.clone(), n: n.n })
}
