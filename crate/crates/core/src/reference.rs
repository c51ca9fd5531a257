//! Closed-form solutions for the two exactly solvable regimes, both with
//! `f0(x) = e^{-x}` (unit number and unit volume), and error norms against them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::NumberDensity;
use crate::kernels::{CoagulationKernel, FragmentationKernel};
use crate::scalar::{compensated_sum, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSolution {
    /// `K = 1`, no fragmentation.
    ConstantKernelCoagulation,
    /// No coagulation, `S(y) = y`, `b(x, y) = 2/y`.
    LinearFragmentationBinary,
}

/// `f(x, t) = 4/(2+t)² exp(−2x/(2+t))`.
pub fn analytic_coag_constant<T: Scalar>(x: T, t: T) -> T {
    let s = (T::lit(2.0) + t) * T::lit(0.5);
    (-x / s).exp() / (s * s)
}

/// `f(x, t) = (1+t)² exp(−x(1+t))`.
pub fn analytic_frag_linear<T: Scalar>(x: T, t: T) -> T {
    let a = T::one() + t;
    a * a * (-x * a).exp()
}

impl ReferenceSolution {
    pub fn eval<T: Scalar>(self, x: T, t: T) -> T {
        match self {
            Self::ConstantKernelCoagulation => analytic_coag_constant(x, t),
            Self::LinearFragmentationBinary => analytic_frag_linear(x, t),
        }
    }

    /// Exact `[M_0, M_1, M_2]` over `]0, ∞[`.
    pub fn moments<T: Scalar>(self, t: T) -> [T; 3] {
        // f = A e^{-x/s}: M_p = A p! s^{p+1}
        let (a, s) = match self {
            Self::ConstantKernelCoagulation => {
                let s = (T::lit(2.0) + t) * T::lit(0.5);
                (T::one() / (s * s), s)
            }
            Self::LinearFragmentationBinary => {
                let a = T::one() + t;
                (a * a, T::one() / a)
            }
        };
        [a * s, a * s * s, T::lit(2.0) * a * s * s * s]
    }

    pub fn kernels<T: Scalar>(self) -> (CoagulationKernel<T>, FragmentationKernel<T>) {
        match self {
            Self::ConstantKernelCoagulation => (
                CoagulationKernel::Constant { c: T::one() },
                FragmentationKernel::BoundedConstant { gamma0: T::zero() },
            ),
            Self::LinearFragmentationBinary => (
                CoagulationKernel::Constant { c: T::zero() },
                FragmentationKernel::PowerLaw { alpha: T::zero(), gamma: T::one() },
            ),
        }
    }

    /// Identifies a reference regime from kernels and unit-exponential data.
    pub fn detect<T: Scalar>(coag: &CoagulationKernel<T>, frag: &FragmentationKernel<T>) -> Option<Self> {
        [Self::ConstantKernelCoagulation, Self::LinearFragmentationBinary].into_iter().find(|r| {
            let (c, f) = r.kernels::<T>();
            let same_frag = match (&f, frag) {
                (FragmentationKernel::BoundedConstant { .. }, _) => frag.is_zero(),
                _ => f == *frag,
            };
            let same_coag = match &c {
                CoagulationKernel::Constant { c } if *c == T::zero() => coag.is_zero(),
                _ => c == *coag,
            };
            same_coag && same_frag
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorNorms<T> {
    /// `Σ |f_i − ref(x_i)| w_i`.
    pub l1: T,
    /// `Σ (1 + x_i) |f_i − ref(x_i)| w_i`.
    pub weighted_l1: T,
    /// `|ΔM_0|, |ΔM_1|, |ΔM_2|` against the exact moments.
    pub moments: [T; 3],
}

/// Error of `numeric` against `reference` at time `t`.
pub fn error_norms<T: Scalar>(numeric: &NumberDensity<T>, reference: ReferenceSolution, t: T) -> Result<ErrorNorms<T>> {
    let tol = T::lit(1e-12) * t.abs().max(T::one());
    if (numeric.time - t).abs() > tol {
        return Err(Error::TimeMismatch { density_t: numeric.time.to_f64(), requested_t: t.to_f64() });
    }
    let g = numeric.grid();
    let diffs: Vec<(T, T)> = g
        .pivots()
        .iter()
        .zip(g.widths())
        .zip(&numeric.values)
        .map(|((&x, &w), &v)| (x, (v - reference.eval(x, t)).abs() * w))
        .collect();
    let l1 = compensated_sum(diffs.iter().map(|&(_, d)| d));
    let weighted_l1 = compensated_sum(diffs.iter().map(|&(x, d)| (T::one() + x) * d));
    let exact = reference.moments(t);
    let moments = [0, 1, 2].map(|p| (numeric.moment(p as u32) - exact[p]).abs());
    Ok(ErrorNorms { l1, weighted_l1, moments })
}
