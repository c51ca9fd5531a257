//! Runtime counterparts of the a priori estimates: the moment bound `L(T)`,
//! the tail radius `R_ε`, the uniform-integrability functional `p(δ, t)`,
//! and the volume deficit used to detect shattering.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::NumberDensity;
use crate::kernels::{FragmentationKernel, H4Estimate};
use crate::scalar::Scalar;
use crate::solver::SimulationState;

/// `k(1)` and `ω(1, 1)` entering the moment bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundConstants<T> {
    pub k1_at_one: T,
    pub omega_one_one: T,
}

impl<T: Scalar> BoundConstants<T> {
    /// Closed-form constants where available, else the exact worst-case
    /// modulus. `None` when (H4) fails at `R = 1` or `ω(1, 1)` is infinite.
    pub fn from_kernel(frag: &FragmentationKernel<T>) -> Option<Self> {
        let one = T::one();
        let k1_at_one = match frag.h4_constants(one).ok()? {
            H4Estimate::Holds { k_r, .. } => k_r,
            H4Estimate::Violated { .. } => return None,
        };
        let omega_one_one = frag.omega_bound(one, one).unwrap_or_else(|_| frag.omega_worst_case(one, one));
        omega_one_one.is_finite().then_some(Self { k1_at_one, omega_one_one })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentBound<T> {
    pub value: T,
    /// `ω(1, 1) = 0`: the linear-growth form was used.
    pub degenerate: bool,
}

/// `L(T) = ‖f0‖ [(1 + k(1)/ω(1,1)) exp(ω(1,1) T) + 2]`.
///
/// For `ω(1, 1) = 0` the differential inequality integrates to
/// `‖f0‖ [(1 + k(1) T) + 2]`, which is returned with `degenerate` set.
pub fn moment_bound<T: Scalar>(f0_norm: T, consts: BoundConstants<T>, t: T) -> Result<MomentBound<T>> {
    let BoundConstants { k1_at_one: k, omega_one_one: w } = consts;
    if !(f0_norm >= T::zero()) || !(k >= T::zero()) || !(w >= T::zero()) || !(t >= T::zero()) {
        return Err(Error::Domain(format!("moment bound needs non-negative inputs (‖f0‖ = {f0_norm}, k = {k}, ω = {w}, T = {t})")));
    }
    let two = T::lit(2.0);
    if w == T::zero() {
        return Ok(MomentBound { value: f0_norm * (T::one() + k * t + two), degenerate: true });
    }
    Ok(MomentBound { value: f0_norm * ((T::one() + k / w) * (w * t).exp() + two), degenerate: false })
}

/// `R_ε = ‖f0‖ / ε`.
pub fn tail_radius<T: Scalar>(f0_norm: T, eps: T) -> Result<T> {
    if !(eps > T::zero()) {
        return Err(Error::Domain(format!("epsilon must be positive, got {eps}")));
    }
    Ok(f0_norm / eps)
}

/// `sup { ∫_E f dx : E ⊂ ]0, R[, |E| <= δ }` for the piecewise-constant `f`.
///
/// The supremum is attained by filling `E` from the cells with the largest
/// density values; the last cell used may be covered partially.
pub fn uniform_integrability<T: Scalar>(f: &NumberDensity<T>, r: T, delta: T) -> T {
    if !(delta > T::zero()) {
        return T::zero();
    }
    let g = f.grid();
    let mut cells: Vec<(T, T)> = g
        .edges()
        .windows(2)
        .zip(&f.values)
        .filter_map(|(e, &v)| {
            let avail = e[1].min(r) - e[0];
            (avail > T::zero() && v > T::zero()).then_some((v, avail))
        })
        .collect();
    // Stable sort keeps ties in ascending cell order, so the result is reproducible.
    cells.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut left = delta;
    let mut acc = T::zero();
    for (v, avail) in cells {
        if left <= T::zero() {
            break;
        }
        let take = avail.min(left);
        acc += v * take;
        left -= take;
    }
    acc
}

/// `M_1(0) − M_1(t)` on the grid.
pub fn mass_deficit<T: Scalar>(state: &SimulationState<T>) -> T {
    state.initial_mass - state.density.moment(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEntry<T> {
    pub eps: T,
    pub r_eps: T,
    pub tail: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegrabilityEntry<T> {
    pub delta: T,
    pub p: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AprioriVerdicts {
    /// `M_0 + M_1 <= L(T)`; `None` when no bound is available.
    pub moment_bound: Option<bool>,
    /// Tail beyond `R_ε` at most `ε` for every ladder entry.
    pub tails: bool,
    /// `p(δ)` non-increasing as `δ` decreases along the ladder.
    pub p_monotone: bool,
    /// `p(δ)` strictly decreasing along the ladder.
    pub p_strict: bool,
}

/// Estimates of the a priori report for one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AprioriReport<T> {
    pub t: T,
    pub l_t: Option<MomentBound<T>>,
    pub norm_now: T,
    pub r_eps: Vec<TailEntry<T>>,
    pub p_delta: Vec<IntegrabilityEntry<T>>,
    pub mass_deficit: T,
    pub verdicts: AprioriVerdicts,
}

/// Ladders and constants for [`apriori_report`].
#[derive(Debug, Clone)]
pub struct AprioriSettings<T> {
    pub f0_norm: T,
    pub constants: Option<BoundConstants<T>>,
    pub horizon: T,
    pub eps: Vec<T>,
    /// Decreasing δ ladder, e.g. `0.5, 0.25, 0.125, ...`.
    pub deltas: Vec<T>,
    /// Upper end `R` of the sets in `p(δ)`.
    pub r: T,
}

pub fn apriori_report<T: Scalar>(state: &SimulationState<T>, s: &AprioriSettings<T>) -> Result<AprioriReport<T>> {
    let f = &state.density;
    let norm_now = f.norm();
    let l_t = s.constants.map(|c| moment_bound(s.f0_norm, c, s.horizon)).transpose()?;
    let r_eps = s
        .eps
        .iter()
        .map(|&eps| {
            let r = tail_radius(s.f0_norm, eps)?;
            Ok(TailEntry { eps, r_eps: r, tail: f.tail_number(r) })
        })
        .collect::<Result<Vec<_>>>()?;
    let p_delta: Vec<_> =
        s.deltas.iter().map(|&d| IntegrabilityEntry { delta: d, p: uniform_integrability(f, s.r, d) }).collect();
    let slack = T::one() + T::lit(1e-12);
    let verdicts = AprioriVerdicts {
        moment_bound: l_t.map(|b| norm_now <= b.value * slack),
        tails: r_eps.iter().all(|e| e.tail <= e.eps),
        p_monotone: p_delta.windows(2).all(|w| w[1].p <= w[0].p),
        p_strict: p_delta.windows(2).all(|w| w[1].p < w[0].p),
    };
    Ok(AprioriReport { t: state.t, l_t, norm_now, r_eps, p_delta, mass_deficit: mass_deficit(state), verdicts })
}
