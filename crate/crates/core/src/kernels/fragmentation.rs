use serde::{Deserialize, Serialize};

use super::coagulation::{exponent_ladder, log_space};
use crate::error::{Error, Result};
use crate::quadrature::tanh_sinh;
use crate::scalar::Scalar;

/// Multiple-fragmentation kernel `Γ(y, x)`: rate at which a parent of volume
/// `y` produces a fragment of volume `x < y`.
///
/// Both families factor as `Γ(y, x) = S(y) b(x, y)` with a power-law breakage
/// function `b(x, y) = (a + 2)/y (x/y)^a`, where `a` is
/// [`breakage_exponent`](Self::breakage_exponent).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FragmentationKernel<T> {
    /// `Γ(y, x) = (alpha + 2) x^alpha y^(gamma - alpha - 1)`, so `S(y) = y^gamma`.
    PowerLaw { alpha: T, gamma: T },
    /// `Γ(y, x) = gamma0`, so `S(y) = gamma0 y / 2` and `b(x, y) = 2 / y`.
    BoundedConstant { gamma0: T },
}

/// Outcome of the (H4) constant computation.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum H4Estimate<T> {
    Holds { theta: T, k_r: T },
    Violated { reason: String },
}

impl<T: Scalar> FragmentationKernel<T> {
    pub fn power_law(alpha: T, gamma: T) -> Result<Self> {
        let k = Self::PowerLaw { alpha, gamma };
        k.validate()?;
        Ok(k)
    }

    pub fn bounded_constant(gamma0: T) -> Result<Self> {
        let k = Self::BoundedConstant { gamma0 };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::PowerLaw { alpha, gamma } => {
                if !alpha.is_finite() || !gamma.is_finite() {
                    return Err(Error::InvalidSpec(format!(
                        "power-law parameters must be finite (alpha = {alpha}, gamma = {gamma})"
                    )));
                }
                if alpha <= -T::one() {
                    return Err(Error::DivergentFragmentCount { alpha: alpha.to_f64() });
                }
                Ok(())
            }
            Self::BoundedConstant { gamma0 } => {
                if !gamma0.is_finite() || gamma0 < T::zero() {
                    return Err(Error::InvalidSpec(format!("gamma0 must be finite and >= 0, got {gamma0}")));
                }
                Ok(())
            }
        }
    }

    /// Exponent `a` of the breakage function `b(x, y) = (a + 2)/y (x/y)^a`.
    #[inline]
    pub fn breakage_exponent(&self) -> T {
        match *self {
            Self::PowerLaw { alpha, .. } => alpha,
            Self::BoundedConstant { .. } => T::zero(),
        }
    }

    /// `true` when `S` vanishes identically.
    pub fn is_zero(&self) -> bool {
        matches!(*self, Self::BoundedConstant { gamma0 } if gamma0 == T::zero())
    }

    /// `Γ(y, x)`; zero when `x >= y`.
    #[inline]
    pub fn rate(&self, y: T, x: T) -> T {
        if x >= y {
            return T::zero();
        }
        match *self {
            Self::PowerLaw { alpha, gamma } => {
                (alpha + T::lit(2.0)) * x.powf(alpha) * y.powf(gamma - alpha - T::one())
            }
            Self::BoundedConstant { gamma0 } => gamma0,
        }
    }

    /// `S(y)` without domain checks.
    #[inline]
    pub fn selection_unchecked(&self, y: T) -> T {
        match *self {
            Self::PowerLaw { gamma, .. } => y.powf(gamma),
            Self::BoundedConstant { gamma0 } => gamma0 * y * T::lit(0.5),
        }
    }

    /// Selection rate `S(y)`.
    pub fn selection(&self, y: T) -> Result<T> {
        check_parent(y)?;
        Ok(self.selection_unchecked(y))
    }

    /// Breakage density `b(x, y)`; zero for `x >= y`.
    pub fn breakage(&self, x: T, y: T) -> Result<T> {
        check_parent(y)?;
        if !(x > T::zero()) {
            return Err(Error::Domain(format!("fragment volume must be positive, got {x}")));
        }
        if x >= y {
            return Ok(T::zero());
        }
        let a = self.breakage_exponent();
        Ok((a + T::lit(2.0)) / y * (x / y).powf(a))
    }

    /// Expected number of fragments `∫_0^y b(x, y) dx = (a + 2)/(a + 1)`.
    pub fn fragment_count(&self, y: T) -> Result<T> {
        check_parent(y)?;
        self.validate()?;
        let a = self.breakage_exponent();
        Ok((a + T::lit(2.0)) / (a + T::one()))
    }

    /// `∫ b(x, y) dx` over `[lo, hi] ∩ ]0, y[`, in closed form.
    #[inline]
    pub fn number_integral(&self, lo: T, hi: T, y: T) -> T {
        let (lo, hi) = (lo.max(T::zero()), hi.min(y));
        if hi <= lo {
            return T::zero();
        }
        let a1 = self.breakage_exponent() + T::one();
        (a1 + T::one()) / a1 * ((hi / y).powf(a1) - (lo / y).powf(a1))
    }

    /// `∫ x b(x, y) dx` over `[lo, hi] ∩ ]0, y[`, in closed form.
    #[inline]
    pub fn mass_integral(&self, lo: T, hi: T, y: T) -> T {
        let (lo, hi) = (lo.max(T::zero()), hi.min(y));
        if hi <= lo {
            return T::zero();
        }
        let a2 = self.breakage_exponent() + T::lit(2.0);
        y * ((hi / y).powf(a2) - (lo / y).powf(a2))
    }

    /// Integrates `g(x) b(x, y)` over `]0, y[` by quadrature in the variable
    /// `s = (x/y)^(a+1)`, which absorbs the `x^a` endpoint behaviour.
    fn breakage_quadrature<G: Fn(T) -> T>(&self, y: T, g: G, tol: T) -> Result<T> {
        let a1 = self.breakage_exponent() + T::one();
        let inv = T::one() / a1;
        let integrand = |s: T| {
            let x = y * s.powf(inv);
            // dx/ds = y/(a+1) s^(1/(a+1) - 1), written as x / ((a+1) s)
            let jac = x * inv / s;
            let b = self.breakage(x, y).unwrap_or(T::zero());
            g(x) * b * jac
        };
        tanh_sinh(integrand, T::zero(), T::one(), tol)
    }

    /// Residual `|∫_0^y x b(x, y) dx - y|` of the volume identity, by quadrature.
    pub fn breakage_mass_residual(&self, y: T, tol: T) -> Result<T> {
        check_parent(y)?;
        self.validate()?;
        if !(tol > T::zero()) {
            return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
        }
        let m = self.breakage_quadrature(y, |x| x, tol * T::lit(1e-3))?;
        Ok((m - y).abs())
    }

    /// `∫_0^y b(x, y) dx` by quadrature (cross-check of [`fragment_count`](Self::fragment_count)).
    pub fn fragment_count_quadrature(&self, y: T, tol: T) -> Result<T> {
        check_parent(y)?;
        self.validate()?;
        self.breakage_quadrature(y, |_| T::one(), tol)
    }

    /// `∫_0^y (x/y) Γ(y, x) dx` by quadrature (cross-check of the selection rate).
    pub fn selection_quadrature(&self, y: T, tol: T) -> Result<T> {
        check_parent(y)?;
        self.validate()?;
        let a1 = self.breakage_exponent() + T::one();
        let inv = T::one() / a1;
        let integrand = |s: T| {
            let x = y * s.powf(inv);
            let jac = x * inv / s;
            x / y * self.rate(y, x) * jac
        };
        tanh_sinh(integrand, T::zero(), T::one(), tol)
    }

    /// Closed-form (H4) constants `(theta, k(R))` at level `R >= 1`.
    pub fn h4_constants(&self, r: T) -> Result<H4Estimate<T>> {
        if !(r >= T::one()) || !r.is_finite() {
            return Err(Error::Domain(format!("(H4) needs R >= 1, got {r}")));
        }
        match *self {
            Self::BoundedConstant { gamma0 } => Ok(H4Estimate::Holds { theta: T::zero(), k_r: gamma0 }),
            Self::PowerLaw { alpha, gamma } => {
                let a1 = alpha + T::one();
                let two = T::lit(2.0);
                if alpha < T::zero() {
                    return Ok(H4Estimate::Violated {
                        reason: format!("alpha = {alpha} < 0: Γ(y, x) is unbounded as x -> 0"),
                    });
                }
                if gamma >= alpha + two {
                    return Ok(H4Estimate::Violated {
                        reason: format!("gamma = {gamma} >= alpha + 2 = {}: growth too strong", alpha + two),
                    });
                }
                if gamma <= a1 {
                    Ok(H4Estimate::Holds { theta: T::zero(), k_r: (alpha + two) * r.powf(gamma - T::one()) })
                } else {
                    Ok(H4Estimate::Holds { theta: gamma - a1, k_r: (alpha + two) * r.powf(alpha) })
                }
            }
        }
    }

    /// Sampling estimate of the (H4) constants: the smallest ladder exponent
    /// `theta` for which `Γ(y, x) / y^theta` stays bounded on
    /// `x ∈ ]0, R[`, `y ∈ ]R, R·10^decades[`, with `k(R)` its sampled sup.
    pub fn sample_h4_constants(&self, r: T, n_samples: usize, decades: T) -> Result<H4Estimate<T>> {
        if !(r >= T::one()) || n_samples < 4 {
            return Err(Error::Domain("sampling (H4) needs R >= 1 and >= 4 samples".into()));
        }
        let ten = T::lit(10.0);
        let xs = log_space(r * ten.powf(-decades), r * (T::one() - T::lit(1e-9)), n_samples);
        let ys = log_space(r * (T::one() + T::lit(1e-9)), r * ten.powf(decades), n_samples);
        let edge = n_samples / 4;
        let slack = T::one() + T::lit(1e-9);
        for theta in exponent_ladder::<T>() {
            let (mut inner, mut outer) = (T::zero(), T::zero());
            for (i, &x) in xs.iter().enumerate() {
                for (j, &y) in ys.iter().enumerate() {
                    let v = self.rate(y, x) / y.powf(theta);
                    if i < edge || j >= n_samples - edge {
                        outer = outer.max(v);
                    } else {
                        inner = inner.max(v);
                    }
                }
            }
            if outer <= inner * slack {
                return Ok(H4Estimate::Holds { theta, k_r: inner.max(outer) });
            }
        }
        Ok(H4Estimate::Violated { reason: "no exponent below 1 bounds the sampled kernel".into() })
    }

    /// Exact worst case `sup_{y<R} sup_{|E|<=delta} ∫_E Γ(y, x) dx` with
    /// `E ⊂ ]0, min(y, R)[`. May be `+inf` (shattering regime, `gamma < 0`).
    pub fn omega_worst_case(&self, r: T, delta: T) -> T {
        if delta <= T::zero() {
            return T::zero();
        }
        let delta = delta.min(r);
        match *self {
            // Γ is constant in x, so the best set is any set of measure min(delta, y).
            Self::BoundedConstant { gamma0 } => gamma0 * delta,
            Self::PowerLaw { alpha, gamma } => {
                let a1 = alpha + T::one();
                let c = (alpha + T::lit(2.0)) / a1;
                // For y <= delta the whole of ]0, y[ fits: value c y^gamma.
                let small = if gamma > T::zero() {
                    c * delta.powf(gamma)
                } else if gamma == T::zero() {
                    c
                } else {
                    return T::infinity();
                };
                let g = |y: T| -> T {
                    let d = delta.min(y);
                    let frac = if alpha >= T::zero() {
                        // superlevel set is [y - d, y]
                        -((a1 * (-(d / y)).ln_1p()).exp_m1())
                    } else {
                        // superlevel set is [0, d]
                        (d / y).powf(a1)
                    };
                    c * y.powf(gamma) * frac
                };
                small.max(sup_on_interval(g, delta, r))
            }
        }
    }

    /// ω(R, δ) estimate for (H5); see [`omega_worst_case`](Self::omega_worst_case).
    pub fn omega_modulus(&self, r: T, delta: T) -> Result<T> {
        if !(r > T::zero()) || !(delta >= T::zero()) || delta > r {
            return Err(Error::Domain(format!("need R > 0 and 0 <= delta <= R, got R = {r}, delta = {delta}")));
        }
        if let Self::PowerLaw { gamma, .. } = *self {
            if gamma <= T::zero() {
                return Err(Error::BoundUnavailable(format!(
                    "gamma = {gamma} <= 0: the modulus does not vanish as delta -> 0"
                )));
            }
        }
        Ok(self.omega_worst_case(r, delta))
    }

    /// Closed-form (H5) bound: `C(α, γ) R^(γ²/(γ+1)) δ^(γ/(γ+1))` with
    /// `C = (α+2)(1 + α(γ+1))^(-1/(γ+1))` for the power law, `Γ0 δ` for the
    /// bounded family.
    pub fn omega_bound(&self, r: T, delta: T) -> Result<T> {
        match *self {
            Self::BoundedConstant { gamma0 } => Ok(gamma0 * delta),
            Self::PowerLaw { alpha, gamma } => {
                if gamma <= T::zero() {
                    return Err(Error::BoundUnavailable(format!("gamma = {gamma} <= 0")));
                }
                let g1 = gamma + T::one();
                let base = T::one() + alpha * g1;
                if base <= T::zero() {
                    return Err(Error::BoundUnavailable(format!(
                        "1 + alpha (gamma + 1) = {base} <= 0: Hölder exponent not integrable"
                    )));
                }
                let c = (alpha + T::lit(2.0)) * base.powf(-T::one() / g1);
                Ok(c * r.powf(gamma * gamma / g1) * delta.powf(gamma / g1))
            }
        }
    }

    /// `sup_{0<y<R} S(y)`; `+inf` when `S` is unbounded near the origin.
    pub fn selection_sup(&self, r: T) -> T {
        match *self {
            Self::BoundedConstant { gamma0 } => gamma0 * r * T::lit(0.5),
            Self::PowerLaw { gamma, .. } => {
                if gamma > T::zero() {
                    r.powf(gamma)
                } else if gamma == T::zero() {
                    T::one()
                } else {
                    T::infinity()
                }
            }
        }
    }

    /// Sampled sup of `S` over a log-spaced sample of `]0, R[`.
    pub fn sample_selection_sup(&self, r: T, lo: T, n_samples: usize) -> T {
        log_space(lo, r, n_samples.max(2))
            .into_iter()
            .map(|y| self.selection_unchecked(y))
            .fold(T::zero(), T::max)
    }
}

fn check_parent<T: Scalar>(y: T) -> Result<()> {
    if y > T::zero() && y.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("parent volume must be positive and finite, got {y}")))
    }
}

/// Maximum of a smooth function on `[lo, hi]`: log-spaced scan, then a
/// golden-section polish around the best sample.
fn sup_on_interval<T: Scalar, G: Fn(T) -> T>(g: G, lo: T, hi: T) -> T {
    if hi <= lo {
        return g(hi);
    }
    const SCAN: usize = 257;
    let pts = log_space(lo, hi, SCAN);
    let (mut best_i, mut best) = (0, g(pts[0]));
    for (i, &y) in pts.iter().enumerate().skip(1) {
        let v = g(y);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let (mut a, mut b) = (pts[best_i.saturating_sub(1)], pts[(best_i + 1).min(SCAN - 1)]);
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..100 {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - (b - a) * inv_phi;
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + (b - a) * inv_phi;
            gd = g(d);
        }
        if (b - a).abs() <= T::epsilon() * b.abs() {
            break;
        }
    }
    best.max(gc).max(gd)
}
