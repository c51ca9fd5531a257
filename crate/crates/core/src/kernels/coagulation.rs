use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Exponent ladder `{0, 0.05, ..., 0.95}` searched by the sampling estimators.
pub fn exponent_ladder<T: Scalar>() -> impl Iterator<Item = T> {
    (0..20).map(|k| T::from_usize(k) / T::lit(20.0))
}

/// Coagulation kernel `K(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CoagulationKernel<T> {
    /// `K = c`.
    Constant { c: T },
    /// `K = x^mu y^nu + x^nu y^mu`.
    Sum { mu: T, nu: T },
    /// `K = x^mu y^mu`.
    Product { mu: T },
    /// Bounded kernel given on a table; see [`TabulatedKernel`].
    Tabulated(TabulatedKernel<T>),
}

/// Kernel tabulated on a square grid of volume knots.
///
/// Evaluation is bilinear in `ln x`, `ln y` and clamps to the table edge
/// outside the knot range, so the kernel is bounded by its largest entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedKernel<T> {
    pub knots: Vec<T>,
    /// Row-major `values[i][j] = K(knots[i], knots[j])`.
    pub values: Vec<Vec<T>>,
}

impl<T: Scalar> TabulatedKernel<T> {
    fn validate(&self) -> Result<()> {
        let m = self.knots.len();
        if m == 0 {
            return Err(Error::InvalidSpec("tabulated kernel has no knots".into()));
        }
        if self.knots.iter().any(|k| !k.is_finite() || *k <= T::zero()) {
            return Err(Error::InvalidSpec("tabulated knots must be finite and positive".into()));
        }
        if self.knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSpec("tabulated knots must be strictly increasing".into()));
        }
        if self.values.len() != m || self.values.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidSpec(format!("tabulated values must be {m}x{m}")));
        }
        if self.values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("tabulated values must be finite".into()));
        }
        Ok(())
    }

    /// Bracketing index and weight of the upper knot, in log space.
    fn locate(&self, x: T) -> (usize, T) {
        let k = &self.knots;
        let m = k.len();
        if m == 1 || x <= k[0] {
            return (0, T::zero());
        }
        if x >= k[m - 1] {
            return (m - 2, T::one());
        }
        let i = k.partition_point(|&v| v <= x) - 1;
        let (lo, hi) = (k[i].ln(), k[i + 1].ln());
        (i, (x.ln() - lo) / (hi - lo))
    }

    pub fn eval(&self, x: T, y: T) -> T {
        let v = &self.values;
        if self.knots.len() == 1 {
            return v[0][0];
        }
        let (i, a) = self.locate(x);
        let (j, b) = self.locate(y);
        let one = T::one();
        v[i][j] * (one - a) * (one - b)
            + v[i + 1][j] * a * (one - b)
            + v[i][j + 1] * (one - a) * b
            + v[i + 1][j + 1] * a * b
    }

    pub fn max_value(&self) -> T {
        self.values.iter().flatten().fold(T::zero(), |m, &v| m.max(v))
    }
}

/// Result of the (H2) growth-envelope estimate
/// `K(x, y) <= k1^2 (1 + x)^mu (1 + y)^mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthEnvelope<T> {
    pub mu: T,
    pub k1: T,
    /// `true` when `mu < 1`, i.e. the envelope satisfies (H2).
    pub holds: bool,
    /// `true` when the constants come from sampling rather than a closed form.
    pub sampled: bool,
}

impl<T: Scalar> CoagulationKernel<T> {
    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |name: &str, v: T| {
            if !v.is_finite() {
                Err(Error::InvalidSpec(format!("{name} must be finite, got {v}")))
            } else if v < T::zero() {
                Err(Error::InvalidSpec(format!("{name} must be non-negative, got {v}")))
            } else {
                Ok(())
            }
        };
        match self {
            Self::Constant { c } => finite_nonneg("c", *c),
            Self::Sum { mu, nu } => finite_nonneg("mu", *mu).and(finite_nonneg("nu", *nu)),
            Self::Product { mu } => finite_nonneg("mu", *mu),
            Self::Tabulated(t) => t.validate(),
        }
    }

    /// `K(x, y)`. Assumes a validated kernel and positive volumes.
    #[inline]
    pub fn eval(&self, x: T, y: T) -> T {
        match self {
            Self::Constant { c } => *c,
            Self::Sum { mu, nu } => x.powf(*mu) * y.powf(*nu) + x.powf(*nu) * y.powf(*mu),
            Self::Product { mu } => (x * y).powf(*mu),
            Self::Tabulated(t) => t.eval(x, y),
        }
    }

    /// Checked evaluation: validates the kernel and the arguments first.
    pub fn try_eval(&self, x: T, y: T) -> Result<T> {
        self.validate()?;
        if !(x > T::zero() && y > T::zero()) {
            return Err(Error::Domain(format!("K(x, y) needs x, y > 0, got ({x}, {y})")));
        }
        Ok(self.eval(x, y))
    }

    /// `true` for the identically zero kernel.
    pub fn is_zero(&self) -> bool {
        match self {
            Self::Constant { c } => *c == T::zero(),
            Self::Tabulated(t) => t.max_value() == T::zero(),
            _ => false,
        }
    }

    /// Closed-form `(mu, k1)` for the built-in families; tabulated kernels
    /// fall back to [`sample_growth_envelope`](Self::sample_growth_envelope)
    /// over `sample_box` with `n_samples` points per axis.
    pub fn growth_envelope(&self, sample_box: (T, T), n_samples: usize) -> Result<GrowthEnvelope<T>> {
        let closed = |mu: T, k1: T| GrowthEnvelope { mu, k1, holds: mu < T::one(), sampled: false };
        match self {
            Self::Constant { c } => Ok(closed(T::zero(), c.sqrt())),
            // x^a y^b + x^b y^a <= 2 (1+x)^m (1+y)^m with m = max(a, b)
            Self::Sum { mu, nu } => Ok(closed(mu.max(*nu), T::lit(2.0).sqrt())),
            Self::Product { mu } => Ok(closed(*mu, T::one())),
            Self::Tabulated(_) => self.sample_growth_envelope(sample_box, n_samples),
        }
    }

    /// Sampling estimate of the (H2) envelope.
    ///
    /// For each exponent on the ladder the smallest `k1` covering the sample
    /// is computed; an exponent is accepted once the covering ratio does not
    /// keep growing in the outermost quarter of the (log-spaced) sample.
    pub fn sample_growth_envelope(&self, sample_box: (T, T), n_samples: usize) -> Result<GrowthEnvelope<T>> {
        let (lo, hi) = sample_box;
        if !(lo > T::zero() && hi > lo) || n_samples < 2 {
            return Err(Error::Domain("sample box must satisfy 0 < lo < hi with >= 2 samples".into()));
        }
        let pts = log_space(lo, hi, n_samples);
        let outer = n_samples - n_samples.div_ceil(4);
        let slack = T::one() + T::lit(1e-12);
        let mut last = None;
        for mu in exponent_ladder::<T>() {
            let mut inner_max = T::zero();
            let mut outer_max = T::zero();
            for (i, &x) in pts.iter().enumerate() {
                for (j, &y) in pts.iter().enumerate() {
                    let r = self.eval(x, y) / ((T::one() + x) * (T::one() + y)).powf(mu);
                    if i.max(j) >= outer {
                        outer_max = outer_max.max(r);
                    } else {
                        inner_max = inner_max.max(r);
                    }
                }
            }
            let k1 = inner_max.max(outer_max).sqrt();
            if outer_max <= inner_max * slack {
                return Ok(GrowthEnvelope { mu, k1, holds: true, sampled: true });
            }
            last = Some(k1);
        }
        Ok(GrowthEnvelope { mu: T::one(), k1: last.unwrap_or(T::zero()), holds: false, sampled: true })
    }
}

pub(crate) fn log_space<T: Scalar>(lo: T, hi: T, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let last = T::from_usize(n - 1);
    (0..n).map(|i| (a + (b - a) * T::from_usize(i) / last).exp()).collect()
}
