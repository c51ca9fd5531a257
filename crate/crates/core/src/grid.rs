//! Volume grids, cell-averaged number densities, initial-data projection and
//! per-cell breakage integrals.

use std::io::{self, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::FragmentationKernel;
use crate::scalar::{compensated_sum, format_exact, CompensatedSum, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridKind {
    /// Ratio `10^(1/cells_per_decade)` between consecutive edges.
    Geometric { cells_per_decade: usize },
    Uniform { cells: usize },
}

/// Partition of `[x_0, x_M]` into cells with arithmetic-midpoint pivots.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeGrid<T> {
    edges: Vec<T>,
    pivots: Vec<T>,
    widths: Vec<T>,
}

impl<T: Scalar> VolumeGrid<T> {
    /// Builds a geometric or uniform grid on `[xmin, n]`.
    ///
    /// Geometric edges are `xmin r^k`; the last edge is clamped to `n`, and a
    /// trailing sliver narrower than half a ratio step is merged into its
    /// neighbour.
    pub fn build(xmin: T, n: T, kind: GridKind) -> Result<Self> {
        if !(xmin > T::zero()) || !n.is_finite() || xmin >= n {
            return Err(Error::InvalidGrid(format!("need 0 < xmin < n, got xmin = {xmin}, n = {n}")));
        }
        let edges = match kind {
            GridKind::Geometric { cells_per_decade } => {
                if cells_per_decade == 0 {
                    return Err(Error::InvalidGrid("cells_per_decade must be >= 1".into()));
                }
                let step = T::one() / T::from_usize(cells_per_decade);
                let ten = T::lit(10.0);
                let half_ratio = ten.powf(step * T::lit(0.5));
                let mut edges = vec![xmin];
                let mut k = 1usize;
                loop {
                    let e = xmin * ten.powf(step * T::from_usize(k));
                    if e * half_ratio > n {
                        break;
                    }
                    edges.push(e);
                    k += 1;
                }
                edges.push(n);
                edges
            }
            GridKind::Uniform { cells } => {
                if cells == 0 {
                    return Err(Error::InvalidGrid("uniform grid needs >= 1 cell".into()));
                }
                let h = (n - xmin) / T::from_usize(cells);
                let mut edges: Vec<T> = (0..cells).map(|i| xmin + h * T::from_usize(i)).collect();
                edges.push(n);
                edges
            }
        };
        Self::from_edges(edges)
    }

    /// Grid from explicit edges; `edges[0]` may be zero.
    pub fn from_edges(edges: Vec<T>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::InvalidGrid("a grid needs at least two edges".into()));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges[0] < T::zero() {
            return Err(Error::InvalidGrid("edges must be finite and non-negative".into()));
        }
        if let Some(w) = edges.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!("edges not strictly increasing at {} -> {}", w[0], w[1])));
        }
        let half = T::lit(0.5);
        let pivots = edges.windows(2).map(|w| (w[0] + w[1]) * half).collect();
        let widths = edges.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(Self { edges, pivots, widths })
    }

    pub fn len(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pivots.is_empty()
    }

    pub fn edges(&self) -> &[T] {
        &self.edges
    }

    pub fn pivots(&self) -> &[T] {
        &self.pivots
    }

    pub fn widths(&self) -> &[T] {
        &self.widths
    }

    /// Lowest resolved volume `x_0`.
    pub fn xmin(&self) -> T {
        self.edges[0]
    }

    /// Upper edge `x_M`.
    pub fn xmax(&self) -> T {
        self.edges[self.edges.len() - 1]
    }

    /// Index of the cell containing `x` (cells are half-open `[e_i, e_{i+1})`).
    pub fn cell_of(&self, x: T) -> Option<usize> {
        if x < self.xmin() || x >= self.xmax() {
            return None;
        }
        Some(self.edges.partition_point(|&e| e <= x) - 1)
    }
}

/// A profile that can be integrated against `x^p` over an interval.
pub trait DensityProfile<T: Scalar> {
    /// `∫_lo^hi x^p f(x) dx` for `p ∈ {0, 1, 2}`; `hi` may be `+inf`.
    fn moment_over(&self, lo: T, hi: T, p: u32) -> T;

    /// `‖f‖ = ∫ (1 + x) f dx` over `]0, ∞[`.
    fn norm(&self) -> T {
        self.moment_over(T::zero(), T::infinity(), 0) + self.moment_over(T::zero(), T::infinity(), 1)
    }
}

/// Closed-form or tabulated initial data `f_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub enum InitialData<T> {
    Zero,
    /// `amplitude * exp(-lambda x)`.
    Exponential {
        lambda: T,
        #[serde(default = "one")]
        amplitude: T,
    },
    /// `number` particles of volume `x`.
    Monodisperse { x: T, number: T },
    /// Piecewise-linear through `(x, f)` points, zero outside their range.
    Tabulated { points: Vec<[T; 2]> },
}

fn one<T: Scalar>() -> T {
    T::one()
}

impl<T: Scalar> InitialData<T> {
    pub fn exponential(lambda: T) -> Self {
        Self::Exponential { lambda, amplitude: T::one() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInitialData(m));
        match self {
            Self::Zero => Ok(()),
            Self::Exponential { lambda, amplitude } => {
                if !(lambda.is_finite() && *lambda > T::zero()) {
                    return bad(format!("lambda = {lambda} gives infinite norm"));
                }
                if !(amplitude.is_finite() && *amplitude >= T::zero()) {
                    return bad(format!("amplitude = {amplitude} must be finite and >= 0"));
                }
                Ok(())
            }
            Self::Monodisperse { x, number } => {
                if !(x.is_finite() && *x > T::zero()) || !(number.is_finite() && *number >= T::zero()) {
                    return bad(format!("monodisperse needs x > 0 and number >= 0, got ({x}, {number})"));
                }
                Ok(())
            }
            Self::Tabulated { points } => {
                if points.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
                    return bad("tabulated points must be finite".into());
                }
                if points.iter().any(|p| p[1] < T::zero()) {
                    return bad("tabulated density values must be non-negative".into());
                }
                if points.iter().any(|p| p[0] <= T::zero()) {
                    return bad("tabulated volumes must be positive".into());
                }
                if points.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return bad("tabulated volumes must be strictly increasing".into());
                }
                Ok(())
            }
        }
    }

    /// Pointwise value (zero for the monodisperse atom).
    pub fn eval(&self, x: T) -> T {
        match self {
            Self::Zero | Self::Monodisperse { .. } => T::zero(),
            Self::Exponential { lambda, amplitude } => *amplitude * (-*lambda * x).exp(),
            Self::Tabulated { points } => {
                if points.is_empty() || x < points[0][0] || x > points[points.len() - 1][0] {
                    return T::zero();
                }
                let i = points.partition_point(|p| p[0] <= x).clamp(1, points.len() - 1);
                let ([x0, f0], [x1, f1]) = (points[i - 1], points[i]);
                f0 + (f1 - f0) * (x - x0) / (x1 - x0)
            }
        }
    }
}

/// `∫_lo^hi x^p e^{-λx} dx` with the finite-interval difference taken without cancellation.
fn exp_moment<T: Scalar>(lambda: T, lo: T, hi: T, p: u32) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    // Antiderivative factor P(x) with F(x) = -P(x) e^{-λx}.
    let poly = |x: T| match p {
        0 => one / lambda,
        1 => x / lambda + one / (lambda * lambda),
        _ => x * x / lambda + two * x / (lambda * lambda) + two / (lambda * lambda * lambda),
    };
    let elo = (-lambda * lo).exp();
    if hi.is_infinite() {
        return poly(lo) * elo;
    }
    // P(lo) e^{-λlo} - P(hi) e^{-λhi} = e^{-λlo} [P(lo) - P(hi) + P(hi)(1 - e^{-λ(hi-lo)})]
    let decay = -(-lambda * (hi - lo)).exp_m1();
    elo * (poly(lo) - poly(hi) + poly(hi) * decay)
}

impl<T: Scalar> DensityProfile<T> for InitialData<T> {
    fn moment_over(&self, lo: T, hi: T, p: u32) -> T {
        let lo = lo.max(T::zero());
        if hi <= lo {
            return T::zero();
        }
        match self {
            Self::Zero => T::zero(),
            Self::Exponential { lambda, amplitude } => *amplitude * exp_moment(*lambda, lo, hi, p),
            Self::Monodisperse { x, number } => {
                if *x >= lo && *x < hi {
                    *number * x.powi(p as i32)
                } else {
                    T::zero()
                }
            }
            Self::Tabulated { points } => {
                let mut acc = CompensatedSum::new();
                for w in points.windows(2) {
                    let ([x0, f0], [x1, f1]) = (w[0], w[1]);
                    let (a, b) = (x0.max(lo), x1.min(hi));
                    if b <= a {
                        continue;
                    }
                    // f(x) = c0 + c1 x on the segment; integrate x^p (c0 + c1 x) exactly.
                    let c1 = (f1 - f0) / (x1 - x0);
                    let c0 = f0 - c1 * x0;
                    let pw = |k: i32| (b.powi(k) - a.powi(k)) / T::from_usize(k as usize);
                    let pp = p as i32;
                    acc.add(c0 * pw(pp + 1) + c1 * pw(pp + 2));
                }
                acc.value()
            }
        }
    }
}

/// Cell-averaged number density on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NumberDensity<T> {
    grid: Arc<VolumeGrid<T>>,
    pub values: Vec<T>,
    pub time: T,
}

impl<T: Scalar> NumberDensity<T> {
    pub fn zeros(grid: Arc<VolumeGrid<T>>) -> Self {
        let values = vec![T::zero(); grid.len()];
        Self { grid, values, time: T::zero() }
    }

    pub fn from_values(grid: Arc<VolumeGrid<T>>, values: Vec<T>, time: T) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} values for {} cells", values.len(), grid.len())));
        }
        Ok(Self { grid, values, time })
    }

    pub fn grid(&self) -> &Arc<VolumeGrid<T>> {
        &self.grid
    }

    /// `Σ pivot^p value width`, compensated, in ascending cell order.
    pub fn moment(&self, p: u32) -> T {
        let g = &*self.grid;
        compensated_sum(
            g.pivots
                .iter()
                .zip(&g.widths)
                .zip(&self.values)
                .map(|((&x, &w), &v)| x.powi(p as i32) * v * w),
        )
    }

    /// Discrete `‖f‖ = M_0 + M_1`.
    pub fn norm(&self) -> T {
        self.moment(0) + self.moment(1)
    }

    pub fn min_value(&self) -> T {
        self.values.iter().fold(T::infinity(), |m, &v| m.min(v))
    }

    /// `∫_r^{x_M} f dx`, counting the covered fraction of a straddling cell.
    pub fn tail_number(&self, r: T) -> T {
        let g = &*self.grid;
        compensated_sum(g.edges.windows(2).zip(&self.values).map(|(e, &v)| {
            let lo = e[0].max(r);
            if e[1] > lo {
                v * (e[1] - lo)
            } else {
                T::zero()
            }
        }))
    }

    /// Restriction to `]0, n[`: cells beyond `n` are zeroed and a straddling
    /// cell keeps only the covered fraction of its content.
    pub fn truncated(&self, n: T) -> Self {
        let g = &*self.grid;
        let values = g
            .edges
            .windows(2)
            .zip(&self.values)
            .map(|(e, &v)| {
                if e[1] <= n {
                    v
                } else if e[0] >= n {
                    T::zero()
                } else {
                    v * (n - e[0]) / (e[1] - e[0])
                }
            })
            .collect();
        Self { grid: self.grid.clone(), values, time: self.time }
    }

    /// Writes `cell_left,cell_right,pivot,value` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "cell_left,cell_right,pivot,value")?;
        let g = &*self.grid;
        for i in 0..g.len() {
            let row = [g.edges[i], g.edges[i + 1], g.pivots[i], self.values[i]].map(format_exact);
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Cell averages of `f0` on `grid` via exact cell integrals.
pub fn project_density<T: Scalar, P: DensityProfile<T> + ?Sized>(
    f0: &P,
    grid: Arc<VolumeGrid<T>>,
) -> NumberDensity<T> {
    let values = grid
        .edges
        .windows(2)
        .zip(&grid.widths)
        .map(|(e, &w)| f0.moment_over(e[0], e[1], 0) / w)
        .collect();
    NumberDensity { grid, values, time: T::zero() }
}

/// Validated projection of closed-form initial data.
pub fn project_initial<T: Scalar>(f0: &InitialData<T>, grid: Arc<VolumeGrid<T>>) -> Result<NumberDensity<T>> {
    f0.validate()?;
    Ok(project_density(f0, grid))
}

/// Per-(parent, daughter) integrals of the breakage function over the grid.
///
/// For parent pivot `y_j` and daughter cell `i <= j`,
/// `number[j][i] = ∫ b(x, y_j) dx` and `mass[j][i] = ∫ x b(x, y_j) dx` over
/// `cell_i ∩ ]0, y_j[`. Daughter cells above the parent pivot contribute
/// nothing and are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct BreakageTable<T> {
    pub number: Vec<Vec<T>>,
    pub mass: Vec<Vec<T>>,
    /// Fragment mass per event landing below `x_0`: `y (x_0/y)^(a+2)`.
    pub dust_mass: Vec<T>,
}

impl<T: Scalar> BreakageTable<T> {
    pub fn build(frag: &FragmentationKernel<T>, grid: &VolumeGrid<T>) -> Result<Self> {
        frag.validate()?;
        let m = grid.len();
        let e = &grid.edges;
        let mut number = Vec::with_capacity(m);
        let mut mass = Vec::with_capacity(m);
        let mut dust_mass = Vec::with_capacity(m);
        for (j, &y) in grid.pivots.iter().enumerate() {
            number.push((0..=j).map(|i| frag.number_integral(e[i], e[i + 1], y)).collect());
            mass.push((0..=j).map(|i| frag.mass_integral(e[i], e[i + 1], y)).collect());
            dust_mass.push(frag.mass_integral(T::zero(), e[0], y));
        }
        Ok(Self { number, mass, dust_mass })
    }
}
