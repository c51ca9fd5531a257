//! The four operators of the truncated equation on a sectional grid.
//!
//! * `q1`: coagulation birth, `½∫₀ˣ K_n(x−y, y) f(x−y) f(y) dy`
//! * `q2`: coagulation death, `∫ K_n(x, y) f(x) f(y) dy`
//! * `q3`: fragmentation death, `S_n(x) f(x)`
//! * `q4`: fragmentation birth, `∫ₓ b(x, y) S_n(y) f(y) dy`
//!
//! Products of both processes are placed on the two pivots bracketing their
//! volume with weights that conserve number and volume exactly (fixed-pivot
//! allocation). Where no upper pivot exists, only volume is conserved.
//! Fragments below the first edge are counted as dust.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{BreakageTable, NumberDensity, VolumeGrid};
use crate::kernels::{CoagulationKernel, FragmentationKernel};
use crate::scalar::{compensated_sum, Scalar};
use crate::truncation::TruncationParams;

/// Per-cell operator values (density per unit time), all non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsTerms<T> {
    pub q1: Vec<T>,
    pub q2: Vec<T>,
    pub q3: Vec<T>,
    pub q4: Vec<T>,
    /// Volume per unit time carried by fragments below the grid floor.
    pub dust_mass_rate: T,
}

impl<T: Scalar> RhsTerms<T> {
    /// `q1 − q2 − q3 + q4`.
    pub fn composite(&self) -> Vec<T> {
        (0..self.q1.len()).map(|i| self.q1[i] - self.q2[i] - self.q3[i] + self.q4[i]).collect()
    }
}

/// One coagulating pair `(i <= j)` and where its aggregate lands.
#[derive(Debug, Clone, Copy)]
struct PairTarget<T> {
    i: u32,
    j: u32,
    lo: u32,
    hi: u32,
    /// Density-rate coefficients: `K_n · sym · weight / width` for each target.
    c_lo: T,
    c_hi: T,
}

/// Two-pivot split `(lo, hi, number_lo, number_hi)` of `number` particles of
/// total volume `number * v`.
fn split<T: Scalar>(pivots: &[T], v: T, number: T) -> (usize, usize, T, T) {
    let m = pivots.len();
    if v < pivots[0] {
        return (0, 0, number * v / pivots[0], T::zero());
    }
    if v >= pivots[m - 1] {
        return (m - 1, m - 1, number * v / pivots[m - 1], T::zero());
    }
    let k = pivots.partition_point(|&p| p <= v) - 1;
    let (a, b) = (pivots[k], pivots[k + 1]);
    let hi_w = (v - a) / (b - a);
    let lo_w = (b - v) / (b - a);
    (k, k + 1, number * lo_w, number * hi_w)
}

/// Precomputed right-hand side for one `(grid, K, Γ, n)` combination.
#[derive(Debug, Clone)]
pub struct Rhs<T> {
    grid: Arc<VolumeGrid<T>>,
    coag: CoagulationKernel<T>,
    frag: FragmentationKernel<T>,
    trunc: TruncationParams<T>,
    table: BreakageTable<T>,
    pairs: Vec<PairTarget<T>>,
    /// Row-major `K_n(x_i, x_j)`.
    kernel: Vec<T>,
    /// `S_n` at each pivot.
    selection: Vec<T>,
    /// Row-major by parent: fragment number delivered to each pivot per event.
    frag_alloc: Vec<T>,
    /// First daughter cell with a nonzero allocation, per parent.
    frag_first: Vec<usize>,
}

impl<T: Scalar> Rhs<T> {
    pub fn new(
        grid: Arc<VolumeGrid<T>>,
        coag: CoagulationKernel<T>,
        frag: FragmentationKernel<T>,
        trunc: TruncationParams<T>,
    ) -> Result<Self> {
        coag.validate()?;
        let table = BreakageTable::build(&frag, &grid)?;
        let m = grid.len();
        let x = grid.pivots();
        let w = grid.widths();
        let half = T::lit(0.5);

        let mut kernel = vec![T::zero(); m * m];
        let mut pairs = Vec::new();
        for i in 0..m {
            for j in i..m {
                let k = trunc.coagulation(&coag, x[i], x[j]);
                kernel[i * m + j] = k;
                kernel[j * m + i] = k;
                if k == T::zero() {
                    continue;
                }
                let sym = if i == j { half } else { T::one() };
                let (lo, hi, n_lo, n_hi) = split(x, x[i] + x[j], k * sym);
                pairs.push(PairTarget {
                    i: i as u32,
                    j: j as u32,
                    lo: lo as u32,
                    hi: hi as u32,
                    c_lo: n_lo / w[lo],
                    c_hi: n_hi / w[hi],
                });
            }
        }

        let selection: Vec<T> = x.iter().map(|&y| trunc.selection(&frag, y)).collect();
        let mut frag_alloc = vec![T::zero(); m * m];
        let mut frag_first = vec![m; m];
        for j in 0..m {
            let row = &mut frag_alloc[j * m..(j + 1) * m];
            for i in 0..=j {
                let (num, mass) = (table.number[j][i], table.mass[j][i]);
                if num <= T::zero() {
                    continue;
                }
                let (lo, hi, n_lo, n_hi) = split(&x[..=j], mass / num, num);
                row[lo] += n_lo;
                row[hi] += n_hi;
                frag_first[j] = frag_first[j].min(lo);
            }
        }

        Ok(Self { grid, coag, frag, trunc, table, pairs, kernel, selection, frag_alloc, frag_first })
    }

    pub fn grid(&self) -> &Arc<VolumeGrid<T>> {
        &self.grid
    }

    pub fn coagulation(&self) -> &CoagulationKernel<T> {
        &self.coag
    }

    pub fn fragmentation(&self) -> &FragmentationKernel<T> {
        &self.frag
    }

    pub fn truncation(&self) -> TruncationParams<T> {
        self.trunc
    }

    pub fn breakage_table(&self) -> &BreakageTable<T> {
        &self.table
    }

    /// `S_n` at the pivots.
    pub fn selection(&self) -> &[T] {
        &self.selection
    }

    fn number_per_cell(&self, f: &[T]) -> Vec<T> {
        f.iter().zip(self.grid.widths()).map(|(&v, &w)| v * w).collect()
    }

    fn check_len(&self, f: &[T]) -> Result<()> {
        if f.len() != self.grid.len() {
            return Err(Error::GridMismatch(format!("{} values for {} cells", f.len(), self.grid.len())));
        }
        Ok(())
    }

    fn add_coag_birth(&self, fw: &[T], out: &mut [T]) {
        for p in &self.pairs {
            let prod = fw[p.i as usize] * fw[p.j as usize];
            out[p.lo as usize] += p.c_lo * prod;
            out[p.hi as usize] += p.c_hi * prod;
        }
    }

    fn coag_loss_factor(&self, i: usize, fw: &[T]) -> T {
        let m = fw.len();
        let row = &self.kernel[i * m..(i + 1) * m];
        let mut acc = T::zero();
        for (k, n) in row.iter().zip(fw) {
            acc += *k * *n;
        }
        acc
    }

    /// Adds `q4` into `out`; returns the dust volume rate.
    fn add_frag_birth(&self, fw: &[T], out: &mut [T]) -> T {
        let m = fw.len();
        let w = self.grid.widths();
        let mut dust = T::zero();
        for j in 0..m {
            let events = self.selection[j] * fw[j];
            if events == T::zero() {
                continue;
            }
            dust += events * self.table.dust_mass[j];
            let row = &self.frag_alloc[j * m..(j + 1) * m];
            for k in self.frag_first[j]..=j {
                out[k] += row[k] * events / w[k];
            }
        }
        dust
    }

    pub fn coag_birth(&self, f: &[T]) -> Result<Vec<T>> {
        self.check_len(f)?;
        let fw = self.number_per_cell(f);
        let mut out = vec![T::zero(); f.len()];
        self.add_coag_birth(&fw, &mut out);
        Ok(out)
    }

    pub fn coag_death(&self, f: &[T]) -> Result<Vec<T>> {
        self.check_len(f)?;
        let fw = self.number_per_cell(f);
        Ok((0..f.len()).map(|i| f[i] * self.coag_loss_factor(i, &fw)).collect())
    }

    pub fn frag_death(&self, f: &[T]) -> Result<Vec<T>> {
        self.check_len(f)?;
        Ok(f.iter().zip(&self.selection).map(|(&v, &s)| s * v).collect())
    }

    /// `q4` and the dust volume rate.
    pub fn frag_birth(&self, f: &[T]) -> Result<(Vec<T>, T)> {
        self.check_len(f)?;
        let fw = self.number_per_cell(f);
        let mut out = vec![T::zero(); f.len()];
        let dust = self.add_frag_birth(&fw, &mut out);
        Ok((out, dust))
    }

    pub fn terms(&self, f: &NumberDensity<T>) -> Result<RhsTerms<T>> {
        if !Arc::ptr_eq(f.grid(), &self.grid) && **f.grid() != *self.grid {
            return Err(Error::GridMismatch("density and operator grids differ".into()));
        }
        let v = &f.values;
        let (q4, dust_mass_rate) = self.frag_birth(v)?;
        Ok(RhsTerms { q1: self.coag_birth(v)?, q2: self.coag_death(v)?, q3: self.frag_death(v)?, q4, dust_mass_rate })
    }

    /// Composite rate `q1 − q2 − q3 + q4` written into `out`; returns the
    /// dust volume rate. This is the solver's hot path.
    pub fn derivative(&self, f: &[T], fw: &mut Vec<T>, out: &mut [T]) -> T {
        let m = f.len();
        fw.clear();
        fw.extend(f.iter().zip(self.grid.widths()).map(|(&v, &w)| v * w));
        for o in out.iter_mut() {
            *o = T::zero();
        }
        self.add_coag_birth(fw, out);
        let dust = self.add_frag_birth(fw, out);
        for i in 0..m {
            let loss = self.coag_loss_factor(i, fw) + self.selection[i];
            out[i] -= f[i] * loss;
        }
        dust
    }

    /// `Σ x_i r_i w_i` for a per-cell rate `r`.
    pub fn volume_rate(&self, r: &[T]) -> T {
        let g = &*self.grid;
        compensated_sum(g.pivots().iter().zip(g.widths()).zip(r).map(|((&x, &w), &v)| x * v * w))
    }

    /// `Σ r_i w_i` for a per-cell rate `r`.
    pub fn number_rate(&self, r: &[T]) -> T {
        compensated_sum(self.grid.widths().iter().zip(r).map(|(&w, &v)| v * w))
    }
}

/// All four operators and the composite for a one-off evaluation.
pub fn full_rhs<T: Scalar>(
    f: &NumberDensity<T>,
    coag: &CoagulationKernel<T>,
    frag: &FragmentationKernel<T>,
    trunc: TruncationParams<T>,
) -> Result<RhsTerms<T>> {
    Rhs::new(f.grid().clone(), coag.clone(), *frag, trunc)?.terms(f)
}
