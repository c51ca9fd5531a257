//! Adaptive explicit integration of the truncated system.
//!
//! The state vector is the cell densities plus one extra component holding
//! the accumulated dust volume. The dust component is advanced with the same
//! Runge–Kutta stages as the densities, so the discrete volume
//! `M_1 + dust` is conserved up to roundoff on every accepted step.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::NumberDensity;
use crate::rhs::Rhs;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativityPolicy {
    /// Reject any step producing a cell value below `-abs_tol` and halve `dt`.
    /// Smaller negative values are set to zero and their volume is logged.
    #[default]
    RejectAndHalve,
    /// Accept, clip negative cells to zero, and record the clipped volume.
    ClipAndLog,
}

/// Omitted fields deserialize to the values of [`SolverConfig::new`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct SolverConfig<T> {
    pub t_end: T,
    #[serde(default = "default_dt_init")]
    pub dt_init: T,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: T,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: T,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default)]
    pub negativity: NegativityPolicy,
}

fn default_dt_init<T: Scalar>() -> T {
    T::lit(1e-3)
}

fn default_rel_tol<T: Scalar>() -> T {
    T::lit(1e-8)
}

fn default_abs_tol<T: Scalar>() -> T {
    T::lit(1e-14)
}

fn default_max_steps() -> usize {
    1_000_000
}

impl<T: Scalar> SolverConfig<T> {
    pub fn new(t_end: T) -> Self {
        Self {
            t_end,
            dt_init: default_dt_init(),
            rel_tol: default_rel_tol(),
            abs_tol: default_abs_tol(),
            max_steps: default_max_steps(),
            negativity: NegativityPolicy::RejectAndHalve,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSolverConfig(m));
        if !(self.t_end > T::zero()) || !self.t_end.is_finite() {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.dt_init > T::zero()) {
            return bad(format!("dt_init must be positive, got {}", self.dt_init));
        }
        if !(self.rel_tol > T::zero()) || !(self.abs_tol > T::zero()) {
            return bad("tolerances must be positive".into());
        }
        if self.max_steps == 0 {
            return bad("max_steps must be >= 1".into());
        }
        Ok(())
    }
}

/// Moments recorded after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSample<T> {
    pub t: T,
    pub m0: T,
    pub m1: T,
    pub m2: T,
    pub dust_mass: T,
}

const HISTORY: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationState<T> {
    pub density: NumberDensity<T>,
    pub t: T,
    pub dust_mass: T,
    pub step_count: usize,
    pub rejected_steps: usize,
    /// Volume removed by clipping (only under [`NegativityPolicy::ClipAndLog`]).
    pub clipped_mass: T,
    /// Discrete `M_1` of the initial density.
    pub initial_mass: T,
    /// Largest `|M_1 + dust + clipped - M_1(0)|` seen so far.
    pub max_conservation_error: T,
    /// Most recent moment samples, oldest first.
    pub history: VecDeque<MomentSample<T>>,
}

impl<T: Scalar> SimulationState<T> {
    pub fn new(density: NumberDensity<T>) -> Self {
        let initial_mass = density.moment(1);
        let t = density.time;
        Self {
            density,
            t,
            dust_mass: T::zero(),
            step_count: 0,
            rejected_steps: 0,
            clipped_mass: T::zero(),
            initial_mass,
            max_conservation_error: T::zero(),
            history: VecDeque::with_capacity(HISTORY),
        }
    }

    /// `M_1(t) + dust(t) + clipped(t) − M_1(0)`.
    pub fn conservation_error(&self) -> T {
        self.density.moment(1) + self.dust_mass + self.clipped_mass - self.initial_mass
    }

    pub fn sample(&self) -> MomentSample<T> {
        MomentSample {
            t: self.t,
            m0: self.density.moment(0),
            m1: self.density.moment(1),
            m2: self.density.moment(2),
            dust_mass: self.dust_mass,
        }
    }

    fn record(&mut self) {
        if self.history.len() == HISTORY {
            self.history.pop_front();
        }
        let s = self.sample();
        self.history.push_back(s);
        let e = (s.m1 + self.dust_mass + self.clipped_mass - self.initial_mass).abs();
        self.max_conservation_error = self.max_conservation_error.max(e);
    }
}

/// Per-step record passed to observers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord<T> {
    pub step: usize,
    pub t: T,
    pub dt: T,
    pub error_norm: T,
    pub min_value: T,
    pub m0: T,
    pub m1: T,
    pub dust_mass: T,
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Error-controlled stepper bound to one right-hand side.
#[derive(Debug)]
pub struct Integrator<'a, T> {
    rhs: &'a Rhs<T>,
    cfg: SolverConfig<T>,
    dt: T,
    /// Stage derivatives; `k[0]` holds the first-same-as-last derivative.
    k: [Vec<T>; 7],
    kd: [T; 7],
    fsal_valid: bool,
    stage: Vec<T>,
    y_new: Vec<T>,
    fw: Vec<T>,
    a: [[T; 6]; 7],
    e: [T; 7],
}

impl<'a, T: Scalar> Integrator<'a, T> {
    pub fn new(rhs: &'a Rhs<T>, cfg: SolverConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let m = rhs.grid().len();
        let mut a = [[T::zero(); 6]; 7];
        for (row, src) in a.iter_mut().zip(A.iter()) {
            for (v, s) in row.iter_mut().zip(src) {
                *v = T::lit(*s);
            }
        }
        Ok(Self {
            rhs,
            cfg,
            dt: cfg.dt_init,
            k: std::array::from_fn(|_| vec![T::zero(); m]),
            kd: [T::zero(); 7],
            fsal_valid: false,
            stage: vec![T::zero(); m],
            y_new: vec![T::zero(); m],
            fw: Vec::with_capacity(m),
            a,
            e: E.map(T::lit),
        })
    }

    pub fn config(&self) -> &SolverConfig<T> {
        &self.cfg
    }

    /// Proposed size of the next step.
    pub fn dt(&self) -> T {
        self.dt
    }

    /// Takes one accepted step, never past `t_limit`. Rejected attempts are
    /// retried internally with smaller steps.
    pub fn step(&mut self, state: &mut SimulationState<T>, t_limit: T) -> Result<StepRecord<T>> {
        let m = state.density.values.len();
        let floor = T::lit(1e-14) * self.cfg.t_end;
        let tiny = T::epsilon() * T::lit(16.0) * state.t.abs().max(T::one());
        if !self.fsal_valid {
            let rhs = self.rhs;
            self.kd[0] = rhs.derivative(&state.density.values, &mut self.fw, &mut self.k[0]);
            self.fsal_valid = true;
        }
        loop {
            if state.step_count >= self.cfg.max_steps {
                return Err(Error::MaxSteps { max_steps: self.cfg.max_steps, t: state.t.to_f64() });
            }
            let remaining = t_limit - state.t;
            let landing = self.dt >= remaining - tiny;
            let h = if landing { remaining } else { self.dt };
            if h < floor && !landing {
                let cell = self.worst_cell(state);
                return Err(Error::StiffnessFailure { t: state.t.to_f64(), dt: h.to_f64(), cell });
            }

            let y = &state.density.values;
            for s in 1..7 {
                for i in 0..m {
                    let mut acc = T::zero();
                    for (r, kr) in self.k.iter().enumerate().take(s) {
                        acc += self.a[s][r] * kr[i];
                    }
                    self.stage[i] = y[i] + h * acc;
                }
                let rhs = self.rhs;
                self.kd[s] = rhs.derivative(&self.stage, &mut self.fw, &mut self.k[s]);
            }
            // k[6] was evaluated at the 5th-order solution, which is stage 6.
            self.y_new.copy_from_slice(&self.stage);

            let mut worst = (T::zero(), 0usize);
            for i in 0..m {
                let mut err = T::zero();
                for r in 0..7 {
                    err += self.e[r] * self.k[r][i];
                }
                let sc = self.cfg.abs_tol + self.cfg.rel_tol * y[i].abs().max(self.y_new[i].abs());
                let q = h * err / sc;
                if q.abs() > worst.0 {
                    worst = (q.abs(), i);
                }
            }
            let mut dust_err = T::zero();
            let mut dust_inc = T::zero();
            for r in 0..7 {
                dust_err += self.e[r] * self.kd[r];
                dust_inc += self.a[6].get(r).copied().unwrap_or(T::zero()) * self.kd[r];
            }
            let dust_new = state.dust_mass + h * dust_inc;
            let dsc = self.cfg.abs_tol + self.cfg.rel_tol * state.dust_mass.abs().max(dust_new.abs());
            // Max norm: cells that stay negligibly small do not dilute the estimate,
            // so runs on nested grids take the same steps.
            let err_norm = worst.0.max((h * dust_err / dsc).abs());

            let fac = if err_norm == T::zero() {
                T::lit(5.0)
            } else {
                (T::lit(0.9) * err_norm.powf(T::lit(-0.2))).min(T::lit(5.0)).max(T::lit(0.2))
            };

            if !(err_norm <= T::one()) {
                state.rejected_steps += 1;
                self.dt = h * fac.min(T::one());
                if self.dt < floor {
                    return Err(Error::StiffnessFailure { t: state.t.to_f64(), dt: self.dt.to_f64(), cell: worst.1 });
                }
                continue;
            }

            let mut min_val = T::infinity();
            let mut min_cell = 0;
            for (i, &v) in self.y_new.iter().enumerate() {
                if v < min_val {
                    min_val = v;
                    min_cell = i;
                }
            }
            if min_val < T::zero() {
                if self.cfg.negativity == NegativityPolicy::RejectAndHalve && min_val < -self.cfg.abs_tol {
                    state.rejected_steps += 1;
                    self.dt = h * T::lit(0.5);
                    if self.dt < floor {
                        return Err(Error::StiffnessFailure { t: state.t.to_f64(), dt: self.dt.to_f64(), cell: min_cell });
                    }
                    continue;
                }
                let g = state.density.grid().clone();
                for (i, v) in self.y_new.iter_mut().enumerate() {
                    if *v < T::zero() {
                        state.clipped_mass += -*v * g.pivots()[i] * g.widths()[i];
                        *v = T::zero();
                    }
                }
            }

            // accept
            let clipped = min_val < T::zero();
            std::mem::swap(&mut state.density.values, &mut self.y_new);
            if clipped {
                let rhs = self.rhs;
                self.kd[6] = rhs.derivative(&state.density.values, &mut self.fw, &mut self.k[6]);
            }
            self.k.swap(0, 6);
            self.kd[0] = self.kd[6];
            state.t = if landing { t_limit } else { state.t + h };
            state.density.time = state.t;
            state.dust_mass = dust_new;
            state.step_count += 1;
            state.record();
            if !landing {
                self.dt = h * fac;
            }
            let last = state.history.back().copied().expect("just recorded");
            return Ok(StepRecord {
                step: state.step_count,
                t: state.t,
                dt: h,
                error_norm: err_norm,
                min_value: min_val.max(T::zero()),
                m0: last.m0,
                m1: last.m1,
                dust_mass: state.dust_mass,
            });
        }
    }

    fn worst_cell(&self, state: &SimulationState<T>) -> usize {
        state
            .density
            .values
            .iter()
            .zip(&self.k[0])
            .enumerate()
            .map(|(i, (&v, &d))| (i, d.abs() / (self.cfg.abs_tol + self.cfg.rel_tol * v.abs())))
            .fold((0, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best })
            .0
    }
}

/// Snapshots at the requested output times.
#[derive(Debug, Clone, Default)]
pub struct Trajectory<T> {
    pub snapshots: Vec<SimulationState<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn last(&self) -> Option<&SimulationState<T>> {
        self.snapshots.last()
    }

    pub fn at(&self, t: T) -> Option<&SimulationState<T>> {
        self.snapshots.iter().find(|s| s.t == t)
    }

    /// Largest `|M_1 + dust + clipped − M_1(0)|` over all snapshots.
    pub fn max_conservation_error(&self) -> T {
        self.snapshots.iter().fold(T::zero(), |m, s| m.max(s.max_conservation_error))
    }
}

/// Integration failure carrying everything computed before the error.
#[derive(Debug, Clone)]
pub struct IntegrationFailure<T> {
    pub error: Error,
    pub partial: Trajectory<T>,
}

impl<T> std::fmt::Display for IntegrationFailure<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({} snapshots before failure)", self.error, self.partial.snapshots.len())
    }
}

impl<T: std::fmt::Debug> std::error::Error for IntegrationFailure<T> {}

/// Integrates from `f0` and returns the states at `output_times`
/// (sorted, within `[t0, t_end]`).
pub fn integrate<T: Scalar>(
    f0: NumberDensity<T>,
    cfg: SolverConfig<T>,
    rhs: &Rhs<T>,
    output_times: &[T],
) -> std::result::Result<Trajectory<T>, IntegrationFailure<T>> {
    integrate_with(f0, cfg, rhs, output_times, |_| {})
}

/// [`integrate`] with a per-step observer.
pub fn integrate_with<T: Scalar, F: FnMut(&StepRecord<T>)>(
    f0: NumberDensity<T>,
    cfg: SolverConfig<T>,
    rhs: &Rhs<T>,
    output_times: &[T],
    mut observer: F,
) -> std::result::Result<Trajectory<T>, IntegrationFailure<T>> {
    let fail = |error, partial| IntegrationFailure { error, partial };
    let mut traj = Trajectory::default();
    let mut integ = match Integrator::new(rhs, cfg) {
        Ok(i) => i,
        Err(e) => return Err(fail(e, traj)),
    };
    if f0.values.len() != rhs.grid().len() {
        return Err(fail(Error::GridMismatch("initial density and operator grids differ".into()), traj));
    }
    let mut state = SimulationState::new(f0);
    state.record();
    if output_times.windows(2).any(|w| w[1] < w[0])
        || output_times.iter().any(|&t| t < state.t || t > cfg.t_end || !t.is_finite())
    {
        return Err(fail(
            Error::InvalidSolverConfig("output times must be sorted and lie in [t0, t_end]".into()),
            traj,
        ));
    }
    for &t_out in output_times {
        while state.t < t_out {
            match integ.step(&mut state, t_out) {
                Ok(rec) => observer(&rec),
                Err(e) => return Err(fail(e, traj)),
            }
        }
        traj.snapshots.push(state.clone());
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{project_initial, GridKind, InitialData, VolumeGrid};
    use crate::kernels::{CoagulationKernel, FragmentationKernel};
    use crate::truncation::TruncationParams;
    use std::sync::Arc;

    fn setup(coag: f64, frag: Option<(f64, f64)>, cpd: usize) -> (Rhs<f64>, NumberDensity<f64>) {
        let g = Arc::new(VolumeGrid::build(1e-6, 64.0, GridKind::Geometric { cells_per_decade: cpd }).unwrap());
        let f0 = project_initial(&InitialData::exponential(1.0), g.clone()).unwrap();
        let frag = match frag {
            Some((a, gm)) => FragmentationKernel::power_law(a, gm).unwrap(),
            None => FragmentationKernel::bounded_constant(0.0).unwrap(),
        };
        let rhs = Rhs::new(g, CoagulationKernel::Constant { c: coag }, frag, TruncationParams::new(64.0).unwrap()).unwrap();
        (rhs, f0)
    }

    #[test]
    fn zero_density_only_advances_time() {
        let (rhs, f0) = setup(1.0, Some((0.0, 1.0)), 5);
        let zero = NumberDensity::zeros(f0.grid().clone());
        let traj = integrate(zero, SolverConfig::new(1.0), &rhs, &[0.5, 1.0]).unwrap();
        let s = traj.last().unwrap();
        assert_eq!(s.t, 1.0);
        assert!(s.density.values.iter().all(|&v| v == 0.0));
        assert_eq!(s.dust_mass, 0.0);
    }

    #[test]
    fn inert_kernels_keep_density_fixed() {
        let (rhs, f0) = setup(0.0, None, 5);
        let traj = integrate(f0.clone(), SolverConfig::new(2.0), &rhs, &[1.0, 2.0]).unwrap();
        assert_eq!(traj.last().unwrap().density.values, f0.values);
    }

    #[test]
    fn constant_kernel_number_decay() {
        let (rhs, f0) = setup(1.0, None, 10);
        let m00 = f0.moment(0);
        let cfg = SolverConfig::new(2.0);
        let traj = integrate(f0, cfg, &rhs, &[2.0]).unwrap();
        let m0 = traj.last().unwrap().density.moment(0);
        // discrete dM0/dt = -M0^2/2 exactly (up to the last-cell correction)
        let expect = 2.0 * m00 / (2.0 + 2.0 * m00);
        assert!((m0 - expect).abs() <= 1e-8 * 10.0, "{m0} vs {expect}");
        assert!((m0 - 0.5).abs() <= 1e-3);
    }

    #[test]
    fn linear_fragmentation_number_growth() {
        let (rhs, f0) = setup(0.0, Some((0.0, 1.0)), 40);
        let traj = integrate(f0, SolverConfig::new(1.0), &rhs, &[1.0]).unwrap();
        let m0 = traj.last().unwrap().density.moment(0);
        assert!((m0 - 2.0).abs() <= 1e-3, "{m0}");
    }

    #[test]
    fn mixed_run_conserves_volume() {
        let (rhs, f0) = setup(1.0, Some((0.0, 1.0)), 10);
        let m1 = f0.moment(1);
        let traj = integrate(f0, SolverConfig::new(4.0), &rhs, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        for s in &traj.snapshots {
            assert!(s.conservation_error().abs() <= 1e-8 * m1);
            assert!(s.density.min_value() >= 0.0);
        }
        assert!(traj.max_conservation_error() <= 1e-8 * m1);
    }

    #[test]
    fn clip_policy_records_clipped_volume() {
        let (rhs, f0) = setup(1.0, Some((0.0, 1.0)), 5);
        let mut cfg = SolverConfig::new(1.0);
        cfg.negativity = NegativityPolicy::ClipAndLog;
        cfg.rel_tol = 1e-3;
        let traj = integrate(f0, cfg, &rhs, &[1.0]).unwrap();
        let s = traj.last().unwrap();
        assert!(s.clipped_mass >= 0.0);
        assert!(s.density.min_value() >= 0.0);
    }

    #[test]
    fn step_budget_and_config_errors() {
        let (rhs, f0) = setup(1.0, Some((0.0, 1.0)), 5);
        let mut cfg = SolverConfig::new(1.0);
        cfg.max_steps = 2;
        let err = integrate(f0.clone(), cfg, &rhs, &[0.001, 1.0]).unwrap_err();
        assert!(matches!(err.error, Error::MaxSteps { .. }));
        assert!(err.partial.snapshots.len() <= 1);
        let mut cfg = SolverConfig::new(1.0);
        cfg.rel_tol = 0.0;
        assert!(matches!(integrate(f0.clone(), cfg, &rhs, &[1.0]).unwrap_err().error, Error::InvalidSolverConfig(_)));
        let err = integrate(f0, SolverConfig::new(1.0), &rhs, &[2.0]).unwrap_err();
        assert!(matches!(err.error, Error::InvalidSolverConfig(_)));
    }

    #[test]
    fn stiff_problem_reports_underflow() {
        // S(x) = x^-0.5 on a floor of 1e-30: rates ~1e15 with a tiny step floor
        let g = Arc::new(VolumeGrid::build(1e-30, 1.0, GridKind::Geometric { cells_per_decade: 2 }).unwrap());
        let f0 = project_initial(&InitialData::exponential(1.0), g.clone()).unwrap();
        let frag = FragmentationKernel::power_law(0.0, -0.5).unwrap();
        let rhs = Rhs::new(g, CoagulationKernel::Constant { c: 0.0 }, frag, TruncationParams::new(1.0).unwrap()).unwrap();
        let mut cfg = SolverConfig::new(1.0);
        cfg.dt_init = 1e-20;
        cfg.max_steps = 50;
        let err = integrate(f0, cfg, &rhs, &[1.0]).unwrap_err();
        assert!(matches!(err.error, Error::StiffnessFailure { .. } | Error::MaxSteps { .. }), "{err}");
    }

    #[test]
    fn f32_run() {
        let g = Arc::new(VolumeGrid::<f32>::build(1e-3, 16.0, GridKind::Geometric { cells_per_decade: 6 }).unwrap());
        let f0 = project_initial(&InitialData::exponential(1.0f32), g.clone()).unwrap();
        let rhs = Rhs::new(
            g,
            CoagulationKernel::Constant { c: 1.0f32 },
            FragmentationKernel::power_law(0.0f32, 1.0).unwrap(),
            TruncationParams::new(16.0f32).unwrap(),
        )
        .unwrap();
        let mut cfg = SolverConfig::new(1.0f32);
        cfg.rel_tol = 1e-4;
        cfg.abs_tol = 1e-8;
        let traj = integrate(f0, cfg, &rhs, &[1.0]).unwrap();
        let s = traj.last().unwrap();
        assert!(s.conservation_error().abs() < 1e-4);
    }
}
