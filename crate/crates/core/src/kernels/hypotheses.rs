use std::fmt;

use serde::Serialize;

use super::coagulation::{log_space, CoagulationKernel};
use super::fragmentation::{FragmentationKernel, H4Estimate};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Hypothesis {
    H1,
    H2,
    H3,
    H4,
    H5,
    H6,
}

impl Hypothesis {
    pub const ALL: [Hypothesis; 6] = [Self::H1, Self::H2, Self::H3, Self::H4, Self::H5, Self::H6];
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub hypothesis: Hypothesis,
    pub pass: bool,
    /// Description of the first violation found.
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaEntry<T> {
    pub r: T,
    pub delta: T,
    /// Worst-case modulus; `None` when it is infinite.
    pub omega: Option<T>,
    /// Closed-form bound, when one is available.
    pub bound: Option<T>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RegimeFlags {
    /// `gamma == 0` for the power law.
    pub borderline_gamma_zero: bool,
    /// `gamma < 0` for the power law: selection rate blows up at the origin.
    pub shattering: bool,
}

/// Estimated hypothesis constants and per-hypothesis verdicts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport<T> {
    pub mu: T,
    pub k1: T,
    pub growth_sampled: bool,
    pub theta: Option<T>,
    pub k_r: Vec<(T, T)>,
    pub omega: Vec<OmegaEntry<T>>,
    pub fragment_count_bound: T,
    pub selection_sup: Vec<(T, T)>,
    pub verdicts: Vec<Verdict>,
    pub flags: RegimeFlags,
}

impl<T: Scalar> HypothesisReport<T> {
    pub fn verdict(&self, h: Hypothesis) -> &Verdict {
        self.verdicts.iter().find(|v| v.hypothesis == h).expect("all hypotheses reported")
    }

    pub fn passes(&self, h: Hypothesis) -> bool {
        self.verdict(h).pass
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter().filter(|v| !v.pass)
    }

    /// `k(1)` for the moment bound, if (H4) holds at `R = 1`.
    pub fn k_at(&self, r: T) -> Option<T> {
        self.k_r.iter().find(|(rr, _)| *rr == r).map(|(_, k)| *k)
    }
}

/// Sampling parameters for [`hypothesis_report`].
#[derive(Debug, Clone)]
pub struct ReportSampling<T> {
    /// Box for the (H1)/(H2) coagulation samples.
    pub coag_box: (T, T),
    pub coag_samples: usize,
    /// Parent volumes at which the breakage identities are checked.
    pub parents: Vec<T>,
}

impl<T: Scalar> Default for ReportSampling<T> {
    fn default() -> Self {
        Self {
            coag_box: (T::lit(1e-4), T::lit(1e4)),
            coag_samples: 24,
            parents: vec![T::lit(0.1), T::one(), T::lit(10.0)],
        }
    }
}

fn verdict(h: Hypothesis, witness: Option<String>) -> Verdict {
    Verdict { hypothesis: h, pass: witness.is_none(), witness }
}

/// Aggregates all kernel estimators into a [`HypothesisReport`].
///
/// Ladders must be non-empty and increasing. Violations are reported as
/// failing verdicts, never as errors.
pub fn hypothesis_report<T: Scalar>(
    coag: &CoagulationKernel<T>,
    frag: &FragmentationKernel<T>,
    r_ladder: &[T],
    delta_ladder: &[T],
    sampling: &ReportSampling<T>,
) -> HypothesisReport<T> {
    let mut verdicts = Vec::with_capacity(6);

    // (H1)
    let pts = log_space(sampling.coag_box.0, sampling.coag_box.1, sampling.coag_samples);
    let mut h1 = coag.validate().err().map(|e| e.to_string());
    'outer: for &x in &pts {
        for &y in &pts {
            if h1.is_some() {
                break 'outer;
            }
            let (kxy, kyx) = (coag.eval(x, y), coag.eval(y, x));
            if kxy != kyx {
                h1 = Some(format!("K({x}, {y}) = {kxy} != K({y}, {x}) = {kyx}"));
            } else if !(kxy >= T::zero()) {
                h1 = Some(format!("K({x}, {y}) = {kxy} < 0"));
            }
        }
    }
    verdicts.push(verdict(Hypothesis::H1, h1));

    // (H2)
    let (mu, k1, growth_sampled, h2) = match coag.growth_envelope(sampling.coag_box, sampling.coag_samples) {
        Ok(g) => {
            let w = (!g.holds).then(|| format!("growth exponent mu = {} is not below 1", g.mu));
            (g.mu, g.k1, g.sampled, w)
        }
        Err(e) => (T::nan(), T::nan(), true, Some(e.to_string())),
    };
    verdicts.push(verdict(Hypothesis::H2, h2));

    // (H3): validity, support and the volume identity on the parent sample
    let mut h3 = frag.validate().err().map(|e| e.to_string());
    if h3.is_none() {
        for &y in &sampling.parents {
            if frag.rate(y, y * T::lit(1.5)) != T::zero() {
                h3 = Some(format!("Γ({y}, x) nonzero for x > y"));
                break;
            }
            match frag.breakage_mass_residual(y, T::lit(1e-10)) {
                Ok(res) if res <= T::lit(1e-10) * y => {}
                Ok(res) => {
                    h3 = Some(format!("volume identity residual {res} at y = {y}"));
                    break;
                }
                Err(e) => {
                    h3 = Some(e.to_string());
                    break;
                }
            }
        }
    }
    verdicts.push(verdict(Hypothesis::H3, h3));

    // (H4)
    let mut theta = None;
    let mut k_r = Vec::new();
    let mut h4 = None;
    for &r in r_ladder.iter().filter(|&&r| r >= T::one()) {
        match frag.h4_constants(r) {
            Ok(H4Estimate::Holds { theta: t, k_r: k }) => {
                theta = Some(t);
                k_r.push((r, k));
            }
            Ok(H4Estimate::Violated { reason }) => {
                h4 = Some(reason);
                break;
            }
            Err(e) => {
                h4 = Some(e.to_string());
                break;
            }
        }
    }
    if h4.is_none() && k_r.is_empty() {
        h4 = Some("no R >= 1 in the ladder".to_string());
    }
    if h4.is_some() {
        theta = match *frag {
            FragmentationKernel::PowerLaw { alpha, gamma } if alpha >= T::zero() => {
                Some((gamma - alpha - T::one()).max(T::zero()))
            }
            _ => None,
        };
        k_r.clear();
    }
    verdicts.push(verdict(Hypothesis::H4, h4));

    // (H5)
    let mut omega = Vec::new();
    let mut h5 = None;
    if let FragmentationKernel::PowerLaw { gamma, .. } = *frag {
        if gamma <= T::zero() {
            h5 = Some(format!("gamma = {gamma} <= 0: omega(R, delta) does not vanish as delta -> 0"));
        }
    }
    for &r in r_ladder {
        let row: Vec<_> = delta_ladder
            .iter()
            .filter(|&&d| d <= r)
            .map(|&d| {
                let w = frag.omega_worst_case(r, d);
                OmegaEntry { r, delta: d, omega: w.is_finite().then_some(w), bound: frag.omega_bound(r, d).ok() }
            })
            .collect();
        if h5.is_none() {
            if let Some(bad) = row.iter().find(|e| e.omega.is_none()) {
                h5 = Some(format!("omega({}, {}) is infinite", bad.r, bad.delta));
            } else if row.windows(2).any(|w| w[1].omega < w[0].omega) {
                h5 = Some(format!("omega({r}, ·) is not monotone in delta"));
            } else if row.len() >= 2 && row[0].omega >= row[row.len() - 1].omega && row[row.len() - 1].omega > Some(T::zero()) {
                h5 = Some(format!("omega({r}, ·) does not decrease along the delta ladder"));
            }
        }
        omega.extend(row);
    }
    verdicts.push(verdict(Hypothesis::H5, h5));

    // (H6)
    let selection_sup: Vec<_> = r_ladder.iter().map(|&r| (r, frag.selection_sup(r))).collect();
    let h6 = selection_sup
        .iter()
        .find(|(_, s)| !s.is_finite())
        .map(|(r, _)| format!("S is unbounded on ]0, {r}[ (shattering regime)"));
    verdicts.push(verdict(Hypothesis::H6, h6));

    let flags = match *frag {
        FragmentationKernel::PowerLaw { gamma, .. } => RegimeFlags {
            borderline_gamma_zero: gamma == T::zero(),
            shattering: gamma < T::zero(),
        },
        _ => RegimeFlags::default(),
    };
    let fragment_count_bound = frag.fragment_count(T::one()).unwrap_or(T::infinity());

    HypothesisReport {
        mu,
        k1,
        growth_sampled,
        theta,
        k_r,
        omega,
        fragment_count_bound,
        selection_sup,
        verdicts,
        flags,
    }
}
