//! Coagulation and multiple-fragmentation kernels, their structural
//! identities, and numerical estimates of the well-posedness constants.

mod coagulation;
mod fragmentation;
mod hypotheses;

pub use coagulation::{exponent_ladder, CoagulationKernel, GrowthEnvelope, TabulatedKernel};
pub use fragmentation::{FragmentationKernel, H4Estimate};
pub use hypotheses::{
    hypothesis_report, Hypothesis, HypothesisReport, OmegaEntry, RegimeFlags, ReportSampling, Verdict,
};
