//! W-state generation and state-transfer protocols on the star network.

pub mod transfer;
pub mod w_state;

pub use transfer::{fidelity_curve, make_transfer_program, FidelityCurve, TransferProgram};
pub use w_state::{
    apply_phase_correction, fluctuation_sweep, generation_error, plan_w_from_center, plan_w_from_center_network,
    plan_w_from_site, ratio_from_phase, Branch, FluctuationPoint, RatioAnchor, SiteWRequest, WGenerationPlan, WSource,
};
