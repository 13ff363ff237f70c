//! End-to-end orchestration: deterministic method selection, the phase-1
//! design workflow with validate-retry ladders, phase-2 deployment with
//! online adaptation, evaluation metrics, and the persisted message trace.

mod criteria;
mod deploy;
mod design;
mod retry;
mod select;
pub mod trace;

pub use criteria::{
    canonical_drift_param, default_scenarios, evaluate_criteria, feasible_reference,
    identity_model, j_settle, j_track, oracle_run, tau_dom, Criterion1, Criterion3,
    EvaluationResult, ScenarioMetrics, SystemCategory,
};
pub use deploy::{
    run_adaptive, AdaptiveOutcome, DisturbanceSpec, DriftEvent, EstimatorMode, MeasurementNoise,
    PlantSpec, ReferenceSpec, Scenario,
};
pub use design::{run_design, DesignBundle, DesignFailure};
pub use retry::{validate_retry, RetryOutcome};
pub use select::{select_methods, MethodSelection};
pub use trace::{RunTrace, TraceMessage};
