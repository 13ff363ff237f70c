//! The persisted agent-message trace. One JSON object per message, with the
//! exact field names of the inter-agent schemas, appended in workflow order.

use crate::monitor::AdaptAction;
use crate::rom::RomMethod;
use crate::systems::{
    ControlObjective, Dimensions, InputBounds, Linearity, Physics, SystemType, TimeConstants,
};
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplingBlock {
    pub f_s_recommended_hz: f64,
    pub dt_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrequencyContent {
    pub f_max_hz: f64,
    pub dominant_modes_hz: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodSelections {
    pub rom_method: RomMethod,
    pub rom_rationale: String,
    pub controller_type: crate::control::ControllerKind,
    pub controller_rationale: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LqrWeights {
    #[serde(rename = "Q_structure")]
    pub q_structure: String,
    pub rho: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignParameters {
    pub rom_order_range: [usize; 2],
    pub lqr_weights: LqrWeights,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstraintsBlock {
    pub input_bounds: InputBounds,
}

/// Specification-and-selection message opening every run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CentralMessage {
    pub system_type: SystemType,
    pub physics: Physics,
    pub linearity: Linearity,
    pub dimensions: Dimensions,
    pub time_constants: TimeConstants,
    pub sampling_requirements: SamplingBlock,
    pub frequency_content: FrequencyContent,
    pub control_objective: ControlObjective,
    pub constraints: ConstraintsBlock,
    pub method_selections: MethodSelections,
    pub design_parameters: DesignParameters,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArrayRef {
    pub path: String,
    pub shape: [usize; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub size_mb: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataProducts {
    pub snapshot_matrix: ArrayRef,
    pub measurements: ArrayRef,
    pub control_inputs: ArrayRef,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QualityAssessment {
    pub snr_db: f64,
    pub condition_number_correlation: f64,
    pub coverage: f64,
    pub rank_99_percent: usize,
    pub overall_quality: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplingInfo {
    pub f_s_hz: f64,
    pub dt_s: f64,
    #[serde(rename = "T_total_s")]
    pub t_total_s: f64,
    #[serde(rename = "M_samples")]
    pub m_samples: usize,
    pub excitation_type: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RomRecommendations {
    pub suggested_rom_order_range: [usize; 2],
    pub typical_rom_order: usize,
    pub energy_threshold: f64,
    pub expected_speedup: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeAgentSummary {
    pub num_iterations: usize,
    pub issues_resolved: Vec<String>,
}

/// Data-collection handoff.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataMessage {
    pub agent_name: String,
    pub task_completed: bool,
    pub rom_method: RomMethod,
    pub data_products: DataProducts,
    pub quality_assessment: QualityAssessment,
    pub sampling_info: SamplingInfo,
    pub rom_recommendations: RomRecommendations,
    pub code_agent_summary: CodeAgentSummary,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RomOperators {
    #[serde(rename = "A_d")]
    pub a_d: ArrayRef,
    #[serde(rename = "B_d")]
    pub b_d: ArrayRef,
    #[serde(rename = "C_r")]
    pub c_r: ArrayRef,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RomPerformanceMetrics {
    pub truncation_achieved: f64,
    pub stability_margin_continuous: f64,
    pub stability_margin_discrete: f64,
    #[serde(rename = "output_error_L2")]
    pub output_error_l2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequency_mismatch: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speedup_factor: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscretizationBlock {
    pub method: String,
    #[serde(rename = "T_s_used")]
    pub t_s_used: f64,
    #[serde(rename = "T_s_adapted")]
    pub t_s_adapted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adaptation_reason: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorBounds {
    #[serde(rename = "L2")]
    pub l2: f64,
    #[serde(rename = "Hinf", skip_serializing_if = "Option::is_none")]
    pub hinf: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerformanceCertificates {
    pub validation_passed: bool,
    pub error_bounds: ErrorBounds,
}

/// Reduced-model handoff.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RomMessage {
    pub agent_name: String,
    pub task_completed: bool,
    pub rom_method: RomMethod,
    pub rom_dimension: usize,
    pub basis: ArrayRef,
    pub operators: RomOperators,
    pub estimator: ArrayRef,
    pub performance_metrics: RomPerformanceMetrics,
    pub discretization: DiscretizationBlock,
    pub performance_certificates: PerformanceCertificates,
    pub code_agent_summary: CodeAgentSummary,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ControlDesignParameters {
    #[serde(rename = "Q")]
    pub q: String,
    pub rho: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ControlPerformanceMetrics {
    pub closed_loop_stable: bool,
    pub stability_margin_discrete: f64,
    pub dare_residual: f64,
    pub gain_norm: f64,
    pub gain_margin_db: f64,
    pub phase_margin_deg: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ControlLawBlock {
    #[serde(rename = "type")]
    pub kind: String,
    pub saturation: String,
    pub bounds: InputBounds,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuningInfo {
    pub rho_current: f64,
    pub rho_adjustable: bool,
    #[serde(rename = "Q_structure")]
    pub q_structure: String,
}

/// Controller handoff.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ControlMessage {
    pub agent_name: String,
    pub task_completed: bool,
    pub controller_type: crate::control::ControllerKind,
    pub gain_matrix: ArrayRef,
    pub design_parameters: ControlDesignParameters,
    pub performance_metrics: ControlPerformanceMetrics,
    pub control_law: ControlLawBlock,
    pub tuning_info: TuningInfo,
    pub code_agent_summary: CodeAgentSummary,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsCurrent {
    pub e_k: f64,
    pub rho_k: f64,
    pub s_k: f64,
    pub lambda_max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowedAverages {
    pub e_avg: f64,
    pub rho_avg: f64,
    pub s_avg: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Thresholds {
    pub e_good: f64,
    pub rho_good: f64,
    pub lambda_stable: f64,
}

/// Monitoring verdict with all metrics inside bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalGoodMessage {
    pub agent_name: String,
    pub verdict: String,
    pub timestamp: f64,
    pub performance_acceptable: bool,
    pub metrics_current: MetricsCurrent,
    pub windowed_averages: WindowedAverages,
    pub thresholds: Thresholds,
    pub decision: String,
    pub workflow_status: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalDiagnostics {
    pub rho_avg: f64,
    pub e_avg: f64,
    pub s_avg: f64,
    pub lambda_max: f64,
    pub rank_recent: usize,
    pub rank_nominal: usize,
    pub subspace_angle_deg: f64,
    pub persistence_windows: usize,
    pub stability_margin_db: f64,
    pub current_rom_method: RomMethod,
    pub current_controller_type: crate::control::ControllerKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoutingBlock {
    pub target_agent: String,
    pub action: AdaptAction,
    pub reason: String,
    pub priority: String,
    pub method_change_recommended: bool,
}

/// Monitoring verdict requesting adaptation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalAdaptMessage {
    pub agent_name: String,
    pub verdict: String,
    pub condition_triggered: String,
    pub timestamp: f64,
    pub windowed_averages: WindowedAverages,
    pub diagnostics: EvalDiagnostics,
    pub routing: RoutingBlock,
    pub adaptation_required: bool,
    pub next_action: String,
}

/// Record of one executed adaptation action.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdaptEventMessage {
    pub step: usize,
    pub condition: String,
    pub action: AdaptAction,
    pub parameters_before: BTreeMap<String, f64>,
    pub parameters_after: BTreeMap<String, f64>,
    pub certificates: BTreeMap<String, f64>,
}

/// One line of the run trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TraceMessage {
    Data(DataMessage),
    Rom(RomMessage),
    Control(ControlMessage),
    EvalAdapt(EvalAdaptMessage),
    EvalGood(EvalGoodMessage),
    AdaptEvent(AdaptEventMessage),
    Central(CentralMessage),
}

/// Ordered message log plus per-phase bookkeeping.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunTrace {
    pub messages: Vec<TraceMessage>,
    pub iteration_counts: BTreeMap<String, usize>,
    pub escalations: Vec<String>,
}

impl RunTrace {
    pub fn push(&mut self, msg: TraceMessage) {
        self.messages.push(msg);
    }
}
