//! Two wireless applications of the fixed-point machinery: load coupling in
//! OFDMA networks and uplink power control with receive beamforming.

pub mod hata;
pub mod load;
pub mod pencil;
pub mod power;

pub use hata::{hata_path_loss_db, hata_urban_gain, validity_warnings, HataParams, HataWarning};
pub use load::{
    asymptotic_matrix, generate_scenario, load_mapping, run_load_experiment, AsymptoticLoadMatrix, Layout,
    LoadExperiment, LoadExperimentOptions, LoadMapping, LoadParams, LoadScenario, ScenarioSpec,
};
pub use pencil::{pencil_lambda_max, pencil_lambda_max_dense, PencilOptions, PencilSolution};
pub use power::{
    capped_mapping, generate_power_scenario, interference_mapping, solve_power_control, BeamformingSolution,
    InterferenceMapping, PowerControlResult, PowerOptions, PowerScenario, PowerScenarioSpec, UserSolution,
};
