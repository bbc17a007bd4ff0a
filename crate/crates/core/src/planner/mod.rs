//! Grid-search planners for formation keeping and collision-free maneuvers,
//! and multi-leg mission assembly.

mod cfk;
mod cfm;
mod mission;

pub use cfk::{
    cfk_three_impulse_map, cfk_two_impulse_map, leg_satisfies_ring, max_polar_gap, CellVerdict, CfkScenario,
    FeasibilityMap,
};
pub use cfm::{
    cfm_certify_leg, cfm_leg_report, cfm_plan_tour, distance_range, segment_distance, CfmLegReport, CfmPlan,
    FAR_TRAJECTORY_SAMPLES,
};
pub use mission::{assemble_mission, LegSummary, MissionLeg, MissionSummary, CHAIN_TOLERANCE};
