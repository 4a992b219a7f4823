//! Shared fixtures for the criterion benches.

use gradwave::{GradedStructure, Grid, SimulationConfig, StepOrder};

/// 1-D run on `points` modes with the scan's data and step.
pub fn line_config(points: usize, order: StepOrder) -> SimulationConfig {
    let grid = Grid::new(vec![2000.0], vec![points]).expect("valid grid");
    let mut c = SimulationConfig::new(GradedStructure::isotropic(1, 1), grid, 3.0, 0.01, 0.25, 0.5, 1e4);
    c.order = order;
    c
}

/// 2-D run on the anisotropic structure with weights (1, 2).
pub fn plane_config(points: usize, order: StepOrder) -> SimulationConfig {
    let gs = GradedStructure::new(vec![1, 2], vec![1.0, 1.0], 2).expect("valid structure");
    let grid = Grid::new(vec![200.0, 200.0], vec![points, points]).expect("valid grid");
    let mut c = SimulationConfig::new(gs, grid, 2.0, 0.05, 0.5, 0.1, 1e3);
    c.order = order;
    c.dealias = true;
    c
}
