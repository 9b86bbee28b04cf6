//! Numerical laboratory for translating-soliton graphs.
//!
//! The crate solves the zero-boundary Dirichlet problem for the translator
//! graph equation on rectangles and rectangular annuli (continuation in the
//! conformal metric family plus damped Newton), integrates the rotational
//! soliton ODEs (bowl profile, translating catenoids), extracts renormalized
//! wide-rectangle limits, and counts surface/foliation tangencies with
//! winding-number multiplicities.
//!
//! All computations are seedless and sequential; repeated runs produce
//! byte-identical artifacts.

pub mod closed_form;
pub mod error;
pub mod field;
pub mod grid;
pub mod limits;
pub mod linsolve;
pub mod morse;
pub mod ode;
pub mod plot;
pub mod residual;
pub mod solver;
pub mod verify;

pub use closed_form::{tilt_slope, ClosedFormFamily};
pub use error::{Error, Result};
pub use field::HeightField;
pub use grid::{make_annular_domain, make_rectangle_domain, GridDomain, NodeTag, ShapeMeta};
pub use limits::{
    extract_delta_wing, linear_height_check, measure_tilt, run_sweep, DeltaWingResult, HalfPlane,
    LimitSweep, SweepGrid, WindowSpec,
};
pub use morse::{
    count_critical_points_graph, count_critical_points_rotational, morse_rado_rhs, BoundaryCurve,
    CriticalPointReport, FoliationFunction, GraphKind,
};
pub use ode::{bowl_profile, catenoid_profile, necksize_rotational, ProfileCurve, RadialProfile};
pub use residual::{ilmanen_area, translator_residual, translator_residual_divergence};
pub use solver::{
    argmax_node, compare_fields, solve, solve_annulus_family, symmetrize_check, Solution,
    SolverConfig,
};
