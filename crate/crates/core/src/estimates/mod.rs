//! Sharp Littlewood-Paley projectors, `X_b` norms, coordinate shears and
//! collapsing operators on discretised space-time kernels, plus empirical
//! probes of the Strichartz-type inequalities on fixed-seed ensembles.
//!
//! Probes report ratios and their stability under a resolution doubling.
//! They never assert a particular constant.

mod collapse;
mod density;
mod probes;
mod projector;
mod shape;
mod shear;
mod xb;

pub use collapse::{collapsing_apply, CollapseResult, CollapseTerm, MIN_COLLAPSE_POINTS};
pub use density::{Cutoff, LowRank, LowRankTerm, Representation, SpaceTimeDensity, TimeAxis, MAX_RANK};
pub use probes::{
    band_limited, collapse_lp_sum, collapse_member, ensemble_member, gaussian_table, lp_norm, plane_wave,
    probe_doubling, probe_inequality, probe_with_scale, str_2body, str_3body, tensor, CollapseDatum,
    DoublingReport, ProbeName, ProbeReport, Sides, COLLAPSE_EPSILON, COLLAPSE_HORIZON, PROBE_BOX, PROBE_PLATEAU,
    PROBE_TIME_POINTS, PROBE_WIDTH_V, PROBE_WIDTH_W,
};
pub use projector::{lp_project, max_grid_frequency, DyadicProjector, LpMode, Projected};
pub use shape::{potential_shape_compare, potential_shape_scan, shape_scan_sizes, ShapeReport, ShapeRow, SHAPE_SAMPLES};
pub use shear::{elementary_shear, shear, Shear};
pub use xb::{cutoff_hb_norm_sq, cutoff_transform, free_evolution_window, xb_norm};
