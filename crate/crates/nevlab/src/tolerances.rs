//! Pinned numerical tolerances. Every threshold used by a verdict lives here.

/// Magnitudes above this are reported as pole-like.
pub const OVERFLOW_GUARD: f64 = 1e300;
/// Distance to a known singularity below which evaluation is flagged.
pub const NEAR_SINGULAR: f64 = 1e-9;
/// A denominator is rejected when it is this small at every probe.
pub const DIV_ZERO_PROBE: f64 = 1e-13;
/// Number of probes used for identically-zero denominators.
pub const DIV_PROBES: usize = 8;
/// Seed for every probe sequence in the crate.
pub const PROBE_SEED: u64 = 0x5eed_1e57;

/// Number of Laurent coefficients carried by series arithmetic.
pub const SERIES_TERMS: usize = 48;
/// A series coefficient is zero when below this fraction of its magnitude scale.
pub const SERIES_ZERO_REL: f64 = 1e-10;
/// Local variable scale for series: `h = SERIES_RHO * t`.
pub const SERIES_RHO: f64 = 1e-3;
/// Points closer than this to a lattice point are snapped onto it.
pub const LATTICE_SNAP: f64 = 1e-9;

/// Records of the same kind closer than this are merged.
pub const MERGE_TOL: f64 = 1e-9;
/// Candidate roots of polynomial denominators closer than this are clustered.
pub const POLY_CLUSTER_TOL: f64 = 1e-5;
/// Maximum quadtree depth.
pub const MAX_DEPTH: usize = 60;
/// Maximum number of quadtree cells per query.
pub const MAX_CELLS: usize = 200_000;
/// Cells at or below this diameter are accepted without further splitting.
pub const MIN_CELL: f64 = 1e-6;
/// Winding numbers must lie this close to an integer.
pub const WINDING_INT_TOL: f64 = 1e-3;
/// Known singularities must stay this far from a cell boundary.
pub const BOUNDARY_CLEARANCE: f64 = 1e-7;
/// Maximum perturbation of the root box.
pub const BOX_PERTURB: f64 = 1e-5;
/// Retries for a split line or box perturbation.
pub const SPLIT_RETRIES: usize = 8;
/// Newton step acceptance, relative to `1 + |z|`.
pub const NEWTON_STEP_TOL: f64 = 1e-13;

/// Singularities within `NUDGE_TRIGGER * r` of the circle force a nudge.
pub const NUDGE_TRIGGER: f64 = 1e-8;
/// Outward nudge factors tried in order.
pub const NUDGE_FACTORS: [f64; 3] = [1.0 + 1e-6, 1.0 + 1e-5, 1.0 + 1e-4];
/// Default relative tolerance of circle means.
pub const QUAD_REL_TOL: f64 = 1e-8;
/// Angles of singularities this close to the circle become breakpoints.
pub const BREAKPOINT_BAND: f64 = 0.5;

/// Cap on pair multiplicities.
pub const K_MAX: u32 = 16;
/// Residual for the a-pair precondition.
pub const PAIR_RESIDUAL: f64 = 1e-8;
/// Two located points match under a shift when closer than this.
pub const PAIR_MATCH: f64 = 1e-7;

/// Minimum samples for growth estimators.
pub const MIN_SAMPLES: usize = 24;
/// Minimum decades spanned by a growth grid.
pub const MIN_DECADES: f64 = 1.0;
/// Fraction of radii that may be discarded as exceptional.
pub const MAX_DISCARD: f64 = 0.2;
/// Tail fraction used by robust limits.
pub const TAIL_FRACTION: f64 = 0.1;
/// Minimum tail length.
pub const TAIL_MIN: usize = 3;
/// Sliding-window length for slope estimators.
pub const SLOPE_WINDOW: usize = 8;
/// Smallness pass thresholds.
pub const SMALL_PASS_RATIO: f64 = 0.1;
pub const SMALL_PASS_SLOPE: f64 = 0.02;
/// Smallness fail thresholds.
pub const SMALL_FAIL_RATIO: f64 = 0.5;
pub const SMALL_FAIL_SLOPE: f64 = -0.05;
/// Ratios this far below the pass threshold are indistinguishable from zero in the trend fit.
pub const TREND_FLOOR: f64 = 1e-3 * SMALL_PASS_RATIO;

/// A fitted constant is stable when decade maxima agree within this factor.
pub const K_STABILITY: f64 = 2.0;
/// Minimum fraction of retained radii on which an inequality must hold.
pub const HOLD_FRACTION: f64 = 0.8;
/// Relative threshold for the c-periodicity test.
pub const PERIODIC_REL: f64 = 1e-10;
/// Probes used by the c-periodicity test.
pub const PERIODIC_PROBES: usize = 20;
/// Estimator slack for deficiency inequalities.
pub const DEFECT_SLACK: f64 = 0.03;
/// Guard margin on the lower-order hypothesis.
pub const ORDER_GUARD: f64 = 0.05;
