//! Modeling kernel for reflective polarization-conversion metasurfaces.
//!
//! The crate covers the full chain from a single anisotropic unit cell to the
//! scattered far field of a tiled aperture:
//!
//! - [`geometry`]: elliptical unit cells, their mirror images, rasterized
//!   metal masks, and checkerboard aperture layouts.
//! - [`jones`]: 2×2 reflection-matrix algebra (conversion ratio, basis
//!   rotation, mirror transform) plus analytic transmission-line oracles for
//!   grounded slabs and sheet-loaded converters.
//! - [`solver`]: a time-domain field solver on a laterally periodic cell at
//!   normal incidence that extracts calibrated reflection spectra.
//! - [`scatter`]: aperture painting under the local-periodicity
//!   approximation, physical-optics far fields, radar-cross-section
//!   synthesis, and lobe prediction/detection.
//! - [`optimize`]: derivative-free bounded search for the cell geometry that
//!   maximizes polarization-conversion bandwidth.
//!
//! Lengths cross the API boundary in millimeters and frequencies in GHz;
//! computations convert to SI internally.

pub mod consts;
pub mod geometry;
pub mod jones;
pub mod optimize;
pub mod scatter;
pub mod solver;

pub use geometry::{
    build_checkerboard, build_unit_cell, mirror_unit, rasterize, ApertureLayout, GeometryError,
    Handedness, Material, PatchMask, Rect, StackUp, TileKind, UnitCellGeometry,
};
pub use jones::{
    grounded_slab_reflection, mirror_spectrum, mirror_transform, pcr, rotate_basis,
    series_lc_reactance, tl_converter_model, Basis, Jones2, JonesError, Polarization,
    ReflectionSpectrum, SheetImpedance,
};
pub use optimize::{
    evaluate_design, optimize_design, pattern_search, DesignBounds, DesignVector, Engine,
    OptimizeError, SearchResult, TraceEntry,
};
pub use scatter::{
    far_field, far_field_direct, far_field_fft, find_peaks, monostatic_reduction, paint_aperture,
    pec_plate_rcs, predict_lobes, to_dbsm, ApertureField, FarFieldPattern, Peak, ReductionSample,
    ScatterError,
};
pub use solver::{
    run_reference, run_unit_cell, FieldRecord, ReferenceRun, RunStat, SolveStats, SolverConfig,
    SolverError, UnitCellSolve,
};
