//! Time-domain solver for the reflection spectrum of a periodic unit cell
//! at normal incidence.
//!
//! Each solve consists of four runs sharing one vertical arrangement:
//!
//! 1. a structure-free run (absorbers top and bottom) that records the
//!    incident pulse at the monitor plane,
//! 2. a bare-ground run whose exactly known reflection of −1 calibrates
//!    away source spectrum, monitor placement, and propagation phase,
//! 3. two structure runs (x- and y-polarized incidence) over the substrate,
//!    ground, and metal sheet.
//!
//! Reflected waveforms come from subtracting the recorded incident series;
//! spectra are direct discrete Fourier transforms evaluated exactly on the
//! requested frequency grid. The calibrated matrix is finally de-embedded
//! to the patch surface. Uniform (structure-free) media make every lateral
//! sample identical, so calibration runs collapse to a 1×1 lateral grid,
//! which is the same arithmetic cell for cell.

mod fdtd;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::consts::{C0, EPS0};
use crate::geometry::{rasterize, StackUp, UnitCellGeometry};
use crate::jones::{Basis, Jones2, Polarization, ReflectionSpectrum};

use fdtd::{
    run_to_decay, MediumSpec, PatchNodes, Pulse, RunError, Simulation, SourceComponent, ZLayout,
};

pub const PATCH_SURFACE_PLANE: &str = "patch surface";

#[derive(Debug, Error)]
pub enum SolverError {
    /// STABILITY_ERROR: the time step would violate the stability bound.
    #[error("STABILITY_ERROR: courant fraction {courant} outside (0, 1)")]
    Stability { courant: f64 },
    #[error("CONFIG_ERROR: {0}")]
    Config(String),
    /// NONCONVERGED: residual energy above threshold at the step cap.
    #[error("NONCONVERGED: residual energy {residual:.3e} after {steps} steps")]
    NonConverged { steps: usize, residual: f64 },
    #[error("NONFINITE_ERROR: field diverged at step {step}")]
    NonFinite { step: usize },
    #[error("SOURCE_ERROR: incident spectrum below 1% of its peak inside the band")]
    SourceBandwidth,
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}

/// Discretization and run-control parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Spatial step (mm).
    pub resolution_mm: f64,
    /// Fraction of the stability limit, in (0, 1).
    pub courant: f64,
    /// Evaluated band (GHz).
    pub band_ghz: (f64, f64),
    /// Number of frequency samples across the band.
    pub n_freq: usize,
    /// Absorbing-layer thickness in cells.
    pub absorber_cells: usize,
    /// Stop when stored energy falls below this fraction of its peak.
    pub decay_threshold: f64,
    /// Hard step cap.
    pub max_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            resolution_mm: 0.05,
            courant: 0.99,
            band_ghz: (20.0, 60.0),
            n_freq: 81,
            absorber_cells: 10,
            decay_threshold: 1e-6,
            max_steps: 200_000,
        }
    }
}

impl SolverConfig {
    /// Checks the discretization invariants against a substrate thickness.
    pub fn validate(&self, h_mm: f64) -> Result<(), SolverError> {
        if !(self.courant > 0.0 && self.courant < 1.0) {
            return Err(SolverError::Stability {
                courant: self.courant,
            });
        }
        let (f0, f1) = self.band_ghz;
        if !(f0 > 0.0 && f0 <= f1) {
            return Err(SolverError::Config(format!(
                "band ({f0}, {f1}) GHz must satisfy 0 < f_min <= f_max"
            )));
        }
        let lambda_min_mm = C0 / (f1 * 1e9) * 1e3;
        if self.resolution_mm > lambda_min_mm / 20.0 {
            return Err(SolverError::Config(format!(
                "resolution {} mm exceeds lambda_min/20 = {:.4} mm",
                self.resolution_mm,
                lambda_min_mm / 20.0
            )));
        }
        if h_mm > 0.0 && h_mm / self.resolution_mm < 10.0 - 1e-9 {
            return Err(SolverError::Config(format!(
                "substrate needs >= 10 cells: h = {h_mm} mm at resolution {} mm",
                self.resolution_mm
            )));
        }
        if self.n_freq == 0 {
            return Err(SolverError::Config("n_freq must be >= 1".into()));
        }
        if !(self.decay_threshold > 0.0 && self.decay_threshold < 1.0) {
            return Err(SolverError::Config(
                "decay_threshold must lie in (0, 1)".into(),
            ));
        }
        if self.absorber_cells < 4 {
            return Err(SolverError::Config(
                "absorber needs at least 4 cells".into(),
            ));
        }
        if self.max_steps == 0 {
            return Err(SolverError::Config("max_steps must be >= 1".into()));
        }
        Ok(())
    }

    /// Evaluated frequency grid (GHz), inclusive of both band edges.
    pub fn freqs_ghz(&self) -> Vec<f64> {
        let (f0, f1) = self.band_ghz;
        if self.n_freq == 1 {
            return vec![f0];
        }
        let step = (f1 - f0) / (self.n_freq - 1) as f64;
        (0..self.n_freq).map(|i| f0 + i as f64 * step).collect()
    }

    /// Onset frequency (GHz) of non-specular propagating orders for a cell
    /// of the given period.
    pub fn grating_onset_ghz(period_mm: f64) -> f64 {
        C0 / (period_mm * 1e-3) / 1e9
    }
}

/// Excitation descriptor attached to recorded waveforms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Excitation {
    pub polarization: Polarization,
    /// Spectral peak of the pulse (GHz).
    pub peak_ghz: f64,
    pub tau_s: f64,
    pub delay_s: f64,
}

/// Monitor-plane tangential field time series for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRecord {
    pub ex: Vec<f64>,
    pub ey: Vec<f64>,
    pub dt_s: f64,
    pub excitation: Excitation,
}

impl FieldRecord {
    fn check_finite(&self) -> Result<(), SolverError> {
        for (n, (a, b)) in self.ex.iter().zip(&self.ey).enumerate() {
            if !a.is_finite() || !b.is_finite() {
                return Err(SolverError::NonFinite { step: n });
            }
        }
        Ok(())
    }
}

/// Step count and residual energy of one field run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStat {
    pub label: String,
    pub steps: usize,
    pub residual_energy: f64,
}

/// Run metadata for manifests and diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SolveStats {
    pub runs: Vec<RunStat>,
    pub warnings: Vec<String>,
    pub grid: (usize, usize, usize),
    pub dt_s: f64,
}

/// Calibration product: incident pulse and bare-ground reflection.
#[derive(Debug, Clone)]
pub struct ReferenceRun {
    pub incident: FieldRecord,
    pub ground_total: FieldRecord,
    pub freqs_ghz: Vec<f64>,
    /// Spectrum of the incident pulse at the monitor plane.
    pub incident_spectrum: Vec<Complex64>,
    /// Raw reflected spectrum of the bare ground at the monitor plane.
    pub ground_reflection: Vec<Complex64>,
    pub stats: SolveStats,
}

impl ReferenceRun {
    /// Ground reflection after self-calibration; −1 identically, which pins
    /// the phase reference of every calibrated spectrum to the ground plane.
    pub fn calibrated_ground_reflection(&self) -> Vec<Complex64> {
        // The ground run calibrated against itself: identically −1
        // wherever the raw spectrum is nonzero.
        self.ground_reflection
            .iter()
            .map(|g| {
                if g.norm() == 0.0 {
                    Complex64::new(f64::NAN, f64::NAN)
                } else {
                    Complex64::new(-1.0, 0.0)
                }
            })
            .collect()
    }
}

/// Full solve product for one unit cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitCellSolve {
    pub spectrum: ReflectionSpectrum,
    pub stats: SolveStats,
}

fn dft(series: &[f64], dt_s: f64, f_ghz: f64) -> Complex64 {
    let w = 2.0 * std::f64::consts::PI * f_ghz * 1e9;
    let mut acc = Complex64::new(0.0, 0.0);
    for (n, &x) in series.iter().enumerate() {
        let t = (n as f64 + 1.0) * dt_s;
        let (s, c) = (-w * t).sin_cos();
        acc += x * Complex64::new(c, s);
    }
    acc * dt_s
}

/// Pointwise `a − b`, treating the shorter series as zero-padded.
fn subtract_padded(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0))
        .collect()
}

struct SolveContext {
    delta_m: f64,
    n_sub: usize,
    layout: ZLayout,
    medium_structure: MediumSpec,
    pulse: Pulse,
    freqs: Vec<f64>,
}

impl SolveContext {
    fn new(
        stack: &StackUp,
        config: &SolverConfig,
        period_mm: Option<f64>,
    ) -> Result<Self, SolverError> {
        config.validate(stack.h_mm)?;
        let delta_m = config.resolution_mm * 1e-3;
        let n_sub_f = stack.h_mm / config.resolution_mm;
        let n_sub = n_sub_f.round() as usize;
        if stack.h_mm > 0.0 && (n_sub_f - n_sub as f64).abs() > 5e-3 * n_sub_f {
            return Err(SolverError::Config(format!(
                "resolution {} mm does not divide substrate thickness {} mm",
                config.resolution_mm, stack.h_mm
            )));
        }
        let layout = ZLayout::build(
            n_sub,
            config.absorber_cells,
            delta_m,
            period_mm,
            config.band_ghz.1,
        );
        let (f0, f1) = config.band_ghz;
        let f_center = 0.5 * (f0 + f1);
        // Loss realized as constant conductivity matched at band center.
        let sigma_sub = if stack.substrate.tan_delta > 0.0 {
            2.0 * std::f64::consts::PI
                * f_center
                * 1e9
                * EPS0
                * stack.substrate.eps_r
                * stack.substrate.tan_delta
        } else {
            0.0
        };
        Ok(SolveContext {
            delta_m,
            n_sub,
            layout,
            medium_structure: MediumSpec {
                n_sub,
                eps_r: stack.substrate.eps_r,
                sigma_sub,
                bottom_absorber: false,
            },
            pulse: Pulse::for_peak(f_center),
            freqs: config.freqs_ghz(),
        })
    }

    fn medium_air(&self, bottom_absorber: bool) -> MediumSpec {
        MediumSpec {
            n_sub: 0,
            eps_r: 1.0,
            sigma_sub: 0.0,
            bottom_absorber,
        }
    }

    fn excitation(&self, polarization: Polarization) -> Excitation {
        Excitation {
            polarization,
            peak_ghz: 1.0 / (2.0 * std::f64::consts::PI * self.pulse.tau_s) / 1e9,
            tau_s: self.pulse.tau_s,
            delay_s: self.pulse.t0_s,
        }
    }

    fn run(
        &self,
        label: &str,
        nx: usize,
        ny: usize,
        medium: MediumSpec,
        patch: Option<PatchNodes>,
        component: SourceComponent,
        config: &SolverConfig,
        stats: &mut SolveStats,
    ) -> Result<FieldRecord, SolverError> {
        let sim = Simulation::new(
            nx,
            ny,
            self.layout,
            &medium,
            patch,
            self.delta_m,
            config.courant,
        );
        let out = run_to_decay(
            sim,
            &self.pulse,
            component,
            config.decay_threshold,
            config.max_steps,
        )
        .map_err(|e| match e {
            RunError::NonConverged { steps, residual } => {
                SolverError::NonConverged { steps, residual }
            }
            RunError::NonFinite { step } => SolverError::NonFinite { step },
        })?;
        stats.runs.push(RunStat {
            label: label.into(),
            steps: out.steps,
            residual_energy: out.residual,
        });
        let record = FieldRecord {
            ex: out.ex_series,
            ey: out.ey_series,
            dt_s: out.dt_s,
            excitation: self.excitation(match component {
                SourceComponent::Ex => Polarization::X,
                SourceComponent::Ey => Polarization::Y,
            }),
        };
        record.check_finite()?;
        Ok(record)
    }
}

/// Runs the structure-free and bare-ground calibration pair.
///
/// Both media are laterally uniform, so they run on a 1×1 periodic grid:
/// with identical start values every lateral sample stays identical, making
/// the reduction exact.
pub fn run_reference(stack: &StackUp, config: &SolverConfig) -> Result<ReferenceRun, SolverError> {
    let ctx = SolveContext::new(stack, config, None)?;
    reference_with(&ctx, config)
}

fn reference_with(ctx: &SolveContext, config: &SolverConfig) -> Result<ReferenceRun, SolverError> {
    let mut stats = SolveStats {
        grid: (1, 1, ctx.layout.nz),
        ..Default::default()
    };
    let incident = ctx.run(
        "incident",
        1,
        1,
        ctx.medium_air(true),
        None,
        SourceComponent::Ex,
        config,
        &mut stats,
    )?;
    let ground_total = ctx.run(
        "ground",
        1,
        1,
        ctx.medium_air(false),
        None,
        SourceComponent::Ex,
        config,
        &mut stats,
    )?;
    stats.dt_s = incident.dt_s;

    let incident_spectrum: Vec<Complex64> = ctx
        .freqs
        .iter()
        .map(|&f| dft(&incident.ex, incident.dt_s, f))
        .collect();
    let peak = incident_spectrum
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    if incident_spectrum.iter().any(|c| c.norm() < 0.01 * peak) {
        return Err(SolverError::SourceBandwidth);
    }
    let ground_refl_series = subtract_padded(&ground_total.ex, &incident.ex);
    let ground_reflection: Vec<Complex64> = ctx
        .freqs
        .iter()
        .map(|&f| dft(&ground_refl_series, ground_total.dt_s, f))
        .collect();

    Ok(ReferenceRun {
        incident,
        ground_total,
        freqs_ghz: ctx.freqs.clone(),
        incident_spectrum,
        ground_reflection,
        stats,
    })
}

/// Metal-sheet edge samples for the cell at the solver resolution.
fn edge_masks(cell: &UnitCellGeometry, resolution_mm: f64, n: usize) -> PatchNodes {
    let mut nodes = PatchNodes::default();
    for j in 0..n {
        for i in 0..n {
            let (ex_x, ex_y) = ((i as f64 + 0.5) * resolution_mm, j as f64 * resolution_mm);
            if cell.contains_point(ex_x, ex_y) {
                nodes.ex.push((j * n + i) as u32);
            }
            let (ey_x, ey_y) = (i as f64 * resolution_mm, (j as f64 + 0.5) * resolution_mm);
            if cell.contains_point(ey_x, ey_y) {
                nodes.ey.push((j * n + i) as u32);
            }
        }
    }
    nodes
}

/// Solves one unit cell and returns its calibrated reflection spectrum in
/// the XY basis, phase-referenced to the patch surface.
pub fn run_unit_cell(
    cell: &UnitCellGeometry,
    config: &SolverConfig,
) -> Result<UnitCellSolve, SolverError> {
    // Rasterization is the geometric precondition; it also validates that
    // the resolution divides the period.
    let mask = rasterize(cell, config.resolution_mm)?;
    let n = mask.nx;
    let ctx = SolveContext::new(&cell.stack, config, Some(cell.period_mm))?;
    let reference = reference_with(&ctx, config)?;

    let patch = edge_masks(cell, config.resolution_mm, n);
    // A cell without metal is laterally uniform and collapses to the 1×1
    // grid exactly, like the calibration runs.
    let (nx, ny, patch) = if patch.is_empty() {
        (1, 1, None)
    } else {
        (n, n, Some(patch))
    };

    let mut stats = SolveStats {
        grid: (nx, ny, ctx.layout.nz),
        warnings: reference.stats.warnings.clone(),
        ..Default::default()
    };
    stats.runs.extend(reference.stats.runs.iter().cloned());

    let run_x = ctx.run(
        "x_pol",
        nx,
        ny,
        ctx.medium_structure,
        patch.clone(),
        SourceComponent::Ex,
        config,
        &mut stats,
    )?;
    let run_y = ctx.run(
        "y_pol",
        nx,
        ny,
        ctx.medium_structure,
        patch,
        SourceComponent::Ey,
        config,
        &mut stats,
    )?;
    stats.dt_s = run_x.dt_s;

    // Reflected series: subtract the incident pulse from the co-polarized
    // component; cross-polarized components have no incident part. The
    // lateral grid is x/y symmetric, so the x-polarized incident series
    // doubles as the y-polarized one.
    let inc = &reference.incident.ex;
    let refl_xx = subtract_padded(&run_x.ex, inc);
    let refl_yx = run_x.ey.clone();
    let refl_yy = subtract_padded(&run_y.ey, inc);
    let refl_xy = run_y.ex.clone();

    let z_patch_m = ctx.n_sub as f64 * ctx.delta_m;
    let dt = run_x.dt_s;
    let mut samples = Vec::with_capacity(ctx.freqs.len());
    let mut max_reciprocity = 0.0f64;
    for (i, &f) in ctx.freqs.iter().enumerate() {
        let g = reference.ground_reflection[i];
        // Dividing by the bare-ground run cancels source and path terms and
        // references the phase to the ground plane; the explicit factor then
        // shifts the reference up to the patch surface.
        let k = 2.0 * std::f64::consts::PI * f * 1e9 / C0;
        let (s, c) = (-2.0 * k * z_patch_m).sin_cos();
        let deembed = Complex64::new(c, s);
        let cal = |series: &[f64]| -> Complex64 { -(dft(series, dt, f) / g) * deembed };
        let j = Jones2::new(
            Basis::Xy,
            cal(&refl_xx),
            cal(&refl_xy),
            cal(&refl_yx),
            cal(&refl_yy),
        );
        max_reciprocity = max_reciprocity.max((j.r_xy() - j.r_yx()).norm());
        samples.push((f, j));
    }

    if max_reciprocity > 1e-3 {
        stats.warnings.push(format!(
            "RECIPROCITY_WARNING: |r_xy - r_yx| reaches {max_reciprocity:.3e}"
        ));
    }
    let onset = SolverConfig::grating_onset_ghz(cell.period_mm);
    if config.band_ghz.1 > onset {
        stats.warnings.push(format!(
            "GRATING_WARNING: non-specular orders propagate above {onset:.2} GHz, inside the band"
        ));
    }

    let spectrum = ReflectionSpectrum::new(samples, PATCH_SURFACE_PLANE)
        .expect("frequency grid is strictly increasing");
    Ok(UnitCellSolve { spectrum, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Material;

    fn stack(eps: f64, tand: f64, h: f64) -> StackUp {
        StackUp::new(Material::new("sub", eps, tand).unwrap(), h, 0.0, true).unwrap()
    }

    fn fast_config() -> SolverConfig {
        SolverConfig {
            resolution_mm: 0.05,
            band_ghz: (20.0, 60.0),
            n_freq: 9,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn courant_above_one_is_rejected() {
        let cfg = SolverConfig {
            courant: 1.2,
            ..fast_config()
        };
        let err = run_reference(&stack(2.2, 0.0, 1.0), &cfg).unwrap_err();
        assert!(matches!(err, SolverError::Stability { .. }));
    }

    #[test]
    fn coarse_resolution_is_rejected() {
        let cfg = SolverConfig {
            resolution_mm: 0.3, // lambda_min/20 = 0.25 mm at 60 GHz
            ..fast_config()
        };
        assert!(matches!(
            run_reference(&stack(2.2, 0.0, 1.0), &cfg),
            Err(SolverError::Config(_))
        ));
    }

    #[test]
    fn thin_substrate_sampling_is_rejected() {
        let cfg = SolverConfig {
            resolution_mm: 0.2,
            band_ghz: (10.0, 30.0),
            ..fast_config()
        };
        assert!(matches!(
            run_reference(&stack(2.2, 0.0, 1.0), &cfg),
            Err(SolverError::Config(_))
        ));
    }

    #[test]
    fn step_cap_reports_nonconvergence() {
        let cfg = SolverConfig {
            max_steps: 50,
            ..fast_config()
        };
        let err = run_reference(&stack(2.2, 0.0, 1.0), &cfg).unwrap_err();
        assert!(matches!(err, SolverError::NonConverged { steps: 50, .. }));
    }

    #[test]
    fn reference_runs_complete_and_calibrate_to_minus_one() {
        let reference = run_reference(&stack(2.2, 0.0, 1.0), &fast_config()).unwrap();
        let peak = reference
            .incident_spectrum
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        assert!(peak > 0.0);
        for c in &reference.incident_spectrum {
            assert!(c.norm() >= 0.01 * peak);
        }
        for r in reference.calibrated_ground_reflection() {
            assert!((r - Complex64::new(-1.0, 0.0)).norm() < 1e-3);
        }
        // The raw ground reflection itself must be near-unimodular: this
        // exercises the absorber and the incident-subtraction chain.
        for (g, inc) in reference
            .ground_reflection
            .iter()
            .zip(&reference.incident_spectrum)
        {
            let mag = (g / inc).norm();
            assert!((mag - 1.0).abs() < 5e-3, "raw ground |r| = {mag}");
        }
    }

    #[test]
    fn grating_onset_matches_the_period() {
        assert!((SolverConfig::grating_onset_ghz(4.0) - 74.948_114_5).abs() < 1e-6);
    }

    #[test]
    fn frequency_grid_is_inclusive() {
        let cfg = SolverConfig {
            band_ghz: (30.0, 50.0),
            n_freq: 3,
            ..SolverConfig::default()
        };
        assert_eq!(cfg.freqs_ghz(), vec![30.0, 40.0, 50.0]);
        let single = SolverConfig {
            band_ghz: (33.63, 33.63),
            n_freq: 1,
            ..SolverConfig::default()
        };
        assert_eq!(single.freqs_ghz(), vec![33.63]);
    }
}
