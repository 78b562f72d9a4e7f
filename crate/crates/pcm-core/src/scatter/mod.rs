//! Aperture painting, radar-cross-section synthesis, and lobe analysis.
//!
//! Under the local-periodicity approximation every unit cell reflects with
//! its infinite-array coefficient, so a tiled aperture becomes a piecewise
//! constant complex field that physical optics turns into far-field
//! patterns, broadside reduction curves, and lobe tables.

mod farfield;
mod peaks;

pub use farfield::{
    broadside_amplitudes, default_phi_grid, default_theta_grid, far_field, far_field_direct,
    far_field_direct_uv, far_field_fft, FarFieldPattern, FftFarFieldSample,
};
pub use peaks::{find_peaks, Peak};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::consts::wavelength_m;
use crate::geometry::{ApertureLayout, TileKind};
use crate::jones::{Basis, Polarization, ReflectionSpectrum};

#[derive(Debug, Error, PartialEq)]
pub enum ScatterError {
    /// BAND_ERROR: requested frequency outside a spectrum's coverage.
    #[error("BAND_ERROR: {f_ghz} GHz outside the covered band {lo}..{hi} GHz")]
    Band { f_ghz: f64, lo: f64, hi: f64 },
    /// SAMPLING_ERROR: aperture sampling too coarse for the wavelength.
    #[error("SAMPLING_ERROR: sample pitch {pitch_mm:.3} mm exceeds lambda/4 = {limit_mm:.3} mm")]
    Sampling { pitch_mm: f64, limit_mm: f64 },
    /// BASIS_ERROR: spectra must be expressed in the lab (XY) basis.
    #[error("BASIS_ERROR: aperture painting requires XY-basis spectra")]
    Basis,
}

/// Reporting floor for RCS values (dBsm).
pub const DBSM_FLOOR: f64 = -100.0;

/// RCS in dBsm, floored at −100 dBsm; raw amplitudes stay exact elsewhere.
pub fn to_dbsm(sigma_m2: f64) -> f64 {
    if sigma_m2 <= 1e-10 {
        DBSM_FLOOR
    } else {
        (10.0 * sigma_m2.log10()).max(DBSM_FLOOR)
    }
}

/// Sub-samples per unit cell side when painting. Keeps the sample pitch at
/// or below λ/4 for every frequency under the grating onset of the cell.
const CELL_OVERSAMPLE: usize = 4;

/// Sampled complex reflected field over an aperture at one frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApertureField {
    /// Sample pitch (mm).
    pub pitch_mm: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major `[iy][ix]` co-polarized amplitudes.
    pub co: Vec<Complex64>,
    /// Cross-polarized amplitudes.
    pub cross: Vec<Complex64>,
    pub freq_ghz: f64,
    pub incident_pol: Polarization,
}

impl ApertureField {
    /// Aperture extent (width, height) in mm.
    pub fn extent_mm(&self) -> (f64, f64) {
        (
            self.nx as f64 * self.pitch_mm,
            self.ny as f64 * self.pitch_mm,
        )
    }
}

fn interp_or_band_error(
    spectrum: &ReflectionSpectrum,
    f_ghz: f64,
) -> Result<crate::jones::Jones2, ScatterError> {
    spectrum.interp(f_ghz).ok_or_else(|| {
        let (lo, hi) = spectrum.band_ghz();
        ScatterError::Band { f_ghz, lo, hi }
    })
}

/// Paints per-tile reflected fields over the layout at `f_ghz`.
///
/// Converter tiles carry their spectrum's matrix applied to the incident
/// unit vector, constant across the tile; specular tiles carry a
/// co-polarized −1; absent tiles carry zero.
pub fn paint_aperture(
    layout: &ApertureLayout,
    unit_spectrum: &ReflectionSpectrum,
    mirror_spectrum: &ReflectionSpectrum,
    f_ghz: f64,
    incident_pol: Polarization,
) -> Result<ApertureField, ScatterError> {
    if unit_spectrum.basis() != Basis::Xy || mirror_spectrum.basis() != Basis::Xy {
        return Err(ScatterError::Basis);
    }
    let j_unit = interp_or_band_error(unit_spectrum, f_ghz)?;
    let j_mirror = interp_or_band_error(mirror_spectrum, f_ghz)?;

    let to_co_cross = |j: &crate::jones::Jones2| -> (Complex64, Complex64) {
        let (ex, ey) = j.reflect(incident_pol);
        match incident_pol {
            Polarization::X => (ex, ey),
            Polarization::Y => (ey, ex),
        }
    };
    let unit_field = to_co_cross(&j_unit);
    let mirror_field = to_co_cross(&j_mirror);
    let pec_field = (Complex64::new(-1.0, 0.0), Complex64::new(0.0, 0.0));
    let zero = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));

    let spt = layout.cells_per_tile * CELL_OVERSAMPLE;
    let nx = layout.tiles_x * spt;
    let ny = layout.tiles_y * spt;
    let mut co = vec![Complex64::new(0.0, 0.0); nx * ny];
    let mut cross = vec![Complex64::new(0.0, 0.0); nx * ny];
    for ty in 0..layout.tiles_y {
        for tx in 0..layout.tiles_x {
            let (c, x) = match layout.kind(tx, ty) {
                TileKind::Unit => unit_field,
                TileKind::Mirror => mirror_field,
                TileKind::Pec => pec_field,
                TileKind::Absent => zero,
            };
            for sy in 0..spt {
                let row = (ty * spt + sy) * nx + tx * spt;
                co[row..row + spt].fill(c);
                cross[row..row + spt].fill(x);
            }
        }
    }
    Ok(ApertureField {
        pitch_mm: layout.cell_period_mm() / CELL_OVERSAMPLE as f64,
        nx,
        ny,
        co,
        cross,
        freq_ghz: f_ghz,
        incident_pol,
    })
}

/// Broadside RCS of a perfectly conducting plate: `σ = 4π(w·h)²/λ²`,
/// in dBsm.
pub fn pec_plate_rcs(width_mm: f64, height_mm: f64, f_ghz: f64) -> f64 {
    assert!(width_mm >= 0.0 && height_mm >= 0.0 && f_ghz > 0.0);
    let area_m2 = width_mm * height_mm * 1e-6;
    let lambda = wavelength_m(f_ghz);
    to_dbsm(4.0 * std::f64::consts::PI * area_m2 * area_m2 / (lambda * lambda))
}

/// One point of a monostatic reduction sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionSample {
    pub freq_ghz: f64,
    pub sigma_layout_dbsm: f64,
    pub sigma_pec_dbsm: f64,
    /// σ_layout − σ_plate in dB; negative values are reduction.
    pub delta_db: f64,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + i as f64 * step).collect()
}

/// Broadside RCS of the painted layout against a same-extent conducting
/// plate, swept over `band_ghz`. Uses y-polarized incidence.
pub fn monostatic_reduction(
    layout: &ApertureLayout,
    unit_spectrum: &ReflectionSpectrum,
    mirror_spectrum: &ReflectionSpectrum,
    band_ghz: (f64, f64),
    n_freq: usize,
) -> Result<Vec<ReductionSample>, ScatterError> {
    let (w, h) = layout.extent_mm();
    linspace(band_ghz.0, band_ghz.1, n_freq)
        .into_iter()
        .map(|f| {
            let ap = paint_aperture(layout, unit_spectrum, mirror_spectrum, f, Polarization::Y)?;
            let (co, cross) = broadside_amplitudes(&ap);
            let lambda = wavelength_m(f);
            let sigma_layout = to_dbsm(farfield::sigma_m2(co, cross, lambda));
            let sigma_pec = pec_plate_rcs(w, h, f);
            Ok(ReductionSample {
                freq_ghz: f,
                sigma_layout_dbsm: sigma_layout,
                sigma_pec_dbsm: sigma_pec,
                delta_db: sigma_layout - sigma_pec,
            })
        })
        .collect()
}

/// Directions of the four checkerboard lobes: `sinθcosφ = ±λ/(2d)`,
/// `sinθsinφ = ±λ/(2d)` for alternation period `2d`. Empty when the lobes
/// are evanescent (λ > √2·d).
pub fn predict_lobes(tile_pitch_mm: f64, f_ghz: f64) -> Vec<(f64, f64)> {
    assert!(tile_pitch_mm > 0.0);
    let lambda_mm = wavelength_m(f_ghz) * 1e3;
    let s = lambda_mm / (std::f64::consts::SQRT_2 * tile_pitch_mm);
    if s > 1.0 {
        return Vec::new();
    }
    let theta = s.asin().to_degrees();
    [45.0, 135.0, 225.0, 315.0]
        .iter()
        .map(|&phi| (theta, phi))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_checkerboard, build_unit_cell, Handedness, Material, StackUp};
    use crate::jones::{Jones2, ReflectionSpectrum};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Perfect converter: [[0, −1], [−1, 0]] flat across 20–60 GHz.
    fn ideal_spectrum() -> ReflectionSpectrum {
        let j = Jones2::new(
            Basis::Xy,
            c(0.0, 0.0),
            c(-1.0, 0.0),
            c(-1.0, 0.0),
            c(0.0, 0.0),
        );
        ReflectionSpectrum::new(vec![(20.0, j), (60.0, j)], "ideal").unwrap()
    }

    fn ideal_mirror() -> ReflectionSpectrum {
        crate::jones::mirror_spectrum(&ideal_spectrum()).unwrap()
    }

    fn paper_cell() -> crate::geometry::UnitCellGeometry {
        let stack =
            StackUp::new(Material::new("sub", 2.2, 0.0009).unwrap(), 1.0, 0.035, true).unwrap();
        build_unit_cell(4.0, 3.8, 1.3, stack, Handedness::Unit).unwrap()
    }

    fn checkerboard(tx: usize, ty: usize) -> ApertureLayout {
        build_checkerboard(tx, ty, 2, &paper_cell(), None).unwrap()
    }

    fn all_pec(tx: usize, ty: usize) -> ApertureLayout {
        let tiles = vec![TileKind::Pec; tx * ty];
        ApertureLayout::new(tx, ty, tiles, 8.0, 2).unwrap()
    }

    fn random_aperture(nx: usize, ny: usize, seed: u64) -> ApertureField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sample = |_: usize| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        ApertureField {
            pitch_mm: 1.5,
            nx,
            ny,
            co: (0..nx * ny).map(&mut sample).collect(),
            cross: (0..nx * ny).map(&mut sample).collect(),
            freq_ghz: 37.75,
            incident_pol: Polarization::Y,
        }
    }

    #[test]
    fn uniform_converter_paints_pure_cross_pol() {
        let layout = ApertureLayout::new(2, 2, vec![TileKind::Unit; 4], 8.0, 2).unwrap();
        let ap = paint_aperture(
            &layout,
            &ideal_spectrum(),
            &ideal_mirror(),
            37.75,
            Polarization::Y,
        )
        .unwrap();
        assert!(ap.co.iter().all(|v| v.norm() == 0.0));
        assert!(ap.cross.iter().all(|&v| v == c(-1.0, 0.0)));
    }

    #[test]
    fn checkerboard_paints_alternating_cross_pol() {
        let layout = checkerboard(2, 1);
        let ap = paint_aperture(
            &layout,
            &ideal_spectrum(),
            &ideal_mirror(),
            37.75,
            Polarization::Y,
        )
        .unwrap();
        // First tile (unit): −1; second tile (mirror): +1.
        assert_eq!(ap.cross[0], c(-1.0, 0.0));
        assert_eq!(ap.cross[8], c(1.0, 0.0));
        let (co, cross) = broadside_amplitudes(&ap);
        assert_eq!(co, c(0.0, 0.0));
        assert_eq!(cross, c(0.0, 0.0));
    }

    #[test]
    fn pec_layout_paints_co_pol_minus_one() {
        let layout = all_pec(3, 5);
        let ap = paint_aperture(
            &layout,
            &ideal_spectrum(),
            &ideal_mirror(),
            37.75,
            Polarization::Y,
        )
        .unwrap();
        assert!(ap.co.iter().all(|&v| v == c(-1.0, 0.0)));
        assert!(ap.cross.iter().all(|v| v.norm() == 0.0));
        assert_eq!(ap.extent_mm(), (24.0, 40.0));
    }

    #[test]
    fn out_of_band_frequency_is_rejected() {
        let layout = checkerboard(2, 2);
        let err = paint_aperture(
            &layout,
            &ideal_spectrum(),
            &ideal_mirror(),
            61.0,
            Polarization::Y,
        )
        .unwrap_err();
        assert!(matches!(err, ScatterError::Band { .. }));
    }

    #[test]
    fn broadside_plate_matches_the_aperture_formula() {
        // Uniform co-pol −1 over 24×40 mm at 37.75 GHz: σ = 4πA²/λ².
        let ap = paint_aperture(
            &all_pec(3, 5),
            &ideal_spectrum(),
            &ideal_mirror(),
            37.75,
            Polarization::Y,
        )
        .unwrap();
        let pattern = far_field(&ap, &[0.0], &[0.0]).unwrap();
        assert_relative_eq!(pattern.sigma(0, 0), -7.360_551_638_242_08, epsilon = 1e-9);
        // Broadside amplitude equals the plain sample sum times the area.
        let (co, _) = broadside_amplitudes(&ap);
        let (fc, _) = pattern.amplitudes(0, 0);
        assert_relative_eq!((fc - co).norm(), 0.0, epsilon = 1e-18);
        assert_relative_eq!(co.re, -24.0e-3 * 40.0e-3, max_relative = 1e-12);
    }

    #[test]
    fn sampling_coarser_than_quarter_wave_is_rejected() {
        let mut ap = random_aperture(4, 4, 7);
        ap.pitch_mm = 2.5; // λ/4 = 1.985 mm at 37.75 GHz
        assert!(matches!(
            far_field(&ap, &[0.0], &[0.0]),
            Err(ScatterError::Sampling { .. })
        ));
    }

    #[test]
    fn zero_aperture_reports_the_floor() {
        let layout = ApertureLayout::new(2, 2, vec![TileKind::Absent; 4], 8.0, 2).unwrap();
        let ap = paint_aperture(
            &layout,
            &ideal_spectrum(),
            &ideal_mirror(),
            37.75,
            Polarization::Y,
        )
        .unwrap();
        let pattern = far_field(&ap, &[0.0, 30.0], &[0.0, 90.0]).unwrap();
        assert!(pattern.sigma_dbsm.iter().all(|&s| s == DBSM_FLOOR));
    }

    #[test]
    fn production_path_matches_the_brute_force_oracle() {
        let ap = random_aperture(12, 20, 42);
        let thetas = [0.0, 15.5, 44.5, 70.0];
        let phis = [0.0, 45.0, 133.0, 270.0];
        let pattern = far_field(&ap, &thetas, &phis).unwrap();
        let dirs: Vec<(f64, f64)> = thetas
            .iter()
            .flat_map(|&t| phis.iter().map(move |&p| (t, p)))
            .collect();
        let oracle = far_field_direct(&ap, &dirs);
        let scale = oracle
            .iter()
            .map(|(a, b)| a.norm() + b.norm())
            .fold(0.0, f64::max);
        for (i, (oc, ox)) in oracle.iter().enumerate() {
            let (pc, px) = (pattern.co[i], pattern.cross[i]);
            assert!((pc - oc).norm() / scale < 1e-12);
            assert!((px - ox).norm() / scale < 1e-12);
        }
    }

    #[test]
    fn transform_path_matches_the_brute_force_oracle() {
        let ap = random_aperture(12, 20, 3);
        let samples = far_field_fft(&ap, 32);
        assert!(!samples.is_empty());
        let uv: Vec<(f64, f64)> = samples.iter().map(|s| (s.u, s.v)).collect();
        let oracle = far_field_direct_uv(&ap, &uv);
        let scale = oracle
            .iter()
            .map(|(a, b)| a.norm().max(b.norm()))
            .fold(0.0, f64::max);
        let mut worst = 0.0f64;
        for (s, (oc, ox)) in samples.iter().zip(&oracle) {
            worst = worst.max((s.co - oc).norm() / scale);
            worst = worst.max((s.cross - ox).norm() / scale);
        }
        assert!(
            worst < 1e-9,
            "fast/direct relative disagreement {worst:.3e}"
        );
    }

    #[test]
    fn far_field_is_linear_in_the_aperture() {
        let a = random_aperture(6, 5, 11);
        let b = random_aperture(6, 5, 12);
        let mut sum = a.clone();
        for (s, (x, y)) in sum.co.iter_mut().zip(a.co.iter().zip(&b.co)) {
            *s = x + y;
        }
        for (s, (x, y)) in sum.cross.iter_mut().zip(a.cross.iter().zip(&b.cross)) {
            *s = x + y;
        }
        let dirs = [(10.0, 20.0), (33.0, 275.0), (61.0, 181.5)];
        let (fa, fb, fs) = (
            far_field_direct(&a, &dirs),
            far_field_direct(&b, &dirs),
            far_field_direct(&sum, &dirs),
        );
        for i in 0..dirs.len() {
            let lin_co = fa[i].0 + fb[i].0;
            let lin_cross = fa[i].1 + fb[i].1;
            assert!((fs[i].0 - lin_co).norm() <= 1e-12 * lin_co.norm().max(1e-6));
            assert!((fs[i].1 - lin_cross).norm() <= 1e-12 * lin_cross.norm().max(1e-6));
        }
    }

    #[test]
    fn swapping_unit_and_mirror_tiles_leaves_sigma_unchanged() {
        let layout = checkerboard(3, 5);
        let swapped_tiles: Vec<TileKind> = layout
            .tiles
            .iter()
            .map(|t| match t {
                TileKind::Unit => TileKind::Mirror,
                TileKind::Mirror => TileKind::Unit,
                other => *other,
            })
            .collect();
        let swapped = ApertureLayout::new(3, 5, swapped_tiles, 8.0, 2).unwrap();
        let (u, m) = (ideal_spectrum(), ideal_mirror());
        let a = paint_aperture(&layout, &u, &m, 37.75, Polarization::Y).unwrap();
        let b = paint_aperture(&swapped, &u, &m, 37.75, Polarization::Y).unwrap();
        let thetas = [0.0, 30.0, 44.5];
        let phis = [45.0, 135.0];
        let pa = far_field(&a, &thetas, &phis).unwrap();
        let pb = far_field(&b, &thetas, &phis).unwrap();
        for (sa, sb) in pa.sigma_dbsm.iter().zip(&pb.sigma_dbsm) {
            assert_relative_eq!(sa, sb, epsilon = 1e-9);
        }
    }

    #[test]
    fn polarization_parts_decompose_sigma() {
        let ap = random_aperture(5, 4, 23);
        let mut co_only = ap.clone();
        co_only.cross.iter_mut().for_each(|v| *v = c(0.0, 0.0));
        let mut cross_only = ap.clone();
        cross_only.co.iter_mut().for_each(|v| *v = c(0.0, 0.0));
        let dirs = [(25.0, 10.0)];
        let full = far_field_direct(&ap, &dirs)[0];
        let lambda = wavelength_m(ap.freq_ghz);
        let sigma_full = farfield::sigma_m2(full.0, full.1, lambda);
        let co_part = far_field_direct(&co_only, &dirs)[0];
        let cross_part = far_field_direct(&cross_only, &dirs)[0];
        let recombined = farfield::sigma_m2(co_part.0, co_part.1, lambda)
            + farfield::sigma_m2(cross_part.0, cross_part.1, lambda);
        assert_relative_eq!(sigma_full, recombined, max_relative = 1e-12);
    }

    #[test]
    fn plate_reference_values() {
        assert_relative_eq!(
            pec_plate_rcs(28.7, 41.6, 30.0),
            -7.462_385_776_729_64,
            epsilon = 1e-9
        );
        assert_relative_eq!(
            pec_plate_rcs(28.7, 41.6, 37.75),
            -5.466_471_751_818_746,
            epsilon = 1e-9
        );
        assert_eq!(pec_plate_rcs(0.0, 41.6, 30.0), DBSM_FLOOR);
    }

    #[test]
    fn odd_tiling_leaves_the_one_tile_residue() {
        let layout = checkerboard(3, 5); // 8 unit, 7 mirror
        let curve = monostatic_reduction(
            &layout,
            &ideal_spectrum(),
            &ideal_mirror(),
            (37.75, 37.75),
            1,
        )
        .unwrap();
        assert_eq!(curve.len(), 1);
        // One uncancelled tile out of fifteen: 20·log10(1/15) = −23.52 dB.
        assert_relative_eq!(curve[0].delta_db, -23.521_825_181_113_627, epsilon = 1e-9);
    }

    #[test]
    fn even_tiling_cancels_to_the_floor() {
        let layout = checkerboard(2, 2);
        let curve =
            monostatic_reduction(&layout, &ideal_spectrum(), &ideal_mirror(), (30.0, 40.0), 3)
                .unwrap();
        for s in curve {
            assert!(s.delta_db < -60.0, "delta {}", s.delta_db);
        }
    }

    #[test]
    fn lobe_prediction_reference_point() {
        let lobes = predict_lobes(8.0, 37.75);
        assert_eq!(lobes.len(), 4);
        for (theta, _) in &lobes {
            assert_relative_eq!(*theta, 44.582_698_615_986_75, epsilon = 1e-9);
        }
        assert_eq!(
            lobes.iter().map(|l| l.1 as i32).collect::<Vec<_>>(),
            vec![45, 135, 225, 315]
        );
    }

    #[test]
    fn lobes_vanish_with_large_pitch_or_low_frequency() {
        // λ = 15 mm at 20 GHz > √2·8 mm: evanescent.
        assert!(predict_lobes(8.0, 20.0).is_empty());
        // d → large: θ → 0.
        let lobes = predict_lobes(4000.0, 37.75);
        assert!(lobes[0].0 < 0.1);
    }

    #[test]
    fn plate_pattern_has_a_single_dominant_peak_at_broadside() {
        let ap = paint_aperture(
            &all_pec(3, 5),
            &ideal_spectrum(),
            &ideal_mirror(),
            30.0,
            Polarization::Y,
        )
        .unwrap();
        let pattern = far_field(&ap, &default_theta_grid(), &default_phi_grid()).unwrap();
        let peaks = find_peaks(&pattern, 3.0);
        assert!(!peaks.is_empty());
        assert_eq!(peaks[0].theta_deg, 0.0);
        assert_eq!(peaks[0].phi_deg, 0.0);
        // Any secondary lobe sits well below the specular return.
        if peaks.len() > 1 {
            assert!(peaks[1].sigma_dbsm < peaks[0].sigma_dbsm - 10.0);
        }
    }

    #[test]
    fn monotone_pattern_peaks_only_at_the_boundary() {
        let theta: Vec<f64> = (0..90).map(|i| i as f64).collect();
        let phi: Vec<f64> = (0..360).map(|i| i as f64).collect();
        let mut sigma = Vec::with_capacity(theta.len() * phi.len());
        for &t in &theta {
            for _ in &phi {
                sigma.push(-t);
            }
        }
        let n = sigma.len();
        let pattern = FarFieldPattern {
            freq_ghz: 30.0,
            theta_deg: theta,
            phi_deg: phi,
            co: vec![c(0.0, 0.0); n],
            cross: vec![c(0.0, 0.0); n],
            sigma_dbsm: sigma,
        };
        let peaks = find_peaks(&pattern, 0.5);
        assert_eq!(peaks.len(), 1);
        assert_eq!((peaks[0].theta_deg, peaks[0].phi_deg), (0.0, 0.0));
    }

    #[test]
    fn checkerboard_lobes_land_on_the_prediction() {
        // Large board so the per-tile envelope does not bias lobe positions.
        let layout = checkerboard(12, 12);
        let ap = paint_aperture(
            &layout,
            &ideal_spectrum(),
            &ideal_mirror(),
            37.75,
            Polarization::Y,
        )
        .unwrap();
        let pattern = far_field(&ap, &default_theta_grid(), &default_phi_grid()).unwrap();
        let peaks = find_peaks(&pattern, 3.0);
        let predicted = predict_lobes(8.0, 37.75);
        assert!(peaks.len() >= 4);
        for (theta_p, phi_p) in predicted {
            let hit = peaks[..4]
                .iter()
                .any(|p| (p.theta_deg - theta_p).abs() <= 1.0 && (p.phi_deg - phi_p).abs() <= 1.0);
            assert!(hit, "no dominant peak near ({theta_p:.1}, {phi_p:.1})");
        }
        if peaks.len() > 4 {
            assert!(peaks[4].sigma_dbsm < peaks[0].sigma_dbsm - 10.0);
        }
    }

    proptest! {
        #[test]
        fn plate_rcs_is_monotone_in_frequency_and_area(
            w in 1.0f64..100.0, h in 1.0f64..100.0, f in 1.0f64..100.0,
            df in 0.1f64..50.0, dw in 0.1f64..50.0,
        ) {
            let base = pec_plate_rcs(w, h, f);
            prop_assert!(pec_plate_rcs(w, h, f + df) > base);
            prop_assert!(pec_plate_rcs(w + dw, h, f) > base);
        }
    }
}
