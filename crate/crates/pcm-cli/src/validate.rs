//! Built-in oracle and property suite behind `pcm validate`.
//!
//! Fast self-checks of the analytic oracles, geometry, scattering paths,
//! optimizer, and the solver calibration chain. Each check prints one
//! line; any failure flips the exit code.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pcm_core::{
    build_checkerboard, build_unit_cell, far_field_direct, far_field_fft, grounded_slab_reflection,
    mirror_spectrum, mirror_transform, paint_aperture, pattern_search, pcr, pec_plate_rcs,
    predict_lobes, rasterize, rotate_basis, run_reference, scatter, ApertureField, Basis,
    Handedness, Jones2, Material, Polarization, ReflectionSpectrum, SolverConfig, StackUp,
};

pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name,
        passed,
        detail,
    }
}

fn paper_stack(tan_delta: f64) -> StackUp {
    StackUp::new(
        Material::new("substrate", 2.2, tan_delta).unwrap(),
        1.0,
        0.035,
        true,
    )
    .unwrap()
}

fn ideal_spectra() -> (ReflectionSpectrum, ReflectionSpectrum) {
    let j = Jones2::new(
        Basis::Xy,
        Complex64::new(0.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 0.0),
    );
    let unit = ReflectionSpectrum::new(vec![(20.0, j), (60.0, j)], "ideal").unwrap();
    let mirror = mirror_spectrum(&unit).unwrap();
    (unit, mirror)
}

pub fn run_all() -> Vec<CheckResult> {
    let mut results = Vec::new();

    // Conversion-ratio algebra.
    let rotated = rotate_basis(
        &Jones2::diagonal(
            Basis::Uv,
            Complex64::new(-1.0, 0.0),
            Complex64::new(1.0, 0.0),
        ),
        45.0,
    );
    let p = pcr(&rotated, Polarization::Y).unwrap();
    results.push(check("pcr_rotation_oracle", p == 1.0, format!("pcr = {p}")));

    let j = Jones2::new(
        Basis::Xy,
        Complex64::new(0.0, 0.0),
        Complex64::new(0.9f64.sqrt(), 0.0),
        Complex64::new(0.9f64.sqrt(), 0.0),
        Complex64::new(0.1f64.sqrt(), 0.0),
    );
    let p = pcr(&j, Polarization::Y).unwrap();
    results.push(check(
        "pcr_arithmetic",
        (p - 0.9).abs() < 1e-12,
        format!("pcr = {p:.15}"),
    ));

    // Mirror transform cancels cross-polarized terms.
    let sample = Jones2::new(
        Basis::Xy,
        Complex64::new(0.11, -0.2),
        Complex64::new(-0.7, 0.6),
        Complex64::new(-0.7, 0.6),
        Complex64::new(0.3, 0.9),
    );
    let m = mirror_transform(&sample).unwrap();
    let cancel = (sample.r_xy() + m.r_xy()).norm();
    results.push(check(
        "mirror_cancellation",
        cancel == 0.0,
        format!("residual {cancel}"),
    ));

    // Grounded-slab oracle: unimodular when lossless, reference phase pinned.
    let mut ok = true;
    for f in [20.0, 30.0, 40.0, 50.0, 60.0] {
        ok &= (grounded_slab_reflection(&paper_stack(0.0), f).norm() - 1.0).abs() < 1e-12;
    }
    results.push(check(
        "slab_lossless_unimodular",
        ok,
        "|r| = 1 across band".into(),
    ));
    let r30 = grounded_slab_reflection(&paper_stack(0.0), 30.0);
    let phase_err = (r30.arg().to_degrees() - 95.463_107_433_008_7).abs();
    results.push(check(
        "slab_reference_phase",
        phase_err < 1e-6,
        format!("phase error {phase_err:.2e} deg"),
    ));

    // Sheet-model limits.
    let pec = pcm_core::tl_converter_model(
        &paper_stack(0.0),
        pcm_core::SheetImpedance::Reactance(0.0),
        pcm_core::SheetImpedance::Reactance(0.0),
        35.0,
    );
    let pec_ok =
        pec.r[0][0] == Complex64::new(-1.0, 0.0) && pec.r[1][1] == Complex64::new(-1.0, 0.0);
    results.push(check(
        "sheet_model_pec_limit",
        pec_ok,
        "diag(-1, -1)".into(),
    ));

    // Rasterized metal area vs. the analytic ellipse.
    let cell = build_unit_cell(4.0, 3.8, 1.3, paper_stack(0.0009), Handedness::Unit).unwrap();
    let mask = rasterize(&cell, 0.05).unwrap();
    let exact = std::f64::consts::PI * 1.9 * 0.65;
    let rel = (mask.metal_area_mm2() - exact).abs() / exact;
    results.push(check(
        "rasterize_area",
        rel < 0.02,
        format!("relative error {rel:.4}"),
    ));

    // Checkerboard bookkeeping.
    let layout = build_checkerboard(3, 5, 2, &cell, None).unwrap();
    let counts_ok = layout.counts() == (8, 7, 0, 0) && layout.extent_mm() == (24.0, 40.0);
    results.push(check(
        "checkerboard_counts",
        counts_ok,
        format!("{:?}", layout.counts()),
    ));

    // Conducting-plate reference values.
    let p30 = pec_plate_rcs(28.7, 41.6, 30.0);
    let p3775 = pec_plate_rcs(28.7, 41.6, 37.75);
    let plate_ok =
        (p30 + 7.462_385_776_729_64).abs() < 1e-6 && (p3775 + 5.466_471_751_818_746).abs() < 1e-6;
    results.push(check(
        "plate_reference",
        plate_ok,
        format!("{p30:.4} / {p3775:.4} dBsm"),
    ));

    // Transform vs. direct far-field paths on a random aperture.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut sample = |_: usize| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let ap = ApertureField {
        pitch_mm: 1.5,
        nx: 12,
        ny: 20,
        co: (0..240).map(&mut sample).collect(),
        cross: (0..240).map(&mut sample).collect(),
        freq_ghz: 37.75,
        incident_pol: Polarization::Y,
    };
    let fft = far_field_fft(&ap, 32);
    let uv: Vec<(f64, f64)> = fft.iter().map(|s| (s.u, s.v)).collect();
    let direct = scatter::far_field_direct_uv(&ap, &uv);
    let scale = direct
        .iter()
        .map(|(a, b)| a.norm().max(b.norm()))
        .fold(0.0, f64::max);
    let worst = fft
        .iter()
        .zip(&direct)
        .map(|(s, (oc, ox))| ((s.co - oc).norm().max((s.cross - ox).norm())) / scale)
        .fold(0.0, f64::max);
    results.push(check(
        "far_field_paths_agree",
        worst < 1e-9,
        format!("max relative difference {worst:.2e}"),
    ));

    // Broadside amplitude = plain sample sum times area.
    let (bc, _) = scatter::broadside_amplitudes(&ap);
    let f0 = far_field_direct(&ap, &[(0.0, 0.0)])[0].0;
    let diff = (bc - f0).norm() / bc.norm();
    results.push(check(
        "broadside_identity",
        diff < 1e-12,
        format!("relative {diff:.2e}"),
    ));

    // Checkerboard lobes: the direct pattern peaks where predicted.
    let (unit_sp, mirror_sp) = ideal_spectra();
    let board = build_checkerboard(12, 12, 2, &cell, None).unwrap();
    let painted = paint_aperture(&board, &unit_sp, &mirror_sp, 37.75, Polarization::Y).unwrap();
    let predicted = predict_lobes(8.0, 37.75);
    let cut: Vec<(f64, f64)> = (0..101).map(|i| (40.0 + 0.1 * i as f64, 45.0)).collect();
    let amps = far_field_direct(&painted, &cut);
    let best = amps
        .iter()
        .enumerate()
        .max_by(|a, b| {
            let pa = a.1 .0.norm_sqr() + a.1 .1.norm_sqr();
            let pb = b.1 .0.norm_sqr() + b.1 .1.norm_sqr();
            pa.partial_cmp(&pb).unwrap()
        })
        .unwrap()
        .0;
    let theta_found = cut[best].0;
    let lobe_err = (theta_found - predicted[0].0).abs();
    results.push(check(
        "checkerboard_lobe_direction",
        lobe_err <= 1.0,
        format!(
            "peak at {theta_found:.1} deg, predicted {:.2} deg",
            predicted[0].0
        ),
    ));

    // One-tile imbalance residue.
    let curve =
        pcm_core::monostatic_reduction(&layout, &unit_sp, &mirror_sp, (37.75, 37.75), 1).unwrap();
    let resid = (curve[0].delta_db + 23.521_825_181_113_627).abs();
    results.push(check(
        "checkerboard_residue",
        resid < 1e-9,
        format!("delta {:.4} dB", curve[0].delta_db),
    ));

    // Bounded search on the surrogate quadratic.
    let mut objective = |x: &[f64]| Some(-(x[0] - 0.3) * (x[0] - 0.3));
    let search = pattern_search(&mut objective, &[(0.0, 1.0)], None, 500, 7).unwrap();
    let opt_err = (search.best_x[0] - 0.3).abs();
    results.push(check(
        "pattern_search_quadratic",
        opt_err < 1e-6,
        format!("best x = {:.8}", search.best_x[0]),
    ));

    // Solver calibration chain on the 1x1 grid.
    let config = SolverConfig {
        resolution_mm: 0.05,
        band_ghz: (20.0, 60.0),
        n_freq: 9,
        ..SolverConfig::default()
    };
    match run_reference(&paper_stack(0.0), &config) {
        Ok(reference) => {
            let cal_ok = reference
                .calibrated_ground_reflection()
                .iter()
                .all(|r| (r - Complex64::new(-1.0, 0.0)).norm() < 1e-3);
            let raw_ok = reference
                .ground_reflection
                .iter()
                .zip(&reference.incident_spectrum)
                .all(|(g, i)| ((g / i).norm() - 1.0).abs() < 5e-3);
            results.push(check(
                "solver_ground_calibration",
                cal_ok && raw_ok,
                "calibrated -1, raw near-unimodular".into(),
            ));
        }
        Err(e) => results.push(check("solver_ground_calibration", false, e.to_string())),
    }

    results
}
