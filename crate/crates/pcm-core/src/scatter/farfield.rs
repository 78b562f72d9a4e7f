//! Physical-optics far fields of a sampled aperture.
//!
//! The scattered amplitude in direction (θ, φ) is the discrete aperture
//! integral `F(u,v) = Σ E(x,y) · exp(+jk(ux + vy)) · dA` with direction
//! cosines `u = sinθ·cosφ`, `v = sinθ·sinφ`, and the radar cross section is
//! `σ = 4π(|F_co|² + |F_cross|²)/λ²`.
//!
//! Three evaluation paths share these conventions exactly:
//! production patterns on a (θ, φ) grid use per-direction phase tables; a
//! padded 2-D FFT evaluates the same sum on its natural direction-cosine
//! lattice; and a naive triple loop serves as the independent oracle the
//! other two are checked against.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::consts::{wavelength_m, wavenumber};

use super::{to_dbsm, ApertureField, ScatterError};

/// Far-field pattern on a (θ, φ) grid at one frequency.
#[derive(Debug, Clone)]
pub struct FarFieldPattern {
    pub freq_ghz: f64,
    pub theta_deg: Vec<f64>,
    pub phi_deg: Vec<f64>,
    /// Row-major `[i_theta][i_phi]` complex amplitudes per polarization.
    pub co: Vec<Complex64>,
    pub cross: Vec<Complex64>,
    /// RCS in dBsm, floored at −100.
    pub sigma_dbsm: Vec<f64>,
}

impl FarFieldPattern {
    pub fn sigma(&self, i_theta: usize, i_phi: usize) -> f64 {
        self.sigma_dbsm[i_theta * self.phi_deg.len() + i_phi]
    }

    pub fn amplitudes(&self, i_theta: usize, i_phi: usize) -> (Complex64, Complex64) {
        let idx = i_theta * self.phi_deg.len() + i_phi;
        (self.co[idx], self.cross[idx])
    }
}

/// Default θ grid: 0° to 89° in 0.5° steps.
pub fn default_theta_grid() -> Vec<f64> {
    (0..179).map(|i| i as f64 * 0.5).collect()
}

/// Default φ grid: 0° to 359.5° in 0.5° steps.
pub fn default_phi_grid() -> Vec<f64> {
    (0..720).map(|i| i as f64 * 0.5).collect()
}

/// Sample abscissae (m), centered on the aperture.
fn sample_coords(n: usize, pitch_m: f64) -> Vec<f64> {
    let half = n as f64 * pitch_m / 2.0;
    (0..n).map(|i| (i as f64 + 0.5) * pitch_m - half).collect()
}

pub(crate) fn sigma_m2(co: Complex64, cross: Complex64, lambda_m: f64) -> f64 {
    4.0 * std::f64::consts::PI * (co.norm_sqr() + cross.norm_sqr()) / (lambda_m * lambda_m)
}

/// Complex amplitudes for one direction-cosine pair using per-row/column
/// phase tables.
fn amplitudes_uv_tabulated(
    ap: &ApertureField,
    xs: &[f64],
    ys: &[f64],
    k: f64,
    u: f64,
    v: f64,
    da: f64,
) -> (Complex64, Complex64) {
    let px: Vec<Complex64> = xs
        .iter()
        .map(|&x| {
            let (s, c) = (k * u * x).sin_cos();
            Complex64::new(c, s)
        })
        .collect();
    let mut f_co = Complex64::new(0.0, 0.0);
    let mut f_cross = Complex64::new(0.0, 0.0);
    for (j, &y) in ys.iter().enumerate() {
        let row = j * ap.nx;
        let mut row_co = Complex64::new(0.0, 0.0);
        let mut row_cross = Complex64::new(0.0, 0.0);
        for i in 0..ap.nx {
            row_co += ap.co[row + i] * px[i];
            row_cross += ap.cross[row + i] * px[i];
        }
        let (s, c) = (k * v * y).sin_cos();
        let py = Complex64::new(c, s);
        f_co += row_co * py;
        f_cross += row_cross * py;
    }
    (f_co * da, f_cross * da)
}

/// Production far-field pattern over a (θ, φ) grid.
///
/// Requires the aperture sampling to resolve the shortest wave:
/// pitch ≤ λ/4.
pub fn far_field(
    ap: &ApertureField,
    theta_deg: &[f64],
    phi_deg: &[f64],
) -> Result<FarFieldPattern, ScatterError> {
    let lambda = wavelength_m(ap.freq_ghz);
    let pitch_m = ap.pitch_mm * 1e-3;
    if pitch_m > lambda / 4.0 {
        return Err(ScatterError::Sampling {
            pitch_mm: ap.pitch_mm,
            limit_mm: lambda / 4.0 * 1e3,
        });
    }
    let k = wavenumber(ap.freq_ghz);
    let xs = sample_coords(ap.nx, pitch_m);
    let ys = sample_coords(ap.ny, pitch_m);
    let da = pitch_m * pitch_m;
    let n = theta_deg.len() * phi_deg.len();
    let mut co = Vec::with_capacity(n);
    let mut cross = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    for &th in theta_deg {
        let st = th.to_radians().sin();
        for &ph in phi_deg {
            let (sp, cp) = ph.to_radians().sin_cos();
            let (u, v) = (st * cp, st * sp);
            let (fc, fx) = amplitudes_uv_tabulated(ap, &xs, &ys, k, u, v, da);
            co.push(fc);
            cross.push(fx);
            sigma.push(to_dbsm(sigma_m2(fc, fx, lambda)));
        }
    }
    Ok(FarFieldPattern {
        freq_ghz: ap.freq_ghz,
        theta_deg: theta_deg.to_vec(),
        phi_deg: phi_deg.to_vec(),
        co,
        cross,
        sigma_dbsm: sigma,
    })
}

/// Brute-force aperture sum, one `exp` per sample and direction. This is
/// the reference the production and transform paths are verified against.
pub fn far_field_direct(
    ap: &ApertureField,
    directions_deg: &[(f64, f64)],
) -> Vec<(Complex64, Complex64)> {
    let uv: Vec<(f64, f64)> = directions_deg
        .iter()
        .map(|&(th, ph)| {
            let st = th.to_radians().sin();
            let (sp, cp) = ph.to_radians().sin_cos();
            (st * cp, st * sp)
        })
        .collect();
    far_field_direct_uv(ap, &uv)
}

/// Brute-force sum at explicit direction cosines.
pub fn far_field_direct_uv(ap: &ApertureField, uv: &[(f64, f64)]) -> Vec<(Complex64, Complex64)> {
    let k = wavenumber(ap.freq_ghz);
    let pitch_m = ap.pitch_mm * 1e-3;
    let xs = sample_coords(ap.nx, pitch_m);
    let ys = sample_coords(ap.ny, pitch_m);
    let da = pitch_m * pitch_m;
    uv.iter()
        .map(|&(u, v)| {
            let mut f_co = Complex64::new(0.0, 0.0);
            let mut f_cross = Complex64::new(0.0, 0.0);
            for (j, &y) in ys.iter().enumerate() {
                for (i, &x) in xs.iter().enumerate() {
                    let (s, c) = (k * (u * x + v * y)).sin_cos();
                    let w = Complex64::new(c, s);
                    f_co += ap.co[j * ap.nx + i] * w;
                    f_cross += ap.cross[j * ap.nx + i] * w;
                }
            }
            (f_co * da, f_cross * da)
        })
        .collect()
}

/// One propagating sample of the transform-evaluated far field.
#[derive(Debug, Clone, Copy)]
pub struct FftFarFieldSample {
    pub u: f64,
    pub v: f64,
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub co: Complex64,
    pub cross: Complex64,
    pub sigma_dbsm: f64,
}

/// Fast transform path: zero-padded 2-D FFT evaluated on its natural
/// direction-cosine lattice `u_m = mλ/(M·pitch)`. Returns the propagating
/// samples (u² + v² < 1).
pub fn far_field_fft(ap: &ApertureField, min_grid: usize) -> Vec<FftFarFieldSample> {
    let lambda = wavelength_m(ap.freq_ghz);
    let pitch_m = ap.pitch_mm * 1e-3;
    let k = wavenumber(ap.freq_ghz);
    let da = pitch_m * pitch_m;
    let mx = min_grid.max(ap.nx).next_power_of_two();
    let my = min_grid.max(ap.ny).next_power_of_two();

    // The aperture integral uses exp(+j·k·u·x); with x_i = i·pitch + off,
    // k·u_m·pitch = 2πm/M makes the inner sum exactly an (unnormalized)
    // inverse DFT times a per-index offset phase.
    let mut grid = vec![Complex64::new(0.0, 0.0); mx * my * 2];
    let (co_grid, cross_grid) = grid.split_at_mut(mx * my);
    for j in 0..ap.ny {
        for i in 0..ap.nx {
            co_grid[j * mx + i] = ap.co[j * ap.nx + i];
            cross_grid[j * mx + i] = ap.cross[j * ap.nx + i];
        }
    }
    let mut planner = FftPlanner::new();
    let mut fft2 = |data: &mut [Complex64]| {
        let row_fft = planner.plan_fft_inverse(mx);
        for j in 0..my {
            row_fft.process(&mut data[j * mx..(j + 1) * mx]);
        }
        let col_fft = planner.plan_fft_inverse(my);
        let mut col = vec![Complex64::new(0.0, 0.0); my];
        for i in 0..mx {
            for j in 0..my {
                col[j] = data[j * mx + i];
            }
            col_fft.process(&mut col);
            for j in 0..my {
                data[j * mx + i] = col[j];
            }
        }
    };
    fft2(co_grid);
    fft2(cross_grid);

    let off_x = 0.5 * pitch_m - ap.nx as f64 * pitch_m / 2.0;
    let off_y = 0.5 * pitch_m - ap.ny as f64 * pitch_m / 2.0;
    let signed = |idx: usize, m: usize| -> i64 {
        let half = (m / 2) as i64;
        let i = idx as i64;
        if i >= half {
            i - m as i64
        } else {
            i
        }
    };
    let mut out = Vec::new();
    for jn in 0..my {
        let n = signed(jn, my);
        let v = n as f64 * lambda / (my as f64 * pitch_m);
        for im in 0..mx {
            let m = signed(im, mx);
            let u = m as f64 * lambda / (mx as f64 * pitch_m);
            let r2 = u * u + v * v;
            if r2 >= 1.0 {
                continue;
            }
            let (s, c) = (k * (u * off_x + v * off_y)).sin_cos();
            let offset_phase = Complex64::new(c, s);
            let co = co_grid[jn * mx + im] * offset_phase * da;
            let cross = cross_grid[jn * mx + im] * offset_phase * da;
            let theta = r2.sqrt().asin().to_degrees();
            let phi = v.atan2(u).to_degrees().rem_euclid(360.0);
            out.push(FftFarFieldSample {
                u,
                v,
                theta_deg: theta,
                phi_deg: phi,
                co,
                cross,
                sigma_dbsm: to_dbsm(sigma_m2(co, cross, lambda)),
            });
        }
    }
    out
}

/// Broadside (θ = 0) amplitudes: the plain sum of samples times the sample
/// area, which is what checkerboard cancellation acts on.
pub fn broadside_amplitudes(ap: &ApertureField) -> (Complex64, Complex64) {
    let da = (ap.pitch_mm * 1e-3) * (ap.pitch_mm * 1e-3);
    let sum = |v: &[Complex64]| v.iter().sum::<Complex64>() * da;
    (sum(&ap.co), sum(&ap.cross))
}
