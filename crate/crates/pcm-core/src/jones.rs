//! Jones-matrix algebra for reflective anisotropic surfaces.
//!
//! A surface is summarized per frequency by a 2×2 complex reflection matrix
//! acting on tangential field components, either in the cell's principal
//! (UV) frame or in the lab (XY) frame. The module also carries two analytic
//! transmission-line oracles, the grounded dielectric slab and a
//! sheet-loaded converter, used to calibrate and cross-check the field
//! solver.
//!
//! Phase convention: time dependence `exp(+jωt)`; phases are reported in
//! (−180°, 180°].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::consts::{C0, ETA0};
use crate::geometry::StackUp;

#[derive(Debug, Error, PartialEq)]
pub enum JonesError {
    /// DEGENERATE: both co- and cross-polarized magnitudes vanish.
    #[error("DEGENERATE: co- and cross-polarized coefficients are both zero")]
    Degenerate,
    /// BASIS_ERROR: operation defined only in the XY basis.
    #[error("BASIS_ERROR: expected {expected:?} basis, found {found:?}")]
    Basis { expected: Basis, found: Basis },
    #[error("SPECTRUM_ERROR: {0}")]
    Spectrum(&'static str),
}

/// Frame the matrix entries refer to: lab axes or ellipse principal axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    Xy,
    Uv,
}

/// Linear polarization of a normally incident wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarization {
    X,
    Y,
}

/// 2×2 complex reflection matrix `[[r_xx, r_xy], [r_yx, r_yy]]`.
///
/// Row = reflected component, column = incident component, so the reflected
/// field is `r · e_incident`. Entries are field-amplitude ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jones2 {
    pub r: [[Complex64; 2]; 2],
    pub basis: Basis,
}

impl Jones2 {
    pub fn new(
        basis: Basis,
        r_xx: Complex64,
        r_xy: Complex64,
        r_yx: Complex64,
        r_yy: Complex64,
    ) -> Self {
        Self {
            r: [[r_xx, r_xy], [r_yx, r_yy]],
            basis,
        }
    }

    pub fn diagonal(basis: Basis, r_major: Complex64, r_minor: Complex64) -> Self {
        Self::new(
            basis,
            r_major,
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            r_minor,
        )
    }

    /// Full metal sheet: specular reflection of −1 in both axes.
    pub fn pec(basis: Basis) -> Self {
        let m1 = Complex64::new(-1.0, 0.0);
        Self::diagonal(basis, m1, m1)
    }

    pub fn r_xx(&self) -> Complex64 {
        self.r[0][0]
    }
    pub fn r_xy(&self) -> Complex64 {
        self.r[0][1]
    }
    pub fn r_yx(&self) -> Complex64 {
        self.r[1][0]
    }
    pub fn r_yy(&self) -> Complex64 {
        self.r[1][1]
    }

    /// Reflected field for a unit incident field along `pol`.
    pub fn reflect(&self, pol: Polarization) -> (Complex64, Complex64) {
        match pol {
            Polarization::X => (self.r[0][0], self.r[1][0]),
            Polarization::Y => (self.r[0][1], self.r[1][1]),
        }
    }

    /// Largest column norm minus one; positive values flag a gain-like
    /// (non-passive) matrix.
    pub fn passivity_excess(&self) -> f64 {
        let col = |c: usize| (self.r[0][c].norm_sqr() + self.r[1][c].norm_sqr()).sqrt();
        (col(0).max(col(1))) - 1.0
    }
}

/// Polarization conversion ratio for the given incident polarization:
/// `|r_cross|² / (|r_cross|² + |r_co|²)`.
pub fn pcr(j: &Jones2, incident: Polarization) -> Result<f64, JonesError> {
    if j.basis != Basis::Xy {
        return Err(JonesError::Basis {
            expected: Basis::Xy,
            found: j.basis,
        });
    }
    let (co, cross) = match incident {
        Polarization::Y => (j.r_yy(), j.r_xy()),
        Polarization::X => (j.r_xx(), j.r_yx()),
    };
    let (pc, pco) = (cross.norm_sqr(), co.norm_sqr());
    if pc + pco == 0.0 {
        return Err(JonesError::Degenerate);
    }
    Ok(pc / (pc + pco))
}

/// Re-expresses the matrix in a frame rotated by `theta_deg`:
/// `r' = q · r · qᵀ` with `q` the rotation mapping the old components onto
/// the new axes. Rotating by an odd multiple of 45° swaps the UV and XY
/// basis tags; other angles keep the tag.
pub fn rotate_basis(j: &Jones2, theta_deg: f64) -> Jones2 {
    let th = theta_deg.to_radians();
    let (s, c) = th.sin_cos();
    let q = [[c, -s], [s, c]];
    let mut qr = [[Complex64::new(0.0, 0.0); 2]; 2];
    for row in 0..2 {
        for col in 0..2 {
            qr[row][col] = q[row][0] * j.r[0][col] + q[row][1] * j.r[1][col];
        }
    }
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for row in 0..2 {
        for col in 0..2 {
            // (q r qᵀ)[row][col] = Σ_k qr[row][k] q[col][k]
            out[row][col] = qr[row][0] * q[col][0] + qr[row][1] * q[col][1];
        }
    }
    let swaps = {
        let m = theta_deg.rem_euclid(90.0);
        (m - 45.0).abs() < 1e-9
    };
    Jones2 {
        r: out,
        basis: if swaps {
            match j.basis {
                Basis::Xy => Basis::Uv,
                Basis::Uv => Basis::Xy,
            }
        } else {
            j.basis
        },
    }
}

/// Reflection response of the mirrored cell: `m · r · m` with
/// `m = diag(1, −1)`. The diagonal is unchanged and both off-diagonal
/// (cross-polarized) entries flip sign, i.e. gain a 180° phase.
pub fn mirror_transform(j: &Jones2) -> Result<Jones2, JonesError> {
    if j.basis != Basis::Xy {
        return Err(JonesError::Basis {
            expected: Basis::Xy,
            found: j.basis,
        });
    }
    Ok(Jones2::new(
        Basis::Xy,
        j.r_xx(),
        -j.r_xy(),
        -j.r_yx(),
        j.r_yy(),
    ))
}

/// Reflection spectrum of one surface: ordered frequency samples sharing a
/// basis and a phase reference plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionSpectrum {
    samples: Vec<(f64, Jones2)>,
    basis: Basis,
    reference_plane: String,
}

impl ReflectionSpectrum {
    pub fn new(
        samples: Vec<(f64, Jones2)>,
        reference_plane: impl Into<String>,
    ) -> Result<Self, JonesError> {
        if samples.is_empty() {
            return Err(JonesError::Spectrum("spectrum must contain samples"));
        }
        let basis = samples[0].1.basis;
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(JonesError::Spectrum(
                    "frequencies must be strictly increasing",
                ));
            }
        }
        if samples.iter().any(|(_, j)| j.basis != basis) {
            return Err(JonesError::Spectrum("all samples must share one basis"));
        }
        Ok(Self {
            samples,
            basis,
            reference_plane: reference_plane.into(),
        })
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn reference_plane(&self) -> &str {
        &self.reference_plane
    }

    pub fn samples(&self) -> &[(f64, Jones2)] {
        &self.samples
    }

    pub fn freqs_ghz(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|(f, _)| *f)
    }

    pub fn band_ghz(&self) -> (f64, f64) {
        (self.samples[0].0, self.samples[self.samples.len() - 1].0)
    }

    /// Matrix at `f_ghz`, linearly interpolated entry-wise on real and
    /// imaginary parts. `None` outside the covered band.
    pub fn interp(&self, f_ghz: f64) -> Option<Jones2> {
        let (lo, hi) = self.band_ghz();
        if f_ghz < lo || f_ghz > hi {
            return None;
        }
        let idx = self.samples.partition_point(|(f, _)| *f < f_ghz);
        if idx < self.samples.len() && self.samples[idx].0 == f_ghz {
            return Some(self.samples[idx].1);
        }
        let (f0, j0) = &self.samples[idx - 1];
        let (f1, j1) = &self.samples[idx];
        let t = (f_ghz - f0) / (f1 - f0);
        let mut r = [[Complex64::new(0.0, 0.0); 2]; 2];
        for row in 0..2 {
            for col in 0..2 {
                r[row][col] = j0.r[row][col] + (j1.r[row][col] - j0.r[row][col]) * t;
            }
        }
        Some(Jones2 {
            r,
            basis: self.basis,
        })
    }
}

/// Applies [`mirror_transform`] to every sample.
pub fn mirror_spectrum(spectrum: &ReflectionSpectrum) -> Result<ReflectionSpectrum, JonesError> {
    let samples = spectrum
        .samples
        .iter()
        .map(|(f, j)| Ok((*f, mirror_transform(j)?)))
        .collect::<Result<Vec<_>, JonesError>>()?;
    ReflectionSpectrum::new(samples, spectrum.reference_plane.clone())
}

/// Reflection coefficient of a bare grounded dielectric slab at normal
/// incidence, referenced at the dielectric surface.
///
/// `r = (z_in − η₀)/(z_in + η₀)` with `z_in = η_d · tanh(γh)`; for a
/// lossless substrate this reduces to `z_in = j·η_d·tan(βh)`. The pole of
/// `tan` at `βh = π/2` is the open-circuit condition and is handled by its
/// limit `r → +1`.
pub fn grounded_slab_reflection(stack: &StackUp, f_ghz: f64) -> Complex64 {
    assert!(f_ghz > 0.0, "frequency must be positive");
    if stack.h_mm == 0.0 {
        return Complex64::new(-1.0, 0.0);
    }
    let eps_c = Complex64::new(
        stack.substrate.eps_r,
        -stack.substrate.eps_r * stack.substrate.tan_delta,
    );
    let sqrt_eps = eps_c.sqrt();
    let eta_d = ETA0 / sqrt_eps;
    let h = stack.h_mm * 1e-3;
    let gamma_h = Complex64::new(0.0, 2.0 * std::f64::consts::PI * f_ghz * 1e9 / C0) * sqrt_eps * h;
    let t = gamma_h.tanh();
    if !t.is_finite() || t.norm() > 1e12 {
        // Open-circuit limit.
        return Complex64::new(1.0, 0.0);
    }
    let z_in = eta_d * t;
    (z_in - ETA0) / (z_in + ETA0)
}

/// Lossless sheet impedance seen by one polarization axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SheetImpedance {
    /// No sheet loading (open circuit).
    Open,
    /// Series reactance `jX` in ohms.
    Reactance(f64),
}

/// Series-LC sheet reactance `ωL − 1/(ωC)` in ohms at `f_ghz`.
pub fn series_lc_reactance(l_henry: f64, c_farad: f64, f_ghz: f64) -> f64 {
    let w = 2.0 * std::f64::consts::PI * f_ghz * 1e9;
    w * l_henry - 1.0 / (w * c_farad)
}

/// Analytic converter model: per principal axis, a reactive sheet in
/// parallel with the grounded-slab input impedance.
///
/// Returns `diag(r_u, r_v)` in the UV basis, where
/// `r_i = (z_eff − η₀)/(z_eff + η₀)` and `z_eff = z_sheet ∥ j·η_d·tan(βh)`.
/// A strongly resonant sheet along the long axis and a weak one along the
/// short axis make the two reflections differ by roughly 180°, which is the
/// conversion mechanism this model reproduces.
pub fn tl_converter_model(
    stack: &StackUp,
    z_u: SheetImpedance,
    z_v: SheetImpedance,
    f_ghz: f64,
) -> Jones2 {
    let r_axis = |z: SheetImpedance| -> Complex64 {
        let beta_h = 2.0 * std::f64::consts::PI * f_ghz * 1e9 * stack.substrate.eps_r.sqrt() / C0
            * stack.h_mm
            * 1e-3;
        let eta_d = ETA0 / stack.substrate.eps_r.sqrt();
        let x_slab = eta_d * beta_h.tan(); // z_slab = j·x_slab
        let z_eff = match z {
            SheetImpedance::Open => Complex64::new(0.0, x_slab),
            SheetImpedance::Reactance(x) => {
                // Parallel combination of two pure reactances jx, jx_slab.
                let denom = x + x_slab;
                if denom.abs() < 1e-300 {
                    // Anti-resonant pair: open circuit.
                    return Complex64::new(1.0, 0.0);
                }
                Complex64::new(0.0, x * x_slab / denom)
            }
        };
        if !z_eff.is_finite() || z_eff.norm() > 1e12 {
            return Complex64::new(1.0, 0.0);
        }
        (z_eff - ETA0) / (z_eff + ETA0)
    };
    Jones2::diagonal(Basis::Uv, r_axis(z_u), r_axis(z_v))
}
