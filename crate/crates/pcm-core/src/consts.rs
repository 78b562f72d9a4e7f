//! Physical constants and unit helpers shared across the crate.

/// Speed of light in vacuum (m/s).
pub const C0: f64 = 299_792_458.0;

/// Permeability of free space (H/m).
pub const MU0: f64 = 4.0e-7 * std::f64::consts::PI;

/// Permittivity of free space (F/m), consistent with `C0` and `MU0`.
pub const EPS0: f64 = 1.0 / (MU0 * C0 * C0);

/// Free-space wave impedance (ohms).
pub const ETA0: f64 = MU0 * C0;

/// Free-space wavelength in meters at a frequency in GHz.
pub fn wavelength_m(f_ghz: f64) -> f64 {
    C0 / (f_ghz * 1e9)
}

/// Free-space wavenumber in rad/m at a frequency in GHz.
pub fn wavenumber(f_ghz: f64) -> f64 {
    2.0 * std::f64::consts::PI * f_ghz * 1e9 / C0
}

pub const MM: f64 = 1e-3;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_constants_are_consistent() {
        assert!((EPS0 - 8.854_187_817_620_389e-12).abs() < 1e-22);
        assert!((ETA0 - 376.730_313_461_770_66).abs() < 1e-9);
        assert!((wavelength_m(37.75) - 7.941_522_066_225_166e-3).abs() < 1e-15);
    }
}
