//! Physical constants (SI) and the default numerical parameters shared by
//! the simulation pipeline.

/// Speed of light in vacuum, m/s (exact).
pub const C0: f64 = 299_792_458.0;
/// Boltzmann constant, J/K (exact).
pub const KB: f64 = 1.380_649e-23;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 8.854_187_8128e-12;
/// Elementary charge, C (exact).
pub const E_CHARGE: f64 = 1.602_176_634e-19;
/// Bohr radius, m.
pub const A0: f64 = 0.529_177_210_903e-10;
/// Atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;

/// Atomic mass of 133Cs, kg (132.905451961 u).
pub const CS_MASS: f64 = 132.905_451_961 * AMU;
/// Vacuum wavelength used for the D1 carrier, m.
pub const CS_D1_WAVELENGTH: f64 = 894.335e-9;
/// Natural linewidth (FWHM) of the 6p 2P1/2 state, Hz.
pub const CS_D1_NATURAL_FWHM: f64 = 4.5612e6;
/// Ground-state hyperfine splitting of 133Cs, Hz (exact by SI definition).
pub const CS_GROUND_SPLITTING: f64 = 9.192_631_770e9;
/// Excited-state (6p 2P1/2) hyperfine splitting, Hz.
pub const CS_EXCITED_SPLITTING: f64 = 1.167_68e9;
/// Melting point of cesium, K; selects the vapor-pressure branch.
pub const CS_MELTING_POINT: f64 = 301.59;

/// Effective reduced dipole moment squared, (C m)^2, used in the
/// susceptibility prefactor. Calibrated once so that a 40 mm cell at
/// 356.65 K with population factor 1 reaches a decadic peak optical density
/// of 69 on the F=4 -> F'=3 line; comes out at 4.826 e*a0, within 8 % of
/// the bare 2S1/2 -> 2P1/2 reduced matrix element (4.489 e*a0), the excess
/// absorbing the rho44 = 1/2 ground-population convention.
pub const CS_D1_DIPOLE_SQ: f64 = 1.674_100_598_256_254e-57;

/// Default number of time samples (power of two).
pub const DEFAULT_TIME_SAMPLES: usize = 1 << 16;
/// Default time-grid spacing, s.
pub const DEFAULT_TIME_STEP: f64 = 8e-12;
/// Default start of the time window, s. Leaves room for detector-response
/// tails and "fast light" arrivals before the emission at t = 0.
pub const DEFAULT_TIME_START: f64 = -32e-9;
/// Default Gauss-Hermite node count for the spectral-diffusion average.
pub const DEFAULT_QUADRATURE_NODES: usize = 101;
/// Default detector timing jitter (Gaussian FWHM), s.
pub const DEFAULT_IRF_FWHM: f64 = 1.060e-9;
/// Default Fabry-Pérot filter linewidth (Lorentzian FWHM), Hz.
pub const DEFAULT_FILTER_FWHM: f64 = 192e6;
/// Default Fabry-Pérot free spectral range, Hz.
pub const DEFAULT_FILTER_FSR: f64 = 37.8e9;
/// Default vapor-cell length, m.
pub const DEFAULT_CELL_LENGTH: f64 = 0.04;
/// Default exciton lifetime, s.
pub const DEFAULT_T1: f64 = 1.04e-9;
/// Default inhomogeneous (spectral-diffusion) FWHM, Hz.
pub const DEFAULT_INHOM_FWHM: f64 = 3.57e9;
/// Filter-resonator linear tuning coefficient, Hz/K.
pub const DEFAULT_TUNING_COEFFICIENT: f64 = -2.64e9;
/// Correction factor on the tuning coefficient for incomplete
/// resonator thermalization.
pub const DEFAULT_TUNING_CORRECTION: f64 = 0.4;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_relations_hold() {
        assert!((CS_MASS - 2.206_946_951_453_701e-25).abs() < 1e-36);
        let nu = C0 / CS_D1_WAVELENGTH;
        assert!((nu - 3.352_127_088_842_548e14).abs() / nu < 1e-14);
        // excited-state splitting puts the F=4 resonances near +-0.6 GHz
        assert!((CS_EXCITED_SPLITTING / 2.0 - 0.6e9).abs() < 0.1e9);
    }
}
