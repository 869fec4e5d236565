//! Cs D1 atomic structure: hyperfine level splittings, relative transition
//! strengths from angular-momentum algebra, and vapor number density vs.
//! temperature.

mod wigner;

pub use wigner::wigner6j;

use crate::constants::{
    C0, CS_D1_NATURAL_FWHM, CS_D1_WAVELENGTH, CS_EXCITED_SPLITTING, CS_GROUND_SPLITTING,
    CS_MASS, CS_MELTING_POINT, DEFAULT_CELL_LENGTH, KB,
};
use crate::error::{Error, Result};

/// Validity window of the vapor-pressure correlation, K.
pub const DENSITY_VALIDITY: (f64, f64) = (250.0, 500.0);

/// One hyperfine component of the D1 line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperfineTransition {
    /// Ground-state total angular momentum F (3 or 4).
    pub f_ground: u32,
    /// Excited-state total angular momentum F' (3 or 4).
    pub f_excited: u32,
    /// Line position relative to the carrier anchor nu0 (the midpoint of
    /// F=4 -> F'=3 and F=4 -> F'=4), Hz.
    pub detuning: f64,
    /// Relative line strength, normalized to sum to 1 per ground F.
    pub strength: f64,
}

/// Cs D1 level structure and line data.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomModel {
    /// Optical frequency of the line-center anchor nu0, Hz.
    pub nu_line: f64,
    /// Natural linewidth (FWHM) of the excited state, Hz.
    pub gamma_nat: f64,
    /// Atomic mass, kg.
    pub mass: f64,
    /// Ground-state hyperfine splitting, Hz.
    pub delta_ground: f64,
    /// Excited-state hyperfine splitting, Hz.
    pub delta_excited: f64,
    /// The four hyperfine components (F=3,4) -> (F'=3,4).
    pub transitions: Vec<HyperfineTransition>,
}

impl AtomModel {
    /// The Cs D1 model with tabulated splittings and strengths derived from
    /// 6-j angular-momentum algebra.
    pub fn cs_d1() -> Self {
        let nu_line = C0 / CS_D1_WAVELENGTH;
        let dg = CS_GROUND_SPLITTING;
        let de = CS_EXCITED_SPLITTING;
        let mut transitions = Vec::with_capacity(4);
        // Transitions from F=4 straddle nu0; F=3 lines sit one ground
        // splitting higher in optical frequency.
        for (f_ground, base) in [(4u32, 0.0), (3u32, dg)] {
            let strengths = line_strengths(f_ground).expect("D1 quantum numbers are valid");
            for (f_excited, strength) in strengths {
                let detuning = base
                    + match f_excited {
                        3 => -de / 2.0,
                        _ => de / 2.0,
                    };
                transitions.push(HyperfineTransition {
                    f_ground,
                    f_excited,
                    detuning,
                    strength,
                });
            }
        }
        Self {
            nu_line,
            gamma_nat: CS_D1_NATURAL_FWHM,
            mass: CS_MASS,
            delta_ground: dg,
            delta_excited: de,
            transitions,
        }
    }
}

/// Relative strengths of the two D1 components sharing the ground level
/// `f_ground`, as `(f_excited, strength)` pairs normalized to sum to 1.
///
/// Strengths are proportional to (2F'+1)(2J+1) {J J' 1; F' F I}^2 with
/// I = 7/2 and J = J' = 1/2.
pub fn line_strengths(f_ground: u32) -> Result<Vec<(u32, f64)>> {
    if f_ground != 3 && f_ground != 4 {
        return Err(Error::InvalidParameter(format!(
            "D1 ground state must have F = 3 or 4, got {f_ground}"
        )));
    }
    let nuclear_spin = 3.5;
    let j = 0.5;
    let mut raw = Vec::with_capacity(2);
    for f_excited in [3u32, 4u32] {
        let six_j = wigner6j(
            j,
            j,
            1.0,
            f_excited as f64,
            f_ground as f64,
            nuclear_spin,
        )?;
        let strength = (2.0 * f_excited as f64 + 1.0) * (2.0 * j + 1.0) * six_j * six_j;
        raw.push((f_excited, strength));
    }
    let total: f64 = raw.iter().map(|&(_, s)| s).sum();
    Ok(raw.into_iter().map(|(f, s)| (f, s / total)).collect())
}

/// Cesium vapor number density from temperature, atoms/m^3.
///
/// Vapor pressure from the Alcock-Itkin-Horrigan correlation
/// (CALPHAD 8, 335 (1984); also the form tabulated in Steck's alkali data):
/// log10 p[atm] = 4.711 - 3999/T below the melting point and
/// 4.165 - 3830/T above it, converted to density by the ideal-gas law.
/// Stated accuracy is about +-5 % over the validity window.
pub fn number_density(temperature: f64) -> Result<f64> {
    let (lo, hi) = DENSITY_VALIDITY;
    if !(temperature > lo && temperature < hi) {
        return Err(Error::TemperatureOutOfRange {
            value: temperature,
            lo,
            hi,
        });
    }
    let log10_p_atm = if temperature < CS_MELTING_POINT {
        4.711 - 3999.0 / temperature
    } else {
        4.165 - 3830.0 / temperature
    };
    let pressure = 101_325.0 * 10f64.powf(log10_p_atm);
    Ok(pressure / (KB * temperature))
}

/// A heated vapor cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VaporCell {
    /// Optical path length, m.
    pub length: f64,
    /// Vapor temperature, K.
    pub temperature: f64,
    /// Overrides the vapor-pressure density when set, atoms/m^3.
    pub density_override: Option<f64>,
    /// Ground-population scale rho44_bar / rho44_tilde; 1 at thermal
    /// equilibrium, reduced by optical pumping.
    pub population_factor: f64,
}

impl VaporCell {
    pub fn new(length: f64, temperature: f64) -> Result<Self> {
        Self::with_options(length, temperature, None, 1.0)
    }

    pub fn with_options(
        length: f64,
        temperature: f64,
        density_override: Option<f64>,
        population_factor: f64,
    ) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "cell length must be positive, got {length}"
            )));
        }
        if !(temperature > 0.0) || !temperature.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "cell temperature must be positive, got {temperature}"
            )));
        }
        if !(population_factor >= 0.0) || !population_factor.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "population factor must be >= 0, got {population_factor}"
            )));
        }
        if let Some(d) = density_override {
            if !(d >= 0.0) || !d.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "density override must be >= 0, got {d}"
                )));
            }
        }
        Ok(Self {
            length,
            temperature,
            density_override,
            population_factor,
        })
    }

    /// The 40 mm cell at the given temperature (degrees Celsius for
    /// convenience of the common scenarios).
    pub fn standard_at_celsius(theta_c: f64) -> Result<Self> {
        Self::new(DEFAULT_CELL_LENGTH, theta_c + 273.15)
    }

    /// Number density actually used: the override if present, otherwise the
    /// vapor-pressure correlation at the cell temperature.
    pub fn density(&self) -> Result<f64> {
        match self.density_override {
            Some(d) => Ok(d),
            None => number_density(self.temperature),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_has_four_transitions_with_exact_splittings() {
        let m = AtomModel::cs_d1();
        assert_eq!(m.transitions.len(), 4);
        let det = |fg, fe| {
            m.transitions
                .iter()
                .find(|t| t.f_ground == fg && t.f_excited == fe)
                .unwrap()
                .detuning
        };
        // F=4 lines straddle nu0 by +-delta_excited/2 exactly
        assert_eq!(det(4, 3), -m.delta_excited / 2.0);
        assert_eq!(det(4, 4), m.delta_excited / 2.0);
        // splittings reproduced exactly
        assert_eq!(det(3, 3) - det(4, 3), m.delta_ground);
        assert_eq!(det(3, 4) - det(3, 3), m.delta_excited);
    }

    #[test]
    fn strengths_satisfy_sum_rule_and_ratios() {
        let m = AtomModel::cs_d1();
        for fg in [3u32, 4] {
            let sum: f64 = m
                .transitions
                .iter()
                .filter(|t| t.f_ground == fg)
                .map(|t| t.strength)
                .sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
        let s = |fg, fe| {
            m.transitions
                .iter()
                .find(|t| t.f_ground == fg && t.f_excited == fe)
                .unwrap()
                .strength
        };
        // S(4->3):S(4->4) = 7:5 and S(3->4):S(3->3) = 3:1
        assert!((s(4, 3) / s(4, 4) - 7.0 / 5.0).abs() < 1e-12);
        assert!((s(3, 4) / s(3, 3) - 3.0).abs() < 1e-12);
        for t in &m.transitions {
            assert!(t.strength > 0.0 && t.strength < 1.0);
        }
    }

    #[test]
    fn density_monotone_and_in_expected_range() {
        assert!(number_density(313.15).unwrap() > number_density(303.15).unwrap());
        // room-temperature cross-check: two published correlations
        // (Alcock-Itkin-Horrigan solid branch and Taylor-Langmuir) agree
        // at the few-percent level around 3-5e16 m^-3
        let n = number_density(298.15).unwrap();
        assert!(n > 3e16 && n < 5.5e16, "N(298.15) = {n:.4e}");
        let tl = taylor_langmuir(298.15);
        assert!((n - tl).abs() / tl < 0.10, "AIH {n:.4e} vs TL {tl:.4e}");
    }

    #[test]
    fn density_rejects_out_of_window() {
        assert!(number_density(200.0).is_err());
        assert!(number_density(600.0).is_err());
    }

    #[test]
    fn density_override_wins() {
        let cell = VaporCell::with_options(0.04, 300.0, Some(1e18), 1.0).unwrap();
        assert_eq!(cell.density().unwrap(), 1e18);
    }

    /// Independent correlation: Taylor & Langmuir (1937), liquid/supercooled
    /// cesium, log10 p[torr] = 11.0531 - 1.35 log10 T - 4041/T.
    fn taylor_langmuir(t: f64) -> f64 {
        let p_torr = 10f64.powf(11.0531 - 1.35 * t.log10() - 4041.0 / t);
        p_torr * 133.322_387_415 / (KB * t)
    }
}
