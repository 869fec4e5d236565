//! Complex electric susceptibility of the vapor on a frequency grid, and
//! the optical quantities derived from it: refractive index, absorption
//! coefficient, optical depth, transmission and group delay.
//!
//! Each hyperfine component contributes a complex Voigt line evaluated
//! through the Faddeeva function,
//!
//!   chi(nu) = N_eff * d_eff^2 / (3 (2J+1) eps0 hbar)
//!             * sum_t rho_g * s_t * i sqrt(pi) w(z_t) / (sqrt2 sigma_ang),
//!
//! with z_t = (nu - nu_t + i gamma_nat/2) / (sqrt2 sigma), sigma the
//! Doppler standard deviation, rho_g = 1/2 the thermal ground-state
//! population, and N_eff = density * population_factor. The single scale
//! d_eff^2 is the calibrated constant in [`crate::constants`].

mod faddeeva;

pub use faddeeva::{erfc, erfcx, faddeeva};

use num_complex::Complex64;

use crate::atomdata::{AtomModel, VaporCell};
use crate::constants::{C0, CS_D1_DIPOLE_SQ, EPS0, HBAR, KB};
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;

/// Thermal population of each hyperfine ground state entering the line
/// weights; optical pumping scales it through the cell's population factor.
pub const THERMAL_GROUND_POPULATION: f64 = 0.5;

/// A complex-valued function sampled on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    pub grid: FrequencyGrid,
    pub amplitude: Vec<Complex64>,
}

impl ComplexSpectrum {
    pub fn new(grid: FrequencyGrid, amplitude: Vec<Complex64>) -> Result<Self> {
        if amplitude.len() != grid.n {
            return Err(Error::GridMismatch(format!(
                "spectrum has {} samples for a grid of {}",
                amplitude.len(),
                grid.n
            )));
        }
        Ok(Self { grid, amplitude })
    }

    /// The identity spectrum (all ones), e.g. a vacuum transfer function.
    pub fn identity(grid: FrequencyGrid) -> Self {
        Self {
            grid,
            amplitude: vec![Complex64::new(1.0, 0.0); grid.n],
        }
    }
}

/// Susceptibility and derived optical response of a cell on a grid.
#[derive(Debug, Clone)]
pub struct OpticalResponse {
    pub chi: ComplexSpectrum,
    /// Real part of the refractive index per sample.
    pub n_real: Vec<f64>,
    /// Power absorption coefficient, 1/m.
    pub alpha: Vec<f64>,
    /// Optical depth alpha * L (natural log convention).
    pub od: Vec<f64>,
    /// Group delay relative to vacuum flight time, s. Central differences
    /// inside the grid; the two edge samples use one-sided stencils.
    pub group_delay: Vec<f64>,
    /// Cell length used for od and group delay, m.
    pub length: f64,
}

/// Doppler FWHM of the line at the given temperature,
/// nu_line * sqrt(8 kB T ln2 / (m c^2)).
pub fn doppler_fwhm(model: &AtomModel, temperature: f64) -> f64 {
    model.nu_line * (8.0 * KB * temperature * std::f64::consts::LN_2 / (model.mass * C0 * C0)).sqrt()
}

/// chi(nu) for the cell on the grid.
///
/// Fails when the grid spacing is coarser than the natural linewidth; such
/// a grid cannot resolve the Lorentzian core.
pub fn susceptibility(
    model: &AtomModel,
    cell: &VaporCell,
    grid: &FrequencyGrid,
) -> Result<ComplexSpectrum> {
    if grid.spacing() > model.gamma_nat {
        return Err(Error::GridTooCoarse {
            spacing: grid.spacing(),
            limit: model.gamma_nat,
        });
    }
    let density = cell.density()?;
    let n_eff = density * cell.population_factor;

    let sigma = doppler_fwhm(model, cell.temperature) / (8.0 * std::f64::consts::LN_2).sqrt();
    let sigma_ang = 2.0 * std::f64::consts::PI * sigma;
    let gamma_hwhm = model.gamma_nat / 2.0;
    let inv_sqrt2_sigma = 1.0 / (std::f64::consts::SQRT_2 * sigma);

    // 2J+1 = 2 for the S1/2 ground state
    let prefactor = n_eff * CS_D1_DIPOLE_SQ / (3.0 * 2.0 * EPS0 * HBAR);
    let lineshape_scale = std::f64::consts::PI.sqrt() / (std::f64::consts::SQRT_2 * sigma_ang);

    let mut amplitude = vec![Complex64::default(); grid.n];
    for (i, value) in amplitude.iter_mut().enumerate() {
        let offset = grid.offset(i);
        let mut acc = Complex64::default();
        for t in &model.transitions {
            let z = Complex64::new(offset - t.detuning, gamma_hwhm) * inv_sqrt2_sigma;
            let w = faddeeva::faddeeva_upper(z);
            // i * w, weighted
            acc += THERMAL_GROUND_POPULATION * t.strength * Complex64::new(-w.im, w.re);
        }
        *value = prefactor * lineshape_scale * acc;
    }
    ComplexSpectrum::new(*grid, amplitude)
}

/// Complex refractive index n_c = sqrt(1 + chi), principal branch.
pub fn refractive_index(chi: &ComplexSpectrum) -> Result<ComplexSpectrum> {
    let mut amplitude = Vec::with_capacity(chi.amplitude.len());
    for v in &chi.amplitude {
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::NonFinite("susceptibility"));
        }
        amplitude.push((Complex64::new(1.0, 0.0) + v).sqrt());
    }
    ComplexSpectrum::new(chi.grid, amplitude)
}

/// Assemble the full optical response (index, absorption, optical depth,
/// group delay) for the cell on the grid.
pub fn optical_response(
    model: &AtomModel,
    cell: &VaporCell,
    grid: &FrequencyGrid,
) -> Result<OpticalResponse> {
    let chi = susceptibility(model, cell, grid)?;
    let nc = refractive_index(&chi)?;
    let n_real: Vec<f64> = nc.amplitude.iter().map(|v| v.re).collect();
    let alpha: Vec<f64> = nc
        .amplitude
        .iter()
        .enumerate()
        .map(|(i, v)| 2.0 * angular_wavenumber(grid.frequency(i)) * v.im)
        .collect();
    let od: Vec<f64> = alpha.iter().map(|a| a * cell.length).collect();
    let group_delay = group_delay_from_index(&n_real, grid, cell.length);
    Ok(OpticalResponse {
        chi,
        n_real,
        alpha,
        od,
        group_delay,
        length: cell.length,
    })
}

fn angular_wavenumber(frequency: f64) -> f64 {
    2.0 * std::f64::consts::PI * frequency / C0
}

/// Intensity transmission exp(-od) per sample.
pub fn transmission_spectrum(response: &OpticalResponse) -> Vec<f64> {
    response.od.iter().map(|od| (-od).exp()).collect()
}

/// Group delay relative to vacuum, L (n + nu dn/dnu - 1) / c0, per sample.
pub fn group_delay(response: &OpticalResponse, cell: &VaporCell) -> Vec<f64> {
    group_delay_from_index(&response.n_real, &response.chi.grid, cell.length)
}

fn group_delay_from_index(n_real: &[f64], grid: &FrequencyGrid, length: f64) -> Vec<f64> {
    let n = n_real.len();
    let d = grid.spacing();
    (0..n)
        .map(|i| {
            let dn_dnu = if i == 0 {
                (n_real[1] - n_real[0]) / d
            } else if i == n - 1 {
                (n_real[n - 1] - n_real[n - 2]) / d
            } else {
                (n_real[i + 1] - n_real[i - 1]) / (2.0 * d)
            };
            length * (n_real[i] - 1.0 + grid.frequency(i) * dn_dnu) / C0
        })
        .collect()
}
