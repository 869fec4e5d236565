//! Two-ground-state optical-pumping rate equations and the optically
//! controlled delay/transmission sweep they drive.
//!
//! The hyperfine ground populations obey
//!
//!   d rho33/dt = +gamma rho44 - gamma rho33 + P rho44
//!   d rho44/dt = -gamma rho44 + gamma rho33 - P rho44,
//!
//! which relax exponentially at rate (2 gamma + P) toward the equilibrium
//! rho44 = 1/(2 + P/gamma). The pumped vapor enters the susceptibility in
//! one of two ways: a plain scale on the population factor, or the
//! lower-temperature cell whose vapor density matches the reduced
//! effective density (the dispersion-mimicking procedure).

use rayon::prelude::*;

use crate::atomdata::{number_density, AtomModel, VaporCell, DENSITY_VALIDITY};
use crate::constants::{DEFAULT_FILTER_FSR, DEFAULT_IRF_FWHM};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::propagation::{delay_experiment, FilterMode, FilterSpec, IntensityWaveform, PhotonSource};
use crate::susceptibility::THERMAL_GROUND_POPULATION;

/// Optical pumping strength relative to ground-state depolarization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpModel {
    /// Depolarization rate gamma, 1/s.
    pub gamma: f64,
    /// Dimensionless pump ratio P/gamma.
    pub pump_ratio: f64,
    /// Optional pump coefficient beta (m^2/W) for converting a laser
    /// intensity into a pump rate, P = beta I.
    pub beta: Option<f64>,
}

impl PumpModel {
    pub fn new(gamma: f64, pump_ratio: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "depolarization rate must be positive, got {gamma}"
            )));
        }
        if !(pump_ratio >= 0.0) || !pump_ratio.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "pump ratio must be >= 0, got {pump_ratio}"
            )));
        }
        Ok(Self {
            gamma,
            pump_ratio,
            beta: None,
        })
    }

    /// Model with the pump rate given as a laser intensity (W/m^2) through
    /// the coefficient beta (m^2/W).
    pub fn from_intensity(gamma: f64, beta: f64, intensity: f64) -> Result<Self> {
        if !(beta > 0.0) || !(intensity >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "beta must be > 0 and intensity >= 0, got beta={beta}, intensity={intensity}"
            )));
        }
        let mut m = Self::new(gamma, beta * intensity / gamma)?;
        m.beta = Some(beta);
        Ok(m)
    }

    /// Pump rate P, 1/s.
    pub fn pump_rate(&self) -> f64 {
        self.pump_ratio * self.gamma
    }
}

/// Hyperfine ground-state populations (trace 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Populations {
    pub rho33: f64,
    pub rho44: f64,
}

impl Populations {
    pub fn new(rho33: f64, rho44: f64) -> Result<Self> {
        let ok = (0.0..=1.0).contains(&rho33)
            && (0.0..=1.0).contains(&rho44)
            && (rho33 + rho44 - 1.0).abs() <= 1e-12;
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "populations must lie in [0,1] and sum to 1, got ({rho33}, {rho44})"
            )));
        }
        Ok(Self { rho33, rho44 })
    }

    /// Thermal equilibrium (no pump).
    pub fn thermal() -> Self {
        Self {
            rho33: 0.5,
            rho44: 0.5,
        }
    }
}

/// Equilibrium populations: rho44 = 1/(2 + P/gamma).
pub fn steady_state(pump: &PumpModel) -> Populations {
    let rho44 = 1.0 / (2.0 + pump.pump_ratio);
    Populations {
        rho33: 1.0 - rho44,
        rho44,
    }
}

/// Exact relaxation of the rate equations over time `t`:
/// rho44(t) = rho44_bar + (rho44(0) - rho44_bar) exp(-(2 gamma + P) t).
pub fn evolve_populations(initial: &Populations, pump: &PumpModel, t: f64) -> Result<Populations> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "evolution time must be >= 0, got {t}"
        )));
    }
    let bar = steady_state(pump);
    let rate = 2.0 * pump.gamma + pump.pump_rate();
    let decay = (-rate * t).exp();
    let rho44 = bar.rho44 + (initial.rho44 - bar.rho44) * decay;
    Ok(Populations {
        rho33: 1.0 - rho44,
        rho44,
    })
}

/// How pumped populations are folded into the vapor response.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectiveCellMode {
    /// Scale the cell's population factor by rho44/rho44_tilde; Doppler
    /// width is untouched.
    DensityScale,
    /// Replace the cell temperature by the lower temperature whose vapor
    /// density equals the reduced effective density (bisection to 1 mK),
    /// so the dispersion is that of a cooler vapor. Default, following the
    /// reduced-OD procedure of the reference experiment.
    TemperatureMimic,
}

/// Build the cell a pumped vapor presents to the probe photon.
pub fn effective_cell(
    cell: &VaporCell,
    populations: &Populations,
    mode: EffectiveCellMode,
) -> Result<VaporCell> {
    let scale = populations.rho44 / THERMAL_GROUND_POPULATION;
    match mode {
        EffectiveCellMode::DensityScale => VaporCell::with_options(
            cell.length,
            cell.temperature,
            cell.density_override,
            cell.population_factor * scale,
        ),
        EffectiveCellMode::TemperatureMimic => {
            let target = cell.density()? * cell.population_factor * scale;
            let t_eff = temperature_for_density(target)?;
            VaporCell::with_options(cell.length, t_eff, None, 1.0)
        }
    }
}

/// Invert the vapor-pressure correlation: the temperature at which the
/// saturated density equals `target`, by bisection to 1 mK.
fn temperature_for_density(target: f64) -> Result<f64> {
    let (lo_t, hi_t) = DENSITY_VALIDITY;
    let (mut lo, mut hi) = (lo_t + 1e-6, hi_t - 1e-6);
    if !(target > 0.0) || target < number_density(lo)? || target > number_density(hi)? {
        return Err(Error::DensityOutOfRange(target));
    }
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if number_density(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One point of an optically controlled delay sweep.
#[derive(Debug, Clone)]
pub struct PumpSweepPoint {
    pub pump_ratio: f64,
    pub rho44_bar: f64,
    pub transmitted_fraction: f64,
    /// Center-of-mass delay, s; `None` when the pulse is fully absorbed.
    pub mean_delay: Option<f64>,
    /// Peak-position delay, s.
    pub peak_delay: Option<f64>,
    /// Post-detector waveform of this pump point.
    pub waveform: IntensityWaveform,
}

/// Sweep configuration for [`pump_sweep`].
#[derive(Debug, Clone)]
pub struct PumpSweepConfig {
    pub filter: FilterSpec,
    pub filter_mode: FilterMode,
    pub irf_fwhm: f64,
    pub grid: TimeGrid,
    pub quadrature_nodes: usize,
    pub mode: EffectiveCellMode,
}

impl PumpSweepConfig {
    /// Filter at the line anchor with the default width, detector jitter
    /// and grids; temperature-mimic population handling.
    pub fn standard(model: &AtomModel, nodes: usize) -> Self {
        Self {
            filter: FilterSpec::new(model.nu_line, 192e6, DEFAULT_FILTER_FSR)
                .expect("default filter parameters are valid"),
            filter_mode: FilterMode::FieldTransfer,
            irf_fwhm: DEFAULT_IRF_FWHM,
            grid: TimeGrid::default_window(),
            quadrature_nodes: nodes,
            mode: EffectiveCellMode::TemperatureMimic,
        }
    }
}

/// Optically controlled delay: for each pump ratio, solve the steady
/// state, build the effective cell, and run the filtered propagation
/// pipeline. Ratios must be sorted ascending. Fully absorbed points are
/// reported with their fraction and no delay value.
pub fn pump_sweep(
    model: &AtomModel,
    cell: &VaporCell,
    source: &PhotonSource,
    gamma: f64,
    pump_ratios: &[f64],
    config: &PumpSweepConfig,
) -> Result<Vec<PumpSweepPoint>> {
    if pump_ratios.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "pump ratios must be sorted strictly ascending".into(),
        ));
    }
    pump_ratios
        .par_iter()
        .map(|&ratio| {
            let pump = PumpModel::new(gamma, ratio)?;
            let populations = steady_state(&pump);
            let pumped = effective_cell(cell, &populations, config.mode)?;
            let outcome = delay_experiment(
                model,
                &pumped,
                source,
                Some((&config.filter, config.filter_mode)),
                config.irf_fwhm,
                &config.grid,
                config.quadrature_nodes,
            )?;
            Ok(PumpSweepPoint {
                pump_ratio: ratio,
                rho44_bar: populations.rho44,
                transmitted_fraction: outcome.result.transmitted_fraction,
                mean_delay: outcome.result.mean_delay,
                peak_delay: outcome.result.peak_delay,
                waveform: outcome.result.waveform,
            })
        })
        .collect()
}
