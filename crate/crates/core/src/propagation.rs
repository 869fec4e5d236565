//! Temporal wave packets, frequency-domain transfer through the cell,
//! spectral-diffusion averaging, Fabry-Pérot filtering, detector response,
//! and delay/transmission observables.
//!
//! Everything runs in a rotating frame about the frequency-grid center:
//! the stored field is the envelope, carrier offsets enter as phase ramps,
//! and the absolute frequency appears only inside the transfer function's
//! wavenumber.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::atomdata::{AtomModel, VaporCell};
use crate::constants::C0;
use crate::error::{Error, Result};
use crate::fourier;
use crate::grid::TimeGrid;
use crate::quadrature::gauss_hermite;
use crate::susceptibility::{optical_response, ComplexSpectrum, OpticalResponse};

const FWHM_TO_SIGMA: f64 = 2.354_820_045_030_949; // 2 sqrt(2 ln 2)

/// A single-photon emitter: exciton lifetime, carrier frequency and the
/// FWHM of the Gaussian spectral-diffusion ensemble (0 = Fourier-limited).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonSource {
    pub t1: f64,
    pub nu0: f64,
    pub inhom_fwhm: f64,
}

impl PhotonSource {
    pub fn new(t1: f64, nu0: f64, inhom_fwhm: f64) -> Result<Self> {
        if !(t1 > 0.0) || !t1.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lifetime must be positive, got {t1}"
            )));
        }
        if !(inhom_fwhm >= 0.0) || !inhom_fwhm.is_finite() || !nu0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "source requires finite nu0 and inhom_fwhm >= 0, got nu0={nu0}, inhom={inhom_fwhm}"
            )));
        }
        Ok(Self { t1, nu0, inhom_fwhm })
    }

    /// Fourier-limited (homogeneous) linewidth 1/(2 pi T1), Hz.
    pub fn homogeneous_fwhm(&self) -> f64 {
        1.0 / (2.0 * std::f64::consts::PI * self.t1)
    }

    /// Fourier-limited source with the Lorentzian FWHM `fwhm` instead of an
    /// explicit lifetime; used for the named photon-bandwidth presets.
    pub fn with_fwhm(fwhm: f64, nu0: f64) -> Result<Self> {
        Self::new(1.0 / (2.0 * std::f64::consts::PI * fwhm), nu0, 0.0)
    }
}

/// Complex field envelope on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WavePacket {
    pub grid: TimeGrid,
    pub field: Vec<Complex64>,
}

impl WavePacket {
    /// Integral of |E|^2 dt.
    pub fn norm(&self) -> f64 {
        self.field.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dt
    }

    pub fn intensity(&self) -> IntensityWaveform {
        IntensityWaveform {
            grid: self.grid,
            intensity: self.field.iter().map(|v| v.norm_sqr()).collect(),
        }
    }
}

/// Real intensity envelope on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityWaveform {
    pub grid: TimeGrid,
    pub intensity: Vec<f64>,
}

impl IntensityWaveform {
    /// Integral of I dt.
    pub fn area(&self) -> f64 {
        self.intensity.iter().sum::<f64>() * self.grid.dt
    }

    /// Intensity-weighted mean arrival time, s.
    pub fn center_of_mass(&self) -> Result<f64> {
        let area: f64 = self.intensity.iter().sum();
        if !(area > 0.0) {
            return Err(Error::ZeroNorm);
        }
        let first: f64 = self
            .intensity
            .iter()
            .enumerate()
            .map(|(i, v)| self.grid.time(i) * v)
            .sum();
        Ok(first / area)
    }

    /// Time of the intensity maximum, refined by a three-point parabola.
    pub fn peak_time(&self) -> Result<f64> {
        let (i, peak) = self
            .intensity
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .ok_or(Error::ZeroNorm)?;
        if !(*peak > 0.0) {
            return Err(Error::ZeroNorm);
        }
        if i == 0 || i == self.intensity.len() - 1 {
            return Ok(self.grid.time(i));
        }
        let (a, b, c) = (
            self.intensity[i - 1],
            self.intensity[i],
            self.intensity[i + 1],
        );
        let denom = a - 2.0 * b + c;
        let shift = if denom.abs() > 0.0 {
            (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        Ok(self.grid.time(i) + shift * self.grid.dt)
    }

    /// Largest intensity at t < 0 relative to the global peak; a
    /// front-velocity (causality) figure of merit for a packet emitted at
    /// t = 0 with the vacuum flight time divided out.
    pub fn pre_emission_ratio(&self) -> f64 {
        let peak = self.intensity.iter().cloned().fold(0.0f64, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let mut pre = 0.0f64;
        for (i, &v) in self.intensity.iter().enumerate() {
            if self.grid.time(i) < 0.0 {
                pre = pre.max(v);
            } else {
                break;
            }
        }
        pre / peak
    }

    /// Fraction of the total area in the last 5 % of the window; detects
    /// wrap-around of delays that outgrow the grid.
    pub fn wraparound_fraction(&self) -> f64 {
        let area: f64 = self.intensity.iter().sum();
        if area <= 0.0 {
            return 0.0;
        }
        let start = self.intensity.len() - self.intensity.len() / 20;
        self.intensity[start..].iter().sum::<f64>() / area
    }
}

/// Lorentzian Fabry-Pérot filter line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    /// Transmission center, absolute Hz.
    pub nu_f: f64,
    /// Intensity FWHM, Hz.
    pub fwhm: f64,
    /// Free spectral range, Hz; used to warn when a grid spans more than
    /// one resonator order.
    pub fsr: f64,
}

impl FilterSpec {
    pub fn new(nu_f: f64, fwhm: f64, fsr: f64) -> Result<Self> {
        if !(fwhm > 0.0) || !fsr.is_finite() || !nu_f.is_finite() || fsr <= fwhm {
            return Err(Error::InvalidParameter(format!(
                "filter requires fwhm > 0 and fsr > fwhm, got fwhm={fwhm}, fsr={fsr}"
            )));
        }
        Ok(Self { nu_f, fwhm, fsr })
    }

    /// Complex field response at absolute frequency `nu`, peak-normalized:
    /// the causal single-pole resonance whose intensity profile is a
    /// Lorentzian of the specified FWHM.
    pub fn field_response(&self, nu: f64) -> Complex64 {
        1.0 / Complex64::new(1.0, -2.0 * (nu - self.nu_f) / self.fwhm)
    }

    /// Intensity transmission at absolute frequency `nu`.
    pub fn intensity_weight(&self, nu: f64) -> f64 {
        let x = 2.0 * (nu - self.nu_f) / self.fwhm;
        1.0 / (1.0 + x * x)
    }

    /// True when `span` fits inside one free spectral range, i.e. the
    /// single-resonance model is self-consistent on that grid.
    pub fn covers_span(&self, span: f64) -> bool {
        span <= self.fsr
    }
}

/// Where the Fabry-Pérot line acts in the spectral-diffusion average.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterMode {
    /// Multiply the propagating field spectrum by the resonator response
    /// (the resonator physically filters the field). Default.
    FieldTransfer,
    /// Weight each spectral-diffusion carrier by the Lorentzian intensity
    /// profile, following the ensemble-average formulation that places the
    /// filter on the carrier distribution.
    CarrierWeight,
}

/// Delay/transmission observables of one propagated configuration.
#[derive(Debug, Clone)]
pub struct DelayResult {
    /// Center-of-mass delay vs. the reference, s; `None` when the
    /// transmitted waveform has no usable norm (fully absorbed pulse).
    pub mean_delay: Option<f64>,
    /// Peak-position delay vs. the reference, s.
    pub peak_delay: Option<f64>,
    /// Transmitted energy relative to the reference.
    pub transmitted_fraction: f64,
    /// Post-detector (IRF-convolved) intensity waveform.
    pub waveform: IntensityWaveform,
}

/// Number of grid steps over which the emission edge turns on. A raw
/// Heaviside step carries spectral weight beyond the grid Nyquist and any
/// spectral filtering then rings at the sample period ahead of the front;
/// a sin^2 turn-on over 16 bins suppresses that ringing below the 1e-3
/// field floor while changing the represented linewidth by < 0.1 %.
const EDGE_RISE_BINS: usize = 16;

/// The exponential wave packet E(t) = exp(-t/(2 T1)) Theta(t) on `grid`,
/// normalized to unit energy; the spectrum is a Lorentzian of FWHM
/// 1/(2 pi T1) centered on the rotating-frame carrier. The step at t = 0
/// is band-limited over [`EDGE_RISE_BINS`] samples; the field is exactly
/// zero for t < 0.
pub fn make_photon(source: &PhotonSource, grid: &TimeGrid) -> Result<WavePacket> {
    if grid.dt > source.t1 / 50.0 {
        return Err(Error::Undersampled {
            spacing: grid.dt,
            limit: source.t1 / 50.0,
        });
    }
    let t_end = grid.time(grid.n - 1);
    if t_end < 20.0 * source.t1 {
        return Err(Error::InvalidParameter(format!(
            "time window ends at {t_end:.3e} s, need >= 20 t1 = {:.3e} s after emission",
            20.0 * source.t1
        )));
    }
    let rise = EDGE_RISE_BINS as f64 * grid.dt;
    let mut field: Vec<Complex64> = grid
        .times()
        .map(|t| {
            if t < 0.0 {
                Complex64::default()
            } else {
                let edge = if t < rise {
                    let s = (std::f64::consts::FRAC_PI_2 * t / rise).sin();
                    s * s
                } else {
                    1.0
                };
                Complex64::new(edge * (-t / (2.0 * source.t1)).exp(), 0.0)
            }
        })
        .collect();
    let norm = field.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.dt;
    let scale = 1.0 / norm.sqrt();
    for v in field.iter_mut() {
        *v *= scale;
    }
    Ok(WavePacket { grid: *grid, field })
}

/// Transfer function of the cell relative to the vacuum phase,
/// T(nu) = exp(i (n_c - 1) k L) with k = 2 pi nu / c0, so that an empty
/// cell is the identity. |T| = exp(-od/2).
pub fn transfer_function(response: &OpticalResponse, cell: &VaporCell) -> ComplexSpectrum {
    let grid = response.chi.grid;
    let amplitude = (0..grid.n)
        .map(|i| {
            let k = 2.0 * std::f64::consts::PI * grid.frequency(i) / C0;
            let phase = (response.n_real[i] - 1.0) * k * cell.length;
            let magnitude = (-response.alpha[i] * cell.length / 2.0).exp();
            Complex64::from_polar(magnitude, phase)
        })
        .collect();
    ComplexSpectrum::new(grid, amplitude).expect("transfer built on the response grid")
}

fn check_compatible(grid: &TimeGrid, transfer: &ComplexSpectrum) -> Result<()> {
    let dual = grid.frequency_grid(transfer.grid.center);
    if !dual.same_sampling(&transfer.grid) {
        return Err(Error::GridMismatch(format!(
            "time grid (n={}, dt={:.3e}) is not dual to transfer grid (n={}, spacing={:.3e})",
            grid.n,
            grid.dt,
            transfer.grid.n,
            transfer.grid.spacing()
        )));
    }
    Ok(())
}

/// Propagate a packet through a transfer function: multiply the spectrum
/// sample-by-sample and transform back. The packet's carrier rides on the
/// transfer grid's center.
pub fn propagate(packet: &WavePacket, transfer: &ComplexSpectrum) -> Result<WavePacket> {
    propagate_with_carrier(packet, transfer, 0.0)
}

/// [`propagate`] with the packet's carrier offset from the grid center by
/// `carrier_offset` Hz, applied as a time-domain phase ramp (exact for any
/// offset, not just whole bins).
pub fn propagate_with_carrier(
    packet: &WavePacket,
    transfer: &ComplexSpectrum,
    carrier_offset: f64,
) -> Result<WavePacket> {
    check_compatible(&packet.grid, transfer)?;
    let spectrum = offset_spectrum(packet, carrier_offset, transfer);
    let field = fourier::frequency_to_time(&packet.grid, &spectrum);
    Ok(WavePacket {
        grid: packet.grid,
        field,
    })
}

fn offset_spectrum(
    packet: &WavePacket,
    carrier_offset: f64,
    transfer: &ComplexSpectrum,
) -> Vec<Complex64> {
    let mut field = packet.field.clone();
    if carrier_offset != 0.0 {
        for (i, v) in field.iter_mut().enumerate() {
            let phase = 2.0 * std::f64::consts::PI * carrier_offset * packet.grid.time(i);
            *v *= Complex64::from_polar(1.0, phase);
        }
    }
    let mut spectrum = fourier::time_to_frequency(&packet.grid, &field);
    for (s, t) in spectrum.iter_mut().zip(transfer.amplitude.iter()) {
        *s *= t;
    }
    spectrum
}

fn diffusion_nodes(
    source: &PhotonSource,
    grid_center: f64,
    nodes: usize,
) -> Result<Vec<(f64, f64)>> {
    if nodes < 3 || nodes % 2 == 0 {
        return Err(Error::BadNodeCount(nodes));
    }
    let delta0 = source.nu0 - grid_center;
    if source.inhom_fwhm == 0.0 {
        return Ok(vec![(delta0, 1.0)]);
    }
    let sigma = source.inhom_fwhm / FWHM_TO_SIGMA;
    let (x, w) = gauss_hermite(nodes)?;
    let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
    Ok(x.iter()
        .zip(&w)
        .map(|(&x, &w)| {
            (
                delta0 + std::f64::consts::SQRT_2 * sigma * x,
                w * inv_sqrt_pi,
            )
        })
        .collect())
}

fn apply_field_filter(transfer: &ComplexSpectrum, filter: Option<(&FilterSpec, FilterMode)>) -> ComplexSpectrum {
    let mut effective = transfer.clone();
    if let Some((spec, FilterMode::FieldTransfer)) = filter {
        for (i, v) in effective.amplitude.iter_mut().enumerate() {
            *v *= spec.field_response(effective.grid.frequency(i));
        }
    }
    effective
}

fn carrier_weight(
    base: f64,
    node_offset: f64,
    grid_center: f64,
    filter: Option<(&FilterSpec, FilterMode)>,
) -> f64 {
    match filter {
        Some((spec, FilterMode::CarrierWeight)) => {
            base * spec.intensity_weight(grid_center + node_offset)
        }
        _ => base,
    }
}

fn accumulate(n: usize, contributions: Vec<Vec<f64>>) -> Vec<f64> {
    let mut out = vec![0.0f64; n];
    for c in &contributions {
        for (acc, v) in out.iter_mut().zip(c) {
            *acc += v;
        }
    }
    out
}

/// Ensemble-averaged intensity envelope over the spectral-diffusion
/// distribution of the carrier, with an optional Fabry-Pérot filter.
///
/// Gauss-Hermite quadrature over the Gaussian carrier ensemble; a source
/// with `inhom_fwhm = 0` reduces to a single propagation. The node count
/// must be odd (>= 3) so the nominal carrier is always sampled. Nodes are
/// evaluated in parallel and summed in fixed order, so results are
/// deterministic.
pub fn average_spectral_diffusion(
    source: &PhotonSource,
    transfer: &ComplexSpectrum,
    filter: Option<(&FilterSpec, FilterMode)>,
    nodes: usize,
    grid: &TimeGrid,
) -> Result<IntensityWaveform> {
    let photon = make_photon(source, grid)?;
    let node_list = diffusion_nodes(source, transfer.grid.center, nodes)?;
    let effective = apply_field_filter(transfer, filter);

    let contributions: Vec<Vec<f64>> = node_list
        .par_iter()
        .map(|&(delta, weight)| {
            let weight = carrier_weight(weight, delta, transfer.grid.center, filter);
            let out = propagate_with_carrier(&photon, &effective, delta)?;
            Ok(out.field.iter().map(|v| weight * v.norm_sqr()).collect())
        })
        .collect::<Result<_>>()?;

    Ok(IntensityWaveform {
        grid: *grid,
        intensity: accumulate(grid.n, contributions),
    })
}

/// Ensemble-averaged intensity spectrum (same weighting as
/// [`average_spectral_diffusion`]), in ascending offset order on the
/// transfer grid.
pub fn ensemble_spectrum(
    source: &PhotonSource,
    transfer: &ComplexSpectrum,
    filter: Option<(&FilterSpec, FilterMode)>,
    nodes: usize,
    grid: &TimeGrid,
) -> Result<Vec<f64>> {
    let photon = make_photon(source, grid)?;
    let node_list = diffusion_nodes(source, transfer.grid.center, nodes)?;
    let effective = apply_field_filter(transfer, filter);
    let contributions: Vec<Vec<f64>> = node_list
        .par_iter()
        .map(|&(delta, weight)| {
            let weight = carrier_weight(weight, delta, transfer.grid.center, filter);
            let spectrum = offset_spectrum(&photon, delta, &effective);
            Ok(spectrum.iter().map(|v| weight * v.norm_sqr()).collect())
        })
        .collect::<Result<_>>()?;
    Ok(accumulate(grid.n, contributions))
}

/// Convolve an intensity waveform with the Gaussian instrument response of
/// the given FWHM (unit area, symmetric: total area and center of mass are
/// preserved). `irf_fwhm = 0` is the identity.
pub fn apply_irf(waveform: &IntensityWaveform, irf_fwhm: f64) -> IntensityWaveform {
    if irf_fwhm == 0.0 {
        return waveform.clone();
    }
    let sigma = irf_fwhm / FWHM_TO_SIGMA;
    let samples: Vec<Complex64> = waveform
        .intensity
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    let out = fourier::circular_convolve(&waveform.grid, &samples, |lag| {
        (-lag * lag / (2.0 * sigma * sigma)).exp()
    });
    IntensityWaveform {
        grid: waveform.grid,
        intensity: out.iter().map(|v| v.re).collect(),
    }
}

fn check_same_grid(a: &IntensityWaveform, b: &IntensityWaveform) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch(
            "waveforms live on different time grids".into(),
        ));
    }
    Ok(())
}

/// Center-of-mass delay of `sample` relative to `reference`, s.
pub fn center_of_mass_delay(
    sample: &IntensityWaveform,
    reference: &IntensityWaveform,
) -> Result<f64> {
    check_same_grid(sample, reference)?;
    Ok(sample.center_of_mass()? - reference.center_of_mass()?)
}

/// Transmitted energy of `sample` normalized by `reference`.
pub fn transmitted_fraction(
    sample: &IntensityWaveform,
    reference: &IntensityWaveform,
) -> Result<f64> {
    check_same_grid(sample, reference)?;
    let ref_area = reference.area();
    if !(ref_area > 0.0) {
        return Err(Error::ZeroNorm);
    }
    Ok(sample.area() / ref_area)
}

/// One row of a spectrally resolved delay scan.
#[derive(Debug, Clone, Copy)]
pub struct ScanPoint {
    /// Filter (= component carrier) offset from the grid center, Hz.
    pub filter_offset: f64,
    /// Photon-bandwidth preset of this curve, Hz.
    pub photon_fwhm: f64,
    /// Center-of-mass delay vs. air, s; `None` for fully absorbed points.
    pub mean_delay: Option<f64>,
    pub transmitted_fraction: f64,
}

/// Delay and transmission of narrow spectral components across the line
/// structure: for each filter offset and each photon-bandwidth preset, a
/// Lorentzian packet of that width is carried at the filter frequency
/// through the cell and compared against the same packet through air.
/// Fully absorbed points are reported with their transmitted fraction and
/// no delay value.
pub fn spectral_delay_scan(
    response: &OpticalResponse,
    cell: &VaporCell,
    filter_offsets: &[f64],
    photon_fwhms: &[f64],
    irf_fwhm: f64,
    grid: &TimeGrid,
) -> Result<Vec<ScanPoint>> {
    let transfer = transfer_function(response, cell);
    let identity = ComplexSpectrum::identity(transfer.grid);
    let mut jobs = Vec::new();
    for &fwhm in photon_fwhms {
        for &offset in filter_offsets {
            jobs.push((fwhm, offset));
        }
    }
    jobs.par_iter()
        .map(|&(fwhm, offset)| {
            let source = PhotonSource::with_fwhm(fwhm, transfer.grid.center + offset)?;
            let photon = make_photon(&source, grid)?;
            let sample = propagate_with_carrier(&photon, &transfer, offset)?;
            let reference = propagate_with_carrier(&photon, &identity, offset)?;
            let sample_i = apply_irf(&sample.intensity(), irf_fwhm);
            let reference_i = apply_irf(&reference.intensity(), irf_fwhm);
            let fraction = transmitted_fraction(&sample_i, &reference_i)?;
            let mean_delay = center_of_mass_delay(&sample_i, &reference_i).ok();
            Ok(ScanPoint {
                filter_offset: offset,
                photon_fwhm: fwhm,
                mean_delay,
                transmitted_fraction: fraction,
            })
        })
        .collect()
}

/// Everything produced by one cell-vs-air delay experiment.
#[derive(Debug, Clone)]
pub struct DelayOutcome {
    pub result: DelayResult,
    /// Cell waveform before detector convolution.
    pub sample_pre_irf: IntensityWaveform,
    /// Air-reference waveform before detector convolution.
    pub reference_pre_irf: IntensityWaveform,
    /// Air-reference waveform after detector convolution.
    pub reference: IntensityWaveform,
    pub response: OpticalResponse,
}

/// Run the full pipeline once: susceptibility on the grid centered at the
/// line anchor, transfer through the cell, spectral-diffusion average with
/// the optional filter, detector response, and observables against the
/// air-path reference (same source and filter, identity transfer).
pub fn delay_experiment(
    model: &AtomModel,
    cell: &VaporCell,
    source: &PhotonSource,
    filter: Option<(&FilterSpec, FilterMode)>,
    irf_fwhm: f64,
    grid: &TimeGrid,
    nodes: usize,
) -> Result<DelayOutcome> {
    let fgrid = grid.frequency_grid(model.nu_line);
    let response = optical_response(model, cell, &fgrid)?;
    let transfer = transfer_function(&response, cell);
    let identity = ComplexSpectrum::identity(fgrid);

    let sample_pre = average_spectral_diffusion(source, &transfer, filter, nodes, grid)?;
    let reference_pre = average_spectral_diffusion(source, &identity, filter, nodes, grid)?;
    let sample = apply_irf(&sample_pre, irf_fwhm);
    let reference = apply_irf(&reference_pre, irf_fwhm);

    let transmitted = transmitted_fraction(&sample, &reference)?;
    let mean_delay = center_of_mass_delay(&sample, &reference).ok();
    let peak_delay = match (sample.peak_time(), reference.peak_time()) {
        (Ok(s), Ok(r)) => Some(s - r),
        _ => None,
    };
    Ok(DelayOutcome {
        result: DelayResult {
            mean_delay,
            peak_delay,
            transmitted_fraction: transmitted,
            waveform: sample,
        },
        sample_pre_irf: sample_pre,
        reference_pre_irf: reference_pre,
        reference,
        response,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::FrequencyGrid;

    fn test_grid() -> TimeGrid {
        // 2^14 samples at 16 ps: 262 ns window, +-31.25 GHz, 3.8 MHz steps
        TimeGrid::new(-16e-9, 16e-12, 1 << 14).unwrap()
    }

    fn fl_source(nu0: f64) -> PhotonSource {
        PhotonSource::new(1.04e-9, nu0, 0.0).unwrap()
    }

    fn measure_fwhm(grid: &FrequencyGrid, power: &[f64]) -> f64 {
        let (imax, &peak) = power
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let half = peak / 2.0;
        let mut lo = grid.offset(0);
        for i in (0..imax).rev() {
            if power[i] < half {
                let f = (half - power[i]) / (power[i + 1] - power[i]);
                lo = grid.offset(i) + f * grid.spacing();
                break;
            }
        }
        let mut hi = grid.offset(grid.n - 1);
        for i in imax..power.len() - 1 {
            if power[i + 1] < half {
                let f = (power[i] - half) / (power[i] - power[i + 1]);
                hi = grid.offset(i) + f * grid.spacing();
                break;
            }
        }
        hi - lo
    }

    #[test]
    fn photon_is_causal_normalized_and_lorentzian() {
        let grid = test_grid();
        let source = fl_source(0.0);
        let p = make_photon(&source, &grid).unwrap();
        for (i, v) in p.field.iter().enumerate() {
            if grid.time(i) < 0.0 {
                assert_eq!(v.norm(), 0.0);
            }
        }
        assert!((p.norm() - 1.0).abs() < 1e-9);

        let spec = fourier::time_to_frequency(&grid, &p.field);
        let power: Vec<f64> = spec.iter().map(|v| v.norm_sqr()).collect();
        let fgrid = grid.frequency_grid(0.0);
        let fwhm = measure_fwhm(&fgrid, &power);
        let expect = source.homogeneous_fwhm();
        assert!(
            (fwhm - expect).abs() < 2e6,
            "spectral FWHM {fwhm:.4e} vs {expect:.4e}"
        );
    }

    #[test]
    fn undersampled_grid_rejected() {
        let coarse = TimeGrid::new(-1e-9, 0.5e-9, 1 << 10).unwrap();
        assert!(matches!(
            make_photon(&fl_source(0.0), &coarse),
            Err(Error::Undersampled { .. })
        ));
    }

    #[test]
    fn identity_transfer_reproduces_input() {
        let grid = test_grid();
        let p = make_photon(&fl_source(0.0), &grid).unwrap();
        let identity = ComplexSpectrum::identity(grid.frequency_grid(3.35e14));
        let out = propagate(&p, &identity).unwrap();
        let err: f64 = out
            .field
            .iter()
            .zip(&p.field)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-9, "L2 error {err:.2e}");
    }

    #[test]
    fn linear_phase_shifts_packet() {
        let grid = test_grid();
        let p = make_photon(&fl_source(0.0), &grid).unwrap();
        let fgrid = grid.frequency_grid(0.0);
        let tau = 64.0 * grid.dt; // whole bins: the circular shift is exact
        let shift = ComplexSpectrum::new(
            fgrid,
            (0..fgrid.n)
                .map(|i| {
                    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * fgrid.offset(i) * tau)
                })
                .collect(),
        )
        .unwrap();
        let out = propagate(&p, &shift).unwrap();
        for i in 64..grid.n {
            assert!((out.field[i] - p.field[i - 64]).norm() < 1e-9);
        }
        let d = center_of_mass_delay(&out.intensity(), &p.intensity()).unwrap();
        assert!((d - tau).abs() < 1e-12 * grid.window());
    }

    #[test]
    fn grid_mismatch_rejected() {
        let grid = test_grid();
        let p = make_photon(&fl_source(0.0), &grid).unwrap();
        let other = FrequencyGrid::new(0.0, 10e9, 1 << 14).unwrap();
        assert!(matches!(
            propagate(&p, &ComplexSpectrum::identity(other)),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn diffusion_with_zero_inhom_equals_single_run() {
        let grid = test_grid();
        let source = fl_source(1e14);
        let fgrid = grid.frequency_grid(1e14);
        // an arbitrary smooth non-trivial transfer
        let transfer = ComplexSpectrum::new(
            fgrid,
            (0..fgrid.n)
                .map(|i| {
                    let x = fgrid.offset(i) / 5e9;
                    Complex64::from_polar((-x * x).exp().mul_add(-0.3, 1.0), 0.1 * x)
                })
                .collect(),
        )
        .unwrap();
        let avg = average_spectral_diffusion(&source, &transfer, None, 5, &grid).unwrap();
        let single = propagate(&make_photon(&source, &grid).unwrap(), &transfer)
            .unwrap()
            .intensity();
        for (a, b) in avg.intensity.iter().zip(&single.intensity) {
            assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
    }

    #[test]
    fn even_node_count_rejected() {
        let grid = test_grid();
        let source = PhotonSource::new(1.04e-9, 0.0, 1e9).unwrap();
        let identity = ComplexSpectrum::identity(grid.frequency_grid(0.0));
        assert!(matches!(
            average_spectral_diffusion(&source, &identity, None, 100, &grid),
            Err(Error::BadNodeCount(100))
        ));
        assert!(matches!(
            average_spectral_diffusion(&source, &identity, None, 1, &grid),
            Err(Error::BadNodeCount(1))
        ));
    }

    #[test]
    fn irf_properties() {
        let grid = test_grid();
        // delta input -> Gaussian of the IRF width
        let mut intensity = vec![0.0; grid.n];
        let i0 = grid.index_of(0.0);
        intensity[i0] = 1.0 / grid.dt;
        let delta = IntensityWaveform { grid, intensity };
        let out = apply_irf(&delta, 1.060e-9);
        let peak = out.intensity.iter().cloned().fold(0.0f64, f64::max);
        let above = (0..grid.n)
            .filter(|&i| out.intensity[i] >= peak / 2.0)
            .count();
        let fwhm = above as f64 * grid.dt;
        assert!((fwhm - 1.060e-9).abs() < 2.0 * grid.dt, "IRF FWHM {fwhm:.3e}");
        assert!((out.area() - delta.area()).abs() < 1e-9 * delta.area());

        // area and center of mass preserved for a generic waveform
        let p = make_photon(&fl_source(0.0), &grid).unwrap().intensity();
        let q = apply_irf(&p, 1.060e-9);
        let shift = (q.center_of_mass().unwrap() - p.center_of_mass().unwrap()).abs();
        assert!(shift < 1e-12 * grid.window(), "com shift {shift:.2e}");
        assert!((q.area() - p.area()).abs() < 1e-9 * p.area());
    }

    #[test]
    fn com_and_fraction_basics() {
        let grid = test_grid();
        let p = make_photon(&fl_source(0.0), &grid).unwrap().intensity();
        assert_eq!(center_of_mass_delay(&p, &p).unwrap(), 0.0);
        assert_eq!(transmitted_fraction(&p, &p).unwrap(), 1.0);
        let zero = IntensityWaveform {
            grid,
            intensity: vec![0.0; grid.n],
        };
        assert!(matches!(
            center_of_mass_delay(&zero, &p),
            Err(Error::ZeroNorm)
        ));
        assert!(matches!(
            transmitted_fraction(&p, &zero),
            Err(Error::ZeroNorm)
        ));
    }

    #[test]
    fn unitarity_with_absorption_removed() {
        // with Im chi zeroed |T| = 1 everywhere and energy is conserved
        let model = AtomModel::cs_d1();
        let cell = VaporCell::standard_at_celsius(83.5).unwrap();
        let grid = test_grid();
        let fgrid = grid.frequency_grid(model.nu_line);
        let mut response = optical_response(&model, &cell, &fgrid).unwrap();
        for v in response.alpha.iter_mut() {
            *v = 0.0;
        }
        let transfer = transfer_function(&response, &cell);
        let p = make_photon(&fl_source(model.nu_line), &grid).unwrap();
        let out = propagate(&p, &transfer).unwrap();
        assert!((out.norm() - p.norm()).abs() < 1e-9);
    }

    #[test]
    fn transfer_magnitude_matches_od_and_phase_slope_matches_group_delay() {
        let model = AtomModel::cs_d1();
        let cell = VaporCell::standard_at_celsius(83.5).unwrap();
        let grid = test_grid();
        let fgrid = grid.frequency_grid(model.nu_line);
        let response = optical_response(&model, &cell, &fgrid).unwrap();
        let transfer = transfer_function(&response, &cell);
        let i0 = fgrid.index_of_offset(0.0);
        for i in [i0 - 200, i0, i0 + 137] {
            let want = (-response.od[i] / 2.0).exp();
            assert!((transfer.amplitude[i].norm() - want).abs() < 1e-12);
        }
        // in the exp(+2 pi i nu t) spectrum convention a delay is a positive
        // phase slope; d(arg T)/dnu = 2 pi tau_g across the window
        let darg = (transfer.amplitude[i0 + 1] / transfer.amplitude[i0 - 1]).arg()
            / (2.0 * fgrid.spacing());
        assert!(darg > 0.0);
        let tg = darg / (2.0 * std::f64::consts::PI);
        let want = response.group_delay[i0];
        // the transfer phase carries (n-1) k L; its slope differs from the
        // full group delay only by the tiny (n-1) L / c0 term
        assert!(
            (tg - want).abs() < 0.02 * want,
            "phase-slope delay {tg:.3e} vs group delay {want:.3e}"
        );
    }

    #[test]
    fn causality_of_cell_output() {
        let model = AtomModel::cs_d1();
        let cell = VaporCell::standard_at_celsius(83.5).unwrap();
        let grid = test_grid();
        let fgrid = grid.frequency_grid(model.nu_line);
        let response = optical_response(&model, &cell, &fgrid).unwrap();
        let transfer = transfer_function(&response, &cell);
        let p = make_photon(&fl_source(model.nu_line), &grid).unwrap();
        let out = propagate(&p, &transfer).unwrap().intensity();
        assert!(out.pre_emission_ratio() < 1e-6);
        assert!(out.wraparound_fraction() < 1e-6);
    }

    #[test]
    fn riemann_sum_oracle_matches_fft() {
        // direct evaluation of the inverse Fourier integral at 64 probe
        // times vs. the fast transform
        let model = AtomModel::cs_d1();
        let cell = VaporCell::standard_at_celsius(60.0).unwrap();
        let grid = test_grid();
        let fgrid = grid.frequency_grid(model.nu_line);
        let response = optical_response(&model, &cell, &fgrid).unwrap();
        let transfer = transfer_function(&response, &cell);
        let p = make_photon(&fl_source(model.nu_line), &grid).unwrap();

        let spectrum = offset_spectrum(&p, 0.0, &transfer);
        let fast = fourier::frequency_to_time(&grid, &spectrum);
        let scale = fast.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        let dnu = fgrid.spacing();
        for probe in (0..grid.n).step_by(grid.n / 64) {
            let t = grid.time(probe);
            let mut acc = Complex64::default();
            for (i, v) in spectrum.iter().enumerate() {
                let phase = -2.0 * std::f64::consts::PI * fgrid.offset(i) * t;
                acc += v * Complex64::from_polar(1.0, phase);
            }
            acc *= dnu;
            assert!(
                (acc - fast[probe]).norm() <= 1e-6 * scale,
                "probe at t={t:.3e}: rel {:.3e}",
                (acc - fast[probe]).norm() / scale
            );
        }
    }

    #[test]
    fn fraction_monotone_in_density() {
        let model = AtomModel::cs_d1();
        let grid = test_grid();
        let fgrid = grid.frequency_grid(model.nu_line);
        let p = make_photon(&fl_source(model.nu_line), &grid).unwrap();
        let mut last = f64::INFINITY;
        for density in [0.0, 1e17, 5e17, 2e18] {
            let cell = VaporCell::with_options(0.04, 330.0, Some(density), 1.0).unwrap();
            let response = optical_response(&model, &cell, &fgrid).unwrap();
            let transfer = transfer_function(&response, &cell);
            let out = propagate(&p, &transfer).unwrap().intensity();
            let f = transmitted_fraction(&out, &p.intensity()).unwrap();
            assert!(f <= last + 1e-9, "fraction {f} after {last}");
            assert!(f <= 1.0 + 1e-9);
            last = f;
        }
    }

    #[test]
    fn filtered_spectrum_width_tracks_filter() {
        // broadband ensemble through a narrow filter: output spectral FWHM
        // equals the filter width within a couple of grid bins. The carrier
        // ensemble must be sampled densely against the 153 MHz component
        // width, hence the high node count.
        let grid = test_grid();
        let center = 3.35e14;
        let fgrid = grid.frequency_grid(center);
        let source = PhotonSource::new(1.04e-9, center, 1.0e9).unwrap();
        let filter = FilterSpec::new(center, 192e6, 37.8e9).unwrap();
        let spec = ensemble_spectrum(
            &source,
            &ComplexSpectrum::identity(fgrid),
            Some((&filter, FilterMode::FieldTransfer)),
            2001,
            &grid,
        )
        .unwrap();
        let fwhm = measure_fwhm(&fgrid, &spec);
        assert!(
            (fwhm - 192e6).abs() < 2.5 * fgrid.spacing(),
            "filtered FWHM {fwhm:.4e}"
        );
    }

    #[test]
    fn ensemble_linewidth_is_voigt_combination() {
        // 3.57 GHz Gaussian diffusion on the 153 MHz Lorentzian gives the
        // overall 3.65 GHz line. The node comb must be finer than the
        // component width (ripple ~ 2 exp(-pi w/s)), hence ~50 MHz spacing.
        let grid = test_grid();
        let center = 3.35e14;
        let fgrid = grid.frequency_grid(center);
        let source = PhotonSource::new(1.04e-9, center, 3.57e9).unwrap();
        let spec = ensemble_spectrum(
            &source,
            &ComplexSpectrum::identity(fgrid),
            None,
            9061,
            &grid,
        )
        .unwrap();
        let fwhm = measure_fwhm(&fgrid, &spec);
        assert!((fwhm - 3.65e9).abs() < 0.05e9, "ensemble FWHM {fwhm:.4e}");
    }

    #[test]
    fn filter_validation() {
        assert!(FilterSpec::new(3.35e14, 0.0, 37.8e9).is_err());
        assert!(FilterSpec::new(3.35e14, 40e9, 37.8e9).is_err());
        let f = FilterSpec::new(3.35e14, 192e6, 37.8e9).unwrap();
        assert!(f.covers_span(30e9));
        assert!(!f.covers_span(125e9));
        assert!((f.intensity_weight(3.35e14) - 1.0).abs() < 1e-15);
        assert!((f.intensity_weight(3.35e14 + 96e6) - 0.5).abs() < 1e-12);
        let h = f.field_response(3.35e14 + 96e6);
        assert!((h.norm_sqr() - 0.5).abs() < 1e-12);
    }
}
