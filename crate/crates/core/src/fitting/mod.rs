//! Least-squares estimation of the spectroscopy analysis models: lifetime
//! decay, resonant Voigt scan, antibunching histogram, and the
//! vapor-transmission deconvolution scan.
//!
//! All models are smooth few-parameter least-squares problems solved by a
//! damped Gauss-Newton optimizer ([`lm`]). Convolutions with the Gaussian
//! instrument response are evaluated in closed form through the
//! exponentially-modified-Gaussian kernel; the transmission-scan kernel,
//! which has no closed form, is integrated on an oversampled internal
//! grid.

mod lm;

pub use lm::{fd_jacobian, levenberg_marquardt, LeastSquaresProblem, LmConfig, LmOutcome};

use num_complex::Complex64;

use crate::atomdata::{AtomModel, VaporCell};
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::susceptibility::{erfc, erfcx, faddeeva, optical_response, transmission_spectrum};

const FWHM_TO_SIGMA: f64 = 2.354_820_045_030_949; // 2 sqrt(2 ln 2)
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Binned data: strictly increasing centers, one value per bin, optional
/// 1-sigma uncertainties.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram1D {
    pub centers: Vec<f64>,
    pub counts: Vec<f64>,
    pub sigma: Option<Vec<f64>>,
}

impl Histogram1D {
    pub fn new(centers: Vec<f64>, counts: Vec<f64>, sigma: Option<Vec<f64>>) -> Result<Self> {
        if centers.len() != counts.len() || centers.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "histogram needs matching centers/counts with >= 2 bins, got {}/{}",
                centers.len(),
                counts.len()
            )));
        }
        if centers.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "histogram centers must be strictly increasing".into(),
            ));
        }
        if let Some(s) = &sigma {
            if s.len() != centers.len() || s.iter().any(|&v| v < 0.0) {
                return Err(Error::InvalidParameter(
                    "histogram uncertainties must be non-negative, one per bin".into(),
                ));
            }
        }
        if centers.iter().chain(counts.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("histogram"));
        }
        Ok(Self {
            centers,
            counts,
            sigma,
        })
    }
}

/// Residual weighting when the histogram carries no explicit
/// uncertainties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    #[default]
    Uniform,
    /// 1/sqrt(max(count, 1)) per bin.
    Poisson,
}

/// Shared fit options.
#[derive(Debug, Clone, Copy, Default)]
pub struct FitOptions {
    pub weighting: Weighting,
    pub lm: LmConfig,
}

/// One estimated parameter.
#[derive(Debug, Clone)]
pub struct FitParameter {
    pub name: &'static str,
    pub value: f64,
    /// 1-sigma uncertainty from the linearized covariance at the optimum.
    pub uncertainty: f64,
}

/// Estimates, uncertainties and optimizer diagnostics. When `converged` is
/// false the estimates are provisional.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub parameters: Vec<FitParameter>,
    /// Euclidean norm of the weighted residuals at the optimum.
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Set when a constrained parameter finished pinned at its bound.
    pub at_boundary: bool,
}

impl FitResult {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.parameters
            .iter()
            .find(|p| p.name == name)
            .map(|p| p.value)
    }

    pub fn uncertainty(&self, name: &str) -> Option<f64> {
        self.parameters
            .iter()
            .find(|p| p.name == name)
            .map(|p| p.uncertainty)
    }
}

fn weights(data: &Histogram1D, weighting: Weighting) -> Vec<f64> {
    match &data.sigma {
        Some(s) => s.iter().map(|&v| 1.0 / v.max(f64::MIN_POSITIVE)).collect(),
        None => match weighting {
            Weighting::Uniform => vec![1.0; data.counts.len()],
            Weighting::Poisson => data
                .counts
                .iter()
                .map(|&y| 1.0 / y.max(1.0).sqrt())
                .collect(),
        },
    }
}

fn finish(
    outcome: &LmOutcome,
    names: &[&'static str],
    extras: Vec<FitParameter>,
    at_boundary: bool,
) -> FitResult {
    let mut parameters: Vec<FitParameter> = names
        .iter()
        .zip(&outcome.params)
        .zip(&outcome.uncertainties)
        .map(|((name, &value), &uncertainty)| FitParameter {
            name,
            value,
            uncertainty,
        })
        .collect();
    parameters.extend(extras);
    FitResult {
        parameters,
        residual_norm: outcome.cost.sqrt(),
        converged: outcome.converged,
        iterations: outcome.iterations,
        at_boundary,
    }
}

/// Gaussian probability density with standard deviation `sigma`.
fn gaussian_pdf(x: f64, sigma: f64) -> f64 {
    (-x * x / (2.0 * sigma * sigma)).exp() / (sigma * SQRT_2PI)
}

/// exp(-x/tau) Theta(x) convolved with a unit-area Gaussian of standard
/// deviation `sigma` (exponentially modified Gaussian). Evaluated through
/// erfcx on one side so neither factor overflows.
pub(crate) fn exp_gauss(x: f64, tau: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return if x >= 0.0 { (-x / tau).exp() } else { 0.0 };
    }
    let z = (sigma / tau - x / sigma) / std::f64::consts::SQRT_2;
    if z >= 0.0 {
        0.5 * erfcx(z) * (-x * x / (2.0 * sigma * sigma)).exp()
    } else {
        0.5 * ((sigma * sigma) / (2.0 * tau * tau) - x / tau).exp() * erfc(z)
    }
}

/// d/dtau of [`exp_gauss`].
fn exp_gauss_dtau(x: f64, tau: f64, sigma: f64) -> f64 {
    let h = exp_gauss(x, tau, sigma);
    if sigma == 0.0 {
        return h * x / (tau * tau);
    }
    h * (x / (tau * tau) - sigma * sigma / (tau * tau * tau))
        + sigma * sigma / (tau * tau) * gaussian_pdf(x, sigma)
}

/// d/dx of [`exp_gauss`].
fn exp_gauss_dx(x: f64, tau: f64, sigma: f64) -> f64 {
    let h = exp_gauss(x, tau, sigma);
    if sigma == 0.0 {
        return -h / tau;
    }
    gaussian_pdf(x, sigma) - h / tau
}

/// Area-normalized Voigt profile: Gaussian standard deviation `sigma_g`,
/// Lorentzian HWHM `gamma`. `sigma_g = 0` degrades to the Lorentzian.
pub(crate) fn voigt_profile(delta: f64, sigma_g: f64, gamma: f64) -> f64 {
    if sigma_g <= 0.0 {
        return gamma / (std::f64::consts::PI * (delta * delta + gamma * gamma));
    }
    let z = Complex64::new(delta, gamma) / (std::f64::consts::SQRT_2 * sigma_g);
    faddeeva(z).expect("upper half-plane by construction").re / (sigma_g * SQRT_2PI)
}

/// (dV/d delta, dV/d sigma_g) of the normalized Voigt profile, using
/// w'(z) = -2 z w(z) + 2i/sqrt(pi).
fn voigt_derivatives(delta: f64, sigma_g: f64, gamma: f64) -> (f64, f64) {
    let z = Complex64::new(delta, gamma) / (std::f64::consts::SQRT_2 * sigma_g);
    let w = faddeeva(z).expect("upper half-plane by construction");
    let wp = -2.0 * z * w + Complex64::new(0.0, 2.0 / std::f64::consts::PI.sqrt());
    let v = w.re / (sigma_g * SQRT_2PI);
    let dv_ddelta = wp.re / (2.0 * sigma_g * sigma_g * std::f64::consts::PI.sqrt());
    let dv_dsigma = -(v + (wp * z).re / (sigma_g * SQRT_2PI)) / sigma_g;
    (dv_ddelta, dv_dsigma)
}

/// Total Voigt FWHM from its components by the Olivero-Longbothum
/// approximation f_V = 0.5346 f_L + sqrt(0.2166 f_L^2 + f_G^2)
/// (JQSRT 17, 233 (1977); accurate to 0.02 %).
pub fn voigt_fwhm(lorentz_fwhm: f64, gauss_fwhm: f64) -> f64 {
    0.5346 * lorentz_fwhm + (0.2166 * lorentz_fwhm * lorentz_fwhm + gauss_fwhm * gauss_fwhm).sqrt()
}

// ---------------------------------------------------------------------------
// lifetime fit

struct LifetimeProblem<'a> {
    data: &'a Histogram1D,
    w: Vec<f64>,
    irf_sigma: f64,
    scales: [f64; 4],
}

// params: [t1, amplitude, background, t0]
impl LeastSquaresProblem for LifetimeProblem<'_> {
    fn residuals(&self, p: &[f64]) -> Vec<f64> {
        self.data
            .centers
            .iter()
            .zip(&self.data.counts)
            .zip(&self.w)
            .map(|((&t, &y), &w)| {
                w * (p[1] * exp_gauss(t - p[3], p[0], self.irf_sigma) + p[2] - y)
            })
            .collect()
    }

    fn jacobian(&self, p: &[f64]) -> Option<Vec<Vec<f64>>> {
        if self.irf_sigma == 0.0 {
            // the bare Heaviside model is discontinuous in t0; central
            // differences handle the edge bins better than the one-sided
            // analytic derivative
            return None;
        }
        Some(
            self.data
                .centers
                .iter()
                .zip(&self.w)
                .map(|(&t, &w)| {
                    let x = t - p[3];
                    let h = exp_gauss(x, p[0], self.irf_sigma);
                    vec![
                        w * p[1] * exp_gauss_dtau(x, p[0], self.irf_sigma),
                        w * h,
                        w,
                        -w * p[1] * exp_gauss_dx(x, p[0], self.irf_sigma),
                    ]
                })
                .collect(),
        )
    }

    fn constrain(&self, p: &mut [f64]) {
        p[0] = p[0].max(1e-6 * self.scales[0]);
    }

    fn scales(&self) -> Vec<f64> {
        self.scales.to_vec()
    }
}

/// Fit A * [exp(-(t-t0)/T1) Theta(t-t0) conv Gaussian(irf_fwhm)] + B.
/// Parameters: `t1`, `amplitude`, `background`, `t0`.
pub fn fit_lifetime(
    data: &Histogram1D,
    irf_fwhm: f64,
    options: &FitOptions,
) -> Result<FitResult> {
    let n = data.counts.len();
    let mut sorted = data.counts.clone();
    sorted.sort_by(f64::total_cmp);
    let background = sorted[..(n / 10).max(1)].iter().sum::<f64>() / (n / 10).max(1) as f64;
    let (peak_idx, &peak) = data
        .counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty histogram");
    let height = peak - background;
    if !(height > 0.0) || sorted[n - 1] == sorted[0] {
        return Err(Error::FitFailed("degenerate flat lifetime data".into()));
    }

    // tail log-slope between 80 % and 10 % of the peak height
    let mut tail: Vec<(f64, f64)> = Vec::new();
    for i in peak_idx..n {
        let v = data.counts[i] - background;
        if v < 0.1 * height {
            break;
        }
        if v <= 0.8 * height {
            tail.push((data.centers[i], v.ln()));
        }
    }
    let t1_init = if tail.len() >= 2 {
        let m = tail.len() as f64;
        let sx: f64 = tail.iter().map(|p| p.0).sum();
        let sy: f64 = tail.iter().map(|p| p.1).sum();
        let sxx: f64 = tail.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = tail.iter().map(|p| p.0 * p.1).sum();
        let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        if slope < 0.0 {
            -1.0 / slope
        } else {
            (data.centers[n - 1] - data.centers[peak_idx]) / 5.0
        }
    } else {
        (data.centers[n - 1] - data.centers[peak_idx]) / 5.0
    };

    if data.centers[n - 1] - data.centers[peak_idx] < 5.0 * t1_init {
        return Err(Error::InvalidParameter(format!(
            "lifetime data must span at least 5 lifetimes past the peak, got {:.3e} s for t1 ~ {:.3e} s",
            data.centers[n - 1] - data.centers[peak_idx],
            t1_init
        )));
    }

    // half-rise position; a step-like rise maps onto the peak bin itself
    let mut t0_init = data.centers[peak_idx];
    for i in 0..=peak_idx {
        if data.counts[i] - background >= 0.5 * height {
            t0_init = data.centers[i];
            break;
        }
    }

    let problem = LifetimeProblem {
        data,
        w: weights(data, options.weighting),
        irf_sigma: irf_fwhm / FWHM_TO_SIGMA,
        scales: [t1_init, height.abs(), height.abs(), t1_init],
    };
    let initial = [t1_init, 1.4 * height, background, t0_init];
    let outcome = lm::levenberg_marquardt(&problem, &initial, &options.lm)?;
    Ok(finish(
        &outcome,
        &["t1", "amplitude", "background", "t0"],
        vec![],
        false,
    ))
}

// ---------------------------------------------------------------------------
// Voigt resonance scan

struct VoigtScanProblem<'a> {
    data: &'a Histogram1D,
    w: Vec<f64>,
    gamma: f64,
    nu_ref: f64,
    floor: f64,
    scales: [f64; 5],
}

// params: [gauss_fwhm, center, amplitude, slope, offset]
impl VoigtScanProblem<'_> {
    fn sigma_g(&self, p: &[f64]) -> f64 {
        p[0] / FWHM_TO_SIGMA
    }
}

impl LeastSquaresProblem for VoigtScanProblem<'_> {
    fn residuals(&self, p: &[f64]) -> Vec<f64> {
        let sg = self.sigma_g(p);
        self.data
            .centers
            .iter()
            .zip(&self.data.counts)
            .zip(&self.w)
            .map(|((&nu, &y), &w)| {
                let v = voigt_profile(nu - p[1], sg, self.gamma);
                w * (p[2] * v + p[3] * (nu - self.nu_ref) + p[4] - y)
            })
            .collect()
    }

    fn jacobian(&self, p: &[f64]) -> Option<Vec<Vec<f64>>> {
        let sg = self.sigma_g(p);
        Some(
            self.data
                .centers
                .iter()
                .zip(&self.w)
                .map(|(&nu, &w)| {
                    let d = nu - p[1];
                    let v = voigt_profile(d, sg, self.gamma);
                    let (dv_dd, dv_ds) = voigt_derivatives(d, sg, self.gamma);
                    vec![
                        w * p[2] * dv_ds / FWHM_TO_SIGMA,
                        -w * p[2] * dv_dd,
                        w * v,
                        w * (nu - self.nu_ref),
                        w,
                    ]
                })
                .collect(),
        )
    }

    fn constrain(&self, p: &mut [f64]) {
        p[0] = p[0].max(self.floor);
    }

    fn scales(&self) -> Vec<f64> {
        self.scales.to_vec()
    }
}

/// Fit A * Voigt(nu - center; gauss_fwhm free, Lorentzian FWHM fixed)
/// plus a linear term. Parameters: `gauss_fwhm`, `center`, `amplitude`,
/// `slope`, `offset`, and the derived `total_fwhm` (Olivero-Longbothum).
/// A Gaussian width pinned at its lower bound sets the boundary flag.
pub fn fit_voigt_scan(
    data: &Histogram1D,
    fixed_lorentz_fwhm: f64,
    options: &FitOptions,
) -> Result<FitResult> {
    if !(fixed_lorentz_fwhm > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "fixed Lorentzian FWHM must be positive, got {fixed_lorentz_fwhm}"
        )));
    }
    let n = data.counts.len();
    let edge = (n / 10).max(1);
    let offset_init = (data.counts[..edge].iter().sum::<f64>()
        + data.counts[n - edge..].iter().sum::<f64>())
        / (2 * edge) as f64;
    let (peak_idx, &peak) = data
        .counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty histogram");
    let height = peak - offset_init;
    if !(height > 0.0) {
        return Err(Error::FitFailed("no peak above the baseline".into()));
    }
    let center_init = data.centers[peak_idx];

    // apparent FWHM from half crossings, then strip the fixed Lorentzian
    let half = offset_init + height / 2.0;
    let mut lo = data.centers[0];
    for i in (0..peak_idx).rev() {
        if data.counts[i] < half {
            lo = data.centers[i];
            break;
        }
    }
    let mut hi = data.centers[n - 1];
    for i in peak_idx..n {
        if data.counts[i] < half {
            hi = data.centers[i];
            break;
        }
    }
    let apparent = (hi - lo).max(fixed_lorentz_fwhm);
    let inner = apparent - 0.5346 * fixed_lorentz_fwhm;
    let gauss_init = (inner * inner - 0.2166 * fixed_lorentz_fwhm * fixed_lorentz_fwhm)
        .max(0.0)
        .sqrt()
        .max(1e-3 * fixed_lorentz_fwhm);
    let amp_init = height * voigt_fwhm(fixed_lorentz_fwhm, gauss_init) * 1.1;

    let floor = 1e-4 * fixed_lorentz_fwhm;
    let nu_ref = data.centers[n / 2];
    let problem = VoigtScanProblem {
        data,
        w: weights(data, options.weighting),
        gamma: fixed_lorentz_fwhm / 2.0,
        nu_ref,
        floor,
        scales: [
            fixed_lorentz_fwhm.max(gauss_init),
            apparent,
            amp_init.abs(),
            height / apparent,
            height.abs(),
        ],
    };
    let initial = [gauss_init, center_init, amp_init, 0.0, offset_init];
    let outcome = lm::levenberg_marquardt(&problem, &initial, &options.lm)?;

    let gauss = outcome.params[0];
    let at_boundary = gauss <= 2.0 * floor;
    let reported_gauss = if at_boundary { 0.0 } else { gauss };
    let total = voigt_fwhm(fixed_lorentz_fwhm, reported_gauss);
    let total_unc = if total > 0.0 {
        outcome.uncertainties[0] * reported_gauss
            / (0.2166 * fixed_lorentz_fwhm * fixed_lorentz_fwhm + reported_gauss * reported_gauss)
                .sqrt()
    } else {
        0.0
    };
    let mut result = finish(
        &outcome,
        &["gauss_fwhm", "center", "amplitude", "slope", "offset"],
        vec![FitParameter {
            name: "total_fwhm",
            value: total,
            uncertainty: total_unc,
        }],
        at_boundary,
    );
    if at_boundary {
        result.parameters[0].value = 0.0;
    }
    Ok(result)
}

// ---------------------------------------------------------------------------
// antibunching (g2) fit

struct G2Problem<'a> {
    data: &'a Histogram1D,
    w: Vec<f64>,
    irf_sigma: f64,
    scales: [f64; 3],
}

fn dip_kernel(tau: f64, dip_time: f64, irf_sigma: f64) -> f64 {
    exp_gauss(tau, dip_time, irf_sigma) + exp_gauss(-tau, dip_time, irf_sigma)
}

// params: [g0, dip_time, amplitude]
impl LeastSquaresProblem for G2Problem<'_> {
    fn residuals(&self, p: &[f64]) -> Vec<f64> {
        self.data
            .centers
            .iter()
            .zip(&self.data.counts)
            .zip(&self.w)
            .map(|((&tau, &y), &w)| {
                let c = dip_kernel(tau, p[1], self.irf_sigma);
                w * (p[2] * (1.0 - (1.0 - p[0]) * c) - y)
            })
            .collect()
    }

    fn jacobian(&self, p: &[f64]) -> Option<Vec<Vec<f64>>> {
        Some(
            self.data
                .centers
                .iter()
                .zip(&self.w)
                .map(|(&tau, &w)| {
                    let c = dip_kernel(tau, p[1], self.irf_sigma);
                    let dc = exp_gauss_dtau(tau, p[1], self.irf_sigma)
                        + exp_gauss_dtau(-tau, p[1], self.irf_sigma);
                    vec![
                        w * p[2] * c,
                        -w * p[2] * (1.0 - p[0]) * dc,
                        w * (1.0 - (1.0 - p[0]) * c),
                    ]
                })
                .collect(),
        )
    }

    fn constrain(&self, p: &mut [f64]) {
        p[0] = p[0].clamp(0.0, 2.0);
        p[1] = p[1].max(1e-6 * self.scales[1]);
    }

    fn scales(&self) -> Vec<f64> {
        self.scales.to_vec()
    }
}

/// Fit A * [1 - (1 - g0) exp(-|tau|/dip_time) conv Gaussian(irf_fwhm)] to
/// a coincidence histogram normalized to its long-delay plateau.
/// Parameters: `g0_deconv`, `dip_time`, `amplitude`, plus the derived
/// `g0_measured` (model value at tau = 0 including the IRF).
pub fn fit_g2(data: &Histogram1D, irf_fwhm: f64, options: &FitOptions) -> Result<FitResult> {
    let n = data.counts.len();
    let span = data.centers[n - 1] - data.centers[0];
    let outer: Vec<f64> = data
        .centers
        .iter()
        .zip(&data.counts)
        .filter(|(&t, _)| t.abs() >= 0.35 * span / 2.0 * 2.0 * 0.8)
        .map(|(_, &y)| y)
        .collect();
    let plateau = if outer.is_empty() {
        1.0
    } else {
        outer.iter().sum::<f64>() / outer.len() as f64
    };
    if !(0.5..=1.5).contains(&plateau) {
        return Err(Error::InvalidParameter(format!(
            "histogram must be normalized to its long-delay plateau (found {plateau:.3})"
        )));
    }
    let min = data.counts.iter().cloned().fold(f64::INFINITY, f64::min);
    let g0_init = (min / plateau).clamp(0.0, 1.0);

    // dip width at half depth sets the initial recovery time
    let half = plateau - (plateau - min) / 2.0;
    let below: Vec<f64> = data
        .centers
        .iter()
        .zip(&data.counts)
        .filter(|(_, &y)| y < half)
        .map(|(&t, _)| t)
        .collect();
    let width = match (
        below.iter().cloned().reduce(f64::min),
        below.iter().cloned().reduce(f64::max),
    ) {
        (Some(lo), Some(hi)) if hi > lo => hi - lo,
        _ => span / 10.0,
    };
    let dip_init = (width / (2.0 * std::f64::consts::LN_2)).max(span / n as f64);

    let problem = G2Problem {
        data,
        w: weights(data, options.weighting),
        irf_sigma: irf_fwhm / FWHM_TO_SIGMA,
        scales: [1.0, dip_init, plateau],
    };
    let initial = [g0_init, dip_init, plateau];
    let outcome = lm::levenberg_marquardt(&problem, &initial, &options.lm)?;

    let measured = 1.0
        - (1.0 - outcome.params[0])
            * dip_kernel(0.0, outcome.params[1], irf_fwhm / FWHM_TO_SIGMA);
    let c0 = dip_kernel(0.0, outcome.params[1], irf_fwhm / FWHM_TO_SIGMA);
    Ok(finish(
        &outcome,
        &["g0_deconv", "dip_time", "amplitude"],
        vec![FitParameter {
            name: "g0_measured",
            value: measured,
            uncertainty: outcome.uncertainties[0] * c0,
        }],
        false,
    ))
}

// ---------------------------------------------------------------------------
// transmission-scan deconvolution fit

struct TransmissionScanProblem<'a> {
    data: &'a Histogram1D,
    w: Vec<f64>,
    gamma: f64,
    nu_ref: f64,
    floor: f64,
    scales: [f64; 5],
    /// Cell transmission on an internal fine grid, offsets ascending.
    t_grid: FrequencyGrid,
    t_cs: Vec<f64>,
    /// Kernel stencil offsets (multiples of the fine spacing).
    stencil: Vec<f64>,
}

impl TransmissionScanProblem<'_> {
    fn transmission_at(&self, offset: f64) -> f64 {
        let spacing = self.t_grid.spacing();
        let pos = offset / spacing + (self.t_grid.n / 2) as f64;
        if pos <= 0.0 {
            return self.t_cs[0];
        }
        let i = pos.floor() as usize;
        if i + 1 >= self.t_grid.n {
            return self.t_cs[self.t_grid.n - 1];
        }
        let f = pos - i as f64;
        self.t_cs[i] * (1.0 - f) + self.t_cs[i + 1] * f
    }

    /// Kernel-weighted transmission around scan offset `nu`; the discrete
    /// kernel is renormalized so a delta-like kernel is the identity.
    fn convolved(&self, nu: f64, sigma_g: f64) -> f64 {
        let mut acc = 0.0;
        let mut norm = 0.0;
        for &d in &self.stencil {
            let k = voigt_profile(d, sigma_g, self.gamma);
            acc += k * self.transmission_at(nu + d);
            norm += k;
        }
        acc / norm
    }
}

// params: [gauss_fwhm, amplitude, slope, offset, freq_offset]
impl LeastSquaresProblem for TransmissionScanProblem<'_> {
    fn residuals(&self, p: &[f64]) -> Vec<f64> {
        let sg = p[0] / FWHM_TO_SIGMA;
        self.data
            .centers
            .iter()
            .zip(&self.data.counts)
            .zip(&self.w)
            .map(|((&nu, &y), &w)| {
                let model =
                    p[1] * self.convolved(nu + p[4], sg) + p[2] * (nu - self.nu_ref) + p[3];
                w * (model - y)
            })
            .collect()
    }

    fn constrain(&self, p: &mut [f64]) {
        p[0] = p[0].max(self.floor);
    }

    fn scales(&self) -> Vec<f64> {
        self.scales.to_vec()
    }
}

/// Fit the count rate of an emitter scanned across the vapor resonances:
/// amplitude * integral Voigt(nu' - nu; gauss_fwhm free, Lorentzian fixed)
/// T_cell(nu') dnu' plus a linear term. The emitter detuning axis of
/// `data` is relative to the line anchor nu0. Parameters: `gauss_fwhm`,
/// `amplitude`, `slope`, `offset`, `freq_offset`.
pub fn fit_transmission_scan(
    data: &Histogram1D,
    model: &AtomModel,
    cell: &VaporCell,
    fixed_lorentz_fwhm: f64,
    options: &FitOptions,
) -> Result<FitResult> {
    if !(fixed_lorentz_fwhm > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "fixed Lorentzian FWHM must be positive, got {fixed_lorentz_fwhm}"
        )));
    }
    let n = data.counts.len();

    // cell transmission on the fine internal grid
    let t_grid = FrequencyGrid::new(model.nu_line, 125e9, 1 << 16)?;
    let response = optical_response(model, cell, &t_grid)?;
    let t_cs = transmission_spectrum(&response);
    let span_needed = data.centers[n - 1].abs().max(data.centers[0].abs());
    if span_needed > t_grid.span / 2.0 * 0.8 {
        return Err(Error::GridMismatch(format!(
            "scan reaches {span_needed:.3e} Hz from the line anchor, beyond the internal response grid"
        )));
    }

    // oversampled kernel stencil: >= 4x the data resolution, spanning
    // enough widths that the Voigt tails are captured
    let data_spacing = data
        .centers
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let fine = (data_spacing / 4.0).min(t_grid.spacing() * 16.0);
    let half_width = 6.0 * (4e9f64).max(fixed_lorentz_fwhm * 8.0);
    let m = (half_width / fine).ceil() as i64;
    let stencil: Vec<f64> = (-m..=m).map(|k| k as f64 * fine).collect();

    let edge = (n / 10).max(1);
    let baseline = (data.counts[..edge].iter().sum::<f64>()
        + data.counts[n - edge..].iter().sum::<f64>())
        / (2 * edge) as f64;
    if !(baseline > 0.0) {
        return Err(Error::FitFailed("transmission baseline is not positive".into()));
    }

    let problem = TransmissionScanProblem {
        data,
        w: weights(data, options.weighting),
        gamma: fixed_lorentz_fwhm / 2.0,
        nu_ref: data.centers[n / 2],
        floor: 1e-4 * fixed_lorentz_fwhm,
        scales: [1e9, baseline, baseline / 10e9, baseline, 1e9],
        t_grid,
        t_cs,
        stencil,
    };
    let initial = [3e9, baseline, 0.0, 0.0, 0.0];
    let outcome = lm::levenberg_marquardt(&problem, &initial, &options.lm)?;
    let at_boundary = outcome.params[0] <= 2.0 * problem.floor;
    Ok(finish(
        &outcome,
        &["gauss_fwhm", "amplitude", "slope", "offset", "freq_offset"],
        vec![],
        at_boundary,
    ))
}
