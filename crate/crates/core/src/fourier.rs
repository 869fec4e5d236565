//! Discrete Fourier transforms with the physics sign convention
//! `E(nu) = integral E(t) exp(+2*pi*i*nu*t) dt`, mapped onto rustfft.
//!
//! Spectra are kept in ascending offset order (see [`crate::grid`]); the
//! reordering to the transform's internal layout happens here. With these
//! conventions a transfer factor `exp(+2*pi*i*nu*tau)` delays the packet by
//! `tau` (circularly on the finite window).

use std::sync::Mutex;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::grid::TimeGrid;

static PLANNER: Mutex<Option<FftPlanner<f64>>> = Mutex::new(None);

fn run_fft(buf: &mut [Complex64], inverse: bool) {
    let mut guard = PLANNER.lock().unwrap();
    let planner = guard.get_or_insert_with(FftPlanner::new);
    let fft = if inverse {
        planner.plan_fft_inverse(buf.len())
    } else {
        planner.plan_fft_forward(buf.len())
    };
    drop(guard);
    fft.process(buf);
}

/// Rotate between ascending-offset order and the transform's layout
/// (offset zero first). Self-inverse for even lengths.
pub fn swap_halves(buf: &mut [Complex64]) {
    let half = buf.len() / 2;
    for i in 0..half {
        buf.swap(i, i + half);
    }
}

/// Transform time samples on `grid` into the spectrum on the dual frequency
/// grid, ascending offset order. Offsets are relative to the rotating-frame
/// carrier; the absolute center plays no role here.
pub fn time_to_frequency(grid: &TimeGrid, field: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(field.len(), grid.n);
    let mut buf = field.to_vec();
    // sum_j x_j exp(+2 pi i j k / n) is rustfft's inverse transform
    run_fft(&mut buf, true);
    let dnu = 1.0 / (grid.n as f64 * grid.dt);
    let n = grid.n as f64;
    for (k, v) in buf.iter_mut().enumerate() {
        let nu = if k < grid.n / 2 {
            k as f64 * dnu
        } else {
            (k as f64 - n) * dnu
        };
        let phase = 2.0 * std::f64::consts::PI * nu * grid.t_start;
        *v *= Complex64::from_polar(grid.dt, phase);
    }
    swap_halves(&mut buf);
    buf
}

/// Inverse of [`time_to_frequency`].
pub fn frequency_to_time(grid: &TimeGrid, spectrum: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(spectrum.len(), grid.n);
    let mut buf = spectrum.to_vec();
    swap_halves(&mut buf);
    let dnu = 1.0 / (grid.n as f64 * grid.dt);
    let n = grid.n as f64;
    for (k, v) in buf.iter_mut().enumerate() {
        let nu = if k < grid.n / 2 {
            k as f64 * dnu
        } else {
            (k as f64 - n) * dnu
        };
        let phase = -2.0 * std::f64::consts::PI * nu * grid.t_start;
        *v *= Complex64::from_polar(dnu, phase);
    }
    run_fft(&mut buf, false);
    buf
}

/// Circular convolution of `samples` with a kernel given by its values at
/// signed lags `m*dt` (`kernel(lag)`), normalized so the kernel integrates
/// to one on the grid.
pub fn circular_convolve(
    grid: &TimeGrid,
    samples: &[Complex64],
    kernel: impl Fn(f64) -> f64,
) -> Vec<Complex64> {
    assert_eq!(samples.len(), grid.n);
    let n = grid.n;
    let mut k: Vec<Complex64> = (0..n)
        .map(|m| {
            let lag = if m < n / 2 {
                m as f64 * grid.dt
            } else {
                (m as f64 - n as f64) * grid.dt
            };
            Complex64::new(kernel(lag), 0.0)
        })
        .collect();
    let total: f64 = k.iter().map(|v| v.re).sum::<f64>() * grid.dt;
    if total > 0.0 {
        for v in k.iter_mut() {
            *v /= total;
        }
    }
    let mut x = samples.to_vec();
    run_fft(&mut x, false);
    run_fft(&mut k, false);
    for (a, b) in x.iter_mut().zip(k.iter()) {
        *a *= b;
    }
    run_fft(&mut x, true);
    let scale = grid.dt / n as f64;
    for v in x.iter_mut() {
        *v *= scale;
    }
    x
}
