//! Uniform time and frequency grids.
//!
//! A [`TimeGrid`] and the [`FrequencyGrid`] obtained from
//! [`TimeGrid::frequency_grid`] form a Fourier-dual pair: `n` samples with
//! `spacing = 1/(n*dt)` spanning `1/dt`. Frequency samples are stored in
//! ascending order of offset from the grid center, offset of sample `i`
//! being `(i - n/2) * spacing`.

use crate::constants::{DEFAULT_TIME_SAMPLES, DEFAULT_TIME_START, DEFAULT_TIME_STEP};
use crate::error::{Error, Result};

/// Uniform time grid with `n` (power of two) samples starting at `t_start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub dt: f64,
    pub n: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, dt: f64, n: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() || !t_start.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "time grid requires finite t_start and dt > 0, got t_start={t_start}, dt={dt}"
            )));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "time grid length {n} must be a power of two >= 2"
            )));
        }
        Ok(Self { t_start, dt, n })
    }

    /// The default window: 2^16 samples at 8 ps starting at -32 ns
    /// (524 ns total, Nyquist +-62.5 GHz, 1.9 MHz resolution).
    pub fn default_window() -> Self {
        Self {
            t_start: DEFAULT_TIME_START,
            dt: DEFAULT_TIME_STEP,
            n: DEFAULT_TIME_SAMPLES,
        }
    }

    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.time(i))
    }

    pub fn window(&self) -> f64 {
        self.n as f64 * self.dt
    }

    /// Index of the sample closest to time `t` (clamped to the grid).
    pub fn index_of(&self, t: f64) -> usize {
        let i = ((t - self.t_start) / self.dt).round();
        (i.max(0.0) as usize).min(self.n - 1)
    }

    /// The Fourier-dual frequency grid, centered on the absolute optical
    /// frequency `center`.
    pub fn frequency_grid(&self, center: f64) -> FrequencyGrid {
        FrequencyGrid {
            center,
            span: 1.0 / self.dt,
            n: self.n,
        }
    }
}

/// Uniform frequency grid of `n` (power of two) samples spanning `span`
/// around `center`; sample offsets run from `-span/2` in steps of `span/n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    pub center: f64,
    pub span: f64,
    pub n: usize,
}

impl FrequencyGrid {
    pub fn new(center: f64, span: f64, n: usize) -> Result<Self> {
        if !(span > 0.0) || !span.is_finite() || !center.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "frequency grid requires finite center and span > 0, got center={center}, span={span}"
            )));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "frequency grid length {n} must be a power of two >= 2"
            )));
        }
        Ok(Self { center, span, n })
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.span / self.n as f64
    }

    /// Offset of sample `i` from the grid center, Hz.
    #[inline]
    pub fn offset(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.spacing()
    }

    /// Absolute optical frequency of sample `i`, Hz.
    #[inline]
    pub fn frequency(&self, i: usize) -> f64 {
        self.center + self.offset(i)
    }

    pub fn offsets(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.offset(i))
    }

    /// Index of the sample closest to `offset` from center.
    pub fn index_of_offset(&self, offset: f64) -> usize {
        let i = (offset / self.spacing()).round() + (self.n / 2) as f64;
        (i.max(0.0) as usize).min(self.n - 1)
    }

    /// True when `other` describes the same sampling (same spacing and
    /// length); centers may differ.
    pub fn same_sampling(&self, other: &FrequencyGrid) -> bool {
        self.n == other.n && (self.spacing() - other.spacing()).abs() <= 1e-9 * self.spacing()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duality() {
        let tg = TimeGrid::default_window();
        let fg = tg.frequency_grid(3.35e14);
        assert_eq!(fg.n, tg.n);
        assert!((fg.span - 125e9).abs() < 1.0);
        assert!((fg.spacing() - 1.9073486328125e6).abs() < 1e-6);
        // offsets are ascending and centered
        assert_eq!(fg.offset(fg.n / 2), 0.0);
        assert!(fg.offset(0) < 0.0);
        assert!((fg.offset(0) + fg.span / 2.0).abs() < 1e-3);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(TimeGrid::new(0.0, 1e-12, 1000).is_err());
        assert!(TimeGrid::new(0.0, -1e-12, 1024).is_err());
        assert!(FrequencyGrid::new(0.0, 0.0, 1024).is_err());
    }

    #[test]
    fn index_round_trip() {
        let fg = FrequencyGrid::new(1e14, 10e9, 256).unwrap();
        for i in [0usize, 1, 128, 200, 255] {
            assert_eq!(fg.index_of_offset(fg.offset(i)), i);
        }
        let tg = TimeGrid::default_window();
        assert_eq!(tg.index_of(tg.time(777)), 777);
    }
}
