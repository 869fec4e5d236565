use slowlight::atomdata::{AtomModel, VaporCell};
use slowlight::constants::*;
use slowlight::grid::TimeGrid;
use slowlight::propagation::*;
use slowlight::pumping::*;
use slowlight::susceptibility::{optical_response, transmission_spectrum};

fn main() {
    let model = AtomModel::cs_d1();
    let grid = TimeGrid::default_window();
    let fgrid = grid.frequency_grid(model.nu_line);

    // --- criterion 4: absorption anchors at 83.5 C
    let cell = VaporCell::standard_at_celsius(83.5).unwrap();
    let resp = optical_response(&model, &cell, &fgrid).unwrap();
    let t = transmission_spectrum(&resp);
    let lo = fgrid.index_of_offset(-1.1e9);
    let hi = fgrid.index_of_offset(-0.1e9);
    let peak_od = resp.od[lo..hi].iter().cloned().fold(f64::MIN, f64::max);
    println!("peak decadic OD = {:.3}", peak_od / std::f64::consts::LN_10);
    let i0 = fgrid.index_of_offset(0.0);
    println!("T(nu0) = {:.4}", t[i0]);
    let wlo = fgrid.index_of_offset(-0.55e9);
    let whi = fgrid.index_of_offset(0.55e9);
    let (win_idx, wmax) = (wlo..whi).map(|i| (i, t[i])).max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    let half = wmax / 2.0;
    let mut a = win_idx; while t[a] >= half { a -= 1; }
    let mut b = win_idx; while t[b] >= half { b += 1; }
    println!("window Tmax {:.4} at {:.1} MHz, FWHM = {:.1} MHz", wmax, fgrid.offset(win_idx)/1e6, (fgrid.offset(b) - fgrid.offset(a))/1e6);
    println!("group delay(nu0) = {:.3} ns", resp.group_delay[i0]*1e9);

    // --- criterion 5: temperature sweep, nu0-filtered Fourier-limited
    let source = PhotonSource::new(1.04e-9, model.nu_line, 0.0).unwrap();
    let filter = FilterSpec::new(model.nu_line, DEFAULT_FILTER_FWHM, DEFAULT_FILTER_FSR).unwrap();
    println!("\ntemp sweep (nu0-filtered Fourier-limited, field mode):");
    for theta in [40.0, 45.0, 55.0, 65.0, 75.0, 83.5] {
        let cell = VaporCell::standard_at_celsius(theta).unwrap();
        let out = delay_experiment(&model, &cell, &source,
            Some((&filter, FilterMode::FieldTransfer)), DEFAULT_IRF_FWHM, &grid, 3).unwrap();
        println!("  {:5.1} C: mean delay {:7.3} ns, peak delay {:7.3} ns, fraction {:.4}, pre-ring {:.2e}, wrap {:.2e}",
            theta, out.result.mean_delay.unwrap()*1e9, out.result.peak_delay.unwrap()*1e9,
            out.result.transmitted_fraction, out.sample_pre_irf.pre_emission_ratio(),
            out.sample_pre_irf.wraparound_fraction());
    }

    // also the full-QD (3.57 GHz) unfiltered Fig-3 style run at two temps
    println!("\nunfiltered 3.57 GHz ensemble (101 nodes):");
    let qd = PhotonSource::new(1.04e-9, model.nu_line, DEFAULT_INHOM_FWHM).unwrap();
    for theta in [40.0, 83.5] {
        let cell = VaporCell::standard_at_celsius(theta).unwrap();
        let out = delay_experiment(&model, &cell, &qd, None, DEFAULT_IRF_FWHM, &grid, 101).unwrap();
        println!("  {:5.1} C: mean delay {:6.3} ns fraction {:.4}", theta,
            out.result.mean_delay.unwrap()*1e9, out.result.transmitted_fraction);
    }

    // --- criterion 6: spectral delay scan at 40 C
    println!("\nspectral delay scan at 40 C:");
    let cell40 = VaporCell::standard_at_celsius(40.0).unwrap();
    let resp40 = optical_response(&model, &cell40, &fgrid).unwrap();
    let offsets = [-600e6, 0.0, 600e6];
    let fwhms = [153.05e6, 192e6, 384e6];
    let rows = spectral_delay_scan(&resp40, &cell40, &offsets, &fwhms, DEFAULT_IRF_FWHM, &grid).unwrap();
    for r in rows {
        println!("  fwhm {:6.1} MHz, nu_f {:+5.0} MHz: delay {:+8.4} ns, fraction {:.4}",
            r.photon_fwhm/1e6, r.filter_offset/1e6,
            r.mean_delay.map(|d| d*1e9).unwrap_or(f64::NAN), r.transmitted_fraction);
    }

    // --- criterion 7: pump sweep at 110 C
    println!("\npump sweep at 110 C (192 MHz filtered 3.57 GHz photon, mimic mode):");
    let cell110 = VaporCell::standard_at_celsius(110.0).unwrap();
    let qd_filtered = PhotonSource::new(1.04e-9, model.nu_line, DEFAULT_INHOM_FWHM).unwrap();
    let config = PumpSweepConfig::standard(&model, 101);
    let points = pump_sweep(&model, &cell110, &qd_filtered, 1e3,
        &[0.5, 1.0, 2.0, 5.0, 10.0, 15.0, 30.0, 100.0], &config).unwrap();
    for p in &points {
        println!("  P/g {:6.1}: rho44 {:.4}, fraction {:.4}, mean {:7.2} ns, peak {:7.2} ns",
            p.pump_ratio, p.rho44_bar, p.transmitted_fraction,
            p.mean_delay.map(|d| d*1e9).unwrap_or(f64::NAN),
            p.peak_delay.map(|d| d*1e9).unwrap_or(f64::NAN));
        let beyond: f64 = p.waveform.intensity.iter().enumerate()
            .filter(|(i, _)| p.waveform.grid.time(*i) > 60e-9)
            .map(|(_, v)| v).sum::<f64>() / p.waveform.intensity.iter().sum::<f64>();
        if p.pump_ratio <= 1.0 { println!("      tail beyond 60 ns: {:.3e}", beyond); }
    }
}
