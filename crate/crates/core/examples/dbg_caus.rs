use slowlight::atomdata::{AtomModel, VaporCell};
use slowlight::grid::TimeGrid;
use slowlight::propagation::*;
use slowlight::susceptibility::optical_response;

fn main() {
    let model = AtomModel::cs_d1();
    let cell = VaporCell::standard_at_celsius(83.5).unwrap();
    let grid = TimeGrid::new(-16e-9, 8e-12, 1 << 16).unwrap();
    let fgrid = grid.frequency_grid(model.nu_line);
    let response = optical_response(&model, &cell, &fgrid).unwrap();
    let transfer = transfer_function(&response, &cell);
    let source = PhotonSource::new(1.04e-9, model.nu_line, 0.0).unwrap();
    let p = make_photon(&source, &grid).unwrap();
    let out = propagate(&p, &transfer).unwrap();
    let outi = out.intensity();
    let peak = outi.intensity.iter().cloned().fold(0.0f64, f64::max);
    let ipk = outi.intensity.iter().enumerate().max_by(|a,b| a.1.total_cmp(b.1)).unwrap().0;
    println!("output peak at t = {:.3e} (I={:.3e}); input peak I={:.3e}", grid.time(ipk), peak, p.field.iter().map(|v| v.norm_sqr()).fold(0.0f64, f64::max));
    let i0 = grid.index_of(0.0);
    for i in (i0-6)..(i0+7) {
        println!("  t={:+.1} ps  I/peak={:.4e}", grid.time(i)*1e12, outi.intensity[i]/peak);
    }
    // max over t < -5 dt (away from the step edge)
    let mut m = 0.0f64;
    for i in 0..(i0-5) { m = m.max(outi.intensity[i]); }
    println!("max pre-emission (excluding 5 edge bins): {:.3e}", m/peak);
}
