use pvlc_core::planner::{fit_trends, SweepGrid};
use pvlc_core::presets;

fn sweep() -> SweepGrid {
    presets::sweep_base()
        .sweep(&presets::sweep_heights(), &presets::sweep_widths())
        .unwrap()
}

#[test]
fn sweep_frontier_and_fitted_envelope() {
    let grid = sweep();
    let rows = grid.rows();
    assert!(rows.iter().all(|r| r.min_width_m.is_some()));

    // Wider symbols are needed higher up, so throughput falls with height.
    let mins: Vec<f64> = rows.iter().map(|r| r.min_width_m.unwrap()).collect();
    assert!(mins.windows(2).all(|p| p[0] <= p[1]), "{mins:?}");
    let thr: Vec<f64> = rows.iter().map(|r| r.throughput_bps.unwrap()).collect();
    assert!(thr.first() > thr.last());

    let max_h: Vec<Option<f64>> = (0..grid.widths_m.len()).map(|j| grid.max_height(j)).collect();
    let mut last = 0.0;
    for h in max_h.iter().flatten() {
        assert!(*h >= last);
        last = *h;
    }

    let model = fit_trends(&grid.points(), "desk sweep").unwrap();
    assert!(model.width_slope_a > 0.0);
    assert!(model.thr_decay_d > 0.0);
    // Every measured minimum width lies within a width step of the fit.
    let step = grid.widths_m[1] - grid.widths_m[0];
    for r in &rows {
        let w = r.min_width_m.unwrap();
        let h_fit = model.max_height_for_width(w);
        let w_fit = (r.height_m - model.width_intercept_b) / model.width_slope_a;
        assert!((w_fit - w).abs() <= 1.5 * step, "h {} w {w} fit {w_fit} ({h_fit})", r.height_m);
    }
}

#[test]
fn fitted_region_decodes_on_fresh_seeds() {
    let grid = sweep();
    let model = fit_trends(&grid.points(), "desk sweep").unwrap();
    let mut base = presets::sweep_base();
    base.noise.seed = 10_000;
    base.trials = 2;
    let (mut tried, mut ok) = (0, 0);
    for &h in &grid.heights_m {
        for &w in &grid.widths_m {
            if h <= model.max_height_for_width(w) {
                tried += 1;
                ok += base.cell_decodable(h, w).unwrap() as usize;
            }
        }
    }
    assert!(tried > 50);
    assert!(ok * 100 >= 95 * tried, "{ok}/{tried}");
}
