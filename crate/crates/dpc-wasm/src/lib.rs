//! Browser demo bindings: small wrappers over the core crate that return
//! self-contained SVG (or JSON) strings for a static page to inject.

use wasm_bindgen::prelude::wasm_bindgen;

use dpc::circuit::builders;
use dpc::dynamics;
use dpc::io::{render_heatmap, Palette};
use dpc::waveguide::{wavelength_scan, DispersionModel, WaveguideDevice};
use dpc::C64;
use nalgebra::DVector;

fn error_svg(message: &str) -> String {
    format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="480" height="40"><text x="4" y="24" fill="crimson" font-family="monospace" font-size="13">{message}</text></svg>"#
    )
}

/// Square-lattice diffusion: excite one site, evolve for `gamma_t`, and
/// render the amplitude magnitudes. `lossy` is a semicolon-separated list
/// of `row,col` pairs (1-based) that receive extra per-mode loss.
#[wasm_bindgen]
pub fn lattice_heatmap_svg(
    rows: u32,
    cols: u32,
    excite_row: u32,
    excite_col: u32,
    gamma_t: f64,
    lossy: &str,
) -> String {
    let build = || -> Result<String, String> {
        let (rows, cols) = (rows as usize, cols as usize);
        let mut circuit = builders::square_lattice(rows, cols, 1.0).map_err(|e| e.to_string())?;
        for pair in lossy.split(';').filter(|p| !p.trim().is_empty()) {
            let (r, c) = pair
                .split_once(',')
                .ok_or_else(|| format!("bad loss entry `{pair}` (use row,col;row,col)"))?;
            let label = format!("s{}_{}", r.trim(), c.trim());
            circuit = circuit
                .add_mode_loss(&label, 1.0)
                .map_err(|e| e.to_string())?;
        }
        let index = circuit
            .mode_index(&format!("s{excite_row}_{excite_col}"))
            .ok_or("excited site outside the lattice")?;
        let mut initial = DVector::from_element(circuit.mode_count(), C64::new(0.0, 0.0));
        initial[index] = C64::new(1.0, 0.0);
        let state = if gamma_t <= 0.0 {
            initial
        } else if gamma_t >= 200.0 {
            dynamics::asymptotic_state(&circuit, &initial).map_err(|e| e.to_string())?
        } else {
            dynamics::evolve(&circuit, &initial, &[gamma_t])
                .map_err(|e| e.to_string())?
                .states
                .pop()
                .expect("one state")
        };
        let values: Vec<f64> = state.iter().map(|a| a.norm()).collect();
        render_heatmap(&circuit, &values, Palette::Viridis).map_err(|e| e.to_string())
    };
    build().unwrap_or_else(|e| error_svg(&e))
}

/// Distributor routing: the end of the upper arm is excited; the control
/// pair is set to `(1, ctrl_r)`. `ctrl_r = -1` routes into the lower arm,
/// `0` spreads over both, `+1` confines light to the upper arm.
#[wasm_bindgen]
pub fn distributor_svg(n_per_arm: u32, ctrl_r: f64, gamma_t: f64) -> String {
    let build = || -> Result<String, String> {
        let n = n_per_arm as usize;
        let circuit = builders::two_arm(n, 1.0).map_err(|e| e.to_string())?;
        let mut initial = DVector::from_element(circuit.mode_count(), C64::new(0.0, 0.0));
        initial[n - 1] = C64::new(1.0, 0.0);
        initial[2 * n] = C64::new(1.0, 0.0);
        initial[2 * n + 1] = C64::new(ctrl_r, 0.0);
        let state = if gamma_t <= 0.0 {
            initial
        } else if gamma_t >= 5e3 {
            dynamics::asymptotic_state(&circuit, &initial).map_err(|e| e.to_string())?
        } else {
            dynamics::evolve(&circuit, &initial, &[gamma_t])
                .map_err(|e| e.to_string())?
                .states
                .pop()
                .expect("one state")
        };
        let values: Vec<f64> = state.iter().map(|a| a.norm()).collect();
        render_heatmap(&circuit, &values, Palette::Viridis).map_err(|e| e.to_string())
    };
    build().unwrap_or_else(|e| error_svg(&e))
}

/// Wavelength scan of the n-guide device with the default ratio-0.5
/// dispersion model, drawn as intensity-vs-wavelength curves.
#[wasm_bindgen]
pub fn wavelength_scan_svg(n_chain: u32, input_guide: u32, points: u32) -> String {
    let build = || -> Result<String, String> {
        let device = WaveguideDevice::new(n_chain as usize, 20, 0.1, 0.2, 30.0)
            .map_err(|e| e.to_string())?;
        let dispersion = DispersionModel::default();
        let scan = wavelength_scan(
            &device,
            &dispersion,
            dispersion.lambda_range,
            (points as usize).clamp(2, 256),
            input_guide as usize,
        )
        .map_err(|e| e.to_string())?;
        let series: Vec<Vec<(f64, f64)>> = (0..device.n_chain)
            .map(|g| {
                scan.rows
                    .iter()
                    .map(|r| (r.lambda_nm, r.intensities[g]))
                    .collect()
            })
            .collect();
        Ok(line_plot_svg(
            &series,
            dispersion.lambda_range,
            "wavelength (nm)",
            "normalized chain intensity",
        ))
    };
    build().unwrap_or_else(|e| error_svg(&e))
}

const SERIES_COLOURS: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

fn line_plot_svg(
    series: &[Vec<(f64, f64)>],
    x_range: (f64, f64),
    x_label: &str,
    y_label: &str,
) -> String {
    use std::fmt::Write as _;
    let (w, h, ml, mb) = (520.0, 320.0, 48.0, 36.0);
    let plot_w = w - ml - 12.0;
    let plot_h = h - mb - 12.0;
    let x_of = |x: f64| ml + (x - x_range.0) / (x_range.1 - x_range.0) * plot_w;
    let y_of = |y: f64| 12.0 + (1.0 - y) * plot_h;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r##"<rect x="{ml}" y="12" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##
    );
    for (k, pts) in series.iter().enumerate() {
        let colour = SERIES_COLOURS[k % SERIES_COLOURS.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", x_of(x), y_of(y.clamp(0.0, 1.0))))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.8"/>"#,
            path.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{colour}" font-family="monospace" font-size="12">I{}</text>"#,
            w - 40.0,
            24.0 + 14.0 * k as f64,
            k + 1
        );
    }
    for frac in [0.0, 0.5, 1.0] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="monospace" font-size="11" text-anchor="end">{frac}</text>"#,
            ml - 4.0,
            y_of(frac) + 4.0
        );
        let x = x_range.0 + frac * (x_range.1 - x_range.0);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="monospace" font-size="11" text-anchor="middle">{x:.0}</text>"#,
            x_of(x),
            h - mb + 16.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="monospace" font-size="12" text-anchor="middle">{x_label}</text>"#,
        ml + plot_w / 2.0,
        h - 4.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="12" y="{}" font-family="monospace" font-size="12" transform="rotate(-90 12 {})" text-anchor="middle">{y_label}</text>"#,
        12.0 + plot_h / 2.0,
        12.0 + plot_h / 2.0
    );
    svg.push_str("</svg>\n");
    svg
}
