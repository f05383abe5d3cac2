//! Standalone SVG heatmaps of modal amplitudes on positioned circuits.
//!
//! Each mode is drawn as a rectangle at its lattice position; the fill
//! colour is mapped linearly from `|value|` over `[0, max]` (max taken
//! over the rendered values; an all-zero field renders at the low end).
//! A vertical scale bar with the numeric range is included.

use std::fmt::Write as _;

use thiserror::Error;

use crate::circuit::Circuit;

/// Colour maps. `Grayscale` is a linear black-to-white ramp;
/// `Viridis` interpolates the standard five viridis anchor colours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Palette {
    Grayscale,
    #[default]
    Viridis,
}

const VIRIDIS: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

impl Palette {
    fn colour(&self, t: f64) -> String {
        let t = t.clamp(0.0, 1.0);
        let rgb = match self {
            Palette::Grayscale => [t * 255.0, t * 255.0, t * 255.0],
            Palette::Viridis => {
                let x = t * (VIRIDIS.len() - 1) as f64;
                let lo = (x.floor() as usize).min(VIRIDIS.len() - 2);
                let f = x - lo as f64;
                [
                    VIRIDIS[lo][0] + f * (VIRIDIS[lo + 1][0] - VIRIDIS[lo][0]),
                    VIRIDIS[lo][1] + f * (VIRIDIS[lo + 1][1] - VIRIDIS[lo][1]),
                    VIRIDIS[lo][2] + f * (VIRIDIS[lo + 1][2] - VIRIDIS[lo][2]),
                ]
            }
        };
        format!(
            "rgb({},{},{})",
            rgb[0].round() as u8,
            rgb[1].round() as u8,
            rgb[2].round() as u8
        )
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RenderError {
    #[error("mode `{0}` has no position")]
    MissingPosition(String),
    #[error("expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("nothing to render")]
    Empty,
}

const CELL: f64 = 40.0;
const PAD: f64 = 10.0;
const BAR_W: f64 = 18.0;
const BAR_GAP: f64 = 24.0;

/// Renders `|values|` on the circuit's mode positions as a standalone SVG.
pub fn render_heatmap(
    circuit: &Circuit,
    values: &[f64],
    palette: Palette,
) -> Result<String, RenderError> {
    if values.len() != circuit.mode_count() {
        return Err(RenderError::DimensionMismatch {
            expected: circuit.mode_count(),
            got: values.len(),
        });
    }
    if circuit.modes.is_empty() {
        return Err(RenderError::Empty);
    }
    let mut positions = Vec::with_capacity(circuit.modes.len());
    for m in &circuit.modes {
        match m.position {
            Some(p) => positions.push(p),
            None => return Err(RenderError::MissingPosition(m.label.clone())),
        }
    }

    let magnitudes: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let max = magnitudes.iter().cloned().fold(0.0, f64::max);
    let scale = if max > 0.0 { max } else { 1.0 };

    let (x_min, x_max) = min_max(positions.iter().map(|p| p[0]));
    let (y_min, y_max) = min_max(positions.iter().map(|p| p[1]));
    let grid_w = (x_max - x_min + 1.0) * CELL;
    let grid_h = (y_max - y_min + 1.0) * CELL;
    let width = PAD + grid_w + BAR_GAP + BAR_W + 64.0 + PAD;
    let height = PAD + grid_h.max(120.0) + PAD;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{width}" height="{height}" fill="white"/>"#
    );

    for ((m, p), v) in circuit.modes.iter().zip(&positions).zip(&magnitudes) {
        // SVG y grows downwards; lattice y grows upwards.
        let x = PAD + (p[0] - x_min) * CELL + 2.0;
        let y = PAD + (y_max - p[1]) * CELL + 2.0;
        let side = CELL - 4.0;
        let colour = palette.colour(v / scale);
        let _ = writeln!(
            svg,
            r#"<rect x="{x}" y="{y}" width="{side}" height="{side}" fill="{colour}"><title>{}: {}</title></rect>"#,
            xml_escape(&m.label),
            v
        );
    }

    // Scale bar: 32 bands from max (top) to 0 (bottom).
    let bar_x = PAD + grid_w + BAR_GAP;
    let bar_h = grid_h.max(120.0);
    let bands = 32;
    for i in 0..bands {
        let t = 1.0 - (i as f64 + 0.5) / bands as f64;
        let y = PAD + bar_h * i as f64 / bands as f64;
        let h = bar_h / bands as f64 + 0.5;
        let _ = writeln!(
            svg,
            r#"<rect x="{bar_x}" y="{y}" width="{BAR_W}" height="{h}" fill="{}"/>"#,
            palette.colour(t)
        );
    }
    let label_x = bar_x + BAR_W + 6.0;
    let _ = writeln!(
        svg,
        r#"<text x="{label_x}" y="{}" font-family="monospace" font-size="12">{}</text>"#,
        PAD + 10.0,
        max
    );
    let _ = writeln!(
        svg,
        r#"<text x="{label_x}" y="{}" font-family="monospace" font-size="12">0</text>"#,
        PAD + bar_h
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::builders;
    use crate::circuit::Mode;

    #[test]
    fn single_mode_renders_one_cell() {
        let mut c = Circuit::default();
        c.modes.push(Mode::at("a", 0.0, 0.0));
        let svg = render_heatmap(&c, &[1.0], Palette::Grayscale).unwrap();
        // one cell + 32 scale-bar bands + background
        assert_eq!(svg.matches("<rect").count(), 1 + 32 + 1);
    }

    #[test]
    fn uniform_values_render_uniform_fill() {
        let c = builders::square_lattice(3, 3, 1.0).unwrap();
        let svg = render_heatmap(&c, &[0.5; 9], Palette::Viridis).unwrap();
        let top = Palette::Viridis.colour(1.0);
        assert_eq!(
            svg.matches(&format!("height=\"36\" fill=\"{top}\""))
                .count(),
            9
        );
    }

    #[test]
    fn missing_positions_are_an_error() {
        let mut c = Circuit::default();
        c.modes.push(Mode::new("a"));
        assert_eq!(
            render_heatmap(&c, &[1.0], Palette::Viridis),
            Err(RenderError::MissingPosition("a".into()))
        );
    }

    #[test]
    fn lattice_heatmap_is_deterministic_and_counts_modes() {
        let c = builders::square_lattice(6, 6, 1.0).unwrap();
        let values: Vec<f64> = (0..36).map(|i| i as f64 / 36.0).collect();
        let a = render_heatmap(&c, &values, Palette::Viridis).unwrap();
        let b = render_heatmap(&c, &values, Palette::Viridis).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.matches("<title>").count(), 36);
    }

    #[test]
    fn brightest_cell_sits_on_the_largest_amplitude() {
        // asymptotic field of a lossy cell: support on s2_1, s2_2 only
        let circuit = builders::square_lattice(2, 2, 1.0)
            .unwrap()
            .add_mode_loss("s1_1", 1.0)
            .unwrap()
            .add_mode_loss("s1_2", 1.0)
            .unwrap();
        let values = [0.0, 0.0, 0.5, 0.5];
        let svg = render_heatmap(&circuit, &values, Palette::Viridis).unwrap();
        let top = Palette::Viridis.colour(1.0);
        let bottom = Palette::Viridis.colour(0.0);
        for line in svg.lines().filter(|l| l.contains("<title>")) {
            if line.contains("s2_1") || line.contains("s2_2") {
                assert!(line.contains(&top), "{line}");
            } else {
                assert!(line.contains(&bottom), "{line}");
            }
        }
    }
}
