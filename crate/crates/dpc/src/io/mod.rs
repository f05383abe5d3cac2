//! Circuit text format, tabular emission and SVG rendering.

pub mod dpc;
pub mod svg;
pub mod table;

pub use dpc::{parse_circuit, serialize_circuit, CircuitDocument, ParseDiagnostic, Parsed};
pub use svg::{render_heatmap, Palette};
pub use table::{Dialect, ResultTable, Value};
