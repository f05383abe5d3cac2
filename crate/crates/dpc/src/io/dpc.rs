//! The `.dpc` circuit description format.
//!
//! Line-oriented grammar:
//!
//! ```text
//! # comment
//! mode <label> [<x> <y>]
//! diss <rate> <label>:<weight> [<label>:<weight> ...]
//! loss <label> <rate>
//! init <label> <re> <im>
//! set <key> <value>
//! ```
//!
//! A weight is `re` or `re,im` with no spaces. `loss` is sugar for a
//! single-weight dissipator with weight 1. Parsing is total: all
//! diagnostics from one pass are collected and reported together, each
//! with a line and column.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DVector;

use crate::circuit::{Circuit, Dissipator, Mode};
use crate::dynamics::AmplitudeVector;
use crate::C64;

/// One statement with its source location (1-based line and column).
#[derive(Debug, Clone, PartialEq)]
pub struct Located {
    pub line: usize,
    pub col: usize,
    pub statement: Statement,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Mode {
        label: String,
        position: Option<[f64; 2]>,
    },
    Dissipator {
        rate: f64,
        weights: Vec<(String, C64)>,
    },
    Loss {
        label: String,
        rate: f64,
    },
    Init {
        label: String,
        value: C64,
    },
    Set {
        key: String,
        value: String,
    },
}

/// Parsed statement list in source order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CircuitDocument {
    pub statements: Vec<Located>,
}

/// A parse/validation finding with its source location.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub diagnostics: Vec<ParseDiagnostic>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} parse error(s):", self.diagnostics.len())?;
        for d in &self.diagnostics {
            writeln!(f, "  {d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

/// Result of a successful parse.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub document: CircuitDocument,
    pub circuit: Circuit,
    /// Initial amplitudes from `init` lines; zero for unmentioned modes.
    pub initial: AmplitudeVector,
}

struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &line[s..i],
                    col: s + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            col: s + 1,
        });
    }
    out
}

fn valid_label(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Parses `.dpc` text into a statement list, a validated [`Circuit`] and
/// the initial amplitude vector. All errors of the pass are collected;
/// the function fails only at the end.
pub fn parse_circuit(text: &str) -> Result<Parsed, ParseError> {
    let mut diags: Vec<ParseDiagnostic> = Vec::new();
    let mut statements: Vec<Located> = Vec::new();

    let number = |tok: &Token<'_>,
                  line: usize,
                  what: &str,
                  diags: &mut Vec<ParseDiagnostic>|
     -> Option<f64> {
        match tok.text.parse::<f64>() {
            Ok(v) if v.is_finite() => Some(v),
            _ => {
                diags.push(ParseDiagnostic {
                    line,
                    col: tok.col,
                    message: format!("malformed {what} `{}`", tok.text),
                });
                None
            }
        }
    };

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens = tokenize(raw);
        let head = &tokens[0];
        let args = &tokens[1..];
        match head.text {
            "mode" => {
                if args.is_empty() {
                    diags.push(ParseDiagnostic {
                        line,
                        col: head.col,
                        message: "mode needs a label".into(),
                    });
                    continue;
                }
                if !valid_label(args[0].text) {
                    diags.push(ParseDiagnostic {
                        line,
                        col: args[0].col,
                        message: format!("invalid mode label `{}`", args[0].text),
                    });
                    continue;
                }
                let position = match args.len() {
                    1 => None,
                    3 => {
                        let x = number(&args[1], line, "coordinate", &mut diags);
                        let y = number(&args[2], line, "coordinate", &mut diags);
                        match (x, y) {
                            (Some(x), Some(y)) => Some([x, y]),
                            _ => continue,
                        }
                    }
                    _ => {
                        diags.push(ParseDiagnostic {
                            line,
                            col: head.col,
                            message: "mode takes a label or a label plus x y".into(),
                        });
                        continue;
                    }
                };
                statements.push(Located {
                    line,
                    col: head.col,
                    statement: Statement::Mode {
                        label: args[0].text.to_string(),
                        position,
                    },
                });
            }
            "diss" => {
                if args.len() < 2 {
                    diags.push(ParseDiagnostic {
                        line,
                        col: head.col,
                        message: "diss needs a rate and at least one label:weight".into(),
                    });
                    continue;
                }
                let Some(rate) = number(&args[0], line, "rate", &mut diags) else {
                    continue;
                };
                if rate < 0.0 {
                    diags.push(ParseDiagnostic {
                        line,
                        col: args[0].col,
                        message: format!("negative rate {rate}"),
                    });
                }
                let mut weights = Vec::new();
                let mut ok = true;
                for tok in &args[1..] {
                    let Some((label, weight)) = tok.text.split_once(':') else {
                        diags.push(ParseDiagnostic {
                            line,
                            col: tok.col,
                            message: format!("expected label:weight, got `{}`", tok.text),
                        });
                        ok = false;
                        continue;
                    };
                    if !valid_label(label) {
                        diags.push(ParseDiagnostic {
                            line,
                            col: tok.col,
                            message: format!("invalid mode label `{label}`"),
                        });
                        ok = false;
                        continue;
                    }
                    let value = if let Some((re, im)) = weight.split_once(',') {
                        match (re.parse::<f64>(), im.parse::<f64>()) {
                            (Ok(re), Ok(im)) if re.is_finite() && im.is_finite() => {
                                Some(C64::new(re, im))
                            }
                            _ => None,
                        }
                    } else {
                        weight
                            .parse::<f64>()
                            .ok()
                            .filter(|v| v.is_finite())
                            .map(|re| C64::new(re, 0.0))
                    };
                    match value {
                        Some(w) => weights.push((label.to_string(), w)),
                        None => {
                            diags.push(ParseDiagnostic {
                                line,
                                col: tok.col,
                                message: format!("malformed weight `{weight}`"),
                            });
                            ok = false;
                        }
                    }
                }
                if ok && rate >= 0.0 {
                    statements.push(Located {
                        line,
                        col: head.col,
                        statement: Statement::Dissipator { rate, weights },
                    });
                }
            }
            "loss" => {
                if args.len() != 2 {
                    diags.push(ParseDiagnostic {
                        line,
                        col: head.col,
                        message: "loss takes a label and a rate".into(),
                    });
                    continue;
                }
                let Some(rate) = number(&args[1], line, "rate", &mut diags) else {
                    continue;
                };
                if rate < 0.0 {
                    diags.push(ParseDiagnostic {
                        line,
                        col: args[1].col,
                        message: format!("negative rate {rate}"),
                    });
                    continue;
                }
                statements.push(Located {
                    line,
                    col: head.col,
                    statement: Statement::Loss {
                        label: args[0].text.to_string(),
                        rate,
                    },
                });
            }
            "init" => {
                if args.len() != 3 {
                    diags.push(ParseDiagnostic {
                        line,
                        col: head.col,
                        message: "init takes a label and re im".into(),
                    });
                    continue;
                }
                let re = number(&args[1], line, "number", &mut diags);
                let im = number(&args[2], line, "number", &mut diags);
                if let (Some(re), Some(im)) = (re, im) {
                    statements.push(Located {
                        line,
                        col: head.col,
                        statement: Statement::Init {
                            label: args[0].text.to_string(),
                            value: C64::new(re, im),
                        },
                    });
                }
            }
            "set" => {
                if args.len() < 2 {
                    diags.push(ParseDiagnostic {
                        line,
                        col: head.col,
                        message: "set takes a key and a value".into(),
                    });
                    continue;
                }
                let value_start = args[1].col - 1;
                statements.push(Located {
                    line,
                    col: head.col,
                    statement: Statement::Set {
                        key: args[0].text.to_string(),
                        value: raw[value_start..].trim_end().to_string(),
                    },
                });
            }
            other => {
                diags.push(ParseDiagnostic {
                    line,
                    col: head.col,
                    message: format!("unknown statement `{other}`"),
                });
            }
        }
    }

    // Second pass: build the circuit, resolving labels.
    let mut circuit = Circuit::default();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    for loc in &statements {
        if let Statement::Mode { label, position } = &loc.statement {
            if index.contains_key(label) {
                diags.push(ParseDiagnostic {
                    line: loc.line,
                    col: loc.col,
                    message: format!("duplicate mode `{label}`"),
                });
                continue;
            }
            index.insert(label.clone(), circuit.modes.len());
            circuit.modes.push(Mode {
                label: label.clone(),
                position: *position,
            });
        }
    }
    let mut initial = DVector::from_element(circuit.modes.len(), C64::new(0.0, 0.0));
    let mut init_seen = vec![false; circuit.modes.len()];
    for loc in &statements {
        match &loc.statement {
            Statement::Dissipator { rate, weights } => {
                let mut resolved = Vec::with_capacity(weights.len());
                let mut ok = true;
                for (label, w) in weights {
                    match index.get(label) {
                        Some(&i) => resolved.push((i, *w)),
                        None => {
                            diags.push(ParseDiagnostic {
                                line: loc.line,
                                col: loc.col,
                                message: format!("unknown mode `{label}`"),
                            });
                            ok = false;
                        }
                    }
                }
                if ok {
                    circuit.dissipators.push(Dissipator::new(*rate, resolved));
                }
            }
            Statement::Loss { label, rate } => match index.get(label) {
                Some(&i) => circuit
                    .dissipators
                    .push(Dissipator::new(*rate, [(i, C64::new(1.0, 0.0))])),
                None => diags.push(ParseDiagnostic {
                    line: loc.line,
                    col: loc.col,
                    message: format!("unknown mode `{label}`"),
                }),
            },
            Statement::Init { label, value } => match index.get(label) {
                Some(&i) => {
                    if init_seen[i] {
                        diags.push(ParseDiagnostic {
                            line: loc.line,
                            col: loc.col,
                            message: format!("duplicate init for mode `{label}`"),
                        });
                    } else {
                        init_seen[i] = true;
                        initial[i] = *value;
                    }
                }
                None => diags.push(ParseDiagnostic {
                    line: loc.line,
                    col: loc.col,
                    message: format!("unknown mode `{label}`"),
                }),
            },
            Statement::Set { key, value } => {
                circuit.metadata.insert(key.clone(), value.clone());
            }
            Statement::Mode { .. } => {}
        }
    }

    if diags.is_empty() {
        Ok(Parsed {
            document: CircuitDocument { statements },
            circuit,
            initial,
        })
    } else {
        diags.sort_by_key(|d| (d.line, d.col));
        Err(ParseError { diagnostics: diags })
    }
}

fn format_weight(w: C64) -> String {
    if w.im == 0.0 {
        format!("{}", w.re)
    } else {
        format!("{},{}", w.re, w.im)
    }
}

/// Canonical `.dpc` text: modes in canonical order (with coordinates when
/// present), dissipators in declaration order, single-weight-one rows as
/// `loss` sugar. Numbers use the shortest decimal that round-trips.
/// Metadata is advisory and not serialized.
pub fn serialize_circuit(circuit: &Circuit) -> String {
    let mut out = String::new();
    for m in &circuit.modes {
        match m.position {
            Some([x, y]) => out.push_str(&format!("mode {} {} {}\n", m.label, x, y)),
            None => out.push_str(&format!("mode {}\n", m.label)),
        }
    }
    for d in &circuit.dissipators {
        let single = d.weights.len() == 1
            && d.weights
                .values()
                .next()
                .map(|w| *w == C64::new(1.0, 0.0))
                .unwrap_or(false);
        if single {
            let (&i, _) = d.weights.iter().next().unwrap();
            out.push_str(&format!("loss {} {}\n", circuit.modes[i].label, d.rate));
        } else {
            out.push_str(&format!("diss {}", d.rate));
            for (&i, w) in &d.weights {
                out.push_str(&format!(
                    " {}:{}",
                    circuit.modes[i].label,
                    format_weight(*w)
                ));
            }
            out.push('\n');
        }
    }
    out
}

/// Serializes a circuit together with a set of initial amplitudes
/// (`init` lines for every nonzero entry).
pub fn serialize_with_initial(circuit: &Circuit, initial: &AmplitudeVector) -> String {
    let mut out = serialize_circuit(circuit);
    for (i, a) in initial.iter().enumerate() {
        if a.re != 0.0 || a.im != 0.0 {
            out.push_str(&format!(
                "init {} {} {}\n",
                circuit.modes[i].label, a.re, a.im
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::builders;

    #[test]
    fn parses_a_two_mode_chain() {
        let parsed = parse_circuit("mode a\nmode b\ndiss 1.0 a:1 b:-1\n").unwrap();
        assert_eq!(parsed.circuit.mode_count(), 2);
        assert_eq!(parsed.circuit.dissipators.len(), 1);
        let d = &parsed.circuit.dissipators[0];
        assert_eq!(d.rate, 1.0);
        assert_eq!(d.weights[&0], C64::new(1.0, 0.0));
        assert_eq!(d.weights[&1], C64::new(-1.0, 0.0));
        let reference = builders::uniform_chain(2, 1.0).unwrap();
        let m_ref = crate::dynamics::drift_matrix(&reference).unwrap();
        let m_parsed = crate::dynamics::drift_matrix(&parsed.circuit).unwrap();
        assert!((m_ref.matrix() - m_parsed.matrix()).norm() < 1e-15);
    }

    #[test]
    fn unknown_mode_is_reported_with_location() {
        let err = parse_circuit("mode a\ndiss 1.0 a:1 c:-1\n").unwrap_err();
        assert_eq!(err.diagnostics.len(), 1);
        let d = &err.diagnostics[0];
        assert_eq!(d.line, 2);
        assert!(d.message.contains("`c`"), "{}", d.message);
    }

    #[test]
    fn collects_all_errors_in_one_pass() {
        let text = "mode a\nmode a\ndiss -1 a:1\ndiss 1.0 a:x\ninit q 1 0\nbogus\n";
        let err = parse_circuit(text).unwrap_err();
        let messages: Vec<&str> = err.diagnostics.iter().map(|d| d.message.as_str()).collect();
        assert!(messages.iter().any(|m| m.contains("duplicate mode")));
        assert!(messages.iter().any(|m| m.contains("negative rate")));
        assert!(messages.iter().any(|m| m.contains("malformed weight")));
        assert!(messages.iter().any(|m| m.contains("unknown mode `q`")));
        assert!(messages.iter().any(|m| m.contains("unknown statement")));
        assert!(err.diagnostics.len() >= 5);
    }

    #[test]
    fn complex_weights_and_init_round_trip() {
        let text = "mode a 0 0\nmode b 1 0\ndiss 0.5 a:1,0.5 b:-0.25,-1\ninit a 0.5 -0.125\n";
        let parsed = parse_circuit(text).unwrap();
        assert_eq!(parsed.initial[0], C64::new(0.5, -0.125));
        let twice = serialize_with_initial(&parsed.circuit, &parsed.initial);
        assert_eq!(text, twice);
    }

    #[test]
    fn serialize_chain2_is_three_lines() {
        let c = builders::uniform_chain(2, 1.0).unwrap();
        let text = serialize_circuit(&c);
        assert_eq!(text.trim_end().lines().count(), 3);
    }

    #[test]
    fn serialize_honeycomb_cell_has_six_signed_weights() {
        let c = builders::honeycomb(1, 1, 1.0).unwrap();
        let text = serialize_circuit(&c);
        let diss_line = text.lines().find(|l| l.starts_with("diss")).unwrap();
        assert_eq!(diss_line.split_whitespace().count(), 2 + 6);
        assert_eq!(text.lines().filter(|l| l.starts_with("mode")).count(), 6);
    }

    #[test]
    fn loss_sugar_round_trips() {
        let c = builders::uniform_chain(2, 1.0)
            .unwrap()
            .add_mode_loss("m1", 0.25)
            .unwrap();
        let text = serialize_circuit(&c);
        assert!(text.contains("loss m1 0.25"));
        let parsed = parse_circuit(&text).unwrap();
        assert_eq!(parsed.circuit, c);
    }

    #[test]
    fn serialize_parse_serialize_is_identity() {
        let messy =
            "# a comment\n\nmode  b\nmode a\ndiss 1  b:1 a:-1\nloss b 0.5\nset note  hello world\n";
        let parsed = parse_circuit(messy).unwrap();
        let canon = serialize_circuit(&parsed.circuit);
        let reparsed = parse_circuit(&canon).unwrap();
        assert_eq!(parsed.circuit, reparsed.circuit);
        assert_eq!(canon, serialize_circuit(&reparsed.circuit));
    }

    #[test]
    fn builders_round_trip_through_text() {
        let circuits = [
            builders::uniform_chain(5, 0.75).unwrap(),
            builders::two_arm(3, 1.0).unwrap(),
            builders::double_chain(4, 0.5).unwrap(),
            builders::square_lattice(3, 4, 1.25).unwrap(),
            builders::honeycomb(2, 2, 1.0).unwrap(),
        ];
        for c in &circuits {
            let text = serialize_circuit(c);
            let parsed = parse_circuit(&text).unwrap();
            assert_eq!(&parsed.circuit, c);
        }
    }
}
