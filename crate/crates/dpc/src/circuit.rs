//! Network data model: modes, shared-reservoir dissipators and builders.
//!
//! A [`Circuit`] is an ordered list of modes plus a list of [`Dissipator`]s.
//! Each dissipator carries a non-negative rate and a sparse weight row
//! `x_jk` over the modes; the pair encodes the jump operator
//! `A_j = sum_k x_jk a_k`. Mode order is canonical: every matrix and
//! amplitude vector in the crate indexes modes in declaration order.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::C64;

/// A single bosonic mode of the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    /// Unique label within the circuit.
    pub label: String,
    /// Optional 2D coordinates in dimensionless lattice units, used for
    /// rendering and lattice-aware analysis.
    pub position: Option<[f64; 2]>,
}

impl Mode {
    pub fn new(label: impl Into<String>) -> Self {
        Mode {
            label: label.into(),
            position: None,
        }
    }

    pub fn at(label: impl Into<String>, x: f64, y: f64) -> Self {
        Mode {
            label: label.into(),
            position: Some([x, y]),
        }
    }
}

/// One shared-reservoir coupling: rate `gamma` and weight row `x_jk`.
///
/// A single-entry weight map with weight 1 is plain per-mode loss.
#[derive(Debug, Clone, PartialEq)]
pub struct Dissipator {
    /// Relaxation rate into the reservoir (inverse effective time; inverse
    /// length in the waveguide realization). Non-negative.
    pub rate: f64,
    /// Weights keyed by canonical mode index. At least one entry.
    pub weights: BTreeMap<usize, C64>,
}

impl Dissipator {
    pub fn new(rate: f64, weights: impl IntoIterator<Item = (usize, C64)>) -> Self {
        Dissipator {
            rate,
            weights: weights.into_iter().collect(),
        }
    }

    /// `<A_j>` for a given amplitude vector: `sum_k x_jk alpha_k`.
    pub fn expectation(&self, amplitudes: &nalgebra::DVector<C64>) -> C64 {
        self.weights.iter().map(|(&k, w)| w * amplitudes[k]).sum()
    }
}

/// A network of modes coupled through shared lossy reservoirs.
///
/// Equality and serialization cover modes and dissipators only; `metadata`
/// is advisory (builder name, lattice dimensions) and never semantic.
#[derive(Debug, Clone, Default)]
pub struct Circuit {
    pub modes: Vec<Mode>,
    pub dissipators: Vec<Dissipator>,
    pub metadata: BTreeMap<String, String>,
}

impl PartialEq for Circuit {
    fn eq(&self, other: &Self) -> bool {
        self.modes == other.modes && self.dissipators == other.dissipators
    }
}

/// Severity of a validation diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// One finding of [`Circuit::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    fn error(message: String) -> Self {
        Diagnostic {
            severity: Severity::Error,
            message,
        }
    }

    fn warning(message: String) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            message,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("chain needs at least 2 modes, got {0}")]
    TooFewModes(usize),
    #[error("expected {expected} rates, got {got}")]
    RateCountMismatch { expected: usize, got: usize },
    #[error("negative rate {0}")]
    NegativeRate(f64),
    #[error("unknown mode `{0}`")]
    UnknownMode(String),
    #[error("lattice dimensions must be at least {min}, got {rows}x{cols}")]
    LatticeTooSmall {
        min: usize,
        rows: usize,
        cols: usize,
    },
}

impl Circuit {
    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    /// Canonical index of a mode by label.
    pub fn mode_index(&self, label: &str) -> Option<usize> {
        self.modes.iter().position(|m| m.label == label)
    }

    pub fn label(&self, index: usize) -> &str {
        &self.modes[index].label
    }

    /// Dense weight matrix `X` (one row per dissipator, one column per mode).
    pub fn weight_matrix(&self) -> nalgebra::DMatrix<C64> {
        let mut x = nalgebra::DMatrix::zeros(self.dissipators.len(), self.modes.len());
        for (j, d) in self.dissipators.iter().enumerate() {
            for (&k, w) in &d.weights {
                x[(j, k)] = *w;
            }
        }
        x
    }

    /// Appends a plain-loss dissipator `{mode: 1}` with the given rate,
    /// returning the extended circuit. The receiver is unchanged.
    pub fn add_mode_loss(&self, mode: &str, rate: f64) -> Result<Circuit, CircuitError> {
        if rate < 0.0 {
            return Err(CircuitError::NegativeRate(rate));
        }
        let index = self
            .mode_index(mode)
            .ok_or_else(|| CircuitError::UnknownMode(mode.to_string()))?;
        let mut out = self.clone();
        out.dissipators
            .push(Dissipator::new(rate, [(index, C64::new(1.0, 0.0))]));
        Ok(out)
    }

    /// Structural diagnostics. An empty list means the circuit is
    /// well-formed; warnings do not prevent simulation.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let n = self.modes.len();

        let mut seen = std::collections::HashSet::new();
        for m in &self.modes {
            if !seen.insert(m.label.as_str()) {
                out.push(Diagnostic::error(format!(
                    "duplicate mode label `{}`",
                    m.label
                )));
            }
            if let Some(p) = m.position {
                if !p[0].is_finite() || !p[1].is_finite() {
                    out.push(Diagnostic::error(format!(
                        "mode `{}` has non-finite position",
                        m.label
                    )));
                }
            }
        }

        let mut touched = vec![false; n];
        for (j, d) in self.dissipators.iter().enumerate() {
            if d.rate < 0.0 {
                out.push(Diagnostic::error(format!(
                    "dissipator {j} has negative rate {}",
                    d.rate
                )));
            } else if d.rate == 0.0 {
                out.push(Diagnostic::warning(format!("dissipator {j} has zero rate")));
            }
            if d.weights.is_empty() {
                out.push(Diagnostic::error(format!(
                    "dissipator {j} has an empty weight row"
                )));
            }
            for (&k, w) in &d.weights {
                if k >= n {
                    out.push(Diagnostic::error(format!(
                        "dissipator {j} references mode index {k} out of range"
                    )));
                } else {
                    touched[k] = true;
                }
                if !w.re.is_finite() || !w.im.is_finite() {
                    out.push(Diagnostic::error(format!(
                        "dissipator {j} has non-finite weight"
                    )));
                }
            }
        }

        for (k, t) in touched.iter().enumerate() {
            if !t {
                out.push(Diagnostic::warning(format!(
                    "mode `{}` is not referenced by any dissipator",
                    self.modes[k].label
                )));
            }
        }
        out
    }

    /// True when [`Circuit::validate`] reports no errors.
    pub fn is_well_formed(&self) -> bool {
        self.validate()
            .iter()
            .all(|d| d.severity != Severity::Error)
    }

    /// Mode adjacency induced by shared dissipators: `i` and `k` are
    /// neighbours when some weight row contains both.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![std::collections::BTreeSet::new(); self.modes.len()];
        for d in &self.dissipators {
            let idx: Vec<usize> = d.weights.keys().copied().collect();
            for &i in &idx {
                for &k in &idx {
                    if i != k && i < self.modes.len() && k < self.modes.len() {
                        adj[i].insert(k);
                    }
                }
            }
        }
        adj.into_iter().map(|s| s.into_iter().collect()).collect()
    }
}

pub mod builders {
    //! Builders for the network topologies used throughout the crate.
    //!
    //! All builders are pure and deterministic: identical inputs produce
    //! identical circuits, byte for byte after serialization.

    use super::*;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn check_rate(rate: f64) -> Result<(), CircuitError> {
        if rate < 0.0 {
            Err(CircuitError::NegativeRate(rate))
        } else {
            Ok(())
        }
    }

    /// Linear dissipatively coupled chain: `n` modes, jump operators
    /// `A_j = a_j - a_{j+1}` with per-link rates.
    pub fn chain(n: usize, rates: &[f64]) -> Result<Circuit, CircuitError> {
        if n < 2 {
            return Err(CircuitError::TooFewModes(n));
        }
        if rates.len() != n - 1 {
            return Err(CircuitError::RateCountMismatch {
                expected: n - 1,
                got: rates.len(),
            });
        }
        for &r in rates {
            check_rate(r)?;
        }
        let modes = (1..=n)
            .map(|j| Mode::at(format!("m{j}"), (j - 1) as f64, 0.0))
            .collect();
        let dissipators = rates
            .iter()
            .enumerate()
            .map(|(j, &rate)| Dissipator::new(rate, [(j, re(1.0)), (j + 1, re(-1.0))]))
            .collect();
        let mut metadata = BTreeMap::new();
        metadata.insert("builder".into(), "chain".into());
        metadata.insert("n".into(), n.to_string());
        Ok(Circuit {
            modes,
            dissipators,
            metadata,
        })
    }

    /// Uniform-rate chain.
    pub fn uniform_chain(n: usize, rate: f64) -> Result<Circuit, CircuitError> {
        if n < 2 {
            return Err(CircuitError::TooFewModes(n));
        }
        chain(n, &vec![rate; n - 1])
    }

    /// Two-arm distributor: two chains of `n_per_arm` modes joined by a
    /// central reservoir shared with a pair of control modes, with jump
    /// operator `a_N - a_R + a_L - a_{N+1}` (arm1 tail, ctrlR, ctrlL,
    /// arm2 head).
    ///
    /// Mode order: arm1 ascending (`a1..aN`), arm2 ascending (`b1..bN`),
    /// then `ctrlL`, `ctrlR`.
    pub fn two_arm(n_per_arm: usize, rate: f64) -> Result<Circuit, CircuitError> {
        if n_per_arm < 2 {
            return Err(CircuitError::TooFewModes(n_per_arm));
        }
        check_rate(rate)?;
        let n = n_per_arm;
        let mut modes = Vec::with_capacity(2 * n + 2);
        for j in 1..=n {
            modes.push(Mode::at(format!("a{j}"), (j - 1) as f64, 0.0));
        }
        for j in 1..=n {
            modes.push(Mode::at(format!("b{j}"), (n + 1 + j) as f64, 0.0));
        }
        modes.push(Mode::at("ctrlL", n as f64, 0.5));
        modes.push(Mode::at("ctrlR", n as f64, -0.5));
        let ctrl_l = 2 * n;
        let ctrl_r = 2 * n + 1;

        let mut dissipators = Vec::with_capacity(2 * (n - 1) + 1);
        for j in 0..n - 1 {
            dissipators.push(Dissipator::new(rate, [(j, re(1.0)), (j + 1, re(-1.0))]));
        }
        for j in 0..n - 1 {
            dissipators.push(Dissipator::new(
                rate,
                [(n + j, re(1.0)), (n + j + 1, re(-1.0))],
            ));
        }
        dissipators.push(Dissipator::new(
            rate,
            [
                (n - 1, re(1.0)),
                (ctrl_r, re(-1.0)),
                (ctrl_l, re(1.0)),
                (n, re(-1.0)),
            ],
        ));

        let mut metadata = BTreeMap::new();
        metadata.insert("builder".into(), "two-arm".into());
        metadata.insert("n_per_arm".into(), n.to_string());
        Ok(Circuit {
            modes,
            dissipators,
            metadata,
        })
    }

    /// Two parallel chains with one shared reservoir per column pair:
    /// weight row `{(j,+): +1, (j,-): -1, (j+1,+): +1, (j+1,-): -1}`.
    ///
    /// Mode order is column-major: `u1, d1, u2, d2, ...` with `u` the
    /// upper (+) row and `d` the lower (-) row.
    pub fn double_chain(n_columns: usize, rate: f64) -> Result<Circuit, CircuitError> {
        if n_columns < 2 {
            return Err(CircuitError::TooFewModes(n_columns));
        }
        check_rate(rate)?;
        let mut modes = Vec::with_capacity(2 * n_columns);
        for j in 1..=n_columns {
            modes.push(Mode::at(format!("u{j}"), (j - 1) as f64, 0.0));
            modes.push(Mode::at(format!("d{j}"), (j - 1) as f64, 1.0));
        }
        let up = |col: usize| 2 * col; // col is 0-based
        let dn = |col: usize| 2 * col + 1;
        let dissipators = (0..n_columns - 1)
            .map(|j| {
                Dissipator::new(
                    rate,
                    [
                        (up(j), re(1.0)),
                        (dn(j), re(-1.0)),
                        (up(j + 1), re(1.0)),
                        (dn(j + 1), re(-1.0)),
                    ],
                )
            })
            .collect();
        let mut metadata = BTreeMap::new();
        metadata.insert("builder".into(), "double-chain".into());
        metadata.insert("n_columns".into(), n_columns.to_string());
        Ok(Circuit {
            modes,
            dissipators,
            metadata,
        })
    }

    /// Square lattice with one all-plus plaquette dissipator per
    /// checkerboard cell: upper-left corners `(j,k)` with `j+k` even
    /// (1-based), weights +1 on the four corner sites.
    ///
    /// Every site then appears in exactly two cells (one at boundaries),
    /// matching the two-term amplitude equations of the diffusive square
    /// lattice. Sites are labelled `s{row}_{col}` in row-major order.
    pub fn square_lattice(rows: usize, cols: usize, rate: f64) -> Result<Circuit, CircuitError> {
        if rows < 2 || cols < 2 {
            return Err(CircuitError::LatticeTooSmall { min: 2, rows, cols });
        }
        check_rate(rate)?;
        let mut modes = Vec::with_capacity(rows * cols);
        for r in 1..=rows {
            for c in 1..=cols {
                modes.push(Mode::at(
                    format!("s{r}_{c}"),
                    (c - 1) as f64,
                    (r - 1) as f64,
                ));
            }
        }
        let site = |r: usize, c: usize| (r - 1) * cols + (c - 1);
        let mut dissipators = Vec::new();
        for j in 1..rows {
            for k in 1..cols {
                if (j + k) % 2 == 0 {
                    dissipators.push(Dissipator::new(
                        rate,
                        [
                            (site(j, k), re(1.0)),
                            (site(j + 1, k), re(1.0)),
                            (site(j, k + 1), re(1.0)),
                            (site(j + 1, k + 1), re(1.0)),
                        ],
                    ));
                }
            }
        }
        let mut metadata = BTreeMap::new();
        metadata.insert("builder".into(), "square-lattice".into());
        metadata.insert("rows".into(), rows.to_string());
        metadata.insert("cols".into(), cols.to_string());
        Ok(Circuit {
            modes,
            dissipators,
            metadata,
        })
    }

    /// Honeycomb lattice of `rows x cols` hexagonal cells, one dissipator
    /// per cell with alternating +1/-1 weights around the hexagon.
    ///
    /// Vertices live on an integer grid (x in units of sqrt(3)/2, y in
    /// units of 1/2); the sign is +1 on the sublattice with
    /// `y mod 3 == 1` and -1 on `y mod 3 == 2`, which is globally
    /// consistent: neighbouring cells share one vertex of each sign, so a
    /// uniform hexagon state is annihilated by every cell row.
    pub fn honeycomb(rows: usize, cols: usize, rate: f64) -> Result<Circuit, CircuitError> {
        if rows < 1 || cols < 1 {
            return Err(CircuitError::LatticeTooSmall { min: 1, rows, cols });
        }
        check_rate(rate)?;
        // Pointy-top unit hexagons; cell (r, c) has centre
        // (2c + r%2 + 1, 3r) in grid units (x shifted by +1 so labels
        // stay non-negative).
        const CORNERS: [(i64, i64); 6] = [(1, 1), (0, 2), (-1, 1), (-1, -1), (0, -2), (1, -1)];
        let mut modes: Vec<Mode> = Vec::new();
        let mut coords: Vec<(i64, i64)> = Vec::new();
        let mut index: BTreeMap<(i64, i64), usize> = BTreeMap::new();
        let mut cells: Vec<Vec<usize>> = Vec::new();
        for r in 0..rows as i64 {
            for c in 0..cols as i64 {
                let centre = (2 * c + r.rem_euclid(2) + 1, 3 * r);
                let mut cell = Vec::with_capacity(6);
                for (dx, dy) in CORNERS {
                    let v = (centre.0 + dx, centre.1 + dy);
                    let id = *index.entry(v).or_insert_with(|| {
                        modes.push(Mode::at(
                            format!("v{}_{}", v.0, v.1),
                            v.0 as f64 * 3f64.sqrt() / 2.0,
                            v.1 as f64 * 0.5,
                        ));
                        coords.push(v);
                        modes.len() - 1
                    });
                    cell.push(id);
                }
                cells.push(cell);
            }
        }
        let dissipators = cells
            .iter()
            .map(|cell| {
                Dissipator::new(
                    rate,
                    cell.iter().map(|&id| {
                        let s = if coords[id].1.rem_euclid(3) == 1 {
                            1.0
                        } else {
                            -1.0
                        };
                        (id, re(s))
                    }),
                )
            })
            .collect();
        let mut metadata = BTreeMap::new();
        metadata.insert("builder".into(), "honeycomb".into());
        metadata.insert("rows".into(), rows.to_string());
        metadata.insert("cols".into(), cols.to_string());
        Ok(Circuit {
            modes,
            dissipators,
            metadata,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::dpc::serialize_circuit;

    #[test]
    fn chain_weights_follow_pairwise_difference() {
        let c = builders::chain(3, &[1.0, 1.0]).unwrap();
        assert_eq!(c.mode_count(), 3);
        assert_eq!(c.dissipators.len(), 2);
        for (j, d) in c.dissipators.iter().enumerate() {
            assert_eq!(d.weights[&j], C64::new(1.0, 0.0));
            assert_eq!(d.weights[&(j + 1)], C64::new(-1.0, 0.0));
        }
    }

    #[test]
    fn chain_rejects_bad_input() {
        assert_eq!(builders::chain(1, &[]), Err(CircuitError::TooFewModes(1)));
        assert_eq!(
            builders::chain(3, &[1.0]),
            Err(CircuitError::RateCountMismatch {
                expected: 2,
                got: 1
            })
        );
        assert_eq!(
            builders::chain(2, &[-0.5]),
            Err(CircuitError::NegativeRate(-0.5))
        );
    }

    #[test]
    fn two_arm_counts_and_central_row() {
        let c = builders::two_arm(3, 1.0).unwrap();
        assert_eq!(c.mode_count(), 8);
        assert_eq!(c.dissipators.len(), 5);
        // Central row annihilates "arm1 uniform + matching ctrlR" states:
        // alpha on arm1 and ctrlR, zero elsewhere.
        let alpha = C64::new(0.7, -0.2);
        let mut v = nalgebra::DVector::from_element(8, C64::new(0.0, 0.0));
        for j in 0..3 {
            v[j] = alpha;
        }
        v[c.mode_index("ctrlR").unwrap()] = alpha;
        let central = c.dissipators.last().unwrap();
        assert!(central.expectation(&v).norm() < 1e-12);
    }

    #[test]
    fn two_arm_fig5_scale() {
        let c = builders::two_arm(300, 1.0).unwrap();
        assert_eq!(c.mode_count(), 602);
        assert_eq!(c.dissipators.len(), 599);
    }

    #[test]
    fn double_chain_rows_and_alternating_kernel_vector() {
        let c = builders::double_chain(3, 1.0).unwrap();
        assert_eq!(c.mode_count(), 6);
        assert_eq!(c.dissipators.len(), 2);
        // Per-column equal pair is annihilated by every row.
        let mut pair = nalgebra::DVector::from_element(6, C64::new(0.0, 0.0));
        pair[c.mode_index("u2").unwrap()] = C64::new(1.0, 0.0);
        pair[c.mode_index("d2").unwrap()] = C64::new(1.0, 0.0);
        // Alternating state u_k = (-1)^k, d_k = (-1)^{k+1}.
        let mut alt = nalgebra::DVector::from_element(6, C64::new(0.0, 0.0));
        for k in 0..3 {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            alt[2 * k] = C64::new(s, 0.0);
            alt[2 * k + 1] = C64::new(-s, 0.0);
        }
        for d in &c.dissipators {
            assert!(d.expectation(&pair).norm() < 1e-12);
            assert!(d.expectation(&alt).norm() < 1e-12);
        }
    }

    #[test]
    fn square_lattice_cells_have_four_plus_weights() {
        let c = builders::square_lattice(6, 6, 1.0).unwrap();
        assert_eq!(c.mode_count(), 36);
        assert_eq!(c.dissipators.len(), 13);
        for d in &c.dissipators {
            assert_eq!(d.weights.len(), 4);
            assert!(d.weights.values().all(|w| *w == C64::new(1.0, 0.0)));
        }
        // Interior sites sit in exactly two cells.
        let interior = c.mode_index("s3_3").unwrap();
        let covering = c
            .dissipators
            .iter()
            .filter(|d| d.weights.contains_key(&interior))
            .count();
        assert_eq!(covering, 2);
    }

    #[test]
    fn honeycomb_cell_signs_cancel_uniform_state() {
        let c = builders::honeycomb(1, 1, 1.0).unwrap();
        assert_eq!(c.mode_count(), 6);
        assert_eq!(c.dissipators.len(), 1);
        assert_eq!(c.dissipators[0].weights.len(), 6);
        let uniform = nalgebra::DVector::from_element(6, C64::new(1.0, 0.0));
        assert!(c.dissipators[0].expectation(&uniform).norm() < 1e-12);
    }

    #[test]
    fn honeycomb_neighbour_cells_share_one_vertex_of_each_sign() {
        let c = builders::honeycomb(2, 3, 1.0).unwrap();
        for d in &c.dissipators {
            assert_eq!(d.weights.len(), 6);
            let total: C64 = d.weights.values().sum();
            assert!(total.norm() < 1e-12);
        }
        // A compacton on any one hexagon is annihilated by every cell.
        for cell in &c.dissipators {
            let mut v = nalgebra::DVector::from_element(c.mode_count(), C64::new(0.0, 0.0));
            for &k in cell.weights.keys() {
                v[k] = C64::new(1.0, 0.0);
            }
            for d in &c.dissipators {
                assert!(d.expectation(&v).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn honeycomb_compacton_survives_loss_outside_its_cell() {
        let c = builders::honeycomb(2, 2, 1.0).unwrap();
        let cell = &c.dissipators[0];
        let mut compacton = nalgebra::DVector::from_element(c.mode_count(), C64::new(0.0, 0.0));
        for &k in cell.weights.keys() {
            compacton[k] = C64::new(0.6, -0.1);
        }
        let mut lossy = c.clone();
        for k in 0..c.mode_count() {
            if !cell.weights.contains_key(&k) {
                lossy = lossy.add_mode_loss(&c.modes[k].label.clone(), 1.0).unwrap();
            }
        }
        let out = crate::dynamics::asymptotic_state(&lossy, &compacton).unwrap();
        assert!((&out - &compacton).norm() < 1e-10);
    }

    #[test]
    fn zero_rate_loss_leaves_the_dynamics_unchanged() {
        let c = builders::uniform_chain(4, 1.0).unwrap();
        let with_loss = c.add_mode_loss("m3", 0.0).unwrap();
        let m0 = crate::dynamics::drift_matrix(&c).unwrap();
        let m1 = crate::dynamics::drift_matrix(&with_loss).unwrap();
        assert_eq!(m0.matrix(), m1.matrix());
    }

    #[test]
    fn add_mode_loss_is_value_semantics() {
        let c = builders::uniform_chain(3, 1.0).unwrap();
        let with_loss = c.add_mode_loss("m2", 0.5).unwrap();
        assert_eq!(c.dissipators.len(), 2);
        assert_eq!(with_loss.dissipators.len(), 3);
        let d = with_loss.dissipators.last().unwrap();
        assert_eq!(d.rate, 0.5);
        assert_eq!(d.weights.len(), 1);
        assert_eq!(d.weights[&1], C64::new(1.0, 0.0));
        assert_eq!(
            c.add_mode_loss("nope", 1.0),
            Err(CircuitError::UnknownMode("nope".into()))
        );
    }

    #[test]
    fn validate_flags_dangling_refs_and_isolated_modes() {
        let c = builders::chain(3, &[1.0, 1.0]).unwrap();
        assert!(c.validate().is_empty());

        let mut bad = c.clone();
        bad.dissipators
            .push(Dissipator::new(1.0, [(17, C64::new(1.0, 0.0))]));
        assert!(bad
            .validate()
            .iter()
            .any(|d| d.severity == Severity::Error && d.message.contains("out of range")));

        let mut isolated = c.clone();
        isolated.modes.push(Mode::new("lonely"));
        let diags = isolated.validate();
        assert!(diags
            .iter()
            .any(|d| d.severity == Severity::Warning && d.message.contains("lonely")));
    }

    #[test]
    fn builders_are_deterministic() {
        for _ in 0..3 {
            let a = builders::square_lattice(4, 5, 0.7).unwrap();
            let b = builders::square_lattice(4, 5, 0.7).unwrap();
            assert_eq!(serialize_circuit(&a), serialize_circuit(&b));
            let h1 = builders::honeycomb(2, 2, 1.0).unwrap();
            let h2 = builders::honeycomb(2, 2, 1.0).unwrap();
            assert_eq!(serialize_circuit(&h1), serialize_circuit(&h2));
        }
    }
}
