//! Coherent-amplitude dynamics: drift matrix, propagation, kernel
//! projection, spectra and conserved quantities.
//!
//! For jump operators `A_j = sum_k x_jk a_k` with rates `gamma_j`, the
//! coherent amplitudes obey `d alpha/dt = -M alpha` with
//! `M = X^H Gamma X`. These are the equations of a classical random walk,
//! but with complex amplitudes: the dynamics is diffusive yet coherent.
//! `M` is Hermitian positive semidefinite, so evolution is a contraction
//! and the asymptotic state is the orthogonal projection of the initial
//! vector onto `ker(M)`.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::circuit::{Circuit, Diagnostic, Severity};
use crate::C64;

/// One complex coherent amplitude per circuit mode, in canonical order.
pub type AmplitudeVector = DVector<C64>;

/// Relative eigenvalue threshold separating the numerical kernel from the
/// decaying branch (double-precision eigensolver accuracy).
pub const KERNEL_THRESHOLD: f64 = 1e-10;

/// Unit of the time axis of a [`Trajectory`]. Never mixed within one
/// trajectory: effective dimensionless time `gamma*t` for abstract
/// circuits, millimetres for waveguide devices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeUnit {
    GammaT,
    Millimetres,
}

/// Time series of amplitude vectors at strictly increasing times.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<AmplitudeVector>,
    pub unit: TimeUnit,
}

impl Trajectory {
    pub fn new(
        times: Vec<f64>,
        states: Vec<AmplitudeVector>,
        unit: TimeUnit,
    ) -> Result<Self, DynamicsError> {
        if times.len() != states.len() {
            return Err(DynamicsError::BadTimes(
                "one state per time point required".into(),
            ));
        }
        check_times(&times)?;
        Ok(Trajectory {
            times,
            states,
            unit,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Sorted spectrum of the drift matrix.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Eigenvalues in units of rate, ascending, clamped to be non-negative.
    pub eigenvalues: Vec<f64>,
    /// Number of eigenvalues below the kernel threshold.
    pub kernel_dimension: usize,
    /// Smallest nonzero eigenvalue, if any.
    pub gap: Option<f64>,
}

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("circuit failed validation: {0:?}")]
    InvalidCircuit(Vec<Diagnostic>),
    #[error("dimension mismatch: circuit has {expected} modes, vector has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("bad time grid: {0}")]
    BadTimes(String),
    #[error("amplitude vector contains a non-finite entry")]
    NonFiniteAmplitude,
    #[error("heat-variable check needs a uniform-rate all-plus plaquette lattice: {0}")]
    NotAPlaquetteLattice(String),
}

fn check_times(times: &[f64]) -> Result<(), DynamicsError> {
    for (i, &t) in times.iter().enumerate() {
        if !t.is_finite() || t < 0.0 {
            return Err(DynamicsError::BadTimes(format!("time {t} at index {i}")));
        }
        if i > 0 && t <= times[i - 1] {
            return Err(DynamicsError::BadTimes(format!(
                "times must be strictly increasing at index {i}"
            )));
        }
    }
    Ok(())
}

fn check_circuit(circuit: &Circuit) -> Result<(), DynamicsError> {
    let errors: Vec<Diagnostic> = circuit
        .validate()
        .into_iter()
        .filter(|d| d.severity == Severity::Error)
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(DynamicsError::InvalidCircuit(errors))
    }
}

fn check_dim(circuit: &Circuit, v: &AmplitudeVector) -> Result<(), DynamicsError> {
    if v.len() != circuit.mode_count() {
        return Err(DynamicsError::DimensionMismatch {
            expected: circuit.mode_count(),
            got: v.len(),
        });
    }
    if v.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return Err(DynamicsError::NonFiniteAmplitude);
    }
    Ok(())
}

/// Hermitian positive semidefinite drift matrix `M = X^H Gamma X`.
#[derive(Debug, Clone)]
pub struct DriftMatrix {
    matrix: DMatrix<C64>,
}

/// Eigendecomposition of a drift matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// One orthonormal eigenvector per column, matching `values`.
    pub vectors: DMatrix<C64>,
}

impl HermitianEigen {
    /// Threshold below which an eigenvalue counts as zero.
    pub fn kernel_threshold(&self) -> f64 {
        let max = self.values.last().copied().unwrap_or(0.0).abs();
        KERNEL_THRESHOLD * max.max(f64::MIN_POSITIVE)
    }

    pub fn kernel_dimension(&self) -> usize {
        let thr = self.kernel_threshold();
        self.values.iter().take_while(|&&v| v < thr).count()
    }
}

impl DriftMatrix {
    pub fn new(circuit: &Circuit) -> Result<Self, DynamicsError> {
        check_circuit(circuit)?;
        let n = circuit.mode_count();
        let mut m = DMatrix::<C64>::zeros(n, n);
        for d in &circuit.dissipators {
            for (&k, wk) in &d.weights {
                for (&l, wl) in &d.weights {
                    m[(k, l)] += wk.conj() * wl * d.rate;
                }
            }
        }
        Ok(DriftMatrix { matrix: m })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Sorted eigendecomposition. `M` is Hermitian by construction, so the
    /// eigenvalues are real and the eigenvectors orthonormal.
    pub fn eigen(&self) -> HermitianEigen {
        let se = self.matrix.clone().symmetric_eigen();
        let n = se.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
        let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
        let mut vectors = DMatrix::<C64>::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            vectors.set_column(col, &se.eigenvectors.column(i));
        }
        HermitianEigen { values, vectors }
    }
}

/// Builds the drift matrix of a validated circuit.
pub fn drift_matrix(circuit: &Circuit) -> Result<DriftMatrix, DynamicsError> {
    DriftMatrix::new(circuit)
}

/// `d alpha/dt = -M alpha` applied sparsely through the weight rows.
pub fn amplitude_derivative(circuit: &Circuit, alpha: &AmplitudeVector) -> AmplitudeVector {
    let mut out = DVector::from_element(alpha.len(), C64::new(0.0, 0.0));
    for d in &circuit.dissipators {
        let a: C64 = d.expectation(alpha);
        for (&k, w) in &d.weights {
            out[k] -= d.rate * w.conj() * a;
        }
    }
    out
}

/// Propagates `alpha(t) = exp(-M t) alpha(0)` at the given times.
///
/// Uses the eigendecomposition of `M`, which is exact to solver accuracy
/// for the constant-rate circuits handled here.
pub fn evolve(
    circuit: &Circuit,
    initial: &AmplitudeVector,
    times: &[f64],
) -> Result<Trajectory, DynamicsError> {
    check_dim(circuit, initial)?;
    check_times(times)?;
    let eig = drift_matrix(circuit)?.eigen();
    let coeffs = eig.vectors.adjoint() * initial;
    let states = times
        .iter()
        .map(|&t| {
            let damped = DVector::from_iterator(
                coeffs.len(),
                coeffs
                    .iter()
                    .zip(eig.values.iter())
                    .map(|(c, &lambda)| c * (-lambda * t).exp()),
            );
            &eig.vectors * damped
        })
        .collect();
    Trajectory::new(times.to_vec(), states, TimeUnit::GammaT)
}

/// Propagates with time-dependent rates `gamma_j(t)` by adaptive
/// integration; the stationary subspace does not depend on the rates as
/// long as they stay positive.
pub fn evolve_with_rates(
    circuit: &Circuit,
    initial: &AmplitudeVector,
    times: &[f64],
    rates: impl Fn(f64) -> Vec<f64>,
) -> Result<Trajectory, DynamicsError> {
    check_dim(circuit, initial)?;
    check_times(times)?;
    let probe = rates(0.0);
    if probe.len() != circuit.dissipators.len() {
        return Err(DynamicsError::BadTimes(format!(
            "rate function returned {} rates for {} dissipators",
            probe.len(),
            circuit.dissipators.len()
        )));
    }
    let rhs = |t: f64, alpha: &AmplitudeVector| {
        let g = rates(t);
        let mut out = DVector::from_element(alpha.len(), C64::new(0.0, 0.0));
        for (j, d) in circuit.dissipators.iter().enumerate() {
            let a: C64 = d.expectation(alpha);
            for (&k, w) in &d.weights {
                out[k] -= g[j] * w.conj() * a;
            }
        }
        out
    };
    let mut states = Vec::with_capacity(times.len());
    let mut t_now = 0.0;
    let mut state = initial.clone();
    for &t in times {
        state = crate::ode::integrate(rhs, t_now, state, t, 1e-11, 1e-13);
        t_now = t;
        states.push(state.clone());
    }
    Trajectory::new(times.to_vec(), states, TimeUnit::GammaT)
}

/// Orthogonal projection of the initial vector onto `ker(M)`; equals the
/// `t -> infinity` limit of [`evolve`] because `M` is Hermitian PSD.
pub fn asymptotic_state(
    circuit: &Circuit,
    initial: &AmplitudeVector,
) -> Result<AmplitudeVector, DynamicsError> {
    check_dim(circuit, initial)?;
    let eig = drift_matrix(circuit)?.eigen();
    let kdim = eig.kernel_dimension();
    let mut out = DVector::from_element(initial.len(), C64::new(0.0, 0.0));
    for col in 0..kdim {
        let v = eig.vectors.column(col);
        let coeff: C64 = v.dotc(initial);
        out.axpy(coeff, &v.clone_owned(), C64::new(1.0, 0.0));
    }
    Ok(out)
}

/// Eigenvalues, kernel dimension and spectral gap of the drift matrix.
pub fn spectrum(circuit: &Circuit) -> Result<SpectrumResult, DynamicsError> {
    let eig = drift_matrix(circuit)?.eigen();
    let thr = eig.kernel_threshold();
    let kernel_dimension = eig.kernel_dimension();
    let eigenvalues: Vec<f64> = eig.values.iter().map(|&v| v.max(0.0)).collect();
    let gap = eig.values.iter().copied().find(|&v| v >= thr);
    Ok(SpectrumResult {
        eigenvalues,
        kernel_dimension,
        gap,
    })
}

/// A constant of motion `v^H alpha` with its worst drift along a
/// trajectory.
#[derive(Debug, Clone)]
pub struct ConservedQuantity {
    pub kernel_vector: AmplitudeVector,
    pub initial_value: C64,
    pub max_drift: f64,
}

/// Every component of `alpha` along `ker(M)` is a constant of motion
/// (for a chain this includes the plain amplitude sum; for the two-arm
/// distributor the control coherence `alpha_R + alpha_L`). Reports
/// `max_t |v^H alpha(t) - v^H alpha(0)|` for each kernel basis vector.
pub fn conserved_quantities(
    circuit: &Circuit,
    trajectory: &Trajectory,
) -> Result<Vec<ConservedQuantity>, DynamicsError> {
    let eig = drift_matrix(circuit)?.eigen();
    for s in &trajectory.states {
        check_dim(circuit, s)?;
    }
    let kdim = eig.kernel_dimension();
    let mut out = Vec::with_capacity(kdim);
    for col in 0..kdim {
        let v = eig.vectors.column(col).clone_owned();
        let first = trajectory.states.first();
        let initial_value = first
            .map(|s| v.dotc(s))
            .unwrap_or_else(|| C64::new(0.0, 0.0));
        let max_drift = trajectory
            .states
            .iter()
            .map(|s| (v.dotc(s) - initial_value).norm())
            .fold(0.0, f64::max);
        out.push(ConservedQuantity {
            kernel_vector: v,
            initial_value,
            max_drift,
        });
    }
    Ok(out)
}

/// Worst residual of the heat-equation form of the cell coherences along
/// a trajectory of an all-plus plaquette lattice.
///
/// With cells on the checkerboard sublattice, the signed variables
/// `lambda_c = (-1)^row <A_c>` obey the discrete heat equation on the
/// (diagonally adjacent) cell lattice:
/// `d lambda_c/dt = -4 gamma lambda_c + gamma sum_{c' ~ c} lambda_c'`,
/// missing neighbours reading as zero on a finite lattice. The derivative
/// is evaluated exactly through `d alpha/dt = -M alpha`.
pub fn heat_residual(circuit: &Circuit, trajectory: &Trajectory) -> Result<f64, DynamicsError> {
    check_circuit(circuit)?;
    let cells = plaquette_cells(circuit)?;
    let gamma = circuit.dissipators[0].rate;

    let mut worst: f64 = 0.0;
    for alpha in &trajectory.states {
        check_dim(circuit, alpha)?;
        let dalpha = amplitude_derivative(circuit, alpha);
        let lambda: Vec<C64> = cells
            .iter()
            .map(|c| circuit.dissipators[c.dissipator].expectation(alpha) * c.sign)
            .collect();
        let dlambda: Vec<C64> = cells
            .iter()
            .map(|c| circuit.dissipators[c.dissipator].expectation(&dalpha) * c.sign)
            .collect();
        for (i, cell) in cells.iter().enumerate() {
            let neighbour_sum: C64 = cell.neighbours.iter().map(|&j| lambda[j]).sum();
            let residual = dlambda[i] + 4.0 * gamma * lambda[i] - gamma * neighbour_sum;
            worst = worst.max(residual.norm());
        }
    }
    Ok(worst)
}

struct PlaquetteCell {
    dissipator: usize,
    corner: (i64, i64),
    sign: f64,
    neighbours: Vec<usize>,
}

fn plaquette_cells(circuit: &Circuit) -> Result<Vec<PlaquetteCell>, DynamicsError> {
    let one = C64::new(1.0, 0.0);
    let rate = circuit
        .dissipators
        .first()
        .map(|d| d.rate)
        .ok_or_else(|| DynamicsError::NotAPlaquetteLattice("no dissipators".into()))?;
    let mut cells = Vec::with_capacity(circuit.dissipators.len());
    for (j, d) in circuit.dissipators.iter().enumerate() {
        if d.weights.len() != 4 || d.weights.values().any(|w| (w - one).norm() > 1e-12) {
            return Err(DynamicsError::NotAPlaquetteLattice(format!(
                "dissipator {j} is not a four-site all-plus plaquette"
            )));
        }
        if (d.rate - rate).abs() > 1e-12 * rate.max(1.0) {
            return Err(DynamicsError::NotAPlaquetteLattice(
                "rates are not uniform".into(),
            ));
        }
        let mut xs = Vec::with_capacity(4);
        let mut ys = Vec::with_capacity(4);
        for &k in d.weights.keys() {
            let p = circuit.modes[k].position.ok_or_else(|| {
                DynamicsError::NotAPlaquetteLattice(format!(
                    "mode `{}` has no position",
                    circuit.modes[k].label
                ))
            })?;
            xs.push(p[0].round() as i64);
            ys.push(p[1].round() as i64);
        }
        let corner = (*xs.iter().min().unwrap(), *ys.iter().min().unwrap());
        let sign = if corner.1.rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        };
        cells.push(PlaquetteCell {
            dissipator: j,
            corner,
            sign,
            neighbours: Vec::new(),
        });
    }
    let corners: std::collections::HashMap<(i64, i64), usize> = cells
        .iter()
        .enumerate()
        .map(|(i, c)| (c.corner, i))
        .collect();
    let neighbour_lists: Vec<Vec<usize>> = cells
        .iter()
        .map(|cell| {
            let (x, y) = cell.corner;
            [(1, 1), (1, -1), (-1, 1), (-1, -1)]
                .iter()
                .filter_map(|(dx, dy)| corners.get(&(x + dx, y + dy)).copied())
                .collect()
        })
        .collect();
    for (cell, nb) in cells.iter_mut().zip(neighbour_lists) {
        cell.neighbours = nb;
    }
    Ok(cells)
}
