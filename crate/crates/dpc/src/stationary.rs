//! Stationary-state analysis: kernel bases, compactly supported states
//! and robustness under added loss.
//!
//! A state is stationary when every jump-operator expectation vanishes,
//! `<A_j> = 0` for all active dissipators; on a lattice this admits
//! compacton-like states with strictly finite support, annihilated by
//! every weight row yet living in the continuum of the spectrum.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::circuit::Circuit;
use crate::dynamics::{self, AmplitudeVector, DynamicsError, SpectrumResult};
use crate::C64;

/// Magnitude threshold below which an amplitude counts as zero, both for
/// support extraction and for kernel residuals.
pub const SUPPORT_THRESHOLD: f64 = 1e-9;

/// Hard cap on enumerated candidate supports.
pub const ENUMERATION_CAP: usize = 1_000_000;

/// A stationary state with strictly finite support.
#[derive(Debug, Clone)]
pub struct LocalizedState {
    /// Full-length amplitude vector, unit norm, first supported entry
    /// real positive.
    pub amplitudes: AmplitudeVector,
    /// Canonical indices of modes with `|alpha|` above threshold, sorted.
    pub support: Vec<usize>,
}

impl LocalizedState {
    pub fn support_size(&self) -> usize {
        self.support.len()
    }

    pub fn support_labels<'a>(&self, circuit: &'a Circuit) -> Vec<&'a str> {
        self.support.iter().map(|&i| circuit.label(i)).collect()
    }
}

#[derive(Debug, Error)]
pub enum StationaryError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("support budget exceeded: {candidates} candidate supports (cap {cap})")]
    ResourceExceeded { candidates: usize, cap: usize },
    #[error("max_support {max_support} exceeds mode count {modes}")]
    SupportTooLarge { max_support: usize, modes: usize },
    #[error("unknown mode `{0}`")]
    UnknownMode(String),
    #[error("state is not stationary for the original circuit (residual {residual:.3e})")]
    NotStationary { residual: f64 },
    #[error("coefficients must be normalized, got norm {0}")]
    NotNormalized(f64),
}

/// Orthonormal basis of `ker(M)`, the stationary subspace. When all rates
/// are positive this is the null space of the stacked weight matrix `X`.
pub fn kernel_basis(circuit: &Circuit) -> Result<Vec<AmplitudeVector>, StationaryError> {
    let eig = dynamics::drift_matrix(circuit)?.eigen();
    let kdim = eig.kernel_dimension();
    Ok((0..kdim)
        .map(|col| eig.vectors.column(col).clone_owned())
        .collect())
}

/// Largest `|<A_j>|` over dissipators with positive rate.
pub fn kernel_residual(circuit: &Circuit, state: &AmplitudeVector) -> f64 {
    circuit
        .dissipators
        .iter()
        .filter(|d| d.rate > 0.0)
        .map(|d| d.expectation(state).norm())
        .fold(0.0, f64::max)
}

/// Finds stationary states supported on at most `max_support` modes.
///
/// Candidate supports are connected subsets of the shared-dissipator
/// adjacency graph (a localized state spanning disconnected components
/// would separate into independent smaller states). For each support the
/// restricted null space of `X` is solved and returned in a canonical
/// basis: coordinate vectors of the support's sites projected into the
/// null space and orthogonalized in site order. That basis pins down the
/// hallmark states (the alternating four-site contour, the `(2, -1, -1)`
/// corner state) deterministically. States are
/// deduplicated up to phase across supports; states found on different
/// supports may still be linearly dependent, each being a valid
/// stationary state in its own right. Results are ordered by support
/// size, then by support indices.
pub fn find_localized_states(
    circuit: &Circuit,
    max_support: usize,
) -> Result<Vec<LocalizedState>, StationaryError> {
    find_localized_states_capped(circuit, max_support, ENUMERATION_CAP)
}

/// [`find_localized_states`] with an explicit enumeration budget.
pub fn find_localized_states_capped(
    circuit: &Circuit,
    max_support: usize,
    cap: usize,
) -> Result<Vec<LocalizedState>, StationaryError> {
    let n = circuit.mode_count();
    if max_support > n {
        return Err(StationaryError::SupportTooLarge {
            max_support,
            modes: n,
        });
    }
    let mut supports = enumerate_connected_subsets(&circuit.adjacency(), max_support, cap)?;
    supports.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));

    // Active rows only: zero-rate dissipators do not constrain the kernel.
    let active: Vec<&crate::circuit::Dissipator> = circuit
        .dissipators
        .iter()
        .filter(|d| d.rate > 0.0)
        .collect();

    let mut found: Vec<LocalizedState> = Vec::new();
    for support in supports {
        let nullvecs = restricted_null_space(&active, &support, n);
        if nullvecs.is_empty() {
            continue;
        }
        for candidate in canonical_null_basis(&nullvecs, &support) {
            let state = canonicalize(candidate);
            let duplicate = found.iter().any(|f| (&f.amplitudes - &state).norm() < 1e-8);
            if duplicate {
                continue;
            }
            let support_idx: Vec<usize> = state
                .iter()
                .enumerate()
                .filter(|(_, a)| a.norm() > SUPPORT_THRESHOLD)
                .map(|(i, _)| i)
                .collect();
            found.push(LocalizedState {
                amplitudes: state,
                support: support_idx,
            });
        }
    }
    found.sort_by(|a, b| {
        a.support
            .len()
            .cmp(&b.support.len())
            .then_with(|| a.support.cmp(&b.support))
    });
    Ok(found)
}

/// Re-expresses an orthonormal null basis canonically: project each
/// support site's coordinate vector into the null space and
/// Gram-Schmidt in site order.
fn canonical_null_basis(nullvecs: &[AmplitudeVector], support: &[usize]) -> Vec<AmplitudeVector> {
    let mut basis: Vec<AmplitudeVector> = Vec::with_capacity(nullvecs.len());
    for &site in support {
        if basis.len() == nullvecs.len() {
            break;
        }
        let mut v = DVector::from_element(nullvecs[0].len(), C64::new(0.0, 0.0));
        for b in nullvecs {
            v.axpy(b[site].conj(), b, C64::new(1.0, 0.0));
        }
        for b in &basis {
            let coeff = b.dotc(&v);
            v.axpy(-coeff, b, C64::new(1.0, 0.0));
        }
        let norm = v.norm();
        if norm > 1e-9 {
            basis.push(v / C64::new(norm, 0.0));
        }
    }
    basis
}

/// Connected-subset enumeration (each subset emitted exactly once).
fn enumerate_connected_subsets(
    adjacency: &[Vec<usize>],
    max_size: usize,
    cap: usize,
) -> Result<Vec<Vec<usize>>, StationaryError> {
    let n = adjacency.len();
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut count = 0usize;

    #[allow(clippy::too_many_arguments)]
    fn extend(
        sub: &mut Vec<usize>,
        ext: Vec<usize>,
        anchor: usize,
        adjacency: &[Vec<usize>],
        max_size: usize,
        cap: usize,
        count: &mut usize,
        out: &mut Vec<Vec<usize>>,
    ) -> Result<(), StationaryError> {
        *count += 1;
        if *count > cap {
            return Err(StationaryError::ResourceExceeded {
                candidates: *count,
                cap,
            });
        }
        out.push(sub.clone());
        if sub.len() == max_size {
            return Ok(());
        }
        let mut ext = ext;
        while let Some(w) = ext.pop() {
            let mut ext_next = ext.clone();
            for &u in &adjacency[w] {
                if u > anchor && !sub.contains(&u) && !ext_next.contains(&u) && u != w {
                    // only exclusive neighbours keep the enumeration unique
                    let already_neighbour =
                        sub.iter().any(|&s| adjacency[s].contains(&u)) || ext.contains(&u);
                    if !already_neighbour {
                        ext_next.push(u);
                    }
                }
            }
            sub.push(w);
            extend(sub, ext_next, anchor, adjacency, max_size, cap, count, out)?;
            sub.pop();
        }
        Ok(())
    }

    for v in 0..n {
        let ext: Vec<usize> = adjacency[v].iter().copied().filter(|&u| u > v).collect();
        let mut sub = vec![v];
        extend(
            &mut sub, ext, v, adjacency, max_size, cap, &mut count, &mut out,
        )?;
    }
    Ok(out)
}

/// Null space of the weight matrix restricted to `support` columns,
/// returned as full-length vectors (zero off support).
///
/// Solved through the support-local Gram matrix `G = X_S^H X_S`, whose
/// zero-eigenvalue eigenvectors are exactly the restricted null space.
fn restricted_null_space(
    active: &[&crate::circuit::Dissipator],
    support: &[usize],
    n: usize,
) -> Vec<AmplitudeVector> {
    let s = support.len();
    let mut gram = DMatrix::<C64>::zeros(s, s);
    let mut touched = false;
    for d in active {
        if !support.iter().any(|i| d.weights.contains_key(i)) {
            continue;
        }
        touched = true;
        for (a, &i) in support.iter().enumerate() {
            let Some(wi) = d.weights.get(&i) else {
                continue;
            };
            for (b, &k) in support.iter().enumerate() {
                if let Some(wk) = d.weights.get(&k) {
                    gram[(a, b)] += wi.conj() * wk;
                }
            }
        }
    }
    if !touched {
        // untouched modes: every basis vector is stationary
        return support
            .iter()
            .map(|&i| {
                let mut v = DVector::from_element(n, C64::new(0.0, 0.0));
                v[i] = C64::new(1.0, 0.0);
                v
            })
            .collect();
    }
    let eig = gram.symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let tol = 1e-12 * max.max(1.0);
    let mut out = Vec::new();
    for col in 0..s {
        if eig.eigenvalues[col] < tol {
            let mut v = DVector::from_element(n, C64::new(0.0, 0.0));
            for (a, &i) in support.iter().enumerate() {
                v[i] = eig.eigenvectors[(a, col)];
            }
            out.push(v);
        }
    }
    out
}

/// Unit norm, first supported entry real positive.
fn canonicalize(mut v: AmplitudeVector) -> AmplitudeVector {
    let norm = v.norm();
    if norm > 0.0 {
        v /= C64::new(norm, 0.0);
    }
    if let Some(first) = v.iter().find(|a| a.norm() > SUPPORT_THRESHOLD) {
        let phase = first / first.norm();
        v /= phase;
    }
    // Normalization can leave -0.0 imaginary parts behind; keep bytes stable.
    for a in v.iter_mut() {
        if a.re == 0.0 {
            a.re = 0.0;
        }
        if a.im == 0.0 {
            a.im = 0.0;
        }
    }
    v
}

/// Outcome of adding loss around a localized state.
#[derive(Debug)]
pub struct RobustnessReport {
    /// True when the state stays in the kernel of the modified circuit.
    pub still_stationary: bool,
    /// `max_j |<A_j>|` over the modified circuit's active dissipators.
    pub kernel_residual: f64,
    /// Spectrum of the modified circuit.
    pub spectrum: SpectrumResult,
}

/// Adds per-mode loss on `lossy_modes` and reports whether `state`
/// remains stationary. Exact criterion: the state survives iff its
/// support is disjoint from the lossy modes.
pub fn loss_robustness(
    circuit: &Circuit,
    state: &LocalizedState,
    lossy_modes: &[&str],
    rate: f64,
) -> Result<RobustnessReport, StationaryError> {
    let residual0 = kernel_residual(circuit, &state.amplitudes);
    if residual0 > SUPPORT_THRESHOLD {
        return Err(StationaryError::NotStationary {
            residual: residual0,
        });
    }
    let mut modified = circuit.clone();
    for label in lossy_modes {
        modified = modified
            .add_mode_loss(label, rate)
            .map_err(|_| StationaryError::UnknownMode(label.to_string()))?;
    }
    let kernel_residual = kernel_residual(&modified, &state.amplitudes);
    Ok(RobustnessReport {
        still_stationary: kernel_residual <= SUPPORT_THRESHOLD,
        kernel_residual,
        spectrum: dynamics::spectrum(&modified)?,
    })
}

/// Stationarity of a single photon distributed as `sum_k c_k a_k^dag |vac>`.
///
/// The single-excitation sector evolves by the same drift matrix as the
/// coherent amplitudes, so the state is stationary iff `X c = 0`.
pub fn single_photon_stationarity(
    circuit: &Circuit,
    coefficients: &AmplitudeVector,
) -> Result<(bool, f64), StationaryError> {
    if coefficients.len() != circuit.mode_count() {
        return Err(StationaryError::Dynamics(
            DynamicsError::DimensionMismatch {
                expected: circuit.mode_count(),
                got: coefficients.len(),
            },
        ));
    }
    let norm = coefficients.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(StationaryError::NotNormalized(norm));
    }
    let residual = kernel_residual(circuit, coefficients);
    Ok((residual <= SUPPORT_THRESHOLD, residual))
}
