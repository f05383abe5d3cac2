//! Quantum-state semantics on top of the amplitude dynamics: discrete
//! P-function mixtures of product coherent states, erasure energetics,
//! and a brute-force Fock-space master-equation oracle for small systems.
//!
//! Linear dissipative dynamics keeps coherent states coherent, so a
//! density matrix given as a weighted sum of product-coherent-state
//! projectors evolves by moving each component's amplitude vector along
//! the classical drift; the weights never change.

pub mod fock;

use nalgebra::DVector;
use thiserror::Error;

use crate::circuit::{builders, Circuit, CircuitError};
use crate::dynamics::{self, AmplitudeVector, DynamicsError};
use crate::C64;

pub use fock::{
    fock_oracle_evolve, gibbs_stationarity, FockDensityMatrix, GibbsReport, GibbsSpec,
    OracleDiagnostics,
};

#[derive(Debug, Error)]
pub enum QuantumError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("mixture weights must sum to 1 within 1e-12, got {0}")]
    WeightsNotNormalized(f64),
    #[error("mixture needs at least one component")]
    EmptyMixture,
    #[error("component {index} has {got} amplitudes, expected {expected}")]
    ComponentDimension {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("signal distribution is empty")]
    EmptySignal,
    #[error("negative weight {0}")]
    NegativeWeight(f64),
    #[error("oracle supports at most {max} modes, circuit has {got}")]
    TooManyModes { max: usize, got: usize },
    #[error(
        "state dimension {got} does not match {expected} for {modes} modes at cutoff {cutoff}"
    )]
    FockDimension {
        expected: usize,
        got: usize,
        modes: usize,
        cutoff: usize,
    },
    #[error(
        "Fock cutoff too small: ideal tail mass beyond the top representable level is {tail:.3e}"
    )]
    CutoffTooSmall { tail: f64 },
    #[error("Gibbs construction needs a uniform two-mode chain")]
    NotAUniformChain,
}

/// Discrete P-function: a weighted list of product-coherent-state
/// components. Weights sum to one within 1e-12.
#[derive(Debug, Clone)]
pub struct CoherentMixture {
    components: Vec<(f64, AmplitudeVector)>,
}

impl CoherentMixture {
    pub fn new(
        components: impl IntoIterator<Item = (f64, AmplitudeVector)>,
    ) -> Result<Self, QuantumError> {
        let components: Vec<(f64, AmplitudeVector)> = components.into_iter().collect();
        if components.is_empty() {
            return Err(QuantumError::EmptyMixture);
        }
        let mut sum = 0.0;
        for (p, _) in &components {
            if *p < 0.0 {
                return Err(QuantumError::NegativeWeight(*p));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(QuantumError::WeightsNotNormalized(sum));
        }
        let dim = components[0].1.len();
        for (index, (_, a)) in components.iter().enumerate() {
            if a.len() != dim {
                return Err(QuantumError::ComponentDimension {
                    index,
                    expected: dim,
                    got: a.len(),
                });
            }
        }
        Ok(CoherentMixture { components })
    }

    /// A single product coherent state.
    pub fn pure(amplitudes: AmplitudeVector) -> Self {
        CoherentMixture {
            components: vec![(1.0, amplitudes)],
        }
    }

    pub fn components(&self) -> &[(f64, AmplitudeVector)] {
        &self.components
    }

    /// Total mean photon number `sum_k p_k sum_j |alpha_jk|^2`.
    pub fn mean_photon_number(&self) -> f64 {
        self.components
            .iter()
            .map(|(p, a)| p * a.norm_squared())
            .sum()
    }
}

/// Evolves every component's amplitudes for effective time `t`; weights
/// are carried through unchanged.
pub fn evolve_mixture(
    circuit: &Circuit,
    mixture: &CoherentMixture,
    t: f64,
) -> Result<CoherentMixture, QuantumError> {
    let components = mixture
        .components
        .iter()
        .map(|(p, a)| {
            let state = if t == 0.0 {
                a.clone()
            } else {
                dynamics::evolve(circuit, a, &[t])?
                    .states
                    .pop()
                    .expect("one state")
            };
            Ok((*p, state))
        })
        .collect::<Result<Vec<_>, DynamicsError>>()?;
    Ok(CoherentMixture { components })
}

/// Squared overlap of two product coherent states:
/// `|<a|b>|^2 = prod_j exp(-|a_j - b_j|^2)`.
pub fn product_coherent_fidelity(
    a: &AmplitudeVector,
    b: &AmplitudeVector,
) -> Result<f64, QuantumError> {
    if a.len() != b.len() {
        return Err(QuantumError::ComponentDimension {
            index: 0,
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok((-a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>())
    .exp())
}

/// Fidelity of a mixture with a pure product coherent state.
pub fn mixture_fidelity_with_product(
    mixture: &CoherentMixture,
    target: &AmplitudeVector,
) -> Result<f64, QuantumError> {
    let mut f = 0.0;
    for (p, a) in &mixture.components {
        f += p * product_coherent_fidelity(a, target)?;
    }
    Ok(f)
}

/// Per-component outcome of the erasure scenario.
#[derive(Debug, Clone)]
pub struct ErasureComponent {
    pub weight: f64,
    pub beta: C64,
    /// Asymptotic amplitude from the kernel projection.
    pub abar_projected: C64,
    /// Closed form `(beta + (N+1) alpha) / (N+2)`.
    pub abar_closed_form: C64,
}

/// Energetics of erasing a signal mode against a coherent chain.
#[derive(Debug, Clone)]
pub struct ErasureReport {
    pub components: Vec<ErasureComponent>,
    /// Total energy cost `(N+1)/(N+2) sum_j p_j |beta_j - alpha|^2`.
    pub delta_e: f64,
    /// Initial minus asymptotic total mean photon number, from the
    /// projected amplitudes. Agrees with `delta_e` up to numerics.
    pub energy_drop: f64,
    /// Exact finite-N signal-mode energy difference
    /// `sum_j p_j (|beta_j|^2 - |abar_j|^2)`.
    pub delta_e0_exact: f64,
    /// The large-N approximation `sum_j p_j |beta_j|^2 - |alpha|^2`.
    pub delta_e0_large_n: f64,
    /// Fidelity of the asymptotic state with `Phi = prod |alpha>`.
    pub fidelity_to_phi: f64,
}

/// Attaches a signal mode in the mixed state `sum_j p_j |beta_j><beta_j|`
/// to a chain of `n + 1` reservoir modes all at amplitude `alpha`
/// (`n + 2` modes in total) and reports the asymptotics: each component
/// settles to the uniform product at `(beta_j + (n+1) alpha)/(n+2)`.
pub fn erasure_scenario(
    n: usize,
    alpha: C64,
    signal: &[(f64, C64)],
) -> Result<ErasureReport, QuantumError> {
    if signal.is_empty() {
        return Err(QuantumError::EmptySignal);
    }
    let mut weight_sum = 0.0;
    for (p, _) in signal {
        if *p < 0.0 {
            return Err(QuantumError::NegativeWeight(*p));
        }
        weight_sum += p;
    }
    if (weight_sum - 1.0).abs() > 1e-12 {
        return Err(QuantumError::WeightsNotNormalized(weight_sum));
    }

    let total_modes = n + 2;
    let chain = builders::uniform_chain(total_modes, 1.0)?;
    let reservoir = (n + 1) as f64;

    let mut components = Vec::with_capacity(signal.len());
    let mut delta_e = 0.0;
    let mut energy_initial = 0.0;
    let mut energy_final = 0.0;
    let mut delta_e0_exact = 0.0;
    let mut delta_e0_large_n = -alpha.norm_sqr();
    let mut fidelity_to_phi = 0.0;
    let phi = DVector::from_element(total_modes, alpha);

    for &(p, beta) in signal {
        let mut initial = DVector::from_element(total_modes, alpha);
        initial[0] = beta;
        let projected = dynamics::asymptotic_state(&chain, &initial)?;
        let abar_projected = projected[0];
        let abar_closed_form = (beta + reservoir * alpha) / (reservoir + 1.0);

        delta_e += p * reservoir / (reservoir + 1.0) * (beta - alpha).norm_sqr();
        energy_initial += p * initial.norm_squared();
        energy_final += p * projected.norm_squared();
        delta_e0_exact += p * (beta.norm_sqr() - abar_projected.norm_sqr());
        delta_e0_large_n += p * beta.norm_sqr();
        fidelity_to_phi += p * product_coherent_fidelity(&projected, &phi)?;

        components.push(ErasureComponent {
            weight: p,
            beta,
            abar_projected,
            abar_closed_form,
        });
    }

    Ok(ErasureReport {
        components,
        delta_e,
        energy_drop: energy_initial - energy_final,
        delta_e0_exact,
        delta_e0_large_n,
        fidelity_to_phi,
    })
}
