"""Work fluctuation relations of an autonomous two-particle elastic system.

Closed-form exponential work averages for classical and quantum preparations,
each backed by an independent numerical estimator (Monte Carlo or tensor-grid
quadrature), plus entanglement quantification, a two-point-measurement
simulator, and diagnostics for the heavy-agent recovery of the unit average.
"""

from .model import (
    ModelParams,
    PhasePoint,
    ProcessInterval,
    derived_params,
    evolve_classical,
    flow_matrix,
    hamiltonian,
    momentum_coefficients,
    work_classical,
    work_eigenvalue,
)
from .states_classical import (
    ClassicalMomentumCorrelated,
    ClassicalState,
    ClassicalThermalGaussian,
    ClassicalThermalThermal,
    SampleBatch,
    sample,
)
from .states_quantum import (
    AgentSuperposition,
    EntangledPair,
    MomentumCorrelated,
    PositionCorrelated,
    QuantumState,
    QuantumThermalGaussian,
    QuantumThermalThermal,
    gaussian_wavefunction,
    momentum_density,
    receiver_matrix_element,
    states_from_params,
)
from .closed_forms import (
    DomainError,
    FtPrediction,
    RegimeUnavailable,
    attenuation_factor,
    backaction_factor,
    ft_classical,
    ft_quantum,
    ft_quantum_approx,
    jensen_bound,
    xi_surface,
)
from .estimators import (
    FtEstimate,
    NonIntegrable,
    QuadratureConfig,
    estimate_mc,
    estimate_quadrature,
    mean_work,
)
from .entanglement import (
    EntanglementReport,
    GridTooCoarse,
    entanglement_closed,
    entanglement_limit,
    monotonicity_scan,
    purity_oracle,
    reduced_receiver_matrix,
)
from .tpm import (
    PostMeasurementState,
    TpmRecord,
    TpmRun,
    UnsupportedState,
    conditional_agent_overlap,
    first_measurement_density,
    ks_critical,
    ks_statistic,
    post_measurement_state,
    run_tpm,
)
from .bk_limit import BkScanReport, agent_backmap_sensitivity, bk_deviation, bk_scan

__version__ = "0.1.0"
