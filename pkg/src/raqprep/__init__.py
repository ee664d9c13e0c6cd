"""Randomized adaptive quantum state preparation: dense simulator,
improvement-bound checks, and a desk-scale experiment harness."""

__version__ = "0.1.0"

from .linalg import (
    ConjugatedPauli,
    DenseOperator,
    DensityMatrix,
    PauliString,
    StateVector,
    apply_dense,
    apply_pauli_rotation,
    commutator_expectation,
    expectation,
    partial_trace,
    spectral_norm,
)
from .hamiltonians import (
    Graph,
    ProblemHamiltonian,
    approximation_ratio,
    ground_energy_bruteforce,
    ising_from_graph,
    projector_hamiltonian,
    variance_of,
)
from .sampling import (
    RngStream,
    TwoDesignConfig,
    full_pauli_pool,
    haar_unitary,
    random_regular_graph,
    random_state,
    sample_pool,
    two_design_unitary,
    weight_graded_pool,
)
from .engine import (
    GradientMode,
    RandomizationStrategy,
    RunConfig,
    RunTrace,
    StepRecord,
    StopRule,
    gradient_exact,
    gradient_finite_difference,
    gradient_hilbert_schmidt,
    gradient_shot_estimate,
    run,
    step,
)
from .bounds import (
    BoundReport,
    check_step_bound,
    lipschitz_constant,
    m_upper_bound,
    pool_average_bound,
    two_design_expected_bound,
    verify_two_design_bound_mc,
)
from .dilation import CoolingConfig, DilatedState, cooling_gradient, cooling_run
from .sweeps import SweepSpec, sweep_fig2, sweep_fig3
