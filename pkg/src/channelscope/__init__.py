"""Witness-based detection of entanglement-breaking and non-separable quantum channels."""

__version__ = "0.1.0"

from .operators import (  # noqa: E402
    PauliString,
    bell_state,
    expectation,
    hermitian_eigenvalues,
    maximally_entangled,
    partial_trace,
    partial_transpose,
    pauli_string_matrix,
    tensor,
)
from .channels import (  # noqa: E402
    DephasingParams,
    KrausChannel,
    NoiseSchedule,
    apply,
    bs_dephasing,
    channels_equal,
    cnot_gate,
    compose,
    dephasing,
    depolarizing,
    depolarizing_schedule,
    mixture_from_schedule,
    noisy_cnot,
    tensor_channels,
)
from .choi import (  # noqa: E402
    ChoiState,
    ExperimentModelParams,
    channel_from_choi,
    choi_of_channel,
    cnot_choi_ket,
    experimental_cnot_input,
    experimental_werner_choi,
    is_entanglement_breaking,
    is_ppt,
    noisy_cnot_choi,
    werner_choi,
)
from .witnesses import (  # noqa: E402
    ThresholdResult,
    Witness,
    detection_threshold,
    measurement_settings,
    mu_c_lower_bound,
    si_expectation,
    w_cnot,
    w_cnot_expectation_dephased,
    w_cnot_suboptimal,
    w_eb,
    w_eb_expectation_ideal,
)
from .experiment import (  # noqa: E402
    CoincidenceRecord,
    EstimationResult,
    estimate_pauli_term,
    estimate_witness,
    lc_p_uncertainty,
    outcome_probabilities,
    sample_counts,
)
