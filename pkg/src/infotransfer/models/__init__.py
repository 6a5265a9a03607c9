from .bounds import (
    BoundInputs,
    Box,
    cat_bound,
    corollary3_bound,
    energy_pointer_bound,
    energy_scaling_inputs,
    hepp_bound,
    is_vacuous,
    leakage_bound,
    thermal_bound,
)
from .chain import (
    ChainConfig,
    ChainStatevector,
    chain_pointer,
    epsilon,
    gibbs_qubit,
    hepp_chain,
    pauli_observables,
    random_local_observable,
    stray_observable,
    thermal_chain,
    thermal_closed_form,
)
from .qubits import (
    PSI0,
    PSI1,
    cnot_instrument,
    cnot_model,
    controlled_flips,
    repeated_measurement_joint,
    repeated_measurement_model,
)
