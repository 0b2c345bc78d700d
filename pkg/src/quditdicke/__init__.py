"""Exact preparation and verification of generalized Dicke states on qudits."""

from .levelsets import LevelSetIndex, build_level_sets, verify_level_set_proposition
from .qpe import (
    build_fanout_const_spin_s,
    build_fanout_const_sud,
    build_hadamard_test_spin_s,
    build_hadamard_test_sud,
    build_qpe_log_spin_s,
    build_qpe_log_sud,
    product_state_spin_s,
    product_state_sud,
    run_postselected,
)
from .reference import (
    DickeSpecSpinS,
    DickeSpecSUD,
    ProbabilityReport,
    apply_charge_conjugation,
    binomial,
    charge_moments_spin_s,
    charge_moments_sud,
    gamma_spin_s,
    gamma_sud,
    multinomial,
    probability_spin_s,
    probability_sud,
    spin_s_dicke,
    sud_dicke,
)
from .report import RunReport, count_resources
from .sequential import (
    build_i_spin_s,
    build_i_sud,
    build_sequential_spin_s,
    build_sequential_sud,
    rotation_cascade_angles,
    verify_sequential,
)
from .serialize import circuit_from_json, circuit_to_json, dump_amplitudes_csv
from .sim import (
    Circuit,
    GateOp,
    ImpossibleOutcomeError,
    QuditRegister,
    StateVector,
    apply_gate,
    fidelity,
    new_basis_state,
    project_on_outcome,
    sample_measure,
)

__all__ = [
    "Circuit",
    "DickeSpecSpinS",
    "DickeSpecSUD",
    "GateOp",
    "ImpossibleOutcomeError",
    "LevelSetIndex",
    "ProbabilityReport",
    "QuditRegister",
    "RunReport",
    "StateVector",
    "apply_charge_conjugation",
    "apply_gate",
    "binomial",
    "build_fanout_const_spin_s",
    "build_fanout_const_sud",
    "build_hadamard_test_spin_s",
    "build_hadamard_test_sud",
    "build_i_spin_s",
    "build_i_sud",
    "build_level_sets",
    "build_qpe_log_spin_s",
    "build_qpe_log_sud",
    "build_sequential_spin_s",
    "build_sequential_sud",
    "charge_moments_spin_s",
    "charge_moments_sud",
    "circuit_from_json",
    "circuit_to_json",
    "count_resources",
    "dump_amplitudes_csv",
    "fidelity",
    "gamma_spin_s",
    "gamma_sud",
    "multinomial",
    "new_basis_state",
    "probability_spin_s",
    "probability_sud",
    "product_state_spin_s",
    "product_state_sud",
    "project_on_outcome",
    "rotation_cascade_angles",
    "run_postselected",
    "sample_measure",
    "spin_s_dicke",
    "sud_dicke",
    "verify_level_set_proposition",
    "verify_sequential",
]
