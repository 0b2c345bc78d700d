"""Probabilistic preparation circuits with exact postselection.

All six builders share the same shape: prepare a boosted product state,
read its conserved charge(s) into ancillas, and accept the runs whose
ancillas show the target value.  Readout comes in three flavors per
family: a bank of qubits with an inverse Fourier block (log depth), a
single higher-dimensional Hadamard test per charge, and a fan-out
interference filter whose depth does not grow with the register.
"""

from __future__ import annotations

import functools
import math
import time

import numpy as np

from .reference import DickeSpecSpinS, DickeSpecSUD, binomial
from .report import RunReport, count_resources, embedded_reference, spec_fields
from .sequential import rotation_cascade_angles
from .sim import (
    Circuit,
    GateOp,
    ImpossibleOutcomeError,
    QuditRegister,
    StateVector,
    dense_unitary,
    fidelity,
    hd,
    hd_dag,
    outcome_distribution,
    phase_k,
    project_on_outcome,
    rot,
    sum_,
    sum_dag,
)


def ancilla_bits_spin_s(spec: DickeSpecSpinS) -> int:
    """Qubits needed to hold any charge value: ceil(log2(2sn+1))."""
    return spec.max_charge.bit_length()


def ancilla_bits_sud(spec: DickeSpecSUD) -> int:
    """Qubits per level bank: ceil(log2(n+1))."""
    return spec.n.bit_length()


def _site_amplitudes_spin_s(twice_s: int, p: float) -> np.ndarray:
    amps = np.array(
        [math.sqrt(binomial(twice_s, m) * p**m * (1.0 - p) ** (twice_s - m)) for m in range(twice_s + 1)]
    )
    return amps


def _site_amplitudes_sud(xi) -> np.ndarray:
    xi = np.asarray([float(v) for v in xi])
    if xi.ndim != 1 or xi.size < 2:
        raise ValueError("xi must be a vector of at least two weights")
    if np.any(xi < 0):
        raise ValueError("xi components must be nonnegative")
    norm = np.linalg.norm(xi)
    if norm == 0.0:
        raise ValueError("xi must not be the zero vector")
    return xi / norm


def _prep_ops(site_amps: np.ndarray, wires) -> list[GateOp]:
    angles = rotation_cascade_angles(site_amps)
    return [rot(w, m, theta) for w in wires for m, theta in enumerate(angles)]


def _tensor_power(site_amps: np.ndarray, n: int) -> np.ndarray:
    return functools.reduce(lambda acc, _: np.kron(site_amps, acc), range(n), np.ones(1))


def product_state_spin_s(n: int, twice_s: int, p: float) -> tuple[StateVector, list[GateOp]]:
    """Boosted product state and the rotation sequence preparing it.

    Each site holds sqrt(C(2s,m) p^m (1-p)^(2s-m)) on level m, so the
    n-fold product decomposes over the charge sectors with binomial
    weights in p.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    site = _site_amplitudes_spin_s(twice_s, p)
    register = QuditRegister((f"s{j}", twice_s + 1) for j in range(1, n + 1))
    state = StateVector(register, _tensor_power(site, n).astype(np.complex128))
    return state, _prep_ops(site, [f"s{j}" for j in range(1, n + 1)])


def product_state_sud(n: int, xi) -> tuple[StateVector, list[GateOp]]:
    """Normalized weighted product state over d levels, tensored n times."""
    site = _site_amplitudes_sud(xi)
    d = site.size
    register = QuditRegister((f"s{j}", d) for j in range(1, n + 1))
    state = StateVector(register, _tensor_power(site, n).astype(np.complex128))
    return state, _prep_ops(site, [f"s{j}" for j in range(1, n + 1)])


def _inverse_fourier(size: int) -> np.ndarray:
    a = np.arange(size)
    return np.exp(-2j * np.pi * np.outer(a, a) / size) / math.sqrt(size)


def _bits(value: int, width: int) -> tuple[int, ...]:
    return tuple((value >> x) & 1 for x in range(width))


def _spin_s_meta(spec: DickeSpecSpinS, method: str, p: float, notes=()) -> dict:
    return {
        "family": "spin-s",
        "method": method,
        "n": spec.n,
        "twice_s": spec.twice_s,
        "k": spec.k,
        "system_wires": tuple(f"s{j}" for j in range(1, spec.n + 1)),
        "optimal_parameter": p,
        "notes": list(notes),
    }


def _sud_meta(spec: DickeSpecSUD, method: str, xi, notes=()) -> dict:
    return {
        "family": "sud",
        "method": method,
        "n": spec.n,
        "kvec": spec.kvec,
        "system_wires": tuple(f"s{j}" for j in range(1, spec.n + 1)),
        "optimal_parameter": [float(v) for v in xi],
        "notes": list(notes),
    }


def build_qpe_log_spin_s(spec: DickeSpecSpinS, p: float | None = None) -> Circuit:
    """Charge readout into a qubit bank via controlled charge phases and an
    inverse Fourier block; accepts when the bank shows k in binary
    (bit x of k on ancilla x)."""
    if p is None:
        p = spec.k / spec.max_charge
    n, dim = spec.n, spec.dim
    ell = ancilla_bits_spin_s(spec)
    size = 2**ell
    qubits = [f"q{x}" for x in range(ell)]
    wires = [(f"s{j}", dim) for j in range(1, n + 1)] + [(q, 2) for q in qubits]
    _, prep = product_state_spin_s(n, spec.twice_s, p)
    ops = list(prep)
    ops += [hd(q) for q in qubits]
    for x in range(ell):
        for j in range(1, n + 1):
            ops.append(phase_k(f"s{j}", num=2**x, den=size, controls=((qubits[x], 1),)))
    ops.append(dense_unitary(tuple(qubits), _inverse_fourier(size)))
    return Circuit(
        QuditRegister(wires),
        ops,
        accept_rule=(tuple(qubits), _bits(spec.k, ell)),
        meta=_spin_s_meta(spec, "qpe-log", p),
    )


def build_hadamard_test_spin_s(spec: DickeSpecSpinS, p: float | None = None) -> Circuit:
    """One charge-dimensional ancilla reads the total charge through a
    Fourier-conjugated product of charge phases; accepts on reading k."""
    if p is None:
        p = spec.k / spec.max_charge
    n, dim = spec.n, spec.dim
    modulus = spec.max_charge + 1
    wires = [(f"s{j}", dim) for j in range(1, n + 1)] + [("h", modulus)]
    _, prep = product_state_spin_s(n, spec.twice_s, p)
    ops = list(prep)
    ops.append(hd("h"))
    for j in range(1, n + 1):
        ops.append(phase_k(("h", f"s{j}"), num=1, den=modulus))
    ops.append(hd_dag("h"))
    notes = [
        f"constant-depth feedforward realization budget: about {n} ancillas of dimension {modulus}; this direct simulation uses 1"
    ]
    return Circuit(
        QuditRegister(wires),
        ops,
        accept_rule=(("h",), (spec.k,)),
        meta=_spin_s_meta(spec, "hadamard", p, notes),
    )


def build_fanout_const_spin_s(spec: DickeSpecSpinS, p: float | None = None) -> Circuit:
    """Fan the register out to ell basis copies and accept when ell flag
    qubits survive an interference test on the shifted charge.

    Counting each fan-out and each controlled charge phase as one layer,
    the depth does not grow with n.
    """
    if p is None:
        p = spec.k / spec.max_charge
    n, dim, k = spec.n, spec.dim, spec.k
    ell = ancilla_bits_spin_s(spec)
    system = [f"s{j}" for j in range(1, n + 1)]
    blocks = [system] + [[f"c{b}_{j}" for j in range(1, n + 1)] for b in range(2, ell + 1)]
    flags = [f"f{x}" for x in range(1, ell + 1)]
    wires = [(w, dim) for w in system]
    for block in blocks[1:]:
        wires += [(w, dim) for w in block]
    wires += [(f, 2) for f in flags]
    _, prep = product_state_spin_s(n, spec.twice_s, p)
    ops = list(prep)
    for block in blocks[1:]:
        for copy, src in zip(block, system):
            ops.append(sum_(copy, src, layer_tag="F"))
    ops += [hd(f) for f in flags]
    for x in range(1, ell + 1):
        flag = flags[x - 1]
        for idx, w in enumerate(blocks[x - 1]):
            ops.append(
                phase_k(w, num=1, den=2**x, offset=k if idx == 0 else 0, controls=((flag, 1),), layer_tag=f"U{x}")
            )
    for block in blocks[1:]:
        for copy, src in zip(block, system):
            ops.append(sum_dag(copy, src, layer_tag="Fdag"))
    ops += [hd(f) for f in flags]
    return Circuit(
        QuditRegister(wires),
        ops,
        accept_rule=(tuple(flags), (0,) * ell),
        meta=_spin_s_meta(spec, "fanout", p),
    )


def _xi_or_default(spec: DickeSpecSUD, xi) -> tuple[float, ...]:
    if xi is None:
        return tuple(math.sqrt(v / spec.n) for v in spec.kvec)
    xi = tuple(float(v) for v in xi)
    if len(xi) != spec.d:
        raise ValueError(f"xi needs {spec.d} components")
    return xi


def build_qpe_log_sud(spec: DickeSpecSUD, xi=None) -> Circuit:
    """One qubit bank per level 1..d-1, each reading its occupation count
    through controlled level phases and an inverse Fourier block."""
    xi = _xi_or_default(spec, xi)
    n, d = spec.n, spec.d
    ell = ancilla_bits_sud(spec)
    size = 2**ell
    banks = [[f"q{i}_{x}" for x in range(ell)] for i in range(1, d)]
    wires = [(f"s{j}", d) for j in range(1, n + 1)]
    for bank in banks:
        wires += [(q, 2) for q in bank]
    _, prep = product_state_sud(n, xi)
    ops = list(prep)
    for bank in banks:
        ops += [hd(q) for q in bank]
    for i in range(1, d):
        bank = banks[i - 1]
        for x in range(ell):
            for j in range(1, n + 1):
                ops.append(phase_k(f"s{j}", num=2**x, den=size, level=i, controls=((bank[x], 1),)))
    for bank in banks:
        ops.append(dense_unitary(tuple(bank), _inverse_fourier(size)))
    accept_wires = tuple(q for bank in banks for q in bank)
    accept_digits = tuple(b for i in range(1, d) for b in _bits(spec.kvec[i], ell))
    return Circuit(
        QuditRegister(wires),
        ops,
        accept_rule=(accept_wires, accept_digits),
        meta=_sud_meta(spec, "qpe-log", xi),
    )


def build_hadamard_test_sud(spec: DickeSpecSUD, xi=None) -> Circuit:
    """One (n+1)-dimensional ancilla per level, written sequentially;
    accepts when ancilla i reads the target occupation of level i."""
    xi = _xi_or_default(spec, xi)
    n, d = spec.n, spec.d
    modulus = n + 1
    ancillas = [f"h{i}" for i in range(1, d)]
    wires = [(f"s{j}", d) for j in range(1, n + 1)] + [(h, modulus) for h in ancillas]
    _, prep = product_state_sud(n, xi)
    ops = list(prep)
    for i in range(1, d):
        anc = ancillas[i - 1]
        ops.append(hd(anc))
        for j in range(1, n + 1):
            ops.append(phase_k((anc, f"s{j}"), num=1, den=modulus, level=i))
        ops.append(hd_dag(anc))
    notes = [
        f"constant-depth feedforward realization budget: about {n + d} ancillas of dimension {modulus}; this direct simulation uses {d - 1}"
    ]
    return Circuit(
        QuditRegister(wires),
        ops,
        accept_rule=(tuple(ancillas), tuple(spec.kvec[1:])),
        meta=_sud_meta(spec, "hadamard", xi, notes),
    )


def build_fanout_const_sud(spec: DickeSpecSUD, xi=None) -> Circuit:
    """(d-1)*ell basis copies, one per (level, bit) pair, filtered by
    (d-1)*ell flag qubits; accepts when every flag returns to 0."""
    xi = _xi_or_default(spec, xi)
    n, d = spec.n, spec.d
    ell = ancilla_bits_sud(spec)
    total_blocks = (d - 1) * ell
    system = [f"s{j}" for j in range(1, n + 1)]
    blocks = [system] + [[f"c{b}_{j}" for j in range(1, n + 1)] for b in range(2, total_blocks + 1)]
    flags = [f"f{i}_{x}" for i in range(1, d) for x in range(1, ell + 1)]
    wires = [(w, d) for w in system]
    for block in blocks[1:]:
        wires += [(w, d) for w in block]
    wires += [(f, 2) for f in flags]
    _, prep = product_state_sud(n, xi)
    ops = list(prep)
    for block in blocks[1:]:
        for copy, src in zip(block, system):
            ops.append(sum_(copy, src, layer_tag="F"))
    ops += [hd(f) for f in flags]
    for i in range(1, d):
        for x in range(1, ell + 1):
            block_index = (i - 1) * ell + x  # block 1 is the system itself
            flag = f"f{i}_{x}"
            for idx, w in enumerate(blocks[block_index - 1]):
                ops.append(
                    phase_k(
                        w,
                        num=1,
                        den=2**x,
                        offset=spec.kvec[i] if idx == 0 else 0,
                        level=i,
                        controls=((flag, 1),),
                        layer_tag=f"U{i}_{x}",
                    )
                )
    for block in blocks[1:]:
        for copy, src in zip(block, system):
            ops.append(sum_dag(copy, src, layer_tag="Fdag"))
    ops += [hd(f) for f in flags]
    return Circuit(
        QuditRegister(wires),
        ops,
        accept_rule=(tuple(flags), (0,) * len(flags)),
        meta=_sud_meta(spec, "fanout", xi),
    )


def run_postselected(circuit: Circuit, oracle_state: StateVector, shots: int = 0, seed: int | None = None) -> RunReport:
    """Simulate, project exactly on the accept rule, and report.

    With ``shots`` > 0 the accept-register marginal is also sampled with a
    seeded generator and the empirical acceptance frequency is noted;
    reruns with the same seed are bit-identical.
    """
    if circuit.accept_rule is None:
        raise ValueError("circuit has no accept rule to postselect on")
    start = time.perf_counter()
    state = circuit.run()
    wires, digits = circuit.accept_rule
    notes = list(circuit.meta.get("notes", ()))
    try:
        probability, conditional = project_on_outcome(state, wires, digits)
    except ImpossibleOutcomeError:
        probability, conditional = 0.0, None
    if conditional is None:
        fid = 0.0
        notes.append("acceptance has probability 0: reported as failure")
    else:
        reference = embedded_reference(circuit, oracle_state, dict(zip(wires, digits)))
        fid = fidelity(conditional, reference)
    if shots:
        reg = circuit.register
        dist = outcome_distribution(state, wires)
        target = 0
        stride = 1
        for w, v in zip(wires, digits):
            target += v * stride
            stride *= reg.dim(w)
        rng = np.random.default_rng(0 if seed is None else int(seed))
        draws = rng.choice(dist.size, size=int(shots), p=dist / dist.sum())
        frequency = float(np.count_nonzero(draws == target)) / float(shots)
        notes.append(f"sampled acceptance frequency {frequency!r} over {shots} shots")
    gate_count, depth, census = count_resources(circuit)
    elapsed_ms = int(round((time.perf_counter() - start) * 1000))
    return RunReport(
        spec=spec_fields(circuit),
        acceptance_probability=probability,
        conditional_fidelity=fid,
        expected_repetitions=math.inf if probability == 0.0 else 1.0 / probability,
        gate_count=gate_count,
        logical_depth=depth,
        ancilla_census=census,
        optimal_parameter=circuit.meta.get("optimal_parameter"),
        seed=seed,
        wallclock_ms=elapsed_ms,
        notes=notes,
    )
