"""Dense statevector simulator for registers of mixed-dimension qudits.

Flat amplitude indices use a mixed-radix encoding in which the first wire
of the register is the least-significant digit, so an index reads like the
ket string written right to left.  All operations here are pure: they
return new states and never mutate their inputs, which makes states safe
to share across threads.  Gate application is a single dense block
update, so results are deterministic for a fixed input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

# Numerical contract of the simulator: amplitude comparisons, norm drift
# after a unitary, and unitarity of constructed matrices.
ATOL_AMPLITUDE = 1e-10
ATOL_NORM = 1e-12
ATOL_UNITARY = 1e-10
FIDELITY_ACCEPT = 1.0 - 1e-9

GATE_KINDS = (
    "Xd",
    "XdDag",
    "Xswap",
    "Sum",
    "SumDag",
    "Hd",
    "HdDag",
    "Rot",
    "PhaseK",
    "DenseUnitary",
)

class ImpossibleOutcomeError(ValueError):
    """Projection on an outcome that carries exactly zero probability."""


class QuditRegister:
    """Ordered list of uniquely named wires with per-wire dimensions >= 2."""

    def __init__(self, wires: Iterable[tuple]):
        pairs = tuple((wire, int(dim)) for wire, dim in wires)
        if not pairs:
            raise ValueError("register needs at least one wire")
        ids = tuple(w for w, _ in pairs)
        if len(set(ids)) != len(ids):
            raise ValueError("wire ids must be unique")
        for wire, dim in pairs:
            if dim < 2:
                raise ValueError(f"wire {wire!r} has dimension {dim}, but all dimensions must be >= 2")
        self.ids = ids
        self.dims = tuple(d for _, d in pairs)
        self._pos = {w: p for p, w in enumerate(ids)}
        self.size = math.prod(self.dims)

    @classmethod
    def of_dims(cls, dims: Sequence[int]) -> "QuditRegister":
        """Register with integer wire ids 0..len(dims)-1."""
        return cls(enumerate(dims))

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, wire) -> bool:
        return wire in self._pos

    def position(self, wire) -> int:
        try:
            return self._pos[wire]
        except KeyError:
            raise ValueError(f"wire {wire!r} not in register") from None

    def dim(self, wire) -> int:
        return self.dims[self.position(wire)]

    def flat_index(self, digits: Sequence[int]) -> int:
        """Mixed-radix encode; digits are listed in wire order (wire 1 first)."""
        if len(digits) != len(self.dims):
            raise ValueError("digit count does not match register")
        index = 0
        stride = 1
        for digit, dim in zip(digits, self.dims):
            if not 0 <= digit < dim:
                raise ValueError(f"digit {digit} out of range for dimension {dim}")
            index += digit * stride
            stride *= dim
        return index

    def digits_of(self, index: int) -> tuple[int, ...]:
        """Invert flat_index."""
        if not 0 <= index < self.size:
            raise ValueError(f"index {index} out of range")
        digits = []
        for dim in self.dims:
            digits.append(index % dim)
            index //= dim
        return tuple(digits)

    def same_shape(self, other: "QuditRegister") -> bool:
        return self.dims == other.dims

    def __repr__(self) -> str:
        inner = ", ".join(f"{w!r}:{d}" for w, d in zip(self.ids, self.dims))
        return f"QuditRegister({inner})"


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized complex amplitudes over a register; treat as immutable."""

    register: QuditRegister
    amplitudes: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self) -> np.ndarray:
        """View amplitudes with one axis per wire, axis p = wire p."""
        return self.amplitudes.reshape(self.register.dims, order="F")


def new_basis_state(register: QuditRegister, digits: Sequence[int]) -> StateVector:
    """Computational basis state |digits> (digit for wire 1 first)."""
    amps = np.zeros(register.size, dtype=np.complex128)
    amps[register.flat_index(digits)] = 1.0
    return StateVector(register, amps)


@dataclass(eq=False)
class GateOp:
    """One gate: a kind from GATE_KINDS, target wires, optional controls.

    Controls are (wire, value) pairs; the gate acts only on the subspace
    where every control wire holds its value.  At most two controls are
    supported.  ``layer_tag`` groups ops that count as a single layer for
    depth accounting (e.g. one logical fan-out emitted as two-wire sums);
    it does not affect the unitary.
    """

    kind: str
    targets: tuple
    params: dict = field(default_factory=dict)
    controls: tuple = ()
    layer_tag: str | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        self.targets = tuple(self.targets)
        self.controls = tuple((w, int(v)) for w, v in self.controls)
        if len(self.controls) > 2:
            raise ValueError("at most two controls are supported")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError("duplicate target wires")
        control_wires = [w for w, _ in self.controls]
        if len(set(control_wires)) != len(control_wires):
            raise ValueError("duplicate control wires")
        overlap = set(self.targets) & set(control_wires)
        if overlap:
            raise ValueError(f"wires {overlap} appear as both target and control")

    def wires(self) -> tuple:
        return self.targets + tuple(w for w, _ in self.controls)

    def inverse(self) -> "GateOp":
        """Op implementing the inverse unitary (same targets/controls)."""
        flip = {"Xd": "XdDag", "XdDag": "Xd", "Sum": "SumDag", "SumDag": "Sum", "Hd": "HdDag", "HdDag": "Hd"}
        if self.kind in flip:
            return GateOp(flip[self.kind], self.targets, dict(self.params), self.controls)
        if self.kind == "Xswap":
            return GateOp("Xswap", self.targets, dict(self.params), self.controls)
        if self.kind == "Rot":
            params = dict(self.params)
            params["theta"] = -params["theta"]
            return GateOp("Rot", self.targets, params, self.controls)
        if self.kind == "PhaseK":
            params = dict(self.params)
            params["num"] = -params["num"]
            return GateOp("PhaseK", self.targets, params, self.controls)
        matrix = np.asarray(self.params["matrix"])
        return GateOp("DenseUnitary", self.targets, {"matrix": matrix.conj().T}, self.controls)


def xd(wire, controls=(), layer_tag=None) -> GateOp:
    """Cyclic raise |x> -> |x+1 mod d|."""
    return GateOp("Xd", (wire,), controls=controls, layer_tag=layer_tag)


def xd_dag(wire, controls=(), layer_tag=None) -> GateOp:
    return GateOp("XdDag", (wire,), controls=controls, layer_tag=layer_tag)


def xswap(wire, i: int, j: int, controls=(), layer_tag=None) -> GateOp:
    """Transposition of levels i and j on one wire."""
    if i == j:
        raise ValueError("Xswap levels must differ")
    return GateOp("Xswap", (wire,), {"i": int(i), "j": int(j)}, controls, layer_tag)


def sum_(dest, src, controls=(), layer_tag=None) -> GateOp:
    """|y>|x> -> |y+x mod dim(dest)>|x>; the source wire is unchanged."""
    return GateOp("Sum", (dest, src), controls=controls, layer_tag=layer_tag)


def sum_dag(dest, src, controls=(), layer_tag=None) -> GateOp:
    return GateOp("SumDag", (dest, src), controls=controls, layer_tag=layer_tag)


def hd(wire, controls=(), layer_tag=None) -> GateOp:
    """Fourier gate |x> -> d^{-1/2} sum_y exp(2*pi*i*x*y/d)|y>."""
    return GateOp("Hd", (wire,), controls=controls, layer_tag=layer_tag)


def hd_dag(wire, controls=(), layer_tag=None) -> GateOp:
    return GateOp("HdDag", (wire,), controls=controls, layer_tag=layer_tag)


def rot(wire, m: int, theta: float, controls=(), layer_tag=None) -> GateOp:
    """Givens rotation in the (m, m+1) plane: |m> -> cos(t/2)|m> + sin(t/2)|m+1>."""
    return GateOp("Rot", (wire,), {"m": int(m), "theta": float(theta)}, controls, layer_tag)


def phase_k(targets, num: int, den: int, offset: int = 0, level: int | None = None, controls=(), layer_tag=None) -> GateOp:
    """Diagonal charge phase exp(2*pi*i*num*(q(m)-offset)/den).

    q(m) is the digit m itself, or the indicator [m == level] when
    ``level`` is given.  With two targets (x_wire, m_wire) the exponent is
    additionally multiplied by the first wire's digit x.
    """
    targets = tuple(targets) if isinstance(targets, (tuple, list)) else (targets,)
    if den <= 0:
        raise ValueError("PhaseK denominator must be positive")
    params = {"num": int(num), "den": int(den), "offset": int(offset), "level": None if level is None else int(level)}
    return GateOp("PhaseK", targets, params, controls, layer_tag)


def dense_unitary(targets, matrix, controls=(), layer_tag=None) -> GateOp:
    """Explicit unitary block over the target wires; unitarity is checked here."""
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("matrix must be square")
    eye = np.eye(matrix.shape[0])
    if not np.allclose(matrix.conj().T @ matrix, eye, atol=ATOL_UNITARY):
        raise ValueError("matrix is not unitary within tolerance")
    targets = tuple(targets) if isinstance(targets, (tuple, list)) else (targets,)
    return GateOp("DenseUnitary", targets, {"matrix": matrix}, controls, layer_tag)


def _charge_values(dim: int, level: int | None) -> np.ndarray:
    if level is None:
        return np.arange(dim, dtype=float)
    return (np.arange(dim) == level).astype(float)


def gate_matrix(op: GateOp, dims: Sequence[int]) -> np.ndarray:
    """Unitary matrix of ``op`` on targets of the given dimensions.

    The matrix index convention matches the register: the first target is
    the least-significant digit of the block index.
    """
    kind = op.kind
    if kind in ("Xd", "XdDag"):
        d = dims[0]
        shift = 1 if kind == "Xd" else -1
        m = np.zeros((d, d), dtype=np.complex128)
        for x in range(d):
            m[(x + shift) % d, x] = 1.0
        return m
    if kind == "Xswap":
        d = dims[0]
        i, j = op.params["i"], op.params["j"]
        if i == j or not (0 <= i < d and 0 <= j < d):
            raise ValueError(f"Xswap levels ({i},{j}) must be distinct and below dimension {d}")
        m = np.eye(d, dtype=np.complex128)
        m[[i, j]] = m[[j, i]]
        return m
    if kind in ("Sum", "SumDag"):
        da, db = dims
        sign = 1 if kind == "Sum" else -1
        m = np.zeros((da * db, da * db), dtype=np.complex128)
        for x in range(db):
            for y in range(da):
                m[((y + sign * x) % da) + da * x, y + da * x] = 1.0
        return m
    if kind in ("Hd", "HdDag"):
        d = dims[0]
        sign = 1 if kind == "Hd" else -1
        a = np.arange(d)
        return np.exp(sign * 2j * np.pi * np.outer(a, a) / d) / math.sqrt(d)
    if kind == "Rot":
        d = dims[0]
        m0 = op.params["m"]
        if not 0 <= m0 < d - 1:
            raise ValueError(f"Rot level {m0} needs m+1 < dimension {d}")
        theta = op.params["theta"]
        c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
        u = np.eye(d, dtype=np.complex128)
        u[m0, m0] = c
        u[m0 + 1, m0 + 1] = c
        u[m0, m0 + 1] = -s
        u[m0 + 1, m0] = s
        return u
    if kind == "PhaseK":
        num, den = op.params["num"], op.params["den"]
        offset, level = op.params["offset"], op.params["level"]
        if len(dims) == 1:
            d = dims[0]
            if level is not None and not 0 <= level < d:
                raise ValueError(f"PhaseK level {level} out of range for dimension {d}")
            q = _charge_values(d, level)
            return np.diag(np.exp(2j * np.pi * num * (q - offset) / den))
        dx, dm = dims
        if level is not None and not 0 <= level < dm:
            raise ValueError(f"PhaseK level {level} out of range for dimension {dm}")
        q = _charge_values(dm, level)
        x = np.arange(dx, dtype=float)
        # block index = x + dx*m; phase multiplies by the first wire's digit
        expo = np.add.outer(np.zeros(dm), x) * (q[:, None] - offset)
        diag = np.exp(2j * np.pi * num * expo.reshape(-1) / den)
        return np.diag(diag)
    if kind == "DenseUnitary":
        matrix = np.asarray(op.params["matrix"], dtype=np.complex128)
        full = math.prod(dims)
        if matrix.shape != (full, full):
            raise ValueError(f"DenseUnitary shape {matrix.shape} does not match targets of total dimension {full}")
        return matrix
    raise ValueError(f"unknown gate kind {kind!r}")


def _validate_on(op: GateOp, register: QuditRegister) -> None:
    for wire in op.targets:
        if wire not in register:
            raise ValueError(f"target wire {wire!r} not in register")
    for wire, value in op.controls:
        if wire not in register:
            raise ValueError(f"control wire {wire!r} not in register")
        if not 0 <= value < register.dim(wire):
            raise ValueError(f"control value {value} out of range for wire {wire!r}")
    arity = {"Sum": 2, "SumDag": 2}.get(op.kind)
    if arity is not None and len(op.targets) != arity:
        raise ValueError(f"{op.kind} takes exactly {arity} targets")
    if op.kind in ("Xd", "XdDag", "Xswap", "Hd", "HdDag", "Rot") and len(op.targets) != 1:
        raise ValueError(f"{op.kind} takes exactly one target")
    if op.kind == "PhaseK" and len(op.targets) not in (1, 2):
        raise ValueError("PhaseK takes one or two targets")


def apply_gate(state: StateVector, op: GateOp) -> StateVector:
    """Apply one gate; identity outside the controlled subspace."""
    reg = state.register
    _validate_on(op, reg)
    tdims = tuple(reg.dim(w) for w in op.targets)
    matrix = gate_matrix(op, tdims)
    out = state.amplitudes.copy()
    arr = out.reshape(reg.dims, order="F")
    tpos = [reg.position(w) for w in op.targets]
    cpos = [reg.position(w) for w, _ in op.controls]
    moved = np.moveaxis(arr, tpos + cpos, range(len(tpos) + len(cpos)))
    sel = (slice(None),) * len(tpos) + tuple(v for _, v in op.controls)
    sub = moved[sel]
    block_dim = math.prod(tdims)
    block = sub.reshape((block_dim, -1), order="F")
    block = matrix @ block
    sub[...] = block.reshape(sub.shape, order="F")
    return StateVector(reg, out)


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2; insensitive to global phase."""
    if not a.register.same_shape(b.register):
        raise ValueError("states live on registers of different shapes")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def project_on_outcome(state: StateVector, wires: Sequence, digits: Sequence[int]) -> tuple[float, StateVector]:
    """Exact projection of the given wires onto fixed digits.

    Returns (probability, conditional state).  The conditional state keeps
    the full register shape with the measured wires pinned to ``digits``.
    A zero-probability outcome raises ImpossibleOutcomeError rather than
    producing a NaN state.
    """
    reg = state.register
    wires = tuple(wires)
    digits = tuple(int(v) for v in digits)
    if len(wires) != len(digits):
        raise ValueError("wires and digits differ in length")
    if len(set(wires)) != len(wires):
        raise ValueError("duplicate wires in projection")
    pos = [reg.position(w) for w in wires]
    for w, v in zip(wires, digits):
        if not 0 <= v < reg.dim(w):
            raise ValueError(f"digit {v} out of range for wire {w!r}")
    arr = state.amplitudes.reshape(reg.dims, order="F")
    moved = np.moveaxis(arr, pos, range(len(pos)))
    sub = moved[digits]
    probability = float(np.sum(np.abs(sub) ** 2))
    if probability == 0.0:
        raise ImpossibleOutcomeError(f"outcome {digits} on wires {wires} is impossible")
    cond = np.zeros(reg.size, dtype=np.complex128)
    cond_view = np.moveaxis(cond.reshape(reg.dims, order="F"), pos, range(len(pos)))
    cond_view[digits] = sub / math.sqrt(probability)
    return probability, StateVector(reg, cond)


def outcome_distribution(state: StateVector, wires: Sequence) -> np.ndarray:
    """Exact marginal distribution over the listed wires.

    The returned vector is indexed mixed-radix with the first listed wire
    least significant, matching the register convention.
    """
    reg = state.register
    wires = tuple(wires)
    pos = [reg.position(w) for w in wires]
    if len(set(pos)) != len(pos):
        raise ValueError("duplicate wires")
    weights = np.abs(state.amplitudes.reshape(reg.dims, order="F")) ** 2
    others = tuple(a for a in range(len(reg.dims)) if a not in set(pos))
    marg = weights.sum(axis=others) if others else weights
    kept = sorted(pos)
    marg = np.transpose(marg, axes=[kept.index(p) for p in pos])
    return np.ascontiguousarray(marg.reshape(-1, order="F"))


def sample_measure(state: StateVector, wires: Sequence, seed: int) -> tuple[tuple[int, ...], StateVector]:
    """Draw one outcome for the listed wires from the exact marginal.

    Deterministic for a fixed (state, wires, seed); the collapsed state is
    the same as project_on_outcome on the drawn digits.
    """
    reg = state.register
    wires = tuple(wires)
    probs = outcome_distribution(state, wires)
    rng = np.random.default_rng(int(seed))
    index = int(rng.choice(probs.size, p=probs / probs.sum()))
    digits = []
    for w in wires:
        d = reg.dim(w)
        digits.append(index % d)
        index //= d
    digits = tuple(digits)
    _, collapsed = project_on_outcome(state, wires, digits)
    return digits, collapsed


@dataclass(eq=False)
class Circuit:
    """Ordered gate list over a register, with an optional acceptance rule.

    ``accept_rule`` is a (wires, digits) pair naming the postselection
    pattern; deterministic builders use it to record the expected final
    ancilla digits.  ``meta`` carries builder bookkeeping (family, method,
    system wires, optimal parameter) and is not part of the exchange
    format.
    """

    register: QuditRegister
    ops: list[GateOp]
    accept_rule: tuple[tuple, tuple] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.ops = list(self.ops)
        for op in self.ops:
            _validate_on(op, self.register)
        if self.accept_rule is not None:
            wires, digits = self.accept_rule
            wires = tuple(wires)
            digits = tuple(int(v) for v in digits)
            if len(wires) != len(digits):
                raise ValueError("accept_rule wires and digits differ in length")
            for w, v in zip(wires, digits):
                if not 0 <= v < self.register.dim(w):
                    raise ValueError(f"accept_rule digit {v} out of range for wire {w!r}")
            self.accept_rule = (wires, digits)

    def run(self, initial_digits: Sequence[int] | None = None) -> StateVector:
        """Simulate from |0...0> (or the given digits) through every op."""
        if initial_digits is None:
            initial_digits = (0,) * len(self.register)
        state = new_basis_state(self.register, initial_digits)
        for op in self.ops:
            state = apply_gate(state, op)
        return state
