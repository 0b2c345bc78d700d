"""Run records and resource accounting for built circuits.

Logical depth is greedy layering: ops are visited in emission order and
each lands on the earliest layer after the last use of any wire it
touches.  Ops sharing a ``layer_tag`` are treated as one compound gate
(wire set = union), which implements the one-layer accounting for
fan-out blocks and controlled charge phases; tags live only in memory,
never in the exchange format.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field

import numpy as np

from .sim import Circuit, StateVector

_SYSTEM_WIRE = re.compile(r"^s\d+$")


def _system_wires(circuit: Circuit) -> tuple:
    wires = circuit.meta.get("system_wires")
    if wires is not None:
        return tuple(wires)
    return tuple(w for w in circuit.register.ids if isinstance(w, str) and _SYSTEM_WIRE.match(w))


def logical_depth(circuit: Circuit) -> int:
    groups: list[set] = []
    tagged: dict[str, set] = {}
    for op in circuit.ops:
        wires = set(op.wires())
        if op.layer_tag is None:
            groups.append(wires)
        elif op.layer_tag in tagged:
            tagged[op.layer_tag].update(wires)
        else:
            tagged[op.layer_tag] = wires
            groups.append(wires)
    last: dict = {}
    depth = 0
    for wires in groups:
        layer = 1 + max((last.get(w, -1) for w in wires), default=-1)
        for w in wires:
            last[w] = layer
        depth = max(depth, layer + 1)
    return depth


def ancilla_census(circuit: Circuit) -> list[list[int]]:
    """Non-system wires grouped by dimension, as sorted [dimension, count] pairs."""
    system = set(_system_wires(circuit))
    counts: dict[int, int] = {}
    for wire, dim in zip(circuit.register.ids, circuit.register.dims):
        if wire not in system:
            counts[dim] = counts.get(dim, 0) + 1
    return [[dim, counts[dim]] for dim in sorted(counts)]


def count_resources(circuit: Circuit) -> tuple[int, int, list[list[int]]]:
    """(gate count, logical depth, ancilla census) of a built circuit."""
    return len(circuit.ops), logical_depth(circuit), ancilla_census(circuit)


def embedded_reference(circuit: Circuit, oracle: StateVector, fixed: dict) -> StateVector:
    """Oracle on the system wires, fixed digits everywhere else.

    ``fixed`` maps every non-system wire to its expected digit; wires not
    listed default to 0.
    """
    reg = circuit.register
    system = _system_wires(circuit)
    sys_dims = tuple(reg.dim(w) for w in system)
    if sys_dims != oracle.register.dims:
        raise ValueError("oracle register does not match the circuit's system wires")
    others = tuple(w for w in reg.ids if w not in set(system))
    out = np.zeros(reg.size, dtype=np.complex128)
    view = out.reshape(reg.dims, order="F")
    pos = [reg.position(w) for w in system]
    moved = np.moveaxis(view, pos, range(len(pos)))
    sel = (slice(None),) * len(system) + tuple(int(fixed.get(w, 0)) for w in others)
    moved[sel] = oracle.amplitudes.reshape(sys_dims, order="F")
    return StateVector(reg, out)


@dataclass
class RunReport:
    """One verification record; all fields are JSON-native for round-tripping."""

    spec: dict
    acceptance_probability: float
    conditional_fidelity: float
    expected_repetitions: float
    gate_count: int
    logical_depth: int
    ancilla_census: list
    optimal_parameter: object = None
    seed: int | None = None
    wallclock_ms: int = 0
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "spec": self.spec,
            "acceptance_probability": self.acceptance_probability,
            "conditional_fidelity": self.conditional_fidelity,
            "expected_repetitions": self.expected_repetitions,
            "gate_count": self.gate_count,
            "logical_depth": self.logical_depth,
            "ancilla_census": self.ancilla_census,
            "optimal_parameter": self.optimal_parameter,
            "seed": self.seed,
            "wallclock_ms": self.wallclock_ms,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        # floats serialize via repr: shortest form that parses back exactly
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls(**json.loads(text))

    CSV_HEADER = (
        "family,n,s,k,kvec,method,acceptance_probability,conditional_fidelity,"
        "expected_repetitions,gate_count,logical_depth,ancilla_census,"
        "optimal_parameter,seed,wallclock_ms,notes"
    )

    def to_csv_row(self) -> str:
        spec = self.spec
        kvec = spec.get("kvec")
        param = self.optimal_parameter
        row = [
            spec.get("family", ""),
            spec.get("n", ""),
            spec.get("s", ""),
            spec.get("k", ""),
            "" if kvec is None else ",".join(str(v) for v in kvec),
            spec.get("method", ""),
            repr(self.acceptance_probability),
            repr(self.conditional_fidelity),
            repr(self.expected_repetitions),
            self.gate_count,
            self.logical_depth,
            ";".join(f"{d}:{c}" for d, c in self.ancilla_census),
            param if not isinstance(param, (list, tuple)) else ",".join(repr(v) for v in param),
            "" if self.seed is None else self.seed,
            self.wallclock_ms,
            " | ".join(self.notes),
        ]
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerow(row)
        return buf.getvalue().rstrip("\n")


def spec_fields(circuit: Circuit) -> dict:
    """Spec block of a report, pulled from builder metadata."""
    meta = circuit.meta
    out = {"family": meta.get("family"), "n": meta.get("n"), "method": meta.get("method")}
    if meta.get("family") == "spin-s":
        out["s"] = meta.get("twice_s", 0) / 2.0
        out["k"] = meta.get("k")
    else:
        out["kvec"] = list(meta.get("kvec", ()))
    return out
