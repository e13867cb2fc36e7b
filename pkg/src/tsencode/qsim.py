"""Dense state-vector simulation of small RX/RY/CNOT circuits with exact Pauli-Z readout.

Basis convention: amplitude index ``i`` encodes the register in binary with wire 0 as
the most significant bit, so on two wires index 2 is |10> (wire 0 excited).

Gates act wire-locally on the full vector and broadcast over leading batch axes; the
2x2 update is elementwise, so a batched evaluation is bit-identical to evaluating each
input on its own.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CapacityError, GateError, ShapeError, ValidationError, WireIndexError

MAX_WIRES = 12


def rx_matrix(phi: float) -> np.ndarray:
    c, s = np.cos(phi / 2), np.sin(phi / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry_matrix(phi: float) -> np.ndarray:
    c, s = np.cos(phi / 2), np.sin(phi / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def ring_pattern(w: int) -> tuple[tuple[int, int], ...]:
    """(0,1), (1,2), ..., (w-1,0). Empty for a single wire."""
    if w < 2:
        return ()
    if w == 2:
        return ((0, 1),)
    return tuple((k, (k + 1) % w) for k in range(w))


def chain_pattern(w: int) -> tuple[tuple[int, int], ...]:
    return tuple((k, k + 1) for k in range(w - 1))


@dataclass(frozen=True)
class CircuitSpec:
    """``layers`` rounds of (RX on every wire, then the layer's CNOTs in order).

    ``rx_angles[l][k]`` is the RX angle on wire k in layer l; ``cnot_pattern[l]`` lists
    that layer's (control, target) pairs.
    """

    wires: int
    layers: int
    rx_angles: np.ndarray
    cnot_pattern: tuple[tuple[tuple[int, int], ...], ...]

    def __post_init__(self):
        w, L = int(self.wires), int(self.layers)
        if not 1 <= w <= MAX_WIRES:
            raise CapacityError(f"circuit needs 1..{MAX_WIRES} wires, got {w}")
        if L < 0:
            raise ShapeError(f"layer count must be >= 0, got {L}")
        angles = np.array(self.rx_angles, dtype=float).reshape(-1, w) if L else np.zeros((0, w))
        if angles.shape != (L, w):
            raise ShapeError(f"rx_angles must be {L}x{w}, got {angles.shape}")
        if not np.all(np.isfinite(angles)):
            raise ValidationError("rx_angles contain non-finite values")
        angles.setflags(write=False)
        pattern = tuple(tuple((int(c), int(t)) for c, t in layer) for layer in self.cnot_pattern)
        if len(pattern) != L:
            raise ShapeError(f"cnot_pattern must have one entry per layer ({L}), got {len(pattern)}")
        for layer in pattern:
            for c, t in layer:
                if not (0 <= c < w and 0 <= t < w):
                    raise WireIndexError(f"CNOT ({c}, {t}) outside wires 0..{w - 1}")
                if c == t:
                    raise GateError(f"CNOT control equals target ({c})")
        object.__setattr__(self, "wires", w)
        object.__setattr__(self, "layers", L)
        object.__setattr__(self, "rx_angles", angles)
        object.__setattr__(self, "cnot_pattern", pattern)

    def to_json(self) -> dict:
        return {
            "wires": self.wires,
            "layers": self.layers,
            "rx_angles": [[float(a) for a in row] for row in self.rx_angles],
            "cnot_pattern": [[[c, t] for c, t in layer] for layer in self.cnot_pattern],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CircuitSpec":
        return cls(obj["wires"], obj["layers"], obj["rx_angles"], obj["cnot_pattern"])

    def __eq__(self, other):
        if not isinstance(other, CircuitSpec):
            return NotImplemented
        return (
            self.wires == other.wires
            and self.layers == other.layers
            and np.array_equal(self.rx_angles, other.rx_angles)
            and self.cnot_pattern == other.cnot_pattern
        )

    __hash__ = None


# --- raw array kernels (leading batch axes allowed) ---------------------------


def _n_wires(amps: np.ndarray) -> int:
    w = amps.shape[-1].bit_length() - 1
    if amps.shape[-1] != 1 << w:
        raise ShapeError(f"state length {amps.shape[-1]} is not a power of two")
    return w


def _check_wire(wire: int, w: int) -> None:
    if not 0 <= wire < w:
        raise WireIndexError(f"wire {wire} outside register of {w} wires")


def _apply_1q(amps: np.ndarray, wire: int, m: np.ndarray) -> np.ndarray:
    w = _n_wires(amps)
    _check_wire(wire, w)
    batch = amps.shape[:-1]
    v = amps.reshape(*batch, 1 << wire, 2, 1 << (w - wire - 1))
    a0, a1 = v[..., 0, :], v[..., 1, :]
    out = np.empty_like(v)
    out[..., 0, :] = m[0, 0] * a0 + m[0, 1] * a1
    out[..., 1, :] = m[1, 0] * a0 + m[1, 1] * a1
    return out.reshape(amps.shape)


def _cnot_permutation(w: int, control: int, target: int) -> np.ndarray:
    idx = np.arange(1 << w)
    cbit = 1 << (w - 1 - control)
    tbit = 1 << (w - 1 - target)
    return np.where(idx & cbit, idx ^ tbit, idx)


def _apply_cnot(amps: np.ndarray, control: int, target: int) -> np.ndarray:
    w = _n_wires(amps)
    _check_wire(control, w)
    _check_wire(target, w)
    if control == target:
        raise GateError(f"CNOT control equals target ({control})")
    # fancy indexing yields a non-C-ordered result; later reductions must see one fixed layout
    return np.ascontiguousarray(amps[..., _cnot_permutation(w, control, target)])


def _expect_z(amps: np.ndarray, wire: int) -> np.ndarray:
    w = _n_wires(amps)
    _check_wire(wire, w)
    amps = np.ascontiguousarray(amps)
    p = (amps.real**2 + amps.imag**2).reshape(*amps.shape[:-1], 1 << wire, 2, 1 << (w - wire - 1))
    return p[..., 0, :].sum(axis=(-2, -1)) - p[..., 1, :].sum(axis=(-2, -1))


# --- value-type API ------------------------------------------------------------


@dataclass(frozen=True)
class QuantumState:
    amplitudes: np.ndarray
    wires: int

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex)
        if a.shape != (1 << self.wires,):
            raise ShapeError(f"{self.wires} wires need {1 << self.wires} amplitudes, got shape {a.shape}")
        norm = float(np.sum(np.abs(a) ** 2))
        if abs(norm - 1.0) > 1e-9:
            raise ValidationError(f"state is not normalized (|psi|^2 = {norm})")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


def init_state(w: int) -> QuantumState:
    if not 1 <= w <= MAX_WIRES:
        raise CapacityError(f"register size must be 1..{MAX_WIRES}, got {w}")
    a = np.zeros(1 << w, dtype=complex)
    a[0] = 1.0
    return QuantumState(a, w)


def apply_rx(state: QuantumState, wire: int, phi: float) -> QuantumState:
    return QuantumState(_apply_1q(state.amplitudes, wire, rx_matrix(phi)), state.wires)


def apply_ry(state: QuantumState, wire: int, phi: float) -> QuantumState:
    return QuantumState(_apply_1q(state.amplitudes, wire, ry_matrix(phi)), state.wires)


def apply_cnot(state: QuantumState, control: int, target: int) -> QuantumState:
    return QuantumState(_apply_cnot(state.amplitudes, control, target), state.wires)


def expect_z(state: QuantumState, wire: int) -> float:
    return float(_expect_z(state.amplitudes, wire))


def run_circuit_batch(spec: CircuitSpec, inputs: np.ndarray) -> np.ndarray:
    """Encode each row of a B x w input matrix; returns B x w Pauli-Z expectations.

    Each wire k starts in |0>, is rotated by RY(pi * input[k]), then the circuit's layers
    run in order and every wire is read out exactly.
    """
    x = np.asarray(inputs, dtype=float)
    if x.ndim != 2 or x.shape[1] != spec.wires:
        raise ShapeError(f"inputs must be B x {spec.wires}, got shape {x.shape}")
    if not np.all(np.isfinite(x)) or np.any((x < 0) | (x > 1)):
        raise ValidationError("circuit inputs must lie in [0, 1]; normalize before encoding")
    w = spec.wires
    amps = np.zeros((x.shape[0], 1 << w), dtype=complex)
    amps[:, 0] = 1.0
    for k in range(w):
        c = np.cos(np.pi * x[:, k] / 2)[:, None, None]
        s = np.sin(np.pi * x[:, k] / 2)[:, None, None]
        v = amps.reshape(x.shape[0], 1 << k, 2, 1 << (w - k - 1))
        a0, a1 = v[..., 0, :], v[..., 1, :]
        out = np.empty_like(v)
        out[..., 0, :] = c * a0 - s * a1
        out[..., 1, :] = s * a0 + c * a1
        amps = out.reshape(amps.shape)
    for l in range(spec.layers):
        for k in range(w):
            amps = _apply_1q(amps, k, rx_matrix(spec.rx_angles[l, k]))
        for c, t in spec.cnot_pattern[l]:
            amps = _apply_cnot(amps, c, t)
    return np.stack([_expect_z(amps, k) for k in range(w)], axis=-1)


def run_circuit(spec: CircuitSpec, inputs: Sequence[float]) -> np.ndarray:
    x = np.asarray(inputs, dtype=float)
    if x.shape != (spec.wires,):
        raise ShapeError(f"input must have length {spec.wires}, got shape {x.shape}")
    return run_circuit_batch(spec, x[None, :])[0]
