"""Dense statevector engine for forrelation-style circuits.

The gate family is deliberately small: global Hadamard layers, phase flips
conditioned on up to three qubits (Z / CZ / CCZ), the controlled phase
rotation diag(1, ..., 1, e^{i*angle}) on the all-ones subspace of its
targets, and SWAP.  Nothing else is needed and nothing else is provided.

Conventions (fixed; everything downstream assumes them):

* Qubits are numbered 1..n.  Qubit j maps to bit j-1 of the basis-state
  integer, so qubit 1 is the least significant bit.
* Bitstrings render qubit 1 first: "011" means qubit1=0, qubit2=1,
  qubit3=1 and denotes basis index 6.
* A phase flip with an empty target set is the identity placeholder used
  for constant Boolean functions.
* ControlledPhase(targets, pi) is computed with an exact -1 factor so it
  coincides bit-for-bit with PhaseFlip(targets).
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 26          # 2^26 complex amplitudes = 1 GiB; refuse above
UNITARY_MAX_QUBITS = 6   # dense-matrix construction is for verification only
NORM_TOL = 1e-12


class CapacityError(ValueError):
    """Requested size exceeds a documented simulator cap."""


class GateKind(Enum):
    HADAMARD_ALL = "hadamard_all"
    PHASE_FLIP = "phase_flip"
    CONTROLLED_PHASE = "controlled_phase"
    SWAP = "swap"


@dataclass(frozen=True)
class Gate:
    """One circuit element.  Build instances through the factory functions
    below; they enforce the per-kind target arities."""

    kind: GateKind
    targets: frozenset[int] = frozenset()
    angle: float = 0.0


def _checked_targets(targets: Iterable[int], low: int, high: int) -> frozenset[int]:
    ts = frozenset(targets)
    if not all(isinstance(t, int) and t >= 1 for t in ts):
        raise ValueError(f"qubit indices must be integers >= 1, got {sorted(ts)!r}")
    if not (low <= len(ts) <= high):
        raise ValueError(f"expected between {low} and {high} distinct targets, got {sorted(ts)}")
    return ts


def hadamard_all() -> Gate:
    """One global layer: H applied to every qubit."""
    return Gate(GateKind.HADAMARD_ALL)


def phase_flip(*targets: int) -> Gate:
    """Multiply the amplitude of |z> by (-1) iff every target bit of z is 1.

    Zero targets is the identity placeholder, one is Z, two CZ, three CCZ.
    """
    return Gate(GateKind.PHASE_FLIP, _checked_targets(targets, 0, 3))


def controlled_phase(targets: Iterable[int], angle: float) -> Gate:
    """Multiply the amplitude of |z> by e^{i*angle} iff every target bit is 1.

    angle=pi reproduces phase_flip on the same targets exactly.
    """
    return Gate(GateKind.CONTROLLED_PHASE, _checked_targets(targets, 1, 3), float(angle))


def swap(a: int, b: int) -> Gate:
    """Exchange the states of qubits a and b."""
    return Gate(GateKind.SWAP, _checked_targets((a, b), 2, 2))


@dataclass
class StateVector:
    """2^n complex amplitudes with unit norm.

    A value type: move it freely between threads, mutate from one writer.
    Gate application updates ``amplitudes`` in place.
    """

    n_qubits: int
    amplitudes: np.ndarray

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def probabilities(self) -> np.ndarray:
        a = self.amplitudes
        return a.real * a.real + a.imag * a.imag


def init_zero(n: int) -> StateVector:
    """Prepare |0...0> on n qubits."""
    if not isinstance(n, int) or n < 1 or n > MAX_QUBITS:
        raise CapacityError(f"n must be in [1, {MAX_QUBITS}], got {n}")
    amp = np.zeros(1 << n, dtype=np.complex128)
    amp[0] = 1.0
    return StateVector(n, amp)


def bits_to_index(bits: str) -> int:
    """Basis index of a qubit-1-first bitstring."""
    z = 0
    for j, c in enumerate(bits):
        if c == "1":
            z |= 1 << j
        elif c != "0":
            raise ValueError(f"bitstring must contain only 0/1, got {bits!r}")
    return z


def index_to_bits(z: int, n: int) -> str:
    """Qubit-1-first bitstring for basis index z."""
    return "".join("1" if (z >> j) & 1 else "0" for j in range(n))


def amplitude(state: StateVector, z: str) -> complex:
    """Amplitude of basis state z (given as a qubit-1-first bitstring)."""
    if len(z) != state.n_qubits:
        raise ValueError(f"bitstring length {len(z)} != n_qubits {state.n_qubits}")
    return complex(state.amplitudes[bits_to_index(z)])


def _check_norm(amp: np.ndarray) -> None:
    nrm = float(np.einsum("i,i->", amp.real, amp.real) + np.einsum("i,i->", amp.imag, amp.imag))
    if abs(nrm - 1.0) > NORM_TOL:
        raise RuntimeError(f"statevector norm drifted: sum |a|^2 = {nrm!r}")


def _hadamard_all_inplace(amp: np.ndarray, n: int) -> None:
    # n butterfly passes, one per qubit, no intermediate allocations.
    for q in range(n):
        h = 1 << q
        view = amp.reshape(-1, 2, h)
        top = view[:, 0, :]
        bot = view[:, 1, :]
        top += bot          # a+b
        bot *= -2.0
        bot += top          # (a+b) - 2b = a-b
    amp *= 2.0 ** (-0.5 * n)


def _ones_selector(n: int, targets: frozenset[int]) -> tuple:
    # Axis for qubit q in amp.reshape([2]*n) is n-q (axis 0 = most significant).
    sel: list = [slice(None)] * n
    for q in targets:
        sel[n - q] = 1
    return tuple(sel)


def _phase_multiply(amp: np.ndarray, n: int, targets: frozenset[int], factor: complex) -> None:
    view = amp.reshape((2,) * n)
    view[_ones_selector(n, targets)] *= factor


def _phase_factor(angle: float) -> complex:
    if angle == 0.0:
        return 1.0
    if angle == math.pi:
        return -1.0  # exact, so angle=pi is bit-identical to a phase flip
    return complex(math.cos(angle), math.sin(angle))


def _swap_inplace(amp: np.ndarray, n: int, targets: frozenset[int]) -> None:
    a, b = sorted(targets)
    view = amp.reshape((2,) * n)
    sel = [slice(None)] * n
    sel[n - a], sel[n - b] = 0, 1
    lo_hi = tuple(sel)
    sel[n - a], sel[n - b] = 1, 0
    hi_lo = tuple(sel)
    tmp = view[lo_hi].copy()
    view[lo_hi] = view[hi_lo]
    view[hi_lo] = tmp


def _apply_inplace(amp: np.ndarray, n: int, gate: Gate) -> bool:
    """Apply the gate; returns False when it is a no-op (identity placeholder
    or zero-angle phase), so callers can skip the norm re-check."""
    if gate.kind is GateKind.HADAMARD_ALL:
        _hadamard_all_inplace(amp, n)
    elif gate.kind is GateKind.PHASE_FLIP:
        if not gate.targets:
            return False
        _phase_multiply(amp, n, gate.targets, -1.0)
    elif gate.kind is GateKind.CONTROLLED_PHASE:
        factor = _phase_factor(gate.angle)
        if factor == 1.0:
            return False
        _phase_multiply(amp, n, gate.targets, factor)
    elif gate.kind is GateKind.SWAP:
        _swap_inplace(amp, n, gate.targets)
    else:  # pragma: no cover
        raise ValueError(f"unknown gate kind {gate.kind!r}")
    return True


def _validate_gate(gate: Gate, n: int) -> None:
    for q in gate.targets:
        if q > n:
            raise ValueError(f"gate targets qubit {q} but state has {n} qubits")


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Apply one gate, updating the state in place.  Returns the same object.

    Norm is re-checked after every application (|1 - sum|a|^2| <= 1e-12).
    """
    _validate_gate(gate, state.n_qubits)
    if _apply_inplace(state.amplitudes, state.n_qubits, gate):
        _check_norm(state.amplitudes)
    return state


def apply_circuit(state: StateVector, gates: Sequence[Gate]) -> StateVector:
    for g in gates:
        apply_gate(state, g)
    return state


def sample_measurements(state: StateVector, shots: int, seed: int) -> Counter:
    """shots i.i.d. computational-basis draws; deterministic for a given seed.

    Returns a Counter mapping qubit-1-first bitstrings to counts.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    p = state.probabilities()
    p = p / p.sum()
    rng = np.random.default_rng(seed)
    draws = rng.choice(p.size, size=shots, p=p)
    values, counts = np.unique(draws, return_counts=True)
    n = state.n_qubits
    return Counter({index_to_bits(int(v), n): int(c) for v, c in zip(values, counts)})


def unitary_of(gates: Sequence[Gate], n: int) -> np.ndarray:
    """Dense 2^n x 2^n matrix of the gate sequence, for tiny-scale checks.

    Column z is the image of basis state z; ordering matches StateVector
    indexing (qubit 1 = least significant bit).
    """
    if not isinstance(n, int) or n < 1 or n > UNITARY_MAX_QUBITS:
        raise CapacityError(f"unitary_of supports 1 <= n <= {UNITARY_MAX_QUBITS}, got {n}")
    for g in gates:
        _validate_gate(g, n)
    dim = 1 << n
    out = np.empty((dim, dim), dtype=np.complex128)
    for z in range(dim):
        col = np.zeros(dim, dtype=np.complex128)
        col[z] = 1.0
        for g in gates:
            _apply_inplace(col, n, g)
        out[:, z] = col
    return out


def equal_up_to_global_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-12) -> bool:
    """True when a == phase * b elementwise within tol, for |phase| = 1."""
    a = np.asarray(a, dtype=np.complex128).ravel()
    b = np.asarray(b, dtype=np.complex128).ravel()
    if a.shape != b.shape:
        return False
    ref = int(np.argmax(np.abs(b)))
    if abs(b[ref]) <= tol:
        return bool(np.max(np.abs(a)) <= tol)
    phase = a[ref] / b[ref]
    if abs(abs(phase) - 1.0) > tol:
        return False
    return bool(np.max(np.abs(a - phase * b)) <= tol)
