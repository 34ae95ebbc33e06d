"""k-forrelation instances and three independent evaluations of Phi.

An instance is an ordered list of k restricted Boolean functions over n-bit
inputs: each function is either the constant +1 or (-1)^(product of at most
three input bits).  Phi is the alternating transform-correlation of the
tuple; it equals the |0...0> amplitude of the instance circuit

    U_F = H^n U_fk H^n ... H^n U_f1 H^n

and lies in [-1, 1].  This module provides:

* the multi-hot sample encoding and its inverse,
* phi_bruteforce  - exhaustive 2^(kn)-term sum (the oracle path),
* phi_circuit     - statevector simulation of U_F,
* phi_fixed_ansatz- simulation of the fixed polynomial-depth ansatz that
  contains every <=3-qubit controlled-phase slot with data-selected angles,
* oddk_extend     - parity-flipping instance extension built from the
  three-CZ SWAP gadget.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .qstate import (
    CapacityError,
    Gate,
    StateVector,
    apply_circuit,
    controlled_phase,
    hadamard_all,
    init_zero,
    phase_flip,
)

BRUTE_FORCE_MAX_BITS = 24   # 2^(k*n) summands; ~1.7e7 at the cap
BRUTE_FORCE_CHUNK = 1 << 20  # partition size; the exact integer sum makes it invisible
PHI_BOUND_TOL = 1e-12
IMAG_TOL = 1e-12

_INV_SQRT2 = 2.0 ** -0.5


class MalformedSampleError(ValueError):
    """Encoded sample violates the <=3-ones-per-block restriction."""


@dataclass(frozen=True)
class BooleanFunctionSpec:
    """One restricted Boolean function.

    ``bits`` is the set of input-bit indices in the product; empty means the
    constant function f(x) = +1, nonempty J means f(x) = (-1)^(prod_{j in J} x_j).
    """

    bits: frozenset[int]

    def __post_init__(self):
        if len(self.bits) > 3:
            raise ValueError(f"a function may depend on at most 3 bits, got {sorted(self.bits)}")
        if not all(isinstance(b, int) and b >= 1 for b in self.bits):
            raise ValueError(f"bit indices must be integers >= 1, got {sorted(self.bits)!r}")

    @property
    def is_constant(self) -> bool:
        return not self.bits

    def evaluate(self, x: int) -> int:
        """f(x) for a basis input given as an integer (bit j-1 = input bit j)."""
        if not self.bits:
            return 1
        for b in self.bits:
            if not (x >> (b - 1)) & 1:
                return 1
        return -1


def function_of(*bits: int) -> BooleanFunctionSpec:
    return BooleanFunctionSpec(frozenset(bits))


CONSTANT = function_of()


@dataclass(frozen=True)
class ForrelationInstance:
    """Ordered tuple of k restricted functions over n input bits."""

    n: int
    functions: tuple[BooleanFunctionSpec, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if len(self.functions) < 1:
            raise ValueError("an instance needs at least one function")
        for f in self.functions:
            for b in f.bits:
                if b > self.n:
                    raise ValueError(f"function bit {b} exceeds n = {self.n}")

    @property
    def k(self) -> int:
        return len(self.functions)

    @property
    def promise_complete_form(self) -> bool:
        """True iff some function depends on exactly three bits."""
        return any(len(f.bits) == 3 for f in self.functions)


def instance_of(n: int, *bit_sets) -> ForrelationInstance:
    """Shorthand: instance_of(3, {1,3}, (), {2})."""
    return ForrelationInstance(n, tuple(BooleanFunctionSpec(frozenset(b)) for b in bit_sets))


@dataclass(frozen=True)
class EncodedSample:
    """Multi-hot encoding: k blocks of n bits, block i the indicator of
    function i's bit set.  The classifier-facing data point."""

    n: int
    k: int
    bits: tuple[int, ...]

    def __post_init__(self):
        if len(self.bits) != self.n * self.k:
            raise MalformedSampleError(
                f"expected {self.n * self.k} bits for n={self.n}, k={self.k}, got {len(self.bits)}"
            )
        if not all(b in (0, 1) for b in self.bits):
            raise MalformedSampleError("sample bits must be 0 or 1")
        for i in range(self.k):
            if sum(self.block(i)) > 3:
                raise MalformedSampleError(f"block {i} has more than 3 ones")

    def block(self, i: int) -> tuple[int, ...]:
        return self.bits[i * self.n : (i + 1) * self.n]

    def as_string(self) -> str:
        return "".join(str(b) for b in self.bits)


def encode(inst: ForrelationInstance) -> EncodedSample:
    bits = []
    for f in inst.functions:
        bits.extend(1 if j in f.bits else 0 for j in range(1, inst.n + 1))
    return EncodedSample(inst.n, inst.k, tuple(bits))


def decode(sample: EncodedSample) -> ForrelationInstance:
    functions = []
    for i in range(sample.k):
        block = sample.block(i)
        functions.append(BooleanFunctionSpec(frozenset(j + 1 for j, b in enumerate(block) if b)))
    return ForrelationInstance(sample.n, tuple(functions))


def sample_from_string(n: int, k: int, bits: str) -> EncodedSample:
    if not all(c in "01" for c in bits):
        raise MalformedSampleError(f"bits string must be 0/1, got {bits!r}")
    return EncodedSample(n, k, tuple(int(c) for c in bits))


# ---------------------------------------------------------------------------
# Phi checks shared by all evaluation paths


def _checked_phi(value: float) -> float:
    if abs(value) > 1.0 + PHI_BOUND_TOL:
        raise RuntimeError(f"|Phi| exceeds 1: {value!r}")
    return float(value)


def _phi_from_state(state: StateVector) -> float:
    a = complex(state.amplitudes[0])
    if abs(a.imag) > IMAG_TOL:
        raise RuntimeError(f"instance circuits are real-valued; got imaginary part {a.imag!r}")
    return _checked_phi(a.real)


# ---------------------------------------------------------------------------
# Oracle path: exhaustive sum, vectorised and chunked, independent of the
# simulator.


def _parity(v: np.ndarray) -> np.ndarray:
    v = v.copy()
    v ^= v >> 16
    v ^= v >> 8
    v ^= v >> 4
    v ^= v >> 2
    v ^= v >> 1
    return (v & 1).astype(bool)


def phi_bruteforce(inst: ForrelationInstance) -> float:
    """Phi by direct summation over all 2^(k*n) index tuples.

    Each summand is a product of k function values and k-1 inner-product
    signs, i.e. +-1.  The accumulated sum is exact integer arithmetic; only
    the final normalisation by 2^((k+1)n/2) rounds.
    """
    n, k = inst.n, inst.k
    total_bits = n * k
    if total_bits > BRUTE_FORCE_MAX_BITS:
        raise CapacityError(
            f"brute force is capped at k*n <= {BRUTE_FORCE_MAX_BITS} total bits, got {total_bits}"
        )
    n_mask = (1 << n) - 1
    f_masks = []
    for f in inst.functions:
        m = 0
        for b in f.bits:
            m |= 1 << (b - 1)
        f_masks.append(m)

    size = 1 << total_bits
    total = 0
    chunk = BRUTE_FORCE_CHUNK
    for start in range(0, size, chunk):
        stop = min(start + chunk, size)
        t = np.arange(start, stop, dtype=np.int64)
        xs = [(t >> (i * n)) & n_mask for i in range(k)]
        neg = np.zeros(t.shape, dtype=bool)
        for xi, mask in zip(xs, f_masks):
            if mask:
                neg ^= (xi & mask) == mask
        for i in range(k - 1):
            neg ^= _parity(xs[i] & xs[i + 1])
        total += (stop - start) - 2 * int(np.count_nonzero(neg))
    return _checked_phi(total / math.sqrt(float(1 << ((k + 1) * n))))


# ---------------------------------------------------------------------------
# Circuit path


def build_circuit(inst: ForrelationInstance) -> list[Gate]:
    """Gate list of U_F in application order: 2k+1 gates, Hadamard layers
    alternating with one phase flip per function.  Constant functions emit
    the empty-target placeholder so direct and ansatz circuits align
    layer-for-layer."""
    gates = [hadamard_all()]
    for f in inst.functions:
        gates.append(phase_flip(*sorted(f.bits)))
        gates.append(hadamard_all())
    return gates


def simulate_instance(inst: ForrelationInstance) -> StateVector:
    """Final state U_F |0...0>."""
    return apply_circuit(init_zero(inst.n), build_circuit(inst))


def phi_circuit(inst: ForrelationInstance) -> float:
    """Phi as the |0...0> amplitude of the simulated instance circuit."""
    return _phi_from_state(simulate_instance(inst))


# ---------------------------------------------------------------------------
# Fixed ansatz: every <=3-qubit controlled-phase slot, angles selected by the
# encoded block.


@lru_cache(maxsize=None)
def _ansatz_slots(n: int) -> tuple[tuple[int, ...], ...]:
    slots = []
    for size in (1, 2, 3):
        slots.extend(itertools.combinations(range(1, n + 1), size))
    return tuple(slots)


def ansatz_parameter_count(n: int, k: int) -> int:
    """Number of controlled-phase slots: k * (C(n,1)+C(n,2)+C(n,3))."""
    return k * (n + n * (n - 1) // 2 + n * (n - 1) * (n - 2) // 6)


def build_fixed_ansatz(sample: EncodedSample) -> list[Gate]:
    """Fixed-skeleton circuit equivalent to build_circuit(decode(sample)).

    Block i selects angle pi for the one slot matching its indicator set and
    0 everywhere else (a slot angle is pi * prod_{j in J} x_j * prod_{l not
    in J} (1 - x_l)).  All slots are always emitted; the skeleton never
    depends on the data.
    """
    n = sample.n
    gates = [hadamard_all()]
    for i in range(sample.k):
        ones = frozenset(j + 1 for j, b in enumerate(sample.block(i)) if b)
        for slot in _ansatz_slots(n):
            angle = math.pi if frozenset(slot) == ones else 0.0
            gates.append(controlled_phase(slot, angle))
        gates.append(hadamard_all())
    return gates


def simulate_fixed_ansatz(sample: EncodedSample) -> StateVector:
    return apply_circuit(init_zero(sample.n), build_fixed_ansatz(sample))


def phi_fixed_ansatz(sample: EncodedSample) -> float:
    return _phi_from_state(simulate_fixed_ansatz(sample))


# ---------------------------------------------------------------------------
# Parity-flipping extension (three-CZ SWAP gadget)


def gadget_gate_sequence() -> list[Gate]:
    """The two-qubit identity H CZ H CZ H CZ H = SWAP o H (exact, no phase)."""
    gates = [hadamard_all()]
    for _ in range(3):
        gates.append(phase_flip(1, 2))
        gates.append(hadamard_all())
    return gates


ODD_N_PHI_SCALE = _INV_SQRT2
"""Phi rescaling incurred by oddk_extend when n is odd (see oddk_extend)."""


class OddKExtension(NamedTuple):
    instance: ForrelationInstance
    extended: bool
    phi_scale: float


def _gadget_chain(pairs: Sequence[tuple[int, int]]) -> list[BooleanFunctionSpec]:
    funcs: list[BooleanFunctionSpec] = []
    for idx, (a, b) in enumerate(pairs):
        if idx:
            funcs.append(CONSTANT)
        funcs.extend([function_of(a, b)] * 3)
    return funcs


def oddk_extend(inst: ForrelationInstance) -> OddKExtension:
    """Append 4*ceil(n/2) - 1 functions to flip an even k to odd.

    The appended block applies the three-CZ gadget to the non-overlapping
    pairs (1,2), (3,4), ..., with one constant function between consecutive
    gadgets.  For even n the extended circuit equals a qubit permutation
    composed with the original, so Phi is preserved exactly.

    For odd n the block needs an ancilla qubit (the output instance has n+1
    qubits, ancilla last, pair (n, n+1)); the ancilla then absorbs one
    uncancelled Hadamard and the extended Phi equals ODD_N_PHI_SCALE *
    original Phi.  That factor is intrinsic: no arrangement of
    4*ceil(n/2)-1 restricted functions (any products of <=3 bits, with or
    without the ancilla) can preserve Phi for all instances when n is odd --
    verified by exhaustive search over every such block.  The returned
    phi_scale reports which contract the caller got.

    Instances whose k is already odd are returned unchanged with
    extended=False.
    """
    if inst.k % 2 == 1:
        return OddKExtension(inst, False, 1.0)
    if inst.n < 2:
        raise ValueError("oddk_extend needs n >= 2")
    n_out = inst.n if inst.n % 2 == 0 else inst.n + 1
    pairs = [(q, q + 1) for q in range(1, n_out, 2)]
    appended = _gadget_chain(pairs)
    extended = ForrelationInstance(n_out, inst.functions + tuple(appended))
    scale = 1.0 if inst.n % 2 == 0 else ODD_N_PHI_SCALE
    return OddKExtension(extended, True, scale)


def oddk_extension_count(n: int) -> int:
    """Number of functions oddk_extend appends: 4*ceil(n/2) - 1."""
    return 4 * ((n + 1) // 2) - 1
