"""Decision procedures over the forrelation feature map.

Two classifiers, both using the instance circuit U_F(x) as the feature map
|phi(x)> = U_F(x) |0...0> with the projector onto |0...0> as measurement:

* VQC rule: predict +1 iff p0(x) > (1 - bias)/2.  Any bias strictly inside
  (7/25, 4999/5000) separates the promise classes exactly, since promise
  positives have p0 >= 9/25 and promise negatives p0 <= 1/10000.
* Two-sample QSVM: train on one engineered sample per class; the dual
  collapses to a one-dimensional concave quadratic with a closed-form
  maximiser alpha = min(1/(1 - k12), C).  Prediction is
  sign(alpha * (p0 - pz) + bias) where pz is the probability of the basis
  state the negative training circuit produces.

Every probability is available exactly (statevector) or as a shot-sampled
frequency; shots=None selects exact mode throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .forrelation import EncodedSample, build_circuit, decode, simulate_instance
from .qstate import apply_circuit, index_to_bits, init_zero, sample_measurements

VQC_BIAS_LOWER = 7 / 25
VQC_BIAS_UPPER = 4999 / 5000
DEGENERATE_KERNEL_TOL = 1e-12
DEFAULT_BOX_C = 1e6   # effectively unconstrained; keeps alpha = 1/(1-k12) unclipped


class DegenerateTrainingSetError(ValueError):
    """The two training samples are indistinguishable under the feature map."""


def default_bias() -> float:
    """Midpoint of the separating interval; maximises margin to both bounds."""
    return 0.5 * (VQC_BIAS_LOWER + VQC_BIAS_UPPER)


@dataclass(frozen=True)
class VqcModel:
    """Bias plus evaluation mode.  shots=None -> exact probabilities."""

    bias: float
    shots: int | None = None
    seed: int = 0

    def __post_init__(self):
        if not -1.0 <= self.bias <= 1.0:
            raise ValueError(f"bias must lie in [-1, 1], got {self.bias}")
        if self.shots is not None and self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")

    @classmethod
    def default_for_forrelation(cls, shots: int | None = None, seed: int = 0) -> "VqcModel":
        return cls(default_bias(), shots, seed)


def _zero_probability(state, shots: int | None, seed: int) -> float:
    if shots is None:
        a = state.amplitudes[0]
        return float(a.real * a.real + a.imag * a.imag)
    counts = sample_measurements(state, shots, seed)
    return counts["0" * state.n_qubits] / shots


def vqc_probability(sample: EncodedSample, shots: int | None = None, seed: int = 0) -> float:
    """p0(x) = |<0...0| U_F(x) |0...0>|^2, exact or shot-estimated."""
    state = simulate_instance(decode(sample))
    return _zero_probability(state, shots, seed)


def vqc_classify(sample: EncodedSample, model: VqcModel) -> int:
    """+1 iff p0 strictly exceeds (1 - bias)/2; ties go to -1."""
    p = vqc_probability(sample, model.shots, model.seed)
    return 1 if p > 0.5 * (1.0 - model.bias) else -1


def kernel(xi: EncodedSample, xj: EncodedSample, shots: int | None = None, seed: int = 0) -> float:
    """Squared feature fidelity |<phi(xi)|phi(xj)>|^2.

    Computed as the |0...0> probability of U_F(xi)^dagger U_F(xj) |0...0>;
    the adjoint is the reversed gate list because Hadamard layers and phase
    flips are self-inverse.
    """
    if (xi.n, xi.k) != (xj.n, xj.k):
        raise ValueError(f"kernel arguments disagree on shape: ({xi.n},{xi.k}) vs ({xj.n},{xj.k})")
    gates = build_circuit(decode(xj)) + list(reversed(build_circuit(decode(xi))))
    state = apply_circuit(init_zero(xi.n), gates)
    value = _zero_probability(state, shots, seed)
    if value > 1.0 + 1e-12:
        raise RuntimeError(f"kernel value exceeds 1: {value!r}")
    return value


@dataclass(frozen=True)
class DualSolution:
    """Two-sample SVM dual solution; the shared multiplier applies to both
    training samples because the equality constraint forces alpha_1 = alpha_2."""

    alpha: float
    bias: float
    x_plus: EncodedSample
    x_minus: EncodedSample
    box_c: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= self.box_c:
            raise ValueError(f"alpha must lie in [0, box_c], got {self.alpha}")


def dual_objective(alpha: float, k12: float) -> float:
    """m=2 dual objective 2*alpha - alpha^2 * (1 - k12) (k(x,x) = 1)."""
    return 2.0 * alpha - alpha * alpha * (1.0 - k12)


def qsvm_train(
    x_plus: EncodedSample,
    x_minus: EncodedSample,
    box_c: float = DEFAULT_BOX_C,
    shots: int | None = None,
    seed: int = 0,
) -> DualSolution:
    """Closed-form dual solution for the two training samples.

    alpha = min(1/(1 - k12), box_c); bias defaults to the midpoint of the
    separating interval (7*alpha/25, 4999*alpha/5000).
    """
    if box_c <= 0:
        raise ValueError(f"box_c must be > 0, got {box_c}")
    k12 = kernel(x_plus, x_minus, shots, seed)
    if k12 >= 1.0 - DEGENERATE_KERNEL_TOL:
        raise DegenerateTrainingSetError(
            f"training samples are indistinguishable under the feature map (k12 = {k12!r})"
        )
    alpha = min(1.0 / (1.0 - k12), box_c)
    bias = alpha * 0.5 * (VQC_BIAS_LOWER + VQC_BIAS_UPPER)
    return DualSolution(alpha, bias, x_plus, x_minus, box_c)


def negative_target_index(x_minus: EncodedSample) -> int:
    """Basis state the negative training circuit maps |0...0> to.

    Requires an engineered negative sample (final state a computational
    basis state up to sign); raises otherwise.
    """
    state = simulate_instance(decode(x_minus))
    p = state.probabilities()
    z = int(p.argmax())
    if abs(p[z] - 1.0) > 1e-12 or z == 0:
        raise ValueError("x_minus is not a constructive negative sample")
    return z


def qsvm_classify(
    s: EncodedSample,
    sol: DualSolution,
    shots: int | None = None,
    seed: int = 0,
) -> int:
    """sign(alpha * (p0 - pz) + bias), with sign(0) -> -1.

    p0 and pz are the probabilities of the bitstrings 0^n and z in
    U_F(s)|0...0>; in sampled mode both come from the same shot batch.
    """
    z = negative_target_index(sol.x_minus)
    state = simulate_instance(decode(s))
    if shots is None:
        p = state.probabilities()
        p0, pz = float(p[0]), float(p[z])
    else:
        counts = sample_measurements(state, shots, seed)
        n = state.n_qubits
        p0 = counts["0" * n] / shots
        pz = counts[index_to_bits(z, n)] / shots
    decision = sol.alpha * (p0 - pz) + sol.bias
    return 1 if decision > 0.0 else -1


def shot_budget_for(epsilon: float, delta: float) -> int:
    """Hoeffding budget: ceil(ln(2/delta) / (2 epsilon^2)) shots guarantee
    |p_hat - p| <= epsilon with probability >= 1 - delta."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return math.ceil(math.log(2.0 / delta) / (2.0 * epsilon * epsilon))
