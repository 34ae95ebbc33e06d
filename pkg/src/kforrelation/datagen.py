"""Labeled k-forrelation datasets.

Two sources of samples:

* engineered training pairs: a positive whose circuit fixes |0...0> exactly
  (f1 = f3 = a three-bit product, rest constant) and a negative whose
  circuit lands on a different basis state (f1 a single bit, f2 a three-bit
  product, rest constant);
* rejection-sampled test instances: uniform draws over the restricted
  function family, kept only when exact simulation puts Phi inside a
  promise band (positive: Phi >= 3/5, negative: |Phi| <= 1/100).

Labels are always derived from exact simulation, never from shots.  The
file format is line-delimited JSON: one header record carrying the
generation spec, then one record per sample with fields n, k, bits, label,
phi, provenance (order normative).
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np

from .forrelation import (
    CONSTANT,
    BooleanFunctionSpec,
    EncodedSample,
    ForrelationInstance,
    MalformedSampleError,
    encode,
    function_of,
    phi_circuit,
    sample_from_string,
    simulate_instance,
)

POSITIVE_PHI_MIN = 3 / 5
NEGATIVE_PHI_MAX = 1 / 100
CONSTRUCTIVE_TOL = 1e-12

PROVENANCE_CONSTRUCTIVE = "constructive"
PROVENANCE_REJECTION = "rejection_sampled"


class GenerationError(RuntimeError):
    """The requested dataset cannot be produced."""


class DatasetFormatError(ValueError):
    """A dataset file line failed to parse or validate."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


@dataclass(frozen=True)
class LabeledSample:
    sample: EncodedSample
    label: int
    phi: float
    provenance: str

    def __post_init__(self):
        if self.label not in (1, -1):
            raise ValueError(f"label must be +1 or -1, got {self.label}")
        if self.provenance not in (PROVENANCE_CONSTRUCTIVE, PROVENANCE_REJECTION):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.label == 1 and not self.phi >= POSITIVE_PHI_MIN:
            raise ValueError(f"positive label requires phi >= {POSITIVE_PHI_MIN}, got {self.phi}")
        if self.label == -1 and not abs(self.phi) <= NEGATIVE_PHI_MAX:
            raise ValueError(f"negative label requires |phi| <= {NEGATIVE_PHI_MAX}, got {self.phi}")


@dataclass(frozen=True)
class DatasetSpec:
    n: int
    k: int
    count_pos: int
    count_neg: int
    seed: int
    max_rejection_tries: int = 10000

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.k < 3 or self.k % 2 == 0:
            raise ValueError(f"k must be odd and >= 3, got {self.k}")
        if self.count_pos < 0 or self.count_neg < 0:
            raise ValueError("sample counts must be >= 0")
        if self.max_rejection_tries < 0:
            raise ValueError("max_rejection_tries must be >= 0")


def make_positive_sample(n: int, k: int, i: int, j: int, l: int) -> LabeledSample:
    """Engineered positive: f1 = f3 = (-1)^(x_i x_j x_l), everything else
    constant.  The two identical flips cancel and the Hadamard layers
    annihilate pairwise, so the circuit fixes |0...0> and Phi = 1."""
    if k < 3 or k % 2 == 0:
        raise ValueError(f"k must be odd and >= 3, got {k}")
    if n < 3:
        raise ValueError(f"a three-bit product needs n >= 3, got n = {n}")
    triple = {i, j, l}
    if len(triple) != 3 or not all(1 <= b <= n for b in triple):
        raise ValueError(f"i, j, l must be distinct indices in [1, {n}], got {(i, j, l)}")
    functions = [CONSTANT] * k
    functions[0] = functions[2] = function_of(i, j, l)
    inst = ForrelationInstance(n, tuple(functions))
    amp0 = complex(simulate_instance(inst).amplitudes[0])
    if abs(amp0 - 1.0) > CONSTRUCTIVE_TOL:
        raise RuntimeError(f"positive construction failed: <0|U|0> = {amp0!r}")
    return LabeledSample(encode(inst), 1, 1.0, PROVENANCE_CONSTRUCTIVE)


def make_negative_sample(n: int, k: int, j: int, three_bits: Iterable[int]) -> LabeledSample:
    """Engineered negative: f1 = (-1)^(x_j) flips qubit j between Hadamard
    layers (HZH = X), f2 a three-bit product (inert on a one-hot basis
    state), the rest constant.  The circuit sends |0...0> to the basis
    state with index 2^(j-1), so Phi is exactly 0."""
    if k < 3 or k % 2 == 0:
        raise ValueError(f"k must be odd and >= 3, got {k}")
    bits = frozenset(three_bits)
    if len(bits) != 3 or not all(isinstance(b, int) and 1 <= b <= n for b in bits):
        raise ValueError(f"three_bits must be 3 distinct indices in [1, {n}], got {sorted(bits)}")
    if not 1 <= j <= n:
        raise ValueError(f"j must lie in [1, {n}], got {j}")
    functions = [CONSTANT] * k
    functions[0] = function_of(j)
    functions[1] = BooleanFunctionSpec(bits)
    inst = ForrelationInstance(n, tuple(functions))
    p = simulate_instance(inst).probabilities()
    target = 1 << (j - 1)
    if abs(p[target] - 1.0) > CONSTRUCTIVE_TOL:
        raise RuntimeError(f"negative construction failed: p[2^(j-1)] = {p[target]!r}")
    return LabeledSample(encode(inst), -1, 0.0, PROVENANCE_CONSTRUCTIVE)


@lru_cache(maxsize=None)
def _function_support(n: int) -> tuple[BooleanFunctionSpec, ...]:
    """All allowed functions over n bits: the constant plus every product of
    1, 2 or 3 distinct bits (1 + C(n,1) + C(n,2) + C(n,3) entries)."""
    funcs = [CONSTANT]
    for size in (1, 2, 3):
        funcs.extend(
            BooleanFunctionSpec(frozenset(c)) for c in itertools.combinations(range(1, n + 1), size)
        )
    return tuple(funcs)


def sample_random_instance(n: int, k: int, rng: np.random.Generator) -> ForrelationInstance:
    """Uniform draw over function tuples, re-drawn until some function has
    exactly three bits (the completeness condition); after 100 re-draws one
    function is replaced by a random three-bit product."""
    if n < 3:
        raise ValueError(f"the completeness condition needs n >= 3, got n = {n}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    support = _function_support(n)
    triples = [f for f in support if len(f.bits) == 3]
    for _ in range(100):
        functions = tuple(support[rng.integers(len(support))] for _ in range(k))
        inst = ForrelationInstance(n, functions)
        if inst.promise_complete_form:
            return inst
    fixed = list(functions)
    fixed[int(rng.integers(k))] = triples[int(rng.integers(len(triples)))]
    return ForrelationInstance(n, tuple(fixed))


@dataclass(frozen=True)
class GenerationReport:
    tries: int
    accepted_pos: int
    accepted_neg: int
    constructive_pos: int
    acceptance_rate_pos: float
    acceptance_rate_neg: float
    phi_min: float | None
    phi_max: float | None
    phi_mean: float | None
    phi_bins: tuple[int, ...]   # 20 equal bins over [-1, 1] for all tried instances

    def as_dict(self) -> dict:
        return {
            "tries": self.tries,
            "accepted_pos": self.accepted_pos,
            "accepted_neg": self.accepted_neg,
            "constructive_pos": self.constructive_pos,
            "acceptance_rate_pos": self.acceptance_rate_pos,
            "acceptance_rate_neg": self.acceptance_rate_neg,
            "phi_min": self.phi_min,
            "phi_max": self.phi_max,
            "phi_mean": self.phi_mean,
            "phi_bins": list(self.phi_bins),
        }


def generate_dataset(spec: DatasetSpec) -> tuple[list[LabeledSample], GenerationReport]:
    """Rejection-sample labelled instances per the spec.

    Positives left unfilled after max_rejection_tries are topped up with
    engineered samples over distinct (i, j, l) triples (reported, never
    silent).  An unfillable class raises GenerationError.
    """
    if (spec.count_pos or spec.count_neg) and spec.n < 3:
        raise GenerationError(f"promise-complete instances need n >= 3, got n = {spec.n}")
    rng = np.random.default_rng(spec.seed)
    samples: list[LabeledSample] = []
    tries = accepted_pos = accepted_neg = 0
    phis: list[float] = []
    need_pos, need_neg = spec.count_pos, spec.count_neg
    while (need_pos > 0 or need_neg > 0) and tries < spec.max_rejection_tries:
        tries += 1
        inst = sample_random_instance(spec.n, spec.k, rng)
        phi = phi_circuit(inst)
        phis.append(phi)
        if phi >= POSITIVE_PHI_MIN and need_pos > 0:
            samples.append(LabeledSample(encode(inst), 1, phi, PROVENANCE_REJECTION))
            accepted_pos += 1
            need_pos -= 1
        elif abs(phi) <= NEGATIVE_PHI_MAX and need_neg > 0:
            samples.append(LabeledSample(encode(inst), -1, phi, PROVENANCE_REJECTION))
            accepted_neg += 1
            need_neg -= 1

    constructive_pos = 0
    if need_pos > 0:
        triples = list(itertools.combinations(range(1, spec.n + 1), 3))
        if need_pos > len(triples):
            raise GenerationError(
                f"cannot fill {need_pos} positives: only {len(triples)} distinct constructive triples at n = {spec.n}"
            )
        for triple in triples[:need_pos]:
            samples.append(make_positive_sample(spec.n, spec.k, *triple))
        constructive_pos = need_pos
        need_pos = 0
    if need_neg > 0:
        raise GenerationError(
            f"rejection sampling exhausted {spec.max_rejection_tries} tries with {need_neg} negatives missing"
        )

    bins = np.histogram(np.asarray(phis), bins=20, range=(-1.0, 1.0))[0] if phis else np.zeros(20, int)
    report = GenerationReport(
        tries=tries,
        accepted_pos=accepted_pos,
        accepted_neg=accepted_neg,
        constructive_pos=constructive_pos,
        acceptance_rate_pos=accepted_pos / tries if tries else 0.0,
        acceptance_rate_neg=accepted_neg / tries if tries else 0.0,
        phi_min=min(phis) if phis else None,
        phi_max=max(phis) if phis else None,
        phi_mean=float(np.mean(phis)) if phis else None,
        phi_bins=tuple(int(b) for b in bins),
    )
    return samples, report


# ---------------------------------------------------------------------------
# Serialization.  One JSON object per line; field order is normative.


def _spec_record(spec: DatasetSpec) -> dict:
    return {
        "n": spec.n,
        "k": spec.k,
        "count_pos": spec.count_pos,
        "count_neg": spec.count_neg,
        "seed": spec.seed,
        "max_rejection_tries": spec.max_rejection_tries,
    }


def _sample_record(s: LabeledSample) -> dict:
    return {
        "n": s.sample.n,
        "k": s.sample.k,
        "bits": s.sample.as_string(),
        "label": s.label,
        "phi": f"{s.phi:.17g}",
        "provenance": s.provenance,
    }


def write_dataset(spec: DatasetSpec, samples: Iterable[LabeledSample], path: str) -> None:
    """Header line with the generation spec, then one record per sample."""
    with open(path, "w", newline="") as fh:
        fh.write(json.dumps(_spec_record(spec)) + "\n")
        for s in samples:
            fh.write(json.dumps(_sample_record(s)) + "\n")


def read_dataset(path: str) -> tuple[DatasetSpec | None, list[LabeledSample]]:
    """Inverse of write_dataset.  An empty file is an empty dataset.

    Raises DatasetFormatError (with the offending line number) on malformed
    JSON, malformed blocks, or label/phi inconsistencies.
    """
    spec: DatasetSpec | None = None
    samples: list[LabeledSample] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(lineno, f"invalid JSON: {exc}") from exc
            if "bits" not in obj:
                if lineno != 1:
                    raise DatasetFormatError(lineno, "header record apart from line 1")
                try:
                    spec = DatasetSpec(**obj)
                except (TypeError, ValueError) as exc:
                    raise DatasetFormatError(lineno, f"bad header: {exc}") from exc
                continue
            try:
                sample = sample_from_string(int(obj["n"]), int(obj["k"]), obj["bits"])
                labeled = LabeledSample(sample, int(obj["label"]), float(obj["phi"]), obj["provenance"])
            except (KeyError, TypeError, ValueError, MalformedSampleError) as exc:
                raise DatasetFormatError(lineno, str(exc)) from exc
            samples.append(labeled)
    return spec, samples
