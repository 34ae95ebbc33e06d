"""Command-line surface: gen / classify / verify / bench.

Batch commands only; every command is deterministic for a given --seed
(bench wall-times excepted).  Output for classify and bench is one JSON
record per line so CI can diff it.

Exit codes: 0 success, 1 verification failure, 2 runtime or data error,
64 usage error.  KFORRELATION_THREADS is accepted as a thread-count
override; the simulation kernels are single-threaded, so it never changes
results (checked by the determinism tests).
"""
from __future__ import annotations

import argparse
import itertools
import json
import sys
import time

import numpy as np

from . import classify as cls
from . import datagen, forrelation, qstate

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_RUNTIME = 2
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 64, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    p = _Parser(prog="kforrelation", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a labelled dataset file")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--pos", type=int, required=True, help="positive sample count")
    g.add_argument("--neg", type=int, required=True, help="negative sample count")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--tries", type=int, default=10000, help="rejection-sampling budget")
    g.add_argument("--out", required=True, help="output path (JSON lines)")
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("classify", help="classify a dataset file and report accuracy")
    c.add_argument("--data", required=True, help="dataset path written by gen")
    c.add_argument("--mode", choices=("vqc", "qsvm"), default="vqc")
    c.add_argument("--shots", type=int, default=None, help="sampled mode; omit for exact")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--bias", type=float, default=None, help="VQC bias; default is the interval midpoint")
    c.set_defaults(func=cmd_classify)

    v = sub.add_parser("verify", help="run the cross-module invariant suite")
    v.add_argument("--n", type=int, default=None, help="restrict the oracle sweep to this n")
    v.add_argument("--k", type=int, default=None, help="restrict the oracle sweep to this k")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--trials", type=int, default=50, help="randomised trials per invariant")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="time the simulation kernels")
    b.add_argument("--min-n", type=int, default=4)
    b.add_argument("--max-n", type=int, default=14)
    b.add_argument("--k", type=int, default=3)
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_bench)
    return p


def _validate_gen_args(parser, args) -> None:
    if args.k < 3 or args.k % 2 == 0:
        parser.error(f"--k must be odd and >= 3, got {args.k}")
    if args.n < 1:
        parser.error(f"--n must be >= 1, got {args.n}")
    if args.pos < 0 or args.neg < 0:
        parser.error("--pos and --neg must be >= 0")


def cmd_gen(args) -> int:
    spec = datagen.DatasetSpec(args.n, args.k, args.pos, args.neg, args.seed, args.tries)
    try:
        samples, report = datagen.generate_dataset(spec)
        datagen.write_dataset(spec, samples, args.out)
    except (datagen.GenerationError, OSError) as exc:
        print(f"generation failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(json.dumps({"type": "report", "samples": len(samples), **report.as_dict()}))
    return EXIT_OK


def cmd_classify(args) -> int:
    try:
        _, samples = datagen.read_dataset(args.data)
    except (OSError, datagen.DatasetFormatError) as exc:
        print(f"cannot read dataset: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if not samples:
        print(json.dumps({"type": "summary", "mode": args.mode, "samples": 0,
                          "correct": 0, "accuracy": None, "shots": args.shots}))
        return EXIT_OK
    n, k = samples[0].sample.n, samples[0].sample.k

    if args.mode == "qsvm":
        try:
            x_plus = datagen.make_positive_sample(n, k, 1, 2, 3).sample
            x_minus = datagen.make_negative_sample(n, k, 1, (1, 2, 3)).sample
            sol = cls.qsvm_train(x_plus, x_minus)
        except (ValueError, cls.DegenerateTrainingSetError) as exc:
            print(f"qsvm training failed: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
    else:
        bias = cls.default_bias() if args.bias is None else args.bias
        model = cls.VqcModel(bias)

    correct = 0
    for idx, s in enumerate(samples):
        seed = args.seed + idx
        if args.mode == "qsvm":
            predicted = cls.qsvm_classify(s.sample, sol, args.shots, seed)
        else:
            m = cls.VqcModel(model.bias, args.shots, seed)
            predicted = cls.vqc_classify(s.sample, m)
        correct += predicted == s.label
        print(json.dumps({"type": "prediction", "index": idx, "label": s.label,
                          "predicted": predicted, "phi": f"{s.phi:.17g}"}))
    print(json.dumps({"type": "summary", "mode": args.mode, "samples": len(samples),
                      "correct": correct, "accuracy": correct / len(samples),
                      "shots": args.shots}))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Verification suite


def _random_instance(rng, n, k):
    support = _all_functions(n)
    funcs = tuple(support[rng.integers(len(support))] for _ in range(k))
    return forrelation.ForrelationInstance(n, funcs)


def _all_functions(n):
    funcs = [forrelation.CONSTANT]
    for size in (1, 2, 3):
        funcs.extend(
            forrelation.BooleanFunctionSpec(frozenset(c))
            for c in itertools.combinations(range(1, n + 1), size)
        )
    return funcs


def check_oracle_equivalence(seed=0, trials=50, n=None, k=None, **_):
    """phi_bruteforce vs phi_circuit: exhaustive at (n=2,k=3) and (n=3,k=3)
    unless scoped, plus randomised draws with k*n <= 16."""
    max_dev = 0.0
    sweeps = [(n, k)] if n and k else [(2, 3), (3, 3)]
    for sn, sk in sweeps:
        if len(_all_functions(sn)) ** sk > 4096:
            raise ValueError(f"exhaustive sweep too large for n={sn}, k={sk}")
        for funcs in itertools.product(_all_functions(sn), repeat=sk):
            inst = forrelation.ForrelationInstance(sn, funcs)
            max_dev = max(max_dev, abs(forrelation.phi_bruteforce(inst) - forrelation.phi_circuit(inst)))
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        rn = int(rng.integers(3, 5))
        rk = int(rng.integers(1, 16 // rn + 1))
        inst = _random_instance(rng, rn, rk)
        max_dev = max(max_dev, abs(forrelation.phi_bruteforce(inst) - forrelation.phi_circuit(inst)))
    return max_dev <= 1e-10, max_dev


def check_ansatz_equivalence(seed=0, trials=50, **_):
    rng = np.random.default_rng(seed)
    max_dev = 0.0
    for _ in range(trials):
        n = int(rng.integers(3, 6))
        k = int(rng.integers(1, 6))
        inst = _random_instance(rng, n, k)
        sample = forrelation.encode(inst)
        direct = forrelation.simulate_instance(inst).amplitudes
        ansatz = forrelation.simulate_fixed_ansatz(sample).amplitudes
        max_dev = max(max_dev, float(np.max(np.abs(direct - ansatz))))
    return max_dev <= 1e-10, max_dev


def check_gadget_identity(**_):
    lhs = qstate.unitary_of(forrelation.gadget_gate_sequence(), 2)
    rhs = qstate.unitary_of([qstate.swap(1, 2), qstate.hadamard_all()], 2)
    dev = float(np.max(np.abs(lhs - rhs)))  # identity holds with no phase at all
    return qstate.equal_up_to_global_phase(lhs, rhs, 1e-12), dev


def check_constructive_samples(**_):
    max_dev = 0.0
    for n in range(3, 7):
        for k in (3, 5):
            pos = datagen.make_positive_sample(n, k, 1, 2, 3)
            state = forrelation.simulate_instance(forrelation.decode(pos.sample))
            max_dev = max(max_dev, abs(float(state.probabilities()[0]) - 1.0))
            neg = datagen.make_negative_sample(n, k, 2, (1, 2, 3))
            state = forrelation.simulate_instance(forrelation.decode(neg.sample))
            max_dev = max(max_dev, abs(float(state.probabilities()[2]) - 1.0))
    return max_dev <= 1e-12, max_dev


def check_oddk_preservation_even_n(seed=0, trials=50, **_):
    rng = np.random.default_rng(seed)
    max_dev = 0.0
    for _ in range(trials):
        n = int(rng.choice((2, 4)))
        k = int(rng.choice((2, 4)))
        inst = _random_instance(rng, n, k)
        ext = forrelation.oddk_extend(inst)
        if ext.instance.k != inst.k + forrelation.oddk_extension_count(n) or ext.phi_scale != 1.0:
            return False, float("inf")
        max_dev = max(max_dev, abs(forrelation.phi_circuit(ext.instance) - forrelation.phi_circuit(inst)))
    return max_dev <= 1e-10, max_dev


def check_oddk_scale_odd_n(seed=0, trials=50, **_):
    """Odd n: the extension rescales Phi by exactly 2^-1/2 (see
    forrelation.oddk_extend); verify the documented contract."""
    rng = np.random.default_rng(seed)
    max_dev = 0.0
    for _ in range(trials):
        k = int(rng.choice((2, 4)))
        inst = _random_instance(rng, 3, k)
        ext = forrelation.oddk_extend(inst)
        if ext.instance.k != inst.k + forrelation.oddk_extension_count(3) or ext.instance.n != 4:
            return False, float("inf")
        expected = ext.phi_scale * forrelation.phi_circuit(inst)
        max_dev = max(max_dev, abs(forrelation.phi_circuit(ext.instance) - expected))
    return max_dev <= 1e-10, max_dev


def check_roundtrip(seed=0, trials=50, **_):
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        n = int(rng.integers(3, 7))
        k = int(rng.integers(1, 6))
        inst = _random_instance(rng, n, k)
        if forrelation.decode(forrelation.encode(inst)) != inst:
            return False, 1.0
    return True, 0.0


DEFAULT_CHECKS = (
    ("oracle_equivalence", check_oracle_equivalence),
    ("ansatz_equivalence", check_ansatz_equivalence),
    ("gadget_identity", check_gadget_identity),
    ("constructive_samples", check_constructive_samples),
    ("oddk_preservation_even_n", check_oddk_preservation_even_n),
    ("oddk_scale_odd_n", check_oddk_scale_odd_n),
    ("encode_decode_roundtrip", check_roundtrip),
)


def run_verification(checks=None, **kwargs):
    results = []
    for name, fn in DEFAULT_CHECKS if checks is None else checks:
        passed, dev = fn(**kwargs)
        results.append((name, passed, dev))
    return results


def cmd_verify(args) -> int:
    results = run_verification(seed=args.seed, trials=args.trials, n=args.n, k=args.k)
    failures = []
    for name, passed, dev in results:
        print(f"{'PASS' if passed else 'FAIL'} {name} max_dev={dev:.3e}")
        if not passed:
            failures.append(name)
    if failures:
        print("failed invariants: " + ", ".join(failures), file=sys.stderr)
        return EXIT_VERIFY_FAIL
    return EXIT_OK


def cmd_bench(args) -> int:
    rng = np.random.default_rng(args.seed)
    for n in range(args.min_n, args.max_n + 1):
        inst = _random_instance(rng, n, args.k)
        t0 = time.perf_counter()
        forrelation.phi_circuit(inst)
        t1 = time.perf_counter()
        print(json.dumps({"op": "phi_circuit", "n": n, "k": args.k,
                          "gates": 2 * args.k + 1, "seconds": t1 - t0}))
        sample = forrelation.encode(inst)
        t0 = time.perf_counter()
        forrelation.phi_fixed_ansatz(sample)
        t1 = time.perf_counter()
        print(json.dumps({"op": "phi_fixed_ansatz", "n": n, "k": args.k,
                          "parameterized_gates": forrelation.ansatz_parameter_count(n, args.k),
                          "seconds": t1 - t0}))
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "gen":
        _validate_gen_args(parser, args)
    try:
        return args.func(args)
    except (qstate.CapacityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
