"""Batch runner: one verification record per check, as JSON lines or CSV.

Exit status is 0 when every record passes, 1 when some check fails and 2
for usage or configuration errors.  Defaults for every flag can be set
through ``INFOTRANSFER_<FLAG>`` environment variables (e.g.
``INFOTRANSFER_SEED=7``).

Per-trial random streams come from ``SeedSequence([seed, trial])``, so a
given ``(seed, trial)`` pair always sees the same numbers.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import models, qla
from .observables import site_local, SiteSystem
from .states import SuperpositionSpec, density_from_pure, trace_distance
from .transfer import (
    VerificationRecord,
    check_abstract_collapse,
    condition,
    evolve_superposition,
    random_perfect_instrument,
    random_theorem2_instance,
    reduced_state,
    trial_rng,
    verify_theorem2,
    verify_theorem2_many,
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

SCENARIOS = (
    "cnot",
    "repeated",
    "hepp",
    "thermal",
    "theorem2-random",
    "collapse-random",
    "cat",
    "energy",
    "leakage",
)
CLOSED_FORM = {"cat", "energy", "leakage"}
RANDOMIZED = {"cnot", "repeated", "thermal", "theorem2-random", "collapse-random"}
COLUMNS = ("scenario", "params", "lhs", "rhs", "delta", "normA", "normB", "b0", "b1", "sigma0", "sigma1", "pass", "tol")
ENV_PREFIX = "INFOTRANSFER_"
DENSE_AUTO_MAX = 10
DIM_PAIRS = [(k, h) for k in (2, 3, 4) for h in (2, 3, 4)]


class UsageError(ValueError):
    pass


@dataclass
class RunSpec:
    scenario: str
    params: dict = field(default_factory=dict)
    output_format: str = "json"

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise UsageError(f"unknown scenario {self.scenario!r}")
        if self.output_format not in ("json", "csv"):
            raise UsageError(f"unknown format {self.output_format!r}")
        p = self.params
        if p.get("tol", 1.0) <= 0:
            raise UsageError("tol must be positive")
        if p.get("trials", 1) < 1:
            raise UsageError("trials must be at least 1")
        if self.scenario in RANDOMIZED and p.get("seed") is None:
            raise UsageError(f"scenario {self.scenario!r} needs --seed")


def _record(scenario, params, lhs, rhs, tol, **extra) -> VerificationRecord:
    return VerificationRecord(scenario, params, float(lhs), float(rhs), tol=tol, **extra)


def _n_values(p) -> list[int]:
    if p.get("n_max") is not None:
        return list(range(1, int(p["n_max"]) + 1))
    return [int(p.get("n") or 4)]


def _backend(p, n) -> str:
    return p.get("backend") or ("dense" if n <= DENSE_AUTO_MAX else "statevector")


def scenario_cnot(p):
    tol, seed = p["tol"], p["seed"]
    t, pointer = models.cnot_model()
    for trial in range(p["trials"]):
        rng = trial_rng(seed, trial)
        spec = SuperpositionSpec.random(rng)
        w0, w1 = spec.weights
        params = {"trial": trial, "check": "reduced-state"}
        reduced = reduced_state(t, density_from_pure(spec.superpose(models.PSI0, models.PSI1)))
        yield _record("cnot", params, trace_distance(reduced, np.diag([w0, w1])), 0.0, tol)
        a = site_local(qla.random_hermitian(2, rng, norm=1.0), 1, SiteSystem.qubits(2))
        yield verify_theorem2(t, pointer, models.PSI0, models.PSI1, spec, a, tol, "cnot",
                              {"trial": trial, "check": "bound-system-observable"})


def scenario_repeated(p):
    tol, seed = p["tol"], p["seed"]
    for trial in range(p["trials"]):
        spec = SuperpositionSpec.random(trial_rng(seed, trial))
        table = models.repeated_measurement_joint(spec)
        err = np.max(np.abs(table - np.diag(spec.weights)))
        yield _record("repeated", {"trial": trial}, err, 0.0, tol)


def _hepp_observables(n):
    sys = SiteSystem.qubits(n + 1)
    for name, pauli in qla.PAULIS.items():
        yield f"micro:{name}@0", site_local(pauli, 0, sys)
        yield f"micro:{name}@system", site_local(pauli, n, sys)
    for label, obs in models.pauli_observables(n):
        if label.startswith("macro"):
            yield label, obs


def scenario_hepp(p):
    tol = p["tol"]
    for n in _n_values(p):
        backend = _backend(p, n)
        t, pointer = models.hepp_chain(models.ChainConfig(n, backend=backend))
        if p.get("seed") is not None:
            spec = SuperpositionSpec.random(trial_rng(p["seed"], n))
        else:
            spec = SuperpositionSpec(2 ** -0.5, 2 ** -0.5)
        labels, observables = zip(*_hepp_observables(n))
        records = verify_theorem2_many(t, pointer, models.PSI0, models.PSI1, spec, observables, tol, "hepp",
                                       {"n": n, "backend": backend})
        for label, rec in zip(labels, records):
            rec.params["observable"] = label
            rec.params["two_over_n_rhs"] = models.corollary3_bound(n, rec.normB, rec.sigma0, rec.sigma1,
                                                                   rec.b0, rec.b1, rec.normA)
            yield rec
        stray = models.stray_observable(n)
        got = evolve_superposition(t, models.PSI0, models.PSI1, spec).discrepancy(stray)
        expected = 2 * abs((np.conj(spec.alpha0) * spec.alpha1).real)
        yield _record("hepp", {"n": n, "backend": backend, "observable": "stray:x^(n+1)",
                               "check": "stray-coherence", "discrepancy": got},
                      abs(got - expected), 0.0, tol)


def scenario_thermal(p):
    tol, seed = p["tol"], p["seed"]
    betas = p.get("beta")
    betas = [1.0] if betas is None else [betas]
    cell = 0
    for n in _n_values(p):
        for beta in betas:
            backend = p.get("backend") or "dense"
            t, pointer = models.thermal_chain(models.ChainConfig(n, beta=beta, backend=backend))
            rng = trial_rng(seed, cell)
            cell += 1
            spec = SuperpositionSpec.random(rng)
            kinds = ["micro", "macro"] * ((p["trials"] + 1) // 2)
            observables = [models.random_local_observable(rng, n, k) for k in kinds[: p["trials"]]]
            base = {"n": n, "beta": beta, "backend": backend}
            records = verify_theorem2_many(t, pointer, models.PSI0, models.PSI1, spec, observables, tol,
                                           "thermal", base)
            for i, rec in enumerate(records):
                rec.params["observable_index"] = i
                yield rec
            first = records[0]
            closed = models.thermal_closed_form(n, beta)
            var_err = max(abs(first.sigma0 ** 2 - closed["variance"]), abs(first.sigma1 ** 2 - closed["variance"]))
            yield _record("thermal", dict(base, check="pointer-variance"), var_err, 0.0, tol,
                          b0=first.b0, b1=first.b1, sigma0=first.sigma0, sigma1=first.sigma1)
            measured = models.corollary3_bound(n, first.normB, first.sigma0, first.sigma1, first.b0, first.b1, 1.0)
            display = models.thermal_bound(n, models.epsilon(beta))
            yield _record("thermal", dict(base, check="bound-formula", bound=display),
                          abs(measured - display), 0.0, tol)


def scenario_theorem2_random(p):
    tol, seed = p["tol"], p["seed"]
    for trial in range(p["trials"]):
        rng = trial_rng(seed, trial)
        dimK, dimH = DIM_PAIRS[trial % len(DIM_PAIRS)]
        inst = random_theorem2_instance(rng, dimK, dimH, mixed_tau=True)
        yield verify_theorem2(inst.transfer, inst.b, inst.psi0, inst.psi1, inst.spec, inst.a, tol,
                              "theorem2-random", {"trial": trial, "dimK": dimK, "dimH": dimH})


def scenario_collapse_random(p):
    tol, seed = p["tol"], p["seed"]
    for trial in range(p["trials"]):
        rng = trial_rng(seed, trial)
        dimH = int(rng.choice([2, 3, 4]))
        inst, psi0, psi1 = random_perfect_instrument(dimH, rng)
        m0, m1 = inst.superoperators()
        report = check_abstract_collapse(m0, m1, psi0, psi1, tol=tol, seed=trial)
        spec = SuperpositionSpec.random(rng)
        cond = condition(inst, density_from_pure(spec.superpose(psi0, psi1)))
        errs = [max(report.offdiag_norms.values()), report.collapse_error]
        for j, (pj, rj, psi) in enumerate(((cond.p0, cond.rho0, psi0), (cond.p1, cond.rho1, psi1))):
            errs.append(abs(pj - spec.weights[j]))
            errs.append(trace_distance(rj, reduced_state(inst.transfer, density_from_pure(psi))))
        yield _record("collapse-random", {"trial": trial, "dimH": dimH, "verdict": report.verdict},
                      max(errs), 0.0, tol)


def scenario_cat(p):
    n = p.get("n") or 1e23
    yield _record("cat", {"n": n, "closed_form": True}, 0.0, models.cat_bound(n), p["tol"],
                  delta=2.0 / n, normA=1.0, normB=models.bounds.CAT_BOX_HEIGHT, b0=0.0,
                  b1=models.bounds.CAT_HEIGHT_DIFFERENCE, sigma0=0.0, sigma1=0.0)


def scenario_energy(p):
    n = p.get("n") or 1e20
    small = models.energy_pointer_bound(models.energy_scaling_inputs(n))
    large = models.energy_pointer_bound(models.energy_scaling_inputs(4 * n))
    yield _record("energy", {"n": n, "bound_n": small, "bound_4n": large, "check": "sqrt-decay-ratio"},
                  abs(small / large - 2.0), 0.0, p["tol"])


def scenario_leakage(p):
    n = p.get("n") or 1e6
    sigma = n ** -0.25  # between N^-1/2 and 1
    macro = models.leakage_bound(sigma, -1.0, 1.0)
    yield _record("leakage", {"n": n, "sigma": sigma, "gap": 2.0, "check": "macroscopic-decoheres"},
                  macro, 1.0, p["tol"], delta=0.0, sigma0=sigma, sigma1=sigma, b0=-1.0, b1=1.0)
    micro = models.leakage_bound(sigma, 0.0, 2.0 / n)
    yield _record("leakage", {"n": n, "sigma": sigma, "gap": 2.0 / n, "check": "microscopic-vacuous",
                              "bound": micro}, 2.0, micro, p["tol"], delta=0.0, sigma0=sigma, sigma1=sigma,
                  b0=0.0, b1=2.0 / n)


RUNNERS = {
    "cnot": scenario_cnot,
    "repeated": scenario_repeated,
    "hepp": scenario_hepp,
    "thermal": scenario_thermal,
    "theorem2-random": scenario_theorem2_random,
    "collapse-random": scenario_collapse_random,
    "cat": scenario_cat,
    "energy": scenario_energy,
    "leakage": scenario_leakage,
}


def _clean(value):
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    return value


def write_records(records, out, fmt: str) -> None:
    if fmt == "json":
        for rec in records:
            out.write(json.dumps(_clean(rec.to_dict())) + "\n")
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(COLUMNS)
    for rec in records:
        row = _clean(rec.to_dict())
        row["params"] = json.dumps(row["params"])
        writer.writerow(["" if row[c] is None else row[c] for c in COLUMNS])


def run(spec: RunSpec, out=None) -> int:
    """Run one scenario, write its records to ``out`` and return the exit status."""
    out = sys.stdout if out is None else out
    records = list(RUNNERS[spec.scenario](spec.params))
    write_records(records, out, spec.output_format)
    return EXIT_OK if all(r.passed for r in records) else EXIT_FAILED


def _env(name, default=None):
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"), default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="infotransfer", description=__doc__.splitlines()[0])
    parser.add_argument("--scenario", choices=SCENARIOS, default=_env("scenario"))
    parser.add_argument("--n", type=float, default=_env("n"), help="system size (floats allowed for closed forms)")
    parser.add_argument("--n-max", type=int, default=_env("n_max"), help="sweep chain sizes 1..n-max")
    parser.add_argument("--beta", type=float, default=_env("beta"))
    parser.add_argument("--trials", type=int, default=_env("trials", 100))
    parser.add_argument("--seed", type=int, default=_env("seed"))
    parser.add_argument("--tol", type=float, default=_env("tol", 1e-8))
    parser.add_argument("--backend", choices=("dense", "statevector"), default=_env("backend"))
    parser.add_argument("--format", choices=("json", "csv"), default=_env("format", "json"))
    parser.add_argument("--out", default=_env("out"), help="output file (default stdout)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.scenario is None:
        parser.print_usage(sys.stderr)
        print("infotransfer: error: --scenario is required", file=sys.stderr)
        return EXIT_USAGE
    params = {
        "n": args.n,
        "n_max": args.n_max,
        "beta": args.beta,
        "trials": int(args.trials),
        "seed": args.seed,
        "tol": float(args.tol),
        "backend": args.backend,
    }
    if args.scenario not in CLOSED_FORM and args.n is not None and args.n != int(args.n):
        print("infotransfer: error: --n must be an integer for matrix scenarios", file=sys.stderr)
        return EXIT_USAGE
    try:
        spec = RunSpec(args.scenario, params, args.format)
        buf = io.StringIO()
        status = run(spec, buf)
    except (UsageError, ValueError) as exc:
        print(f"infotransfer: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return status


if __name__ == "__main__":
    sys.exit(main())
