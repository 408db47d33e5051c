"""Config-driven experiment runner.

Every verification and search in the library is exposed as a subcommand
taking a JSON config and emitting a JSON report.  Exact rationals are
serialized as {"num": "...", "den": "..."} string pairs; interval-valued
estimates as {"lower": float, "upper": float, "exact": false}.  Reports are
deterministic for a fixed config and seed except for the "generated_at" and
"elapsed_seconds" fields.  Exit codes: 0 success, 1 failed verdict or hard
failure, 2 config error.  Logs go to stderr; the report goes to --out or
stdout.

Subcommands: volume-spectrum, pattern-search, expand-scan, spectral-report,
decompose, intersect, haystack-verify, density.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from fractions import Fraction
from itertools import product
from typing import Optional

from . import __version__
from .formal import FormalReal
from .haystack import make_haystack, verify_haystack_sample
from .lattice import is_primitive, sublattice
from .spectral import (
    Weight,
    annihilator_mass,
    expansion_bound_check,
    intersection_theorem_search,
    normalized,
    rational_mass_excluding_trivial,
    shrink_rational_spectrum,
    spectral_measure,
    spectral_measure_kronecker,
    verify_bochner,
)
from .systems import (
    BoxUnion,
    ErgodicSetSpec,
    FiniteSystem,
    ergodic_components,
    finite_system,
    finite_system_from_parts,
    kronecker_system,
    max_directional_expansion,
    orbit_saturation,
)
from .volume import (
    PatternWitness,
    SearchBounds,
    ap_certificate,
    build_point_set,
    pattern_search,
    simplex_det,
    upper_density_estimate,
    verify_pattern_witness,
    volume_spectrum,
)

EXPERIMENTS = (
    "volume-spectrum",
    "pattern-search",
    "expand-scan",
    "spectral-report",
    "decompose",
    "intersect",
    "haystack-verify",
    "density",
)


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# serialization helpers

def ser_fraction(q: Fraction) -> dict:
    q = Fraction(q)
    return {"num": str(q.numerator), "den": str(q.denominator)}


def parse_fraction(value) -> Fraction:
    if isinstance(value, dict):
        return Fraction(int(value["num"]), int(value["den"]))
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, (int, float)):
        return Fraction(value)
    raise ConfigError(f"cannot parse rational from {value!r}")


def ser_weight(w: Weight) -> dict:
    if w.exact:
        return ser_fraction(w.value)
    return {"lower": float(w.lower), "upper": float(w.upper), "exact": False}


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# config parsing

def _parse_formal(entry) -> FormalReal:
    if isinstance(entry, (int, str)):
        return FormalReal.of(parse_fraction(entry))
    if isinstance(entry, dict):
        rational = parse_fraction(entry.get("rational", 0))
        terms = tuple(
            (name, parse_fraction(coeff))
            for name, coeff in sorted(entry.get("symbols", {}).items())
        )
        return FormalReal(rational, terms)
    raise ConfigError(f"cannot parse frequency entry {entry!r}")


def _parse_system(desc: dict):
    kind = desc.get("kind")
    if kind == "finite":
        if "matrix" in desc:
            return finite_system(sublattice(desc["matrix"]))
        if "moduli" in desc:
            return finite_system_from_parts(
                int(desc["rank"]), [int(d) for d in desc["moduli"]], desc["gens"]
            )
        raise ConfigError("finite system needs 'matrix' or 'moduli' + 'gens'")
    if kind == "kronecker":
        theta = [[_parse_formal(e) for e in row] for row in desc["theta"]]
        return kronecker_system(int(desc["rank"]), int(desc["dim"]), theta)
    raise ConfigError(f"unknown system kind {kind!r}")


def _parse_set_b(sys_, desc: dict):
    kind = desc.get("kind")
    if isinstance(sys_, FiniteSystem):
        if kind == "elements":
            return frozenset(tuple(int(x) for x in p) for p in desc["points"])
        if kind == "preimages":
            return frozenset(sys_.phi(tuple(int(x) for x in p)) for p in desc["points"])
        raise ConfigError("finite set_b kinds: 'elements', 'preimages'")
    if kind == "boxes":
        return BoxUnion.of(
            *[
                [(parse_fraction(lo), parse_fraction(hi)) for lo, hi in box]
                for box in desc["boxes"]
            ]
        )
    raise ConfigError("kronecker set_b kind must be 'boxes'")


def _parse_haystack(desc: Optional[dict], rank: int) -> list[tuple[int, ...]]:
    desc = desc or {}
    primes = (2, 3, 5, 7, 11, 13, 17)
    multipliers = tuple(int(m) for m in desc.get("multipliers", primes[:rank]))
    count = int(desc.get("count", 8))
    basis = desc.get("basis")
    return [h.coords for h in make_haystack(basis, multipliers, count)]


def _parse_sspec(desc: Optional[dict]) -> ErgodicSetSpec:
    if not desc:
        return ErgodicSetSpec()
    return ErgodicSetSpec(
        kind=desc.get("kind", "interval"),
        offset=int(desc.get("offset", 0)),
        step=int(desc.get("step", 1)),
    )


def _require(cfg: dict, *keys):
    for key in keys:
        if key not in cfg:
            raise ConfigError(f"config is missing required field {key!r}")


# ---------------------------------------------------------------------------
# experiment runners: each returns (results, verdicts, csv_rows, csv_header)

def _run_volume_spectrum(cfg: dict, seed: Optional[int], threads: int):
    _require(cfg, "rank", "window", "set")
    e = build_point_set(_seeded(cfg["set"], seed), int(cfg["rank"]), int(cfg["window"]))
    cap = cfg.get("cap")
    spectrum = sorted(volume_spectrum(e, None if cap is None else int(cap)))
    results = {"point_count": len(e), "spectrum": spectrum}
    verdicts = []
    if "ap_max" in cfg:
        cert = ap_certificate(e, int(cfg["ap_max"]))
        results["ap_certificate"] = {
            "ok": cert.ok,
            "n": cert.n,
            "witnesses": {
                str(m): {"vertices": [list(v) for v in rec.vertices], "det": rec.det}
                for m, rec in sorted(cert.witnesses.items())
            },
            "best_n": cert.best_n,
            "missing": list(cert.missing),
            "reason": cert.reason,
        }
        witness_ok = cert.ok and all(
            rec.verify() and abs(rec.det) == cert.n * m for m, rec in cert.witnesses.items()
        )
        verdicts.append(
            {"name": "ap-certificate", "pass": bool(witness_ok), "n": cert.n}
        )
    rows = [[v] for v in spectrum]
    return results, verdicts, rows, ["value"]


def _run_pattern_search(cfg: dict, seed: Optional[int], threads: int):
    _require(cfg, "rank", "window", "set", "p", "probes")
    e = build_point_set(_seeded(cfg["set"], seed), int(cfg["rank"]), int(cfg["window"]))
    bounds_cfg = cfg.get("bounds", {})
    bounds = SearchBounds(
        n_max=int(bounds_cfg.get("n_max", 6)),
        m_max=int(bounds_cfg.get("m_max", 6)),
        lambda_count=int(bounds_cfg.get("lambda_count", 6)),
        multipliers=tuple(bounds_cfg["multipliers"]) if "multipliers" in bounds_cfg else None,
    )
    res = pattern_search(e, int(cfg["p"]), cfg["probes"], bounds)
    results = {
        "ok": res.ok,
        "reason": res.reason,
        "witnesses": [
            {
                "n": w.n,
                "lambda": list(w.lam),
                "m1": w.m1,
                "lambda0": list(w.lam0),
                "pairs": [{"m": mk, "probe": list(lk)} for mk, lk in w.pairs],
            }
            for w in res.witnesses
        ],
    }
    verdicts = [{"name": "pattern-witnesses", "pass": bool(res.ok), "detail": res.reason}]
    return results, verdicts, None, None


def _candidate_box(rank: int, bound: int) -> list[tuple[int, ...]]:
    return [
        lam
        for lam in product(range(-bound, bound + 1), repeat=rank)
        if any(x != 0 for x in lam)
    ]


def _run_expand_scan(cfg: dict, seed: Optional[int], threads: int):
    _require(cfg, "system", "set_b", "coord_bound")
    sys_ = _parse_system(cfg["system"])
    if not isinstance(sys_, FiniteSystem):
        raise ConfigError("expand-scan requires a finite system")
    bset = _parse_set_b(sys_, cfg["set_b"])
    bound = int(cfg["coord_bound"])
    sspec = _parse_sspec(cfg.get("ergodic_set")) if "ergodic_set" in cfg else None
    candidates = _candidate_box(sys_.rank, bound)

    def measure_one(lam):
        _, mu = orbit_saturation(sys_, bset, lam, sspec)
        return lam, mu

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            measured = list(pool.map(measure_one, candidates))
    else:
        measured = [measure_one(lam) for lam in candidates]
    best_mu, best_lam = max_directional_expansion(sys_, bset, candidates)
    rows = []
    all_ok = True
    for lam, mu in measured:
        chk = expansion_bound_check(sys_, bset, lam, sspec)
        ok = bool(chk.ok)
        all_ok = all_ok and ok
        rows.append(
            list(lam)
            + [
                mu.numerator,
                mu.denominator,
                chk.bound.value.numerator,
                chk.bound.value.denominator,
                int(ok),
            ]
        )
    expandable = best_mu == 1
    results = {
        "max_expansion": ser_fraction(best_mu),
        "argmax_lambda": list(best_lam),
        "candidate_count": len(candidates),
        "verdict": (
            "directionally expandable within candidates"
            if expandable
            else "not directionally expandable within candidates"
        ),
    }
    verdicts = [
        {"name": "expansion-bounds-hold", "pass": all_ok},
    ]
    header = (
        [f"lambda_{i + 1}" for i in range(sys_.rank)]
        + ["measure_num", "measure_den", "bound_num", "bound_den", "bound_holds"]
    )
    return results, verdicts, rows, header


def _run_spectral_report(cfg: dict, seed: Optional[int], threads: int):
    _require(cfg, "system", "set_b")
    sys_ = _parse_system(cfg["system"])
    bset = _parse_set_b(sys_, cfg["set_b"])
    if isinstance(sys_, FiniteSystem):
        sigma = spectral_measure(sys_, bset)
        tilde = normalized(sigma)
        lam_bound = int(cfg.get("lambda_bound", 4))
        boch = verify_bochner(sys_, bset, lam_bound)
        mu_b = sigma.total.value
        results = {
            "kind": "finite",
            "carrier_moduli": list(sys_.moduli),
            "mu_b": ser_fraction(mu_b),
            "total_mass": ser_weight(sigma.total),
            "trivial_mass": ser_weight(sigma.trivial),
            "normalized_total": ser_weight(tilde.total),
            "rational_nontrivial_mass": ser_weight(rational_mass_excluding_trivial(tilde)),
            "atoms": [
                {"label": list(a.character.dual_label), "weight": ser_weight(a.weight)}
                for a in sigma.atoms
            ],
            "bochner_checked": boch.checked,
        }
        verdicts = [
            {"name": "trivial-atom-is-muB-squared", "pass": sigma.trivial.value == mu_b * mu_b},
            {"name": "total-mass-is-muB", "pass": sigma.total.value == mu_b},
            {"name": "bochner-identity", "pass": bool(boch.ok)},
        ]
        return results, verdicts, None, None
    trunc = int(cfg.get("trunc", 64))
    sigma = spectral_measure_kronecker(sys_, bset, trunc)
    lam_list = cfg.get("annihilator_lambdas", [])
    ann = {
        json.dumps(lam): ser_weight(annihilator_mass(sigma, tuple(lam)))
        for lam in lam_list
    }
    results = {
        "kind": "kronecker",
        "trunc": trunc,
        "mu_b": ser_fraction(sigma.total.value),
        "tail": ser_weight(sigma.tail),
        "trivial_mass": ser_weight(sigma.trivial),
        "rational_nontrivial_mass": ser_weight(
            rational_mass_excluding_trivial(normalized(sigma))
        ),
        "annihilator_masses": ann,
        "atom_count": len(sigma.atoms),
    }
    verdicts = [
        {
            "name": "tail-nonnegative",
            "pass": sigma.tail.lower >= 0 and sigma.tail.upper >= sigma.tail.lower,
        }
    ]
    return results, verdicts, None, None


def _run_decompose(cfg: dict, seed: Optional[int], threads: int):
    _require(cfg, "system", "set_b")
    sys_ = _parse_system(cfg["system"])
    if not isinstance(sys_, FiniteSystem):
        raise ConfigError("decompose requires a finite system")
    bset = _parse_set_b(sys_, cfg["set_b"])
    results = {}
    verdicts = []
    if "sublattice" in cfg:
        L = sublattice(cfg["sublattice"])
        comps = ergodic_components(sys_, L)
        weight_sum = sum((c.weight for c in comps), start=Fraction(0))
        results["components"] = [
            {"support": [list(x) for x in sorted(c.support)], "weight": ser_fraction(c.weight)}
            for c in comps
        ]
        verdicts.append({"name": "component-weights-sum-to-one", "pass": weight_sum == 1})
        covered = set()
        for c in comps:
            covered |= c.support
        verdicts.append(
            {"name": "components-partition-carrier", "pass": len(covered) == sys_.size}
        )
    eps_o = parse_fraction(cfg.get("eps_o", "1/10"))
    shrink = shrink_rational_spectrum(sys_, bset, eps_o)
    mu_b = sys_.measure(bset)
    results["shrink"] = {
        "n": shrink.n,
        "component_support": [list(x) for x in sorted(shrink.component.support)],
        "c": ser_fraction(shrink.c),
        "nu_b": ser_fraction(shrink.nu_b),
        "rational_nontrivial_mass": ser_fraction(shrink.rational_mass),
        "tried": list(shrink.tried),
    }
    verdicts.append(
        {"name": "shrink-rational-mass-below-eps_o", "pass": shrink.rational_mass < eps_o}
    )
    verdicts.append(
        {
            "name": "shrink-measure-disjunction",
            "pass": shrink.nu_b >= Fraction(1, 3) or mu_b < 3 * shrink.nu_b,
        }
    )
    return results, verdicts, None, None


def _run_intersect(cfg: dict, seed: Optional[int], threads: int):
    _require(cfg, "system", "set_b", "p", "probes")
    sys_ = _parse_system(cfg["system"])
    if not isinstance(sys_, FiniteSystem):
        raise ConfigError("intersect requires a finite system")
    bset = _parse_set_b(sys_, cfg["set_b"])
    sample = _parse_haystack(cfg.get("haystack"), sys_.rank)
    sspec = _parse_sspec(cfg.get("ergodic_set"))
    witness = intersection_theorem_search(
        sys_, bset, int(cfg["p"]), sample, sspec, cfg["probes"]
    )
    results = {
        "n": witness.n,
        "lambda": list(witness.lam),
        "m1": witness.m1,
        "probes": [
            {"probe": [list(v) for v in w.probe], "ms": list(w.ms)}
            for w in witness.probes
        ],
        "intersection_measure": ser_fraction(witness.measure),
        "eps": ser_fraction(witness.eps),
        "eps_o": ser_fraction(witness.eps_o),
        "shrink_n": witness.shrink.n,
    }
    verdicts = [
        {"name": "intersection-positive", "pass": witness.measure > 0},
        {"name": "lambda-primitive", "pass": is_primitive(witness.lam)},
    ]
    return results, verdicts, None, None


def _run_haystack_verify(cfg: dict, seed: Optional[int], threads: int):
    _require(cfg, "rank")
    rank = int(cfg["rank"])
    if "vectors" in cfg:
        vectors = [tuple(int(x) for x in v) for v in cfg["vectors"]]
    else:
        _require(cfg, "multipliers", "count")
        vectors = [
            h.coords
            for h in make_haystack(
                cfg.get("basis"), [int(m) for m in cfg["multipliers"]], int(cfg["count"])
            )
        ]
    verdict = verify_haystack_sample(vectors, rank)
    results = {
        "vectors": [list(v) for v in vectors],
        "ok": verdict.ok,
        "non_primitive": list(verdict.non_primitive) if verdict.non_primitive else None,
        "singular_subset": (
            [list(v) for v in verdict.singular_subset] if verdict.singular_subset else None
        ),
    }
    verdicts = [{"name": "haystack-sample", "pass": verdict.ok}]
    return results, verdicts, None, None


def _run_density(cfg: dict, seed: Optional[int], threads: int):
    _require(cfg, "rank", "set", "windows")
    rank = int(cfg["rank"])
    est = upper_density_estimate(
        _seeded(cfg["set"], seed), rank, [int(n) for n in cfg["windows"]]
    )
    results = {
        "windows": list(est.windows),
        "densities": [ser_fraction(d) for d in est.densities],
        "proxy": ser_fraction(est.proxy),
    }
    rows = [
        [n, d.numerator, d.denominator]
        for n, d in zip(est.windows, est.densities, strict=True)
    ]
    return results, [], rows, ["window", "num", "den"]


def _seeded(set_desc: dict, seed: Optional[int]) -> dict:
    """Inject the experiment seed into seedless random generators."""
    desc = dict(set_desc)
    if desc.get("kind") == "random" and "seed" not in desc and seed is not None:
        desc["seed"] = seed
    for key in ("parts",):
        if key in desc:
            desc[key] = [_seeded(p, seed) for p in desc[key]]
    if "base" in desc:
        desc["base"] = _seeded(desc["base"], seed)
    return desc


_RUNNERS = {
    "volume-spectrum": _run_volume_spectrum,
    "pattern-search": _run_pattern_search,
    "expand-scan": _run_expand_scan,
    "spectral-report": _run_spectral_report,
    "decompose": _run_decompose,
    "intersect": _run_intersect,
    "haystack-verify": _run_haystack_verify,
    "density": _run_density,
}


# ---------------------------------------------------------------------------
# witness re-verification (--verify-only)

def _verify_report(report: dict) -> list[dict]:
    cfg = report["config"]
    kind = report["experiment"]
    seed = report.get("seed")
    checks = []

    def add(name: str, ok: bool):
        checks.append({"name": name, "pass": bool(ok)})

    if kind == "volume-spectrum":
        e = build_point_set(_seeded(cfg["set"], seed), int(cfg["rank"]), int(cfg["window"]))
        cert = report["results"].get("ap_certificate")
        if cert and cert["ok"]:
            for m_str, rec in cert["witnesses"].items():
                verts = [tuple(v) for v in rec["vertices"]]
                ok = (
                    all(v in e.points for v in verts)
                    and abs(simplex_det(verts)) == cert["n"] * int(m_str)
                )
                add(f"ap-witness-m={m_str}", ok)
    elif kind == "pattern-search":
        e = build_point_set(_seeded(cfg["set"], seed), int(cfg["rank"]), int(cfg["window"]))
        for i, w in enumerate(report["results"]["witnesses"]):
            witness = PatternWitness(
                n=w["n"],
                lam=tuple(w["lambda"]),
                m1=w["m1"],
                lam0=tuple(w["lambda0"]),
                pairs=tuple((p["m"], tuple(p["probe"])) for p in w["pairs"]),
            )
            add(f"pattern-witness-{i}", verify_pattern_witness(e, witness))
    elif kind == "expand-scan":
        sys_ = _parse_system(cfg["system"])
        bset = _parse_set_b(sys_, cfg["set_b"])
        lam = tuple(report["results"]["argmax_lambda"])
        mu = parse_fraction(report["results"]["max_expansion"])
        _, measured = orbit_saturation(sys_, bset, lam)
        add("argmax-measure-reproduces", measured == mu)
    elif kind == "intersect":
        sys_ = _parse_system(cfg["system"])
        bset = _parse_set_b(sys_, cfg["set_b"])
        res = report["results"]
        n, lam, m1 = res["n"], tuple(res["lambda"]), res["m1"]
        claimed = parse_fraction(res["intersection_measure"])
        worst = None
        base = {
            x
            for x in bset
            if _member_shift(sys_, x, tuple(m1 * n * v for v in lam), bset)
        }
        for w in res["probes"]:
            current = set(base)
            for m_k, probe_v in zip(w["ms"], w["probe"], strict=True):
                shift = tuple(m_k * n * lv + n * pv for lv, pv in zip(lam, probe_v))
                current &= {x for x in bset if _member_shift(sys_, x, shift, bset)}
            mu_i = sys_.measure(current)
            worst = mu_i if worst is None else min(worst, mu_i)
            add("probe-intersection-positive", mu_i > 0)
        if worst is None:
            worst = sys_.measure(base)
        add("intersection-measure-reproduces", worst == claimed)
    elif kind == "haystack-verify":
        vectors = [tuple(v) for v in report["results"]["vectors"]]
        verdict = verify_haystack_sample(vectors, int(cfg["rank"]))
        add("haystack-verdict-reproduces", verdict.ok == report["results"]["ok"])
    elif kind == "spectral-report":
        sys_ = _parse_system(cfg["system"])
        bset = _parse_set_b(sys_, cfg["set_b"])
        if isinstance(sys_, FiniteSystem):
            sigma = spectral_measure(sys_, bset)
            add(
                "total-mass-reproduces",
                ser_weight(sigma.total) == report["results"]["total_mass"],
            )
            add(
                "trivial-mass-reproduces",
                ser_weight(sigma.trivial) == report["results"]["trivial_mass"],
            )
        else:
            sigma = spectral_measure_kronecker(sys_, bset, int(cfg.get("trunc", 64)))
            add(
                "tail-reproduces",
                ser_weight(sigma.tail) == report["results"]["tail"],
            )
    elif kind == "decompose":
        sys_ = _parse_system(cfg["system"])
        bset = _parse_set_b(sys_, cfg["set_b"])
        eps_o = parse_fraction(cfg.get("eps_o", "1/10"))
        shrink = shrink_rational_spectrum(sys_, bset, eps_o)
        add("shrink-n-reproduces", shrink.n == report["results"]["shrink"]["n"])
        add(
            "shrink-mass-below-eps_o",
            shrink.rational_mass < eps_o,
        )
    elif kind == "density":
        est = upper_density_estimate(
            _seeded(cfg["set"], seed), int(cfg["rank"]), cfg["windows"]
        )
        add(
            "densities-reproduce",
            [ser_fraction(d) for d in est.densities] == report["results"]["densities"],
        )
    else:
        raise ConfigError(f"cannot verify reports for experiment {kind!r}")
    return checks


def _member_shift(sys_: FiniteSystem, x, lam_total, bset) -> bool:
    shift = sys_.phi(lam_total)
    back = (
        tuple((a - s) % d for a, s, d in zip(x, shift, sys_.moduli, strict=True))
        if sys_.moduli
        else ()
    )
    return back in bset


# ---------------------------------------------------------------------------
# entry point

def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="latspec", description="exact lattice-dynamics experiments"
    )
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", required=True, help="JSON config path")
    parser.add_argument("--out", help="report path (default stdout); with --verify-only, the report to check")
    parser.add_argument("--csv", help="CSV export path for tabular outputs")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--seed", type=int, help="overrides the config seed")
    parser.add_argument(
        "--verify-only",
        action="store_true",
        help="recheck the witnesses in an existing report instead of running",
    )
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        _log(f"config error: {exc}")
        return 2

    if cfg.get("experiment", args.experiment) != args.experiment:
        _log("config error: config 'experiment' does not match the subcommand")
        return 2

    seed = args.seed if args.seed is not None else cfg.get("seed")

    if args.verify_only:
        if not args.out:
            _log("config error: --verify-only needs --out pointing at the report")
            return 2
        try:
            with open(args.out) as fh:
                report = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            _log(f"config error: {exc}")
            return 2
        try:
            checks = _verify_report(report)
        except ConfigError as exc:
            _log(f"config error: {exc}")
            return 2
        for chk in checks:
            _log(f"{'PASS' if chk['pass'] else 'FAIL'}  {chk['name']}")
        return 0 if all(c["pass"] for c in checks) else 1

    start = time.monotonic()
    try:
        results, verdicts, rows, header = _RUNNERS[args.experiment](cfg, seed, args.threads)
    except ConfigError as exc:
        _log(f"config error: {exc}")
        return 2
    except (KeyError, TypeError, ValueError) as exc:
        _log(f"config error: {exc}")
        return 2
    except (AssertionError, RuntimeError) as exc:
        _log(f"hard failure: {exc}")
        return 1
    elapsed = time.monotonic() - start

    report = {
        "library": "latspec",
        "version": __version__,
        "experiment": args.experiment,
        "config": cfg,
        "seed": seed,
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "elapsed_seconds": round(elapsed, 6),
        "results": results,
        "verdicts": verdicts,
    }
    body = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(body + "\n")
        _log(f"report written to {args.out}")
    else:
        print(body)
    if args.csv:
        if rows is None:
            _log("config error: this experiment has no tabular output for --csv")
            return 2
        _write_csv(args.csv, header, rows)
        _log(f"csv written to {args.csv}")
    for v in verdicts:
        _log(f"{'PASS' if v['pass'] else 'FAIL'}  {v['name']}")
    return 0 if all(v["pass"] for v in verdicts) else 1


if __name__ == "__main__":
    sys.exit(main())
