"""Experiment configuration, CSV ingestion and JSON reporting."""

import csv
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import diagnostics, ellipsoid, rkhs, specnorm
from . import rng as crng
from .bootstrap import (
    build_sphere_net,
    evaluate_linear_net,
    gaussian_process_bootstrap,
    ks_mc_error,
    quantile,
)
from .covariance import EvaluatedSample, admissibility_check, sample_cov_function
from .exceptions import ConfigInvalid, ParseError, RaggedRows

SEED_MAX = (1 << 64) - 1

DEFAULTS = {
    "berry_esseen": {"generator": "rank_one", "d": 10, "n_list": [25, 100, 400],
                     "B": 100_000, "rho": 0.5, "a": None},
    "anticoncentration": {"cases": 20, "d_max": 8, "eps": [0.05, 0.2], "B": 200_000},
    "ellipsoid_coverage": {"d": 50, "n": 200, "alpha": 0.1, "reps": 2000, "B": 5000,
                           "ratio": 0.5, "remainder_scale": 0.0},
    "specnorm_coverage": {"sigma_diag": [1.0, 0.25, 0.0625], "n": 500, "alpha": 0.1,
                          "reps": 1000, "B": 2000},
    "rkhs_band": {"n": 200, "alpha": 0.1, "reps": 500, "B": 1000, "lam": 1e-5,
                  "kernel": {"kind": "gaussian", "bandwidth": 0.3}, "noise": 0.3,
                  "grid_size": 50, "variance": "plugin"},
    "bootstrap": {"data": None, "n": 200, "d": 5, "net_size": 200, "m": "full",
                  "B": 2000, "alpha": 0.1, "write_draws": False},
}
EXPERIMENTS = tuple(DEFAULTS)
POSITIVE_INTS = ("d", "n", "B", "reps", "cases", "d_max", "grid_size", "net_size")


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int
    params: dict = field(default_factory=dict)
    output: str = "."

    def to_dict(self):
        return {"experiment": self.experiment, "seed": self.seed, **self.params}


def _is_int(v):
    return isinstance(v, (int, np.integer)) and not isinstance(v, bool)


def _check_params(p):
    for key in POSITIVE_INTS:
        if key in p and not (_is_int(p[key]) and p[key] > 0):
            raise ConfigInvalid(key, f"must be a positive integer, got {p[key]!r}")
    if "alpha" in p and not (isinstance(p["alpha"], (int, float)) and 0 < p["alpha"] < 1):
        raise ConfigInvalid("alpha", f"must lie in (0, 1), got {p['alpha']!r}")
    if "rho" in p and not 0 <= p["rho"] < 1:
        raise ConfigInvalid("rho", f"must lie in [0, 1), got {p['rho']!r}")
    if "lam" in p and not p["lam"] > 0:
        raise ConfigInvalid("lam", "must be positive")
    if "B" in p and p["B"] < 100:
        raise ConfigInvalid("B", f"must be at least 100, got {p['B']}")
    if "n_list" in p:
        nl = p["n_list"]
        if (not isinstance(nl, list) or not nl or not all(_is_int(v) and v > 0 for v in nl)
                or any(b <= a for a, b in zip(nl, nl[1:]))):
            raise ConfigInvalid("n_list", "must be a strictly increasing list of positive integers")
    if "generator" in p and p["generator"] not in diagnostics.GENERATORS:
        raise ConfigInvalid("generator", f"must be one of {diagnostics.GENERATORS}")
    if "eps" in p and not (isinstance(p["eps"], list) and p["eps"]
                           and all(e > 0 for e in p["eps"])):
        raise ConfigInvalid("eps", "must be a nonempty list of positive widths")
    if "m" in p and p["m"] != "full" and not (_is_int(p["m"]) and p["m"] > 0):
        raise ConfigInvalid("m", "must be a positive integer or 'full'")
    if "variance" in p and p["variance"] not in rkhs.VARIANCE_FORMS:
        raise ConfigInvalid("variance", f"must be one of {rkhs.VARIANCE_FORMS}")
    if "sigma_diag" in p and not (isinstance(p["sigma_diag"], list) and p["sigma_diag"]
                                  and all(v >= 0 for v in p["sigma_diag"])):
        raise ConfigInvalid("sigma_diag", "must be a nonempty list of nonnegative variances")
    if "kernel" in p:
        try:
            rkhs.KernelSpec(**p["kernel"])
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid("kernel", str(exc)) from None


def parse_config(raw, seed=None, output=None):
    """Validate a config mapping; CLI ``seed``/``output`` override file values."""
    if not isinstance(raw, dict):
        raise ConfigInvalid("<root>", "config must be a JSON object")
    raw = dict(raw)
    exp = raw.pop("experiment", None)
    if exp not in DEFAULTS:
        raise ConfigInvalid("experiment", f"must be one of {EXPERIMENTS}, got {exp!r}")
    file_seed = raw.pop("seed", None)
    file_out = raw.pop("output", None)
    seed = file_seed if seed is None else seed
    if seed is None:
        raise ConfigInvalid("seed", "a seed is required")
    if not (_is_int(seed) and 0 <= seed <= SEED_MAX):
        raise ConfigInvalid("seed", f"must be an integer in [0, 2^64), got {seed!r}")
    unknown = sorted(set(raw) - set(DEFAULTS[exp]))
    if unknown:
        raise ConfigInvalid(unknown[0], f"unknown field for experiment {exp}")
    params = {**DEFAULTS[exp], **raw}
    _check_params(params)
    if exp == "ellipsoid_coverage" and params["reps"] < 100:
        raise ConfigInvalid("reps", "must be at least 100")
    return ExperimentConfig(exp, int(seed), params, output or file_out or ".")


def load_config(path, seed=None, output=None):
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigInvalid("<root>", f"not valid JSON: {exc}") from None
    return parse_config(raw, seed, output)


def _parse_cell(text, row, col):
    try:
        v = float(text)
    except ValueError:
        raise ParseError(row, col, f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise ParseError(row, col, f"non-finite value: {text!r}")
    return v


def ingest_csv(path):
    """Read a rectangular numeric CSV; a non-numeric first row is a header.

    Row and column numbers in errors are 1-based and count the header.
    """
    with open(path, newline="") as fh:
        rows = [(i, r) for i, r in enumerate(csv.reader(fh), start=1)
                if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError(1, 1, "file contains no data")
    first = rows[0][1]
    try:
        [float(c) for c in first]
    except ValueError:
        rows = rows[1:]
    if not rows:
        raise ParseError(2, 1, "file contains a header but no data")
    width = len(rows[0][1])
    data = []
    for lineno, r in rows:
        if len(r) != width:
            raise RaggedRows(lineno, width, len(r))
        data.append([_parse_cell(c.strip(), lineno, j) for j, c in enumerate(r, start=1)])
    return np.array(data, dtype=float)


def _check(name, ok, **info):
    return {"name": name, "pass": bool(ok), **info}


def run_berry_esseen(cfg, n_jobs=None):
    p = cfg.params
    dists = diagnostics.berry_esseen_decay(p["generator"], p["d"], p["n_list"], p["B"],
                                           cfg.seed, p["rho"], p["a"])
    mc = ks_mc_error(p["B"], p["B"])
    rows = [{"n": n, "distance": dist, "mc_error": mc} for n, dist in dists]
    checks = [_check("nonincreasing_within_2mc",
                     all(b["distance"] <= a["distance"] + 2 * mc for a, b in zip(rows, rows[1:])))]
    if p["generator"] == "rank_one":
        for r in rows:
            r["exact"] = diagnostics.exact_rank_one_distance(r["n"])
        last = rows[-1]
        checks.append(_check("largest_n_exact_distance_le_0.05", last["exact"] <= 0.05))
        checks.append(_check("simulation_matches_exact_within_3mc",
                             all(abs(r["distance"] - r["exact"]) <= 3 * mc for r in rows)))
    return {"distances": rows}, checks


def run_anticoncentration(cfg, n_jobs=None):
    p = cfg.params
    cases = []
    n_pass = 0
    for case in range(p["cases"]):
        stream = crng.CounterStream(cfg.seed, crng.derive_stream(3, case))
        d = 1 + int(stream.uniform() * p["d_max"])
        sigma = diagnostics.random_psd(d, stream)
        var, reports = diagnostics.anticoncentration_case(
            sigma, p["eps"], p["B"], cfg.seed, crng.derive_stream(4, case))
        ok = all(r.passed for r in reports)
        n_pass += ok
        cases.append({"case": case, "d": d, "var": var, "pass": ok,
                      "reports": [r.to_dict() for r in reports]})
    need = math.ceil(0.95 * p["cases"])
    return ({"cases": cases, "passed": n_pass},
            [_check("sandwich_holds_in_95pct_of_cases", n_pass >= need,
                    cases_passed=n_pass, required=need)])


def run_ellipsoid(cfg, n_jobs=None):
    p = cfg.params
    omega = ellipsoid.decaying_cov(p["d"], p["ratio"])
    cov = ellipsoid.coverage_simulation(omega, p["d"], p["n"], p["alpha"], p["reps"], p["B"],
                                        cfg.seed, p["remainder_scale"], n_jobs=n_jobs)
    target = 1 - p["alpha"]
    return ({"coverage": cov, "effective_rank": ellipsoid.effective_rank(omega)},
            [_check("coverage_within_0.03", abs(cov - target) <= 0.03, target=target)])


def run_specnorm(cfg, n_jobs=None):
    p = cfg.params
    sigma = np.diag(p["sigma_diag"])
    cov = specnorm.specnorm_coverage(sigma, p["n"], p["reps"], p["B"], p["alpha"],
                                     cfg.seed, n_jobs=n_jobs)
    target = 1 - p["alpha"]
    return ({"coverage": cov},
            [_check("coverage_within_0.04", abs(cov - target) <= 0.04, target=target)])


def run_rkhs(cfg, n_jobs=None):
    p = cfg.params
    k = rkhs.KernelSpec(**p["kernel"])
    if k.kind != "gaussian":
        raise ConfigInvalid("kernel", "the band coverage study uses a gaussian kernel")
    cov = rkhs.band_coverage(p["n"], p["alpha"], p["reps"], p["lam"], k.bandwidth, p["noise"],
                             p["grid_size"], p["B"], cfg.seed, p["variance"], n_jobs=n_jobs)
    floor = 1 - p["alpha"] - 0.05
    return ({"coverage": cov},
            [_check("coverage_at_least_target_minus_0.05", cov >= floor, floor=floor)])


def run_bootstrap(cfg, n_jobs=None):
    p = cfg.params
    if p["data"]:
        sample = EvaluatedSample(ingest_csv(p["data"]))
        source = "csv"
    else:
        xi = crng.normals(cfg.seed, crng.derive_stream(5, 0), 0, p["n"], p["d"])
        net = build_sphere_net(p["d"], max(p["net_size"], 2 * p["d"]), cfg.seed)
        sample = evaluate_linear_net(xi * np.sqrt(0.5 ** np.arange(p["d"])), net)
        source = "generated"
    cov = sample_cov_function(sample)
    adm = admissibility_check(cov)
    draws = gaussian_process_bootstrap(sample, p["m"], p["B"], cfg.seed, n_jobs=n_jobs, cov=cov)
    results = {
        "source": source,
        "n": sample.n,
        "net_size": sample.net_size,
        "m": draws.m,
        "degenerate": draws.degenerate,
        "quantile": quantile(draws, 1 - p["alpha"]),
        "draw_mean": float(draws.draws.mean()),
        "draw_sd": float(draws.draws.std(ddof=1)),
        "admissibility": adm,
    }
    checks = [_check("covariance_admissible", adm["symmetric"] and adm["psd_within_tol"])]
    return results, checks, draws.draws


RUNNERS = {
    "berry_esseen": run_berry_esseen,
    "anticoncentration": run_anticoncentration,
    "ellipsoid_coverage": run_ellipsoid,
    "specnorm_coverage": run_specnorm,
    "rkhs_band": run_rkhs,
    "bootstrap": run_bootstrap,
}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def render_report(cfg, results, checks):
    report = {
        "config": cfg.to_dict(),
        "version": __version__,
        "rng": crng.RNG_DESCRIPTION,
        "results": results,
        "checks": checks,
        "status": "pass" if all(c["pass"] for c in checks) else "fail",
    }
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


def run(cfg, n_jobs=None):
    """Run one experiment, write its report, and return ``(exit_code, report_path)``."""
    out = RUNNERS[cfg.experiment](cfg, n_jobs)
    results, checks = out[0], out[1]
    os.makedirs(cfg.output, exist_ok=True)
    path = os.path.join(cfg.output, f"{cfg.experiment}_report.json")
    with open(path, "w") as fh:
        fh.write(render_report(cfg, results, checks))
    if len(out) > 2 and cfg.params.get("write_draws"):
        np.savetxt(os.path.join(cfg.output, f"{cfg.experiment}_draws.csv"), out[2],
                   delimiter=",", header="draw", comments="", fmt="%.17g")
    return (0 if all(c["pass"] for c in checks) else 2), path
