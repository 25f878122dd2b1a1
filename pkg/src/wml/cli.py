"""Command line: ``wml run <config>`` and ``wml oracle discrepancy <file>``.

A config is an INI file::

    [experiment]
    kind = moment
    seed = 11
    samples = 1000

    [family]
    polynomials = T^2; T

    [parameters]
    k = 1
    rho = 2
    N = 256, 512, 1024

    [check]
    slack = 0.2

Exit status: 0 when every check passes, 2 when a bound check fails (the
summary is still written), 1 for usage and configuration errors.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .discrepancy import (
    brute_force_discrepancy,
    erdos_turan_bound,
    exact_discrepancy,
    polynomial_fractional_parts,
    read_sequence,
)
from .errors import ConfigInvalid, DegenerateLadder, WMLError
from .explab import (
    box_count_experiment,
    dump_json,
    fit_exponent,
    measure_from_samples,
    moment_estimate,
    moment_from_samples,
    pointwise_majorant,
    sample_discrepancy,
    sample_short,
    sample_sup,
    write_samples_csv,
)
from .explab.sampling import default_threads
from .polyfam import WeightSpec, exponent_report, format_fraction, parse_family
from .sumeval import ENGINES, eval_sum
from .supopt import BudgetSpec, sup_fiber, sup_short

__all__ = ["KINDS", "ExperimentConfig", "load_config", "run_experiment", "main"]

KINDS = (
    "exponents",
    "sum",
    "sup",
    "measure",
    "boxcount",
    "moment",
    "short-moment",
    "discrepancy",
    "disc-moment",
    "majorant",
    "fit",
)
STOCHASTIC = {"measure", "moment", "short-moment", "disc-moment"}

# (section, key) pairs each kind cannot run without
REQUIRED = {
    "exponents": [("family", "polynomials"), ("parameters", "k")],
    "sum": [("family", "polynomials"), ("parameters", "x"), ("parameters", "N")],
    "sup": [("family", "polynomials"), ("parameters", "x"), ("parameters", "N")],
    "measure": [
        ("family", "polynomials"),
        ("parameters", "k"),
        ("parameters", "N"),
        ("parameters", "alpha"),
        ("experiment", "samples"),
    ],
    "boxcount": [("family", "polynomials"), ("parameters", "N"), ("parameters", "alpha")],
    "moment": [
        ("family", "polynomials"),
        ("parameters", "k"),
        ("parameters", "rho"),
        ("parameters", "N"),
    ],
    "short-moment": [
        ("parameters", "d"),
        ("parameters", "rho"),
        ("parameters", "N"),
        ("experiment", "samples"),
    ],
    "discrepancy": [],
    "disc-moment": [
        ("family", "polynomials"),
        ("parameters", "k"),
        ("parameters", "rho"),
        ("parameters", "N"),
        ("experiment", "samples"),
    ],
    "majorant": [("parameters", "d"), ("parameters", "x"), ("parameters", "N")],
    "fit": [("parameters", "points")],
}


@dataclass
class ExperimentConfig:
    """Sections of ``key = value`` strings plus the directory relative paths resolve against."""

    sections: dict
    base_dir: Path = field(default_factory=Path.cwd)

    @property
    def kind(self) -> str:
        return self.get("experiment", "kind", "")

    def get(self, section: str, key: str, default=None):
        return self.sections.get(section, {}).get(key, default)

    def has(self, section: str, key: str) -> bool:
        return key in self.sections.get(section, {})

    def set(self, section: str, key: str, value) -> None:
        self.sections.setdefault(section, {})[key] = str(value)

    def _convert(self, section, key, conv, default):
        raw = self.get(section, key)
        if raw is None:
            if default is None:
                raise ConfigInvalid(f"missing [{section}] {key}")
            return default
        try:
            return conv(raw.strip())
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(f"[{section}] {key} = {raw!r}: {exc}") from None

    def int(self, section, key, default=None) -> int:
        return self._convert(section, key, int, default)

    def float(self, section, key, default=None) -> float:
        return self._convert(section, key, lambda s: float(Fraction(s)), default)

    def floats(self, section, key, default=None) -> list:
        return self._convert(
            section, key, lambda s: [float(Fraction(t)) for t in _split(s)], default
        )

    def ints(self, section, key, default=None) -> list:
        return self._convert(section, key, lambda s: [int(t) for t in _split(s)], default)

    def flag(self, section, key, default=False) -> bool:
        raw = self.get(section, key)
        if raw is None:
            return default
        value = raw.strip().lower()
        if value in ("1", "yes", "true", "on"):
            return True
        if value in ("0", "no", "false", "off"):
            return False
        raise ConfigInvalid(f"[{section}] {key} = {raw!r} is not a boolean")

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigInvalid(f"unknown experiment kind {self.kind!r}; choose from {', '.join(KINDS)}")
        for section, key in REQUIRED[self.kind]:
            if not self.has(section, key):
                raise ConfigInvalid(f"kind {self.kind} needs [{section}] {key}")
        if self.kind in STOCHASTIC and not self.has("experiment", "seed"):
            raise ConfigInvalid(f"kind {self.kind} is stochastic and needs [experiment] seed")
        if self.kind == "discrepancy" and not (
            self.has("parameters", "sequence") or self.has("family", "polynomials")
        ):
            raise ConfigInvalid("kind discrepancy needs [parameters] sequence or a family")

    def to_dict(self) -> dict:
        return {s: dict(sorted(v.items())) for s, v in sorted(self.sections.items())}


def _split(text: str) -> list:
    return [t.strip() for t in text.replace(";", ",").split(",") if t.strip()]


def load_config(path) -> ExperimentConfig:
    """Read an INI config, or the ``config`` block of a JSON summary."""
    path = Path(path)
    if not path.exists():
        raise ConfigInvalid(f"config {path} not found")
    if path.suffix == ".json":
        try:
            sections = json.loads(path.read_text())["config"]
        except (ValueError, KeyError) as exc:
            raise ConfigInvalid(f"{path} is not a summary with a config block: {exc}") from None
        sections = {s: {k: str(v) for k, v in kv.items()} for s, kv in sections.items()}
    else:
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            parser.read_string(path.read_text())
        except configparser.Error as exc:
            raise ConfigInvalid(f"{path}: {exc}") from None
        sections = {s: dict(parser.items(s)) for s in parser.sections()}
    cfg = ExperimentConfig(sections, path.resolve().parent)
    if not cfg.has("experiment", "output"):
        cfg.set("experiment", "output", path.stem)
    return cfg


# ----------------------------------------------------------------------------
# shared pieces


def _family(cfg):
    text = cfg.get("family", "polynomials")
    try:
        return parse_family(text.replace(",", ";"))
    except WMLError as exc:
        raise ConfigInvalid(f"[family] polynomials: {exc}") from None


def _weights(cfg):
    raw = cfg.get("family", "weights", "unit").strip()
    if raw == "unit":
        return WeightSpec.unit()
    try:
        return WeightSpec.from_table([complex(t.replace(" ", "")) for t in _split(raw)])
    except ValueError as exc:
        raise ConfigInvalid(f"[family] weights: {exc}") from None


def _budget(cfg):
    grid = cfg.get("budget", "coarse_grid")
    try:
        return BudgetSpec(
            max_evaluations=cfg.int("budget", "max_evaluations", BudgetSpec.max_evaluations),
            coarse_grid=tuple(int(t) for t in _split(grid)) if grid else None,
            multistarts=cfg.int("budget", "multistarts", BudgetSpec.multistarts),
            ascent_iterations=cfg.int("budget", "ascent_iterations", BudgetSpec.ascent_iterations),
        )
    except ValueError as exc:
        raise ConfigInvalid(f"[budget]: {exc}") from None


def _check(name, value, bound, passed):
    return {"name": name, "value": value, "bound": bound, "passed": bool(passed)}


def _fit_checks(cfg, label, ladder, expected_exponent, checks, results):
    """Fit both sides of a moment ladder and apply any configured slope checks."""
    if len(ladder) < 3:
        return
    fits = {}
    for side in ("lower", "upper"):
        pts = [(e.N, getattr(e, f"mean_{side}")) for e in ladder]
        if all(v > 0 for _, v in pts):
            fits[side] = fit_exponent(pts)
    results.append({"fit": {side: f.as_dict() for side, f in fits.items()}})
    side = cfg.get("check", "fit_side", "upper").strip()
    if side not in ("lower", "upper"):
        raise ConfigInvalid("[check] fit_side must be lower or upper")
    fit = fits.get(side)
    if fit is None:
        return
    if cfg.has("check", "slope_min"):
        lo = cfg.float("check", "slope_min")
        checks.append(_check(f"{label} slope ({side}) >= min", fit.slope, lo, fit.slope >= lo))
    if cfg.has("check", "slope_max"):
        hi = cfg.float("check", "slope_max")
        checks.append(_check(f"{label} slope ({side}) <= max", fit.slope, hi, fit.slope <= hi))
    if cfg.has("check", "fit_slack"):
        hi = expected_exponent + cfg.float("check", "fit_slack")
        checks.append(
            _check(f"{label} slope ({side}) <= exponent + fit_slack", fit.slope, hi, fit.slope <= hi)
        )


def _bound_check(checks, label, N, value, exponent, slack, applicable):
    """``value <= N^(exponent + slack)``; skipped (bound ``None``) outside the valid rho range."""
    if not applicable:
        return None
    bound = float(N) ** (exponent + slack)
    checks.append(
        _check(f"{label} mean_upper <= N^(exponent+slack) at N={N}", value, bound, value <= bound)
    )
    return bound


def _moment_ladder(cfg, label, sampler, rho, exponent, applicable):
    """Shared loop for the moment kinds: one estimate per N, bound per N, fits."""
    slack = cfg.float("check", "slack", 0.2)
    results, checks, runs, ladder = [], [], [], []
    for N in cfg.ints("parameters", "N"):
        samp = sampler(N)
        est = moment_from_samples(samp, rho)
        runs.append(samp)
        ladder.append(est)
        bound = _bound_check(checks, label, N, est.mean_upper, exponent, slack, applicable)
        results.append(dict(est.as_dict(), bound=bound))
    _fit_checks(cfg, label, ladder, exponent, checks, results)
    return results, checks, runs


# ----------------------------------------------------------------------------
# kinds


def _run_exponents(cfg, threads):
    fam = _family(cfg)
    theta = Fraction(cfg.get("parameters", "theta", "1").strip())
    rep = exponent_report(fam, cfg.int("parameters", "k"), theta)
    out = rep.as_dict()
    if cfg.has("parameters", "rho"):
        rho = Fraction(cfg.get("parameters", "rho").strip())
        out["rho"] = format_fraction(rho)
        out["rho_mu"] = format_fraction(rho * rep.mu)
    return [out], [], None


def _run_sum(cfg, threads):
    fam = _family(cfg)
    w = _weights(cfg)
    x = cfg.floats("parameters", "x")
    y = cfg.floats("parameters", "y", [])
    K = cfg.int("family", "K", 0)
    engines = _split(cfg.get("parameters", "engine", "direct"))
    for e in engines:
        if e not in ENGINES:
            raise ConfigInvalid(f"unknown engine {e!r}")
    results = []
    for N in cfg.ints("parameters", "N"):
        for e in engines:
            v = eval_sum(fam, w, x, y, N, K, e)
            results.append(
                {"N": N, "engine": e, "value": v.value, "abs": abs(v.value), "error_bound": v.error_bound}
            )
    return results, [], None


def _run_sup(cfg, threads):
    fam = _family(cfg)
    w = _weights(cfg)
    x = cfg.floats("parameters", "x")
    K = cfg.int("family", "K", 0)
    budget = _budget(cfg)
    results = []
    for N in cfg.ints("parameters", "N"):
        est = sup_fiber(fam, w, x, N, budget, K)
        results.append(
            {
                "N": N,
                "lower": est.lower,
                "upper": est.upper,
                "witness": list(est.witness.coords),
                "evaluations": est.evaluations,
                "mesh": list(est.mesh),
                "exhausted": est.exhausted,
            }
        )
    return results, [], None


def _run_measure(cfg, threads):
    fam = _family(cfg)
    w = _weights(cfg)
    k = cfg.int("parameters", "k")
    K = cfg.int("family", "K", 0)
    rep = exponent_report(fam, k)
    a = float(rep.s + rep.sigma_k + rep.d - k)
    b = float(rep.rho_max)
    slack = cfg.float("check", "slack", 0.2)
    samples = cfg.int("experiment", "samples")
    seed = cfg.int("experiment", "seed")
    budget = _budget(cfg)
    results, checks, runs = [], [], []
    for N in cfg.ints("parameters", "N"):
        samp = sample_sup(fam, w, k, N, samples, budget, seed, K, threads)
        runs.append(samp)
        for alpha in cfg.floats("parameters", "alpha"):
            T = float(N) ** alpha
            est = measure_from_samples(samp, T)
            bound = float(N) ** a * T ** (-b) * float(N) ** slack
            results.append(dict(est.as_dict(), alpha=alpha, bound=bound))
            checks.append(
                _check(
                    f"fraction_upper <= N^a T^-b N^slack at N={N}, alpha={alpha}",
                    est.fraction_upper,
                    bound,
                    est.fraction_upper <= bound,
                )
            )
    return results, checks, (runs, 1.0)


def _run_boxcount(cfg, threads):
    fam = _family(cfg)
    w = _weights(cfg)
    eps = cfg.float("parameters", "eps", 0.05)
    slack = cfg.float("check", "slack", 0.2)
    results, checks = [], []
    for N in cfg.ints("parameters", "N"):
        for alpha in cfg.floats("parameters", "alpha"):
            rep = box_count_experiment(
                fam,
                w,
                N,
                alpha,
                eps,
                sampler_density=cfg.int("parameters", "sampler_density", 4),
                levels=cfg.int("parameters", "levels", 3),
                slack=slack,
                cap=cfg.int("parameters", "cap", 10**6),
                K=cfg.int("family", "K", 0),
            )
            results.append(rep.as_dict())
            checks.append(
                _check(f"marked <= bound at N={N}, alpha={alpha}", rep.marked, rep.bound, rep.within_bound)
            )
    return results, checks, None


def _run_moment(cfg, threads):
    fam = _family(cfg)
    w = _weights(cfg)
    k = cfg.int("parameters", "k")
    rho = cfg.float("parameters", "rho")
    K = cfg.int("family", "K", 0)
    budget = _budget(cfg)
    seed = cfg.int("experiment", "seed")
    method = cfg.get("parameters", "method", "monte_carlo").strip()
    rep = exponent_report(fam, k)
    exponent = float(rep.mu) * rho
    applicable = rho <= rep.rho_max
    if method == "quadrature":
        slack = cfg.float("check", "slack", 0.2)
        results, checks = [], []
        for N in cfg.ints("parameters", "N"):
            est = moment_estimate(
                fam, w, k, rho, N, budget=budget, seed=seed, K=K, threads=threads,
                method="quadrature", quadrature_points=cfg.int("parameters", "quadrature_points", 20000),
            )
            bound = _bound_check(checks, "moment", N, est.mean_upper, exponent, slack, applicable)
            results.append(dict(est.as_dict(), bound=bound))
        return results, checks, None
    if method != "monte_carlo":
        raise ConfigInvalid(f"unknown method {method!r}")
    samples = cfg.int("experiment", "samples")
    sampler = lambda N: sample_sup(fam, w, k, N, samples, budget, seed, K, threads)  # noqa: E731
    results, checks, runs = _moment_ladder(cfg, "moment", sampler, rho, exponent, applicable)
    return results, checks, (runs, rho)


def _run_short_moment(cfg, threads):
    d = cfg.int("parameters", "d")
    if d < 2:
        raise ConfigInvalid("short-moment needs d >= 2")
    rho = cfg.float("parameters", "rho")
    samples = cfg.int("experiment", "samples")
    seed = cfg.int("experiment", "seed")
    budget = _budget(cfg)
    mu_d = 1 - d / (d * d + 2 * d - 1)
    sampler = lambda N: sample_short(d, N, samples, budget, seed, threads)  # noqa: E731
    applicable = rho <= d * d + 2 * d - 1
    results, checks, runs = _moment_ladder(cfg, "short-moment", sampler, rho, mu_d * rho, applicable)
    return results, checks, (runs, rho)


def _run_disc_moment(cfg, threads):
    fam = _family(cfg)
    k = cfg.int("parameters", "k")
    rho = cfg.float("parameters", "rho")
    if rho < 1:
        raise ConfigInvalid("disc-moment needs rho >= 1")
    K = cfg.int("family", "K", 0)
    samples = cfg.int("experiment", "samples")
    seed = cfg.int("experiment", "seed")
    budget = _budget(cfg)
    rep = exponent_report(fam, k)
    exponent = float(rep.mu) * rho
    sampler = lambda N: sample_discrepancy(fam, k, N, samples, budget, seed, K, threads)  # noqa: E731
    results, checks, runs = _moment_ladder(
        cfg, "disc-moment", sampler, rho, exponent, rho <= rep.rho_max
    )
    return results, checks, (runs, rho)


def _run_discrepancy(cfg, threads):
    if cfg.has("parameters", "sequence"):
        seq_path = cfg.base_dir / cfg.get("parameters", "sequence").strip()
        seqs = [("file", read_sequence(seq_path))]
    else:
        fam = _family(cfg)
        x = cfg.floats("parameters", "x")
        y = cfg.floats("parameters", "y", [])
        K = cfg.int("family", "K", 0)
        seqs = [(N, polynomial_fractional_parts(fam, x, y, N, K)) for N in cfg.ints("parameters", "N")]
    results, checks = [], []
    for label, seq in seqs:
        res = exact_discrepancy(seq)
        row = {
            "source": label,
            "N": seq.N,
            "value": res.value,
            "excess": res.excess,
            "deficit": res.deficit,
            "excess_interval": list(res.excess_interval),
            "deficit_interval": list(res.deficit_interval),
        }
        if cfg.flag("parameters", "brute_force"):
            ref = brute_force_discrepancy(seq.values)
            row["brute_force"] = ref
            checks.append(_check(f"exact matches brute force ({label})", res.value, ref, abs(res.value - ref) <= 1e-9))
        for G in cfg.ints("parameters", "G", []):
            et = erdos_turan_bound(seq, G)
            row[f"erdos_turan_G{G}"] = et
            checks.append(_check(f"Erdos-Turan majorant G={G} ({label})", res.value, et, et >= res.value))
        results.append(row)
    return results, checks, None


def _run_majorant(cfg, threads):
    d = cfg.int("parameters", "d")
    if d not in (2, 3):
        raise ConfigInvalid("majorant needs d = 2 or 3")
    budget = _budget(cfg)
    power = 2 if d == 2 else 4
    results = []
    for N in cfg.ints("parameters", "N"):
        for x in cfg.floats("parameters", "x"):
            maj = pointwise_majorant(x, N, d)
            est = sup_short(x, d, N, budget)
            results.append(
                {
                    "N": N,
                    "x": x,
                    "majorant": maj,
                    "sup_lower": est.lower,
                    "sup_upper": est.upper,
                    "ratio_lower": est.lower**power / maj,
                    "ratio_upper": est.upper**power / maj,
                }
            )
    return results, [], None


def _run_fit(cfg, threads):
    pts = []
    for item in _split(cfg.get("parameters", "points")):
        try:
            N, v = item.split(":")
            pts.append((float(N), float(v)))
        except ValueError:
            raise ConfigInvalid(f"[parameters] points entry {item!r} is not N:value") from None
    fit = fit_exponent(pts)
    checks = []
    if cfg.has("check", "slope_min"):
        lo = cfg.float("check", "slope_min")
        checks.append(_check("slope >= min", fit.slope, lo, fit.slope >= lo))
    if cfg.has("check", "slope_max"):
        hi = cfg.float("check", "slope_max")
        checks.append(_check("slope <= max", fit.slope, hi, fit.slope <= hi))
    return [fit.as_dict()], checks, None


_RUNNERS = {
    "exponents": _run_exponents,
    "sum": _run_sum,
    "sup": _run_sup,
    "measure": _run_measure,
    "boxcount": _run_boxcount,
    "moment": _run_moment,
    "short-moment": _run_short_moment,
    "discrepancy": _run_discrepancy,
    "disc-moment": _run_disc_moment,
    "majorant": _run_majorant,
    "fit": _run_fit,
}


def run_experiment(cfg: ExperimentConfig, out_dir=".", threads: Optional[int] = None):
    """Run one config; returns ``(exit_code, summary, summary_path)``.

    ``threads`` affects speed only; it is not part of the summary.
    """
    cfg.validate()
    threads = default_threads() if threads is None else max(1, int(threads))
    results, checks, csv_runs = _RUNNERS[cfg.kind](cfg, threads)
    passed = all(c["passed"] for c in checks)
    summary = {
        "kind": cfg.kind,
        "config": cfg.to_dict(),
        "results": results,
        "checks": checks,
        "passed": passed,
    }
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = cfg.get("experiment", "output").strip()
    path = out / f"{name}.json"
    dump_json(summary, path)
    if csv_runs is not None and cfg.flag("experiment", "csv", True):
        runs, rho = csv_runs
        write_samples_csv(runs, rho, out / f"{name}.csv")
    return (0 if passed else 2), summary, path


def _oracle_discrepancy(path) -> dict:
    seq = read_sequence(path)
    exact = exact_discrepancy(seq)
    return {"N": seq.N, "brute_force": brute_force_discrepancy(seq.values), "exact": exact.value}


def _parser():
    p = argparse.ArgumentParser(prog="wml", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--threads", type=int, default=None)
    run.add_argument("--out", default=".")
    oracle = sub.add_parser("oracle", help="reference computations")
    osub = oracle.add_subparsers(dest="oracle", required=True)
    disc = osub.add_parser("discrepancy", help="brute-force extreme discrepancy of a point file")
    disc.add_argument("file")
    return p


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        if args.command == "oracle":
            print(dump_json(_oracle_discrepancy(args.file)), end="")
            return 0
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.set("experiment", "seed", args.seed)
        code, summary, path = run_experiment(cfg, args.out, args.threads)
    except (ConfigInvalid, DegenerateLadder) as exc:
        print(f"wml: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (WMLError, OSError, ValueError) as exc:
        print(f"wml: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for c in summary["checks"]:
        mark = "ok  " if c["passed"] else "FAIL"
        print(f"{mark} {c['name']}: {c['value']!r} vs {c['bound']!r}")
    print(f"summary written to {path}")
    return code


if __name__ == "__main__":
    sys.exit(main())
