"""Reproducible randomized verification of every determinant relation.

Each trial derives its own generator from (master seed, trial index), so runs
are deterministic at any parallelism and any subset of trials can be replayed.
Relation groups select what gets checked per trial:

    rs          ->  rs
    refined     ->  eq3, eq7-psd, eq8-schur
    weak-chain  ->  eq4a, eq4b
    two-obs     ->  eq9a, eq9b, eq10, furuichi      (only when n = 2 is drawn)
    g-psd       ->  eq16, eq17
    eq18 / eq19 ->  metric-adjusted relations, one sample per f label
    wy-strongest -> wy-strongest (f labels restricted to the admissible class)

A margin below -tol * scale counts as a violation and dumps a reproducer file
in the CLI state/observables JSON format (plus the relation and f label) so the
instance replays through the command line.  Observable counts are drawn with
n <= dim^2 - 1: beyond that every determinant is exactly zero and the
fractional-power margins carry no information.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .gcov import (
    build_Lg,
    cached_lambda,
    check_g_triple,
    check_metric_adjusted,
    eps_kernel,
    f_gram_kernels,
    mean_kernel,
    resolve_monotone,
    wy_strongest_check,
)
from .linalg import DensityMatrix, SkewsharpError, mat_scale
from .serialize import dumps, observables_to_dict, state_to_dict, write_text
from .skew import ObservableSet, check_refined_rs, det_symmetric_psd, two_obs_relations

RELATION_GROUPS = {
    "rs": ("rs",),
    "refined": ("eq3", "eq7-psd", "eq8-schur"),
    "weak-chain": ("eq4a", "eq4b"),
    "two-obs": ("eq9a", "eq9b", "eq10", "furuichi"),
    "g-psd": ("eq16", "eq17"),
    "eq18": ("eq18",),
    "eq19": ("eq19",),
    "wy-strongest": ("wy-strongest",),
}

DEFAULT_GROUPS = tuple(RELATION_GROUPS)

HIST_EDGES = (-math.inf, -1e-8, -1e-10, -1e-12, 0.0, 1e-12, 1e-10, 1e-8,
              1e-6, 1e-4, 1e-2, 1.0, math.inf)


class ConfigError(SkewsharpError):
    pass


@dataclass(eq=False)
class FuzzConfig:
    dims: tuple[int, ...] = (2, 3, 4, 5, 6)
    n_obs: tuple[int, ...] = (1, 2, 3, 4)
    ranks: tuple = ("full", 1)
    trials: int = 1000
    seed: int = 20240501
    relations: tuple[str, ...] = DEFAULT_GROUPS
    f_labels: tuple[str, ...] = ("wy", "sld", "wyd:0.3")
    tol: float = 1e-8
    reproducer_dir: str | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not all(2 <= d <= 8 for d in self.dims):
            raise ConfigError(f"dims must lie in 2..8, got {self.dims}")
        if not all(1 <= n <= 5 for n in self.n_obs):
            raise ConfigError(f"n_obs must lie in 1..5, got {self.n_obs}")
        for r in self.ranks:
            if r != "full" and (not isinstance(r, int) or r < 1):
                raise ConfigError(f"ranks entries must be 'full' or positive ints, got {r!r}")
        unknown = [g for g in self.relations if g not in RELATION_GROUPS]
        if unknown:
            raise ConfigError(f"unknown relation groups {unknown}; valid: {sorted(RELATION_GROUPS)}")
        if not any(n <= d * d - 1 for d in self.dims for n in self.n_obs):
            raise ConfigError("no admissible (dim, n) combination (need n <= dim^2 - 1)")

    def to_dict(self) -> dict:
        return {
            "dims": list(self.dims), "n_obs": list(self.n_obs),
            "ranks": [str(r) for r in self.ranks], "trials": self.trials,
            "seed": self.seed, "relations": list(self.relations),
            "f_labels": list(self.f_labels), "tol": self.tol,
        }


def random_density(dim: int, rank, rng: np.random.Generator) -> DensityMatrix:
    """Ginibre-induced state: G G^dag / Tr with G complex standard normal dim x rank."""
    k = dim if rank == "full" else min(int(rank), dim)
    G = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    M = G @ G.conj().T
    return DensityMatrix.from_matrix(M / np.trace(M).real)


def random_observables(dim: int, n: int, rng: np.random.Generator) -> ObservableSet:
    """GUE observables (G + G^dag)/2."""
    mats = []
    for _ in range(n):
        G = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        mats.append((G + G.conj().T) / 2)
    return ObservableSet.from_matrices(mats)


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


@dataclass(eq=False)
class RelationStats:
    trials: int = 0
    violations: int = 0
    min_margin: float = math.inf
    min_rel_margin: float = math.inf
    histogram: list[int] = field(default_factory=lambda: [0] * (len(HIST_EDGES) - 1))

    def record(self, margin: float, scale: float) -> None:
        self.trials += 1
        rel = margin / scale if math.isfinite(margin) else margin
        self.min_margin = min(self.min_margin, margin)
        self.min_rel_margin = min(self.min_rel_margin, rel)
        idx = len(HIST_EDGES) - 2
        for i in range(len(HIST_EDGES) - 1):
            if HIST_EDGES[i] <= rel < HIST_EDGES[i + 1]:
                idx = i
                break
        self.histogram[idx] += 1

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "violations": self.violations,
            "min_margin": self.min_margin,
            "min_rel_margin": self.min_rel_margin,
            "histogram_edges": list(HIST_EDGES),
            "histogram": list(self.histogram),
        }


@dataclass(eq=False)
class FuzzStats:
    seed: int
    config: dict
    per_relation: dict[str, RelationStats]
    total_trials: int = 0
    total_violations: int = 0
    reproducers: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "version": __version__,
            "seed": self.seed,
            "config": self.config,
            "total_trials": self.total_trials,
            "total_violations": self.total_violations,
            "per_relation": {k: v.to_dict() for k, v in sorted(self.per_relation.items())},
            "reproducers": list(self.reproducers),
        }


def trial_margins(rho: DensityMatrix, X: ObservableSet, groups, fs) -> list[tuple[str, str | None, float, float]]:
    """All (relation, f_label, margin, scale) samples for one instance."""
    wanted = set()
    for g in groups:
        wanted.update(RELATION_GROUPS[g])
    out = []
    rep = check_refined_rs(rho, X)
    for rid in ("rs", "eq3", "eq4a", "eq4b", "eq7-psd", "eq8-schur"):
        if rid in wanted:
            out.append((rid, None, rep.margins[rid], rep.scales[rid]))
    if X.n == 2 and {"eq9a", "eq9b", "eq10", "furuichi"} & wanted:
        two = two_obs_relations(rho, X.observables[0], X.observables[1])
        pick = {
            "eq9a": two.margins["eq9a"],
            "eq9b": min(two.margins["eq9b_1"], two.margins["eq9b_2"]),
            "eq10": two.margins["eq10"],
            "furuichi": two.margins["furuichi"],
        }
        for rid, margin in pick.items():
            if rid in wanted:
                out.append((rid, None, margin, two.scales["eq9a"]))
    if "eq17" in wanted:
        margin = check_g_triple(rho, X, mean_kernel(), mean_kernel(), eps_kernel())
        d_sigma = det_symmetric_psd(rep.sigma)
        out.append(("eq17", None, margin, max(1.0, d_sigma**2)))
    for f in fs:
        if "eq16" in wanted:
            g1, g2 = f_gram_kernels(f)
            L = build_Lg(rho, X, g1, g2)
            lo = float(np.linalg.eigvalsh(L)[0])
            out.append(("eq16", f.label, lo, mat_scale(L)))
        if {"eq18", "eq19"} & wanted:
            mar = check_metric_adjusted(rho, X, f)
            if "eq18" in wanted:
                out.append(("eq18", f.label, mar.margin18, mar.scale18))
            if "eq19" in wanted:
                out.append(("eq19", f.label, mar.margin19, mar.scale19))
        if "wy-strongest" in wanted and f.label == "sld":
            margin = wy_strongest_check(rho, X, f)
            scale = max(1.0, rep.dets["sigma_plus_c"] * rep.dets["sigma_minus_c"])
            out.append(("wy-strongest", f.label, margin, scale))
    return out


def run_fuzz(config: FuzzConfig) -> FuzzStats:
    fs = [resolve_monotone(lbl) for lbl in config.f_labels]
    for f in fs:
        cached_lambda(f)
    combos = [(d, n) for d in config.dims for n in config.n_obs if n <= d * d - 1]
    stats = FuzzStats(seed=config.seed, config=config.to_dict(), per_relation={})
    for trial in range(config.trials):
        rng = _trial_rng(config.seed, trial)
        dim, n = combos[int(rng.integers(len(combos)))]
        rank = config.ranks[int(rng.integers(len(config.ranks)))]
        rho = random_density(dim, rank, rng)
        X = random_observables(dim, n, rng)
        stats.total_trials += 1
        for rid, f_label, margin, scale in trial_margins(rho, X, config.relations, fs):
            rel = stats.per_relation.setdefault(rid, RelationStats())
            rel.record(margin, scale)
            if math.isfinite(margin) and margin < -config.tol * scale:
                rel.violations += 1
                stats.total_violations += 1
                if config.reproducer_dir is not None:
                    path = os.path.join(
                        config.reproducer_dir, f"violation_{rid}_{trial}.json"
                    )
                    write_text(path, dumps({
                        "relation": rid,
                        "f": f_label,
                        "trial": trial,
                        "seed": config.seed,
                        "margin": margin,
                        "scale": scale,
                        "state": state_to_dict(rho),
                        "observables": observables_to_dict(X),
                    }))
                    stats.reproducers.append(path)
    return stats


# ------------------------------------------------------------ strength study

@dataclass(eq=False)
class StrengthStudy:
    rows: list[dict]
    summary: dict


def strength_study(config: FuzzConfig, fixed_instances=None) -> StrengthStudy:
    """Per-trial lower bounds on |L+||L-| for two observables, plus eq19 across f.

    Asserted orderings are counted, never silently dropped: the eq9a-derived
    bound dominates the squared-commutator bound, and within the admissible
    class the plain skew-information relation has the smallest left side.
    Everything else is reported as empirical frequencies only.
    """
    if any(n != 2 for n in config.n_obs):
        raise ConfigError("strength_study requires n_obs = (2,)")
    fs = [resolve_monotone(lbl) for lbl in config.f_labels]
    for f in fs:
        cached_lambda(f)
    rows = []
    ordering_violations = {"eq9a_vs_eq3": 0, "wy_strongest": 0}
    instances = list(fixed_instances or [])

    def make_instance(trial):
        rng = _trial_rng(config.seed, trial)
        dim = config.dims[int(rng.integers(len(config.dims)))]
        rank = config.ranks[int(rng.integers(len(config.ranks)))]
        return random_density(dim, rank, rng), random_observables(dim, 2, rng)

    instances += [make_instance(t) for t in range(config.trials)]
    for idx, (rho, X) in enumerate(instances):
        two = two_obs_relations(rho, X.observables[0], X.observables[1])
        d2 = two.delta_scalar**2
        bound_eq3 = d2**2
        bound_eq9a = d2 * (2 * two.A - d2)
        tol = config.tol * two.scales["eq9a"]
        dominates = bound_eq9a >= bound_eq3 - tol
        if not dominates:
            ordering_violations["eq9a_vs_eq3"] += 1
        row = {
            "instance": idx,
            "B": two.B,
            "bound_eq3": bound_eq3,
            "bound_eq9a": bound_eq9a,
            "eq9a_dominates": dominates,
            "margin_eq9a": two.margins["eq9a"],
            "margin_furuichi": two.margins["furuichi"],
        }
        for f in fs:
            mar = check_metric_adjusted(rho, X, f)
            row[f"eq19_lhs[{f.label}]"] = mar.margin19 + (4 * mar.lam * f.f0) ** 2 * mar.dets["delta"] ** 2
            row[f"eq19_rhs[{f.label}]"] = (4 * mar.lam * f.f0) ** 2 * mar.dets["delta"] ** 2
            if f.label == "sld":
                wm = wy_strongest_check(rho, X, f)
                row["wy_strongest_margin"] = wm
                if wm < -tol:
                    ordering_violations["wy_strongest"] += 1
        rows.append(row)

    bounds = ["bound_eq3", "bound_eq9a"]
    summary = {
        "instances": len(rows),
        "ordering_violations": ordering_violations,
        "bounds": {
            b: {
                "mean": float(np.mean([r[b] for r in rows])),
                "min": float(np.min([r[b] for r in rows])),
                "max": float(np.max([r[b] for r in rows])),
            }
            for b in bounds
        },
        "eq9a_dominates_fraction": float(np.mean([r["eq9a_dominates"] for r in rows])),
    }
    return StrengthStudy(rows=rows, summary=summary)
