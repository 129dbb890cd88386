"""Monte-Carlo campaigns over model, dimension, noise and rank grids.

Every replicate of every grid cell draws its randomness from
:func:`cell_seed`, so results do not depend on which other cells are in
the grid or on execution order. Wall-clock timings are kept apart from
the metric rows, which are therefore byte-reproducible.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ArgumentError
from .estimators import RankRule, approx_lse, dse, hosvd, select_rank_cv
from .generators import (NoiseSpec, add_noise, generate_signal, noise_sigma_for_level,
                         smooth_volume, table_model)
from .rank_analysis import RankScanConfig, cell_seed, logrank_scan
from .tensor import frobenius_norm, mse

log = logging.getLogger(__name__)

KINDS = ("logrank-scan", "mse-vs-d", "estimator-compare", "denoise-rank-sweep")
RAW_COLUMNS = ("kind", "model", "s", "d", "gamma", "rank", "replicate", "metric", "value")
SUMMARY_COLUMNS = ("kind", "model", "s", "d", "gamma", "rank", "metric", "n", "mean", "se")
TIMING_COLUMNS = ("kind", "model", "s", "d", "gamma", "rank", "replicate", "seconds")

DEFAULT_C_GRID = (0.5, 1.0, 2.0, 4.0)

PROFILES = {
    "full": {
        "logrank-scan": dict(d_grid=tuple(range(20, 201, 20)), s_grid=(5, 10, 15), replicates=3),
        "mse-vs-d": dict(d_grid=tuple(range(20, 201, 20)), s_grid=(1, 2, 3), replicates=20),
        "estimator-compare": dict(d_grid=tuple(range(20, 201, 20)), s_grid=(2,), replicates=20),
        "denoise-rank-sweep": dict(d_grid=(120,), gamma_grid=(0.0, 0.2, 0.4, 0.6, 0.8, 1.0),
                                   rank_grid=tuple(range(3, 61, 3)), replicates=1),
    },
    "ci": {
        "logrank-scan": dict(d_grid=(20, 40, 60), s_grid=(5,), replicates=3),
        "mse-vs-d": dict(d_grid=(20, 40, 60), s_grid=(2,), replicates=5),
        "estimator-compare": dict(d_grid=(40, 60), s_grid=(2,), replicates=5),
        "denoise-rank-sweep": dict(d_grid=(60,), gamma_grid=(0.0, 0.5, 1.0),
                                   rank_grid=tuple(range(3, 31, 3)), replicates=1),
    },
}


@dataclass
class ExperimentSpec:
    """A campaign: one ``kind`` swept over the grids, ``replicates`` times per cell.

    ``rank_rule`` fixes the rank for ``mse-vs-d`` and ``estimator-compare``;
    when it is ``None`` the log-rule constant is chosen per replicate by
    cross-validation over ``c_grid``. ``rank_grid`` is the sweep for
    ``denoise-rank-sweep``, whose volume has extents ``(d, d, 0.4 d)``.
    """

    kind: str
    model: str = "model1"
    d_grid: Sequence[int] = (40,)
    s_grid: Sequence[int] = (2,)
    gamma_grid: Sequence[float] = (1.0,)
    rank_rule: RankRule | None = None
    rank_grid: Sequence[int] = ()
    c_grid: Sequence[float] = DEFAULT_C_GRID
    rank_exponent: int = 1
    cv_folds: int = 5
    sigma: float = 1.0
    replicates: int = 1
    base_seed: int = 0
    epsilon: float = 0.01
    r_max: int = 20
    lse_restarts: int = 1
    output: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ArgumentError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if self.replicates < 1:
            raise ArgumentError("replicates must be >= 1")
        if not self.d_grid or not self.s_grid or not self.gamma_grid:
            raise ArgumentError("grids must be nonempty")
        if self.kind == "denoise-rank-sweep" and not self.rank_grid:
            raise ArgumentError("denoise-rank-sweep needs a rank grid")

    @classmethod
    def from_profile(cls, kind: str, profile: str = "ci", **overrides) -> "ExperimentSpec":
        if profile not in PROFILES:
            raise ArgumentError(f"unknown profile {profile!r}")
        fields = dict(PROFILES[profile][kind])
        fields.update({k: v for k, v in overrides.items() if v is not None})
        return cls(kind=kind, **fields)


@dataclass
class ExperimentResult:
    rows: list = field(default_factory=list)
    summary: list = field(default_factory=list)
    timings: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    def values(self, metric: str, **coords) -> list:
        return [r["value"] for r in self.rows if r["metric"] == metric
                and all(r[k] == v for k, v in coords.items())]


def summarize(rows) -> list:
    """Mean and standard error (sample std / sqrt(n)) per cell and metric."""
    groups = {}
    for r in rows:
        key = tuple(r[c] for c in SUMMARY_COLUMNS[:7])
        groups.setdefault(key, []).append(r["value"])
    out = []
    for key in sorted(groups, key=_sort_key):
        v = np.asarray(groups[key], dtype=np.float64)
        se = float(np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else math.nan
        out.append(dict(zip(SUMMARY_COLUMNS, key + (v.size, float(np.mean(v)), se))))
    return out


def _sort_key(key):
    return tuple((0, x) if isinstance(x, (int, float)) else (1, str(x)) for x in key)


def _row(spec, s, d, gamma, rank, rep, metric, value):
    model = "volume" if spec.kind == "denoise-rank-sweep" else spec.model
    return {"kind": spec.kind, "model": model, "s": s, "d": d, "gamma": gamma,
            "rank": rank, "replicate": rep, "metric": metric, "value": float(value)}


def _noisy_draw(spec, s, d, rep):
    theta = generate_signal(table_model(spec.model, s), (d, d, d),
                            cell_seed(spec.base_seed, "signal", spec.model, s, d, rep))
    y = add_noise(theta, NoiseSpec(spec.sigma, cell_seed(spec.base_seed, "noise", spec.model, s, d, rep)))
    return theta, y


def _ranks_for(spec, y, s, d, rep, rows):
    if spec.rank_rule is not None:
        return spec.rank_rule.resolve(y.shape)
    c, ranks, _ = select_rank_cv(y, spec.c_grid, spec.rank_exponent, spec.cv_folds,
                                 cell_seed(spec.base_seed, "cv", spec.model, s, d, rep))
    rows.append(_row(spec, s, d, "NA", "NA", rep, "selected_c", c))
    return ranks


def _mse_cell(spec, s, d, rep):
    rows = []
    theta, y = _noisy_draw(spec, s, d, rep)
    ranks = _ranks_for(spec, y, s, d, rep, rows)
    rows.append(_row(spec, s, d, "NA", "NA", rep, "rank", ranks[0]))
    rows.append(_row(spec, s, d, "NA", "NA", rep, "mse_dse", mse(dse(y, ranks)[0], theta)))
    return rows


def _compare_cell(spec, s, d, rep):
    rows = []
    theta, y = _noisy_draw(spec, s, d, rep)
    ranks = _ranks_for(spec, y, s, d, rep, rows)
    rows.append(_row(spec, s, d, "NA", "NA", rep, "rank", ranks[0]))
    rows.append(_row(spec, s, d, "NA", "NA", rep, "mse_hosvd", mse(hosvd(y, ranks)[0], theta)))
    rows.append(_row(spec, s, d, "NA", "NA", rep, "mse_dse", mse(dse(y, ranks)[0], theta)))
    lse = approx_lse(y, ranks, spec.lse_restarts, cell_seed(spec.base_seed, "lse", s, d, rep))
    rows.append(_row(spec, s, d, "NA", "NA", rep, "mse_lse", mse(lse, theta)))
    return rows


def denoise_volume(d: int, seed: int) -> np.ndarray:
    """The fixed clean volume used by the rank sweep, extents ``(d, d, 0.4 d)``."""
    return smooth_volume((d, d, max(1, round(0.4 * d))), seed=seed)


def _sweep_cell(spec, theta, d, gamma, rep):
    sigma = noise_sigma_for_level(theta, gamma)
    y = add_noise(theta, NoiseSpec(sigma, cell_seed(spec.base_seed, "sweep", d, gamma, rep)))
    rows = []
    for r in spec.rank_grid:
        ranks = tuple(min(int(r), n) for n in theta.shape)
        rows.append(_row(spec, "NA", d, gamma, int(r), rep, "mse_dse", mse(dse(y, ranks)[0], theta)))
    rows.append(_row(spec, "NA", d, gamma, "NA", rep, "mse_input", mse(y, theta)))
    return rows


def _cells(spec):
    if spec.kind in ("mse-vs-d", "estimator-compare"):
        fn = _mse_cell if spec.kind == "mse-vs-d" else _compare_cell
        for s in spec.s_grid:
            for d in spec.d_grid:
                for rep in range(spec.replicates):
                    yield (s, d, "NA", rep), (lambda s=s, d=d, rep=rep: fn(spec, int(s), int(d), rep))
    else:
        for d in spec.d_grid:
            theta = denoise_volume(int(d), cell_seed(spec.base_seed, "volume", d))
            for gamma in spec.gamma_grid:
                for rep in range(spec.replicates):
                    yield ("NA", d, gamma, rep), (
                        lambda d=d, g=gamma, rep=rep, th=theta: _sweep_cell(spec, th, int(d), float(g), rep))


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Run every cell of ``spec``; a failing cell is logged and skipped."""
    result = ExperimentResult()
    if spec.kind == "logrank-scan":
        cfg = RankScanConfig(epsilon=spec.epsilon, r_max=min(spec.r_max, min(spec.d_grid)),
                             d_grid=spec.d_grid, s_grid=spec.s_grid, model=spec.model,
                             seeds=tuple(spec.base_seed + i for i in range(spec.replicates)))
        t0 = time.perf_counter()
        for row in logrank_scan(cfg):
            rep = row["seed"] - spec.base_seed
            rank = math.nan if row["rank"] == "NA" else row["rank"]
            result.rows.append(_row(spec, row["s"], row["d"], "NA", "NA", rep, "epsilon_rank", rank))
            result.rows.append(_row(spec, row["s"], row["d"], "NA", "NA", rep, "rel_err", row["rel_err"]))
        result.timings.append(dict(zip(TIMING_COLUMNS, (spec.kind, spec.model, "NA", "NA", "NA", "NA",
                                                          "NA", time.perf_counter() - t0))))
    else:
        for (s, d, gamma, rep), task in _cells(spec):
            t0 = time.perf_counter()
            try:
                result.rows.extend(task())
            except Exception as exc:  # one bad cell must not sink the campaign
                log.error("cell s=%s d=%s gamma=%s rep=%s failed: %s", s, d, gamma, rep, exc)
                result.failures.append({"s": s, "d": d, "gamma": gamma, "replicate": rep,
                                        "error": str(exc)})
                continue
            result.timings.append({"kind": spec.kind, "model": spec.model, "s": s, "d": d,
                                   "gamma": gamma, "rank": "NA", "replicate": rep,
                                   "seconds": time.perf_counter() - t0})
    result.rows.sort(key=lambda r: _sort_key(tuple(r[c] for c in RAW_COLUMNS[:8])))
    result.summary = summarize(result.rows)
    return result


def write_result(result: ExperimentResult, path) -> dict:
    """Write raw rows to ``path`` plus ``*_summary.csv`` and ``*_timings.csv`` beside it."""
    from .io import write_csv
    path = str(path)
    stem = path[:-4] if path.endswith(".csv") else path
    paths = {"raw": path if path.endswith(".csv") else path + ".csv",
             "summary": stem + "_summary.csv", "timings": stem + "_timings.csv"}
    write_csv(result.rows, RAW_COLUMNS, paths["raw"])
    write_csv(result.summary, SUMMARY_COLUMNS, paths["summary"])
    write_csv(result.timings, TIMING_COLUMNS, paths["timings"])
    return paths


@dataclass
class DenoiseReport:
    dims: tuple
    ranks: tuple
    residual_norm: float
    relative_residual: float
    seconds: float
    selected_c: float | None = None

    def text(self) -> str:
        lines = [f"dims = {','.join(map(str, self.dims))}",
                 f"ranks = {','.join(map(str, self.ranks))}",
                 f"residual_norm = {self.residual_norm:.17g}",
                 f"relative_residual = {self.relative_residual:.17g}",
                 f"runtime_seconds = {self.seconds:.6f}"]
        if self.selected_c is not None:
            lines.append(f"selected_c = {self.selected_c:.17g}")
        return "\n".join(lines) + "\n"


def denoise_file(input_path, rule: RankRule | None, output_path, c_grid=DEFAULT_C_GRID,
                 exponent: int = 1, folds: int = 5, seed: int = 0,
                 report_path=None) -> DenoiseReport:
    """Read a DTF1 tensor, apply DSE, write the estimate and a text report.

    With ``rule=None`` the log-rule constant is picked by cross-validation.
    Infeasible explicit ranks raise :class:`ArgumentError`.
    """
    from .io import read_dtf1, write_dtf1
    t0 = time.perf_counter()
    y = read_dtf1(input_path)
    selected = None
    if rule is None:
        selected, ranks, _ = select_rank_cv(y, c_grid, exponent, folds, seed)
    elif rule.ranks is not None:
        ranks = rule.resolve(y.shape, clamp=False)
    else:
        ranks = rule.resolve(y.shape)
    est, _ = dse(y, ranks)
    write_dtf1(est, output_path)
    res = frobenius_norm(y - est)
    norm = frobenius_norm(y)
    report = DenoiseReport(tuple(y.shape), tuple(ranks), res, res / norm if norm else 0.0,
                           time.perf_counter() - t0, selected)
    if report_path is None:
        report_path = str(output_path) + ".report.txt"
    with open(report_path, "w") as fh:
        fh.write(report.text())
    return report
