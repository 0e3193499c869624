"""Monte-Carlo experiment driver.

Trial ``t`` draws from streams keyed on ``(seed, t)`` only, so results do
not depend on how trials are spread over workers, and every sweep point of
a trial sees the same random stream (common random numbers).  Aggregation
always runs in trial order.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import __version__
from .allocation import (assign_configs, max_min_allocate, max_rate_allocate,
                         sequential_allocate, user_rates)
from .channel import reflected_channels
from .config import ScenarioConfig
from .geometry import sample_ring_arrays
from .metrics import (UndefinedMetric, csi_rate_arrays, efficiency, jain_index,
                      throughput)
from .robust_rate import robust_rate_arrays

CSV_COLUMNS = ("sweep_var", "sweep_value", "scheme", "objective", "mean_throughput_bps",
               "stderr_bps", "jain_mean", "jain_stderr", "per_user_throughput_bps",
               "trials", "seed")

_DEPLOY, _FADING = 0, 1


class Setup:
    """Trial-independent objects derived from a config."""

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.ris = cfg.ris()
        self.grid = cfg.grid()
        self.budget = cfg.budget()
        self.frame = cfg.frame()
        self.outage = cfg.outage()
        self.bs = cfg.bs_position()

    @cached_property
    def codebook(self):
        return self.cfg.codebook()

    @cached_property
    def centers(self) -> np.ndarray:
        return self.codebook.center_azimuths


def trial_streams(seed: int, trial: int):
    """Independent generators for user deployment and fading of one trial."""
    def gen(tag):
        ss = np.random.SeedSequence(seed, spawn_key=(trial, tag))
        return np.random.Generator(np.random.PCG64(ss))
    return gen(_DEPLOY), gen(_FADING)


def _allocate(rates, objective):
    return max_rate_allocate(rates) if objective == "max_rate" else max_min_allocate(rates)


def run_trial(cfg: ScenarioConfig, rng, fading_rng=None, setup: Setup | None = None) -> dict:
    """One random deployment; returns the per-user rates (bit/s/Hz) of each scheme.

    ``rng`` drives the deployment; the CSI fading draw uses ``fading_rng``
    (defaults to ``rng``).
    """
    setup = setup or Setup(cfg)
    fading_rng = rng if fading_rng is None else fading_rng
    r, phi = sample_ring_arrays(cfg.n_users, (cfg.r_inn, cfg.r_out), rng, cfg.radius_law)
    if cfg.n_slots != len(setup.codebook):
        raise ValueError(f"n_slots={cfg.n_slots} but the codebook has "
                         f"{len(setup.codebook)} configurations")
    g = reflected_channels(r, phi, setup.bs, setup.centers, setup.ris, setup.grid,
                           setup.budget)
    out = {}
    if "jnt" in cfg.schemes or "seq" in cfg.schemes:
        rates = robust_rate_arrays(r, phi, setup.bs, setup.centers, setup.ris, setup.grid,
                                   setup.budget, setup.outage, literal=cfg.lemma_literal, g=g)
        if "jnt" in cfg.schemes:
            out["jnt"] = user_rates(rates, _allocate(rates, cfg.objective))
        if "seq" in cfg.schemes:
            part = assign_configs(phi, setup.centers)
            # overloaded slots serve users in index order until RBs run out
            alloc = sequential_allocate(rates, part, cfg.objective, overload="truncate")
            out["seq"] = user_rates(rates, alloc)
    if "csi" in cfg.schemes:
        rates = csi_rate_arrays(r, phi, setup.bs, setup.centers, setup.ris, setup.grid,
                                setup.budget, fading_rng, g=g)
        out["csi"] = user_rates(rates, _allocate(rates, cfg.objective))
    return {s: out[s] for s in cfg.schemes}


@dataclass
class ExperimentResult:
    sweep_var: str
    sweep_values: list
    rows: list
    provenance: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in self.rows:
            w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"provenance": self.provenance, "columns": list(CSV_COLUMNS),
                           "rows": self.rows}, indent=2, sort_keys=True) + "\n"

    def select(self, scheme: str, column: str = "mean_throughput_bps") -> np.ndarray:
        return np.array([r[column] for r in self.rows if r["scheme"] == scheme])


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def _point_config(cfg: ScenarioConfig, var: str, value) -> ScenarioConfig:
    if var == "n_users":
        return cfg.replace(n_users=int(value))
    return cfg.replace(rician_k_db=float(value))


def _trial_metrics(cfg, setup, trial):
    deploy, fading = trial_streams(cfg.seed, trial)
    rates = run_trial(cfg, deploy, fading, setup)
    res = {}
    for scheme, r in rates.items():
        eta = efficiency(scheme, setup.frame, setup.outage, cfg.n_users, cfg.n_x)
        thr = throughput(r, setup.frame, cfg.delta_f, eta)
        try:
            j = jain_index(r)
        except UndefinedMetric:
            j = math.nan
        res[scheme] = (thr, j)
    return res


def _mean_se(x):
    x = np.asarray(x, dtype=float)
    x = x[np.isfinite(x)]
    if x.size == 0:
        return math.nan, math.nan
    se = float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return float(np.mean(x)), se


def run_sweep(cfg: ScenarioConfig, sweep_var: str | None = None, values=None,
              trials: int | None = None, workers: int = 1) -> ExperimentResult:
    """Average throughput and fairness over trials at every sweep point."""
    sweep_var = sweep_var or cfg.sweep_var
    values = list(cfg.sweep_values if values is None else values)
    trials = cfg.trials if trials is None else trials
    if not values:
        raise ValueError("empty sweep")
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    if sweep_var not in ("n_users", "rician_k_db"):
        raise ValueError(f"cannot sweep {sweep_var!r}")

    points = [_point_config(cfg, sweep_var, v) for v in values]
    setups = [Setup(p) for p in points]
    jobs = [(i, t) for i in range(len(points)) for t in range(trials)]

    def work(job):
        i, t = job
        return _trial_metrics(points[i], setups[i], t)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(j) for j in jobs]

    rows = []
    for i, (value, p) in enumerate(zip(values, points)):
        chunk = results[i * trials:(i + 1) * trials]
        for scheme in p.schemes:
            thr = [c[scheme][0] for c in chunk]
            jn = [c[scheme][1] for c in chunk]
            m, se = _mean_se(thr)
            jm, jse = _mean_se(jn)
            rows.append({
                "sweep_var": sweep_var,
                "sweep_value": int(value) if sweep_var == "n_users" else float(value),
                "scheme": scheme,
                "objective": p.objective,
                "mean_throughput_bps": m,
                "stderr_bps": se,
                "jain_mean": jm,
                "jain_stderr": jse,
                "per_user_throughput_bps": m / p.n_users,
                "trials": trials,
                "seed": cfg.seed,
            })
    prov = {"config_hash": cfg.digest(), "seed": cfg.seed, "code_version": __version__,
            "config": cfg.as_dict()}
    return ExperimentResult(sweep_var, values, rows, prov)
