"""Monte-Carlo sweeps over paths, surface size or surface count.

Every trial index ``i`` gets its own seed derived from the master seed, and
that seed fixes the channel realization independently of the sweep value
and of the algorithm. Results are reduced in trial order, so the output does
not depend on how trials are scheduled across workers.
"""
from __future__ import annotations

import configparser
import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

import numpy as np

from . import _kernels
from .channel_model import SystemConfig, db_to_linear, sample_realization
from .optimizers import (OptimizerParams, RunResult, achievable_rate, hpb_ao, hpb_es,
                         hpb_spp, pb_sca, random_phases)
from .phase_synthesis import dirichlet_gain

__all__ = [
    "ALGORITHMS",
    "SWEEPS",
    "ExperimentSpec",
    "SweepRow",
    "achievable_rate",
    "load_config",
    "parse_config",
    "trial_seed",
    "run_trial",
    "run_sweep",
    "write_results",
    "read_results",
    "beam_pattern",
    "CSV_HEADER",
]

ALGORITHMS = ("hpb-ao", "hpb-es", "hpb-spp", "pb-sca", "random")
# CLI name -> CSV column value
SWEEPS = {"paths": "P", "elements": "L2", "ris": "N"}
CSV_HEADER = ["sweep_var", "sweep_value", "algorithm", "mean_rate_bps_hz",
              "std_rate", "mean_time_s", "n_realizations"]

_SYSTEM_KEYS = {f.name for f in fields(SystemConfig)}
_PARAM_KEYS = {f.name for f in fields(OptimizerParams)}
_INT_KEYS = {"M", "N", "L", "P", "i_sca", "sa_iters", "ao_outer_iters", "es_grid",
             "random_trials"}
# alternative spellings with unit conversion: key -> (field, converter)
_UNIT_KEYS = {
    "g_bs_dbi": ("g_bs", db_to_linear),
    "g_ris_dbi": ("g_ris", db_to_linear),
    "g_user_dbi": ("g_user", db_to_linear),
    "sigma2_dbm": ("sigma2", lambda x: db_to_linear(np.asarray(x) - 30.0)),
    "sigma_as_deg": ("sigma_as", np.deg2rad),
    "L2": ("L", lambda x: _side_from_count(int(x))),
}


def _side_from_count(count):
    side = math.isqrt(count)
    if side * side != count or side % 2:
        raise ValueError(f"element count {count} is not the square of an even integer")
    return side


def _parse_value(raw):
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    vals = [float(p) for p in parts]
    return vals[0] if len(vals) == 1 else tuple(vals)


def parse_config(text: str, source: str = "<string>"):
    """Parse ``key = value`` lines into ``(SystemConfig, OptimizerParams)``.

    Keys are :class:`SystemConfig` / :class:`OptimizerParams` field names or
    one of the unit-suffixed spellings (``g_bs_dbi``, ``sigma2_dbm``,
    ``sigma_as_deg``, ``L2``). Per-RIS values may be comma separated.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    parser.read_string("[hpb]\n" + text, source=source)
    sys_kw, par_kw = {}, {}
    for key, raw in parser["hpb"].items():
        if key in ("v0", "pb_init"):
            par_kw[key] = raw.strip()
            continue
        try:
            value = _parse_value(raw)
        except ValueError as exc:
            raise ValueError(f"{source}: bad value for {key!r}: {raw!r}") from exc
        if key in _UNIT_KEYS:
            key, conv = _UNIT_KEYS[key]
            value = conv(value)
            value = tuple(float(x) for x in np.atleast_1d(value)) if np.ndim(value) else float(value)
        if key in _INT_KEYS:
            value = int(value)
        if key in _SYSTEM_KEYS:
            sys_kw[key] = value
        elif key in _PARAM_KEYS:
            par_kw[key] = value
        else:
            raise ValueError(f"{source}: unknown config key {key!r}")
    return SystemConfig(**sys_kw), OptimizerParams(**par_kw)


def load_config(path=None):
    """Read a config file; ``None`` loads the bundled ``paper_v.cfg``."""
    if path is None:
        text = resources.files("hpb").joinpath("paper_v.cfg").read_text()
        return parse_config(text, "paper_v.cfg")
    path = Path(path)
    return parse_config(path.read_text(), str(path))


@dataclass
class ExperimentSpec:
    config: SystemConfig
    sweep: str
    values: list
    algorithms: list
    realizations: int = 200
    seed: int = 42
    out: str | None = None
    params: OptimizerParams = field(default_factory=OptimizerParams)
    workers: int = 1
    record_time: bool = True

    def __post_init__(self):
        if self.sweep in SWEEPS:
            self.sweep = SWEEPS[self.sweep]
        if self.sweep not in SWEEPS.values():
            raise ValueError(f"unknown sweep variable {self.sweep!r}")
        if not self.values:
            raise ValueError("sweep value list is empty")
        if not self.algorithms:
            raise ValueError("algorithm list is empty")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise ValueError(f"unknown algorithm(s) {unknown}; choose from {ALGORITHMS}")
        if self.realizations < 1:
            raise ValueError("need at least one realization per point")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    def config_for(self, value) -> SystemConfig:
        value = int(value)
        if self.sweep == "P":
            return self.config.replace(P=value)
        if self.sweep == "N":
            return self.config.replace(N=value)
        return self.config.replace(L=_side_from_count(value))


@dataclass(frozen=True)
class SweepRow:
    sweep_var: str
    sweep_value: float
    algorithm: str
    mean_rate: float
    std_rate: float
    mean_time: float
    n_realizations: int


def trial_seed(master: int, index: int) -> int:
    """Seed for trial ``index``; independent of execution order."""
    ss = np.random.SeedSequence([int(master), int(index)])
    return int(ss.generate_state(1, np.uint64)[0])


def run_trial(config: SystemConfig, algorithm: str, seed: int,
              params: OptimizerParams | None = None) -> RunResult:
    """Sample a realization from ``seed`` and run one algorithm on it.

    The returned ``wall_time`` covers the optimizer only.
    """
    params = params or OptimizerParams()
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
    if algorithm == "hpb-es" and config.N != 1:
        raise ValueError("hpb-es requires N=1")
    chan_ss, algo_ss = np.random.SeedSequence(int(seed)).spawn(2)
    realization = sample_realization(config, np.random.default_rng(chan_ss))
    rng = np.random.default_rng(algo_ss)
    if algorithm == "hpb-spp":
        return hpb_spp(realization, config, params, rng)
    if algorithm == "hpb-ao":
        return hpb_ao(realization, config, params, rng)
    if algorithm == "hpb-es":
        return hpb_es(realization, config, params.es_grid)
    if algorithm == "pb-sca":
        return pb_sca(realization, config, params, rng)
    return random_phases(realization, config, rng, params.random_trials)


def _point_task(spec, config, index):
    seed = trial_seed(spec.seed, index)
    out = {}
    for algo in spec.algorithms:
        res = run_trial(config, algo, seed, spec.params)
        out[algo] = (res.rate, res.wall_time)
    return out


def run_sweep(spec: ExperimentSpec) -> list[SweepRow]:
    """Average rate and optimizer time per (sweep value, algorithm)."""
    configs = [(v, spec.config_for(v)) for v in spec.values]
    if "hpb-es" in spec.algorithms:
        bad = [v for v, c in configs if c.N != 1]
        if bad:
            raise ValueError(f"hpb-es requires N=1; sweep values {bad} violate it")
    _kernels.warmup()
    tasks = [(v, c, i) for v, c in configs for i in range(spec.realizations)]
    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(lambda t: _point_task(spec, t[1], t[2]), tasks))
    else:
        results = [_point_task(spec, c, i) for _, c, i in tasks]
    rows = []
    n = spec.realizations
    for j, (value, _) in enumerate(configs):
        block = results[j * n:(j + 1) * n]
        for algo in sorted(spec.algorithms):
            rates = np.array([r[algo][0] for r in block])
            times = np.array([r[algo][1] for r in block])
            rows.append(SweepRow(
                sweep_var=spec.sweep, sweep_value=float(value), algorithm=algo,
                mean_rate=float(rates.mean()),
                std_rate=float(rates.std(ddof=1)) if n > 1 else 0.0,
                mean_time=float(times.mean()) if spec.record_time else 0.0,
                n_realizations=n))
    rows.sort(key=lambda r: (r.sweep_value, r.algorithm))
    return rows


def _fmt(x):
    return f"{x:.9g}"


def write_results(rows, path):
    """Write rows as CSV with a fixed header and 9 significant digits."""
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for r in rows:
                writer.writerow([r.sweep_var, _fmt(r.sweep_value), r.algorithm,
                                 _fmt(r.mean_rate), _fmt(r.std_rate), _fmt(r.mean_time),
                                 r.n_realizations])
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
    return path


def read_results(path):
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [SweepRow(r["sweep_var"], float(r["sweep_value"]), r["algorithm"],
                         float(r["mean_rate_bps_hz"]), float(r["std_rate"]),
                         float(r["mean_time_s"]), int(r["n_realizations"]))
                for r in reader]


def beam_pattern(L, delta, points=101, span=None):
    """Separable surface gain over an ``(sx, sy)`` grid.

    Returns ``(s, gain)`` with ``gain[i, j]`` evaluated at ``(s[i], s[j])``;
    the default span covers one full period ``[-1/(2 delta), 1/(2 delta)]``.
    """
    span = 1.0 / (2.0 * delta) if span is None else span
    s = np.linspace(-span, span, points)
    g = dirichlet_gain(s, L, delta)
    return s, np.outer(g, g)
