"""Transmit and passive beamforming algorithms.

All passive designs share one closed-form minorize-maximize step for
unit-modulus vectors: maximising ``||x^H A||^2`` over ``|x_i| = 1`` by
repeatedly setting ``x <- exp(j arg(A A^H x))``. HPB methods apply it to the
``N x M`` compact channel, PB-SCA to the ``N L^2 x M`` per-element matrix.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .channel_model import ChannelRealization, SystemConfig
from .phase_synthesis import (CompactModel, ElementPhases, PhaseProfile, expand_profile,
                              reflection_matrix, wrap_q)

__all__ = [
    "DegenerateChannelError",
    "OptimizerParams",
    "RunResult",
    "achievable_rate",
    "objective",
    "mrt",
    "sca_v_step",
    "unit_modulus_sca",
    "strongest_paths",
    "hpb_spp",
    "hpb_ao",
    "hpb_es",
    "pb_sca",
    "random_phases",
]

_TINY = np.finfo(float).tiny


class DegenerateChannelError(ValueError):
    """The effective channel is identically zero, so MRT is undefined."""


@dataclass(frozen=True)
class OptimizerParams:
    """Tuning knobs that are not part of the physical scenario.

    ``sa_t0`` is relative: the starting temperature of each annealing round
    is ``sa_t0`` times the objective at the start of that round. ``sa_step``
    is a fraction of ``qbar``.
    """

    sa_iters: int = 500
    sa_t0: float = 1.0
    sa_cooling: float = 0.95
    sa_step: float = 0.1
    ao_outer_iters: int = 5
    es_grid: int = 400
    random_trials: int = 1000
    v0: str = "ones"
    pb_init: str = "warm"

    def __post_init__(self):
        if self.sa_iters < 0 or self.ao_outer_iters < 0:
            raise ValueError("iteration counts must be non-negative")
        if not self.sa_t0 > 0 or not self.sa_step > 0:
            raise ValueError("sa_t0 and sa_step must be positive")
        if not 0 < self.sa_cooling < 1:
            raise ValueError("sa_cooling must lie in (0, 1)")
        if self.es_grid < 2:
            raise ValueError("es_grid must be at least 2")
        if self.random_trials < 1:
            raise ValueError("random_trials must be at least 1")
        if self.v0 not in ("ones", "random") or self.pb_init not in ("warm", "random"):
            raise ValueError("v0 and pb_init must be 'ones'/'random' and 'warm'/'random'")


@dataclass
class RunResult:
    """Outcome of one optimizer call.

    ``profile`` is a :class:`PhaseProfile` for the HPB methods and an
    :class:`ElementPhases` for per-element methods. ``trace`` lists the
    objective after every SCA iteration (starting point included).
    """

    algorithm: str
    profile: object
    w: np.ndarray
    objective: float
    rate: float
    wall_time: float
    iterations: int
    trace: list = field(default_factory=list, repr=False)
    info: dict = field(default_factory=dict, repr=False)


def achievable_rate(h, w, sigma2):
    """``log2(1 + |h^H w|^2 / sigma2)`` where ``h`` is already the row ``h^H``."""
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    return float(np.log2(1.0 + abs(np.dot(h, w)) ** 2 / sigma2))


def objective(H, v):
    """``||v^H H||^2``."""
    h = np.conj(v) @ H
    return float(np.real(np.vdot(h, h)))


def mrt(H, v, p):
    """Maximum-ratio transmit beamformer with ``||w||^2 = p``."""
    h = np.conj(v) @ H
    nrm = np.linalg.norm(h)
    if nrm == 0.0:
        raise DegenerateChannelError("effective channel v^H H is zero")
    return np.sqrt(p) * h.conj() / nrm


def sca_v_step(H, v_prev):
    """One minorize-maximize update ``v <- exp(j arg(H H^H v))``.

    Entries whose coefficient is exactly zero keep their previous phase.
    """
    g = H @ (H.conj().T @ v_prev)
    keep = np.abs(g) == 0.0
    v = np.exp(1j * np.angle(g))
    if keep.any():
        v[keep] = v_prev[keep]
    return v


def unit_modulus_sca(A, x0, max_iter, eps):
    """Iterate :func:`sca_v_step` until the relative change drops below ``eps``.

    Returns ``(x, iterations, trace)``.
    """
    x = np.asarray(x0, dtype=complex)
    f_prev = objective(A, x)
    trace = [f_prev]
    it = 0
    for it in range(1, max_iter + 1):
        x = sca_v_step(A, x)
        f = objective(A, x)
        trace.append(f)
        if abs(f - f_prev) / max(f_prev, _TINY) < eps:
            break
        f_prev = f
    return x, it, trace


def _finish(name, H, v, config, start, iterations, trace, profile, **info):
    w = mrt(H, v, config.p)
    h = np.conj(v) @ H
    wall = time.perf_counter() - start
    return RunResult(
        algorithm=name, profile=profile, w=w, objective=objective(H, v),
        rate=achievable_rate(h, w, config.sigma2), wall_time=wall,
        iterations=iterations, trace=trace, info=info)


def strongest_paths(realization: ChannelRealization):
    """Indices ``(d_star, k_star)`` of the largest-magnitude gains per surface."""
    return (np.argmax(np.abs(realization.alpha), axis=1),
            np.argmax(np.abs(realization.beta), axis=1))


def _initial_v(N, params, rng):
    if params.v0 == "random":
        if rng is None:
            raise ValueError("v0='random' needs an rng")
        return np.exp(2j * np.pi * rng.random(N))
    return np.ones(N, dtype=complex)


def hpb_spp(realization, config: SystemConfig, params: OptimizerParams | None = None,
            rng=None) -> RunResult:
    """Strongest-path pairing for the gradients, then SCA on the reference phases."""
    params = params or OptimizerParams()
    start = time.perf_counter()
    model = CompactModel(realization, config)
    d_star, k_star = strongest_paths(realization)
    idx = np.arange(realization.N)
    Q = np.vstack([wrap_q(model.cx[idx, k_star, d_star], config.delta),
                   wrap_q(model.cy[idx, k_star, d_star], config.delta)])
    H = model.H(Q)
    v, iters, trace = unit_modulus_sca(H, _initial_v(config.N, params, rng),
                                       config.i_sca, config.eps_sca)
    return _finish("hpb-spp", H, v, config, start, iters, trace,
                   PhaseProfile.from_v(Q, v), d_star=d_star, k_star=k_star)


def hpb_ao(realization, config: SystemConfig, params: OptimizerParams | None = None,
           rng=None) -> RunResult:
    """Alternate annealing over ``Q`` (``v`` fixed) with SCA over ``v``.

    Starts from :func:`hpb_spp` and never returns anything worse: a round's
    result is adopted only if it does not lower the objective.
    """
    params = params or OptimizerParams()
    rng = rng if rng is not None else np.random.default_rng(0)
    start = time.perf_counter()
    warm = hpb_spp(realization, config, params, rng)
    model = CompactModel(realization, config)
    Q = warm.profile.Q.copy()
    v = warm.profile.v
    H = model.H(Q)
    f = objective(H, v)
    iters = warm.iterations
    trace = list(warm.trace)
    accepted = 0
    qbar = config.qbar
    if params.sa_iters > 0:
        for _ in range(params.ao_outer_iters):
            steps = rng.normal(0.0, params.sa_step * qbar, params.sa_iters)
            uniforms = rng.random(params.sa_iters)
            Q_sa, f_sa, acc = _kernels.anneal(
                model.cx, model.cy, model.alpha, model.beta, model.bh, model.amp,
                np.conj(v), Q, steps, uniforms, params.sa_t0 * f, params.sa_cooling,
                qbar, config.L, float(config.delta))
            accepted += acc
            if not f_sa > f:
                continue
            H_new = model.H(Q_sa)
            v_new, it, tr = unit_modulus_sca(H_new, v, config.i_sca, config.eps_sca)
            f_new = objective(H_new, v_new)
            iters += it
            if f_new >= f:
                Q, v, H, f = Q_sa, v_new, H_new, f_new
                trace.extend(tr[1:])
    return _finish("hpb-ao", H, v, config, start, iters, trace,
                   PhaseProfile.from_v(Q, v), accepted=accepted,
                   warm_objective=warm.objective)


def hpb_es(realization, config: SystemConfig, grid: int = 400) -> RunResult:
    """Exhaustive search of one surface's gradient over a ``grid x grid`` lattice.

    With a single surface the reference phase only rotates ``v^H H`` and
    leaves the objective unchanged, so ``v = 1``.
    """
    if realization.N != 1 or config.N != 1:
        raise ValueError("exhaustive gradient search needs exactly one RIS (N=1)")
    if grid < 2:
        raise ValueError("grid must have at least 2 points per axis")
    start = time.perf_counter()
    model = CompactModel(realization, config)
    qs = np.linspace(-config.qbar, config.qbar, grid)
    values = _kernels.grid_objective(
        model.cx[0], model.cy[0], model.alpha[0], model.beta[0], model.bh[0],
        float(model.amp[0]), qs, config.L, float(config.delta))
    ix, iy = np.unravel_index(np.argmax(values), values.shape)
    Q = np.array([[qs[ix]], [qs[iy]]])
    H = model.H(Q)
    v = np.ones(1, dtype=complex)
    return _finish("hpb-es", H, v, config, start, values.size, [objective(H, v)],
                   PhaseProfile.from_v(Q, v), grid_values=values)


def pb_sca(realization, config: SystemConfig, params: OptimizerParams | None = None,
           rng=None) -> RunResult:
    """SCA over all ``N L^2`` element phases of the direct channel.

    The per-element matrix is assembled inside the timed region. The default
    start is the strongest-path profile expanded to element phases.
    """
    params = params or OptimizerParams()
    start = time.perf_counter()
    A = reflection_matrix(realization, config)
    if params.pb_init == "warm":
        warm = hpb_spp(realization, config, params, rng)
        theta0 = expand_profile(warm.profile, config.L, config.delta).flat().ravel()
    else:
        if rng is None:
            raise ValueError("pb_init='random' needs an rng")
        theta0 = rng.uniform(0.0, 2 * np.pi, A.shape[0])
    x, iters, trace = unit_modulus_sca(A, np.exp(-1j * theta0), config.i_sca, config.eps_sca)
    phases = ElementPhases.from_flat(-np.angle(x), config.L)
    return _finish("pb-sca", A, x, config, start, iters, trace, phases)


def random_phases(realization, config: SystemConfig, rng, trials: int = 1000,
                  chunk: int = 128) -> RunResult:
    """Average rate and objective over i.i.d. uniform element phases with MRT."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    start = time.perf_counter()
    A = reflection_matrix(realization, config)
    objs = np.empty(trials)
    first = None
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        theta = rng.uniform(0.0, 2 * np.pi, (m, A.shape[0]))
        h = np.exp(1j * theta) @ A
        objs[done:done + m] = np.einsum("tm,tm->t", h, h.conj()).real
        if first is None:
            first = theta[0]
        done += m
    # MRT attains |h^H w|^2 = p ||h||^2 for every draw
    rates = np.log2(1.0 + config.p * objs / config.sigma2)
    x = np.exp(-1j * first)
    w = mrt(A, x, config.p) if objs[0] > 0 else np.zeros(config.M, dtype=complex)
    wall = time.perf_counter() - start
    return RunResult(
        algorithm="random", profile=ElementPhases.from_flat(first, config.L), w=w,
        objective=float(objs.mean()), rate=float(rates.mean()), wall_time=wall,
        iterations=trials, info={"rates": rates, "objectives": objs})
