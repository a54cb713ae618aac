"""Time the numba kernels against their pure-numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeats 5] [--L 30]

Both paths run in the same process; the env flag only picks the default.
Compilation happens in ``warmup`` before anything is timed.
"""
import argparse
import timeit

import numpy as np

from hpb import _kernels as K
from hpb.channel_model import SystemConfig, sample_realization
from hpb.phase_synthesis import CompactModel


def cases(L, seed=0):
    cfg = SystemConfig(M=8, N=4, L=L, P=8)
    m = CompactModel(sample_realization(cfg, np.random.default_rng(seed)), cfg)
    rng = np.random.default_rng(seed + 1)
    s = rng.uniform(-4, 4, 200_000)
    Q = rng.uniform(-1, 1, (2, cfg.N))
    vconj = np.exp(1j * rng.uniform(0, 2 * np.pi, cfg.N))
    f0 = float(np.linalg.norm(vconj @ m.H(Q)) ** 2)
    steps = rng.normal(0, 0.1, 2000)
    uni = rng.random(2000)
    grid = np.linspace(-1, 1, 100)
    one = (m.cx[0], m.cy[0], m.alpha[0], m.beta[0], m.bh[0], float(m.amp[0]), grid, L, 0.5)
    qx, qy = Q[0].copy(), Q[1].copy()
    return {
        "dirichlet (2e5 points)": lambda f: f(s, L, 0.5),
        "cascade_weights": lambda f: f(m.cx, m.cy, m.alpha, m.beta, qx, qy, L, 0.5),
        "anneal (2000 proposals)": lambda f: f(m.cx, m.cy, m.alpha, m.beta, m.bh, m.amp, vconj,
                                               Q, steps, uni, f0, 0.95, 1.0, L, 0.5),
        "grid_objective (100x100)": lambda f: f(*one),
    }


KERNELS = {
    "dirichlet (2e5 points)": (K.dirichlet_numpy, getattr(K, "dirichlet_numba", None)),
    "cascade_weights": (K.cascade_weights_numpy, getattr(K, "cascade_weights_numba", None)),
    "anneal (2000 proposals)": (K.anneal_numpy, getattr(K, "anneal_numba", None)),
    "grid_objective (100x100)": (K.grid_objective_numpy, getattr(K, "grid_objective_numba", None)),
}


def best_time(call, repeats):
    number = 1
    # grow the loop count until one batch takes ~50 ms
    while timeit.timeit(call, number=number) < 0.05 and number < 10_000:
        number *= 4
    return min(timeit.repeat(call, number=number, repeat=repeats)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--L", type=int, default=30)
    args = ap.parse_args(argv)

    if not K.HAVE_NUMBA:
        print("numba not installed; only the numpy path can be timed")
    else:
        K.warmup()
    print(f"{'kernel':<26}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, run in cases(args.L).items():
        np_fn, nb_fn = KERNELS[name]
        t_np = best_time(lambda: run(np_fn), args.repeats)
        if K.HAVE_NUMBA and nb_fn is not None:
            run(nb_fn)
            t_nb = best_time(lambda: run(nb_fn), args.repeats)
            print(f"{name:<26}{1e3 * t_np:>12.3f}{1e3 * t_nb:>12.3f}{t_np / t_nb:>9.1f}x")
        else:
            print(f"{name:<26}{1e3 * t_np:>12.3f}{'-':>12}{'-':>10}")


if __name__ == "__main__":
    main()
