"""Compare the compiled and numpy flow kernels.

    python benchmarks/bench_flow.py [--repeat 5]

Times one implicit step (Newton + tridiagonal solves) at several grid sizes
and a full bump-to-soliton run, for each available backend, and checks that
both backends give the same answer.
"""

import argparse
import time

import numpy as np

from hopfsoliton import _backend
from hopfsoliton.flow import FlowControls, FlowState, preset_initial, run_flow
from hopfsoliton.geometry import params_from_ab
from hopfsoliton.soliton import solve_profile


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_step(kernels, N, repeat):
    params = params_from_ab(-2.0, -1.0)
    sol = solve_profile(params)
    state = FlowState.from_profile(preset_initial("bump", sol), params, 40.0, N)
    s_left, s_right = state.slopes
    return best_of(lambda: kernels.be_solve(state.theta, 1e-2, state.h, s_left, s_right, 1e-12, 1e-13, 25), repeat)


def bench_run(kernels, repeat):
    params = params_from_ab(-2.0, -1.0)
    sol = solve_profile(params)
    init = preset_initial("bump", sol)
    controls = FlowControls(target_error=1e-4, record_every=0.5)

    def run():
        saved = _backend.kernels
        _backend.kernels = kernels
        try:
            return run_flow(init, params, 20.0, controls, sol)
        finally:
            _backend.kernels = saved

    return best_of(run, repeat)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = [("python", _backend.python_kernels)]
    if _backend.compiled_kernels is not None:
        backends.append(("cython", _backend.compiled_kernels))
    else:
        print("compiled kernels not available; timing the numpy fallback only")

    print(f"{'case':<22}" + "".join(f"{name:>12}" for name, _ in backends) + f"{'speedup':>10}")
    for N in (501, 2001, 8001, 32001):
        times, thetas = [], []
        for _, k in backends:
            t, out = bench_step(k, N, args.repeat)
            times.append(t)
            thetas.append(out[0])
        diff = max(float(np.max(np.abs(th - thetas[0]))) for th in thetas)
        speed = f"{times[0] / times[-1]:9.1f}x" if len(times) > 1 else ""
        print(f"{'step N=' + str(N):<22}" + "".join(f"{t * 1e3:10.3f}ms" for t in times) + speed + f"   max|diff| {diff:.1e}")

    times, errs = [], []
    for _, k in backends:
        t, res = bench_run(k, max(1, args.repeat // 2))
        times.append(t)
        errs.append(res.trajectory[-1].aligned_sup_error)
    speed = f"{times[0] / times[-1]:9.1f}x" if len(times) > 1 else ""
    print(f"{'bump run N=2001':<22}" + "".join(f"{t * 1e3:10.1f}ms" for t in times) + speed + f"   final errors {errs}")


if __name__ == "__main__":
    main()
