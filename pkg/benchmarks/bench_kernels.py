"""Time global assembly and a Newton solve under the numba and numpy backends.

Each backend runs in its own interpreter because the switch is read at import
time. Usage: ``python benchmarks/bench_kernels.py [--repeat N]``.
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from fibermortar import _jit
from fibermortar.scenarios import clamped_stretch
from fibermortar.solver import NewtonSettings, assemble_global, newton_solve

repeat = int(sys.argv[1])
problem = clamped_stretch(0.1, n_cells=4, n_beam_elements=8)
d = np.zeros(problem.dofs.n_dofs)
t0 = time.perf_counter()
assemble_global(problem, d, 1.0)
first = time.perf_counter() - t0
times = []
for _ in range(repeat):
    t0 = time.perf_counter()
    assemble_global(problem, d, 1.0)
    times.append(time.perf_counter() - t0)
t0 = time.perf_counter()
states = newton_solve(problem, NewtonSettings(n_load_steps=2))
newton = time.perf_counter() - t0
print(json.dumps({"backend": _jit.backend(), "first": first, "assembly": min(times),
                  "newton": newton, "iterations": sum(s.iterations for s in states),
                  "n_dofs": problem.dofs.n_dofs}))
"""


def run(disable, repeat):
    env = dict(os.environ)
    env.pop("FIBERMORTAR_DISABLE_NUMBA", None)
    if disable:
        env["FIBERMORTAR_DISABLE_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    rows = [run(False, args.repeat), run(True, args.repeat)]
    print(f"problem: stretched 4x4x4 block with an 8-element fiber, {rows[0]['n_dofs']} dofs")
    print(f"{'backend':<8} {'first call [s]':>15} {'assembly [s]':>13} {'newton [s]':>11} {'iters':>6}")
    for r in rows:
        print(f"{r['backend']:<8} {r['first']:>15.4f} {r['assembly']:>13.4f} {r['newton']:>11.3f} "
              f"{r['iterations']:>6d}")
    print(f"assembly speedup numba/numpy: {rows[1]['assembly'] / rows[0]['assembly']:.1f}x")


if __name__ == "__main__":
    main()
