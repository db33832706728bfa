"""The numba kernels and the pure-numpy fallback must agree."""
import json
import os
import subprocess
import sys

import numpy as np
from numpy.testing import assert_allclose

from fibermortar import _jit
from fibermortar.scenarios import clamped_stretch
from fibermortar.solver import assemble_global

PROBE = """
import json, numpy as np
from fibermortar import _jit
from fibermortar.scenarios import clamped_stretch
from fibermortar.solver import assemble_global
p = clamped_stretch(0.1)
d = np.random.default_rng(7).standard_normal(p.dofs.n_dofs) * 0.02
s = assemble_global(p, d, 1.0)
print(json.dumps({"backend": _jit.backend(), "residual": s.residual.tolist(),
                  "tangent": s.tangent.toarray().tolist(), "energy": s.energy}))
"""


def run_probe(disable):
    env = dict(os.environ)
    env.pop("FIBERMORTAR_DISABLE_NUMBA", None)
    if disable:
        env["FIBERMORTAR_DISABLE_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", PROBE], env=env, capture_output=True, text=True,
                         check=True)
    return json.loads(out.stdout)


def test_fallback_matches_numba():
    fast = run_probe(False)
    slow = run_probe(True)
    assert fast["backend"] == "numba"
    assert slow["backend"] == "numpy"
    scale = np.abs(fast["residual"]).max()
    assert_allclose(slow["residual"], fast["residual"], rtol=0, atol=1e-12 * scale)
    K = np.array(fast["tangent"])
    assert_allclose(slow["tangent"], K, rtol=0, atol=1e-12 * np.abs(K).max())
    assert abs(slow["energy"] - fast["energy"]) <= 1e-12 * abs(fast["energy"])


def test_in_process_backend_is_consistent():
    problem = clamped_stretch(0.1)
    d = np.zeros(problem.dofs.n_dofs)
    assert np.isfinite(assemble_global(problem, d, 1.0).residual).all()
    assert _jit.backend() in ("numba", "numpy")
