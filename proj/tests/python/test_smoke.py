import hashlib
import math
import os
import pathlib

import numpy as np
import pytest

import nlwave

MODEL = """
domain: {dim: 1, modes: 8}
model:
  damping: {kind: hyperbolic, a: 1, b: 2}
  nonlinearity: {kind: bistable, q: 5, a: 2}
integrator: {dt: 0.01}
"""


@pytest.fixture
def workdir(tmp_path):
    base = os.environ.get("NLWAVE_TEST_TMP")
    if base is None:
        return tmp_path
    p = pathlib.Path(base) / tmp_path.name
    p.mkdir(parents=True, exist_ok=True)
    return p


def test_version():
    assert nlwave.__version__ == nlwave.version()
    assert "compiler" in nlwave.platform()
    assert "attractor" in nlwave.experiment_kinds()


def test_transform_round_trip():
    d = nlwave.Domain(1, 8)
    assert list(d.eigenvalues) == [k * k for k in range(1, 9)]
    c = np.zeros(8)
    c[2] = 1.0
    x = d.nodes()
    # e_3(x) = sqrt(2/pi) sin(3x)
    assert np.allclose(d.to_grid(c), math.sqrt(2 / math.pi) * np.sin(3 * x), atol=1e-14)
    rng = np.random.default_rng(0)
    f = rng.standard_normal(8)
    assert np.allclose(d.from_grid(d.to_grid(f)), f, atol=1e-13)
    with pytest.raises(ValueError):
        nlwave.Domain(1, 8, padding_factor=2)


def test_config_errors():
    canon = nlwave.canonical_config(MODEL)
    assert nlwave.canonical_config(canon) == canon
    with pytest.raises(nlwave.ConfigError, match="mdoes"):
        nlwave.canonical_config("domain:\n  dim: 1\n  mdoes: 4\n")
    with pytest.raises(nlwave.ConfigError):
        nlwave.canonical_config(MODEL, ["integrator.dt=-1"])


def test_simulate_energy_identity():
    out = nlwave.simulate(MODEL, ["experiment.horizon=1", "output.stride=10"])
    assert out["t"].shape == (11,)
    assert out["u"].shape == (11, 8)
    assert out["t"][-1] == 1.0
    assert np.all(np.diff(out["energy"]) <= 1e-12)
    # The energy balance closes at second order in the step.
    fine = nlwave.simulate(MODEL, ["experiment.horizon=1", "output.stride=100", "integrator.dt=0.001"])
    coarse_err = np.max(np.abs(out["identity_residual"]))
    fine_err = np.max(np.abs(fine["identity_residual"]))
    assert coarse_err / fine_err > 50


def test_equilibria():
    eqs = nlwave.equilibria(MODEL)
    assert len(eqs) == 3
    assert sorted(e["morse_index"] for e in eqs) == [0, 0, 1]
    assert max(e["residual"] for e in eqs) < 1e-10


def test_evaluate_check_assumptions():
    r = nlwave.evaluate(MODEL, kind="check_assumptions")
    assert r["passed"]
    assert r["verdicts"]["non_degenerate"]


def test_run_writes_manifest(workdir):
    code, manifest = nlwave.run(
        MODEL, [f"output.directory={workdir / 'sim'}", "experiment.horizon=0.5"], "simulate"
    )
    assert code == 0
    assert manifest["status"] == "passed"
    for rel, digest in manifest["digests"].items():
        data = (workdir / "sim" / rel).read_bytes()
        assert hashlib.sha256(data).hexdigest() == digest
        assert nlwave.sha256_hex(data) == digest
    trace = nlwave.read_trace(str(workdir / "sim" / "traces" / "trajectory.csv"))
    assert trace["columns"][0] == "t"
    assert trace["data"].shape[0] == 6


def test_evaluate_traces():
    r = nlwave.evaluate(MODEL, ["experiment.modes=[4,8]", "experiment.horizon=0.5"], "convergence")
    dist = r["traces"]["distances"]
    assert dist["columns"] == ["n_coarse", "n_fine", "distance"]
    assert dist["data"][0, 2] == r["scalars"]["distance_4_8"]
