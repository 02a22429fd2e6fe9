"""Acceptance criteria; a PASS/FAIL line per criterion is printed after the run."""

import subprocess
import sys
import time

import numpy as np
import pytest

from phaseconj.channels import (
    CONJUGATION,
    added_noise,
    apply_channel,
    channel_from_dilation,
    conjugation_channel,
    fidelity_coherent,
    measure_prepare_conjugation,
    min_cp_noise,
)
from phaseconj.constraints import grid_scan_row1, random_search_uniqueness, solve_row1
from phaseconj.errors import UnphysicalChannel
from phaseconj.measurement import batch, homodyne
from phaseconj.protocols import (
    DEFAULT_SEED,
    Strategy,
    analytic_variance,
    conjugation_output,
    epr_bound_experiment,
    grid_values,
    run_estimation,
)
from phaseconj.rng import RngStream
from phaseconj.states import VACUUM_VARIANCE, coherent_state, partial_trace, tensor, vacuum_state
from phaseconj.transforms import apply, beamsplitter_transform, phase_conjugator_transform

from gen import random_physical_state

GRID = [(x, p) for x in (0.0, 1.0, -1.0, 5.0, -5.0) for p in (0.0, 1.0, -1.0, 5.0, -5.0)]
SHOTS = 100_000
K_SIGMA = 5.0


def _timed(fn, repeat=1):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


# 1 ---------------------------------------------------------------------------

C1 = pytest.mark.criterion(1, "conjugator output cov (3/2)I, added noise 1, < 1 ms")


@C1
@pytest.mark.parametrize("x, p", GRID)
def test_c1_conjugator_output_noise(x, p):
    def run():
        out = apply(phase_conjugator_transform(), tensor(coherent_state(x, p), vacuum_state(1)))
        return partial_trace(out, [0])

    b1, elapsed = _timed(run, repeat=5)
    assert np.max(np.abs(b1.cov - 1.5 * np.eye(2))) <= 1e-12
    assert np.max(np.abs(b1.mean - [x, -p])) <= 1e-12
    assert elapsed < 1e-3
    # noise above the vacuum is one unit per quadrature (sqrt2 * sqrt2 is 2 + 1 ulp)
    assert np.max(np.abs(np.diag(b1.cov) - VACUUM_VARIANCE - 1.0)) <= 1e-12


@C1
def test_c1_added_noise_is_one():
    assert np.array_equal(added_noise(conjugation_channel(1.0)), [1.0, 1.0])
    c = channel_from_dilation(phase_conjugator_transform(), vacuum_state(1), output_mode=0)
    assert np.max(np.abs(added_noise(c) - 1.0)) <= 1e-12
    assert np.max(np.abs(c.X - CONJUGATION)) <= 1e-12


# 2 ---------------------------------------------------------------------------


@pytest.mark.criterion(2, "conjugation fidelity 1/2 on the amplitude grid")
@pytest.mark.parametrize("x, p", GRID)
def test_c2_fidelity_half(x, p):
    f = fidelity_coherent(conjugation_output(x, p, 1.0), x, -p)
    assert abs(f - 0.5) <= 1e-12


# 3 ---------------------------------------------------------------------------

C3 = pytest.mark.criterion(3, "noise bound sigma2 >= 1 (CP and EPR routes)")


@C3
def test_c3_min_cp_noise():
    assert abs(min_cp_noise(np.diag([1.0, -1.0])) - 1.0) <= 1e-9


@C3
def test_c3_rejects_sub_bound_noise():
    with pytest.raises(UnphysicalChannel):
        conjugation_channel(1 - 1e-6)


@C3
def test_c3_epr_product():
    rs = grid_values(0.0, 20.0, 0.5)
    assert len(rs) == 41 and rs[-1] == 20.0
    reports = [epr_bound_experiment(r, 1.0) for r in rs]
    assert all(rep.product >= 1 for rep in reports)
    assert reports[-1].product - 1 < 1e-8


# 4 ---------------------------------------------------------------------------

C4 = pytest.mark.criterion(4, "coefficients (sqrt2, 0) unique; search < 10 s")


@C4
def test_c4_solve_row1():
    m12, l12 = solve_row1()
    assert abs(m12 - np.sqrt(2)) <= 1e-12 and abs(l12) <= 1e-12


@C4
def test_c4_grid_scan_single_cell():
    cells = grid_scan_row1()
    assert len(cells) == 1
    m, l = cells[0]
    # the feasible cell is the grid point nearest (sqrt 2, 0)
    assert abs(m - np.sqrt(2)) <= 1e-3 and l == 0.0


@C4
def test_c4_random_search():
    summary, elapsed = _timed(lambda: random_search_uniqueness(100_000, DEFAULT_SEED))
    assert summary.samples == 100_000
    assert summary.feasible > 0
    assert summary.counterexamples == 0
    assert elapsed < 10.0


# 5 ---------------------------------------------------------------------------

C5 = pytest.mark.criterion(5, "estimator variances 1/2, 1/2, 1/4 within 5 stderr, < 2 s")
EXPECTED = [
    (Strategy.PARALLEL_PRODUCT, 0.5),
    (Strategy.CONJUGATE_PRODUCT, 0.5),
    (Strategy.CONJUGATE_ENTANGLED, 0.25),
]


@C5
@pytest.mark.parametrize("strategy, want", EXPECTED, ids=[s.kind for s, _ in EXPECTED])
def test_c5_estimation(strategy, want):
    rep, elapsed = _timed(lambda: run_estimation(strategy, 1.0, -1.0, SHOTS, DEFAULT_SEED))
    assert analytic_variance(strategy) == (want, want)
    assert abs(rep.est_var_x - want) <= K_SIGMA * rep.stderr_x
    assert abs(rep.est_var_p - want) <= K_SIGMA * rep.stderr_p
    assert elapsed < 2.0


# 6 ---------------------------------------------------------------------------

C6 = pytest.mark.criterion(6, "measure-and-prepare equals conjugation_channel(1)")


@C6
def test_c6_channel_matrices():
    mp = measure_prepare_conjugation()
    cc = conjugation_channel(1.0)
    assert np.max(np.abs(mp.X - cc.X)) <= 1e-12
    assert np.max(np.abs(mp.Y - cc.Y)) <= 1e-12


@C6
def test_c6_random_inputs():
    rng = np.random.default_rng(0xC0FFEE)
    mp = measure_prepare_conjugation()
    cc = conjugation_channel(1.0)
    for _ in range(100):
        s = random_physical_state(rng, 1)
        assert apply_channel(mp, s).allclose(apply_channel(cc, s), atol=1e-10)


# 7 ---------------------------------------------------------------------------


@pytest.mark.criterion(7, "beam-splitter homodyne separation within 5 stderr")
@pytest.mark.parametrize("x, p", [(1.0, -1.0), (5.0, 5.0), (0.0, 1.0), (-5.0, 0.0)])
def test_c7_beamsplitter_homodyne(x, p):
    out = apply(beamsplitter_transform(np.pi / 4), tensor(coherent_state(x, p), coherent_state(x, -p)))
    for mode, quad, want in ((0, "x", np.sqrt(2) * x), (1, "p", np.sqrt(2) * p)):
        st = batch(homodyne(out, mode, quad), SHOTS, RngStream(DEFAULT_SEED, 70 + mode))
        assert abs(st.mean[0] - want) <= K_SIGMA * st.stderr_mean[0]
        assert abs(st.var[0] - 0.5) <= K_SIGMA * st.stderr_var[0]


# 8 ---------------------------------------------------------------------------

COMMANDS = {
    "conjugate": ["conjugate", "--alpha-x", "1.5", "--alpha-p", "-0.5"],
    "estimate": ["estimate", "--alpha-x", "1", "--alpha-p", "2", "--seed", "0xC0FFEE"],
    "epr-bound": ["epr-bound", "--r-grid", "0:20:0.5"],
    "solve": ["solve", "--seed", "0xC0FFEE"],
    "fidelity": ["fidelity", "--alpha-x", "1", "--monte-carlo", "--seed", "0xC0FFEE"],
}


@pytest.mark.criterion(8, "CLI output byte-identical across runs and thread counts")
@pytest.mark.parametrize("name", list(COMMANDS))
def test_c8_cli_determinism(name):
    def run(threads):
        res = subprocess.run(
            [sys.executable, "-m", "phaseconj", *COMMANDS[name], "--threads", str(threads)],
            capture_output=True,
            check=False,
        )
        assert res.returncode == 0, res.stderr.decode()
        return res.stdout

    first, second, eight = run(1), run(1), run(8)
    assert first
    assert first == second == eight
