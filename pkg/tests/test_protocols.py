import numpy as np
import pytest

from phaseconj.errors import InvalidParameter, UnphysicalChannel
from phaseconj.protocols import (
    DEFAULT_SEED,
    Strategy,
    analytic_variance,
    conjugation_fidelity_experiment,
    dilation_output,
    epr_bound_experiment,
    epr_bound_grid,
    estimator_readout,
    grid_values,
    monte_carlo_conjugation_fidelity,
    pipeline_variance,
    run_estimation,
)
from phaseconj.states import tensor, two_mode_squeezed_state, vacuum_state
from phaseconj.channels import apply_channel_to_mode, conjugation_channel

GRID = [(x, p) for x in (0, 1, -1, 5, -5) for p in (0, 1, -1, 5, -5)]
EXPECTED = {
    Strategy.PARALLEL_PRODUCT: 0.5,
    Strategy.CONJUGATE_PRODUCT: 0.5,
    Strategy.CONJUGATE_ENTANGLED: 0.25,
}


def test_strategy_parsing():
    assert Strategy.parse("conjugate-entangled") is Strategy.CONJUGATE_ENTANGLED
    assert Strategy.parse(Strategy.PARALLEL_PRODUCT) is Strategy.PARALLEL_PRODUCT
    assert {s.kind for s in Strategy} == {"parallel_product", "conjugate_product", "conjugate_entangled"}
    assert len({s.stream_id for s in Strategy}) == 3
    assert all(s.description for s in Strategy)
    with pytest.raises(InvalidParameter):
        Strategy.parse("bell")


@pytest.mark.parametrize("strategy", list(Strategy))
def test_analytic_and_pipeline_variance(strategy):
    want = EXPECTED[strategy]
    assert analytic_variance(strategy) == (want, want)
    for x, p in GRID:
        vx, vp = pipeline_variance(strategy, x, p)
        assert abs(vx - want) < 1e-12 and abs(vp - want) < 1e-12


@pytest.mark.parametrize("strategy", list(Strategy))
def test_estimators_are_unbiased(strategy):
    for x, p in GRID:
        r = estimator_readout(strategy, x, p)
        assert np.allclose(r.mean, [x, p], atol=1e-12)


@pytest.mark.parametrize("strategy", list(Strategy))
def test_monte_carlo_universality(strategy, backend):
    rep = run_estimation(strategy, 1.0, -1.0, backend=backend)
    # both quadratures agree within their joint 5-sigma interval
    assert abs(rep.est_var_x - rep.est_var_p) <= 5 * np.hypot(rep.stderr_x, rep.stderr_p)
    assert rep.est_var_x >= 0 and rep.stderr_x >= 0


@pytest.mark.parametrize("strategy", list(Strategy))
def test_monte_carlo_independent_of_amplitude(strategy):
    want = EXPECTED[strategy]
    for x, p in GRID[::3]:
        rep = run_estimation(strategy, x, p, shots=20_000, seed=77)
        assert abs(rep.est_var_x - want) <= 5 * rep.stderr_x
        assert abs(rep.est_var_p - want) <= 5 * rep.stderr_p


def test_estimation_report_fields():
    rep = run_estimation("parallel-product", 0.3, 0.4, shots=1000, seed=5)
    assert list(rep.as_dict()) == [
        "strategy", "shots", "true_x", "true_p", "est_var_x", "est_var_p",
        "stderr_x", "stderr_p", "seed",
    ]
    assert rep.strategy == "parallel_product" and rep.seed == 5 and rep.shots == 1000


def test_estimation_rejects_few_shots():
    with pytest.raises(InvalidParameter):
        run_estimation("parallel-product", 0, 0, shots=99)


def test_estimation_thread_independent():
    a = run_estimation("conjugate-product", 1, 1, shots=50_000, threads=1)
    b = run_estimation("conjugate-product", 1, 1, shots=50_000, threads=8)
    assert a == b


def _epr_forward(r, sigma2):
    # forward covariance route; loses accuracy as e^{2r} grows
    s = apply_channel_to_mode(conjugation_channel(sigma2), two_mode_squeezed_state(r), 1)
    wx, wp = np.array([1.0, 0, -1, 0]), np.array([0, 1.0, 0, -1])
    return wx @ s.cov @ wx, wp @ s.cov @ wp


@pytest.mark.parametrize("r", [0.0, 0.5, 1.0, 2.0, 3.0])
@pytest.mark.parametrize("sigma2", [1.0, 1.5, 3.0])
def test_epr_matches_forward_covariances(r, sigma2):
    rep = epr_bound_experiment(r, sigma2)
    vx, vp = _epr_forward(r, sigma2)
    assert rep.var_Xp == pytest.approx(vx, rel=1e-9)
    assert rep.var_Pp == pytest.approx(vp, rel=1e-9)
    # closed form: cosh 2r - sinh 2r cancels to e^{-2r} in the conjugated frame
    assert rep.var_Xp == pytest.approx(np.exp(-2 * r) + sigma2, rel=1e-12)


def test_epr_bound_and_monotone():
    rs = grid_values(0.0, 20.0, 0.5)
    for sigma2 in (1.0, 1.3, 2.0):
        prods = [epr_bound_experiment(r, sigma2).product for r in rs]
        assert all(p >= 1 for p in prods)
        # nonincreasing up to float rounding once e^{-2r} drops below one ulp
        assert all(b <= a + 4 * np.spacing(a) for a, b in zip(prods, prods[1:]))
        assert all(b < a for a, b in zip(prods[:20], prods[1:21]))
        assert abs(prods[-1] - sigma2**2) < 1e-8


def test_epr_unphysical_noise():
    with pytest.raises(UnphysicalChannel):
        epr_bound_experiment(1.0, 0.5)
    rep = epr_bound_experiment(5.0, 0.5, allow_unphysical=True)
    assert rep.product < 1
    with pytest.raises(InvalidParameter):
        epr_bound_experiment(-1.0, 1.0)


def test_grid_values():
    assert grid_values(0, 1, 0.25) == [0, 0.25, 0.5, 0.75, 1.0]
    assert len(grid_values(0, 20, 0.5)) == 41
    for bad in ((0, 1, 0), (1, 0, 0.1)):
        with pytest.raises(InvalidParameter):
            grid_values(*bad)
    assert [r.r for r in epr_bound_grid(0, 1, 0.5, 1.0)] == [0, 0.5, 1.0]


def test_conjugation_fidelity():
    for x, p in GRID:
        assert abs(conjugation_fidelity_experiment(x, p, 1.0) - 0.5) <= 1e-12
        assert abs(conjugation_fidelity_experiment(x, p, 3.0) - 0.25) <= 1e-12
    with pytest.raises(UnphysicalChannel):
        conjugation_fidelity_experiment(0, 0, 0.9)


def test_dilation_output():
    out = dilation_output(2.0, 3.0)
    assert np.allclose(out.mean, [2.0, -3.0], atol=1e-12)
    assert np.allclose(out.cov, 1.5 * np.eye(2), atol=1e-12)


def test_monte_carlo_fidelity(backend):
    est = monte_carlo_conjugation_fidelity(1.0, -2.0, seed=DEFAULT_SEED, backend=backend)
    assert abs(est.overlap_mean - 0.5) <= 5 * est.overlap_stderr
    # moment-based estimate: sampling error on det(V + I/2) ~ sqrt(2/n) per entry
    assert abs(est.from_moments - 0.5) <= 5 * 0.5 * np.sqrt(2 / est.shots) * 2
    with pytest.raises(InvalidParameter):
        monte_carlo_conjugation_fidelity(0, 0, shots=10)
