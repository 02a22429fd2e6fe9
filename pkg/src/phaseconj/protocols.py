"""End-to-end experiments: encoding strategies for (x, p) and the EPR noise bound."""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass

import numpy as np

from . import channels as ch
from .errors import InvalidParameter
from .measurement import BatchStats, Readout, batch, heterodyne, readout
from .rng import RngStream
from .states import (
    VACUUM_VARIANCE,
    GaussianState,
    coherent_state,
    partial_trace,
    tensor,
    vacuum_state,
)
from .transforms import (
    apply,
    beamsplitter_transform,
    phase_conjugator_transform,
    to_quadrature_map,
    two_mode_squeezer,
)

DEFAULT_SEED = 0xC0FFEE
DEFAULT_SHOTS = 100_000
MIN_SHOTS = 100


class Strategy(enum.Enum):
    PARALLEL_PRODUCT = "parallel_product"
    CONJUGATE_PRODUCT = "conjugate_product"
    CONJUGATE_ENTANGLED = "conjugate_entangled"

    @property
    def kind(self) -> str:
        return self.value

    @property
    def description(self) -> str:
        return _DESCRIPTIONS[self]

    @property
    def stream_id(self) -> int:
        return list(Strategy).index(self) + 1

    @classmethod
    def parse(cls, name: "str | Strategy") -> "Strategy":
        if isinstance(name, Strategy):
            return name
        key = str(name).strip().lower().replace("-", "_")
        for s in cls:
            if s.value == key:
                return s
        raise InvalidParameter(f"unknown strategy {name!r}")


_DESCRIPTIONS = {
    Strategy.PARALLEL_PRODUCT: "|a>|a>: heterodyne each copy, average the readouts",
    Strategy.CONJUGATE_PRODUCT: "|a>|a*>: heterodyne each copy, negate p of the second, average",
    Strategy.CONJUGATE_ENTANGLED: "|a>|a*>: balanced beam splitter, homodyne x on 0' and p on 1', divide by sqrt(2)",
}


@dataclass(frozen=True)
class EstimationReport:
    strategy: str
    shots: int
    true_x: float
    true_p: float
    est_var_x: float
    est_var_p: float
    stderr_x: float
    stderr_p: float
    seed: int

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EprReport:
    r: float
    sigma2: float
    var_Xp: float
    var_Pp: float
    product: float

    def as_dict(self) -> dict:
        return asdict(self)


def estimator_readout(strategy, x: float, p: float) -> Readout:
    """Readout of the ``(x_est, p_est)`` estimator for one strategy."""
    strategy = Strategy.parse(strategy)
    labels = ("x_est", "p_est")
    if strategy is Strategy.PARALLEL_PRODUCT:
        s = tensor(coherent_state(x, p), coherent_state(x, p))
        r = readout(s, heterodyne=[0, 1])
        E = 0.5 * np.array([[1, 0, 1, 0], [0, 1, 0, 1]])
    elif strategy is Strategy.CONJUGATE_PRODUCT:
        s = tensor(coherent_state(x, p), coherent_state(x, -p))
        r = readout(s, heterodyne=[0, 1])
        # the second copy's p readout estimates -p
        E = 0.5 * np.array([[1, 0, 1, 0], [0, 1, 0, -1]])
    else:
        s = tensor(coherent_state(x, p), coherent_state(x, -p))
        s = apply(beamsplitter_transform(np.pi / 4), s)
        r = readout(s, homodyne=[(0, "x"), (1, "p")])
        E = np.eye(2) / np.sqrt(2.0)
    return r.linear(E, labels)


def simulate_estimates(
    strategy,
    x: float,
    p: float,
    shots: int = DEFAULT_SHOTS,
    seed: int = DEFAULT_SEED,
    threads: int = 1,
    backend=None,
) -> BatchStats:
    strategy = Strategy.parse(strategy)
    if not isinstance(shots, (int, np.integer)) or shots < MIN_SHOTS:
        raise InvalidParameter(f"shots must be an integer >= {MIN_SHOTS}; got {shots!r}")
    rng = RngStream(seed, strategy.stream_id)
    return batch(estimator_readout(strategy, x, p), int(shots), rng, threads, backend)


def run_estimation(
    strategy,
    x: float,
    p: float,
    shots: int = DEFAULT_SHOTS,
    seed: int = DEFAULT_SEED,
    threads: int = 1,
    backend=None,
) -> EstimationReport:
    strategy = Strategy.parse(strategy)
    stats = simulate_estimates(strategy, x, p, shots, seed, threads, backend)
    var = stats.var
    se = stats.stderr_var
    return EstimationReport(
        strategy=strategy.kind,
        shots=int(shots),
        true_x=float(x),
        true_p=float(p),
        est_var_x=float(var[0]),
        est_var_p=float(var[1]),
        stderr_x=float(se[0]),
        stderr_p=float(se[1]),
        seed=int(seed),
    )


def analytic_variance(strategy) -> tuple[float, float]:
    """Closed-form estimator variances per quadrature."""
    strategy = Strategy.parse(strategy)
    if strategy is Strategy.CONJUGATE_ENTANGLED:
        # one homodyne of variance 1/2 on sqrt(2) x, rescaled by 1/sqrt(2)
        v = VACUUM_VARIANCE / 2
    else:
        # heterodyne variance 2 * 1/2, averaged over two copies
        v = 2 * VACUUM_VARIANCE / 2
    return v, v


def pipeline_variance(strategy, x: float = 0.0, p: float = 0.0) -> tuple[float, float]:
    """Estimator variances from the covariance pipeline, no sampling."""
    var = np.diag(estimator_readout(strategy, x, p).cov)
    return float(var[0]), float(var[1])


def _observable_moments(w: np.ndarray, state: GaussianState, layers) -> tuple[float, float]:
    """Mean and variance of ``w . r_out`` after ``layers`` of ``(X, Y)`` maps.

    Evaluated in the Heisenberg picture: ``w`` is pulled back through each
    layer and picks up ``w^T Y w`` noise on the way. Unlike propagating the
    state forward, this never forms large covariances whose differences
    carry the answer.
    """
    w = np.asarray(w, dtype=float)
    noise = 0.0
    for X, Y in reversed(layers):
        noise += float(w @ Y @ w)
        w = X.T @ w
    return float(w @ state.mean), float(w @ state.cov @ w) + noise


def _embed_channel(c: ch.GaussianChannel, mode: int, n_modes: int):
    X = np.eye(2 * n_modes)
    Y = np.zeros((2 * n_modes, 2 * n_modes))
    sl = slice(2 * mode, 2 * mode + 2)
    X[sl, sl] = c.X
    Y[sl, sl] = c.Y
    return X, Y


def epr_bound_experiment(r: float, sigma2: float, allow_unphysical: bool = False) -> EprReport:
    """Conjugate mode 1 of a two-mode squeezed vacuum with noise ``sigma2``.

    Reports the variances of ``X' = x_0 - x_1'`` and ``P' = p_0 - p_1'``.
    The pair is generated from vacuum by a two-mode squeezer, so the circuit
    is vacuum -> squeezer -> conjugation channel on mode 1.

    ``allow_unphysical`` lets ``sigma2 < 1`` through, to show the product
    dropping below the uncertainty bound.
    """
    if not np.isfinite(r) or r < 0:
        raise InvalidParameter(f"squeezing must be finite and nonnegative; got {r}")
    if allow_unphysical:
        channel = ch.GaussianChannel(ch.CONJUGATION, sigma2 * np.eye(2))
    else:
        channel = ch.conjugation_channel(sigma2)
    layers = [
        (to_quadrature_map(two_mode_squeezer(r)), np.zeros((4, 4))),
        _embed_channel(channel, 1, 2),
    ]
    vac = vacuum_state(2)
    _, var_x = _observable_moments(np.array([1.0, 0.0, -1.0, 0.0]), vac, layers)
    _, var_p = _observable_moments(np.array([0.0, 1.0, 0.0, -1.0]), vac, layers)
    return EprReport(float(r), float(sigma2), var_x, var_p, var_x * var_p)


def epr_bound_grid(start: float, stop: float, step: float, sigma2: float, allow_unphysical=False):
    return [epr_bound_experiment(r, sigma2, allow_unphysical) for r in grid_values(start, stop, step)]


def grid_values(start: float, stop: float, step: float) -> list[float]:
    """``start, start + step, ...`` up to ``stop`` inclusive (within a half step)."""
    if not step > 0:
        raise InvalidParameter(f"grid step must be positive; got {step}")
    if stop < start:
        raise InvalidParameter(f"grid stop {stop} is below start {start}")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(n)]


def conjugation_output(x: float, p: float, sigma2: float = 1.0) -> GaussianState:
    return ch.apply_channel(ch.conjugation_channel(sigma2), coherent_state(x, p))


def conjugation_fidelity_experiment(x: float, p: float, sigma2: float) -> float:
    """Fidelity of the conjugation output with ``coherent(x, -p)``; ``1/(1 + sigma2)``."""
    return ch.fidelity_coherent(conjugation_output(x, p, sigma2), x, -p)


def dilation_output(x: float, p: float) -> GaussianState:
    """Output of the conjugating amplifier on ``coherent(x, p)`` with a vacuum ancilla."""
    out = apply(phase_conjugator_transform(), tensor(coherent_state(x, p), vacuum_state(1)))
    return partial_trace(out, [0])


@dataclass(frozen=True)
class FidelityEstimate:
    shots: int
    overlap_mean: float
    overlap_stderr: float
    from_moments: float


def monte_carlo_conjugation_fidelity(
    x: float,
    p: float,
    shots: int = DEFAULT_SHOTS,
    seed: int = DEFAULT_SEED,
    backend=None,
) -> FidelityEstimate:
    """Sample the measure-and-prepare conjugator and estimate its fidelity two ways.

    Each shot heterodynes ``coherent(x, p)`` and prepares ``coherent(x~, -p~)``.
    ``overlap_mean`` averages the per-shot overlap with ``coherent(x, -p)``;
    ``from_moments`` rebuilds the output mixture's mean and covariance from
    the prepared amplitudes and applies the Gaussian fidelity formula.
    """
    if shots < MIN_SHOTS:
        raise InvalidParameter(f"shots must be >= {MIN_SHOTS}; got {shots}")
    het = heterodyne(coherent_state(x, p), 0)
    samples = het.draws(RngStream(seed, 0xF1DE), 0, shots, backend=backend)
    prepared = samples * np.array([1.0, -1.0])
    target = np.array([x, -p])
    d2 = np.sum((prepared - target) ** 2, axis=1)
    overlap = np.exp(-0.5 * d2)
    mixture = GaussianState(
        prepared.mean(axis=0), np.cov(prepared.T) + VACUUM_VARIANCE * np.eye(2)
    )
    return FidelityEstimate(
        shots=int(shots),
        overlap_mean=float(overlap.mean()),
        overlap_stderr=float(overlap.std(ddof=1) / np.sqrt(shots)),
        from_moments=ch.fidelity_coherent(mixture, x, -p),
    )


__all__ = [
    "Strategy",
    "EstimationReport",
    "EprReport",
    "analytic_variance",
    "pipeline_variance",
    "run_estimation",
    "simulate_estimates",
    "epr_bound_experiment",
    "epr_bound_grid",
    "conjugation_fidelity_experiment",
    "monte_carlo_conjugation_fidelity",
]
