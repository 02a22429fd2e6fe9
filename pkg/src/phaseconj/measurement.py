"""Homodyne and heterodyne detection on Gaussian states, with sampling.

A joint Gaussian measurement is described by a :class:`Readout`: the outcome
mean and a square-root factor ``B`` of the outcome covariance, so that one
shot is ``mean + B z`` with ``z`` standard normal. Keeping the factor, rather
than only the covariance, lets linear estimators built on top of a readout
reuse exactly the same underlying shots.

Heterodyne (simultaneous x and p) detection is modelled as the exact
marginal smeared by an extra vacuum half-unit on each quadrature, so a
coherent state yields outcomes of variance 1.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidModeError, InvalidParameter
from .rng import RngStream
from .states import VACUUM_VARIANCE, GaussianState, _check_modes, tensor, vacuum_state
from .transforms import apply, beamsplitter_transform, embed

CHUNK_SHOTS = 8192
_QUAD = {"x": 0, "p": 1}


def _quad_index(quadrature: str) -> int:
    try:
        return _QUAD[quadrature]
    except (KeyError, TypeError):
        raise InvalidModeError(f"quadrature must be 'x' or 'p'; got {quadrature!r}") from None


def sqrt_factor(cov: np.ndarray) -> np.ndarray:
    """Lower-triangular Cholesky factor, or a symmetric root when only semidefinite."""
    cov = np.asarray(cov, dtype=float)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        w, U = np.linalg.eigh(0.5 * (cov + cov.T))
        if w.min() < -1e-12 * max(1.0, abs(w.max())):
            raise InvalidParameter("outcome covariance is not positive semidefinite") from None
        return U * np.sqrt(np.clip(w, 0.0, None))


@dataclass(frozen=True)
class Outcome:
    values: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if values.size != len(self.labels):
            raise InvalidParameter("outcome values and labels differ in length")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", tuple(self.labels))

    def __getitem__(self, label: str) -> float:
        return float(self.values[self.labels.index(label)])


@dataclass(frozen=True, eq=False)
class Readout:
    """Outcome distribution ``mean + factor @ z`` of a joint measurement."""

    labels: tuple[str, ...]
    mean: np.ndarray
    factor: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        factor = np.atleast_2d(np.array(self.factor, dtype=float))
        if factor.shape[0] != mean.size or len(self.labels) != mean.size:
            raise InvalidParameter("readout labels, mean and factor are inconsistent")
        mean.setflags(write=False)
        factor.setflags(write=False)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "factor", factor)

    @property
    def cov(self) -> np.ndarray:
        return self.factor @ self.factor.T

    @property
    def n_normals(self) -> int:
        return self.factor.shape[1]

    def linear(self, E, labels: Sequence[str], offset=None) -> "Readout":
        """Readout of the linear estimator ``E @ outcome + offset`` on the same shots."""
        E = np.atleast_2d(np.asarray(E, dtype=float))
        off = np.zeros(E.shape[0]) if offset is None else np.asarray(offset, dtype=float)
        return Readout(tuple(labels), E @ self.mean + off, E @ self.factor)

    def draws(self, rng: RngStream, start: int, n: int, backend=None) -> np.ndarray:
        z = rng.normals(start, n, self.n_normals, backend=backend)
        return z @ self.factor.T + self.mean

    def sample(self, rng: RngStream, shot: int = 0) -> Outcome:
        return Outcome(self.draws(rng, shot, 1)[0], self.labels)


def readout(
    s: GaussianState,
    homodyne: Iterable[tuple[int, str]] = (),
    heterodyne: Iterable[int] = (),
) -> Readout:
    """Joint readout of homodyne and heterodyne detections on distinct modes."""
    homodyne = list(homodyne)
    heterodyne = list(heterodyne)
    modes = [m for m, _ in homodyne] + heterodyne
    _check_modes(s.n_modes, modes)
    idx, labels, noise = [], [], []
    for m, q in homodyne:
        idx.append(2 * m + _quad_index(q))
        labels.append(f"{q}{m}")
        noise.append(0.0)
    for m in heterodyne:
        idx += [2 * m, 2 * m + 1]
        labels += [f"x{m}", f"p{m}"]
        noise += [VACUUM_VARIANCE, VACUUM_VARIANCE]
    if not idx:
        raise InvalidParameter("readout needs at least one detection")
    idx = np.array(idx)
    cov = s.cov[np.ix_(idx, idx)] + np.diag(noise)
    return Readout(tuple(labels), s.mean[idx], sqrt_factor(cov))


def homodyne(s: GaussianState, mode: int, quadrature: str) -> Readout:
    return readout(s, homodyne=[(mode, quadrature)])


def heterodyne(s: GaussianState, mode: int) -> Readout:
    return readout(s, heterodyne=[mode])


def heterodyne_via_beamsplitter(s: GaussianState, mode: int) -> Readout:
    """Heterodyne built explicitly: split with a vacuum port, homodyne x and p, rescale.

    Same outcome distribution as :func:`heterodyne`; kept as a cross-check.
    """
    _check_modes(s.n_modes, [mode])
    n = s.n_modes + 1
    anc = n - 1
    split = embed(beamsplitter_transform(np.pi / 4), [mode, anc], n)
    out = apply(split, tensor(s, vacuum_state(1)))
    r = readout(out, homodyne=[(mode, "x"), (anc, "p")])
    return r.linear(np.sqrt(2.0) * np.eye(2), (f"x{mode}", f"p{mode}"))


def condition_on_homodyne(
    s: GaussianState, mode: int, quadrature: str, value: float
) -> GaussianState | None:
    """State of the remaining modes after a homodyne result ``value``."""
    _check_modes(s.n_modes, [mode])
    if s.n_modes == 1:
        return None
    k = 2 * mode + _quad_index(quadrature)
    rest = np.array([i for i in range(2 * s.n_modes) if i // 2 != mode])
    c = s.cov[rest, k]
    var = s.cov[k, k]
    mean = s.mean[rest] + c * (value - s.mean[k]) / var
    cov = s.cov[np.ix_(rest, rest)] - np.outer(c, c) / var
    return GaussianState(mean, 0.5 * (cov + cov.T))


def homodyne_sample(
    s: GaussianState, mode: int, quadrature: str, rng: RngStream, shot: int = 0
) -> tuple[Outcome, GaussianState | None]:
    outcome = homodyne(s, mode, quadrature).sample(rng, shot)
    post = condition_on_homodyne(s, mode, quadrature, outcome.values[0])
    return outcome, post


def heterodyne_sample(s: GaussianState, mode: int, rng: RngStream, shot: int = 0) -> Outcome:
    return heterodyne(s, mode).sample(rng, shot)


@dataclass(frozen=True, eq=False)
class BatchStats:
    labels: tuple[str, ...]
    shots: int
    mean: np.ndarray
    cov: np.ndarray

    @property
    def var(self) -> np.ndarray:
        return np.diag(self.cov).copy()

    @property
    def stderr_mean(self) -> np.ndarray:
        return np.sqrt(self.var / self.shots)

    @property
    def stderr_var(self) -> np.ndarray:
        return self.var * np.sqrt(2.0 / (self.shots - 1))

    def index(self, label: str) -> int:
        return self.labels.index(label)


def merge_moments(a, b):
    """Exact pairwise combination of ``(count, mean, scatter)`` triples."""
    na, ma, sa = a
    nb, mb, sb = b
    n = na + nb
    delta = mb - ma
    mean = ma + delta * (nb / n)
    scatter = sa + sb + np.outer(delta, delta) * (na * nb / n)
    return n, mean, scatter


def batch(
    sampler: Readout,
    shots: int,
    rng: RngStream,
    threads: int = 1,
    backend=None,
) -> BatchStats:
    """Streaming mean/covariance over ``shots`` draws of ``sampler``.

    Work is cut into fixed chunks of ``CHUNK_SHOTS`` shots whose moments are
    merged in chunk order, so the result does not depend on ``threads``.
    """
    if not isinstance(shots, (int, np.integer)) or shots < 2:
        raise InvalidParameter(f"need at least 2 shots; got {shots!r}")
    if threads < 1:
        raise InvalidParameter(f"threads must be >= 1; got {threads}")
    starts = range(0, int(shots), CHUNK_SHOTS)

    def run(start):
        n = min(CHUNK_SHOTS, shots - start)
        mean, scatter = rng.affine_moments(start, n, sampler.mean, sampler.factor, backend)
        return n, mean, scatter

    if threads == 1:
        parts = list(map(run, starts))
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, starts))
    total = parts[0]
    for part in parts[1:]:
        total = merge_moments(total, part)
    n, mean, scatter = total
    cov = scatter / (n - 1)
    return BatchStats(sampler.labels, int(n), mean, 0.5 * (cov + cov.T))
