"""Multimode Gaussian states in the quadrature picture.

Conventions (hbar = 1):

* ``x = (a + a^dagger) / sqrt(2)``, ``p = (a - a^dagger) / (i sqrt(2))``
* vacuum quadrature variance is 1/2
* vectors and matrices are ordered ``(x_0, p_0, x_1, p_1, ...)``
* mode indices are zero-based
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .errors import InvalidModeError, InvalidParameter, InvalidState

SYMMETRY_TOL = 1e-10
PHYSICALITY_TOL = 1e-9
VACUUM_VARIANCE = 0.5


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form with ``[[0, 1], [-1, 0]]`` blocks."""
    if n_modes < 1:
        raise InvalidParameter(f"invalid mode count: {n_modes}")
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class SymplecticForm:
    n_modes: int

    @property
    def matrix(self) -> np.ndarray:
        return symplectic_form(self.n_modes)


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Mean vector and covariance matrix of ``n_modes`` bosonic modes.

    Construction checks shapes and symmetry only. Use :func:`is_physical`
    to test the uncertainty principle, since unphysical covariances are
    occasionally useful as counterexamples.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = _frozen(self.mean).reshape(-1)
        cov = _frozen(self.cov)
        if mean.size == 0 or mean.size % 2:
            raise InvalidState(f"mean must have even, nonzero length; got {mean.size}")
        if cov.shape != (mean.size, mean.size):
            raise InvalidState(
                f"cov shape {cov.shape} inconsistent with mean length {mean.size}"
            )
        if not np.all(np.isfinite(cov)) or not np.all(np.isfinite(mean)):
            raise InvalidState("mean and cov must be finite")
        if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL:
            raise InvalidState("covariance matrix is not symmetric")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    def mode_mean(self, mode: int) -> np.ndarray:
        _check_modes(self.n_modes, [mode])
        return self.mean[2 * mode : 2 * mode + 2]

    def mode_cov(self, mode: int) -> np.ndarray:
        _check_modes(self.n_modes, [mode])
        return self.cov[2 * mode : 2 * mode + 2, 2 * mode : 2 * mode + 2]

    def allclose(self, other: "GaussianState", atol: float = 1e-12) -> bool:
        return (
            self.n_modes == other.n_modes
            and np.allclose(self.mean, other.mean, rtol=0, atol=atol)
            and np.allclose(self.cov, other.cov, rtol=0, atol=atol)
        )

    def __repr__(self):
        return f"GaussianState(n_modes={self.n_modes}, mean={self.mean.tolist()})"


def _check_modes(n_modes: int, modes: Iterable[int]) -> list[int]:
    modes = list(modes)
    for m in modes:
        if not isinstance(m, (int, np.integer)) or not 0 <= m < n_modes:
            raise InvalidModeError(f"mode index {m!r} out of range for {n_modes} modes")
    if len(set(modes)) != len(modes):
        raise InvalidModeError(f"duplicate mode indices in {modes}")
    return [int(m) for m in modes]


def quadrature_indices(modes: Iterable[int]) -> np.ndarray:
    return np.array([2 * m + q for m in modes for q in (0, 1)], dtype=int)


def vacuum_state(n_modes: int = 1) -> GaussianState:
    if not isinstance(n_modes, (int, np.integer)) or n_modes < 1:
        raise InvalidParameter(f"invalid mode count: {n_modes!r}")
    return GaussianState(np.zeros(2 * n_modes), VACUUM_VARIANCE * np.eye(2 * n_modes))


def coherent_state(x: float, p: float) -> GaussianState:
    """Coherent state with amplitude ``alpha = (x + i p) / sqrt(2)``."""
    return GaussianState(np.array([x, p], dtype=float), VACUUM_VARIANCE * np.eye(2))


def thermal_state(nbar: float) -> GaussianState:
    if nbar < 0:
        raise InvalidParameter(f"mean photon number must be nonnegative; got {nbar}")
    return GaussianState(np.zeros(2), (nbar + 0.5) * np.eye(2))


def squeezed_state(r: float, x: float = 0.0, p: float = 0.0) -> GaussianState:
    """Displaced squeezed vacuum; ``r > 0`` squeezes ``x``."""
    return GaussianState(
        np.array([x, p], dtype=float),
        0.5 * np.diag([np.exp(-2 * r), np.exp(2 * r)]),
    )


def two_mode_squeezed_state(r: float) -> GaussianState:
    """Two-mode squeezed vacuum, a normalizable stand-in for the EPR state.

    ``Var(x_0 - x_1) = Var(p_0 + p_1) = exp(-2 r)``.
    """
    if not np.isfinite(r) or r < 0:
        raise InvalidParameter(f"squeezing must be finite and nonnegative; got {r}")
    c = 0.5 * np.cosh(2 * r)
    s = 0.5 * np.sinh(2 * r)
    cov = np.array(
        [
            [c, 0, s, 0],
            [0, c, 0, -s],
            [s, 0, c, 0],
            [0, -s, 0, c],
        ]
    )
    return GaussianState(np.zeros(4), cov)


def tensor(*states: GaussianState) -> GaussianState:
    if not states:
        raise InvalidParameter("tensor needs at least one state")
    mean = np.concatenate([s.mean for s in states])
    cov = np.zeros((mean.size, mean.size))
    k = 0
    for s in states:
        d = s.mean.size
        cov[k : k + d, k : k + d] = s.cov
        k += d
    return GaussianState(mean, cov)


def partial_trace(s: GaussianState, keep: Iterable[int]) -> GaussianState:
    """Reduced state on the modes in ``keep`` (in the given order)."""
    keep = _check_modes(s.n_modes, keep)
    if not keep:
        raise InvalidModeError("keep must name at least one mode")
    idx = quadrature_indices(keep)
    return GaussianState(s.mean[idx], s.cov[np.ix_(idx, idx)])


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    """Symplectic spectrum of ``cov``, ascending, one value per mode."""
    cov = np.asarray(cov, dtype=float)
    n = cov.shape[0] // 2
    ev = np.abs(np.linalg.eigvals(1j * symplectic_form(n) @ cov))
    # eigenvalues come in +/- pairs; keep one of each
    return np.sort(ev)[::2]


class Physicality(NamedTuple):
    ok: bool
    symmetry_residual: float
    min_symplectic_eigenvalue: float
    message: str

    def __bool__(self):
        return self.ok


def is_physical(s: GaussianState, tol: float = PHYSICALITY_TOL) -> Physicality:
    """Check symmetry and the uncertainty principle ``V + (i/2) Omega >= 0``."""
    cov = s.cov
    asym = float(np.max(np.abs(cov - cov.T)))
    nu_min = float(symplectic_eigenvalues(0.5 * (cov + cov.T))[0])
    if asym > SYMMETRY_TOL:
        return Physicality(False, asym, nu_min, "covariance matrix is not symmetric")
    if nu_min < VACUUM_VARIANCE - tol:
        return Physicality(
            False,
            asym,
            nu_min,
            f"symplectic eigenvalue {nu_min:.6g} below vacuum level {VACUUM_VARIANCE}",
        )
    return Physicality(True, asym, nu_min, "ok")
