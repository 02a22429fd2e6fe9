"""Single-mode Gaussian channels and the phase-conjugation noise bound.

A channel ``(X, Y)`` maps ``mean -> X mean`` and ``cov -> X cov X^T + Y``. It
is completely positive iff ``Y + (i/2)(Omega - X Omega X^T) >= 0``. For the
conjugation ``X = diag(1, -1)`` this reads ``Y >= I``: whatever realizes it
adds at least one unit of noise, twice the vacuum variance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidModeError, InvalidParameter, NonCanonicalTransform, UnphysicalChannel
from .states import (
    PHYSICALITY_TOL,
    SYMMETRY_TOL,
    VACUUM_VARIANCE,
    GaussianState,
    _check_modes,
    coherent_state,
    is_physical,
    partial_trace,
    squeezed_state,
    symplectic_form,
    tensor,
)
from .transforms import BogoliubovTransform, apply

CONJUGATION = np.diag([1.0, -1.0])
_OMEGA = symplectic_form(1)


def _cp_matrix(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return Y + 0.5j * (_OMEGA - X @ _OMEGA @ X.T)


@dataclass(frozen=True, eq=False)
class GaussianChannel:
    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        Y = np.array(self.Y, dtype=float)
        if X.shape != (2, 2) or Y.shape != (2, 2):
            raise InvalidParameter("single-mode channel needs 2x2 X and Y")
        if np.max(np.abs(Y - Y.T)) > SYMMETRY_TOL:
            raise InvalidParameter("Y must be symmetric")
        X.setflags(write=False)
        Y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    def cp_margin(self) -> float:
        """Smallest eigenvalue of the complete-positivity matrix."""
        return float(np.linalg.eigvalsh(_cp_matrix(self.X, self.Y)).min())

    def is_completely_positive(self, tol: float = PHYSICALITY_TOL) -> bool:
        return self.cp_margin() >= -tol

    def allclose(self, other: "GaussianChannel", atol: float = 1e-12) -> bool:
        return np.allclose(self.X, other.X, rtol=0, atol=atol) and np.allclose(
            self.Y, other.Y, rtol=0, atol=atol
        )

    def then(self, other: "GaussianChannel") -> "GaussianChannel":
        """Apply ``self`` and then ``other``."""
        return GaussianChannel(other.X @ self.X, other.X @ self.Y @ other.X.T + other.Y)


def identity_channel() -> GaussianChannel:
    return GaussianChannel(np.eye(2), np.zeros((2, 2)))


def conjugation_channel(sigma2: float) -> GaussianChannel:
    """Phase conjugation ``p -> -p`` with isotropic added noise ``sigma2``.

    Raises :class:`UnphysicalChannel` below the bound ``sigma2 >= 1``.
    """
    c = GaussianChannel(CONJUGATION, sigma2 * np.eye(2))
    if not c.is_completely_positive():
        raise UnphysicalChannel(
            f"conjugation noise sigma2={sigma2!r} is below the physical bound 1"
        )
    return c


def apply_channel_to_mode(c: GaussianChannel, s: GaussianState, mode: int) -> GaussianState:
    _check_modes(s.n_modes, [mode])
    d = 2 * s.n_modes
    X = np.eye(d)
    Y = np.zeros((d, d))
    sl = slice(2 * mode, 2 * mode + 2)
    X[sl, sl] = c.X
    Y[sl, sl] = c.Y
    cov = X @ s.cov @ X.T + Y
    return GaussianState(X @ s.mean, 0.5 * (cov + cov.T))


def apply_channel(c: GaussianChannel, s: GaussianState) -> GaussianState:
    if s.n_modes != 1:
        raise InvalidModeError(f"single-mode channel applied to {s.n_modes}-mode state")
    return apply_channel_to_mode(c, s, 0)


def channel_from_dilation(
    t: BogoliubovTransform,
    ancilla: GaussianState,
    output_mode: int = 0,
    tol: float = 1e-10,
) -> GaussianChannel:
    """Channel seen by input mode 0 of ``t`` with ``ancilla`` in mode 1.

    ``(X, Y)`` is read off three coherent probes and then checked against a
    squeezed probe; any mismatch means the map is not of the assumed form.
    """
    if t.n_modes != 2 or ancilla.n_modes != 1:
        raise InvalidModeError("dilation needs a two-mode transform and a one-mode ancilla")
    if output_mode not in (0, 1):
        raise InvalidModeError(f"output_mode must be 0 or 1; got {output_mode!r}")
    if not t.check():
        raise NonCanonicalTransform("dilation transform is not canonical")

    def run(probe):
        return partial_trace(apply(t, tensor(probe, ancilla)), [output_mode])

    zero = run(coherent_state(0.0, 0.0))
    if np.max(np.abs(zero.mean)) > tol:
        raise InvalidParameter("dilation displaces the vacuum; the channel is not mean-linear")
    col_x = run(coherent_state(1.0, 0.0)).mean - zero.mean
    col_p = run(coherent_state(0.0, 1.0)).mean - zero.mean
    X = np.column_stack([col_x, col_p])
    Y = zero.cov - X @ (VACUUM_VARIANCE * np.eye(2)) @ X.T
    Y = 0.5 * (Y + Y.T)
    channel = GaussianChannel(X, Y)

    probe = squeezed_state(0.7, 0.3, -1.1)
    want = apply_channel(channel, probe)
    got = run(probe)
    if not want.allclose(got, atol=tol):
        raise InvalidParameter("dilation is not reproduced by an (X, Y) channel")
    return channel


def measure_prepare_conjugation() -> GaussianChannel:
    """Heterodyne, flip the sign of the p readout, prepare that coherent state.

    Heterodyne gives outcomes with covariance ``V + I/2``; flipping p maps it
    through ``Z``; preparing a coherent state adds ``I/2``. Net
    ``Z V Z + I``.
    """
    heterodyne = GaussianChannel(np.eye(2), VACUUM_VARIANCE * np.eye(2))
    flip = GaussianChannel(CONJUGATION, np.zeros((2, 2)))
    prepare = GaussianChannel(np.eye(2), VACUUM_VARIANCE * np.eye(2))
    return heterodyne.then(flip).then(prepare)


def measure_prepare_copies(s: GaussianState, copies: int) -> GaussianState:
    """Joint state of ``copies`` conjugates prepared from one heterodyne result.

    Each copy has the single-mode output of :func:`measure_prepare_conjugation`;
    copies are classically correlated through the shared readout.
    """
    if s.n_modes != 1:
        raise InvalidModeError("measure-and-prepare acts on a single mode")
    if copies < 1:
        raise InvalidParameter(f"copies must be >= 1; got {copies}")
    readout_cov = CONJUGATION @ (s.cov + VACUUM_VARIANCE * np.eye(2)) @ CONJUGATION
    mean = np.tile(CONJUGATION @ s.mean, copies)
    cov = np.kron(np.ones((copies, copies)), readout_cov) + VACUUM_VARIANCE * np.eye(2 * copies)
    return GaussianState(mean, cov)


def fidelity_coherent(s: GaussianState, x: float, p: float) -> float:
    """Overlap ``<beta|rho|beta>`` of a one-mode Gaussian state with ``coherent(x, p)``.

    ``F = exp(-d^T (V + I/2)^-1 d / 2) / sqrt(det(V + I/2))`` with
    ``d = mean - (x, p)``.
    """
    if s.n_modes != 1:
        raise InvalidModeError("fidelity_coherent needs a single-mode state")
    if not is_physical(s):
        raise InvalidParameter("fidelity_coherent needs a physical state")
    A = s.cov + VACUUM_VARIANCE * np.eye(2)
    det = float(np.linalg.det(A))
    if det <= 0:
        raise InvalidParameter("V + I/2 is singular")
    d = s.mean - np.array([x, p], dtype=float)
    return float(np.exp(-0.5 * d @ np.linalg.solve(A, d)) / np.sqrt(det))


def min_cp_noise(X) -> float:
    """Smallest ``s`` such that ``(X, s I)`` is completely positive.

    ``Omega - X Omega X^T`` is antisymmetric, so ``-(i/2)`` times it is
    Hermitian and ``s`` is its largest eigenvalue (or zero).
    """
    X = np.asarray(X, dtype=float)
    if X.shape != (2, 2):
        raise InvalidParameter("min_cp_noise needs a 2x2 matrix")
    H = -0.5j * (_OMEGA - X @ _OMEGA @ X.T)
    return float(max(0.0, np.linalg.eigvalsh(H).max()))


def added_noise(c: GaussianChannel) -> np.ndarray:
    """Per-quadrature variance added on top of the transformed input."""
    return np.diag(c.Y).copy()
