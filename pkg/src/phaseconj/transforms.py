"""Linear canonical (Bogoliubov) transformations ``b = M a + L a^dagger``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidModeError, InvalidParameter, NonCanonicalTransform
from .states import GaussianState, symplectic_form

CANONICAL_TOL = 1e-10


class CanonicalCheck(NamedTuple):
    ok: bool
    commutator_residual: float  # ||M M^dagger - L L^dagger - I||_F
    cross_residual: float  # ||M L^T - L M^T||_F

    def __bool__(self):
        return self.ok


def _as_square(a, name) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonCanonicalTransform(f"{name} must be a square matrix; got shape {a.shape}")
    return a


def is_canonical(M, L, tol: float = CANONICAL_TOL) -> CanonicalCheck:
    M = _as_square(M, "M")
    L = _as_square(L, "L")
    if M.shape != L.shape:
        raise NonCanonicalTransform(f"shape mismatch: M {M.shape} vs L {L.shape}")
    n = M.shape[0]
    comm = float(np.linalg.norm(M @ M.conj().T - L @ L.conj().T - np.eye(n)))
    cross = float(np.linalg.norm(M @ L.T - L @ M.T))
    return CanonicalCheck(bool(comm <= tol and cross <= tol), comm, cross)


@dataclass(frozen=True, eq=False)
class BogoliubovTransform:
    """Output modes ``b_i = sum_j M_ij a_j + L_ij a_j^dagger``."""

    M: np.ndarray
    L: np.ndarray

    def __post_init__(self):
        M = _as_square(self.M, "M").copy()
        L = _as_square(self.L, "L").copy()
        if M.shape != L.shape:
            raise NonCanonicalTransform(f"shape mismatch: M {M.shape} vs L {L.shape}")
        M.setflags(write=False)
        L.setflags(write=False)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "L", L)

    @property
    def n_modes(self) -> int:
        return self.M.shape[0]

    def check(self, tol: float = CANONICAL_TOL) -> CanonicalCheck:
        return is_canonical(self.M, self.L, tol)

    def then(self, other: "BogoliubovTransform") -> "BogoliubovTransform":
        """Apply ``self`` first, then ``other``."""
        return compose(other, self)


def compose(second: BogoliubovTransform, first: BogoliubovTransform) -> BogoliubovTransform:
    """Transform equivalent to applying ``first`` and then ``second``."""
    if second.n_modes != first.n_modes:
        raise InvalidParameter("cannot compose transforms on different mode counts")
    M2, L2, M1, L1 = second.M, second.L, first.M, first.L
    return BogoliubovTransform(M2 @ M1 + L2 @ L1.conj(), M2 @ L1 + L2 @ M1.conj())


def embed(t: BogoliubovTransform, modes, n_modes: int) -> BogoliubovTransform:
    """Act with ``t`` on ``modes`` of an ``n_modes`` system, identity elsewhere."""
    modes = list(modes)
    if len(modes) != t.n_modes or len(set(modes)) != len(modes):
        raise InvalidModeError(f"need {t.n_modes} distinct modes; got {modes}")
    if any(not 0 <= m < n_modes for m in modes):
        raise InvalidModeError(f"modes {modes} out of range for {n_modes} modes")
    M = np.eye(n_modes, dtype=complex)
    L = np.zeros((n_modes, n_modes), dtype=complex)
    idx = np.ix_(modes, modes)
    M[idx] = t.M
    L[idx] = t.L
    return BogoliubovTransform(M, L)


def identity_transform(n_modes: int) -> BogoliubovTransform:
    return BogoliubovTransform(np.eye(n_modes), np.zeros((n_modes, n_modes)))


def phase_conjugator_transform() -> BogoliubovTransform:
    """Optimal universal phase conjugator on (input, ancilla).

    ``b_0 = a_0^dagger + sqrt(2) a_1`` and ``b_1 = sqrt(2) a_0 + a_1^dagger``:
    a phase-insensitive phase-conjugating amplifier.
    """
    r2 = np.sqrt(2.0)
    return BogoliubovTransform(np.array([[0.0, r2], [r2, 0.0]]), np.eye(2))


def beamsplitter_transform(theta: float) -> BogoliubovTransform:
    """Real beam splitter ``M = [[cos, sin], [sin, -cos]]``.

    At ``theta = pi/4`` the outputs are ``(a_0 + a_1)/sqrt(2)`` and
    ``(a_0 - a_1)/sqrt(2)``.
    """
    c, s = np.cos(theta), np.sin(theta)
    return BogoliubovTransform(np.array([[c, s], [s, -c]]), np.zeros((2, 2)))


def phase_rotation(phi: float) -> BogoliubovTransform:
    """Single-mode ``b = exp(i phi) a``."""
    return BogoliubovTransform(np.array([[np.exp(1j * phi)]]), np.zeros((1, 1)))


def squeezer(r: float, phi: float = 0.0) -> BogoliubovTransform:
    """Single-mode ``b = cosh(r) a - exp(i phi) sinh(r) a^dagger``; squeezes x for phi=0."""
    return BogoliubovTransform(
        np.array([[np.cosh(r)]]), np.array([[-np.exp(1j * phi) * np.sinh(r)]])
    )


def two_mode_squeezer(r: float) -> BogoliubovTransform:
    """``b_0 = cosh(r) a_0 + sinh(r) a_1^dagger`` and symmetrically for ``b_1``."""
    c, s = np.cosh(r), np.sinh(r)
    return BogoliubovTransform(c * np.eye(2), s * np.array([[0.0, 1.0], [1.0, 0.0]]))


def to_quadrature_map(t: BogoliubovTransform, tol: float = CANONICAL_TOL) -> np.ndarray:
    """Real symplectic matrix ``S`` acting on ``(x_0, p_0, x_1, p_1, ...)``.

    Substituting ``a = (x + i p)/sqrt(2)`` into ``b = M a + L a^dagger`` gives
    ``x_b = Re(M + L) x + Im(L - M) p`` and ``p_b = Im(M + L) x + Re(M - L) p``.

    The canonicality tolerance is scaled by ``max(1, |M|^2 + |L|^2)`` here, as
    strongly squeezing transforms cannot meet an absolute tolerance in
    double precision.
    """
    scale = max(1.0, float(np.linalg.norm(t.M) ** 2 + np.linalg.norm(t.L) ** 2))
    check = t.check(tol * scale)
    if not check:
        raise NonCanonicalTransform(
            "transform is not canonical "
            f"(commutator residual {check.commutator_residual:.3g}, "
            f"cross residual {check.cross_residual:.3g})"
        )
    M, L = t.M, t.L
    n = t.n_modes
    S = np.empty((2 * n, 2 * n))
    S[0::2, 0::2] = (M + L).real
    S[0::2, 1::2] = (L - M).imag
    S[1::2, 0::2] = (M + L).imag
    S[1::2, 1::2] = (M - L).real
    return S


def is_symplectic(S: np.ndarray, tol: float = CANONICAL_TOL) -> bool:
    n = S.shape[0] // 2
    omega = symplectic_form(n)
    return bool(np.linalg.norm(S @ omega @ S.T - omega) <= tol)


def apply(t: BogoliubovTransform, s: GaussianState) -> GaussianState:
    if t.n_modes != s.n_modes:
        raise InvalidModeError(
            f"transform acts on {t.n_modes} modes but state has {s.n_modes}"
        )
    S = to_quadrature_map(t)
    cov = S @ s.cov @ S.T
    return GaussianState(S @ s.mean, 0.5 * (cov + cov.T))
