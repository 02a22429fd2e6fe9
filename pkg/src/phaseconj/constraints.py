"""Coefficient constraints for a universal phase conjugator on (input, ancilla).

A two-mode transform ``b_i = M_ij a_j + L_ij a_j^dagger`` is an imperfect phase
conjugator of mode 0 when

* ``<b_0> = <a_0^dagger>`` for a vacuum ancilla: ``M_00 = 0``, ``L_00 = 1``
* the added noise is phase-insensitive: ``M_01 L_01 = 0``
* ``[b_0, b_0^dagger] = 1``, ``[b_1, b_1^dagger] = 1`` and ``[b_0, b_1] = 0``.

Row 0 (the conjugator output) is gauge-fixed real and nonnegative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter
from .rng import RngStream

CONSTRAINT_TOL = 1e-10
CONSTRAINT_NAMES = (
    "mean_preservation",
    "universality",
    "comm_b1",
    "comm_b2",
    "comm_cross",
)

FAMILY_PARAMETERIZATION = (
    "L22 = cosh(u), M22 = sinh(u) exp(i phi), M21 = sqrt(2) L22, L21 = sqrt(2) M22; "
    "two real parameters (u, phi) after fixing the ancilla output phase so L22 >= 0; "
    "the family also satisfies [b1, b2^dagger] = 0, so every member is fully canonical"
)


@dataclass(frozen=True)
class ConstraintReport:
    residuals: dict[str, float]
    tolerance: float = CONSTRAINT_TOL
    satisfied: dict[str, bool] = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self,
            "satisfied",
            {k: bool(v <= self.tolerance) for k, v in self.residuals.items()},
        )

    @property
    def all_satisfied(self) -> bool:
        return all(self.satisfied.values())

    def violated(self) -> list[str]:
        return [k for k, ok in self.satisfied.items() if not ok]


def check_constraints(M, L, tol: float = CONSTRAINT_TOL) -> ConstraintReport:
    M = np.asarray(M, dtype=complex)
    L = np.asarray(L, dtype=complex)
    if M.shape != (2, 2) or L.shape != (2, 2):
        raise InvalidParameter("check_constraints needs 2x2 coefficient matrices")
    row_norm = np.abs(M) ** 2 - np.abs(L) ** 2
    residuals = {
        "mean_preservation": float(max(abs(M[0, 0]), abs(L[0, 0] - 1))),
        "universality": float(abs(M[0, 1] * L[0, 1])),
        "comm_b1": float(abs(row_norm[0].sum() - 1)),
        "comm_b2": float(abs(row_norm[1].sum() - 1)),
        "comm_cross": float(abs(M[0] @ L[1] - L[0] @ M[1])),
    }
    return ConstraintReport(residuals, tol)


def row1_residuals(m12, l12):
    """Universality and ``[b_1, b_1^dagger]`` residuals once ``M_11 = 0, L_11 = 1``.

    Vectorized over array inputs.
    """
    m12 = np.asarray(m12, dtype=float)
    l12 = np.asarray(l12, dtype=float)
    return np.abs(m12 * l12), np.abs(m12**2 - l12**2 - 2)


def row1_branch_roots(branch: str) -> list[float]:
    """Real nonnegative roots left on one branch of ``M12 L12 = 0``.

    On ``"L12=0"`` the commutator gives ``M12^2 = 2``; on ``"M12=0"`` it gives
    ``-L12^2 = 2``.
    """
    if branch == "L12=0":
        roots = np.roots([1.0, 0.0, -2.0])
    elif branch == "M12=0":
        roots = np.roots([-1.0, 0.0, -2.0])
    else:
        raise InvalidParameter(f"unknown branch {branch!r}")
    real = roots[np.abs(roots.imag) < 1e-12].real
    return sorted(float(r) for r in real if r >= 0)


def solve_row1() -> tuple[float, float]:
    """Solve ``M12^2 - L12^2 = 2`` and ``M12 L12 = 0`` with ``M12, L12 >= 0``.

    Returns ``(M12, L12) = (sqrt(2), 0)``; the ``M12 = 0`` branch has no real
    solution.
    """
    solutions = [(m, 0.0) for m in row1_branch_roots("L12=0")]
    solutions += [(0.0, l) for l in row1_branch_roots("M12=0")]
    if len(solutions) != 1:
        raise AssertionError(f"expected a unique row-1 solution, found {solutions}")
    m12, l12 = solutions[0]
    # np.roots is accurate to a few ulp; polish with one Newton step on M12^2 = 2
    m12 = m12 - (m12 * m12 - 2.0) / (2.0 * m12)
    return float(m12), float(l12)


def grid_scan_row1(step: float = 1e-3, extent: float = 3.0, tol: float = 1e-3) -> np.ndarray:
    """Grid points ``(M12, L12)`` in ``[0, extent]^2`` with both residuals below ``tol``."""
    n = int(round(extent / step)) + 1
    axis = np.round(np.arange(n) * step, 12)
    m12 = axis[:, None]
    l12 = axis[None, :]
    univ, comm = row1_residuals(m12, l12)
    i, j = np.nonzero((univ < tol) & (comm < tol))
    return np.column_stack([axis[i], axis[j]])


def conjugator_row1() -> tuple[np.ndarray, np.ndarray]:
    m12, l12 = solve_row1()
    return np.array([0.0, m12]), np.array([1.0, l12])


def ancilla_row_family(u: float, phi: float) -> tuple[complex, complex, complex, complex]:
    """Ancilla row ``(M21, M22, L21, L22)`` compatible with the conjugator row.

    ``u = 0`` gives the symmetric solution ``(sqrt(2), 0, 0, 1)`` in which the
    ancilla transforms just like the input.
    """
    r2 = np.sqrt(2.0)
    l22 = complex(np.cosh(u))
    m22 = complex(np.sinh(u) * np.exp(1j * phi))
    return r2 * l22, m22, r2 * m22, l22


def family_matrices(u: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    m_row1, l_row1 = conjugator_row1()
    m21, m22, l21, l22 = ancilla_row_family(u, phi)
    M = np.array([m_row1, [m21, m22]], dtype=complex)
    L = np.array([l_row1, [l21, l22]], dtype=complex)
    return M, L


# -- numerical uniqueness evidence ------------------------------------------

# Unknowns: m11 m12 l11 l12 (real, >= 0), then Re/Im of M21 M22 L21 L22.
_N_VARS = 12
_N_RES = 7


def _residual_vector(v: np.ndarray) -> np.ndarray:
    m11, m12, l11, l12 = v[:, 0], v[:, 1], v[:, 2], v[:, 3]
    aR, aI, bR, bI, cR, cI, dR, dI = (v[:, k] for k in range(4, 12))
    return np.stack(
        [
            m11,
            l11 - 1,
            m12 * l12,
            m11**2 + m12**2 - l11**2 - l12**2 - 1,
            aR**2 + aI**2 + bR**2 + bI**2 - cR**2 - cI**2 - dR**2 - dI**2 - 1,
            m11 * cR + m12 * dR - l11 * aR - l12 * bR,
            m11 * cI + m12 * dI - l11 * aI - l12 * bI,
        ],
        axis=1,
    )


def _jacobian(v: np.ndarray) -> np.ndarray:
    n = v.shape[0]
    J = np.zeros((n, _N_RES, _N_VARS))
    m11, m12, l11, l12 = v[:, 0], v[:, 1], v[:, 2], v[:, 3]
    aR, aI, bR, bI, cR, cI, dR, dI = (v[:, k] for k in range(4, 12))
    J[:, 0, 0] = 1
    J[:, 1, 2] = 1
    J[:, 2, 1] = l12
    J[:, 2, 3] = m12
    J[:, 3, 0:4] = 2 * np.stack([m11, m12, -l11, -l12], axis=1)
    J[:, 4, 4:12] = 2 * np.stack([aR, aI, bR, bI, -cR, -cI, -dR, -dI], axis=1)
    J[:, 5, 0:4] = np.stack([cR, dR, -aR, -bR], axis=1)
    J[:, 5, [4, 6, 8, 10]] = np.stack([-l11, -l12, m11, m12], axis=1)
    J[:, 6, 0:4] = np.stack([cI, dI, -aI, -bI], axis=1)
    J[:, 6, [5, 7, 9, 11]] = np.stack([-l11, -l12, m11, m12], axis=1)
    return J


def _project(
    v: np.ndarray, iterations: int, damping: float = 1e-9, converged: float = 1e-14
) -> np.ndarray:
    """Damped minimum-norm Gauss-Newton steps onto the constraint set, row 0 kept >= 0.

    Rows leave the active set once converged or once they diverge; diverged
    rows keep their last finite iterate and end up counted as infeasible.
    """
    v = v.copy()
    eye = damping * np.eye(_N_RES)
    active = np.arange(v.shape[0])
    with np.errstate(all="ignore"):
        for _ in range(iterations):
            if active.size == 0:
                break
            w = v[active]
            r = _residual_vector(w)
            done = np.max(np.abs(r), axis=1) < converged
            w, r, active = w[~done], r[~done], active[~done]
            J = _jacobian(w)
            Jt = J.transpose(0, 2, 1)
            y = np.linalg.solve(J @ Jt + eye, r[:, :, None])
            w = w - (Jt @ y)[:, :, 0]
            w[:, :4] = np.maximum(w[:, :4], 0.0)
            ok = np.all(np.isfinite(w), axis=1) & (np.max(np.abs(w), axis=1) < 1e8)
            v[active[ok]] = w[ok]
            active = active[ok]
    return v


@dataclass(frozen=True)
class UniquenessSummary:
    samples: int
    seed: int
    tolerance: float
    deviation_threshold: float
    feasible: int
    counterexamples: int
    max_abs_m12_deviation: float
    max_abs_l12: float
    parameterization: str = FAMILY_PARAMETERIZATION

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def random_search_uniqueness(
    samples: int,
    rng_seed: int,
    tol: float = 1e-6,
    deviation_threshold: float = 1e-5,
    iterations: int = 40,
    stream_id: int = 0x5EA6C4,
) -> UniquenessSummary:
    """Project random gauge-fixed coefficient sets onto the constraints.

    Every start that lands on the constraint set (all residuals below ``tol``)
    is checked for ``|M12 - sqrt(2)| <= deviation_threshold`` and
    ``|L12| <= deviation_threshold``; violations are counted as counterexamples.
    """
    if not isinstance(samples, (int, np.integer)) or samples < 1:
        raise InvalidParameter(f"samples must be a positive integer; got {samples!r}")
    z = RngStream(rng_seed, stream_id).normals(0, samples, _N_VARS)
    v = z.copy()
    v[:, :4] = 1.5 * np.abs(z[:, :4])
    v = _project(v, iterations)
    worst = np.max(np.abs(_residual_vector(v)), axis=1)
    feasible = worst < tol
    m12_dev = np.abs(v[feasible, 1] - np.sqrt(2.0))
    l12 = np.abs(v[feasible, 3])
    bad = (m12_dev > deviation_threshold) | (l12 > deviation_threshold)
    return UniquenessSummary(
        samples=int(samples),
        seed=int(rng_seed),
        tolerance=tol,
        deviation_threshold=deviation_threshold,
        feasible=int(feasible.sum()),
        counterexamples=int(bad.sum()),
        max_abs_m12_deviation=float(m12_dev.max()) if m12_dev.size else 0.0,
        max_abs_l12=float(l12.max()) if l12.size else 0.0,
    )
