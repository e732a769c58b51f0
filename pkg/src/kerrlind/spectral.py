"""Liouvillian eigenanalysis: spectrum, steady state and the lifetime T_X."""
from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import AllZeroSpectrum, EigensolveFailure, NullspaceNotFound
from .lindblad import DEFAULT_MAX_DIM, Liouvillian, LindbladModel, assemble_liouvillian, parity_sectors, unvec

log = logging.getLogger(__name__)

# Relative to max |Re lambda|. Numerical zeros of the dense solve sit near
# 1e-14; deep-cat physical gaps reach ~1e-7, so the cut lives between them.
DEFAULT_ZERO_TOL = 1e-10
DEFAULT_CONV_TOL = 0.01
DIM_STEP = 10


@dataclass(frozen=True)
class SpectralResult:
    eigenvalues: np.ndarray
    t_x: float
    steady_state: np.ndarray | None
    dim_used: int
    converged: bool
    zero_cluster_size: int
    alpha_sq: float | None = None
    order: str | None = None
    history: tuple[tuple[int, float], ...] = field(default=())

    def smallest_re_parts(self, count: int = 10) -> list[float]:
        return sorted(np.abs(self.eigenvalues.real))[:count]

    def to_dict(self) -> dict:
        return {
            "alpha_sq": None if self.alpha_sq is None else float(self.alpha_sq),
            "order": self.order,
            "dim_used": int(self.dim_used),
            "converged": bool(self.converged),
            "t_x_us": float(self.t_x * 1e6),
            "n_zero": int(self.zero_cluster_size),
            "smallest_re_parts": [float(x) for x in self.smallest_re_parts(10)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _eigvals(mat: np.ndarray) -> np.ndarray:
    try:
        return sla.eigvals(mat, overwrite_a=True, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigensolveFailure(f"dense eigensolve failed on {mat.shape[0]}x{mat.shape[0]} matrix: {exc}") from exc


def eigenspectrum(L: Liouvillian) -> np.ndarray:
    """All ``N^2`` eigenvalues (1/s) of the dense Liouvillian.

    When every channel has definite photon-number parity the generator
    is block diagonal in the (i + j) parity of ``rho[i, j]``; the two blocks
    are diagonalized separately, which returns the same full spectrum.
    """
    if L.parity_symmetric:
        blocks = [L.matrix[np.ix_(idx, idx)] for idx in parity_sectors(L.dim)]
        return np.concatenate([_eigvals(b) for b in blocks])
    return _eigvals(L.matrix.copy())


def extract_tx(eigs: np.ndarray, zero_tol: float = DEFAULT_ZERO_TOL) -> tuple[float, int]:
    """Return ``(T_X, zero_cluster_size)``.

    T_X is the inverse of the smallest |Re lambda| outside the zero cluster
    ``|Re lambda| <= zero_tol * max |Re lambda|``.
    """
    eigs = np.asarray(eigs)
    if eigs.size == 0:
        raise ValueError("empty spectrum")
    re = np.abs(eigs.real)
    top = re.max()
    if top == 0:
        raise AllZeroSpectrum("every eigenvalue has zero real part")
    zero = re <= zero_tol * top
    if zero.all():
        raise AllZeroSpectrum("every eigenvalue lies inside the zero cluster")
    if log.isEnabledFor(logging.DEBUG):
        log.debug("smallest |Re lambda| (1/s): %s", np.sort(re)[:10])
    return 1.0 / re[~zero].min(), int(zero.sum())


def steady_state(L: Liouvillian) -> np.ndarray:
    """Trace-one null vector of L, Hermitized."""
    n = L.dim
    tol = 1e-8 * L.norm
    if L.parity_symmetric:
        idx = parity_sectors(n)[0]
    else:
        idx = np.arange(n * n)
    mat = L.matrix[np.ix_(idx, idx)].copy()
    diag_pos = np.flatnonzero(idx % (n + 1) == 0)  # vec positions of rho[k, k]
    trace_row = np.zeros(len(idx), dtype=complex)
    trace_row[diag_pos] = 1.0
    # swap the most redundant equation for the trace constraint
    mat[0, :] = trace_row
    rhs = np.zeros(len(idx), dtype=complex)
    rhs[0] = 1.0
    try:
        sol = sla.solve(mat, rhs)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NullspaceNotFound(f"steady-state solve failed: {exc}") from exc
    full = np.zeros(n * n, dtype=complex)
    full[idx] = sol
    rho = unvec(full, n)
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if not np.isfinite(tr) or tr == 0:
        raise NullspaceNotFound("null vector has zero trace")
    rho = rho / tr
    resid = np.linalg.norm(L.matrix @ full / tr)
    if not resid < tol:
        raise NullspaceNotFound(f"steady-state residual {resid:.3g} exceeds {tol:.3g}")
    low = np.linalg.eigvalsh(rho).min()
    if low < -1e-8:
        warnings.warn(f"steady state has negative eigenvalue {low:.3g}", stacklevel=2)
    return rho


def analyze(L: Liouvillian, zero_tol: float = DEFAULT_ZERO_TOL, with_steady_state: bool = True) -> SpectralResult:
    eigs = eigenspectrum(L)
    tol = 1e-8 * L.norm
    if eigs.real.max() > tol:
        raise EigensolveFailure(f"eigenvalue with Re = {eigs.real.max():.3g} > {tol:.3g}: generator is not dissipative")
    t_x, nz = extract_tx(eigs, zero_tol)
    rho = steady_state(L) if with_steady_state else None
    return SpectralResult(eigs, t_x, rho, L.dim, True, nz)


def minimum_dim(alpha_sq: float | None) -> int:
    if not alpha_sq:
        return 10
    return int(math.ceil(alpha_sq + 6.0 * math.sqrt(alpha_sq) + 10.0))


def converged_tx(
    m: LindbladModel,
    n_start: int | None = None,
    tol: float = DEFAULT_CONV_TOL,
    max_dim: int = DEFAULT_MAX_DIM,
    zero_tol: float = DEFAULT_ZERO_TOL,
    with_steady_state: bool = False,
) -> SpectralResult:
    """Grow the truncation by 10 until T_X moves by less than ``tol`` (relative).

    Returns the last result; ``converged`` is False when the budget
    ``max_dim`` is reached first.
    """
    floor = minimum_dim(m.alpha_sq)
    n = max(floor, n_start or 0)
    if n > max_dim:
        warnings.warn(f"required truncation {n} exceeds budget {max_dim}; result is unconverged", stacklevel=2)
        n = max_dim
    history: list[tuple[int, float]] = []
    prev: SpectralResult | None = None
    while True:
        res = analyze(assemble_liouvillian(m, n, max_dim), zero_tol, with_steady_state)
        history.append((n, res.t_x))
        log.info("order %s alpha_sq %s N=%d T_X=%.6g s", m.order, m.alpha_sq, n, res.t_x)
        done = prev is not None and abs(res.t_x - prev.t_x) < tol * res.t_x
        if done or n + DIM_STEP > max_dim:
            return SpectralResult(
                res.eigenvalues, res.t_x, res.steady_state, n, bool(done), res.zero_cluster_size,
                m.alpha_sq, m.order, tuple(history),
            )
        prev = res
        n += DIM_STEP
