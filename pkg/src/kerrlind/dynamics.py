"""Time-domain cross-check of the spectral lifetime.

Integrates ``d rho/dt = L rho`` from a coherent state, records the
X-polarization and fits a single exponential. Nothing here touches the
Liouvillian eigendecomposition, so it is an independent route to T_X.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Literal

import numpy as np
import scipy.linalg as sla
from scipy.integrate import solve_ivp
from scipy.optimize import curve_fit

from .errors import FitDegenerate, StepSizeUnderflow
from .fock import coherent_state
from .lindblad import Liouvillian, vec

Method = Literal["rk", "propagator"]


@dataclass(frozen=True)
class TrajectoryResult:
    times: np.ndarray
    observable: np.ndarray
    trace_residual: np.ndarray
    generator_norm: float
    states: np.ndarray | None = None
    fitted_tx: float | None = None
    fit_residual: float | None = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t_us", "x_polarization", "trace_residual"])
        for t, x, r in zip(self.times, self.observable, self.trace_residual):
            w.writerow([repr(float(t * 1e6)), repr(float(x)), repr(float(r))])
        return buf.getvalue()


def evolve(
    L: Liouvillian,
    rho0: np.ndarray,
    t_final: float,
    n_samples: int,
    observable: Callable[[np.ndarray], float] | None = None,
    method: Method = "rk",
    rtol: float = 1e-8,
    keep_states: bool = False,
) -> TrajectoryResult:
    """Sample ``rho(t)`` on ``n_samples`` equally spaced times in ``[0, t_final]``.

    ``method="rk"`` uses adaptive Dormand-Prince 8(5,3) at ``rtol``; it is
    the reference for non-stiff problems. ``method="propagator"`` steps with
    the exact one-interval propagator ``expm(L dt)`` (scaling and squaring),
    which is what lifetime runs need: T_X exceeds 1/||L|| by ~1e6, far
    beyond what explicit stepping can cover.
    """
    n = L.dim
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (n, n):
        raise ValueError(f"rho0 has shape {rho0.shape}, Liouvillian acts on {n}x{n}")
    if abs(np.trace(rho0) - 1) > 1e-10 or not np.allclose(rho0, rho0.conj().T, atol=1e-12):
        raise ValueError("rho0 must be Hermitian with unit trace")
    if n_samples < 2:
        raise ValueError("need at least two samples")
    times = np.linspace(0.0, t_final, n_samples)
    v0 = vec(rho0)

    if method == "rk":
        mat = L.matrix
        sol = solve_ivp(
            lambda _t, y: mat @ y, (0.0, t_final), v0, method="DOP853",
            t_eval=times, rtol=rtol, atol=rtol * 1e-4,
        )
        if not sol.success:
            raise StepSizeUnderflow(f"integrator stopped at t = {sol.t[-1]:.3g} s: {sol.message}")
        vecs = sol.y.T
    elif method == "propagator":
        step = sla.expm(L.matrix * (times[1] - times[0]))
        vecs = np.empty((n_samples, n * n), dtype=complex)
        vecs[0] = v0
        for k in range(1, n_samples):
            vecs[k] = step @ vecs[k - 1]
    else:
        raise ValueError(f"unknown method {method!r}")

    # vec is column-major, so transpose the trailing axes back
    states = np.swapaxes(vecs.reshape(n_samples, n, n), 1, 2)
    traces = np.einsum("kii->k", states)
    trace_residual = np.abs(traces - 1.0)
    if trace_residual.max() > 1e-6:
        warnings.warn(f"trace drift {trace_residual.max():.2g} exceeds 1e-6", stacklevel=2)
    herm = np.abs(states - np.conj(np.swapaxes(states, 1, 2))).max()
    if herm > 1e-8:
        warnings.warn(f"Hermiticity drift {herm:.2g} exceeds 1e-8", stacklevel=2)
    if observable is None:
        obs = traces.real
    else:
        obs = np.array([observable(s) for s in states])
    return TrajectoryResult(
        times, obs, trace_residual, L.norm, states if keep_states else None,
    )


def x_axis_projectors(alpha: complex, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal ``|+X>, |-X>`` built symmetrically from ``|+alpha>, |-alpha>``.

    Even and odd cats are orthogonal; ``|+-X> = (|C+> +- |C->)/sqrt(2)`` is
    the symmetric orthogonalization of the coherent pair.
    """
    if alpha == 0:
        raise ValueError("alpha = 0: the coherent pair is degenerate")
    plus = coherent_state(alpha, dim)
    minus = coherent_state(-alpha, dim)
    even = plus + minus
    odd = plus - minus
    even /= np.linalg.norm(even)
    odd /= np.linalg.norm(odd)
    return (even + odd) / math.sqrt(2), (even - odd) / math.sqrt(2)


def x_polarization(rho: np.ndarray, alpha: complex) -> float:
    """``tr(rho (P+ - P-))`` with P+- projecting onto the orthogonalized ``|+-alpha>``."""
    px, mx = x_axis_projectors(alpha, rho.shape[0])
    return float((px.conj() @ rho @ px - mx.conj() @ rho @ mx).real)


def _model(t, amp, tau, offset):
    return amp * np.exp(-t / tau) + offset


def fit_tx(traj: TrajectoryResult) -> TrajectoryResult:
    """Fit ``A exp(-t/T) + C`` and return the trajectory with ``fitted_tx`` set.

    The window skips an initial transient of ``3/||L||`` and ends at
    ``min(t_final, 5 T)``; T comes from a first fit, refined once.
    """
    t = np.asarray(traj.times)
    y = np.asarray(traj.observable)
    if np.ptp(y) < 1e-3:
        raise FitDegenerate(f"signal varies by only {np.ptp(y):.2g}")
    if not y[0] > y[-1]:
        raise FitDegenerate("signal does not decay")
    t0 = 3.0 / traj.generator_norm if traj.generator_norm > 0 else 0.0

    # initial guess: time to fall by 1/e of the observed drop
    target = y[-1] + (y[0] - y[-1]) / math.e
    below = np.flatnonzero(y <= target)
    tau = t[below[0]] if below.size and t[below[0]] > 0 else t[-1]

    params = None
    for _ in range(2):
        mask = (t >= t0) & (t <= min(t[-1], 5.0 * tau))
        if mask.sum() < 4:
            mask = t >= t0
        tw, yw = t[mask], y[mask]
        scale = tw[-1]
        guess = (yw[0] - yw[-1], tau / scale, yw[-1]) if params is None else (params[0], tau / scale, params[2])
        try:
            params, _ = curve_fit(_model, tw / scale, yw, p0=guess, maxfev=20000)
        except RuntimeError as exc:
            raise FitDegenerate(f"exponential fit did not converge: {exc}") from exc
        tau = params[1] * scale
        if not tau > 0:
            raise FitDegenerate(f"fitted time constant {tau:.3g} is not positive")
    resid = yw - _model(tw / scale, *params)
    rel = float(np.sqrt(np.mean(resid**2)) / max(np.ptp(yw), 1e-300))
    return replace(traj, fitted_tx=float(tau), fit_residual=rel)
