"""Effective Hamiltonian, dissipator tables and Liouvillian assembly.

Vectorization is column stacking throughout: ``vec(rho)[i + N*j] = rho[i, j]``,
so that ``vec(A rho B) = (B.T kron A) vec(rho)``. The Hamiltonian is in
angular-frequency units (hbar absorbed), rates in 1/s.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

import numpy as np

from .errors import DimensionOverflow, NegativeRate
from .fock import A, AD, NUM, OperatorExpr, adjoint, expect_normal_coherent, realize
from .model import (
    BathLabel,
    BathSpectrum,
    ModelParams,
    alpha_squared,
    kerr_coefficient,
    pi_amplitude,
)

ORDERS = ("0", "1", "1tp", "2")
DEFAULT_MAX_DIM = 80
CHANNEL_COUNTS = {"0": 2, "1": 6, "1tp": 4, "2": 10}

Direction = Literal["loss", "gain"]


@dataclass(frozen=True)
class DissipatorTerm:
    rate: float
    jump: OperatorExpr
    bath: BathLabel | None
    direction: Direction | None
    order: str

    def __post_init__(self):
        if not self.rate >= 0:
            raise NegativeRate(f"{self.label}: rate {self.rate!r} < 0")

    @property
    def label(self) -> str:
        if self.order == "engineered":
            return "engineered:2ph"
        return f"{self.order}:{self.bath.value}:{self.direction}"

    @property
    def active(self) -> bool:
        return self.rate > 0 and bool(self.jump)


@dataclass(frozen=True)
class LindbladModel:
    hamiltonian: OperatorExpr
    dissipators: tuple[DissipatorTerm, ...]
    order: str
    alpha_sq: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "dissipators", tuple(self.dissipators))
        if not self.hamiltonian.is_hermitian(tol=1e-12 * _scale(self.hamiltonian)):
            raise ValueError("Hamiltonian expression is not Hermitian")

    @property
    def active(self) -> tuple[DissipatorTerm, ...]:
        return tuple(d for d in self.dissipators if d.active)

    @property
    def parity_symmetric(self) -> bool:
        """True when H is parity-even and every jump has definite parity."""
        if self.hamiltonian.parity() != 0:
            return False
        return all(d.jump.parity() is not None for d in self.active)

    def with_dissipators(self, dissipators: Iterable[DissipatorTerm]) -> "LindbladModel":
        return LindbladModel(self.hamiltonian, tuple(dissipators), self.order, self.alpha_sq)


def _scale(expr: OperatorExpr) -> float:
    return max((abs(c) for _, _, c in expr.terms), default=1.0)


# ---------------------------------------------------------------------------
# Hamiltonian and dissipator tables
# ---------------------------------------------------------------------------

def build_hamiltonian(p: ModelParams) -> OperatorExpr:
    """``Delta ad a - K ad^2 a^2 + eps2 (ad^2 + a^2)`` in rad/s."""
    kerr = kerr_coefficient(p)
    return OperatorExpr((
        (1, 1, p.delta_eff),
        (2, 2, -kerr),
        (2, 0, p.epsilon2),
        (0, 2, p.epsilon2),
    ))


def _pair(
    bath: BathSpectrum, label: BathLabel, omega_d: float, loss_jump: OperatorExpr,
    gain_jump: OperatorExpr, order: str, weight: float = 1.0,
) -> list[DissipatorTerm]:
    loss, gain = bath.rates(label, omega_d)
    return [
        DissipatorTerm(loss * weight, loss_jump, label, "loss", order),
        DissipatorTerm(gain * weight, gain_jump, label, "gain", order),
    ]


def _pruned(terms: list[DissipatorTerm], prune: bool) -> list[DissipatorTerm]:
    return [t for t in terms if t.active] if prune else terms


def dissipators_order0(p: ModelParams, b: BathSpectrum, prune: bool = True) -> list[DissipatorTerm]:
    """Ordinary single-photon loss and gain at omega_d/2."""
    return _pruned(_pair(b, BathLabel.HALF, p.omega_d, A, AD, "0"), prune)


def dissipators_order1(p: ModelParams, b: BathSpectrum, prune: bool = True) -> list[DissipatorTerm]:
    """Six channels of the first beyond-RWA correction.

    The omega_d/2 pair carries the squeezing-induced admixture
    ``a + (2 eps2/omega_d) ad``; omega_d and 3 omega_d/2 enter with the
    squared coefficients folded into the rate.
    """
    wd = p.omega_d
    mix = 2.0 * p.epsilon2 / wd
    two_ph = (8.0 * p.g3 / (3.0 * wd)) ** 2
    three_half = (3.0 * p.epsilon2 / wd) ** 2
    terms = (
        _pair(b, BathLabel.HALF, wd, A + mix * AD, AD + mix * A, "1")
        + _pair(b, BathLabel.ONE, wd, OperatorExpr.monomial(0, 2), OperatorExpr.monomial(2, 0), "1", two_ph)
        + _pair(b, BathLabel.THREE_HALF, wd, A, AD, "1", three_half)
    )
    return _pruned(terms, prune)


def dissipators_order1_two_photon_only(
    p: ModelParams, b: BathSpectrum, prune: bool = True
) -> list[DissipatorTerm]:
    """Plain linear channels plus the omega_d two-photon pair, no eps2 admixture."""
    wd = p.omega_d
    two_ph = (8.0 * p.g3 / (3.0 * wd)) ** 2
    terms = (
        _pair(b, BathLabel.HALF, wd, A, AD, "1tp")
        + _pair(b, BathLabel.ONE, wd, OperatorExpr.monomial(0, 2), OperatorExpr.monomial(2, 0), "1tp", two_ph)
    )
    return _pruned(terms, prune)


def order2_loss_jumps(p: ModelParams) -> dict[BathLabel, OperatorExpr]:
    """Loss-side composite jump operators of the second-order master equation.

    The gain side of each pair is the adjoint (Pi -> Pi*). Pi is real here,
    so Pi and Pi* coincide numerically but are kept distinct in the code
    for readability against the printed table.
    """
    wd = p.omega_d
    pi = complex(pi_amplitude(p))
    pic = pi.conjugate()
    x = p.g3**2 / wd**2
    y = p.g4 / wd
    c_half = 35.0 / 2.0 * x - 6.0 * y
    c_cubic = 152.0 / 9.0 * x - 3.0 * y
    c_num = 592.0 / 9.0 * x - 16.0 * y
    c_three = 51.0 / 5.0 * x - 9.0 / 2.0 * y
    c_a3 = 4.0 * x + 3.0 / 2.0 * y
    c_two = 224.0 / 45.0 * x + 16.0 / 5.0 * y
    c_five = 19.0 / 9.0 * x + 5.0 / 2.0 * y
    mono = OperatorExpr.monomial
    return {
        BathLabel.DC: mono(0, 2, 32.0 * x * pic),
        BathLabel.HALF: (
            A
            + (2.0 * p.g3 / wd * pi) * AD
            - (c_half * abs(pi) ** 2) * A
            - c_cubic * mono(1, 2)
            - c_cubic * A
        ),
        BathLabel.ONE: mono(0, 2, 8.0 * p.g3 / (3.0 * wd)) - (c_num * pi) * NUM,
        BathLabel.THREE_HALF: (
            (3.0 * p.g3 / wd * pi) * A - (c_three * pi**2) * AD + c_a3 * mono(0, 3)
        ),
        BathLabel.TWO: mono(0, 2, c_two),
        BathLabel.FIVE_HALF: mono(0, 2, c_five),
    }


def dissipators_order2(p: ModelParams, b: BathSpectrum, prune: bool = True) -> list[DissipatorTerm]:
    """Second-order channel list: five finite-frequency pairs, plus the DC pair
    when the bath supplies nonzero DC rate products."""
    jumps = order2_loss_jumps(p)
    terms: list[DissipatorTerm] = []
    labels = [BathLabel.HALF, BathLabel.ONE, BathLabel.THREE_HALF, BathLabel.TWO, BathLabel.FIVE_HALF]
    if b.dc_loss > 0 or b.dc_heat > 0:
        labels.insert(0, BathLabel.DC)
    for lbl in labels:
        terms += _pair(b, lbl, p.omega_d, jumps[lbl], adjoint(jumps[lbl]), "2")
    return _pruned(terms, prune)


CoolingForm = Literal["displaced", "bare"]


def engineered_cooling(p: ModelParams, form: CoolingForm = "displaced") -> DissipatorTerm | None:
    """Engineered two-photon dissipation, ``kappa_2ph D[a^2 - alpha^2]`` by default.

    ``form="bare"`` gives ``kappa_2ph D[a^2]``. Returns None when kappa_2ph = 0.
    """
    if p.kappa_2ph == 0:
        return None
    jump = OperatorExpr.monomial(0, 2)
    if form == "displaced":
        jump = jump - alpha_squared(p)
    elif form != "bare":
        raise ValueError(f"unknown cooling form {form!r}")
    return DissipatorTerm(p.kappa_2ph, jump, None, None, "engineered")


_TABLES = {
    "0": dissipators_order0,
    "1": dissipators_order1,
    "1tp": dissipators_order1_two_photon_only,
    "2": dissipators_order2,
}


def build_model(
    p: ModelParams, b: BathSpectrum, order: str, cooling_form: CoolingForm = "displaced"
) -> LindbladModel:
    """Hamiltonian plus the (unpruned) channel table for ``order``."""
    order = str(order)
    if order not in _TABLES:
        raise ValueError(f"order must be one of {ORDERS}, got {order!r}")
    terms = _TABLES[order](p, b, prune=False)
    expected = CHANNEL_COUNTS[order] + (2 if order == "2" and (b.dc_loss or b.dc_heat) else 0)
    assert len(terms) == expected, (order, len(terms))
    cooling = engineered_cooling(p, cooling_form)
    if cooling is not None:
        terms.append(cooling)
    try:
        a2 = alpha_squared(p)
    except ValueError:
        a2 = None
    return LindbladModel(build_hamiltonian(p), tuple(terms), order, a2)


# ---------------------------------------------------------------------------
# superoperator
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Liouvillian:
    dim: int
    matrix: np.ndarray
    parity_symmetric: bool = False
    convention: str = "column-stacking"

    @property
    def norm(self) -> float:
        """Induced 1-norm (max column sum)."""
        return float(np.abs(self.matrix).sum(axis=0).max())

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return (self.matrix @ vec(rho)).reshape(self.dim, self.dim, order="F")

    def __mul__(self, s: float) -> "Liouvillian":
        return Liouvillian(self.dim, self.matrix * s, self.parity_symmetric, self.convention)

    __rmul__ = __mul__


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape(dim, dim, order="F")


def parity_sectors(dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Indices of the vectorized ``rho[i, j]`` with ``i + j`` even / odd."""
    i, j = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    par = vec((i + j) % 2)
    return np.flatnonzero(par == 0), np.flatnonzero(par == 1)


def liouvillian_from_matrices(
    h: np.ndarray, jumps: Sequence[tuple[float, np.ndarray]], parity_symmetric: bool = False
) -> Liouvillian:
    """Column-stacked generator of ``-i[H, rho] + sum_k r_k D[J_k] rho``."""
    n = h.shape[0]
    eye = np.eye(n)
    gamma = np.zeros((n, n), dtype=complex)
    for rate, j in jumps:
        gamma += rate * (j.conj().T @ j)
    # effective non-Hermitian Hamiltonian folds the anticommutator in
    heff = h - 0.5j * gamma
    mat = -1j * np.kron(eye, heff) + 1j * np.kron(heff.conj(), eye)
    for rate, j in jumps:
        mat += rate * np.kron(j.conj(), j)
    return Liouvillian(n, mat, parity_symmetric)


def assemble_liouvillian(m: LindbladModel, dim: int, max_dim: int = DEFAULT_MAX_DIM) -> Liouvillian:
    """Dense ``N^2 x N^2`` Liouvillian of ``m`` at Fock truncation ``dim``."""
    if dim < 2:
        raise ValueError(f"Fock dimension must be >= 2, got {dim}")
    if dim > max_dim:
        raise DimensionOverflow(
            f"dim = {dim} exceeds the budget {max_dim} "
            f"(dense Liouvillian would need {16 * dim**4 / 2**20:.0f} MiB)"
        )
    h = realize(m.hamiltonian, dim)
    jumps = [(d.rate, realize(d.jump, dim)) for d in m.active]
    return liouvillian_from_matrices(h, jumps, m.parity_symmetric)


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChannelRow:
    order: str
    bath_label: str
    direction: str
    rate_per_s: float
    jump_expr_text: str
    effective_rate_at_alpha: float
    label: str


def effective_rate(term: DissipatorTerm, alpha: complex) -> float:
    """``rate * <alpha| J^dag J |alpha>``, evaluated exactly."""
    return term.rate * expect_normal_coherent(term.jump, term.jump, alpha).real


def channel_report(m: LindbladModel, alpha_sq: float) -> list[ChannelRow]:
    """Active channels ranked by their effective rate on ``|alpha>``, alpha = sqrt(alpha_sq)."""
    alpha = math.sqrt(alpha_sq)
    rows = [
        ChannelRow(
            order=d.order,
            bath_label=d.bath.value if d.bath is not None else "",
            direction=d.direction or "",
            rate_per_s=d.rate,
            jump_expr_text=str(d.jump),
            effective_rate_at_alpha=effective_rate(d, alpha),
            label=d.label,
        )
        for d in m.active
    ]
    rows.sort(key=lambda r: r.effective_rate_at_alpha, reverse=True)
    return rows


CHANNEL_CSV_COLUMNS = (
    "order", "bath_label", "direction", "rate_per_s", "jump_expr_text", "effective_rate_at_alpha",
)


def channel_report_csv(rows: Sequence[ChannelRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CHANNEL_CSV_COLUMNS)
    for r in rows:
        w.writerow([r.order, r.bath_label, r.direction, repr(r.rate_per_s), r.jump_expr_text,
                    repr(r.effective_rate_at_alpha)])
    return buf.getvalue()
