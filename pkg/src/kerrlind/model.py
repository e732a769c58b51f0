"""Physical parameters of the driven squeezed Kerr oscillator and its bath.

All frequencies are angular (rad/s) and all rates are in 1/s internally.
Configuration files use cyclic units with explicit key suffixes, converted
on ingestion by :func:`params_from_config`.
"""
from __future__ import annotations

import dataclasses
import enum
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigInvalid, DegenerateParams, InvalidFrequency

# CODATA 2018
H_PLANCK = 6.62607015e-34  # J s, exact
HBAR = H_PLANCK / (2 * math.pi)
K_B = 1.380649e-23  # J/K

TWO_PI = 2.0 * math.pi


class BathLabel(str, enum.Enum):
    """Bath sampling frequencies, as multiples of omega_d / 2."""

    DC = "dc"
    HALF = "half"
    ONE = "one"
    THREE_HALF = "three_half"
    TWO = "two"
    FIVE_HALF = "five_half"

    @property
    def multiple(self) -> int:
        return _MULTIPLES[self]

    def omega(self, omega_d: float) -> float:
        return self.multiple * omega_d / 2.0


_MULTIPLES = {
    BathLabel.DC: 0,
    BathLabel.HALF: 1,
    BathLabel.ONE: 2,
    BathLabel.THREE_HALF: 3,
    BathLabel.TWO: 4,
    BathLabel.FIVE_HALF: 5,
}

FINITE_LABELS = tuple(lbl for lbl in BathLabel if lbl is not BathLabel.DC)


@dataclass(frozen=True)
class ModelParams:
    """Hamiltonian-side inputs. Frequencies in rad/s, kappa_2ph in 1/s."""

    g3: float
    g4: float
    omega_d: float
    delta_eff: float = 0.0
    epsilon2: float = 0.0
    kappa_2ph: float = 0.0

    def __post_init__(self):
        if not self.omega_d > 0:
            raise InvalidFrequency(f"omega_d must be positive, got {self.omega_d!r}")
        if self.epsilon2 < 0:
            raise DegenerateParams(f"epsilon2 must be >= 0, got {self.epsilon2!r}")
        if self.kappa_2ph < 0:
            raise DegenerateParams(f"kappa_2ph must be >= 0, got {self.kappa_2ph!r}")
        if abs(self.g3) > self.omega_d / 10:
            warnings.warn(
                f"|g3| = {abs(self.g3):.3g} rad/s exceeds omega_d/10; "
                "the perturbative expansion is not controlled",
                stacklevel=2,
            )

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class BathPoint:
    kappa: float  # 1/s
    temperature: float  # K

    def __post_init__(self):
        if self.kappa < 0 or self.temperature < 0:
            raise DegenerateParams(
                f"bath kappa and temperature must be >= 0, got {self.kappa!r}, {self.temperature!r}"
            )


@dataclass(frozen=True)
class BathSpectrum:
    """Bath sampled at the five finite multiples of omega_d/2, plus DC.

    The DC channel is given directly as the two rate products
    ``dc_loss = kappa_0 (1 + n_0)`` and ``dc_heat = kappa_0 n_0`` since the
    occupation itself diverges at zero frequency.
    """

    points: Mapping[BathLabel, BathPoint]
    dc_loss: float = 0.0
    dc_heat: float = 0.0

    def __post_init__(self):
        missing = [lbl.value for lbl in FINITE_LABELS if lbl not in self.points]
        if missing:
            raise DegenerateParams(f"bath spectrum missing entries: {', '.join(missing)}")
        if BathLabel.DC in self.points:
            raise DegenerateParams("the DC entry is given via dc_loss/dc_heat, not a BathPoint")
        if self.dc_loss < 0 or self.dc_heat < 0:
            raise DegenerateParams("DC rate products must be >= 0")
        if self.dc_loss > 0 or self.dc_heat > 0:
            warnings.warn(
                "nonzero DC noise: near-DC channels are treated without the "
                "interaction-picture refinement and are likely overestimated",
                stacklevel=2,
            )
        object.__setattr__(self, "points", dict(self.points))

    def __getitem__(self, label: BathLabel) -> BathPoint:
        return self.points[label]

    def rates(self, label: BathLabel, omega_d: float) -> tuple[float, float]:
        """Return ``(loss, gain)`` = ``(kappa (1 + n), kappa n)`` at ``label``."""
        if label is BathLabel.DC:
            return self.dc_loss, self.dc_heat
        pt = self.points[label]
        n = thermal_occupation(label.omega(omega_d), pt.temperature)
        return pt.kappa * (1.0 + n), pt.kappa * n

    def replace(self, **changes) -> "BathSpectrum":
        return dataclasses.replace(self, **changes)

    @classmethod
    def uniform(cls, kappa: float, temperature: float) -> "BathSpectrum":
        return cls({lbl: BathPoint(kappa, temperature) for lbl in FINITE_LABELS})

    @classmethod
    def single(cls, label: BathLabel, kappa: float, temperature: float) -> "BathSpectrum":
        """Bath coupled only at ``label``; every other point has kappa = 0."""
        pts = {lbl: BathPoint(0.0, 0.0) for lbl in FINITE_LABELS}
        pts[label] = BathPoint(kappa, temperature)
        return cls(pts)


def kerr_coefficient(p: ModelParams) -> float:
    """Kerr coefficient K = -3 g4 / 2 + 20 g3^2 / (3 omega_d), in rad/s."""
    return -1.5 * p.g4 + 20.0 * p.g3**2 / (3.0 * p.omega_d)


def g4_for_kerr(kerr: float, g3: float, omega_d: float) -> float:
    """Invert :func:`kerr_coefficient` for g4 at fixed g3."""
    return (20.0 * g3**2 / (3.0 * omega_d) - kerr) * 2.0 / 3.0


def pi_amplitude(p: ModelParams) -> float:
    """Drive displacement amplitude from epsilon2 = g3 * Pi.

    Pi is taken real and non-negative; its phase is a global rotation that
    the rates do not observe.
    """
    if p.epsilon2 == 0:
        return 0.0
    if p.g3 == 0:
        raise DegenerateParams("g3 = 0 cannot produce a nonzero squeezing amplitude")
    return abs(p.epsilon2 / p.g3)


def alpha_squared(p: ModelParams) -> float:
    """Mean photon number of the Kerr-cat pole states, epsilon2 / K."""
    if p.epsilon2 == 0:
        return 0.0
    kerr = kerr_coefficient(p)
    if kerr == 0:
        raise DegenerateParams("K = 0 with epsilon2 > 0: no coherent-state manifold")
    ratio = p.epsilon2 / kerr
    if ratio < 0:
        raise DegenerateParams(f"epsilon2 / K = {ratio:.3g} is negative; sign(K) must match sign(epsilon2)")
    return ratio


def thermal_occupation(omega: float, temperature: float) -> float:
    """Bose-Einstein occupation at angular frequency ``omega`` and ``temperature`` (K)."""
    if not omega > 0:
        raise InvalidFrequency(f"thermal occupation needs omega > 0, got {omega!r}")
    if temperature <= 0:
        return 0.0
    x = HBAR * omega / (K_B * temperature)
    # exp(-x) / (1 - exp(-x)) does not overflow deep in the quantum regime
    return math.exp(-x) / -math.expm1(-x)


def with_alpha_sq(p: ModelParams, alpha_sq: float) -> ModelParams:
    """Set epsilon2 so that epsilon2 / K equals ``alpha_sq``."""
    if alpha_sq < 0:
        raise DegenerateParams(f"alpha_sq must be >= 0, got {alpha_sq!r}")
    kerr = kerr_coefficient(p)
    if kerr == 0 and alpha_sq > 0:
        raise DegenerateParams(f"K = 0: no squeezing drive gives alpha_sq = {alpha_sq!r}")
    return p.replace(epsilon2=kerr * alpha_sq)


def with_kerr(p: ModelParams, kerr: float, alpha_sq: float) -> ModelParams:
    """Move K by changing g4 at fixed g3, keeping the cat size ``alpha_sq``."""
    q = p.replace(g4=g4_for_kerr(kerr, p.g3, p.omega_d), epsilon2=0.0)
    return with_alpha_sq(q, alpha_sq)


# ---------------------------------------------------------------------------
# configuration files
# ---------------------------------------------------------------------------

_TOP_KEYS = {
    "g3_over_6pi_hz", "g3_over_2pi_hz", "g4_over_8pi_hz", "g4_over_2pi_hz",
    "omega_d_over_2pi_hz", "delta_over_2pi_hz", "epsilon2_over_2pi_hz",
    "alpha_sq", "kappa_2ph_per_us", "bath", "cooling_form",
}
_POINT_KEYS = {"kappa_per_us", "temp_mk"}
_DC_KEYS = {"kappa_heat_per_us", "kappa_loss_per_us"}


@dataclass(frozen=True)
class Config:
    """Parsed configuration: model, bath and the free-form extras the CLI needs."""

    params: ModelParams
    bath: BathSpectrum
    alpha_sq: float
    cooling_form: str = "displaced"
    raw: Mapping[str, Any] = field(default_factory=dict, compare=False)


def _number(d: Mapping, key: str, where: str, *, nonneg: bool = False, default=None) -> float:
    if key not in d:
        if default is None:
            raise ConfigInvalid(f"{where}{key}: required key missing")
        return default
    val = d[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise ConfigInvalid(f"{where}{key}: expected a finite number, got {val!r}")
    if nonneg and val < 0:
        raise ConfigInvalid(f"{where}{key}: expected a non-negative number, got {val!r}")
    return float(val)


def _one_of(d: Mapping, keys: tuple[str, str], where: str = "") -> str:
    present = [k for k in keys if k in d]
    if len(present) != 1:
        raise ConfigInvalid(f"{where}{' | '.join(keys)}: exactly one must be given (found {len(present)})")
    return present[0]


def _check_keys(d: Any, allowed: set, where: str) -> None:
    if not isinstance(d, Mapping):
        raise ConfigInvalid(f"{where or '<root>'}: expected an object, got {type(d).__name__}")
    extra = sorted(set(d) - allowed)
    if extra:
        raise ConfigInvalid(f"{where}{extra[0]}: unknown key")


def params_from_config(cfg: Mapping[str, Any]) -> Config:
    """Build model and bath from a config mapping (cyclic units, see README)."""
    _check_keys(cfg, _TOP_KEYS, "")

    g3_key = _one_of(cfg, ("g3_over_6pi_hz", "g3_over_2pi_hz"))
    g3 = _number(cfg, g3_key, "") * (6 * math.pi if g3_key == "g3_over_6pi_hz" else TWO_PI)
    g4_key = _one_of(cfg, ("g4_over_8pi_hz", "g4_over_2pi_hz"))
    g4 = _number(cfg, g4_key, "") * (8 * math.pi if g4_key == "g4_over_8pi_hz" else TWO_PI)
    omega_d = TWO_PI * _number(cfg, "omega_d_over_2pi_hz", "")
    if omega_d <= 0:
        raise ConfigInvalid("omega_d_over_2pi_hz: must be positive")
    delta = TWO_PI * _number(cfg, "delta_over_2pi_hz", "", default=0.0)
    kappa_2ph = 1e6 * _number(cfg, "kappa_2ph_per_us", "", nonneg=True, default=0.0)

    cooling_form = cfg.get("cooling_form", "displaced")
    if cooling_form not in ("displaced", "bare"):
        raise ConfigInvalid(f"cooling_form: expected 'displaced' or 'bare', got {cooling_form!r}")

    try:
        base = ModelParams(g3=g3, g4=g4, omega_d=omega_d, delta_eff=delta, kappa_2ph=kappa_2ph)
        eps_key = _one_of(cfg, ("epsilon2_over_2pi_hz", "alpha_sq"))
        if eps_key == "alpha_sq":
            alpha_sq = _number(cfg, "alpha_sq", "", nonneg=True)
            params = with_alpha_sq(base, alpha_sq)
        else:
            params = base.replace(epsilon2=TWO_PI * _number(cfg, eps_key, "", nonneg=True))
            alpha_sq = alpha_squared(params)
    except DegenerateParams as exc:
        raise ConfigInvalid(f"<model>: {exc}") from exc

    bath = _bath_from_config(cfg.get("bath"))
    return Config(params=params, bath=bath, alpha_sq=alpha_sq, cooling_form=cooling_form, raw=dict(cfg))


def _bath_from_config(bath: Any) -> BathSpectrum:
    if bath is None:
        raise ConfigInvalid("bath: required key missing")
    _check_keys(bath, {lbl.value for lbl in BathLabel}, "bath.")
    points = {}
    for lbl in FINITE_LABELS:
        where = f"bath.{lbl.value}."
        if lbl.value not in bath:
            raise ConfigInvalid(f"bath.{lbl.value}: required key missing")
        entry = bath[lbl.value]
        _check_keys(entry, _POINT_KEYS, where)
        points[lbl] = BathPoint(
            kappa=1e6 * _number(entry, "kappa_per_us", where, nonneg=True),
            temperature=1e-3 * _number(entry, "temp_mk", where, nonneg=True),
        )
    dc = bath.get("dc", {})
    _check_keys(dc, _DC_KEYS, "bath.dc.")
    return BathSpectrum(
        points,
        dc_loss=1e6 * _number(dc, "kappa_loss_per_us", "bath.dc.", nonneg=True, default=0.0),
        dc_heat=1e6 * _number(dc, "kappa_heat_per_us", "bath.dc.", nonneg=True, default=0.0),
    )


def load_config(path: str | Path) -> Config:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigInvalid(f"{path}: {exc.strerror or exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return params_from_config(cfg)
    except ConfigInvalid as exc:
        raise ConfigInvalid(f"{path}: {exc}") from exc
