"""Parameter sweeps, figure presets and the coefficient check."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

from . import __version__
from .errors import ConfigInvalid, KerrLindError
from .lindblad import DEFAULT_MAX_DIM, ORDERS, build_model, channel_report, dissipators_order1
from .model import (
    HBAR,
    K_B,
    TWO_PI,
    BathLabel,
    Config,
    alpha_squared,
    kerr_coefficient,
    params_from_config,
    pi_amplitude,
    thermal_occupation,
    with_alpha_sq,
    with_kerr,
)
from .spectral import DEFAULT_CONV_TOL, DEFAULT_ZERO_TOL, DIM_STEP, converged_tx

AXES = ("alpha_sq", "kerr_over_2pi", "kappa_2ph")


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple[float, ...]
    orders: tuple[str, ...]
    output_path: str | None = None
    parallelism: int = 1

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigInvalid(f"axis: expected one of {AXES}, got {self.axis!r}")
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ConfigInvalid("values: must be nonempty")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ConfigInvalid("values: must be strictly increasing")
        orders = tuple(str(o) for o in self.orders)
        if not orders:
            raise ConfigInvalid("orders: must be nonempty")
        bad = [o for o in orders if o not in ORDERS]
        if bad:
            raise ConfigInvalid(f"orders: unknown order {bad[0]!r} (expected {ORDERS})")
        if self.parallelism < 1:
            raise ConfigInvalid("parallelism: must be >= 1")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "orders", orders)


@dataclass(frozen=True)
class Tolerances:
    zero_tol: float = DEFAULT_ZERO_TOL
    conv_tol: float = DEFAULT_CONV_TOL
    max_dim: int = DEFAULT_MAX_DIM
    dim_step: int = DIM_STEP


ROW_COLUMNS = (
    "series", "axis", "value", "alpha_sq", "kerr_over_2pi_hz", "kappa_2ph_per_us", "order",
    "t_x_us", "dim_used", "converged", "dominant_channel", "error",
)


@dataclass(frozen=True)
class SweepRow:
    series: str
    axis: str
    value: float
    alpha_sq: float
    kerr_over_2pi_hz: float
    kappa_2ph_per_us: float
    order: str
    t_x_us: float | None = None
    dim_used: int | None = None
    converged: bool | None = None
    dominant_channel: str = ""
    error: str = ""
    spectrum: dict | None = field(default=None, compare=False)

    @property
    def ok(self) -> bool:
        return not self.error


def default_jobs() -> int:
    return os.cpu_count() or 1


def point_params(config: Config, axis: str, value: float):
    """Model parameters at one sweep point, plus the cat size used there."""
    base = config.params
    if axis == "alpha_sq":
        return with_alpha_sq(base, value), value
    if axis == "kerr_over_2pi":
        return with_kerr(base, TWO_PI * value, config.alpha_sq), config.alpha_sq
    if axis == "kappa_2ph":
        return base.replace(kappa_2ph=1e6 * value), config.alpha_sq
    raise ConfigInvalid(f"axis: unknown {axis!r}")


def _run_point(job) -> SweepRow:
    config, axis, value, order, series, tol = job
    stub = dict(series=series, axis=axis, value=value, alpha_sq=math.nan,
                kerr_over_2pi_hz=math.nan, kappa_2ph_per_us=math.nan, order=order)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            p, a2 = point_params(config, axis, value)
            stub.update(alpha_sq=float(a2), kerr_over_2pi_hz=float(kerr_coefficient(p) / TWO_PI),
                        kappa_2ph_per_us=float(p.kappa_2ph * 1e-6))
            model = build_model(p, config.bath, order, config.cooling_form)
            res = converged_tx(model, tol=tol.conv_tol, max_dim=tol.max_dim, zero_tol=tol.zero_tol)
        report = channel_report(model, a2)
        return SweepRow(
            **stub, t_x_us=float(res.t_x * 1e6), dim_used=int(res.dim_used), converged=bool(res.converged),
            dominant_channel=report[0].label if report else "", spectrum=res.to_dict(),
        )
    except (KerrLindError, ValueError, ArithmeticError, MemoryError) as exc:
        return SweepRow(**stub, error=f"{type(exc).__name__}: {exc}")


def run_sweep(
    config: Config, spec: SweepSpec, tol: Tolerances = Tolerances(), series: str = ""
) -> list[SweepRow]:
    """One row per (axis value, order), in axis order; failed points carry ``error``."""
    jobs = [(config, spec.axis, v, o, series, tol) for v in spec.values for o in spec.orders]
    if spec.parallelism == 1 or len(jobs) == 1:
        return [_run_point(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=spec.parallelism) as pool:
        return list(pool.map(_run_point, jobs))


def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(float(v))
    return str(v)


def rows_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ROW_COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in ROW_COLUMNS])
    return buf.getvalue()


def rows_from_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


def spectra_jsonl(rows: Sequence[SweepRow]) -> str:
    return "".join(json.dumps(r.spectrum, sort_keys=True) + "\n" for r in rows if r.spectrum)


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

REFERENCE_CONFIG: dict[str, Any] = {
    "g3_over_6pi_hz": 20e6,
    "g4_over_8pi_hz": 280e3,
    "omega_d_over_2pi_hz": 12e9,
    "delta_over_2pi_hz": 0.0,
    "alpha_sq": 10.0,
    "kappa_2ph_per_us": 0.0,
    "bath": {
        "half": {"kappa_per_us": 0.05, "temp_mk": 50.0},
        "one": {"kappa_per_us": 5.0, "temp_mk": 350.0},
        "three_half": {"kappa_per_us": 0.05, "temp_mk": 50.0},
        # 50 ms^-1
        "two": {"kappa_per_us": 0.05, "temp_mk": 50.0},
        "five_half": {"kappa_per_us": 0.05, "temp_mk": 50.0},
        "dc": {"kappa_heat_per_us": 0.0, "kappa_loss_per_us": 0.0},
    },
}

FIG2_KERR_HZ = (0.25e6, 0.32e6, 1e6, 2e6, 4e6, 6.7e6, 8e6)
KAPPA_2PH_REFERENCE_PER_US = 0.003

FIGURES = {
    "fig1": "T_X vs |alpha|^2 at orders 0, 1, 1 (two-photon only) and 2",
    "fig2": "order-2 T_X vs |alpha|^2 for several Kerr coefficients at fixed g3",
    "fig4": "order-2 T_X vs |alpha|^2 with and without engineered two-photon cooling",
}

DEFAULT_GRIDS = {
    "fig1": tuple(float(x) for x in range(1, 13)),
    "fig2": tuple(float(x) for x in range(2, 13, 2)),
    "fig4": tuple(float(x) for x in range(1, 13)),
}


def reference_config(**overrides) -> Config:
    cfg = json.loads(json.dumps(REFERENCE_CONFIG))
    cfg.update(overrides)
    return params_from_config(cfg)


def figure_series(name: str) -> list[tuple[str, dict, tuple[str, ...]]]:
    """``(series label, config overrides, orders)`` for each curve of a figure."""
    if name == "fig1":
        return [("", {}, ("0", "1", "1tp", "2"))]
    if name == "fig2":
        out = []
        for k_hz in FIG2_KERR_HZ:
            # g4 chosen so that K hits the target at g3/6pi = 20 MHz
            g3 = 6 * math.pi * REFERENCE_CONFIG["g3_over_6pi_hz"]
            wd = TWO_PI * REFERENCE_CONFIG["omega_d_over_2pi_hz"]
            g4 = (20 * g3**2 / (3 * wd) - TWO_PI * k_hz) * 2 / 3
            out.append((f"K/2pi={k_hz / 1e6:g}MHz", {"g4_over_8pi_hz": g4 / (8 * math.pi)}, ("2",)))
        return out
    if name == "fig4":
        return [
            ("no cooling", {}, ("0", "2")),
            (f"kappa_2ph={KAPPA_2PH_REFERENCE_PER_US:g}/us", {"kappa_2ph_per_us": KAPPA_2PH_REFERENCE_PER_US}, ("2",)),
        ]
    raise ConfigInvalid(f"unknown figure {name!r}; expected one of {sorted(FIGURES)}")


def reproduce_figure(
    name: str, values: Sequence[float] | None = None, jobs: int = 1, tol: Tolerances = Tolerances()
) -> tuple[list[SweepRow], dict]:
    """Rows and manifest for one of the built-in figure presets."""
    grid = tuple(values) if values is not None else DEFAULT_GRIDS.get(name, ())
    rows: list[SweepRow] = []
    series_meta = []
    for label, overrides, orders in figure_series(name):
        cfg = reference_config(**overrides)
        spec = SweepSpec("alpha_sq", grid, orders, parallelism=jobs)
        rows += run_sweep(cfg, spec, tol, series=label)
        series_meta.append({"series": label, "overrides": overrides, "orders": list(orders)})
    manifest = build_manifest(
        reference_config(), SweepSpec("alpha_sq", grid, ("0",)), tol,
        extra={"figure": name, "description": FIGURES[name], "series": series_meta},
    )
    manifest["sweep"].pop("orders")
    return rows, manifest


def build_manifest(config: Config, spec: SweepSpec, tol: Tolerances, extra: dict | None = None) -> dict:
    p = config.params
    manifest = {
        "package": "kerrlind",
        "version": __version__,
        "config": json.loads(json.dumps(config.raw, sort_keys=True)),
        "resolved": {
            "g3_rad_s": p.g3,
            "g4_rad_s": p.g4,
            "omega_d_rad_s": p.omega_d,
            "delta_rad_s": p.delta_eff,
            "kerr_over_2pi_hz": kerr_coefficient(p) / TWO_PI,
            "kappa_2ph_per_s": p.kappa_2ph,
            "cooling_form": config.cooling_form,
            "bath": {
                lbl.value: {"kappa_per_s": pt.kappa, "temperature_k": pt.temperature}
                for lbl, pt in config.bath.points.items()
            },
            "dc_loss_per_s": config.bath.dc_loss,
            "dc_heat_per_s": config.bath.dc_heat,
        },
        "constants": {"hbar_J_s": HBAR, "k_B_J_per_K": K_B},
        "tolerances": asdict(tol),
        "sweep": {"axis": spec.axis, "values": list(spec.values), "orders": list(spec.orders)},
        "vectorization": "column-stacking",
    }
    if extra:
        manifest.update(extra)
    return manifest


def manifest_json(manifest: dict) -> str:
    return json.dumps(manifest, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# coefficient check
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoefficientReport:
    kerr_over_2pi_hz: float
    pi: float
    alpha_sq: float
    epsilon2_over_2pi_hz: float
    occupations: dict[str, float]
    order1_rates: list[tuple[str, str, float]]
    two_photon_heating_per_s: float
    single_photon_heating_per_s: float

    @property
    def prefactor_ratio(self) -> float:
        if self.single_photon_heating_per_s == 0:
            return math.inf if self.two_photon_heating_per_s else math.nan
        return self.two_photon_heating_per_s / self.single_photon_heating_per_s

    def text(self) -> str:
        lines = [
            f"K/2pi            = {self.kerr_over_2pi_hz:.6g} Hz",
            f"epsilon2/2pi     = {self.epsilon2_over_2pi_hz:.6g} Hz",
            f"|alpha|^2        = {self.alpha_sq:.6g}",
            f"Pi               = {self.pi:.6g}",
            "thermal occupations:",
        ]
        lines += [f"  n({lbl:>10}) = {n:.6g}" for lbl, n in self.occupations.items()]
        lines.append("order-1 channel rates (1/s):")
        lines += [f"  {lbl:<18} {jump:<28} {rate:.6g}" for lbl, jump, rate in self.order1_rates]
        lines.append(f"two-photon heating prefactor    = {self.two_photon_heating_per_s:.6g} /s")
        lines.append(f"single-photon heating prefactor = {self.single_photon_heating_per_s:.6g} /s")
        lines.append(f"ratio                           = {self.prefactor_ratio:.6g}")
        return "\n".join(lines) + "\n"


def check_coefficients(config: Config) -> CoefficientReport:
    p, b = config.params, config.bath
    occ = {}
    for lbl in BathLabel:
        if lbl is BathLabel.DC:
            continue
        occ[lbl.value] = thermal_occupation(lbl.omega(p.omega_d), b[lbl].temperature)
    terms = dissipators_order1(p, b, prune=False)
    rates = [(t.label, str(t.jump), t.rate) for t in terms]
    by_label = {t.label: t.rate for t in terms}
    return CoefficientReport(
        kerr_over_2pi_hz=kerr_coefficient(p) / TWO_PI,
        pi=pi_amplitude(p),
        alpha_sq=alpha_squared(p),
        epsilon2_over_2pi_hz=p.epsilon2 / TWO_PI,
        occupations=occ,
        order1_rates=rates,
        two_photon_heating_per_s=by_label["1:one:gain"],
        single_photon_heating_per_s=by_label["1:half:gain"],
    )
