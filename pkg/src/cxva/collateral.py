"""CSA terms, collateral assets and the (eta, chi) collateralization state.

eta is the fraction of exposure protected by CSA-haircut collateral value,
chi the fraction of the protected exposure that is also funded. Together
with the blended repo spread of a posted portfolio they parameterize the
effective discount rate.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from collections.abc import Callable, Mapping, Sequence
from typing import NamedTuple

from .curves import RateCurve, combine_curves

RATING_KEYS = ("AA", "A", "BBB", "BB")


class CollateralError(ValueError):
    """Invalid collateral inputs."""


@dataclass(frozen=True)
class CollateralAsset:
    """A security usable as collateral.

    econ_capital maps a repo borrower rating (e.g. "BBB") to the repo
    economic capital as a decimal fraction of notional.
    """

    id: str
    price: float
    quantity: float
    h_csa: float
    h_repo: float
    h_lcr: float
    econ_capital: Mapping[str, float]
    eligible_for: frozenset[str] | None = None

    def __post_init__(self) -> None:
        if self.price <= 0.0:
            raise CollateralError(f"{self.id}: price must be > 0")
        if self.quantity < 0.0:
            raise CollateralError(f"{self.id}: quantity must be >= 0")
        for name, h in (("h_csa", self.h_csa), ("h_repo", self.h_repo)):
            if not 0.0 <= h < 1.0:
                raise CollateralError(f"{self.id}: {name} must be in [0, 1)")
        if not 0.0 <= self.h_lcr <= 1.0:
            raise CollateralError(f"{self.id}: h_lcr must be in [0, 1]")
        if any(v < 0.0 for v in self.econ_capital.values()):
            raise CollateralError(f"{self.id}: economic capital must be >= 0")

    def eligible(self, netting_set_id: str) -> bool:
        return self.eligible_for is None or netting_set_id in self.eligible_for


@dataclass(frozen=True)
class CsaTerms:
    """Credit support annex terms relevant to discounting.

    segregated_* flags are per posting direction: True means the posted
    collateral sits in a segregated account (chi = 0), False comingled.
    collateralization_target drives eta in sweeps; threshold carves out a
    fixed uncollateralized pocket.
    """

    cash_rate: RateCurve
    segregated_b: bool = False
    segregated_c: bool = False
    collateralization_target: float = 1.0
    threshold: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.collateralization_target <= 1.0:
            raise CollateralError("collateralization_target must be in [0, 1]")
        if self.threshold < 0.0:
            raise CollateralError("threshold must be >= 0")


TimeFraction = float | Callable[[float], float]


@dataclass(frozen=True)
class CollateralState:
    """(eta, chi) descriptor per posting direction plus the blended funded
    repo spread of the posted portfolio (the chi-weighted spread of the
    effective-haircut aggregation; 0 for cash at the risk-free rate).

    eta/chi entries may be callables of time for deterministic profiles;
    range checks then apply at evaluation sites.
    """

    eta_b: TimeFraction = 1.0
    eta_c: TimeFraction = 1.0
    chi_b: TimeFraction = 1.0
    chi_c: TimeFraction = 1.0
    repo_spread_blend: float = 0.0

    def __post_init__(self) -> None:
        for name in ("eta_b", "eta_c", "chi_b", "chi_c"):
            v = getattr(self, name)
            if not callable(v) and not 0.0 <= float(v) <= 1.0:
                raise CollateralError(f"{name} must be in [0, 1]")


def eta(exposure: float, units: float, price: float, h_csa: float) -> float:
    """Collateralization fraction min(1, n*B*(1-h_csa)/exposure).

    Zero exposure is fully covered by convention (eta = 1), which keeps the
    effective rate continuous as the exposure crosses zero.
    """
    if exposure < 0.0 or units < 0.0 or price < 0.0:
        raise CollateralError("eta inputs must be non-negative")
    if not 0.0 <= h_csa < 1.0:
        raise CollateralError("h_csa must be in [0, 1)")
    if exposure == 0.0:
        return 1.0
    return min(1.0, units * price * (1.0 - h_csa) / exposure)


def chi(h_repo: float, h_csa: float) -> float:
    """Funded fraction 1 - ((h_repo - h_csa)+/(1 - h_csa)).

    Equals 1 when the repo haircut does not exceed the CSA haircut: the
    excess fund created by h_repo < h_csa is neither used nor charged.
    """
    if not 0.0 <= h_csa < 1.0 or not 0.0 <= h_repo < 1.0:
        raise CollateralError("haircuts must be in [0, 1)")
    return 1.0 - max(h_repo - h_csa, 0.0) / (1.0 - h_csa)


class BlendedAsset(NamedTuple):
    """One posted asset inside a blend: market value and its haircut/spread terms."""

    market_value: float
    h_csa: float
    h_repo: float
    repo_spread: float  # r_p - r, annualized decimal


class Blend(NamedTuple):
    chi_bar: float
    chi: float
    funded_spread: float  # sum_i w_i * S_pi

    def as_state(self, eta_b: float = 1.0, eta_c: float = 1.0) -> "CollateralState":
        """Collateralization state carrying this blend's chi and funded spread."""
        return CollateralState(eta_b=eta_b, eta_c=eta_c, chi_b=self.chi,
                               chi_c=self.chi, repo_spread_blend=self.funded_spread)


def portfolio_blend(assets: Sequence[BlendedAsset | tuple], protection: float) -> Blend:
    """Effective (chi_bar, chi, funded spread) of a posted asset portfolio.

    Weights are w_i = (1-h_csa_i) * A_i / L against the protection amount L;
    the adjusted spread per asset is S_pi = (1 - (h_pi-h_ci)+/(1-h_ci)) *
    (r_pi - r), capping the excess-fund case at the CSA-protected amount.
    """
    if protection <= 0.0:
        raise CollateralError("protection L must be > 0")
    chi_bar = 0.0
    funded = 0.0
    wsum = 0.0
    for a in assets:
        a = BlendedAsset(*a)
        if not 0.0 <= a.h_csa < 1.0 or not 0.0 <= a.h_repo < 1.0:
            raise CollateralError("haircuts must be in [0, 1)")
        if a.market_value < 0.0:
            raise CollateralError("market values must be >= 0")
        w = (1.0 - a.h_csa) * a.market_value / protection
        wsum += w
        unfunded = max(a.h_repo - a.h_csa, 0.0) / (1.0 - a.h_csa)
        chi_bar += w * unfunded
        funded += w * (1.0 - unfunded) * a.repo_spread
    if wsum > 1.0 + 1e-9:
        raise CollateralError(f"blend weights sum to {wsum:.6g} > 1")
    return Blend(chi_bar=chi_bar, chi=1.0 - chi_bar, funded_spread=funded)


def blend_spread_curve(assets: Sequence[tuple[float, float, float, RateCurve]],
                       protection: float, risk_free_label: str = "") -> tuple[float, RateCurve]:
    """Blend with term-structured repo spreads.

    Each entry is (market_value, h_csa, h_repo, spread_curve) with the
    spread curve holding r_p - r. Returns (chi, funded spread curve); the
    curve carries sum_i w_i * S_pi(t), exact on the union node grid.
    """
    if protection <= 0.0:
        raise CollateralError("protection L must be > 0")
    curves: list[RateCurve] = []
    weights: list[float] = []
    chi_bar = 0.0
    for mv, h_c, h_p, spread in assets:
        w = (1.0 - h_c) * mv / protection
        unfunded = max(h_p - h_c, 0.0) / (1.0 - h_c)
        chi_bar += w * unfunded
        curves.append(spread)
        weights.append(w * (1.0 - unfunded))
    blended = combine_curves(curves, weights, label=risk_free_label or "blended_spread")
    return 1.0 - chi_bar, blended


# -- assets CSV -------------------------------------------------------------

_ASSET_HEADER = ["id", "price", "quantity", "h_csa", "h_repo", "h_lcr",
                 "ec_AA", "ec_A", "ec_BBB", "ec_BB"]


def load_assets_csv(path) -> list[CollateralAsset]:
    """Read collateral assets from CSV.

    Header: ``id,price,quantity,h_csa,h_repo,h_lcr,ec_AA,ec_A,ec_BBB,ec_BB``
    with economic capital in decimals (0.0161 means 1.61%).
    """
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != _ASSET_HEADER:
            raise CollateralError(f"{path}: expected header {','.join(_ASSET_HEADER)}")
        out = []
        for row in reader:
            out.append(CollateralAsset(
                id=row["id"],
                price=float(row["price"]),
                quantity=float(row["quantity"]),
                h_csa=float(row["h_csa"]),
                h_repo=float(row["h_repo"]),
                h_lcr=float(row["h_lcr"]),
                econ_capital={r: float(row[f"ec_{r}"]) for r in RATING_KEYS},
            ))
    return out


def save_assets_csv(assets: Sequence[CollateralAsset], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(_ASSET_HEADER)
        for a in assets:
            writer.writerow([a.id, f"{a.price:.6g}", f"{a.quantity:.6g}",
                             f"{a.h_csa:.6g}", f"{a.h_repo:.6g}", f"{a.h_lcr:.6g}"]
                            + [f"{a.econ_capital.get(r, 0.0):.6g}" for r in RATING_KEYS])
