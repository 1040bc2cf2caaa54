"""Crank-Nicolson solver for the Black-Scholes PDE under the switching
effective discount rate.

    dV/dt + (r_s - q) S dV/dS + 1/2 sigma^2 S^2 d2V/dS2 - r_e V = 0

r_e depends on sign(V) (liability-side switching) and on the
collateralization state, so each backward step is mildly nonlinear: the
sign-frozen linear system is solved and Picard-iterated until the value
stops moving. Rannacher startup (two implicit half-steps) damps the payoff
kink. Boundaries: at S = 0 the PDE degenerates to the reaction ODE on its
own; at S_max the second derivative is dropped (payoff linearity) with
one-sided convection.
"""

from __future__ import annotations

from dataclasses import dataclass
from collections.abc import Callable

import numpy as np
from scipy.linalg import solve_banded

from .curves import RateCurve
from .discounting import EffectiveRateSpec, blend_rate


class PdeError(ValueError):
    """Invalid PDE inputs."""


class PicardConvergenceError(RuntimeError):
    """Sign-switching iteration failed to converge within the allowed sweeps."""

    def __init__(self, t: float, residual: float, iterations: int):
        self.t = t
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"Picard iteration did not converge at t={t:.6g}: "
            f"residual {residual:.3e} after {iterations} sweeps")


@dataclass(frozen=True)
class OptionSpec:
    """European payoff on a single underlier.

    ``position`` scales the terminal payoff (+1 long, -1 short); ``zcb`` is
    a unit cash payoff used for consistency checks. ``stock_financing``
    defaults to the risk-free curve of the rate spec at solve time.
    """

    payoff: str  # "call" | "put" | "zcb" | "custom"
    strike: float
    maturity: float
    spot: float
    vol: float
    div_yield: float = 0.0
    stock_financing: RateCurve | None = None
    position: float = 1.0
    custom_payoff: tuple[tuple[float, ...], tuple[float, ...]] | None = None

    def __post_init__(self) -> None:
        if self.spot <= 0.0 or self.vol <= 0.0 or self.maturity <= 0.0:
            raise PdeError("spot, vol and maturity must be > 0")
        if self.payoff not in ("call", "put", "zcb", "custom"):
            raise PdeError("payoff must be call, put, zcb or custom")
        if self.payoff in ("call", "put") and self.strike <= 0.0:
            raise PdeError("call/put needs a positive strike")
        if self.payoff == "custom" and self.custom_payoff is None:
            raise PdeError("custom payoff needs tabulated (S, H) points")

    def terminal_value(self, s: np.ndarray) -> np.ndarray:
        if self.payoff == "call":
            h = np.maximum(s - self.strike, 0.0)
        elif self.payoff == "put":
            h = np.maximum(self.strike - s, 0.0)
        elif self.payoff == "zcb":
            h = np.ones_like(s)
        else:
            xs, hs = self.custom_payoff
            h = np.interp(s, np.asarray(xs, dtype=float), np.asarray(hs, dtype=float))
        return self.position * h


@dataclass(frozen=True)
class GridSpec:
    s_nodes: int = 400
    t_steps: int = 400
    s_max_mult: float = 5.0
    scheme: str = "crank_nicolson"
    picard_tol: float = 1e-10
    picard_max_iter: int = 30

    def __post_init__(self) -> None:
        if self.s_nodes < 50 or self.t_steps < 50:
            raise PdeError("grid needs at least 50 space nodes and 50 time steps")
        if self.picard_tol <= 0.0:
            raise PdeError("picard_tol must be > 0")
        if self.scheme != "crank_nicolson":
            raise PdeError("only the crank_nicolson scheme is supported")


@dataclass(frozen=True)
class PdeSolution:
    s: np.ndarray
    v0: np.ndarray
    value: float
    max_picard_iters: int

    def value_at(self, spot: float) -> float:
        return float(np.interp(spot, self.s, self.v0))


CollateralSchedule = Callable[[float, np.ndarray], np.ndarray]


def _node_rates(spec: EffectiveRateSpec, t: float, v: np.ndarray,
                schedule: CollateralSchedule | None) -> np.ndarray:
    """Per-node effective rate from the sign of v (V=0 counts as a payable)."""
    pos = v > 0.0
    if schedule is None:
        eta = np.where(pos, spec.eta(+1, t), spec.eta(-1, t))
    else:
        protection = np.maximum(np.asarray(schedule(t, v), dtype=float), 0.0)
        absv = np.abs(v)
        eta = np.where(absv > 1e-300, np.minimum(protection / np.maximum(absv, 1e-300), 1.0), 1.0)
        if spec.mode == "uncollateralized":
            eta = np.zeros_like(eta)
    chi = np.where(pos, spec.chi(+1, t), spec.chi(-1, t))
    f_unsec = np.where(pos, spec.party_c.bond.forward_rate(t),
                       spec.party_b.bond.forward_rate(t))
    f_mu = np.where(pos, spec.party_c.liquidity.forward_rate(t),
                    spec.party_b.liquidity.forward_rate(t))
    f_r = spec.risk_free.forward_rate(t)
    f_s = np.where(pos, spec.funded_spread_curve(+1).forward_rate(t),
                   spec.funded_spread_curve(-1).forward_rate(t))
    return blend_rate(f_unsec, f_mu, f_r, f_s, eta, chi)


def _operator(s: np.ndarray, ds: float, conv: float, sigma: float,
              rho: np.ndarray):
    """Tridiagonal space operator A with AV ~ (r_s-q)S V' + 0.5 sig^2 S^2 V'' - rho V.

    Returns (lower, diag, upper) bands. The S=0 row reduces to -rho by
    itself since both S-terms vanish; the far boundary drops the second
    derivative and takes one-sided convection.
    """
    n = len(s)
    d1 = conv * s / (2.0 * ds)
    d2 = 0.5 * sigma * sigma * s * s / (ds * ds)
    lower = d2 - d1
    diag = -2.0 * d2 - rho
    upper = d2 + d1
    lower[-1] = -conv * s[-1] / ds
    diag[-1] = conv * s[-1] / ds - rho[-1]
    upper[0] = 0.0  # S=0 row: d1=d2=0 already, keep explicit
    lower[0] = 0.0
    return lower, diag, upper


def _apply(lower, diag, upper, v):
    out = diag * v
    out[1:] += lower[1:] * v[:-1]
    out[:-1] += upper[:-1] * v[1:]
    return out


def _solve_tridiag(lower, diag, upper, rhs):
    n = len(diag)
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    return solve_banded((1, 1), ab, rhs)


def solve(option: OptionSpec, rates: EffectiveRateSpec, grid: GridSpec, *,
          collateral_schedule: CollateralSchedule | None = None,
          risk_free_override: bool = False) -> PdeSolution:
    """Backward-solve the option value under the effective switching rate.

    ``risk_free_override`` prices with r_e = r everywhere (the risk-free
    value V*). ``collateral_schedule`` maps (t, V-array) to a protection
    amount L per node; eta is then min(1, L/|V|) with eta = 1 at V = 0.
    """
    ref = max(option.spot, option.strike if option.strike > 0 else option.spot)
    s_max = grid.s_max_mult * ref
    s = np.linspace(0.0, s_max, grid.s_nodes + 1)
    ds = s[1] - s[0]
    dt = option.maturity / grid.t_steps
    financing = option.stock_financing or rates.risk_free
    sigma = option.vol

    def rho_at(t: float, v_ref: np.ndarray) -> np.ndarray:
        if risk_free_override:
            return np.full(len(s), rates.risk_free.forward_rate(t))
        return np.asarray(_node_rates(rates, t, v_ref, collateral_schedule), dtype=float) \
            * np.ones(len(s))

    v = option.terminal_value(s)
    max_iters = 0

    # Rannacher startup: the first interval as two implicit half-steps
    times = np.linspace(option.maturity, 0.0, grid.t_steps + 1)
    steps: list[tuple[float, float, float]] = []  # (theta, start, end)
    steps.append((1.0, times[0], times[0] - dt / 2.0))
    steps.append((1.0, times[0] - dt / 2.0, times[1]))
    for k in range(1, grid.t_steps):
        steps.append((0.5, times[k], times[k + 1]))

    for theta, t_start, t_new in steps:
        h = t_start - t_new
        conv_old = financing.forward_rate(t_start) - option.div_yield
        conv_new = financing.forward_rate(t_new) - option.div_yield
        rho_old = rho_at(t_start, v)
        lo_o, di_o, up_o = _operator(s, ds, conv_old, sigma, rho_old)
        rhs = v + (1.0 - theta) * h * _apply(lo_o, di_o, up_o, v)

        guess = v
        for it in range(1, grid.picard_max_iter + 1):
            rho_new = rho_at(t_new, guess)
            lo_n, di_n, up_n = _operator(s, ds, conv_new, sigma, rho_new)
            v_new = _solve_tridiag(-theta * h * lo_n, 1.0 - theta * h * di_n,
                                   -theta * h * up_n, rhs)
            residual = float(np.max(np.abs(v_new - guess))) / max(1.0, float(np.max(np.abs(v_new))))
            guess = v_new
            if residual < grid.picard_tol:
                break
        else:
            raise PicardConvergenceError(t_new, residual, grid.picard_max_iter)
        max_iters = max(max_iters, it)
        v = guess

    return PdeSolution(s=s, v0=v, value=float(np.interp(option.spot, s, v)),
                       max_picard_iters=max_iters)


@dataclass(frozen=True)
class XvaPdeResult:
    v_star: float
    v: float
    u: float
    risk_free: PdeSolution
    adjusted: PdeSolution


def xva_pde(option: OptionSpec, rates: EffectiveRateSpec, grid: GridSpec, *,
            collateral_schedule: CollateralSchedule | None = None) -> XvaPdeResult:
    """Risk-free value, adjusted value and their difference U = V* - V."""
    star = solve(option, rates, grid, risk_free_override=True)
    adj = solve(option, rates, grid, collateral_schedule=collateral_schedule)
    return XvaPdeResult(v_star=star.value, v=adj.value, u=star.value - adj.value,
                        risk_free=star, adjusted=adj)
