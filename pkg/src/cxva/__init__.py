"""cxva: pricing and optimizing derivatives under imperfect collateral.

Building blocks: zero curves with exact segment integrals, the (eta, chi)
collateralization state, the switching effective discount rate, break-even
term repo spreads, a Crank-Nicolson PDE pricer, swap exposure profiles,
the CVA/DVA/CFA/DFA/LVA/colVA quadrature, and an LP-based collateral
allocator with an HQLA floor.
"""

from .curves import PartyCurves, RateCurve, combine_curves
from .collateral import (BlendedAsset, CollateralAsset, CollateralState, CsaTerms,
                         chi, eta, portfolio_blend)
from .discounting import EffectiveRateSpec, effective_rate, switching_discount_factor
from .repo import RepoModelParams, breakeven_spread, repo_curve, spread_curve
from .exposure import (DeterministicModel, ExposureProfile, OneFactorMcModel, Swap,
                       exposure_profile, generate_portfolio)
from .xva import XvaReport, colva_bk, decompose, lva_receivable, to_running_spread
from .pde import GridSpec, OptionSpec, solve, xva_pde
from .optimizer import (Allocation, AllocationProblem, NettingSet, iterate_allocation,
                        solve_lp, unit_lva)

__all__ = [
    "Allocation", "AllocationProblem", "BlendedAsset", "CollateralAsset",
    "CollateralState", "CsaTerms", "DeterministicModel", "EffectiveRateSpec",
    "ExposureProfile", "GridSpec", "NettingSet", "OneFactorMcModel", "OptionSpec",
    "PartyCurves", "RateCurve", "Swap", "RepoModelParams", "XvaReport", "breakeven_spread", "chi",
    "colva_bk", "combine_curves", "decompose", "effective_rate", "eta",
    "exposure_profile", "generate_portfolio", "iterate_allocation",
    "lva_receivable", "portfolio_blend", "repo_curve", "solve", "solve_lp",
    "spread_curve", "switching_discount_factor", "to_running_spread", "unit_lva",
    "xva_pde",
]

__version__ = "0.1.0"
