#!/usr/bin/env python3
"""Collateralization sweep for the at-the-money call.

Prices the long and the short position across eleven collateralization
levels, splitting total XVA into its counterparty-risk part (collateral
legs earning risk-free) and the collateral-liquidity remainder. Output:
out/option_sweep/sweep.csv with columns
collateralization,cra_long,xva_long,cra_short,xva_short.
"""

import sys
from pathlib import Path

from cxva.cli import main

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    sys.exit(main(["sweep",
                   "--scenario", str(ROOT / "scenarios" / "atm_call.json"),
                   "--out", str(ROOT / "out" / "option_sweep")]))
