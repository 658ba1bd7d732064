"""Constants and helpers shared between test modules and the conftest
hooks (kept out of conftest.py so both test directories can import their
own helpers without module-name collisions)."""
from __future__ import annotations

import numpy as np

# pointwise closed-form comparisons use a coarser mask threshold: at the
# default 1e-12 the factor 1/w amplifies double-precision round-off near the
# mask edge far beyond the comparison tolerances, although the integrals and
# residual norms (density-weighted) are unaffected
POINTWISE_EPS = 1e-6

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def record_criterion(name: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE_RESULTS.append((name, passed, detail))
    line = f"{'PASS' if passed else 'FAIL'} {name}" + (f"  [{detail}]" if detail else "")
    print(line)
    assert passed, line


def max_err_where(mask: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    """Max absolute difference over mask, NaN-safe outside it."""
    return float(np.max(np.abs(np.where(mask, a - b, 0.0))))
