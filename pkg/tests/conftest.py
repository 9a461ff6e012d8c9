"""Shared fixtures and the fixed parameter grids of the verification suite.

The grids are pinned here (not randomized per run) so failures reproduce.
Parameter choices respect the validity ranges of each recipe and keep the
truncated lattices within double-precision reach: the Meixner recipes put
a weight >= 6 on the exponent that controls how fast the kernel columns
decay past the truncation window, which keeps the certified windows at a
few hundred points.
"""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from askeychain import ConvolutionRecipe, ConvType, Family, build_kernel

# (family, conv_type) -> list of parameter tuples; 13 exposed combinations
# (meixner type ii is the alias of type i and is exercised through it)
FINITE_GRID = {
    (Family.KRAWTCHOUK, ConvType.I): [(0.3, 0.5), (0.5, 0.5), (0.7, 0.2)],
    (Family.KRAWTCHOUK, ConvType.II): [(0.2, 0.6), (0.5, 0.5), (0.6, 0.3)],
    (Family.KRAWTCHOUK, ConvType.III): [(0.4, 0.5), (0.3, 0.7), (0.8, 0.2)],
    (Family.HAHN, ConvType.I): [(1.0, 2.0, 3.0), (0.5, 0.5, 0.5), (2.0, 1.0, 0.7)],
    (Family.HAHN, ConvType.II): [(1.0, 0.5, 1.0), (2.0, 0.3, 1.5), (0.7, 1.0, 0.4)],
    (Family.HAHN, ConvType.III): [(1.0, 2.0, 1.0), (0.5, 1.0, 2.0), (2.0, 0.4, 0.6)],
    (Family.Q_HAHN, ConvType.I): [
        (0.3, 0.5, 0.4, 0.5),
        (0.5, 0.3, 0.6, 0.7),
        (0.2, 0.6, -0.3, 0.6),
    ],
    (Family.Q_HAHN, ConvType.III): [
        (0.3, 0.5, 0.4, 0.5),
        (0.6, 0.2, 0.3, 0.7),
        (0.4, -0.5, 0.5, 0.6),
    ],
}

TRUNCATED_GRID = {
    (Family.CHARLIER, ConvType.I): [(0.4, 0.8), (0.2, 0.5), (0.6, 1.2)],
    (Family.CHARLIER, ConvType.III): [(1.0, 0.4), (0.5, 0.5), (2.0, 0.3)],
    (Family.MEIXNER, ConvType.I): [(1.0, 6.0, 0.2), (0.5, 7.0, 0.25), (2.0, 7.0, 0.25)],
    (Family.MEIXNER, ConvType.II): [(1.0, 6.0, 0.2), (0.5, 7.0, 0.25), (2.0, 7.0, 0.25)],
    (Family.MEIXNER, ConvType.III): [(6.0, 0.2, 1.0), (7.0, 0.25, 0.5), (6.0, 0.25, 2.0)],
}

ACCEPT_NS = (5, 20, 50)
ACCEPT_TAIL_EPS = 1e-12

# grid for the Hahn type ii dual-representation check.  The alternating
# finite sum and the terminating-series evaluation agree to 1e-12 relative
# only where the eigenvalue stays well away from its zero crossings and
# term growth stays mild; the slow-decay regime (large a and c, small b)
# provides that with an order-of-magnitude margin.
HAHN2_DUAL_GRID = [(11.0, 0.3, 10.0), (12.0, 0.5, 10.0), (10.0, 0.6, 10.0)]


def all_combos():
    return list(FINITE_GRID) + list(TRUNCATED_GRID)


def grid_recipes():
    """Every (recipe, N-or-None) pair of the fixed grid at the largest N."""
    out = []
    for (fam, t), plist in FINITE_GRID.items():
        for params in plist:
            out.append((ConvolutionRecipe(fam, t, params), 20))
    for (fam, t), plist in TRUNCATED_GRID.items():
        for params in plist:
            out.append((ConvolutionRecipe(fam, t, params), None))
    return out


@pytest.fixture(scope="session")
def kernel_cache():
    """Kernels are deterministic; build each (recipe, N) once per session."""
    cache = {}

    def get(recipe, N=None, tail_eps=ACCEPT_TAIL_EPS):
        key = (recipe.family, recipe.conv_type, recipe.params, N, tail_eps)
        if key not in cache:
            cache[key] = build_kernel(recipe, N=N, tail_eps=tail_eps)
        return cache[key]

    return get
