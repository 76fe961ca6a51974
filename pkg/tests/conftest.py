"""Shared fixtures: jets are expensive enough to build once per session."""

from __future__ import annotations

import pytest

from bergman.geometry import (
    flat_potential,
    fs_product_potential,
    jet_from_potential,
    parse_potential,
    random_potential,
)

CROSSCHECK_SEEDS = tuple(range(1, 21))


@pytest.fixture(scope="session")
def jet_cache():
    cache = {}

    def get(kind: str, n: int, q: int, seed: int = 0, rk_e: int = 1, twist=None):
        key = (kind, n, q, seed, rk_e, twist)
        if key not in cache:
            if kind == "flat":
                phi = flat_potential(n, q)
            elif kind == "fs":
                phi = fs_product_potential(n, q)
            elif kind == "random":
                phi = random_potential(n, q, seed)
            else:
                raise ValueError(kind)
            phi_e = None
            if twist is not None:
                phi_e = parse_potential(
                    {f"z{j + 1} zb{j + 1}": [{"pi_pow": 1, "re": str(c), "im": "0"}]
                     for j, c in enumerate(twist)}, n)
            cache[key] = jet_from_potential(phi, phi_e, n=n, q=q, rk_e=rk_e)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def batch_jets(jet_cache):
    """The seeded mixed-signature batch used by the cross-check criteria."""
    return [jet_cache("random", 2, 1, seed) for seed in CROSSCHECK_SEEDS]
