"""Shared fixtures: exhaustive corpora, seeded samples, standard graphs."""

from __future__ import annotations

import itertools
import random

import pytest

from fmlocal import (
    BINARY_GRAPH_VOCAB,
    Structure,
    canonical_form,
    generate,
    iso_classes,
)

SESSION_SEED = 20260822


@pytest.fixture(scope="session")
def vocab():
    return BINARY_GRAPH_VOCAB


@pytest.fixture(scope="session")
def classes_le2():
    """One representative per isomorphism class, universe 1..2."""
    return [
        rep for size in (1, 2) for _, rep, _ in iso_classes(BINARY_GRAPH_VOCAB, size)
    ]


@pytest.fixture(scope="session")
def classes_le3():
    """One representative per isomorphism class, universe 1..3."""
    return [
        rep
        for size in (1, 2, 3)
        for _, rep, _ in iso_classes(BINARY_GRAPH_VOCAB, size)
    ]


@pytest.fixture(scope="session")
def sample4():
    """A seeded, deduplicated sample of size-4 structures."""
    rng = random.Random(SESSION_SEED)
    seen = set()
    out = []
    for _ in range(40):
        density = rng.uniform(0.1, 0.7)
        s = generate("random", 4, density=density, seed=rng.randrange(1 << 30))
        key = canonical_form(s)
        if key not in seen:
            seen.add(key)
            out.append(s)
    return out


@pytest.fixture(scope="session")
def k2():
    return generate("clique", 2)


@pytest.fixture(scope="session")
def k3():
    return generate("clique", 3)


@pytest.fixture(scope="session")
def c4():
    return generate("cycle", 4)


@pytest.fixture(scope="session")
def path4():
    return generate("path", 4)


def symmetric_structures(n: int) -> list[Structure]:
    """All labeled loop-free symmetric structures on n elements."""
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    out = []
    for bits in range(1 << len(pairs)):
        edges = set()
        for idx, (i, j) in enumerate(pairs):
            if bits >> idx & 1:
                edges.add((i, j))
                edges.add((j, i))
        out.append(Structure(BINARY_GRAPH_VOCAB, n, {"E": edges}))
    return out


def dedupe(structures) -> list[Structure]:
    seen = set()
    out = []
    for s in structures:
        key = canonical_form(s)
        if key not in seen:
            seen.add(key)
            out.append(s)
    return out
