import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import lipfree as L
import oracles as O


def line(*pts):
    t = np.array(pts, dtype=float)
    return L.validate_space(np.abs(t[:, None] - t[None, :]))


def norm(M, w):
    return L.kr_norm_primal(M, L.Chain(M, w)).cost


# -- chains ------------------------------------------------------------------------


def test_chain_construction():
    M = line(0, 1, 3)
    mu = L.Chain(M, {1: 1.0, 2: 1.0, 0: -2.0})
    assert mu.support == [0, 1, 2]
    assert L.Chain(M, {1: 1.0, 2: -1.0, 0: 1e-13}).support == [1, 2]
    assert L.Chain.delta(M, 2).weights == {0: -1.0, 2: 1.0}
    assert L.Chain.delta(M, 0).weights == {}
    with pytest.raises(L.UnbalancedChain):
        L.Chain(M, {1: 1.0})
    with pytest.raises(IndexError):
        L.Chain(M, {5: 1.0, 0: -1.0})


def test_chain_arithmetic():
    M = line(0, 1, 3)
    a, b = L.Chain.delta(M, 1), L.Chain.delta(M, 2)
    assert (a + b).weights == {0: -2.0, 1: 1.0, 2: 1.0}
    assert (a - a).weights == {}
    assert (2 * a).weights == {0: -2.0, 1: 2.0}
    assert (-a).weights == {0: 1.0, 1: -1.0}


# -- norm examples -----------------------------------------------------------------


def test_norm_examples():
    M = line(0, 1, 3)
    assert norm(M, {0: 1.0, 2: -1.0}) == pytest.approx(3.0)
    flow, cert = L.kr_norm(M, L.Chain(M, {1: 1.0, 2: 1.0, 0: -2.0}))
    assert flow.cost == pytest.approx(4.0)
    assert cert.value == pytest.approx(4.0)
    assert norm(M, {}) == 0.0
    cert = L.kr_norm_dual(M, L.Chain(M, {}))
    assert cert.value == 0.0 and cert.f.norm == 0.0


def test_dual_of_molecule_pair(spaces):
    C = spaces["circle"]
    cert = L.kr_norm_dual(C, L.Chain(C, {3: 1.0, 70: -1.0}))
    assert cert.value == pytest.approx(C.d(3, 70))
    assert cert.f.slope(3, 70) == pytest.approx(1.0)
    assert cert.f(C.base) == 0.0
    assert cert.f.norm <= 1 + 1e-9


def test_unbalanced_rejected():
    M = line(0, 1, 3)
    mu = L.Chain(M, {0: 1.0, 1: -1.0})
    object.__setattr__(mu, "weights", {0: 1.0})
    with pytest.raises(L.UnbalancedChain):
        L.kr_norm_primal(M, mu)


@pytest.mark.parametrize("seed", range(30))
def test_primal_dual_against_lp(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 30))
    M = L.build("random", n=n, seed=seed, method=("cube", "closure")[seed % 2],
                norm=("euclidean", "sup", "taxicab")[seed % 3])
    w = O.random_chain(rng, n)
    mu = L.Chain(M, w)
    flow, cert = L.kr_norm(M, mu)
    ref = O.transport_lp(M.dist, mu.weights)
    assert flow.cost == pytest.approx(ref, rel=1e-9, abs=1e-12)
    assert abs(flow.cost - cert.value) <= L.tol_gap(flow.cost)
    assert cert.f.norm <= 1 + 1e-9
    assert np.allclose(flow.divergence(n), mu.dense(), atol=1e-12)
    assert flow.cost == pytest.approx(sum(fl * M.d(a, b) for a, b, fl in flow.arcs))


@pytest.mark.parametrize("seed", range(25))
def test_small_integer_chains_against_enumeration(seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(2, 9))
    M = L.build("random", n=n, seed=seed, method=("cube", "closure")[seed % 2])
    mu = L.Chain(M, O.random_chain(rng, n, integer=True))
    assert norm(M, mu.weights) == pytest.approx(O.transport_enumerate(M.dist, mu.weights),
                                                abs=1e-9)


@given(st.integers(0, 10_000), st.floats(-5, 5))
@settings(max_examples=40, deadline=None)
def test_norm_axioms(seed, c):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 20))
    M = L.build("random", n=n, seed=seed, method="closure")
    mu, nu = L.Chain(M, O.random_chain(rng, n)), L.Chain(M, O.random_chain(rng, n))
    a, b = norm(M, mu.weights), norm(M, nu.weights)
    assert norm(M, (mu * c).weights) == pytest.approx(abs(c) * a, rel=1e-9, abs=1e-9)
    s = norm(M, (mu + nu).weights)
    assert s <= a + b + L.tol_gap(a + b)


# -- molecules ---------------------------------------------------------------------


def test_molecule_norm_and_orientation(spaces):
    T = spaces["r_tree_star"]
    m = L.molecule(T, 5, 40)
    assert L.kr_norm_primal(T, m.chain).cost == pytest.approx(1.0)
    r = L.molecule(T, 40, 5)
    assert r.chain.weights == (-m.chain).weights
    two = line(0, 2.5)
    assert L.kr_norm_primal(two, L.molecule(two, 0, 1).chain).cost == pytest.approx(1.0)
    with pytest.raises(L.DegeneratePair):
        L.molecule(two, 1, 1)


def test_slice_membership(spaces):
    C = spaces["circle"]
    m = L.molecule(C, 10, 50).chain
    cert = L.kr_norm_dual(C, m)
    assert L.slice_membership(C, cert.f, 1e-6, m)
    f = L.f_xy(C, 10, 50, rebase=True)
    assert L.slice_membership(C, f, 0.1, m)
    g = L.f_xy(C, 0, 128, rebase=True)
    orth = L.molecule(C, 60, 196).chain
    assert abs(orth.pair(g)) < 1e-12
    assert not L.slice_membership(C, g, 0.5, orth)
    with pytest.raises(L.NotNormalized):
        L.slice_membership(C, f.scaled(2.0), 0.1, m)
    with pytest.raises(L.NotNormalized):
        L.slice_membership(C, f, 0.1, m * 2.0)


def test_molecule_decompose():
    M = line(0, 0.5, 1)
    coeffs, parts = L.molecule_decompose(M, 0, 2, 1)
    assert coeffs == (0.5, 0.5)
    M = line(0, 0.25, 1)
    coeffs, parts = L.molecule_decompose(M, 0, 2, 1)
    assert coeffs == (0.25, 0.75)
    combo = coeffs[0] * parts[0].chain.dense() + coeffs[1] * parts[1].chain.dense()
    assert np.allclose(combo, L.molecule(M, 0, 2).chain.dense(), atol=1e-15)


def test_molecule_decompose_gap(ti, gap_pair):
    x, y = gap_pair
    for z in range(ti.n):
        if z not in gap_pair:
            with pytest.raises(L.NotBetween):
                L.molecule_decompose(ti, x, y, z)


def test_molecule_decompose_identity_on_interval():
    I = L.build("interval", n=17)
    for z in range(1, 16):
        coeffs, parts = L.molecule_decompose(I, 0, 16, z)
        assert sum(coeffs) == pytest.approx(1.0)
        combo = coeffs[0] * parts[0].chain.dense() + coeffs[1] * parts[1].chain.dense()
        assert np.allclose(combo, L.molecule(I, 0, 16).chain.dense(), atol=1e-12)
