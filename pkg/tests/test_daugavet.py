import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import lipfree as L
import oracles as O

SE = L.Verdict.STRONGLY_EXPOSED_CANDIDATE


def line(*pts):
    t = np.array(pts, dtype=float)
    return L.validate_space(np.abs(t[:, None] - t[None, :]))


# -- Gromov-product infimum ---------------------------------------------------------


def test_gromov_infimum_examples(ti, gap_pair):
    x, y = gap_pair
    assert L.gromov_infimum(ti, x, y, 0.5) >= 0.5
    assert L.gromov_infimum(ti, x, y, 0.5) == pytest.approx(
        O.gromov_inf(ti.dist, x, y, 0.5, ti.snap))
    I = L.build("interval", n=65)
    assert L.gromov_infimum(I, 30, 32, I.d(30, 32) / 2) == 0.0
    assert L.gromov_infimum(line(0, 1), 0, 1, 0.5) == math.inf
    with pytest.raises(ValueError):
        L.gromov_infimum(I, 1, 2, 0.0)


# -- classification -------------------------------------------------------------------


def test_classify_pair_examples(ti, gap_pair):
    rec = L.classify_pair(ti, *gap_pair)
    assert rec.verdict is SE
    assert rec.segment_size == 2
    assert rec.z_margin == pytest.approx(1.0)
    assert tuple(rec.pair) == gap_pair
    I = L.build("interval", n=65)
    assert L.classify_pair(I, 0, 64).verdict is L.Verdict.Z_WITNESSED
    T = L.validate_space([[0, 2, 1], [2, 0, 1], [1, 1, 0]])
    rec = L.classify_pair(T, 0, 1)
    assert rec.verdict is L.Verdict.Z_WITNESSED and rec.z_margin == 0.0


def test_classify_pair_orientation(ti, gap_pair):
    x, y = gap_pair
    rec = L.classify_pair(ti, y, x)
    assert tuple(rec.pair) == (y, x)


def test_classify_all_examples(ti, gap_pair):
    C = L.build("circle", n=64)
    s = L.classify_all(C)
    assert s.strongly_exposed_resolved == []
    # closest pairs are the only trivial segments on the grid circle
    assert len(s.strongly_exposed) == 64
    s = L.classify_all(ti)
    assert [tuple(p) for p in s.strongly_exposed_resolved] == [tuple(sorted(gap_pair))]
    s = L.classify_all(line(0, 1))
    assert s.pair_count == 1 and len(s.strongly_exposed) == 1


def test_classify_all_threads_agree(ti):
    a = L.classify_all(ti, threads=1)
    b = L.classify_all(ti, threads=4)
    assert [r.as_dict() for r in a.records] == [r.as_dict() for r in b.records]


def test_threads_from_env(monkeypatch):
    monkeypatch.setenv("LIPFREE_THREADS", "3")
    assert L.daugavet.threads_from_env() == 3
    monkeypatch.delenv("LIPFREE_THREADS")
    assert L.daugavet.threads_from_env() >= 1


@given(st.integers(0, 10_000), st.integers(2, 12), st.sampled_from(["cube", "closure"]))
@settings(max_examples=40, deadline=None)
def test_classification_against_oracle(seed, n, method):
    M = L.build("random", n=n, seed=seed, method=method)
    D = M.dist
    tol = M.cfg.tol_eq * M.diameter
    for rec in L.classify_all(M).records:
        x, y = rec.pair
        seg = O.segment(D, x, y, tol)
        assert rec.segment_size == len(seg)
        assert (rec.verdict is SE) == (len(seg) == 2)
        ref = O.gromov_inf(D, x, y, D[x][y] / 2, M.snap)
        assert rec.gromov_inf_xy == pytest.approx(ref, abs=1e-9) or (
            math.isinf(ref) and math.isinf(rec.gromov_inf_xy))


# -- peaking ----------------------------------------------------------------------------


def test_peak_verify_examples(ti, gap_pair):
    g = L.peaking_candidate(ti, *gap_pair, 0.1)
    assert L.peak_verify(ti, *gap_pair, g, 0.25) > 0
    assert L.classify_pair(ti, *gap_pair).verdict is SE
    I = L.build("interval", n=65)
    assert L.peak_verify(I, 0, 64, L.f_xy(I, 0, 64), 0.1) <= 0
    assert L.peak_verify(ti, *gap_pair, g, ti.diameter) == 1.0


def test_peak_verify_errors(ti, gap_pair):
    x, y = gap_pair
    with pytest.raises(L.NotNormOne):
        L.peak_verify(ti, x, y, L.f_xy(ti, x, y).scaled(2.0), 0.25)
    with pytest.raises(L.NotSlopeOneAtPair):
        L.peak_verify(ti, x, y, L.f_xy(ti, x, y).scaled(0.5), 0.25)


# -- Daugavet pair search ------------------------------------------------------------


def test_find_pair_circle(spaces):
    C = spaces["circle"]
    res = L.find_daugavet_pair(C, [0, 64], L.f_xy(C, 10, 11), 0.1)
    assert res.found and res.achieved_margin >= 0.9
    u, v = res.pair
    assert res.slope > 0.9
    assert res.achieved_margin == pytest.approx(L.daugavet_margin(C, [0, 64], u, v))


def test_find_pair_invariant_against_brute_force(spaces):
    C = L.build("circle", n=48)
    N = [0, 7, 30]
    g = L.f_xy(C, 3, 20)
    res = L.find_daugavet_pair(C, N, g, 0.2)
    D = C.dist
    best = -1.0
    for u in range(C.n):
        for v in range(C.n):
            if u == v or u in N or v in N or g.slope(u, v) <= 0.8:
                continue
            m = min((D[x, u] + D[y, v]) / (D[x, y] + D[u, v]) for x in N for y in N)
            best = max(best, m)
    assert res.achieved_margin == pytest.approx(best)
    if res.found:
        u, v = res.pair
        for x in N:
            for y in N:
                assert res.achieved_margin * (D[x, y] + D[u, v]) <= D[x, u] + D[y, v] + 1e-12


def test_find_pair_absent_on_gap(ti, gap_pair):
    for g in (L.f_xy(ti, *gap_pair), L.peaking_candidate(ti, *gap_pair, 0.1)):
        res = L.find_daugavet_pair(ti, list(gap_pair), g, 0.05)
        assert not res.found
        assert res.achieved_margin < 0.95


def test_find_pair_base_subset():
    C = L.build("circle", n=32)
    res = L.find_daugavet_pair(C, [C.base], L.f_xy(C, 3, 4), 1.0)
    assert res.found


def test_find_pair_requires_norm_one(spaces):
    C = spaces["circle"]
    with pytest.raises(L.NotNormOne):
        L.find_daugavet_pair(C, [0], L.f_xy(C, 0, 5).scaled(0.5), 0.1)


def test_found_pair_feeds_extension():
    C = L.build("circle", n=128)
    for seed in range(5):
        rng = np.random.default_rng(seed)
        N = sorted(rng.choice(C.n, size=3, replace=False).tolist())
        f = L.f_xy(C, 0, 64)
        res = L.find_daugavet_pair(C, N, f, 0.1)
        assert res.found
        eps = res.extension_eps() + 1e-12
        F = L.daugavet_extension(C, N, f.values[N], *res.pair, eps)
        u, v = res.pair
        assert F(u) - F(v) >= C.d(u, v) - 1e-9


def test_slice_witness(spaces):
    C = spaces["circle"]
    mu = L.molecule(C, 0, 5).chain
    value, pair = L.slice_daugavet_witness(C, mu, L.f_xy(C, 100, 101), 0.1)
    assert pair is not None and value > 1.9


# -- locality -------------------------------------------------------------------------


def test_local_slope_examples(ti, gap_pair):
    C = L.build("circle", n=512)
    res = L.local_slope_search(C, L.f_xy(C, 0, 256), 0.2)
    assert res.distance <= 2 * C.mesh
    probe = L.contraction_probe(ti, L.f_xy(ti, *gap_pair), *gap_pair)
    assert L.local_slope_search(ti, probe, 0.05).distance >= 1.0
    I = L.build("interval", n=9)
    assert L.local_slope_search(I, L.distance_to(I, 0), 1.0).distance == pytest.approx(I.mesh)


def test_raw_f_xy_is_local_near_the_gap(ti, gap_pair):
    # f_xy alone has slope close to 1 on short pairs next to x
    res = L.local_slope_search(ti, L.f_xy(ti, *gap_pair), 0.05)
    assert res.distance == pytest.approx(ti.mesh)


def test_lemalocal_examples(ti, gap_pair):
    C = L.build("circle", n=512)
    res = L.lemalocal_experiment(C, L.f_xy(C, 0, 256), 0, 256, 0.2)
    assert res.success and res.ratio < 0.3125 and res.ratio < res.bound
    probe = L.contraction_probe(ti, L.f_xy(ti, *gap_pair), *gap_pair)
    res = L.lemalocal_experiment(ti, probe, *gap_pair, 0.1)
    assert not res.success
    with pytest.raises(L.PreconditionSlope):
        L.lemalocal_experiment(C, L.f_xy(C, 0, 256), 0, 256, 0.3)
    with pytest.raises(L.PreconditionSlope):
        L.lemalocal_experiment(C, L.f_xy(C, 0, 256), 64, 448, 0.2)


def test_spreading_examples(ti, gap_pair):
    C = L.build("circle", n=256)
    assert len(L.spreading_local_set(C, L.f_xy(C, 0, 128), 0.1, 4 * C.mesh)) >= 4
    probe = L.contraction_probe(ti, L.f_xy(ti, *gap_pair), *gap_pair)
    assert L.spreading_local_set(ti, probe, 0.05, 0.1) == set()
    zero = L.LipschitzFunction(C, np.zeros(C.n))
    assert L.spreading_local_set(C, zero, 0.5, 4 * C.mesh) == set()
    with pytest.raises(L.ScaleBelowMesh):
        L.spreading_local_set(C, L.f_xy(C, 0, 128), 0.1, C.mesh / 2)


def test_spreading_grows_with_refinement():
    sizes = []
    for n in (32, 64, 128):
        C = L.build("circle", n=n)
        sizes.append(len(L.spreading_local_set(C, L.f_xy(C, 0, n // 2), 0.1, 0.3)))
    assert sizes == sorted(sizes)
