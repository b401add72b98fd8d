import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import interior, rel_close
from grushin import INF, DimError, DomainError, EffectiveDim, Family, SpaceModel, bare, infinity
from grushin.curvature import (as_dim, gauss_curvature, ricci_closed, ricci_fd, ricci_lemma,
                               ricci_lemma_array)

DIMS = [-10.0, -1.0, 3.0, 10.0, math.inf]


def make(family, a, db, g):
    if family == "infinity":
        return infinity(db, g)
    return SpaceModel(family, a, a + db)


spaces = st.builds(
    make,
    st.sampled_from(["plane", "sphere", "hyperbolic", "infinity"]),
    st.floats(0, 3),
    st.floats(0, 5),
    st.floats(0.1, 3),
)


# -- frozen examples ---------------------------------------------------------


def test_round_sphere_and_hyperbolic_plane():
    r = ricci_lemma(bare(Family.SPHERE), 0.7, 2)
    assert (r.rxx, r.ryy_over_gyy) == pytest.approx((1.0, 1.0), abs=1e-12)
    r = ricci_lemma(bare(Family.HYPERBOLIC), 1.3, 2)
    assert (r.rxx, r.ryy_over_gyy) == pytest.approx((-1.0, -1.0), abs=1e-12)


def test_plane_boundary_point():
    r = ricci_lemma(SpaceModel("plane", 1, 2), 0.5, INF)
    assert (r.rxx, r.ryy_over_gyy) == pytest.approx((0.0, 0.0), abs=1e-12)


def test_closed_examples():
    r = ricci_closed(bare(Family.SPHERE, 1), math.pi / 4, 2)
    assert r.rxx == pytest.approx(-4.0, rel=1e-12)
    assert ricci_lemma(bare(Family.SPHERE, 1), math.pi / 4, 2).rxx == pytest.approx(-4.0, rel=1e-10)
    r = ricci_closed(SpaceModel("hyperbolic", 1, 2), 0.9, INF)
    assert (r.rxx, r.ryy_over_gyy) == pytest.approx((0.0, 0.0), abs=1e-12)
    r = ricci_closed(infinity(3, 1), 1.0, INF)
    assert (r.rxx, r.ryy_over_gyy) == pytest.approx((6.0, 2.0), rel=1e-14)
    r = ricci_lemma(infinity(3, 1), 1.0, INF)
    assert (r.rxx, r.ryy_over_gyy) == pytest.approx((6.0, 2.0), rel=1e-12)


def test_fd_examples():
    r = ricci_fd(bare(Family.SPHERE), 1.0, 2, 1e-5)
    assert (r.rxx, r.ryy_over_gyy) == pytest.approx((1.0, 1.0), abs=1e-6)
    sp = SpaceModel("plane", 2, 2)
    a, b = ricci_fd(sp, 1.0, 10, 1e-5), ricci_lemma(sp, 1.0, 10)
    assert a.rxx == pytest.approx(b.rxx, abs=1e-5)
    assert a.ryy_over_gyy == pytest.approx(b.ryy_over_gyy, abs=1e-5)


@pytest.mark.parametrize("fam,x,k", [("sphere", 0.3, 1.0), ("hyperbolic", 2.0, -1.0)])
def test_gauss_round(fam, x, k):
    assert gauss_curvature(bare(fam), x) == pytest.approx(k, rel=1e-12)


def test_gauss_grushin_plane():
    assert gauss_curvature(bare(Family.PLANE, 1), 2.0) == pytest.approx(-0.5, rel=1e-12)


# -- effective dimension -----------------------------------------------------


@pytest.mark.parametrize("bad", [0.0, 1.0, 1.999, -math.inf, math.nan])
def test_dim_excluded(bad):
    with pytest.raises(DimError):
        EffectiveDim(bad)


@pytest.mark.parametrize("text,val", [("inf", math.inf), ("Infinity", math.inf), ("-34", -34.0), ("10", 10.0)])
def test_dim_parse(text, val):
    assert as_dim(text).value == val


def test_dim_parse_rejects():
    with pytest.raises(DimError):
        EffectiveDim.parse("lots")


def test_critical_needs_constant_potential():
    with pytest.raises(DimError):
        ricci_lemma(SpaceModel("sphere", 1, 2), 0.5, 2)
    with pytest.raises(DimError):
        ricci_closed(infinity(1, 1), 0.5, 2)


def test_fd_refuses_near_singular_set():
    with pytest.raises(DomainError):
        ricci_fd(SpaceModel("plane", 1, 2), 5e-7, INF)
    with pytest.raises(ValueError):
        ricci_fd(SpaceModel("plane", 1, 2), 1.0, INF, h=1e-9)


# -- properties --------------------------------------------------------------


@given(spaces, st.floats(0.01, 0.99), st.sampled_from(DIMS))
def test_lemma_matches_closed(space, u, N):
    x = interior(space, u)
    a, b = ricci_lemma(space, x, N), ricci_closed(space, x, N)
    assert rel_close(a.rxx, b.rxx) and rel_close(a.ryy_over_gyy, b.ryy_over_gyy)


@given(spaces, st.floats(0.05, 0.95), st.sampled_from(DIMS))
def test_lemma_matches_fd(space, u, N):
    x = interior(space, u)
    a, b = ricci_lemma(space, x, N), ricci_fd(space, x, N)
    assert a.rxx == pytest.approx(b.rxx, abs=1e-4)
    assert a.ryy_over_gyy == pytest.approx(b.ryy_over_gyy, abs=1e-4)


@given(spaces, st.floats(0.01, 0.99), st.floats(2.01, 1e4), st.floats(1.0, 10.0))
def test_monotone_in_N(space, u, N, factor):
    x = interior(space, u)
    lo, hi = ricci_lemma(space, x, N), ricci_lemma(space, x, N * factor)
    top = ricci_lemma(space, x, INF)
    assert lo.rxx <= hi.rxx + 1e-12 * max(1, abs(hi.rxx)) <= top.rxx + 2e-12 * max(1, abs(top.rxx))
    assert lo.ryy_over_gyy == hi.ryy_over_gyy == top.ryy_over_gyy


@given(st.sampled_from(["plane", "sphere", "hyperbolic"]), st.floats(0, 3),
       st.floats(0.01, 0.99), st.sampled_from(DIMS + [2.0]))
def test_unweighted_reduces_to_gauss(fam, a, u, N):
    sp = bare(fam, a)
    x = interior(sp, u)
    r, k = ricci_lemma(sp, x, N), gauss_curvature(sp, x)
    assert r.rxx == pytest.approx(k, rel=1e-12, abs=1e-12)
    assert r.ryy_over_gyy == pytest.approx(k, rel=1e-12, abs=1e-12)


@given(spaces, st.sampled_from(DIMS))
def test_array_matches_scalar(space, N):
    xs = np.array([interior(space, u) for u in (0.1, 0.4, 0.8)])
    rxx, ryy = ricci_lemma_array(space, xs, N)
    for x, a, b in zip(xs, rxx, ryy):
        r = ricci_lemma(space, x, N)
        assert a == pytest.approx(r.rxx, rel=1e-14, abs=1e-300)
        assert b == pytest.approx(r.ryy_over_gyy, rel=1e-14, abs=1e-300)
