import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import interior
from grushin import (ConstructionError, DomainError, Family, SpaceModel, bare, hyperbolic,
                     infinity, plane, sphere)
from grushin.model import (log_weight_density, metric_length, metric_lengths, profile,
                           weight_density)

FAMILIES = ["plane", "sphere", "hyperbolic", "infinity"]


def make(family, a, db, g):
    if family == "infinity":
        return infinity(db, g)
    return SpaceModel(family, a, a + db)


spaces = st.builds(
    make,
    st.sampled_from(FAMILIES),
    st.floats(0, 3),
    st.floats(0, 5),
    st.floats(0.1, 3),
)


# -- frozen examples ---------------------------------------------------------


def test_profile_round_sphere():
    p = profile(bare(Family.SPHERE), math.pi / 4)
    assert p.f == pytest.approx(math.sqrt(2), rel=1e-14)
    assert p.V == 0.0


def test_profile_plane_alpha_one():
    p = profile(SpaceModel("plane", 1, 0, strict=False), 2.0)
    assert (p.f, p.df, p.V) == pytest.approx((2.0, 1.0, 0.0), rel=1e-14)


def test_profile_infinity():
    p = profile(infinity(3, 1), 0.5)
    assert p.f == pytest.approx(math.exp(-2), rel=1e-14)
    assert p.V == pytest.approx(4 + 3 * math.log(2), rel=1e-14)


def test_weight_density_examples():
    assert weight_density(sphere(1, 1), math.pi / 6) == pytest.approx(math.sqrt(3) / 2, rel=1e-14)
    for x in (0.1, 1.0, 7.0):
        assert weight_density(plane(1.5, 1.5), x) == pytest.approx(1.0, rel=1e-14)
    assert weight_density(infinity(2, 1), 1.0) == pytest.approx(1.0, rel=1e-14)


def test_metric_length_examples():
    assert metric_length(plane(1, 1), 1.0, 0.0, 1.0) == pytest.approx(1.0, rel=1e-14)
    assert metric_length(bare(Family.SPHERE), math.pi / 3, 0.0, 1.0) == pytest.approx(0.5, rel=1e-14)
    assert metric_length(hyperbolic(1, 1), 1.0, 3.0, 4 * math.tanh(1)) == pytest.approx(5.0, rel=1e-14)


# -- construction and parsing ------------------------------------------------


@pytest.mark.parametrize("kw", [
    dict(family="plane", alpha=2, beta=1),
    dict(family="plane", alpha=-1, beta=1),
    dict(family="sphere", alpha=1, beta=math.inf),
    dict(family="infinity", beta=1),
    dict(family="infinity", beta=1, gamma=0),
    dict(family="infinity", beta=-1, gamma=1),
])
def test_construction_rejects(kw):
    with pytest.raises(ConstructionError):
        SpaceModel(**kw)


def test_unknown_family():
    with pytest.raises(ValueError):
        SpaceModel("torus", 1, 1)


@pytest.mark.parametrize("text", ["plane:alpha=1", "sphere:alpha=x,beta=1", "sphere:gamma=1,beta=2,alpha=1,delta=3"])
def test_parse_rejects(text):
    with pytest.raises(ConstructionError):
        SpaceModel.parse(text)


@given(spaces)
def test_parse_roundtrip(space):
    assert SpaceModel.parse(str(space)) == space


@pytest.mark.parametrize("x", [0.0, -1.0, 1e-13, math.nan, math.inf])
def test_guard_band(x):
    with pytest.raises(DomainError):
        profile(plane(1, 2), x)


def test_sphere_pole_rejected():
    with pytest.raises(DomainError):
        weight_density(sphere(1, 2), math.pi / 2)


# -- properties --------------------------------------------------------------


@given(spaces, st.floats(0.01, 0.99))
def test_weight_identity(space, u):

    x = interior(space, u)
    p = profile(space, x)
    w = weight_density(space, x)
    assert w * p.f * math.exp(p.V) == pytest.approx(1.0, rel=1e-12)
    assert log_weight_density(space, x) == pytest.approx(math.log(w), rel=1e-12, abs=1e-12)


@given(spaces, st.floats(0.01, 0.99))
def test_profile_derivatives(space, u):

    x = interior(space, u)
    h = 1e-5 * x
    p, pp, pm = profile(space, x), profile(space, x + h), profile(space, x - h)
    scale = max(1.0, abs(p.df), abs(p.d2f))
    assert (pp.f - pm.f) / (2 * h) == pytest.approx(p.df, rel=1e-5, abs=1e-6 * scale)
    assert (pp.V - pm.V) / (2 * h) == pytest.approx(p.dV, rel=1e-5, abs=1e-6 * max(1, abs(p.dV)))
    assert (pp.df - pm.df) / (2 * h) == pytest.approx(p.d2f, rel=1e-4, abs=1e-5 * scale)


@pytest.mark.parametrize("fam", ["plane", "sphere", "hyperbolic"])
@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.5])
def test_degeneration(fam, alpha):
    sp = SpaceModel(fam, alpha, alpha)
    fs = [profile(sp, x).f for x in (1e-2, 1e-4, 1e-6)]
    assert fs[0] > fs[1] > fs[2] and fs[2] < 1e-2


def test_infinity_flat_to_all_orders():
    sp = infinity(1, 1)
    f = profile(sp, 1e-2).f
    for k in range(21):
        assert f / 1e-2**k < 1e-3


@given(st.floats(1e-3, math.pi / 2 - 1e-3))
def test_round_sphere(x):
    assert profile(bare(Family.SPHERE), x).f * math.cos(x) == pytest.approx(1.0, rel=1e-12)


@given(spaces, st.floats(0.01, 0.99), st.floats(-5, 5), st.floats(-5, 5))
def test_metric_lengths_vectorised(space, u, dx, dy):

    x = interior(space, u)
    a = metric_lengths(space, np.array([x]), np.array([dx]), np.array([dy]))[0]
    assert a == pytest.approx(metric_length(space, x, dx, dy), rel=1e-12, abs=1e-300)
