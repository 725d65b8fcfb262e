import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multihilbert import geometry as geo
from multihilbert.errors import (
    BothUnboundedSameSide,
    ConfigurationError,
    DegenerateInterval,
    OverlapError,
    SamplesAtPole,
)

INF = math.inf
NEG_INV = geo.MobiusMap(0, -1, 1, 0)


def test_single_double_point():
    cfg = geo.validate_configuration([[0, 1]], [[1, 2]])
    assert cfg.doubles == (1.0,)
    assert cfg.simples == (0.0, 2.0)
    assert cfg.n_double == 1


def test_two_double_points():
    cfg = geo.validate_configuration([[1, 2], [3, 4]], [[2, 3]])
    assert cfg.doubles == (2.0, 3.0)
    assert cfg.simples == (1.0, 4.0)


def test_overlap_rejected():
    with pytest.raises(OverlapError):
        geo.validate_configuration([[0, 2]], [[1, 3]])


@pytest.mark.parametrize("raw", [[[1, 1]], [[2, 1]], [["-inf", "inf"]]])
def test_degenerate_interval(raw):
    with pytest.raises(DegenerateInterval):
        geo.validate_configuration(raw, [[5, 6]])


def test_both_unbounded_same_side():
    with pytest.raises(BothUnboundedSameSide):
        geo.validate_configuration([[0, "inf"]], [[1, "inf"]])
    with pytest.raises(BothUnboundedSameSide):
        geo.validate_configuration([["-inf", 0]], [["-inf", -2]])


def test_empty_set_rejected():
    with pytest.raises(ConfigurationError):
        geo.validate_configuration([], [[0, 1]])


def test_same_label_adjacency_merged():
    cfg = geo.validate_configuration([[0, 1], [1, 2]], [[3, 4]])
    assert [p.as_list() for p in cfg.J.parts] == [[0.0, 2.0]]
    assert cfg.merged_at == (1.0,)


def test_infinity_double_when_both_unbounded():
    cfg = geo.validate_configuration([["-inf", 0]], [[1, "inf"]])
    assert INF in cfg.doubles
    assert cfg.distance() == 0.0


def test_infinity_not_an_endpoint_when_one_set_owns_both_rays():
    cfg = geo.validate_configuration([[0, 1]], [["-inf", 0], [1, "inf"]])
    assert cfg.doubles == (0.0, 1.0)
    assert INF not in [p for p, _ in cfg.endpoints]


def test_infinity_simple_for_single_ray():
    cfg = geo.validate_configuration([[0, 1]], [[2, "inf"]])
    assert (INF, "simple") in cfg.endpoints


def test_json_round_trip(tmp_path):
    cfg = geo.validate_configuration([[0, 1]], [[2, "inf"]])
    path = tmp_path / "c.json"
    path.write_text(cfg.to_json())
    assert geo.load_configuration(path) == cfg


def test_label_of_and_distance():
    cfg = geo.validate_configuration([[0, 1]], [[2, 3]])
    assert cfg.label_of(0.5) == "J" and cfg.label_of(2.5) == "E"
    assert cfg.label_of(1.5) is None and cfg.label_of(1.0) is None
    assert cfg.distance() == 1.0


# ----------------------------------------------------------------------
# Möbius maps


def test_identity_fixes_points():
    assert geo.mobius_apply(geo.MobiusMap.identity(), 5.0) == 5.0


def test_negative_inverse_on_interval():
    img = geo.mobius_image(NEG_INV, geo.validate_configuration([[1, 2]], [[3, 4]]))
    assert img.J.parts[0].as_list() == [-1.0, -0.5]


def test_pole_goes_to_infinity():
    assert geo.mobius_apply(NEG_INV, 0.0) == INF
    assert geo.mobius_apply(NEG_INV, INF) == 0.0


def test_map_is_normalised():
    m = geo.MobiusMap(2, 0, 0, 2)
    assert m.a * m.d - m.b * m.c == pytest.approx(1.0)
    with pytest.raises(ValueError):
        geo.MobiusMap(1, 1, 1, 1)


def test_translation_image():
    cfg = geo.validate_configuration([[0, 1]], [[1, 2]])
    img = geo.mobius_image(geo.MobiusMap.translation(1.0), cfg)
    assert img.to_dict() == {"J": [[1.0, 2.0]], "E": [[2.0, 3.0]]}
    cfg2 = geo.validate_configuration([[-1, 0]], [[0, 1]])
    img2 = geo.mobius_image(geo.MobiusMap.translation(5.0), cfg2)
    assert img2.to_dict() == {"J": [[4.0, 5.0]], "E": [[5.0, 6.0]]}
    assert img2.n_double == cfg2.n_double


def test_identity_image():
    cfg = geo.validate_configuration([[1, 2], [3, 4]], [[2, 3]])
    assert geo.mobius_image(geo.MobiusMap.identity(), cfg) == cfg


def test_unbounded_e_image_keeps_doubles():
    cfg = geo.validate_configuration([[0, 1]], [["-inf", 0], [1, "inf"]])
    img = geo.mobius_image(NEG_INV, cfg)
    # endpoint-image oracle: 0 -> inf, 1 -> -1
    assert img.n_double == cfg.n_double == 2
    assert set(img.doubles) == {-1.0, INF}


def test_compactify_bounded_image():
    cfg = geo.validate_configuration([[0, 1]], [[2, "inf"]])
    m, img = geo.compactify(cfg)
    assert img.bounded
    assert img.n_double == cfg.n_double
    for part, lab in cfg.subintervals():
        lo = geo.mobius_apply(m, part.lo)
        assert any(np.isclose(lo, q.lo) or np.isclose(lo, q.hi)
                   for q, lq in img.subintervals() if lq == lab)


def test_compactify_whole_line_impossible():
    cfg = geo.validate_configuration([["-inf", 0]], [[0, "inf"]])
    with pytest.raises(geo.UnboundedWithoutCompactification):
        geo.compactify(cfg)


def test_conjugate_identity_is_noop():
    f = lambda x: np.exp(-x ** 2)
    Uf = geo.mobius_conjugate_function(geo.MobiusMap.identity(), f)
    x = np.linspace(-3, 3, 11)
    np.testing.assert_array_equal(Uf(x), f(x))


def test_conjugate_preserves_norm():
    f = lambda x: 1.0 / (1.0 + np.asarray(x) ** 2)
    Uf = geo.mobius_conjugate_function(NEG_INV, f)
    assert abs(geo.l2_norm(Uf, [0.0]) - geo.l2_norm(f)) < 1e-10
    assert geo.l2_norm(f) == pytest.approx(math.sqrt(math.pi / 2), abs=1e-12)


def test_conjugate_rejects_pole_sample():
    Uf = geo.mobius_conjugate_function(NEG_INV, lambda x: x)
    with pytest.raises(SamplesAtPole):
        Uf(np.array([0.0, 1.0]))


# ----------------------------------------------------------------------
# properties

finite = st.floats(-5, 5, allow_nan=False)


@st.composite
def mobius_maps(draw):
    a, b, c = draw(finite), draw(finite), draw(finite)
    if abs(a) < 0.1:
        a = 0.1 if a >= 0 else -0.1
    return geo.MobiusMap(a, b, c, (1 + b * c) / a)


@st.composite
def configurations(draw):
    n = draw(st.integers(2, 6))
    pts = sorted(draw(st.lists(st.integers(-20, 20), min_size=n + 1, max_size=n + 1,
                               unique=True)))
    labels = draw(st.lists(st.sampled_from("JE"), min_size=n, max_size=n))
    gaps = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    J, E = [], []
    for k in range(n):
        if gaps[k] and k > 0:
            continue
        (J if labels[k] == "J" else E).append([pts[k], pts[k + 1]])
    if not J or not E:
        J, E = [[pts[0], pts[1]]], [[pts[1], pts[2]]]
    return geo.validate_configuration(J, E)


@settings(max_examples=60, deadline=None)
@given(configurations())
def test_every_endpoint_classified_once(cfg):
    pts = [p for p, _ in cfg.endpoints]
    assert len(pts) == len(set(pts))
    ends = {v for part, _ in cfg.subintervals() for v in (part.lo, part.hi)}
    assert ends == set(pts)
    assert cfg.n_double == sum(k == "double" for _, k in cfg.endpoints)


@settings(max_examples=100, deadline=None)
@given(mobius_maps(), configurations())
def test_image_preserves_double_count(m, cfg):
    ends = [v for v, _ in cfg.endpoints]
    if m.c != 0 and any(abs(v - m.pole) < 1e-9 for v in ends):
        return
    assert geo.mobius_image(m, cfg).n_double == cfg.n_double


@settings(max_examples=100, deadline=None)
@given(mobius_maps(), mobius_maps(), finite)
def test_composition_law(m1, m2, x):
    lhs = geo.mobius_apply(m1.compose(m2), x)
    rhs = geo.mobius_apply(m1, geo.mobius_apply(m2, x))
    if math.isinf(lhs) or math.isinf(rhs) or abs(lhs) > 1e6 or abs(rhs) > 1e6:
        return
    assert lhs == pytest.approx(rhs, rel=1e-7, abs=1e-7)


@settings(max_examples=8, deadline=None)
@given(mobius_maps())
def test_conjugation_is_isometric(m):
    f = lambda x: np.exp(-np.asarray(x, dtype=float) ** 2)
    Uf = geo.mobius_conjugate_function(m, f)
    bps = [m.pole] if m.c != 0 else []
    assert abs(geo.l2_norm(Uf, bps) - geo.l2_norm(f)) < 1e-8
