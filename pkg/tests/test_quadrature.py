import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greedynn import quadrature
from greedynn.quadrature import (QuadratureResourceError, QuadratureRule, boundary_rule,
                                 composite_gauss, sobol_rule)


@pytest.mark.parametrize("d,s,p", [(1, 1, 1), (1, 7, 5), (2, 3, 2), (3, 2, 3)])
def test_constant_integrates_to_one(d, s, p):
    rule = composite_gauss(d, s, p)
    assert rule.integrate(np.ones(len(rule))) == pytest.approx(1.0, abs=1e-13)
    assert np.all(rule.weights > 0)
    assert rule.nodes.min() >= 0 and rule.nodes.max() <= 1


def test_two_point_gauss_integrates_cubic():
    rule = composite_gauss(1, 1, 2)
    assert rule.integrate(rule.nodes[0] ** 3) == pytest.approx(0.25, abs=1e-15)


def test_sine_product_2d_full_scale_setting():
    rule = composite_gauss(2, 50, 3)
    f = np.sin(np.pi * rule.nodes[0]) * np.sin(np.pi * rule.nodes[1])
    assert abs(rule.integrate(f) - 4 / np.pi ** 2) < 1e-12


@settings(max_examples=60, deadline=None)
@given(d=st.integers(1, 3), s=st.integers(1, 4), p=st.integers(1, 5), data=st.data())
def test_gauss_exact_to_degree_2p_minus_1(d, s, p, data):
    exps = data.draw(st.lists(st.integers(0, 2 * p - 1), min_size=d, max_size=d))
    rule = composite_gauss(d, s, p)
    f = np.prod([rule.nodes[i] ** a for i, a in enumerate(exps)], axis=0)
    exact = math.prod(1.0 / (a + 1) for a in exps)
    assert abs(rule.integrate(f) - exact) <= 1e-12 * exact


def test_resource_cap(monkeypatch):
    monkeypatch.setattr(quadrature, "MAX_NODES", 1000)
    with pytest.raises(QuadratureResourceError):
        composite_gauss(3, 10, 3)


# Independent Sobol generator (Gray-code order) from the first rows of the
# Joe-Kuo direction-number table: (s, a, m_1..m_s) for dimensions 2..6.
_JOE_KUO = [(1, 0, [1]), (2, 1, [1, 3]), (3, 1, [1, 3, 1]), (3, 2, [1, 1, 1]), (4, 1, [1, 1, 3, 3])]


def _reference_sobol(d, n, bits=32):
    V = np.zeros((d, bits + 1), dtype=np.uint64)
    for i in range(1, bits + 1):
        V[0, i] = 1 << (bits - i)
    for j in range(1, d):
        s, a, m = _JOE_KUO[j - 1]
        for i in range(1, bits + 1):
            if i <= s:
                V[j, i] = m[i - 1] << (bits - i)
            else:
                v = int(V[j, i - s]) ^ (int(V[j, i - s]) >> s)
                for k in range(1, s):
                    if (a >> (s - 1 - k)) & 1:
                        v ^= int(V[j, i - k])
                V[j, i] = v
    X = np.zeros((n, d), dtype=np.uint64)
    for idx in range(1, n):
        c = 1
        v = idx - 1
        while v & 1:
            v >>= 1
            c += 1
        X[idx] = X[idx - 1] ^ V[:, c]
    return X.astype(float) / 2.0 ** bits


def test_sobol_matches_reference_generator():
    ref = _reference_sobol(6, 256)
    got = sobol_rule(6, 256).nodes.T
    np.testing.assert_array_equal(got, ref)


def test_sobol_starts_at_origin_and_is_deterministic():
    a = sobol_rule(5, 100)
    b = sobol_rule(5, 100)
    assert np.all(a.nodes[:, 0] == 0.0)
    np.testing.assert_array_equal(a.nodes, b.nodes)


def test_sobol_single_point():
    r = sobol_rule(3, 1)
    assert len(r) == 1 and r.weights[0] == 1.0


def test_sobol_4d_product_integral():
    r = sobol_rule(4, 500_000)
    assert abs(r.integrate(np.prod(r.nodes, axis=0)) - 1 / 16) < 5e-4
    assert r.weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_sobol_rejects_bad_dimension():
    with pytest.raises(ValueError):
        sobol_rule(0, 10)
    with pytest.raises(ValueError):
        sobol_rule(quadrature.SOBOL_MAX_DIM + 1, 10)


def test_boundary_2d_faces():
    br = boundary_rule(2, subdivisions=4, order=2)
    assert len(br.faces) == 4
    for face in br.faces:
        assert face.weights.sum() == pytest.approx(1.0, abs=1e-13)


def test_boundary_3d_face_integral():
    br = boundary_rule(3, subdivisions=50, order=3)
    face = next(f for f in br.faces if f.meta["axis"] == 2 and f.meta["side"] == 0.0)
    assert np.all(face.nodes[2] == 0.0)
    assert abs(face.integrate(face.nodes[0]) - 0.5) < 1e-12


def test_boundary_normals_point_outward():
    br = boundary_rule(3, subdivisions=2, order=1)
    centre = br.flat.nodes - 0.5
    assert np.all(np.sum(centre * br.normals, axis=0) > 0)
    assert np.allclose(np.linalg.norm(br.normals, axis=0), 1.0)


def test_boundary_10d_qmc_total_measure():
    br = boundary_rule(10, qmc_points=2000)
    assert len(br.faces) == 20
    assert br.flat.weights.sum() == pytest.approx(20.0, abs=1e-10)


def test_boundary_needs_d2():
    with pytest.raises(ValueError):
        boundary_rule(1, subdivisions=2)


def test_dump_roundtrip(tmp_path):
    r = composite_gauss(2, 3, 2)
    path = tmp_path / "rule.txt"
    r.dump(path)
    assert path.read_text().splitlines()[0] == "2 36 composite-gauss"
    back = QuadratureRule.load(path)
    np.testing.assert_array_equal(back.nodes, r.nodes)
    np.testing.assert_array_equal(back.weights, r.weights)
