import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greedynn.dictionary import (Dictionary, DictionaryAtom, ParamSpace, build_deterministic,
                                 hyperspherical_map, sample_randomized)


def _random_angles(rng, n, d):
    space = ParamSpace.unit_cube(d)
    return space.angle_lo + rng.random((n, d - 1)) * (space.angle_hi - space.angle_lo)


@pytest.mark.parametrize("d", [2, 3, 4, 10])
def test_hyperspherical_unit_norm_and_nonexpansive(d):
    rng = np.random.default_rng(d)
    a = _random_angles(rng, 10_000, d)
    b = _random_angles(rng, 10_000, d)
    wa, wb = hyperspherical_map(a), hyperspherical_map(b)
    assert np.max(np.abs(np.linalg.norm(wa, axis=1) - 1)) < 1e-12
    gap = np.linalg.norm(wa - wb, axis=1) - np.linalg.norm(a - b, axis=1)
    assert gap.max() <= 1e-12


def test_hyperspherical_known_values():
    np.testing.assert_allclose(hyperspherical_map([math.pi / 2]), [0.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(hyperspherical_map([0.0, 1.3]), [1.0, 0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(hyperspherical_map([math.pi / 2, math.pi / 2]), [0, 0, 1], atol=1e-15)


def test_hyperspherical_errors():
    with pytest.raises(ValueError):
        hyperspherical_map([0.1, 0.2], d=2)
    with pytest.raises(ValueError):
        hyperspherical_map(np.zeros((3, 0)))


def test_param_space_unit_cube():
    s = ParamSpace.unit_cube(3)
    assert s.c1 == pytest.approx(-math.sqrt(3)) and s.c2 == pytest.approx(math.sqrt(3))
    assert s.covers_unit_cube()
    assert not ParamSpace(3, -1.0, 1.0).covers_unit_cube()
    assert s.volume() == pytest.approx(2 * math.pi ** 2 * 2 * math.sqrt(3))


def test_grid_2x2_example():
    space = ParamSpace(2, -1.0, 1.0)
    g = build_deterministic(space, 4, counts=(2, 2))
    assert g.N == 4
    assert g.ell == pytest.approx(math.sqrt(math.pi ** 2 + 1))
    centers = sorted(zip(np.round(g.dictionary.phi[:, 0], 12), np.round(g.dictionary.b, 12)))
    expect = sorted((round(p, 12), b) for p in (math.pi / 2, 3 * math.pi / 2) for b in (-0.5, 0.5))
    assert centers == expect
    assert g.delta >= 1


@pytest.mark.parametrize("d,n_target", [(2, 64), (3, 300), (4, 1000)])
def test_grid_covering_radius(d, n_target):
    space = ParamSpace.unit_cube(d)
    g = build_deterministic(space, n_target)
    assert g.N <= n_target and len(g.dictionary) == g.N
    centers = np.column_stack([g.dictionary.phi, g.dictionary.b])
    rng = np.random.default_rng(0)
    probes = space.lo + rng.random((1000, d)) * space.sides
    dist = np.sqrt(((probes[:, None, :] - centers[None, :, :]) ** 2).sum(-1)).min(axis=1)
    assert dist.max() <= g.ell / 2 + 1e-12
    assert g.delta >= 1 - 1e-12


@settings(max_examples=40, deadline=None)
@given(d=st.integers(2, 5), n=st.integers(1, 3000))
def test_grid_size_and_delta(d, n):
    g = build_deterministic(ParamSpace.unit_cube(d), n)
    assert 1 <= g.N <= n
    assert g.delta >= 1 - 1e-12
    assert g.degenerate == (n < d)


def test_grid_1d_pairs_directions():
    g = build_deterministic(ParamSpace.unit_cube(1), 8)
    dic = g.dictionary
    assert g.N == 8 and len(dic) == 16
    assert set(dic.omega[:, 0]) == {-1.0, 1.0}
    np.testing.assert_allclose(dic.b[:8], dic.b[8:])


def test_grid_rejects_bad_input():
    with pytest.raises(ValueError):
        build_deterministic(ParamSpace.unit_cube(2), 0)
    with pytest.raises(ValueError):
        build_deterministic(ParamSpace.unit_cube(2), 10, counts=(2, 0))


def test_randomized_reproducible_and_in_box():
    space = ParamSpace.unit_cube(3)
    a = sample_randomized(space, 500, seed=11)
    b = sample_randomized(space, 500, seed=11)
    np.testing.assert_array_equal(a.phi, b.phi)
    np.testing.assert_array_equal(a.b, b.b)
    params = np.column_stack([a.phi, a.b])
    assert np.all(params >= space.lo) and np.all(params < space.hi)
    np.testing.assert_allclose(np.linalg.norm(a.omega, axis=1), 1.0)


def test_randomized_uniform_marginals():
    space = ParamSpace.unit_cube(2)
    dic = sample_randomized(space, 200_000, seed=3)
    u = (np.column_stack([dic.phi, dic.b]) - space.lo) / space.sides
    np.testing.assert_allclose(u.mean(axis=0), 0.5, atol=5e-3)
    np.testing.assert_allclose(u.var(axis=0), 1 / 12, atol=5e-3)


def test_randomized_1d_both_signs():
    dic = sample_randomized(ParamSpace.unit_cube(1), 1000, seed=0)
    assert set(dic.omega[:, 0]) == {-1.0, 1.0}
    with pytest.raises(ValueError):
        sample_randomized(ParamSpace.unit_cube(1), 0)


def test_atom_evaluation_matches_formula():
    atom = DictionaryAtom.from_params([0.3, 1.1], 0.2, k=3, sign=-1)
    x = np.random.default_rng(0).random((3, 50))
    t = np.asarray(atom.omega) @ x + 0.2
    np.testing.assert_allclose(atom(x), -np.maximum(t, 0) ** 3)
    with pytest.raises(ValueError):
        DictionaryAtom.from_params([], 0.0, k=1)


def test_text_roundtrip(tmp_path):
    for d in (1, 3):
        dic = sample_randomized(ParamSpace.unit_cube(d), 7, seed=1, k=2)
        signs = np.array([1, -1, 1, 1, -1, -1, 1])
        text = dic.to_text(tmp_path / "dic.txt", signs)
        assert text.splitlines()[0] == f"# d={d} k=2 N=7"
        back, s = Dictionary.from_text(text)
        np.testing.assert_array_equal(s, signs)
        np.testing.assert_array_equal(back.b, dic.b)
        np.testing.assert_allclose(back.omega, dic.omega, atol=1e-15)


def test_subset_and_atoms():
    dic = sample_randomized(ParamSpace.unit_cube(2), 10, seed=2)
    sub = dic.subset([1, 4])
    assert len(sub) == 2 and sub.b[1] == dic.b[4]
    assert dic.atom(4, -1).sign == -1
    assert len(Dictionary.from_atoms(dic.atoms())) == 10
