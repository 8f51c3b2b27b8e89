import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greedynn.bounds import lipschitz_bound
from greedynn.dictionary import DictionaryAtom, ParamSpace, build_deterministic, sample_randomized
from greedynn import _kernels
from greedynn.evalspace import (Discretization, EnergyForm, FieldSamples, eval_atom, inner_product,
                                norm, rhs_functional, samples_of, score_dictionary, tile_order)
from greedynn.problems import catalog_lookup
from greedynn.quadrature import composite_gauss, sobol_rule

ELLIPTIC = EnergyForm("elliptic", alpha=lambda x: 1.0 + 0.5 * np.sin(3 * x[0]))


def _atom(d, seed, k):
    rng = np.random.default_rng(seed)
    space = ParamSpace.unit_cube(d)
    dic = sample_randomized(space, 1, seed=rng, k=k)
    return dic.atom(0, int(rng.choice([-1, 1])))


def test_eval_atom_examples():
    rule = composite_gauss(2, 1, 1)
    x = np.array([[0.5], [0.7]])
    rule = type(rule)(x, np.ones(1), "pt")
    a = DictionaryAtom.from_params([0.0], 0.0, k=1)
    assert eval_atom(a, rule).values[0] == pytest.approx(0.5)
    a2 = DictionaryAtom.from_params([0.0], -0.8, k=2)
    s = eval_atom(a2, rule, need_grad=True)
    assert s.values[0] == 0.0 and np.all(s.gradients == 0.0)
    a3 = DictionaryAtom.from_params([0.0], 0.0, k=3)
    s = eval_atom(a3, rule, need_grad=True)
    assert s.values[0] == pytest.approx(0.125)
    assert np.linalg.norm(s.gradients[:, 0]) == pytest.approx(0.75)


def test_relu1_gradient_zero_at_kink():
    rule = type(composite_gauss(1, 1, 1))(np.array([[0.25]]), np.ones(1), "pt")
    a = DictionaryAtom.from_params([], -0.25, k=1, omega=[1.0])
    assert eval_atom(a, rule, need_grad=True).gradients[0, 0] == 0.0


@pytest.mark.parametrize("k", [2, 3, 4])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_gradient_matches_finite_differences(k, d):
    rule = sobol_rule(d, 256)
    h = 1e-6
    for seed in range(5):
        atom = _atom(d, seed, k) if d > 1 else DictionaryAtom.from_params([], 0.1 * seed - 0.2, k, omega=[1.0])
        s = eval_atom(atom, rule, need_grad=True)
        t = np.asarray(atom.omega) @ rule.nodes + atom.b
        keep = np.abs(t) > 1e-3
        for j in range(d):
            e = np.zeros((d, 1))
            e[j] = h
            fd = (atom(rule.nodes + e) - atom(rule.nodes - e)) / (2 * h)
            assert np.max(np.abs(fd - s.gradients[j])[keep]) < 1e-6


def test_inner_product_examples():
    rule = composite_gauss(1, 4, 3)
    one = samples_of(lambda x: np.ones(x.shape[1]), rule)
    assert inner_product(one, one, rule) == pytest.approx(1.0, abs=1e-14)
    xs = samples_of(lambda x: x[0], rule, grad=lambda x: np.ones_like(x))
    assert inner_product(xs, xs, rule, EnergyForm("elliptic")) == pytest.approx(4 / 3, abs=1e-12)


def test_mismatched_rules_rejected():
    r1, r2 = composite_gauss(1, 4, 3), composite_gauss(1, 5, 3)
    a = samples_of(lambda x: x[0], r1)
    b = samples_of(lambda x: x[0], r2)
    with pytest.raises(ValueError):
        inner_product(a, b, r1)
    with pytest.raises(ValueError):
        inner_product(a, a, r2)


def test_elliptic_requires_gradients_and_positive_alpha():
    rule = composite_gauss(1, 4, 2)
    a = samples_of(lambda x: x[0], rule)
    with pytest.raises(ValueError):
        inner_product(a, a, rule, EnergyForm("elliptic"))
    ga = samples_of(lambda x: x[0], rule, grad=lambda x: np.ones_like(x))
    with pytest.raises(ValueError):
        inner_product(ga, ga, rule, EnergyForm("elliptic", alpha=lambda x: x[0] - 0.5))
    with pytest.raises(ValueError):
        EnergyForm("H2")


@settings(max_examples=50, deadline=None)
@given(s1=st.integers(0, 10_000), s2=st.integers(0, 10_000), k=st.integers(1, 3))
def test_cauchy_schwarz_symmetry_coercivity(s1, s2, k):
    rule = sobol_rule(2, 512)
    a = eval_atom(_atom(2, s1, k), rule, need_grad=True)
    b = eval_atom(_atom(2, s2, k), rule, need_grad=True)
    for form in (EnergyForm(), ELLIPTIC):
        ab = inner_product(a, b, rule, form)
        assert abs(ab) <= norm(a, rule, form) * norm(b, rule, form) + 1e-10
        assert ab == inner_product(b, a, rule, form)
    assert inner_product(a, a, rule, ELLIPTIC) >= inner_product(a, a, rule) - 1e-15


def test_kernel_scores_match_numpy_inner_products():
    rule = sobol_rule(3, 2048)
    space = ParamSpace.unit_cube(3)
    for k, form in [(1, EnergyForm()), (3, ELLIPTIC), (2, ELLIPTIC)]:
        dic = sample_randomized(space, 40, seed=k, k=k)
        r = samples_of(lambda x: np.cos(np.pi * x[0]) * x[1], rule,
                       grad=lambda x: np.stack([-np.pi * np.sin(np.pi * x[0]) * x[1],
                                                np.cos(np.pi * x[0]), 0 * x[2]]))
        best, val, s = score_dictionary(dic, r, rule, form, return_all=True)
        ref = np.array([inner_product(eval_atom(a, rule, True), r, rule, form) for a in dic.atoms()])
        np.testing.assert_allclose(s, ref, rtol=1e-10, atol=1e-13)
        assert best == int(np.argmax(np.abs(ref)))


def test_score_selects_atom_and_sign():
    rule = composite_gauss(2, 8, 3)
    dic = sample_randomized(ParamSpace.unit_cube(2), 30, seed=4, k=2)
    # atoms are unnormalized: only the largest one is guaranteed to win on itself
    j = int(np.argmax([norm(eval_atom(a, rule), rule) for a in dic.atoms()]))
    r = eval_atom(dic.atom(j), rule)
    best, val = score_dictionary(dic, r, rule)
    assert best == j and val > 0
    best, val = score_dictionary(dic, -r, rule)
    assert best == j and val < 0


def test_score_permutation_invariant():
    rule = composite_gauss(2, 8, 3)
    dic = sample_randomized(ParamSpace.unit_cube(2), 60, seed=5, k=1)
    r = samples_of(lambda x: np.sin(3 * x[0]) - x[1] ** 2, rule)
    _, v1 = score_dictionary(dic, r, rule)
    perm = np.random.default_rng(0).permutation(60)
    _, v2 = score_dictionary(dic.subset(perm), r, rule)
    assert abs(v1) == pytest.approx(abs(v2), rel=1e-13)


def test_score_ties_lowest_index_and_empty():
    rule = composite_gauss(1, 8, 3)
    dic = sample_randomized(ParamSpace.unit_cube(1), 5, seed=0)
    twice = dic.subset([2, 2, 0])
    r = eval_atom(dic.atom(2), rule)
    assert score_dictionary(twice, r, rule)[0] == 0
    with pytest.raises(ValueError):
        score_dictionary(dic.subset([]), r, rule)


def test_score_close_to_finer_grid_maximum():
    rule = composite_gauss(1, 256, 5)
    r = samples_of(lambda x: np.sin(2 * np.pi * x[0]), rule)
    space = ParamSpace.unit_cube(1)
    coarse = build_deterministic(space, 64)
    fine = build_deterministic(space, 640)
    _, vc = score_dictionary(coarse.dictionary, r, rule)
    _, vf = score_dictionary(fine.dictionary, r, rule)
    slack = coarse.ell / 2 * lipschitz_bound(1, 1) * norm(r, rule)
    assert abs(vc) <= abs(vf) + 1e-12
    assert abs(vf) - abs(vc) <= slack


def test_rhs_functional_examples():
    rule = composite_gauss(2, 4, 2)
    v = samples_of(lambda x: np.ones(x.shape[1]), rule)
    assert rhs_functional(v, EnergyForm("elliptic"), rule) == 0.0
    form = EnergyForm("elliptic", f=lambda x: np.ones(x.shape[1]))
    assert rhs_functional(v, form, rule) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        rhs_functional(v, EnergyForm("elliptic", g=lambda x, n: x[0]), rule)


def test_galerkin_consistency_neumann3d():
    p = catalog_lookup("neumann3d-const")
    rule = composite_gauss(3, 12, 3)
    form = EnergyForm("elliptic", alpha=p.alpha, f=p.f)
    u = samples_of(p.u, rule, p.grad)
    assert rhs_functional(u, form, rule) == pytest.approx(inner_product(u, u, rule, form), rel=1e-8)


def test_discretization_apply_matches_direct():
    p = catalog_lookup("neumann4d")
    from greedynn.quadrature import boundary_rule
    rule = sobol_rule(4, 4096)
    br = boundary_rule(4, qmc_points=512)
    form = EnergyForm("elliptic", alpha=p.alpha, f=p.f, g=p.g, boundary=br)
    disc = Discretization(rule, form, exact=p.u, exact_grad=p.grad)
    dic = sample_randomized(ParamSpace.unit_cube(4), 12, seed=1, k=2)
    got = disc.rhs(dic)
    ref = [rhs_functional(eval_atom(a, rule), form, rule, eval_atom(a, br.flat)) for a in dic.atoms()]
    np.testing.assert_allclose(got, ref, rtol=1e-10, atol=1e-13)
    vals, grads = disc.synthesize(dic, np.arange(12) - 5.0)
    direct = sum((j - 5.0) * eval_atom(a, rule, True).values for j, a in enumerate(dic.atoms()))
    np.testing.assert_allclose(vals, direct[disc.order], rtol=1e-11, atol=1e-12)
    np.testing.assert_array_equal(disc.X, rule.nodes[:, disc.order])


def test_field_samples_arithmetic():
    rule = composite_gauss(1, 2, 2)
    a = samples_of(lambda x: x[0], rule, grad=lambda x: np.ones_like(x))
    b = a - a
    assert np.all(b.values == 0) and np.all(b.gradients == 0)
    assert np.all((-a).values == -a.values)
    with pytest.raises(ValueError):
        FieldSamples(np.zeros(3), np.zeros((1, 2)))


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.integers(1, 3000), st.integers(0, 2 ** 32 - 1))
def test_tile_order_is_a_permutation(d, m, seed):
    X = np.random.default_rng(seed).random((d, m))
    order = tile_order(X)
    assert np.array_equal(np.sort(order), np.arange(m))
    assert np.array_equal(order, tile_order(X))


def test_tiles_are_compact():
    rule = composite_gauss(3, 10, 3)
    X = rule.nodes[:, tile_order(rule.nodes)]
    B = _kernels.BLOCK
    widths = [np.ptp(X[:, i:i + B], axis=1).max() for i in range(0, X.shape[1], B)]
    assert np.median(widths) < 0.5


@pytest.mark.parametrize("k", [1, 2, 3])
def test_kernels_with_block_skipping_match_dense(k):
    # atoms cutting through the cube: some node blocks are dead, some live
    rule = composite_gauss(3, 8, 3)
    X = np.ascontiguousarray(rule.nodes[:, tile_order(rule.nodes)])
    dic = sample_randomized(ParamSpace.unit_cube(3, c=0.8), 40, seed=3, k=k)
    t = dic.omega @ X + dic.b[:, None]
    A = np.maximum(t, 0) ** k
    dA = k * np.maximum(t, 0) ** (k - 1) * (t > 0)
    rng = np.random.default_rng(0)
    rho, gam = rng.standard_normal(X.shape[1]), rng.standard_normal((3, X.shape[1]))
    ref = A @ rho + np.einsum("jm,jl,lm->j", dA, dic.omega, gam)
    got = _kernels.scores(X, rho, gam, dic.omega, dic.b, k)
    np.testing.assert_allclose(got, ref, rtol=1e-11, atol=1e-11 * np.abs(ref).max())
    c = rng.standard_normal(40)
    vals, grads = _kernels.synthesize(X, dic.omega, dic.b, c, k, True)
    np.testing.assert_allclose(vals, c @ A, rtol=1e-11, atol=1e-12)
    np.testing.assert_allclose(grads, np.einsum("j,jm,jl->lm", c, dA, dic.omega), rtol=1e-11, atol=1e-11)
