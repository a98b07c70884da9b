from fractions import Fraction
from importlib import resources

import pytest

from qkoszul.hopf import (DualPairing, FPresentation, TensorElement, coassociativity_check, coproduct_pbw,
                          counit_check, dual_coproduct, dual_product, expo_factorial, f_presentation,
                          load_twist, monomials_upto, pair_tensor, pairing_matrix, vee_presentation)
from qkoszul.ncpoly import NCPoly, Presentation, load_presentation
from qkoszul.series import InexactDivision

from oracles import binomial_coproduct


def data(name):
    return resources.files("qkoszul") / "data" / f"{name}.json"


@pytest.fixture(scope="module")
def twist():
    return load_twist(data("filiform5-twist"))


@pytest.fixture(scope="module")
def pairing(twist):
    return DualPairing(twist, 6)


def test_monomial_enumeration():
    mons = monomials_upto(3, 2)
    assert len(mons) == 10 and mons[0] == (0, 0, 0)
    assert all(1 <= sum(m) <= 2 for m in monomials_upto(3, 2, lo=1))


@pytest.mark.parametrize("m", [(1, 0, 0, 0, 0), (0, 2, 1, 0, 0), (1, 1, 1, 0, 0), (2, 0, 0, 0, 1), (0, 0, 0, 3, 0)])
def test_primitive_coproduct_is_binomial(twist, m):
    got = coproduct_pbw(m, twist.base).flat()
    ref = {(a, b, 0): Fraction(c) for (a, b), c in binomial_coproduct(m).items()}
    assert got == ref


def test_twisted_coproduct_of_generator(twist):
    names = twist.base.names
    x = twist.coproduct((1, 0, 0, 0, 0))
    z = (0,) * 5
    u = lambda i: tuple(1 if k == i else 0 for k in range(5))
    assert x.coeff(u(0), z).coeffs[0] == 1 and x.coeff(z, u(0)).coeffs[0] == 1
    assert x.coeff(u(1), u(3)).coeffs[1] == 1
    assert x.coeff(u(3), u(1)).coeffs[1] == -1
    assert len(x.flat()) == 4, x.format(names)


def test_counit_and_coassociativity(twist):
    assert counit_check(twist, 3) == []
    assert coassociativity_check(twist, 3) == []


def test_pairing_is_factorial_diagonal_mod_h(twist):
    P, mons = pairing_matrix(twist, 3)
    for i, a in enumerate(mons):
        for j, b in enumerate(mons):
            c0 = P[i, j].coeffs[0]
            assert c0 == (expo_factorial(a) if a == b else 0)
    assert P[mons.index((2, 0, 0, 0, 0)), mons.index((2, 0, 0, 0, 0))].coeffs[0] == 2


def test_pairing_values_from_twist(pairing):
    # <xi2 xi4, X1> = <xi2 (x) xi4, Delta X1> = h
    v = pairing.value((0, 1, 0, 1, 0), (1, 0, 0, 0, 0))
    assert v.as_dict() == {1: 1}
    assert pairing.value((1, 1, 0, 1, 0), (2, 0, 0, 0, 0)).as_dict() == {1: 2}


def test_dual_products(twist, pairing):
    xi = lambda e, c, k: NCPoly(5, twist.trunc, {(e, k): Fraction(c)})
    assert dual_product(1, 3, twist, 4, pairing=pairing) == xi((1, 0, 0, 0, 0), 2, 1)
    assert dual_product(1, 4, twist, 4, pairing=pairing) == xi((2, 0, 0, 0, 0), -1, 1)
    assert dual_product(0, 1, twist, 4, pairing=pairing).is_zero()


def test_dual_coproduct_of_xi3(twist, pairing):
    d = dual_coproduct(2, twist, 4, pairing=pairing)
    z = (0,) * 5
    u = lambda i: tuple(1 if k == i else 0 for k in range(5))
    expect = {(u(2), z, 0): 1, (z, u(2), 0): 1, (u(1), u(0), 0): -1}
    assert d.flat() == expect


@pytest.mark.parametrize("name", ["filiform5", "scaled5", "abelian3", "solvable2"])
def test_vee_f_round_trip(name):
    p = load_presentation(data(name))
    f = f_presentation(p)
    assert f.trunc == p.trunc + 1
    back = vee_presentation(f)
    assert back.trunc == p.trunc and back.brackets == p.brackets


def test_f_form_of_filiform5_is_divisible_by_h():
    f = f_presentation(load_presentation(data("filiform5")))
    assert all(k >= 1 for g in f.brackets.values() for (_, k) in g.flat())
    assert f.dual_constants()[(1, 3)] == {0: 2}


def test_vee_rejects_undivisible():
    f = FPresentation(["x1", "x2"], {(0, 1): NCPoly(2, 3, {((1, 0), 0): 1})}, 3, validate=False)
    with pytest.raises(InexactDivision):
        vee_presentation(f)


def test_f_rejects_high_degree_without_enough_h():
    p = Presentation(["e1", "e2"], {(0, 1): NCPoly(2, 3, {((3, 0), 1): 1})}, 3)
    with pytest.raises(InexactDivision):
        f_presentation(p)


def test_tensor_arith():
    a = NCPoly.monomial((1, 0), 2, 3)
    b = NCPoly.monomial((0, 1), 2, 3)
    x = TensorElement.simple(a, b)
    assert (x - x).is_zero()
    assert x.scale(2, 1).coeff((1, 0), (0, 1)).as_dict() == {1: 2}


@pytest.mark.parametrize("i,j,beta,value", [
    (1, 3, (1, 0, 0, 0, 0), {1: 2}),
    (2, 4, (3, 0, 0, 0, 0), {1: 4}),
    (3, 4, (4, 0, 0, 0, 0), {1: -4}),
    (1, 4, (2, 0, 0, 0, 0), {1: -2}),
    (2, 3, (2, 0, 0, 0, 0), {1: -2}),
])
def test_commutator_functionals_against_twisted_coproduct(twist, i, j, beta, value):
    # <xi_i (x) xi_j - xi_j (x) xi_i, Delta^R(X^beta)>; dividing by <xi1^d, X1^d> = d! gives h^1 coefficients
    w = {(i, j): 1, (j, i): -1}
    assert pair_tensor(w, twist.coproduct(beta)).as_dict() == value
