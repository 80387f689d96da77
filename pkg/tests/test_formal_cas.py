from fractions import Fraction

import numpy as np
import pytest

from gupstar.formal_cas import (ALT, MAIN, FormalPoly, ParseError, classical_limit,
                                eval_on_grid, formal_commutator, formal_eval, formal_star,
                                format_poly, parse_poly)

Q = FormalPoly.var("q")
P = FormalPoly.var("p")
S = FormalPoly.var("s")
LAM = FormalPoly.var("lam")
HBAR = FormalPoly.var("hbar")
BETA = FormalPoly.var("beta")
ONE = FormalPoly.const(1)


def test_ring_arithmetic():
    assert (Q + P) - P == Q
    assert Q * P == P * Q
    assert (Q + P) * (Q - P) == Q * Q - P * P
    assert FormalPoly.zero().is_zero()
    assert (Q - Q).is_zero()
    # the square root symbol closes: s^2 = 1 + beta p^2
    assert S * S == ONE + BETA * P * P
    assert S * S * S * S == (ONE + BETA * P * P) * (ONE + BETA * P * P)


def test_denominator_cancellation():
    inv = FormalPoly({(0, 0, 0, 0, 0, 0, 1): (Fraction(1), Fraction(0))})
    assert inv.times_bp2() == ONE
    assert (inv * (ONE + BETA * P * P)) == ONE
    # s * s^{-1} = 1
    assert S.times_s_inverse() == ONE
    assert inv.times_s_inverse() * S == inv


def test_main_products_exact():
    r = formal_commutator(MAIN, Q, P, 1)
    assert r.terminated
    assert r.poly == (HBAR + HBAR * BETA * P * P).scale(0, 1)
    assert formal_star(MAIN, Q, Q, 4).poly == Q * Q
    assert formal_star(MAIN, P, P, 4).poly == P * P
    assert formal_star(MAIN, Q, Q, 0).terminated  # degree bound certifies it


def test_classical_limits():
    assert classical_limit(MAIN, Q, P) == ONE + BETA * P * P
    assert classical_limit(MAIN, P, Q) == -(ONE + BETA * P * P)
    assert classical_limit(MAIN, Q * Q, P) == (Q + Q) * (ONE + BETA * P * P)
    assert classical_limit(ALT, Q, P) == ONE + BETA * P * P


def test_alt_products():
    r = formal_commutator(ALT, Q, P, 3)
    assert r.poly == (HBAR + HBAR * BETA * P * P).scale(0, 1)
    assert formal_star(ALT, P, P, 3).poly == P * P
    derived = (Q * Q + (HBAR * BETA * Q * P * (LAM.scale(2) - ONE)).scale(0, 1)
               + HBAR * HBAR * BETA * BETA * P * P * LAM * (ONE - LAM))
    r = formal_star(ALT, Q, Q, 2)
    assert r.terminated
    assert r.poly == derived


def test_associativity_order_by_order():
    K = 4
    monos = [Q, P, Q * P]
    for f in monos:
        for g in monos:
            for h in monos:
                l = formal_star(MAIN, formal_star(MAIN, f, g, K).poly, h, K).poly
                r = formal_star(MAIN, f, formal_star(MAIN, g, h, K).poly, K).poly
                for k in range(K + 1):
                    assert l.coefficient_of_hbar(k) == r.coefficient_of_hbar(k)


def test_termination_flag():
    assert formal_star(MAIN, Q * Q, Q * P, 10).terminated
    # truncating below the degree bound must be flagged as unterminated
    r = formal_star(MAIN, Q * Q * P, Q * Q, 1)
    assert not r.terminated


def test_formal_eval_and_grid(ctx):
    f = Q * P
    assert formal_eval(f, ctx, 2.0, 3.0) == pytest.approx(6.0)
    inv = FormalPoly({(0, 0, 1, 0, 0, 0, 1): (Fraction(1), Fraction(0))})  # s/(1+b p^2)
    v = formal_eval(inv, ctx, 0.0, 1.0)
    assert v == pytest.approx(np.sqrt(2.0) / 2.0)
    lat = eval_on_grid(FormalPoly.const(3), ctx, np.arange(-2, 3), 16)
    assert np.abs(lat.values - 3.0).max() < 1e-15
    lat2 = eval_on_grid(Q, ctx, np.arange(-2, 3), 16)
    assert np.allclose(lat2.values[:, 0], np.arange(-2, 3) * ctx.q_lattice_step)


def test_format_poly():
    assert format_poly(FormalPoly.zero()) == "0"
    r = formal_commutator(MAIN, Q, P, 1).poly
    assert format_poly(r) == "i*hbar*(1 + beta*p^2)"
    assert format_poly(formal_star(MAIN, P, P, 2).poly) == "p^2"
    assert "lam" in format_poly(formal_star(ALT, Q, Q, 2).poly)


def test_parse_poly():
    assert parse_poly("q p") == Q * P
    assert parse_poly("3/2 q^2 p") == (Q * Q * P).scale(Fraction(3, 2))
    assert parse_poly("q - p") == Q - P
    assert parse_poly("-q + 2 p") == -Q + (P + P)
    assert parse_poly("i*hbar s") == (HBAR * S).scale(0, 1)
    with pytest.raises(ParseError):
        parse_poly("q @ p")
    with pytest.raises(ParseError):
        parse_poly("q ^ x")


def test_parse_error_position():
    with pytest.raises(ParseError) as err:
        parse_poly("q p + !")
    assert "position 6" in str(err.value)
