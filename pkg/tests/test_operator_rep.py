import math

import numpy as np
import pytest

from gupstar.beta_arith import BetaContext
from gupstar.families import random_element, random_state
from gupstar.operator_rep import (DensityState, apply_operator,
                                  element_of, hilbert_schmidt, kernel_of, lambda_ordered_operator,
                                  marginal_momentum, operator_norm, phat_apply, qhat_apply,
                                  state_check, trace_op, uncertainty, wigner)
from gupstar.sampling import AngleGrid, TorusField, Wavefunction, angle_nodes, quad_mu, wf_inner
from gupstar.star_algebra import SymbolObservable, inner, involution, star, star_symbol_left, trace
from gupstar.states import ml_phase_state, position_eigenvector


def test_kernel_round_trip(ctx, rng):
    f = random_element(ctx, 64, rng)
    back = element_of(kernel_of(f))
    assert np.abs(back.values - f.values).max() < 1e-12
    assert back.mod == f.mod


def test_kernel_of_projector(ctx):
    n = 64
    pe = position_eigenvector(ctx, 0.0, n)
    k = kernel_of(pe.rho)
    outer = np.outer(pe.psi.values, np.conj(pe.psi.values))
    assert np.abs(k.values - outer).max() < 1e-12


def test_kernel_standard_ordering_alignment(rng):
    # lam = 0: the kernel argument pair is (difference, first argument)
    ctx0 = BetaContext(1.0, 1.0, 0.0)
    n = 32
    a, b = random_state(ctx0, n, rng), random_state(ctx0, n, rng)
    w = wigner(a, b)
    k = kernel_of(w)
    assert np.abs(k.values - np.outer(b.values, np.conj(a.values))).max() < 1e-10


def test_apply_operator(ctx, rng):
    n = 64
    pe = position_eigenvector(ctx, 3.7, n)
    out = apply_operator(pe.rho, pe.psi)
    assert np.abs(out.values - pe.psi.values).max() < 1e-11  # unit-norm projector
    f = random_element(ctx, n, rng)
    g = random_element(ctx, n, rng)
    psi = random_state(ctx, n, rng)
    lhs = apply_operator(star(f, g), psi)
    rhs = apply_operator(f, apply_operator(g, psi))
    assert np.abs(lhs.values - rhs.values).max() < 1e-9 * np.abs(rhs.values).max()
    phi = random_state(ctx, n, rng)
    assert abs(wf_inner(phi, apply_operator(involution(f), psi))
               - np.conj(wf_inner(psi, apply_operator(f, phi)))) < 1e-10


def test_apply_matches_direct_quadrature(ctx, rng):
    """Row-shifted trapezoid form of the action, independent of kernels."""
    n = 32
    from gupstar.sampling import shift_field
    f = random_element(ctx, n, rng)
    psi = random_state(ctx, n, rng)
    a = angle_nodes(n)
    acc = np.zeros(n, dtype=complex)
    for j in range(n):
        frow = shift_field(f, 0.0, -ctx.lam * a[j]).values[j]  # F(a'_j, a - lam a'_j)
        pv = psi.at_offset(-a[j])
        acc += frow * pv
    direct = acc * (np.pi / n) / (2 * np.pi * ctx.hbar * ctx.sqrt_beta)
    ref = apply_operator(f, psi)
    assert np.abs(direct - ref.values).max() < 1e-10 * np.abs(ref.values).max()


def test_trace_op(ctx, rng):
    n = 64
    f = random_element(ctx, n, rng)
    assert abs(trace_op(kernel_of(f)) - trace(f)) < 1e-10
    pe = position_eigenvector(ctx, 0.0, n)
    assert trace_op(kernel_of(pe.rho)) == pytest.approx(1.0, abs=1e-12)
    g = random_element(ctx, n, rng)
    assert abs(hilbert_schmidt(kernel_of(f), kernel_of(g)) - inner(f, g)) < 1e-10


def test_operator_norm(ctx, rng):
    f = random_element(ctx, 48, rng)
    k = kernel_of(f)
    sv = np.linalg.svd(k.matrix(), compute_uv=False)[0]
    assert operator_norm(k, rel_tol=1e-12) == pytest.approx(sv, rel=1e-8)
    zero = kernel_of(TorusField(ctx, np.zeros((48, 48), complex)))
    assert operator_norm(zero) == 0.0
    with pytest.raises(RuntimeError):
        operator_norm(k, rel_tol=1e-16, max_iter=2)


def test_wigner_theorems(ctx, rng):
    n = 64
    a, b, c, d = (random_state(ctx, n, rng) for _ in range(4))
    # adjoint, trace, inner, product, module structure
    assert np.abs(involution(wigner(a, b)).values - wigner(b, a).values).max() < 1e-11
    assert abs(trace(wigner(a, b)) - wf_inner(a, b)) < 1e-12
    assert abs(inner(wigner(a, b), wigner(c, d))
               - np.conj(wf_inner(a, c)) * wf_inner(b, d)) < 1e-12
    lhs = star(wigner(a, b), wigner(c, d))
    assert np.abs(lhs.values - wf_inner(a, d) * wigner(c, b).values).max() < 1e-10
    f = random_element(ctx, n, rng)
    assert np.abs(star(f, wigner(a, b)).values
                  - wigner(a, apply_operator(f, b)).values).max() < 1e-10
    assert np.abs(star(wigner(a, b), f).values
                  - wigner(apply_operator(involution(f), a), b).values).max() < 1e-10


def test_marginal(ctx, rng):
    n = 64
    a = random_state(ctx, n, rng)
    m = marginal_momentum(wigner(a, a))
    assert np.abs(m - np.abs(a.values) ** 2).max() < 1e-10
    assert quad_mu(ctx, AngleGrid(n), m) == pytest.approx(1.0, abs=1e-12)
    ml = ml_phase_state(ctx, 0.0, 256)
    p = np.tan(angle_nodes(256))
    ref = (2 / math.pi) / (1 + p ** 2)
    assert np.abs(marginal_momentum(ml.rho) - ref).max() < 1e-8


def test_position_momentum_operators(ctx, rng):
    n = 256
    psi = random_state(ctx, n, rng, localized=True)
    p = np.tan(angle_nodes(n))
    comm = qhat_apply(phat_apply(psi)).values - phat_apply(qhat_apply(psi)).values
    ref = 1j * (1 + p ** 2) * psi.values
    assert np.abs(comm - ref).max() < 1e-8 * np.abs(ref).max()
    phi = random_state(ctx, n, rng)
    psi2 = random_state(ctx, n, rng)
    assert abs(wf_inner(phi, qhat_apply(psi2)) - wf_inner(qhat_apply(phi), psi2)) < 1e-11
    assert abs(wf_inner(phi, phat_apply(psi2)) - wf_inner(phat_apply(phi), psi2)) < 1e-11


def test_lambda_ordered_operator(ctx, rng):
    n = 64
    psi = random_state(ctx, n, rng)
    phi_sym = SymbolObservable.from_momentum_function(
        ctx, n, lambda p: 1.0 / (1.0 + p ** 2), power=0)
    op = lambda_ordered_operator(phi_sym)
    assert np.abs(op(psi).values - phi_sym.phi.values * psi.values).max() < 1e-13

    q1 = SymbolObservable.position_power(ctx, n, 1)
    assert np.abs(lambda_ordered_operator(q1)(psi).values
                  - qhat_apply(psi).values).max() < 1e-11

    phi = random_state(ctx, n, rng)
    sym2 = SymbolObservable(2, phi_sym.phi)
    lhs = wf_inner(phi, lambda_ordered_operator(sym2)(psi))
    rhs = trace(star_symbol_left(sym2, wigner(phi, psi)))
    assert abs(lhs - rhs) < 1e-8 * abs(rhs)


def test_state_check(ctx, rng):
    n = 128
    a, b = random_state(ctx, n, rng), random_state(ctx, n, rng)
    mix = TorusField(ctx, 0.5 * wigner(a, a).values + 0.5 * wigner(b, b).values)
    rep = state_check(mix)
    assert rep.passed and rep.hermitian and abs(rep.trace - 1) < 1e-10
    off = state_check(wigner(a, b))
    assert not off.hermitian and not off.passed
    ml = ml_phase_state(ctx, 0.0, n)
    rep2 = state_check(ml.rho, eig_tol=-1e-5)
    assert rep2.passed and rep2.min_eig > -1e-5
    d = rep.as_dict()
    assert set(d) >= {"hermitian", "trace", "min_eig", "passed"}


def test_density_state_mixture(ctx, rng):
    n = 64
    a, b = random_state(ctx, n, rng), random_state(ctx, n, rng)
    ds = DensityState((0.25, 0.75), (a, b))
    rho = ds.field()
    assert state_check(rho).passed
    with pytest.raises(ValueError):
        DensityState((0.4, 0.4), (a, b))


def test_uncertainty(ctx, rng):
    n = 256
    ml = ml_phase_state(ctx, 0.0, n)
    u = uncertainty(ml.psi)
    assert u.mean_q == pytest.approx(0.0, abs=1e-12)
    assert u.mean_p == pytest.approx(0.0, abs=1e-12)
    assert u.dq == pytest.approx(1.0, rel=1e-12)
    assert u.dp == pytest.approx(1.0, rel=1e-12)
    assert abs(u.gup_slack) < 1e-12
    for _ in range(20):
        st = random_state(ctx, n, rng, localized=True)
        assert uncertainty(st).gup_slack >= -1e-9
    with pytest.raises(ValueError):
        uncertainty(Wavefunction(ctx, 2.0 * ml.psi.values))
