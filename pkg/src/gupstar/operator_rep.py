"""Momentum-space operator representation.

Every transformed field corresponds to an integral operator on the circle
Hilbert space through an index shear of its coefficient grid; the map is a
bijection of discrete mode lattices, so going back and forth is exact.  All
operator-level facts (composition, adjoint, trace, Hilbert-Schmidt pairing,
operator norm) are computed here on kernel sample matrices with the uniform
invariant-measure weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .beta_arith import BetaContext
from .sampling import (
    TorusField,
    Wavefunction,
    _coeffs_to_vals,
    _frozen,
    _vals_to_coeffs,
    angle_nodes,
    field_from_coeffs,
    mode_numbers,
    wf_inner,
)

__all__ = [
    "OperatorKernel",
    "DensityState",
    "StateReport",
    "UncertaintyReport",
    "kernel_of",
    "element_of",
    "apply_operator",
    "trace_op",
    "wigner",
    "marginal_momentum",
    "qhat_apply",
    "phat_apply",
    "lambda_ordered_operator",
    "operator_norm",
    "state_check",
    "uncertainty",
]


@dataclass(frozen=True)
class OperatorKernel:
    """Samples K[a, b] of an integral kernel, second slot paired with d mu.

    ``mod = (mu_u, mu_v)`` are real frequency offsets of the two slots, the
    kernel-side image of a field modulation.
    """

    ctx: BetaContext
    values: np.ndarray
    mod: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] % 2 != 0:
            raise ValueError("kernel needs a square sample array of even size")
        object.__setattr__(self, "values", _frozen(v))
        object.__setattr__(self, "mod", (float(self.mod[0]), float(self.mod[1])))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def weight(self) -> float:
        """Quadrature weight of the contracted slot: pi/(n sqrt(beta))."""
        return np.pi / (self.n * self.ctx.sqrt_beta)

    def matrix(self) -> np.ndarray:
        """Weighted matrix acting on plain sample vectors."""
        return self.weight * self.values

    def coeffs(self) -> np.ndarray:
        mu_u, mu_v = self.mod
        a = angle_nodes(self.n)
        strip = np.exp(-2j * (mu_u * a[:, None] + mu_v * a[None, :]))
        return _vals_to_coeffs(_vals_to_coeffs(self.values * strip, axis=0), axis=1)


def _kernel_from_coeffs(ctx, kc, mod):
    n = kc.shape[0]
    a = angle_nodes(n)
    vals = _coeffs_to_vals(_coeffs_to_vals(kc, axis=0), axis=1)
    vals = vals * np.exp(2j * (mod[0] * a[:, None] + mod[1] * a[None, :]))
    return OperatorKernel(ctx, vals, mod)


def _shear_indices(n: int):
    m = mode_numbers(n).astype(int)
    c, b = np.meshgrid(m, m, indexing="ij")
    return np.mod(b + c, n), np.mod(-c, n)


def kernel_of(f: TorusField) -> OperatorKernel:
    """Integral kernel of the operator represented by a field.

    In coefficient space the map is the unimodular index shear
    (b, c) -> (b + c, -c) together with the 1/(2 pi hbar) normalization; being
    a permutation of the discrete mode lattice it is exactly invertible.
    """
    n = f.n
    coef = f.coeffs() / (2 * np.pi * f.ctx.hbar)
    iu, iv = _shear_indices(n)
    kc = np.zeros_like(coef)
    kc[iu, iv] = coef
    s0, b0 = f.mod
    return _kernel_from_coeffs(f.ctx, kc, (b0 + s0, -s0))


def element_of(k: OperatorKernel) -> TorusField:
    """Inverse of :func:`kernel_of`."""
    n = k.n
    kc = k.coeffs() * (2 * np.pi * k.ctx.hbar)
    iu, iv = _shear_indices(n)
    coef = kc[iu, iv]
    mu_u, mu_v = k.mod
    return field_from_coeffs(k.ctx, coef, (-mu_v, mu_u + mu_v))


def compose_kernels(kf: OperatorKernel, kg: OperatorKernel) -> OperatorKernel:
    if kf.n != kg.n:
        raise ValueError("kernel grids differ")
    vals = kf.weight * (kf.values @ kg.values)
    return OperatorKernel(kf.ctx, vals, (kf.mod[0], kg.mod[1]))


def adjoint_kernel(k: OperatorKernel) -> OperatorKernel:
    return OperatorKernel(k.ctx, k.values.conj().T, (-k.mod[1], -k.mod[0]))


def apply_operator(f: TorusField, psi: Wavefunction) -> Wavefunction:
    """Act with the operator of a field on a state (kernel contraction)."""
    if f.n != psi.n:
        raise ValueError("field and wavefunction grids differ")
    k = kernel_of(f)
    out = k.matrix() @ psi.values
    return Wavefunction(psi.ctx, out, mod=k.mod[0])


def trace_op(k: OperatorKernel) -> complex:
    """Operator trace: invariant-measure integral of the kernel diagonal."""
    n = k.n
    a = angle_nodes(n)
    mtot = k.mod[0] + k.mod[1]
    d = np.diagonal(k.values) * np.exp(-2j * mtot * a)
    dm = _vals_to_coeffs(d)
    return complex(np.pi / k.ctx.sqrt_beta * (dm * np.sinc(mtot + mode_numbers(n))).sum())


def hilbert_schmidt(kf: OperatorKernel, kg: OperatorKernel) -> complex:
    """Tr(kf^dagger kg) by double quadrature; exact when modulations match."""
    if kf.n != kg.n:
        raise ValueError("kernel grids differ")
    return complex(kf.weight ** 2 * np.vdot(kf.values, kg.values))


# ---------------------------------------------------------------------------
# Wigner transform and density matrices
# ---------------------------------------------------------------------------

def wigner(phi: Wavefunction, psi: Wavefunction) -> TorusField:
    """Transformed field of the rank-one operator psi (phi, . ).

    ``W~(a', a) = 2 pi hbar psi(a + lam a') conj phi(a - (1 - lam) a')``;
    conjugate linear in phi, linear in psi.  Row evaluations use spectral
    shifts of the sampled states, with modulations handled in closed form.
    """
    if phi.n != psi.n:
        raise ValueError("wavefunction grids differ")
    ctx = psi.ctx
    n, lam = psi.n, ctx.lam
    ap = angle_nodes(n)[:, None]
    a = angle_nodes(n)[None, :]
    m = mode_numbers(n)[None, :]
    cps, cph = psi.coeffs()[None, :], phi.coeffs()[None, :]
    ps = _coeffs_to_vals(cps * np.exp(2j * m * lam * ap), axis=1)
    ps = ps * np.exp(2j * psi.mod * (a + lam * ap))
    ph = _coeffs_to_vals(cph * np.exp(-2j * m * (1 - lam) * ap), axis=1)
    ph = ph * np.exp(2j * phi.mod * (a - (1 - lam) * ap))
    vals = 2 * np.pi * ctx.hbar * ps * np.conj(ph)
    return TorusField(ctx, vals, (phi.mod, psi.mod - phi.mod))


@dataclass(frozen=True)
class DensityState:
    """Convex mixture of normalized states."""

    weights: tuple
    states: tuple

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if any(x < 0 for x in w) or abs(sum(w) - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to one")
        for s in self.states:
            if abs(s.norm() - 1.0) > 1e-9:
                raise ValueError("mixture components must be normalized")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "states", tuple(self.states))

    def field(self) -> TorusField:
        acc = None
        for w, s in zip(self.weights, self.states):
            t = wigner(s, s)
            acc = t.with_values(w * t.values) if acc is None else acc.with_values(acc.values + w * t.values)
        return acc


def marginal_momentum(rho: TorusField) -> np.ndarray:
    """Momentum probability density on the grid: f~(0, alpha)/(2 pi hbar)."""
    n = rho.n
    col = rho.coeffs().sum(axis=0)  # alpha' = 0 kills every first-slot phase
    vals = _coeffs_to_vals(col[None, :], axis=1)[0]
    vals = vals * np.exp(2j * rho.mod[1] * angle_nodes(n))
    return (vals / (2 * np.pi * rho.ctx.hbar)).real


# ---------------------------------------------------------------------------
# position / momentum operators and ordered symbols
# ---------------------------------------------------------------------------

def qhat_apply(psi: Wavefunction) -> Wavefunction:
    """Position operator i hbar sqrt(beta) d/d alpha."""
    out = 1j * psi.ctx.hbar * psi.ctx.sqrt_beta * psi.alpha_derivative()
    return Wavefunction(psi.ctx, out, mod=psi.mod)


def phat_apply(psi: Wavefunction) -> Wavefunction:
    """Momentum operator: multiplication by tan(alpha)/sqrt(beta)."""
    p = np.tan(angle_nodes(psi.n)) / psi.ctx.sqrt_beta
    return Wavefunction(psi.ctx, p * psi.values, mod=psi.mod)


def lambda_ordered_operator(sym) -> Callable[[Wavefunction], Wavefunction]:
    """Operator of the symbol q^n phi(p) in the chosen ordering.

    Returns a closure applying
    sum_l C(n, l) lam^l (1-lam)^(n-l) qhat^l phi(phat) qhat^(n-l).
    ``sym`` provides ``power`` (the q exponent) and ``phi`` (a Wavefunction-like
    sample vector of phi on the angle grid, with optional modulation).
    """
    npow = int(sym.power)
    phi = sym.phi

    def op(psi: Wavefunction) -> Wavefunction:
        lam = psi.ctx.lam
        acc = None
        for l in range(npow + 1):
            w = math.comb(npow, l) * lam ** l * (1 - lam) ** (npow - l)
            cur = psi
            for _ in range(npow - l):
                cur = qhat_apply(cur)
            cur = Wavefunction(psi.ctx, phi.values * cur.values, mod=phi.mod + cur.mod)
            for _ in range(l):
                cur = qhat_apply(cur)
            if acc is None:
                acc = w * cur.values
                mod = cur.mod
            else:
                acc = acc + w * cur.values
        return Wavefunction(psi.ctx, acc, mod=mod)

    return op


# ---------------------------------------------------------------------------
# norms, state checks, uncertainties
# ---------------------------------------------------------------------------

def operator_norm(k: OperatorKernel, rel_tol: float = 1e-8,
                  max_iter: int = 10_000, seed: int = 0) -> float:
    """Largest singular value of the weighted kernel matrix.

    Plain power iteration on M^dagger M with a deterministic random start;
    raises RuntimeError if the requested relative tolerance is not reached.
    """
    M = k.matrix()
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(k.n) + 1j * rng.standard_normal(k.n)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iter):
        w = M.conj().T @ (M @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        new = math.sqrt(nw)
        v = w / nw
        if abs(new - est) <= rel_tol * max(new, 1e-300):
            return new
        est = new
    raise RuntimeError(f"operator norm power iteration did not converge in {max_iter} steps")


@dataclass(frozen=True)
class StateReport:
    hermitian: bool
    trace: complex
    min_eig: float
    hermiticity_residual: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "hermitian": self.hermitian,
            "trace": [self.trace.real, self.trace.imag],
            "min_eig": self.min_eig,
            "hermiticity_residual": self.hermiticity_residual,
            "passed": self.passed,
        }


def state_check(rho: TorusField, herm_tol: float = 1e-8,
                trace_tol: float = 1e-8, eig_tol: float = -1e-9) -> StateReport:
    """Verify the three state conditions on a candidate density field.

    Hermiticity is the kernel-level self-adjointness K = K^dagger, positivity
    the spectrum of the weighted kernel matrix; the smallest eigenvalue must
    stay above ``eig_tol`` (slightly negative to absorb roundoff on exact
    rank-deficient states).
    """
    k = kernel_of(rho)
    M = k.matrix()
    scale = max(np.abs(M).max(), 1e-300)
    herm_res = float(np.abs(M - M.conj().T).max() / scale)
    hermitian = herm_res <= herm_tol
    tr = trace_op(k)
    if hermitian:
        eigs = np.linalg.eigvalsh(0.5 * (M + M.conj().T))
        min_eig = float(eigs.min())
    else:
        min_eig = float("nan")
    passed = hermitian and abs(tr - 1.0) <= trace_tol and (hermitian and min_eig >= eig_tol)
    return StateReport(hermitian, tr, min_eig, herm_res, passed)


@dataclass(frozen=True)
class UncertaintyReport:
    mean_q: float
    mean_p: float
    dq: float
    dp: float
    gup_slack: float

    def as_dict(self) -> dict:
        return {"mean_q": self.mean_q, "mean_p": self.mean_p,
                "dq": self.dq, "dp": self.dp, "gup_slack": self.gup_slack}


def uncertainty(psi: Wavefunction, norm_tol: float = 1e-8) -> UncertaintyReport:
    """Means and spreads of position and momentum, plus the uncertainty slack.

    ``gup_slack = dq*dp - (hbar/2)(1 + beta*dp^2 + beta*<p>^2)`` is nonnegative
    for physical states and zero exactly on maximal-localization states.
    """
    if abs(psi.norm() - 1.0) > norm_tol:
        raise ValueError("uncertainty requires a normalized wavefunction")
    ctx = psi.ctx
    qpsi = qhat_apply(psi)
    ppsi = phat_apply(psi)
    mean_q = wf_inner(psi, qpsi).real
    mean_p = wf_inner(psi, ppsi).real
    q2 = wf_inner(qpsi, qpsi).real
    p2 = wf_inner(ppsi, ppsi).real
    dq = math.sqrt(max(q2 - mean_q ** 2, 0.0))
    dp = math.sqrt(max(p2 - mean_p ** 2, 0.0))
    slack = dq * dp - 0.5 * ctx.hbar * (1.0 + ctx.beta * dp ** 2 + ctx.beta * mean_p ** 2)
    return UncertaintyReport(mean_q, mean_p, dq, dp, slack)
