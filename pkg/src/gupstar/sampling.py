"""Grids, discrete carriers and spectral primitives.

Momentum space is parametrized by the angle ``alpha = arctan(sqrt(beta) p)``;
all sampling happens on a uniform half-offset grid of n angles

    alpha_j = -pi/2 + pi*(j + 1/2)/n,    j = 0..n-1,

which never touches the point at infinity.  The invariant measure is
``d mu = d alpha / sqrt(beta)``, so the midpoint rule is the natural (and for
trigonometric polynomials exact) quadrature.

A :class:`TorusField` holds samples ``F[j, k]`` of the position-transformed
function f~(p', p) at (alpha'_j, alpha_k).  Transformed fields of algebra
elements are not plainly pi-periodic in alpha': they obey the glide periodicity
F(A' + pi, A - lam*pi) = F(A', A).  The carrier therefore expands fields in the
sheared basis

    F(A', A) = phase(A', A) * sum_{b,c} coef[c, b]
               * exp(2i((lam*b + c) A' + b A)),

with integer b (alpha modes) and c (alpha' modes), plus an optional real
modulation pair ``mod = (s0, b0)`` contributing the prefactor
``phase = exp(2i((lam*b0 + s0) A' + b0 A))``.  The modulation carries exactly
the non-periodic content of position eigenvectors and shifted localization
states, keeping every spectral operation exact on band-limited data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .beta_arith import BetaContext

__all__ = [
    "AngleGrid",
    "Wavefunction",
    "TorusField",
    "LatticeField",
    "angle_nodes",
    "mode_numbers",
    "quad_mu",
    "shift_field",
    "synth",
    "synth_grid",
    "synth_columns",
    "analyze",
    "seminorm",
    "deriv_p",
    "deriv_pprime",
    "torus_to_csv",
    "lattice_to_csv",
    "write_text_atomic",
]


def angle_nodes(n: int) -> np.ndarray:
    if n <= 0 or n % 2 != 0:
        raise ValueError(f"grid size must be a positive even integer, got {n}")
    return -np.pi / 2 + np.pi * (np.arange(n) + 0.5) / n


def mode_numbers(n: int) -> np.ndarray:
    """Integer mode numbers in FFT ordering: 0..n/2-1, -n/2..-1."""
    return np.fft.fftfreq(n, 1.0 / n)


@dataclass(frozen=True)
class AngleGrid:
    """Uniform half-offset angle grid with n (even) nodes and spacing pi/n."""

    n: int

    def __post_init__(self):
        if self.n <= 0 or self.n % 2 != 0:
            raise ValueError(f"grid size must be a positive even integer, got {self.n}")

    @property
    def nodes(self) -> np.ndarray:
        return angle_nodes(self.n)

    @property
    def spacing(self) -> float:
        return np.pi / self.n


# ---------------------------------------------------------------------------
# spectral helpers on the half-offset grid
# ---------------------------------------------------------------------------

def _vals_to_coeffs(v: np.ndarray, axis: int = -1) -> np.ndarray:
    """Coefficients of sum_m c_m e^{2i m alpha} from samples on the grid."""
    n = v.shape[axis]
    c = np.fft.fft(v, axis=axis) / n
    ph = np.exp(-2j * mode_numbers(n) * angle_nodes(n)[0])
    shape = [1] * v.ndim
    shape[axis] = n
    return c * ph.reshape(shape)


def _coeffs_to_vals(c: np.ndarray, axis: int = -1) -> np.ndarray:
    n = c.shape[axis]
    ph = np.exp(2j * mode_numbers(n) * angle_nodes(n)[0])
    shape = [1] * c.ndim
    shape[axis] = n
    return np.fft.ifft(c * ph.reshape(shape), axis=axis) * n


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# wavefunctions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Wavefunction:
    """Momentum-representation state: n complex samples on the angle grid.

    ``mod`` is a real frequency offset: the represented function is
    ``psi(alpha) = exp(2i*mod*alpha) * (trigonometric polynomial)``.  Closed
    form constructors may attach ``deriv``, exact samples of d psi/d alpha
    (modulation included), which spectral differentiation then uses verbatim;
    this matters for states that are continuous but kinked at infinity.
    """

    ctx: BetaContext
    values: np.ndarray
    mod: float = 0.0
    deriv: Optional[np.ndarray] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 1 or v.size % 2 != 0:
            raise ValueError("wavefunction needs a 1-d sample array of even length")
        object.__setattr__(self, "values", _frozen(v))
        if self.deriv is not None:
            d = np.asarray(self.deriv, dtype=complex)
            if d.shape != v.shape:
                raise ValueError("derivative samples must match the value samples")
            object.__setattr__(self, "deriv", _frozen(d))

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def grid(self) -> AngleGrid:
        return AngleGrid(self.values.size)

    def coeffs(self) -> np.ndarray:
        """Coefficients of the demodulated part, FFT mode ordering."""
        a = angle_nodes(self.n)
        return _vals_to_coeffs(self.values * np.exp(-2j * self.mod * a))

    def at_offset(self, t: float) -> np.ndarray:
        """Samples of psi(alpha_k + t), exact on band-limited content."""
        c = self.coeffs() * np.exp(2j * mode_numbers(self.n) * t)
        a = angle_nodes(self.n)
        return _coeffs_to_vals(c) * np.exp(2j * self.mod * (a + t))

    def alpha_derivative(self) -> np.ndarray:
        """d psi / d alpha: exact samples when attached, else spectral."""
        if self.deriv is not None:
            return np.asarray(self.deriv)
        m = mode_numbers(self.n).copy()
        m[self.n // 2] = 0.0  # unpaired Nyquist mode carries no odd derivative
        c = self.coeffs() * 2j * (m + self.mod)
        a = angle_nodes(self.n)
        return _coeffs_to_vals(c) * np.exp(2j * self.mod * a)

    def norm(self) -> float:
        return math.sqrt(max(quad_mu(self.ctx, self.grid, np.abs(self.values) ** 2).real, 0.0))

    def normalized(self) -> "Wavefunction":
        nv = self.norm()
        if nv == 0.0:
            raise ValueError("cannot normalize the zero wavefunction")
        d = None if self.deriv is None else self.deriv / nv
        return Wavefunction(self.ctx, self.values / nv, self.mod, d)


def quad_mu(ctx: BetaContext, grid: AngleGrid, samples: np.ndarray) -> complex:
    """Invariant-measure quadrature: (1/sqrt(beta)) * (pi/n) * sum(samples).

    Exact for trigonometric modes e^{2ik alpha} with |k| < n.
    """
    samples = np.asarray(samples)
    if samples.shape != (grid.n,):
        raise ValueError(f"expected {grid.n} samples, got shape {samples.shape}")
    return complex((np.pi / grid.n) / ctx.sqrt_beta * samples.sum())


def wf_inner(phi: Wavefunction, psi: Wavefunction) -> complex:
    """Hilbert-space scalar product, conjugate-linear in the first slot."""
    if phi.n != psi.n:
        raise ValueError("wavefunction grids differ")
    return complex((np.pi / phi.n) / phi.ctx.sqrt_beta * np.vdot(phi.values, psi.values))


# ---------------------------------------------------------------------------
# torus fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TorusField:
    """n x n samples F[j, k] = f~(alpha'_j, alpha_k) with sheared-basis layout."""

    ctx: BetaContext
    values: np.ndarray
    mod: tuple[float, float] = (0.0, 0.0)  # (s0, b0)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] % 2 != 0:
            raise ValueError("field needs a square sample array of even size")
        object.__setattr__(self, "values", _frozen(v))
        object.__setattr__(self, "mod", (float(self.mod[0]), float(self.mod[1])))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def grid(self) -> AngleGrid:
        return AngleGrid(self.n)

    def modulation_phase(self) -> np.ndarray:
        s0, b0 = self.mod
        ap = angle_nodes(self.n)[:, None]
        a = angle_nodes(self.n)[None, :]
        return np.exp(2j * ((self.ctx.lam * b0 + s0) * ap + b0 * a))

    def coeffs(self) -> np.ndarray:
        """Sheared coefficients coef[c, b] of the demodulated part."""
        n = self.n
        g = self.values / self.modulation_phase()
        cb = _vals_to_coeffs(g, axis=1)  # integer alpha modes b
        dem = np.exp(-2j * self.ctx.lam * mode_numbers(n)[None, :] * angle_nodes(n)[:, None])
        return _vals_to_coeffs(cb * dem, axis=0)

    def freq_grids(self) -> tuple[np.ndarray, np.ndarray]:
        """Effective (alpha'-frequency, alpha-frequency) arrays, shape (n, n)."""
        n = self.n
        s0, b0 = self.mod
        c, b = np.meshgrid(mode_numbers(n), mode_numbers(n), indexing="ij")
        bt = b0 + b
        return self.ctx.lam * bt + s0 + c, bt

    def with_values(self, values: np.ndarray, mod=None) -> "TorusField":
        return TorusField(self.ctx, values, self.mod if mod is None else mod)


def field_from_coeffs(ctx: BetaContext, coef: np.ndarray,
                      mod: tuple[float, float] = (0.0, 0.0)) -> TorusField:
    """Inverse of :meth:`TorusField.coeffs`."""
    n = coef.shape[0]
    cb = _coeffs_to_vals(coef, axis=0)
    rem = np.exp(2j * ctx.lam * mode_numbers(n)[None, :] * angle_nodes(n)[:, None])
    vals = _coeffs_to_vals(cb * rem, axis=1)
    out = TorusField(ctx, vals, mod)
    return out.with_values(vals * out.modulation_phase())


def shift_field(f: TorusField, d_alpha_prime: float = 0.0, d_alpha=0.0) -> TorusField:
    """Evaluate the field at translated arguments.

    Returns samples of ``F(alpha'_j + d_alpha_prime, alpha_k + d_alpha)``.
    ``d_alpha`` may be a scalar or one offset per row; per-row offsets are what
    the operator and Wigner constructions need.  Exact on band-limited fields.
    """
    n = f.n
    s0, b0 = f.mod
    lam = f.ctx.lam
    a = angle_nodes(n)
    vals = f.values

    d_alpha = np.asarray(d_alpha, dtype=float)
    if d_alpha.ndim != 0 or float(d_alpha) != 0.0:
        offs = np.broadcast_to(d_alpha, (n,)).astype(float)
        g = vals * np.exp(-2j * b0 * a)[None, :]
        cb = _vals_to_coeffs(g, axis=1)
        cb = cb * np.exp(2j * mode_numbers(n)[None, :] * offs[:, None])
        vals = _coeffs_to_vals(cb, axis=1) * np.exp(2j * b0 * (a[None, :] + offs[:, None]))

    d1 = float(d_alpha_prime)
    if d1 != 0.0:
        tmp = TorusField(f.ctx, vals, f.mod)
        coef = tmp.coeffs()
        nu, _ = tmp.freq_grids()
        mod_nu = lam * b0 + s0
        coef = coef * np.exp(2j * (nu - mod_nu) * d1)
        out = field_from_coeffs(f.ctx, coef, f.mod)
        vals = out.values * np.exp(2j * mod_nu * d1)
    return TorusField(f.ctx, vals, f.mod)


def deriv_p(f: TorusField) -> TorusField:
    """Translation generator in the second slot: sqrt(beta) d/d alpha."""
    _, bt = f.freq_grids()
    coef = f.coeffs() * (2j * f.ctx.sqrt_beta * bt)
    return field_from_coeffs(f.ctx, coef, f.mod)


def deriv_pprime(f: TorusField) -> TorusField:
    """Translation generator in the first slot: sqrt(beta) d/d alpha'."""
    nu, _ = f.freq_grids()
    coef = f.coeffs() * (2j * f.ctx.sqrt_beta * nu)
    return field_from_coeffs(f.ctx, coef, f.mod)


def seminorm(f: TorusField, n_idx: int, m_idx: int) -> float:
    """Sup of |D_{p'}^n D_p^m f~| over the grid (Frechet seminorm)."""
    if n_idx < 0 or m_idx < 0:
        raise ValueError("seminorm orders must be nonnegative")
    nu, bt = f.freq_grids()
    mult = (2j * f.ctx.sqrt_beta * nu) ** n_idx * (2j * f.ctx.sqrt_beta * bt) ** m_idx
    g = field_from_coeffs(f.ctx, f.coeffs() * mult, f.mod)
    return float(np.abs(g.values).max())


def synth_columns(f: TorusField, qs: np.ndarray) -> np.ndarray:
    """f(q, p) on the angle grid columns for an array of positions q.

    Implements the inverse position transform
    ``f(q,p) = (1/(2 pi hbar sqrt(beta))) Int F(a', alpha(p)) e^{i q a'/(hbar sqrt(beta))} da'``
    through per-mode window integrals, exact for the carried frequency content.
    Returns an array of shape (len(qs), n).
    """
    qs = np.atleast_1d(np.asarray(qs, dtype=float))
    n = f.n
    coef = f.coeffs()
    nu, _ = f.freq_grids()
    w = qs / (2.0 * f.ctx.hbar * f.ctx.sqrt_beta)
    # inner[iq, b] = sum_c coef[c, b] sinc(nu[c, b] + w[iq])
    inner = np.empty((qs.size, n), dtype=complex)
    for iq, wv in enumerate(w):
        inner[iq] = (coef * np.sinc(nu + wv)).sum(axis=0)
    vals = _coeffs_to_vals(inner, axis=1)
    a = angle_nodes(n)[None, :]
    vals = vals * np.exp(2j * f.mod[1] * a)
    return vals / (2.0 * f.ctx.hbar * f.ctx.sqrt_beta)


def synth_grid(f: TorusField, qs: np.ndarray, ps: np.ndarray) -> np.ndarray:
    """f(q, p) on an arbitrary rectangular (q, p) window, shape (len(qs), len(ps))."""
    qs = np.atleast_1d(np.asarray(qs, dtype=float))
    ps = np.atleast_1d(np.asarray(ps, dtype=float))
    n = f.n
    coef = f.coeffs()
    nu, _ = f.freq_grids()
    b = mode_numbers(n) + f.mod[1]
    alphas = np.arctan(f.ctx.sqrt_beta * ps)
    eb = np.exp(2j * np.outer(b, alphas))  # (n, len(ps))
    w = qs / (2.0 * f.ctx.hbar * f.ctx.sqrt_beta)
    out = np.empty((qs.size, ps.size), dtype=complex)
    for iq, wv in enumerate(w):
        inner = (coef * np.sinc(nu + wv)).sum(axis=0)  # (n,) over b
        out[iq] = inner @ eb
    return out / (2.0 * f.ctx.hbar * f.ctx.sqrt_beta)


def synth(f: TorusField, q: float, p) -> complex:
    """Point evaluation of f(q, p); p may be the INFINITY sentinel."""
    from .beta_arith import is_infinite
    if is_infinite(p):
        n = f.n
        coef = f.coeffs()
        nu, _ = f.freq_grids()
        w = q / (2.0 * f.ctx.hbar * f.ctx.sqrt_beta)
        b = mode_numbers(n) + f.mod[1]
        inner = (coef * np.sinc(nu + w)).sum(axis=0)
        val = (inner * np.exp(2j * b * (-np.pi / 2))).sum()
        return complex(val / (2.0 * f.ctx.hbar * f.ctx.sqrt_beta))
    return complex(synth_grid(f, np.array([q]), np.array([float(p)]))[0, 0])


# ---------------------------------------------------------------------------
# position-lattice fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LatticeField:
    """Samples f(q_m, p(alpha_k)) on the position lattice q_m = m * q_lattice_step."""

    ctx: BetaContext
    ms: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        ms = np.asarray(self.ms, dtype=int)
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (ms.size, v.shape[1]) or v.shape[1] % 2 != 0:
            raise ValueError("lattice field shape must be (len(ms), n) with even n")
        object.__setattr__(self, "ms", _frozen(ms))
        object.__setattr__(self, "values", _frozen(v))

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def qs(self) -> np.ndarray:
        return self.ms * self.ctx.q_lattice_step


def lattice_from_field(f: TorusField, half_width: Optional[int] = None) -> LatticeField:
    """Sample a field on the position lattice m in [-M, M]; default M = 4n."""
    M = 4 * f.n if half_width is None else int(half_width)
    ms = np.arange(-M, M + 1)
    vals = synth_columns(f, ms * f.ctx.q_lattice_step)
    return LatticeField(f.ctx, ms, vals)


def analyze(ctx: BetaContext, lattice: LatticeField) -> TorusField:
    """Position transform of lattice samples onto the torus.

    ``f~(a', a) = q_lattice_step * sum_m f(q_m, a) e^{-2 i m a'}``; inverse of
    the lattice sampling of :func:`synth_columns` for data whose lattice modes
    fit below the Nyquist index n/2.
    """
    n = lattice.n
    ap = angle_nodes(n)[:, None]
    E = np.exp(-2j * ap * lattice.ms[None, :])
    vals = ctx.q_lattice_step * (E @ lattice.values)
    return TorusField(ctx, vals)


# ---------------------------------------------------------------------------
# CSV export (full double precision)
# ---------------------------------------------------------------------------

def write_text_atomic(path, text: str) -> None:
    import os
    import tempfile
    path = str(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def torus_to_csv(f: TorusField, path) -> None:
    """Rows `alpha_prime,alpha,re,im`, row-major in (j, k)."""
    ap = angle_nodes(f.n)
    lines = ["alpha_prime,alpha,re,im"]
    for j in range(f.n):
        for k in range(f.n):
            v = f.values[j, k]
            lines.append(f"{ap[j]:.17g},{ap[k]:.17g},{v.real:.17g},{v.imag:.17g}")
    write_text_atomic(path, "\n".join(lines) + "\n")


def lattice_to_csv(lat: LatticeField, path) -> None:
    """Rows `q,p,re,im`, row-major in (m, k)."""
    a = angle_nodes(lat.n)
    ps = np.tan(a) / lat.ctx.sqrt_beta
    qs = lat.qs
    lines = ["q,p,re,im"]
    for i in range(lat.ms.size):
        for k in range(lat.n):
            v = lat.values[i, k]
            lines.append(f"{qs[i]:.17g},{ps[k]:.17g},{v.real:.17g},{v.imag:.17g}")
    write_text_atomic(path, "\n".join(lines) + "\n")
