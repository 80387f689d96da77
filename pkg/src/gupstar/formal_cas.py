"""Exact formal star-product engine over a small polynomial ring.

Monomials are q^a p^b s^e beta^c hbar^h lam^l / (1 + beta p^2)^d with exact
Gaussian-rational coefficients, where s is a formal square root satisfying
s^2 = 1 + beta p^2 (so e is 0 or 1 after reduction) and d tracks explicit
denominator powers.  The ordering parameter stays symbolic, so ordering
dependence comes out as a polynomial identity rather than a sampled check.
Two derivation pairs are built in: MAIN = (d/dq, (1 + beta p^2) d/dp) and the
alternative momentum-dressed pair ALT; both pairs commute, which the
exponential product formula silently relies on.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Optional, Tuple

import numpy as np

__all__ = [
    "FormalPoly",
    "DerivationPair",
    "MAIN",
    "ALT",
    "formal_star",
    "formal_commutator",
    "classical_limit",
    "eval_on_grid",
    "format_poly",
    "parse_poly",
]

# exponent tuple: (e_q, e_p, e_s, e_beta, e_hbar, e_lam, denom)
Key = Tuple[int, int, int, int, int, int, int]
Coef = Tuple[Fraction, Fraction]  # exact complex rational (real, imag)

_ZERO = (Fraction(0), Fraction(0))
_ONE = (Fraction(1), Fraction(0))


def _cadd(a: Coef, b: Coef) -> Coef:
    return (a[0] + b[0], a[1] + b[1])


def _cneg(a: Coef) -> Coef:
    return (-a[0], -a[1])


def _cmul(a: Coef, b: Coef) -> Coef:
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _acc(d: Dict[Key, Coef], k: Key, c: Coef) -> None:
    s = _cadd(d.get(k, _ZERO), c)
    if s == _ZERO:
        d.pop(k, None)
    else:
        d[k] = s


def _bp2_pieces(power: int):
    """Numerator expansion of (1 + beta p^2)^power: [(d e_p, d e_beta, coef)]."""
    return [(2 * j, j, (Fraction(math.comb(power, j)), Fraction(0)))
            for j in range(power + 1)]


def _divide_by_bp2(terms: Dict[Key, Coef]) -> Optional[Dict[Key, Coef]]:
    """Exact division of a numerator polynomial by 1 + beta p^2, else None."""
    rem = dict(terms)
    quo: Dict[Key, Coef] = {}
    while rem:
        k = max(rem, key=lambda kk: (kk[1], kk[3]))  # lex in (p, beta)
        c = rem[k]
        if k[1] < 2 or k[3] < 1:
            return None
        qk = (k[0], k[1] - 2, k[2], k[3] - 1, k[4], k[5], k[6])
        _acc(quo, qk, c)
        _acc(rem, k, _cneg(c))                                        # beta p^2 piece
        _acc(rem, qk, _cneg(c))                                       # unit piece
    return quo


def _canonicalize(terms: Dict[Key, Coef]) -> Dict[Key, Coef]:
    """Minimal common denominator with exact cancellation of 1 + beta p^2."""
    terms = {k: c for k, c in terms.items() if c != _ZERO}
    if not terms:
        return {}
    dmax = max(k[6] for k in terms)
    if dmax == 0:
        return terms
    lifted: Dict[Key, Coef] = {}
    for k, c in terms.items():
        for dep, deb, bc in _bp2_pieces(dmax - k[6]):
            _acc(lifted, (k[0], k[1] + dep, k[2], k[3] + deb, k[4], k[5], dmax),
                 _cmul(c, bc))
    d = dmax
    while d > 0:
        quo = _divide_by_bp2(lifted)
        if quo is None:
            break
        lifted = quo
        d -= 1
    if d == dmax:
        return lifted
    return {(k[0], k[1], k[2], k[3], k[4], k[5], d): c for k, c in lifted.items()}


class FormalPoly:
    """Sparse exact polynomial in (q, p, s, beta, hbar, lam), s^2 reduced.

    Instances are immutable; all arithmetic is exact and returns canonical
    polynomials (no zero coefficients, minimal denominator power).
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[Key, Coef]] = None, *, _canonical=False):
        t = dict(terms) if terms else {}
        object.__setattr__(self, "terms", t if _canonical else _canonicalize(t))

    def __setattr__(self, *_):
        raise AttributeError("FormalPoly is immutable")

    @staticmethod
    def zero() -> "FormalPoly":
        return FormalPoly({}, _canonical=True)

    @staticmethod
    def const(re, im=0) -> "FormalPoly":
        c = (Fraction(re), Fraction(im))
        if c == _ZERO:
            return FormalPoly.zero()
        return FormalPoly({(0, 0, 0, 0, 0, 0, 0): c}, _canonical=True)

    @staticmethod
    def var(name: str, power: int = 1) -> "FormalPoly":
        idx = {"q": 0, "p": 1, "s": 2, "beta": 3, "hbar": 4, "lam": 5}[name]
        key = [0, 0, 0, 0, 0, 0, 0]
        key[idx] = power
        return FormalPoly({tuple(key): _ONE})

    def __add__(self, other: "FormalPoly") -> "FormalPoly":
        t = dict(self.terms)
        for k, c in other.terms.items():
            _acc(t, k, c)
        return FormalPoly(t)

    def __neg__(self) -> "FormalPoly":
        return FormalPoly({k: _cneg(c) for k, c in self.terms.items()}, _canonical=True)

    def __sub__(self, other: "FormalPoly") -> "FormalPoly":
        return self + (-other)

    def __mul__(self, other: "FormalPoly") -> "FormalPoly":
        out: Dict[Key, Coef] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                c = _cmul(c1, c2)
                eq = k1[0] + k2[0]
                ep = k1[1] + k2[1]
                es = k1[2] + k2[2]
                eb = k1[3] + k2[3]
                eh = k1[4] + k2[4]
                el = k1[5] + k2[5]
                d = k1[6] + k2[6]
                pairs, es = divmod(es, 2)
                for dep, deb, bc in _bp2_pieces(pairs):
                    _acc(out, (eq, ep + dep, es, eb + deb, eh, el, d), _cmul(c, bc))
        return FormalPoly(out)

    def scale(self, re, im=0) -> "FormalPoly":
        c = (Fraction(re), Fraction(im))
        if c == _ZERO:
            return FormalPoly.zero()
        return FormalPoly({k: _cmul(v, c) for k, v in self.terms.items()}, _canonical=True)

    def times_bp2(self) -> "FormalPoly":
        """Multiply by 1 + beta p^2 (cancels a denominator power when present)."""
        out: Dict[Key, Coef] = {}
        for k, c in self.terms.items():
            if k[6] >= 1:
                _acc(out, (k[0], k[1], k[2], k[3], k[4], k[5], k[6] - 1), c)
            else:
                for dep, deb, bc in _bp2_pieces(1):
                    _acc(out, (k[0], k[1] + dep, k[2], k[3] + deb, k[4], k[5], 0),
                         _cmul(c, bc))
        return FormalPoly(out)

    def times_s_inverse(self) -> "FormalPoly":
        """Multiply by s^{-1} = s/(1 + beta p^2)."""
        out: Dict[Key, Coef] = {}
        for k, c in self.terms.items():
            es = k[2] + 1
            d = k[6] + 1
            pairs, es = divmod(es, 2)
            for dep, deb, bc in _bp2_pieces(pairs):
                _acc(out, (k[0], k[1] + dep, es, k[3] + deb, k[4], k[5], d),
                     _cmul(c, bc))
        return FormalPoly(out)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return isinstance(other, FormalPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        return f"FormalPoly({format_poly(self)})"

    def q_degree(self) -> int:
        return max((k[0] for k in self.terms), default=0)

    def coefficient_of_hbar(self, power: int) -> "FormalPoly":
        t = {k[:4] + (0,) + k[5:]: c for k, c in self.terms.items() if k[4] == power}
        return FormalPoly(t)


# ---------------------------------------------------------------------------
# derivations
# ---------------------------------------------------------------------------

def _d_dq(f: FormalPoly) -> FormalPoly:
    t: Dict[Key, Coef] = {}
    for k, c in f.terms.items():
        if k[0] >= 1:
            _acc(t, (k[0] - 1,) + k[1:], _cmul(c, (Fraction(k[0]), Fraction(0))))
    return FormalPoly(t)


def _d_dp(f: FormalPoly) -> FormalPoly:
    """Plain p derivative, with ds/dp = beta p s/(1 + beta p^2)."""
    out = FormalPoly.zero()
    t_pow: Dict[Key, Coef] = {}
    t_s: Dict[Key, Coef] = {}
    t_den: Dict[Key, Coef] = {}
    for k, c in f.terms.items():
        eq, ep, es, eb, eh, el, d = k
        if ep >= 1:
            _acc(t_pow, (eq, ep - 1, es, eb, eh, el, d), _cmul(c, (Fraction(ep), Fraction(0))))
        if es == 1:
            _acc(t_s, (eq, ep + 1, 1, eb + 1, eh, el, d + 1), c)
        if d >= 1:
            _acc(t_den, (eq, ep + 1, es, eb + 1, eh, el, d + 1),
                 _cmul(c, (Fraction(-2 * d), Fraction(0))))
    return FormalPoly(t_pow) + FormalPoly(t_s) + FormalPoly(t_den)


def _main_dp(f: FormalPoly) -> FormalPoly:
    return _d_dp(f).times_bp2()


def _alt_dq(f: FormalPoly) -> FormalPoly:
    return _d_dq(f).times_s_inverse()


_Q = FormalPoly.var("q")
_P = FormalPoly.var("p")
_S = FormalPoly.var("s")
_BETA = FormalPoly.var("beta")


def _alt_dp(f: FormalPoly) -> FormalPoly:
    # -beta q p s d/dq + s (1 + beta p^2) d/dp
    a = (_BETA * _Q * _P * _S * _d_dq(f)).scale(-1)
    b = _S * _d_dp(f).times_bp2()
    return a + b


@dataclass(frozen=True)
class DerivationPair:
    """Left/right derivation pair entering the exponential product formula."""

    name: str
    d_position: Callable[[FormalPoly], FormalPoly]
    d_momentum: Callable[[FormalPoly], FormalPoly]


MAIN = DerivationPair("main", _d_dq, _main_dp)
ALT = DerivationPair("alt", _alt_dq, _alt_dp)


# ---------------------------------------------------------------------------
# the truncated product
# ---------------------------------------------------------------------------

def _lam_power_coeffs(l: int, m: int):
    """(1 - lam)^l (-lam)^m expanded: yields (lam_exponent, Fraction coef)."""
    for j in range(l + 1):
        yield m + j, Fraction((-1) ** (j + m) * math.comb(l, j))


def _derivative_table(pair: DerivationPair, f: FormalPoly, K: int):
    """table[a][b] = d_position^a d_momentum^b f for a + b <= K."""
    rows = [[f]]
    for b in range(1, K + 1):
        rows[0].append(pair.d_momentum(rows[0][b - 1]))
    table = [rows[0]]
    for a in range(1, K + 1):
        prev = table[a - 1]
        table.append([pair.d_position(prev[b]) for b in range(K + 1 - a)])
    return table


def _star_order(pair, tf, tg, k: int) -> FormalPoly:
    """Order-k bidifferential term of the product."""
    total = FormalPoly.zero()
    ik = [(Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)),
          (Fraction(-1), Fraction(0)), (Fraction(0), Fraction(-1))][k % 4]
    base = Fraction(1, math.factorial(k))
    for l in range(k + 1):
        fi = tf[l][k - l]
        gi = tg[k - l][l]
        if fi.is_zero() or gi.is_zero():
            continue
        prod = fi * gi
        comb = Fraction(math.comb(k, l))
        acc = FormalPoly.zero()
        for lam_e, cc in _lam_power_coeffs(l, k - l):
            lam_mono = FormalPoly({(0, 0, 0, 0, k, lam_e, 0): _cmul(ik, (base * comb * cc, Fraction(0)))},
                                  _canonical=True)
            acc = acc + lam_mono
        total = total + acc * prod
    return total


@dataclass(frozen=True)
class StarResult:
    poly: FormalPoly
    terminated: bool


def formal_star(pair: DerivationPair, f: FormalPoly, g: FormalPoly, order: int) -> StarResult:
    """Truncated exponential star product through hbar^order.

    Reports whether the series terminates: all orders beyond the truncation
    vanish identically, which for polynomial inputs is certified by the
    position-degree bound (each order needs one position derivative per power
    on one side or the other).
    """
    if order < 0:
        raise ValueError("truncation order must be nonnegative")
    bound = f.q_degree() + g.q_degree()
    K = max(order, bound)
    tf = _derivative_table(pair, f, K)
    tg = _derivative_table(pair, g, K)
    total = FormalPoly.zero()
    for k in range(order + 1):
        total = total + _star_order(pair, tf, tg, k)
    terminated = True
    for k in range(order + 1, bound + 1):
        if not _star_order(pair, tf, tg, k).is_zero():
            terminated = False
            break
    return StarResult(total, terminated)


def formal_commutator(pair: DerivationPair, f: FormalPoly, g: FormalPoly,
                      order: int) -> StarResult:
    a = formal_star(pair, f, g, order)
    b = formal_star(pair, g, f, order)
    return StarResult(a.poly - b.poly, a.terminated and b.terminated)


def classical_limit(pair: DerivationPair, f: FormalPoly, g: FormalPoly) -> FormalPoly:
    """Induced Poisson bracket: the hbar coefficient of the commutator over i."""
    bound = f.q_degree() + g.q_degree()
    comm = formal_commutator(pair, f, g, max(1, bound)).poly
    return comm.coefficient_of_hbar(1).scale(0, -1)  # divide by i


# ---------------------------------------------------------------------------
# numeric evaluation
# ---------------------------------------------------------------------------

def formal_eval(f: FormalPoly, ctx, q, p, lam: Optional[float] = None) -> np.ndarray:
    """Evaluate with numeric parameters; q and p broadcast."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    lam_v = ctx.lam if lam is None else lam
    s = np.sqrt(1.0 + ctx.beta * p ** 2)
    out = np.zeros(np.broadcast(q, p).shape, dtype=complex)
    for (eq, ep, es, eb, eh, el, d), (cr, ci) in f.terms.items():
        val = (complex(cr) + 1j * complex(ci)) * ctx.beta ** eb * ctx.hbar ** eh * lam_v ** el
        out = out + val * q ** eq * p ** ep * s ** es / (1.0 + ctx.beta * p ** 2) ** d
    return out


def eval_on_grid(f: FormalPoly, ctx, ms, n: int, lam: Optional[float] = None):
    """Sample on the position lattice times the n-point angle grid."""
    from .sampling import LatticeField, angle_nodes
    ms = np.asarray(ms, dtype=int)
    qs = ms * ctx.q_lattice_step
    ps = np.tan(angle_nodes(n)) / ctx.sqrt_beta
    vals = formal_eval(f, ctx, qs[:, None], ps[None, :], lam=lam)
    return LatticeField(ctx, ms, vals)


# ---------------------------------------------------------------------------
# text form
# ---------------------------------------------------------------------------

def _frac_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _coef_str(c: Coef) -> str:
    re, im = c
    if im == 0:
        return _frac_str(re)
    if re == 0:
        if im == 1:
            return "i"
        if im == -1:
            return "-i"
        return f"{_frac_str(im)}*i"
    sign = "+" if im > 0 else "-"
    ia = abs(im)
    istr = "i" if ia == 1 else f"{_frac_str(ia)}*i"
    return f"({_frac_str(re)} {sign} {istr})"


def _mono_str(k: Key) -> str:
    names = ["q", "p", "s", "beta", "hbar", "lam"]
    parts = []
    for name, e in zip(names, k[:6]):
        if e == 1:
            parts.append(name)
        elif e != 0:
            parts.append(f"{name}^{e}")
    if k[6] == 1:
        parts.append("(1 + beta*p^2)^-1")
    elif k[6] > 1:
        parts.append(f"(1 + beta*p^2)^-{k[6]}")
    return "*".join(parts)


def format_poly(f: FormalPoly) -> str:
    """Canonical text form: factored powers of 1 + beta p^2, sorted monomials."""
    if f.is_zero():
        return "0"
    # factor out as many powers of (1 + beta p^2) as divide the polynomial
    terms = dict(f.terms)
    power = 0
    if all(k[6] == 0 for k in terms):
        while True:
            quo = _divide_by_bp2(terms)
            if quo is None:
                break
            terms = quo
            power += 1
    body_terms = sorted(terms.items(), key=lambda kv: kv[0])
    pieces = []
    for k, c in body_terms:
        mono = _mono_str(k)
        cs = _coef_str(c)
        if mono:
            if cs == "1":
                pieces.append(mono)
            elif cs == "-1":
                pieces.append(f"-{mono}")
            else:
                pieces.append(f"{cs}*{mono}")
        else:
            pieces.append(cs)
    body = " + ".join(pieces).replace("+ -", "- ")
    if power == 0:
        return body
    factor = "(1 + beta*p^2)" if power == 1 else f"(1 + beta*p^2)^{power}"
    if len(body_terms) > 1:
        return f"{factor}*({body})"
    if body == "1":
        return factor
    return f"{body}*{factor}"


# ---------------------------------------------------------------------------
# expression parsing (grammar: rational coefficients, q^a p^b s^c products)
# ---------------------------------------------------------------------------

class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<name>beta|hbar|lam|[qpsi])|(?P<op>[\^*+-])|(?P<bad>\S))")


def parse_poly(text: str) -> FormalPoly:
    """Parse `q^a p^b s^c`-style sums with rational coefficients."""
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group("bad"):
            raise ParseError(f"unexpected character {m.group('bad')!r}", m.start("bad"))
        kind = "num" if m.group("num") else ("name" if m.group("name") else "op")
        tokens.append((kind, m.group(kind), m.start()))
        pos = m.end()
    tokens.append(("end", "", len(text)))

    i = 0

    def peek():
        return tokens[i]

    def advance():
        nonlocal i
        t = tokens[i]
        i += 1
        return t

    def parse_factor() -> FormalPoly:
        kind, val, at = advance()
        if kind == "num":
            return FormalPoly.const(Fraction(val))
        if kind == "name":
            if val == "i":
                base = FormalPoly.const(0, 1)
            else:
                base = FormalPoly.var(val)
            if peek()[0] == "op" and peek()[1] == "^":
                advance()
                k2, v2, a2 = advance()
                if k2 != "num" or "/" in v2:
                    raise ParseError("expected an integer exponent", a2)
                e = int(v2)
                out = FormalPoly.const(1)
                for _ in range(e):
                    out = out * base
                return out
            return base
        raise ParseError("expected a coefficient or variable", at)

    def parse_term() -> FormalPoly:
        out = parse_factor()
        while True:
            kind, val, _ = peek()
            if kind == "op" and val == "*":
                advance()
                out = out * parse_factor()
            elif kind in ("num", "name"):
                out = out * parse_factor()
            else:
                return out

    def parse_sum() -> FormalPoly:
        sign = 1
        kind, val, _ = peek()
        if kind == "op" and val in "+-":
            advance()
            sign = -1 if val == "-" else 1
        out = parse_term().scale(sign)
        while True:
            kind, val, at = peek()
            if kind == "op" and val in "+-":
                advance()
                nxt = parse_term().scale(-1 if val == "-" else 1)
                out = out + nxt
            elif kind == "end":
                return out
            else:
                raise ParseError(f"unexpected token {val!r}", at)

    out = parse_sum()
    return out
