"""Immutable descriptor algebra for bounded functions ``φ: J → ℂᵈ``.

A :class:`FunctionDescriptor` couples a domain (``HalfLine`` = [0, ∞) or
``FullLine`` = ℝ), a state dimension ``d`` and a *body*: a small expression
tree built from closed-form leaves (characters, trigonometric polynomials,
exponential sums, the chirp ``e^{it²}``, ``te^{it}``, integrable kernels,
sampled data) and combinators (translation, modulation, sums, scalar
multiples, mollification, primitives, convolution).

Every body is a function on the whole real line; a ``HalfLine`` descriptor
is the restriction of its body to ``t ≥ 0`` (and, wherever a two-sided
object is needed, the extension by zero).

Norm on ℂᵈ: the maximum of the component moduli.

The constructors (``translate``, ``modulate``, ``mollify`` ...) apply a
fixed set of exact algebraic rewrites (flattening sums, merging characters,
absorbing scalars into leaf amplitudes, folding zero shifts, folding
closed-form convolutions/mollifications of characters).  Running all
rewrites bottom-up gives the canonical form used for descriptor equality,
see :func:`simplify` and :func:`equivalent`.
"""

from __future__ import annotations

import cmath
import enum
import json
import math
from dataclasses import dataclass, fields, replace
from functools import lru_cache
from typing import Iterable, Sequence, Union

import numpy as np
from scipy import special

from . import kernels as _kern
from .errors import DomainError, EvalError, PrecondError, UnboundedError
from .quadrature import gl_panels, oscillation_panel_length, panel_edges

Amp = tuple  # tuple[complex, ...] of length d


class Domain(enum.Enum):
    """Time domain of a descriptor."""

    HALF_LINE = "R+"
    FULL_LINE = "R"

    @property
    def is_half(self) -> bool:
        return self is Domain.HALF_LINE


# ---------------------------------------------------------------------------
# bodies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Character:
    """``t ↦ e^{iωt} c``."""

    omega: float
    c: Amp


@dataclass(frozen=True)
class TrigPoly:
    """``t ↦ Σ_k e^{iω_k t} c_k``; the empty polynomial is the zero function."""

    terms: tuple  # tuple[(float, Amp), ...]


@dataclass(frozen=True)
class ExpSum:
    """``t ↦ Σ_k e^{μ_k t} c_k`` with complex rates; orbits ``e^{tA}x`` of diagonalisable ``A``."""

    terms: tuple  # tuple[(complex, Amp), ...]


@dataclass(frozen=True)
class Chirp:
    """``t ↦ e^{it²} c``."""

    c: Amp


@dataclass(frozen=True)
class LinearChirp:
    """``t ↦ t e^{it} c`` (unbounded; admitted by the Beurling estimator only)."""

    c: Amp


@dataclass(frozen=True)
class L1Kernel:
    """``t ↦ k(t) c`` for a kernel from :mod:`spectrakit.kernels`."""

    kernel_id: str
    c: Amp


@dataclass(frozen=True)
class Translate:
    """``t ↦ inner(t + s)``."""

    inner: object
    s: float


@dataclass(frozen=True)
class ModulateChar:
    """``t ↦ e^{iωt} inner(t)``."""

    inner: object
    omega: float


@dataclass(frozen=True)
class Sum:
    terms: tuple


@dataclass(frozen=True)
class Scale:
    inner: object
    alpha: complex


@dataclass(frozen=True)
class Mollified:
    """``M_h φ(t) = (1/h) ∫₀^h φ(t + v) dv``."""

    inner: object
    h: float


@dataclass(frozen=True)
class Primitive:
    """``t ↦ ∫₀^t inner + offset``."""

    inner: object
    offset: Amp


@dataclass(frozen=True)
class Convolved:
    """``t ↦ ∫ inner(t - u) k(u) du`` (two-sided convolution of bodies)."""

    inner: object
    kernel_id: str


@dataclass(frozen=True)
class Sampled:
    """Uniformly sampled data, interpolated, zero outside the sample range.

    ``hold`` is ``"linear"`` (piecewise-linear) or ``"zero"`` (zero-order hold).
    """

    t0: float
    dt: float
    values: tuple  # tuple[Amp, ...]
    hold: str = "linear"

    @property
    def t_end(self) -> float:
        return self.t0 + (len(self.values) - 1) * self.dt


Body = Union[Character, TrigPoly, ExpSum, Chirp, LinearChirp, L1Kernel, Translate,
             ModulateChar, Sum, Scale, Mollified, Primitive, Convolved, Sampled]

_LEAVES = (Character, TrigPoly, ExpSum, Chirp, LinearChirp, L1Kernel, Sampled)


@dataclass(frozen=True)
class FunctionDescriptor:
    """A bounded (or ∞-flagged) function ``φ: J → ℂᵈ``.

    Attributes
    ----------
    domain : Domain
    dim : int
    body : Body
    sup_norm_bound : float
        Certified bound on ``sup_{t∈J} ‖φ(t)‖``; ``math.inf`` flags
        unbounded functions.
    """

    domain: Domain
    dim: int
    body: object
    sup_norm_bound: float

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.sup_norm_bound)

    @property
    def inexact(self) -> bool:
        return _contains(self.body, Sampled)

    def __call__(self, t):
        return evaluate(self, t)


# ---------------------------------------------------------------------------
# small numerical helpers
# ---------------------------------------------------------------------------

def gfun(z):
    """``g(z) = (e^z - 1)/z`` with ``g(0) = 1``, accurate near 0."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < 1e-3
    zs = z[small]
    out[small] = 1.0 + zs / 2.0 * (1.0 + zs / 3.0 * (1.0 + zs / 4.0 * (1.0 + zs / 5.0)))
    zl = z[~small]
    out[~small] = np.expm1(zl) / zl
    return out


def h2fun(z):
    """``∫₀¹ u e^{zu} du = (e^z (z - 1) + 1)/z²`` with a series near 0."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < 1e-2
    zs = z[small]
    out[small] = 0.5 + zs * (1 / 3 + zs * (1 / 8 + zs * (1 / 30 + zs * (1 / 144 + zs / 840))))
    zl = z[~small]
    out[~small] = (np.exp(zl) * (zl - 1.0) + 1.0) / (zl * zl)
    return out


_SQRT_PI_2 = math.sqrt(math.pi / 2.0)
_SQRT_2_PI = math.sqrt(2.0 / math.pi)


def fresnel_primitive(x):
    """``Fr(x) = ∫₀^x e^{iu²} du`` via the normalised Fresnel integrals."""
    x = np.asarray(x, dtype=float)
    s, c = special.fresnel(x * _SQRT_2_PI)
    return _SQRT_PI_2 * (c + 1j * s)


CHIRP_FT_CONST = math.sqrt(math.pi) * cmath.exp(0.25j * math.pi)


def _amp(c, d: int | None = None) -> Amp:
    if np.isscalar(c):
        if d is None:
            d = 1
        return tuple(complex(c) for _ in range(d))
    out = tuple(complex(v) for v in c)
    if d is not None and len(out) != d:
        raise PrecondError(f"amplitude has length {len(out)}, expected {d}")
    return out


def _a(c: Amp) -> np.ndarray:
    return np.asarray(c, dtype=complex)


def _is_zero_amp(c: Amp) -> bool:
    return all(v == 0 for v in c)


def _norm(c: Amp) -> float:
    return max((abs(v) for v in c), default=0.0)


def _contains(body, cls) -> bool:
    if isinstance(body, cls):
        return True
    if isinstance(body, Sum):
        return any(_contains(b, cls) for b in body.terms)
    inner = getattr(body, "inner", None)
    return inner is not None and _contains(inner, cls)


# ---------------------------------------------------------------------------
# algebraic constructors (each applies exact local rewrites)
# ---------------------------------------------------------------------------

def _zero(d: int) -> TrigPoly:
    return TrigPoly(())


def _is_zero(body) -> bool:
    return isinstance(body, TrigPoly) and len(body.terms) == 0


def _trig(terms: Iterable[tuple[float, Amp]]):
    """Canonical trigonometric polynomial: merged, sorted, zeros dropped."""
    acc: dict[float, np.ndarray] = {}
    order: list[float] = []
    for w, c in terms:
        w = float(w) + 0.0
        if w in acc:
            acc[w] = acc[w] + _a(c)
        else:
            acc[w] = _a(c).copy()
            order.append(w)
    out = []
    for w in sorted(order):
        c = tuple(complex(v) for v in acc[w])
        if not _is_zero_amp(c):
            out.append((w, c))
    if len(out) == 1:
        return Character(out[0][0], out[0][1])
    return TrigPoly(tuple(out))


def _trig_terms(body) -> list[tuple[float, Amp]]:
    if isinstance(body, Character):
        return [(body.omega, body.c)]
    return list(body.terms)


def _expsum(terms: Iterable[tuple[complex, Amp]]):
    """Canonical exponential sum; purely imaginary rates become characters."""
    acc: dict[complex, np.ndarray] = {}
    order: list[complex] = []
    for mu, c in terms:
        mu = complex(mu) + 0.0
        if mu in acc:
            acc[mu] = acc[mu] + _a(c)
        else:
            acc[mu] = _a(c).copy()
            order.append(mu)
    trig = []
    rest = []
    for mu in sorted(order, key=lambda z: (z.real, z.imag)):
        c = tuple(complex(v) for v in acc[mu])
        if _is_zero_amp(c):
            continue
        if mu.real == 0.0:
            trig.append((mu.imag, c))
        else:
            rest.append((mu, c))
    if not rest:
        return _trig(trig)
    es = ExpSum(tuple(rest))
    if trig:
        return Sum((_trig(trig), es))
    return es


def scale_body(body, alpha: complex):
    """``α·body`` with the scalar absorbed into leaf amplitudes."""
    alpha = complex(alpha)
    if alpha == 1:
        return body
    if alpha == 0:
        return TrigPoly(())
    if isinstance(body, Character):
        return Character(body.omega, tuple(alpha * v for v in body.c))
    if isinstance(body, TrigPoly):
        return TrigPoly(tuple((w, tuple(alpha * v for v in c)) for w, c in body.terms))
    if isinstance(body, ExpSum):
        return ExpSum(tuple((mu, tuple(alpha * v for v in c)) for mu, c in body.terms))
    if isinstance(body, (Chirp, LinearChirp)):
        return type(body)(tuple(alpha * v for v in body.c))
    if isinstance(body, L1Kernel):
        return L1Kernel(body.kernel_id, tuple(alpha * v for v in body.c))
    if isinstance(body, Sampled):
        return Sampled(body.t0, body.dt, tuple(tuple(alpha * v for v in row) for row in body.values),
                       body.hold)
    if isinstance(body, Sum):
        return sum_bodies([scale_body(b, alpha) for b in body.terms])
    if isinstance(body, Scale):
        return scale_body(body.inner, alpha * body.alpha)
    if isinstance(body, Translate):
        return Translate(scale_body(body.inner, alpha), body.s)
    if isinstance(body, ModulateChar):
        return ModulateChar(scale_body(body.inner, alpha), body.omega)
    if isinstance(body, Mollified):
        return Mollified(scale_body(body.inner, alpha), body.h)
    if isinstance(body, Convolved):
        return Convolved(scale_body(body.inner, alpha), body.kernel_id)
    if isinstance(body, Primitive):
        return Primitive(scale_body(body.inner, alpha), tuple(alpha * v for v in body.offset))
    raise TypeError(f"unknown body {type(body).__name__}")


def _leaf_split(body):
    """Split a unary chain ending in an amplitude leaf into (skeleton, amplitude)."""
    if isinstance(body, (Chirp, LinearChirp)):
        return (type(body), None), body.c
    if isinstance(body, L1Kernel):
        return (L1Kernel, body.kernel_id), body.c
    if isinstance(body, Translate):
        sk = _leaf_split(body.inner)
        return (None if sk is None else ((Translate, body.s, sk[0]), sk[1]))
    if isinstance(body, ModulateChar):
        sk = _leaf_split(body.inner)
        return (None if sk is None else ((ModulateChar, body.omega, sk[0]), sk[1]))
    if isinstance(body, Mollified):
        sk = _leaf_split(body.inner)
        return (None if sk is None else ((Mollified, body.h, sk[0]), sk[1]))
    if isinstance(body, Convolved):
        sk = _leaf_split(body.inner)
        return (None if sk is None else ((Convolved, body.kernel_id, sk[0]), sk[1]))
    return None


def _leaf_rebuild(skel, c: Amp):
    head = skel[0]
    if head in (Chirp, LinearChirp):
        return head(c)
    if head is L1Kernel:
        return L1Kernel(skel[1], c)
    inner = _leaf_rebuild(skel[2], c)
    if head is Translate:
        return Translate(inner, skel[1])
    if head is ModulateChar:
        return ModulateChar(inner, skel[1])
    if head is Mollified:
        return Mollified(inner, skel[1])
    if head is Convolved:
        return Convolved(inner, skel[1])
    raise TypeError(head)


def _sort_key(body) -> str:
    return repr(body)


def sum_bodies(terms: Sequence):
    """Flattened, merged sum."""
    flat = []
    stack = list(terms)
    while stack:
        b = stack.pop(0)
        if isinstance(b, Sum):
            stack[0:0] = list(b.terms)
        else:
            flat.append(b)
    trig: list = []
    exps: list = []
    chains: dict = {}
    chain_order: list = []
    others: list = []
    for b in flat:
        if _is_zero(b):
            continue
        if isinstance(b, (Character, TrigPoly)):
            trig.extend(_trig_terms(b))
        elif isinstance(b, ExpSum):
            exps.extend(b.terms)
        else:
            split = _leaf_split(b)
            if split is not None:
                sk, c = split
                if sk in chains:
                    chains[sk] = chains[sk] + _a(c)
                else:
                    chains[sk] = _a(c).copy()
                    chain_order.append(sk)
            else:
                others.append(b)
    out = []
    if exps:
        es = _expsum(list(exps) + [(1j * w, c) for w, c in trig])
        out.extend(es.terms if isinstance(es, Sum) else [es])
    elif trig:
        out.append(_trig(trig))
    for sk in chain_order:
        c = tuple(complex(v) for v in chains[sk])
        if not _is_zero_amp(c):
            out.append(_leaf_rebuild(sk, c))
    out.extend(others)
    out = [b for b in out if not _is_zero(b)]
    if not out:
        return TrigPoly(())
    if len(out) == 1:
        return out[0]
    head = [b for b in out if isinstance(b, (Character, TrigPoly, ExpSum))]
    tail = sorted([b for b in out if not isinstance(b, (Character, TrigPoly, ExpSum))], key=_sort_key)
    return Sum(tuple(head + tail))


def translate_body(body, s: float):
    """Body of ``t ↦ body(t + s)``."""
    s = float(s)
    if s == 0.0:
        return body
    if isinstance(body, Character):
        return Character(body.omega, tuple(v * cmath.exp(1j * body.omega * s) for v in body.c))
    if isinstance(body, TrigPoly):
        return _trig([(w, tuple(v * cmath.exp(1j * w * s) for v in c)) for w, c in body.terms])
    if isinstance(body, ExpSum):
        return _expsum([(mu, tuple(v * cmath.exp(mu * s) for v in c)) for mu, c in body.terms])
    if isinstance(body, LinearChirp):
        e = cmath.exp(1j * s)
        return sum_bodies([LinearChirp(tuple(e * v for v in body.c)),
                           Character(1.0, tuple(s * e * v for v in body.c))])
    if isinstance(body, Sum):
        return sum_bodies([translate_body(b, s) for b in body.terms])
    if isinstance(body, Scale):
        return scale_body(translate_body(body.inner, s), body.alpha)
    if isinstance(body, Translate):
        total = body.s + s
        return body.inner if total == 0.0 else Translate(body.inner, total)
    if isinstance(body, ModulateChar):
        return scale_body(modulate_body(translate_body(body.inner, s), body.omega),
                          cmath.exp(1j * body.omega * s))
    if isinstance(body, Mollified):
        return mollify_body(translate_body(body.inner, s), body.h)
    if isinstance(body, Convolved):
        return convolve_body(translate_body(body.inner, s), body.kernel_id)
    if isinstance(body, Sampled):
        return Sampled(body.t0 - s, body.dt, body.values, body.hold)
    return Translate(body, s)


def modulate_body(body, omega: float):
    """Body of ``t ↦ e^{iωt} body(t)``."""
    omega = float(omega)
    if omega == 0.0:
        return body
    if isinstance(body, Character):
        return Character(body.omega + omega, body.c)
    if isinstance(body, TrigPoly):
        return _trig([(w + omega, c) for w, c in body.terms])
    if isinstance(body, ExpSum):
        return _expsum([(mu + 1j * omega, c) for mu, c in body.terms])
    if isinstance(body, Sum):
        return sum_bodies([modulate_body(b, omega) for b in body.terms])
    if isinstance(body, Scale):
        return scale_body(modulate_body(body.inner, omega), body.alpha)
    if isinstance(body, ModulateChar):
        total = body.omega + omega
        return body.inner if total == 0.0 else ModulateChar(body.inner, total)
    if isinstance(body, Convolved):
        k = _kern.get_kernel(body.kernel_id)
        try:
            km = k.modulated(omega)
        except PrecondError:
            return ModulateChar(body, omega)
        return convolve_body(modulate_body(body.inner, omega), km.id)
    return ModulateChar(body, omega)


def mollify_body(body, h: float):
    """Body of ``M_h body``."""
    h = float(h)
    if not (h > 0.0 and math.isfinite(h)):
        raise PrecondError(f"mollifier width must be positive, got {h}")
    if isinstance(body, Character):
        f = complex(gfun(1j * body.omega * h))
        return Character(body.omega, tuple(f * v for v in body.c))
    if isinstance(body, TrigPoly):
        return _trig([(w, tuple(complex(gfun(1j * w * h)) * v for v in c)) for w, c in body.terms])
    if isinstance(body, ExpSum):
        return _expsum([(mu, tuple(complex(gfun(mu * h)) * v for v in c)) for mu, c in body.terms])
    if isinstance(body, Sum):
        return sum_bodies([mollify_body(b, h) for b in body.terms])
    if isinstance(body, Scale):
        return scale_body(mollify_body(body.inner, h), body.alpha)
    return Mollified(body, h)


def primitive_body(body, offset: Amp):
    """Body of ``t ↦ ∫₀^t body + offset``."""
    if isinstance(body, Character) and body.omega != 0.0:
        k = 1.0 / (1j * body.omega)
        return _trig([(body.omega, tuple(k * v for v in body.c)),
                      (0.0, tuple(o - k * v for o, v in zip(offset, body.c)))])
    if isinstance(body, TrigPoly) and all(w != 0.0 for w, _ in body.terms):
        terms = []
        const = _a(offset).copy()
        for w, c in body.terms:
            k = 1.0 / (1j * w)
            terms.append((w, tuple(k * v for v in c)))
            const = const - k * _a(c)
        terms.append((0.0, tuple(complex(v) for v in const)))
        return _trig(terms)
    if isinstance(body, ExpSum) and all(mu != 0 for mu, _ in body.terms):
        terms = []
        const = _a(offset).copy()
        for mu, c in body.terms:
            terms.append((mu, tuple(v / mu for v in c)))
            const = const - _a(c) / mu
        terms.append((0j, tuple(complex(v) for v in const)))
        return _expsum(terms)
    if _is_zero(body):
        return _trig([(0.0, offset)])
    if isinstance(body, Scale) and body.alpha != 0:
        return scale_body(primitive_body(body.inner, tuple(v / body.alpha for v in offset)),
                          body.alpha)
    return Primitive(body, tuple(offset))


def convolve_body(body, kernel_id: str):
    """Body of ``body * k`` with closed-form folding where exact."""
    k = _kern.get_kernel(kernel_id)
    if isinstance(body, Character):
        f = _kern.convolve_character(body.omega, k)
        return _trig([(body.omega, tuple(f * v for v in body.c))])
    if isinstance(body, TrigPoly):
        ws = np.array([w for w, _ in body.terms], dtype=float)
        fs = np.asarray(k.freq_eval(ws)) if ws.size else np.zeros(0)
        return _trig([(w, tuple(complex(f) * v for v in c)) for (w, c), f in zip(body.terms, fs)])
    if isinstance(body, LinearChirp):
        f = complex(np.asarray(k.freq_eval(np.array([1.0])))[0])
        fd = complex(np.asarray(k.freq_deriv(np.array([1.0])))[0])
        return sum_bodies([LinearChirp(tuple(f * v for v in body.c)),
                           Character(1.0, tuple(-1j * fd * v for v in body.c))])
    if isinstance(body, Sum):
        return sum_bodies([convolve_body(b, kernel_id) for b in body.terms])
    if isinstance(body, Scale):
        return scale_body(convolve_body(body.inner, kernel_id), body.alpha)
    if isinstance(body, ModulateChar):
        # (γ_ω φ) * k = γ_ω (φ * γ_{-ω} k)
        try:
            km = k.modulated(-body.omega)
        except PrecondError:
            return Convolved(body, k.id)
        inner = convolve_body(body.inner, km.id)
        if isinstance(inner, Convolved):
            return ModulateChar(inner, body.omega)
        return modulate_body(inner, body.omega)
    if _is_zero(body):
        return body
    return Convolved(body, k.id)


# ---------------------------------------------------------------------------
# canonical form and equality
# ---------------------------------------------------------------------------

def simplify_body(body):
    """Apply every rewrite rule bottom-up."""
    if isinstance(body, Character):
        return _trig([(body.omega, body.c)])
    if isinstance(body, TrigPoly):
        return _trig(body.terms)
    if isinstance(body, ExpSum):
        return _expsum(body.terms)
    if isinstance(body, (Chirp, LinearChirp, L1Kernel)):
        return TrigPoly(()) if _is_zero_amp(body.c) else body
    if isinstance(body, Sampled):
        return body
    if isinstance(body, Sum):
        return sum_bodies([simplify_body(b) for b in body.terms])
    if isinstance(body, Scale):
        return scale_body(simplify_body(body.inner), body.alpha)
    if isinstance(body, Translate):
        return translate_body(simplify_body(body.inner), body.s)
    if isinstance(body, ModulateChar):
        return modulate_body(simplify_body(body.inner), body.omega)
    if isinstance(body, Mollified):
        return mollify_body(simplify_body(body.inner), body.h)
    if isinstance(body, Primitive):
        return primitive_body(simplify_body(body.inner), body.offset)
    if isinstance(body, Convolved):
        return convolve_body(simplify_body(body.inner), body.kernel_id)
    raise TypeError(f"unknown body {type(body).__name__}")


def simplify(phi: FunctionDescriptor) -> FunctionDescriptor:
    """Canonical form of a descriptor (same function, canonical body)."""
    body = simplify_body(phi.body)
    return FunctionDescriptor(phi.domain, phi.dim, body, phi.sup_norm_bound)


def _close(a, b, rtol: float, atol: float) -> bool:
    if type(a) is not type(b):
        if isinstance(a, (int, float, complex)) and isinstance(b, (int, float, complex)):
            return abs(a - b) <= atol + rtol * max(abs(a), abs(b))
        return False
    if isinstance(a, (float, complex)):
        return abs(a - b) <= atol + rtol * max(abs(a), abs(b))
    if isinstance(a, tuple):
        return len(a) == len(b) and all(_close(x, y, rtol, atol) for x, y in zip(a, b))
    if hasattr(a, "__dataclass_fields__"):
        return all(_close(getattr(a, f.name), getattr(b, f.name), rtol, atol) for f in fields(a))
    return a == b


def equivalent(phi: FunctionDescriptor, psi: FunctionDescriptor,
               rtol: float = 1e-12, atol: float = 1e-14) -> bool:
    """Structural equality of canonical forms, up to floating round-off."""
    if phi.domain is not psi.domain or phi.dim != psi.dim:
        return False
    return _close(simplify_body(phi.body), simplify_body(psi.body), rtol, atol)


# ---------------------------------------------------------------------------
# sup-norm bounds
# ---------------------------------------------------------------------------

def body_bound(body, half: bool) -> float:
    """Upper bound of ``sup ‖body(t)‖`` over ``t ≥ 0`` (``half``) or ``t ∈ ℝ``."""
    if isinstance(body, Character):
        return _norm(body.c)
    if isinstance(body, TrigPoly):
        if not body.terms:
            return 0.0
        return float(np.max(np.sum(np.abs(np.array([c for _, c in body.terms])), axis=0)))
    if isinstance(body, ExpSum):
        res = np.array([mu.real for mu, _ in body.terms])
        if (half and np.any(res > 0)) or (not half and np.any(res != 0)):
            return math.inf
        return float(np.max(np.sum(np.abs(np.array([c for _, c in body.terms])), axis=0)))
    if isinstance(body, Chirp):
        return _norm(body.c)
    if isinstance(body, LinearChirp):
        return 0.0 if _is_zero_amp(body.c) else math.inf
    if isinstance(body, L1Kernel):
        k = _kern.get_kernel(body.kernel_id)
        peak = getattr(k, "peak", None)
        if peak is None:
            probe = np.linspace(*k.effective_time_support, 20001)
            peak = float(np.max(np.abs(k.time_eval(probe)))) * 1.05
        return peak * (1 + 1e-9) * _norm(body.c)
    if isinstance(body, Translate):
        return body_bound(body.inner, half and body.s >= 0)
    if isinstance(body, ModulateChar):
        return body_bound(body.inner, half)
    if isinstance(body, Sum):
        return float(sum(body_bound(b, half) for b in body.terms))
    if isinstance(body, Scale):
        return abs(body.alpha) * body_bound(body.inner, half)
    if isinstance(body, Mollified):
        return body_bound(body.inner, half)
    if isinstance(body, Primitive):
        return math.inf
    if isinstance(body, Convolved):
        return body_bound(body.inner, False) * _kern.get_kernel(body.kernel_id).l1_norm
    if isinstance(body, Sampled):
        return max((_norm(row) for row in body.values), default=0.0)
    raise TypeError(f"unknown body {type(body).__name__}")


# ---------------------------------------------------------------------------
# public constructors
# ---------------------------------------------------------------------------

def make(body, dim: int, domain: Domain = Domain.FULL_LINE,
         sup_norm_bound: float | None = None) -> FunctionDescriptor:
    """Wrap a body in a descriptor, certifying its sup-norm bound."""
    if sup_norm_bound is None:
        sup_norm_bound = body_bound(body, domain.is_half)
    return FunctionDescriptor(domain, int(dim), body, float(sup_norm_bound))


def character(omega: float, c=1.0, dim: int = 1, domain: Domain = Domain.FULL_LINE):
    """``γ_ω·c``."""
    return make(Character(float(omega), _amp(c, dim if np.isscalar(c) else None)),
                dim if np.isscalar(c) else len(c), domain)


def trig_poly(terms, dim: int = 1, domain: Domain = Domain.FULL_LINE):
    """``Σ c_k γ_{ω_k}`` from ``[(ω_k, c_k), ...]``; kept as a TrigPoly even with one term."""
    tt = []
    for w, c in terms:
        a = _amp(c, dim if np.isscalar(c) else None)
        dim = len(a)
        tt.append((float(w), a))
    return make(TrigPoly(tuple(tt)), dim, domain)


def exp_sum(terms, dim: int = 1, domain: Domain = Domain.HALF_LINE):
    tt = []
    for mu, c in terms:
        a = _amp(c, dim if np.isscalar(c) else None)
        dim = len(a)
        tt.append((complex(mu), a))
    return make(ExpSum(tuple(tt)), dim, domain)


def chirp(c=1.0, dim: int = 1, domain: Domain = Domain.FULL_LINE):
    """``t ↦ e^{it²}c``."""
    a = _amp(c, dim if np.isscalar(c) else None)
    return make(Chirp(a), len(a), domain)


def linear_chirp(c=1.0, dim: int = 1, domain: Domain = Domain.FULL_LINE):
    """``t ↦ t e^{it} c`` (∞-flagged)."""
    a = _amp(c, dim if np.isscalar(c) else None)
    return make(LinearChirp(a), len(a), domain)


def l1_kernel(kernel, c=1.0, dim: int = 1, domain: Domain = Domain.FULL_LINE):
    """A kernel from :mod:`spectrakit.kernels`, lifted to ℂᵈ."""
    kid = kernel if isinstance(kernel, str) else kernel.id
    _kern.get_kernel(kid)
    a = _amp(c, dim if np.isscalar(c) else None)
    return make(L1Kernel(kid, a), len(a), domain)


def sampled(t0: float, dt: float, values, hold: str = "linear",
            domain: Domain = Domain.FULL_LINE):
    """Sampled data on the grid ``t0 + k dt``; values have shape (n,) or (n, d)."""
    if not dt > 0:
        raise PrecondError("sample spacing must be positive")
    if hold not in ("linear", "zero"):
        raise PrecondError(f"unknown hold rule {hold!r}")
    v = np.asarray(values, dtype=complex)
    if v.ndim == 1:
        v = v[:, None]
    rows = tuple(tuple(complex(x) for x in row) for row in v)
    return make(Sampled(float(t0), float(dt), rows, hold), v.shape[1], domain)


def _check_same(phi: FunctionDescriptor, psi: FunctionDescriptor):
    if phi.dim != psi.dim:
        raise PrecondError("dimension mismatch")
    if phi.domain is not psi.domain:
        raise PrecondError("domain mismatch")


def translate(phi: FunctionDescriptor, s: float) -> FunctionDescriptor:
    """``φ_s(t) = φ(t + s)``."""
    s = float(s)
    if phi.domain.is_half and s < 0:
        raise DomainError("negative shifts are not defined on the half-line")
    body = translate_body(phi.body, s)
    if body is phi.body:
        return phi
    return FunctionDescriptor(phi.domain, phi.dim, body,
                              min(phi.sup_norm_bound, body_bound(body, phi.domain.is_half)))


def modulate(phi: FunctionDescriptor, omega: float) -> FunctionDescriptor:
    """``γ_ω·φ``."""
    body = modulate_body(phi.body, omega)
    if body is phi.body:
        return phi
    return FunctionDescriptor(phi.domain, phi.dim, body,
                              min(phi.sup_norm_bound, body_bound(body, phi.domain.is_half)))


def add(*phis: FunctionDescriptor) -> FunctionDescriptor:
    first = phis[0]
    for p in phis[1:]:
        _check_same(first, p)
    body = sum_bodies([p.body for p in phis])
    bound = min(sum(p.sup_norm_bound for p in phis), body_bound(body, first.domain.is_half))
    return FunctionDescriptor(first.domain, first.dim, body, bound)


def scale(phi: FunctionDescriptor, alpha: complex) -> FunctionDescriptor:
    body = scale_body(phi.body, alpha)
    bound = body_bound(body, phi.domain.is_half)
    if math.isfinite(phi.sup_norm_bound):
        bound = min(bound, abs(complex(alpha)) * phi.sup_norm_bound)
    return FunctionDescriptor(phi.domain, phi.dim, body, bound)


def subtract(phi: FunctionDescriptor, psi: FunctionDescriptor) -> FunctionDescriptor:
    return add(phi, scale(psi, -1.0))


def restrict_and_extend(phi: FunctionDescriptor) -> FunctionDescriptor:
    """Restriction of a full-line descriptor to ``[0, ∞)`` (extension by zero elsewhere)."""
    if phi.domain.is_half:
        return phi
    body = phi.body
    body = _restrict_body(body)
    return FunctionDescriptor(Domain.HALF_LINE, phi.dim, body,
                              min(phi.sup_norm_bound, body_bound(body, True)))


def _restrict_body(body):
    if isinstance(body, Sampled):
        n = len(body.values)
        k0 = int(math.floor(-body.t0 / body.dt + 1e-12)) if body.t0 < 0 else 0
        k0 = max(0, min(k0, n - 1))
        if k0 == 0:
            return body
        return Sampled(body.t0 + k0 * body.dt, body.dt, body.values[k0:], body.hold)
    if isinstance(body, Sum):
        return Sum(tuple(_restrict_body(b) for b in body.terms))
    return body


# ---------------------------------------------------------------------------
# frequency / spectral bookkeeping
# ---------------------------------------------------------------------------

def freq_bound(body, t0: float, t1: float) -> float:
    """Bound on the local angular frequency of ``body`` over ``[t0, t1]``."""
    if isinstance(body, Character):
        return abs(body.omega)
    if isinstance(body, TrigPoly):
        return max((abs(w) for w, _ in body.terms), default=0.0)
    if isinstance(body, ExpSum):
        return max((abs(mu.imag) + abs(mu.real) for mu, _ in body.terms), default=0.0)
    if isinstance(body, Chirp):
        return 2.0 * max(abs(t0), abs(t1))
    if isinstance(body, LinearChirp):
        return 1.0 + 1.0 / max(1.0, min(abs(t0), abs(t1)))
    if isinstance(body, L1Kernel):
        lo, hi = _kern.get_kernel(body.kernel_id).freq_support
        return max(abs(lo), abs(hi))
    if isinstance(body, Translate):
        return freq_bound(body.inner, t0 + body.s, t1 + body.s)
    if isinstance(body, ModulateChar):
        return freq_bound(body.inner, t0, t1) + abs(body.omega)
    if isinstance(body, Sum):
        return max((freq_bound(b, t0, t1) for b in body.terms), default=0.0)
    if isinstance(body, Scale):
        return freq_bound(body.inner, t0, t1)
    if isinstance(body, Mollified):
        return freq_bound(body.inner, t0, t1 + body.h)
    if isinstance(body, Primitive):
        return freq_bound(body.inner, min(t0, 0.0), max(t1, 0.0))
    if isinstance(body, Convolved):
        lo, hi = _kern.get_kernel(body.kernel_id).freq_support
        return max(abs(lo), abs(hi))
    if isinstance(body, Sampled):
        return math.pi / body.dt
    raise TypeError(type(body).__name__)


def is_spectral(body) -> bool:
    """True when the Fourier transform of ``body`` is an ordinary function we can evaluate."""
    if isinstance(body, (Chirp, L1Kernel)):
        return True
    if isinstance(body, (Translate, ModulateChar, Scale, Mollified)):
        return is_spectral(body.inner)
    if isinstance(body, Convolved):
        return is_spectral(body.inner)
    if isinstance(body, Sum):
        return all(is_spectral(b) for b in body.terms)
    return False


def fourier_transform(body, xi, d: int) -> np.ndarray:
    """``body^(ξ)`` for spectral bodies, shape (n, d)."""
    xi = np.asarray(xi, dtype=float)
    if isinstance(body, Chirp):
        return (CHIRP_FT_CONST * np.exp(-0.25j * xi * xi))[:, None] * _a(body.c)[None, :]
    if isinstance(body, L1Kernel):
        k = _kern.get_kernel(body.kernel_id)
        return np.asarray(k.freq_eval(xi), dtype=complex)[:, None] * _a(body.c)[None, :]
    if isinstance(body, Translate):
        return np.exp(1j * xi * body.s)[:, None] * fourier_transform(body.inner, xi, d)
    if isinstance(body, ModulateChar):
        return fourier_transform(body.inner, xi - body.omega, d)
    if isinstance(body, Scale):
        return body.alpha * fourier_transform(body.inner, xi, d)
    if isinstance(body, Mollified):
        return gfun(1j * xi * body.h)[:, None] * fourier_transform(body.inner, xi, d)
    if isinstance(body, Convolved):
        k = _kern.get_kernel(body.kernel_id)
        return np.asarray(k.freq_eval(xi), dtype=complex)[:, None] * fourier_transform(body.inner, xi, d)
    if isinstance(body, Sum):
        out = np.zeros((xi.size, d), dtype=complex)
        for b in body.terms:
            out = out + fourier_transform(b, xi, d)
        return out
    raise PrecondError(f"{type(body).__name__} has no pointwise Fourier transform")


def group_delay(body, xi_abs: float) -> float:
    """Bound on ``|d/dξ arg body^(ξ)|`` plus time spread, for ``|ξ| ≤ xi_abs``.

    Used to size frequency-domain panels: ``body * k`` is concentrated in
    ``|t| ≲ group_delay + kernel support``.
    """
    if isinstance(body, Chirp):
        return 0.5 * xi_abs
    if isinstance(body, L1Kernel):
        return _kern.get_kernel(body.kernel_id).effective_time_support[1]
    if isinstance(body, Translate):
        return group_delay(body.inner, xi_abs) + abs(body.s)
    if isinstance(body, ModulateChar):
        return group_delay(body.inner, xi_abs + abs(body.omega))
    if isinstance(body, Scale):
        return group_delay(body.inner, xi_abs)
    if isinstance(body, Mollified):
        return group_delay(body.inner, xi_abs) + body.h
    if isinstance(body, Convolved):
        return group_delay(body.inner, xi_abs) + _kern.get_kernel(body.kernel_id).effective_time_support[1]
    if isinstance(body, Sum):
        return max(group_delay(b, xi_abs) for b in body.terms)
    raise PrecondError(type(body).__name__)


def is_decaying(body) -> bool:
    """True when ``body`` is integrable with (numerically) negligible tails."""
    if isinstance(body, L1Kernel):
        return True
    if isinstance(body, Convolved):
        return is_spectral(body.inner) or is_decaying(body.inner)
    if isinstance(body, Sampled):
        return True
    if isinstance(body, (Translate, ModulateChar, Scale, Mollified)):
        return is_decaying(body.inner)
    if isinstance(body, Sum):
        return all(is_decaying(b) for b in body.terms)
    return False


def time_support(body) -> tuple[float, float]:
    """Interval outside which a decaying body is below ``ε_supp`` (relative)."""
    if isinstance(body, L1Kernel):
        return _kern.get_kernel(body.kernel_id).effective_time_support
    if isinstance(body, Sampled):
        return (body.t0, body.t_end)
    if isinstance(body, Translate):
        lo, hi = time_support(body.inner)
        return (lo - body.s, hi - body.s)
    if isinstance(body, (ModulateChar, Scale)):
        return time_support(body.inner)
    if isinstance(body, Mollified):
        lo, hi = time_support(body.inner)
        return (lo - body.h, hi)
    if isinstance(body, Sum):
        sups = [time_support(b) for b in body.terms]
        return (min(s[0] for s in sups), max(s[1] for s in sups))
    if isinstance(body, Convolved):
        k = _kern.get_kernel(body.kernel_id)
        klo, khi = k.effective_time_support
        if is_decaying(body.inner):
            lo, hi = time_support(body.inner)
            return (lo + klo, hi + khi)
        lo, hi = k.freq_support
        delay = group_delay(body.inner, max(abs(lo), abs(hi)))
        return (klo - delay, khi + delay)
    raise PrecondError(f"{type(body).__name__} is not a decaying body")


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def eval_body(body, t, d: int) -> np.ndarray:
    """Values of ``body`` at the points ``t``; shape (n, d)."""
    t = np.asarray(t, dtype=float).ravel()
    if isinstance(body, Character):
        return np.exp(1j * body.omega * t)[:, None] * _a(body.c)[None, :]
    if isinstance(body, TrigPoly):
        out = np.zeros((t.size, d), dtype=complex)
        for w, c in body.terms:
            out = out + np.exp(1j * w * t)[:, None] * _a(c)[None, :]
        return out
    if isinstance(body, ExpSum):
        out = np.zeros((t.size, d), dtype=complex)
        for mu, c in body.terms:
            out = out + np.exp(mu * t)[:, None] * _a(c)[None, :]
        return out
    if isinstance(body, Chirp):
        return np.exp(1j * t * t)[:, None] * _a(body.c)[None, :]
    if isinstance(body, LinearChirp):
        return (t * np.exp(1j * t))[:, None] * _a(body.c)[None, :]
    if isinstance(body, L1Kernel):
        k = _kern.get_kernel(body.kernel_id)
        return np.asarray(k.time_eval(t), dtype=complex)[:, None] * _a(body.c)[None, :]
    if isinstance(body, Translate):
        return eval_body(body.inner, t + body.s, d)
    if isinstance(body, ModulateChar):
        return np.exp(1j * body.omega * t)[:, None] * eval_body(body.inner, t, d)
    if isinstance(body, Sum):
        out = np.zeros((t.size, d), dtype=complex)
        for b in body.terms:
            out = out + eval_body(b, t, d)
        return out
    if isinstance(body, Scale):
        return body.alpha * eval_body(body.inner, t, d)
    if isinstance(body, Mollified):
        return (prim_body(body.inner, 0.0, t + body.h, d) - prim_body(body.inner, 0.0, t, d)) / body.h
    if isinstance(body, Primitive):
        return prim_body(body.inner, 0.0, t, d) + _a(body.offset)[None, :]
    if isinstance(body, Convolved):
        return _eval_convolved(body.inner, _kern.get_kernel(body.kernel_id), t, d)
    if isinstance(body, Sampled):
        return _eval_sampled(body, t, d)
    raise TypeError(type(body).__name__)


def _eval_sampled(body: Sampled, t: np.ndarray, d: int) -> np.ndarray:
    vals = np.asarray(body.values, dtype=complex)
    n = vals.shape[0]
    x = (t - body.t0) / body.dt
    out = np.zeros((t.size, d), dtype=complex)
    inside = (x >= -1e-12) & (x <= n - 1 + 1e-12)
    xi = np.clip(x[inside], 0.0, n - 1)
    if body.hold == "zero":
        idx = np.minimum(np.floor(xi + 1e-12).astype(int), n - 1)
        out[inside] = vals[idx]
    else:
        i0 = np.minimum(np.floor(xi).astype(int), max(n - 2, 0))
        frac = (xi - i0)[:, None]
        if n == 1:
            out[inside] = vals[0]
        else:
            out[inside] = (1.0 - frac) * vals[i0] + frac * vals[i0 + 1]
    return out


def _conv_spectral_nodes(inner, k, tmax: float, d: int):
    lo, hi = k.freq_support
    delay = group_delay(inner, max(abs(lo), abs(hi)))
    plen = min(math.pi / (tmax + delay + 1.0), (hi - lo) / 16.0)
    nodes, w = gl_panels(panel_edges(lo, hi, plen), order=10)
    F = fourier_transform(inner, nodes, d) * np.asarray(k.freq_eval(nodes))[:, None]
    return nodes, w, F


def _eval_convolved(inner, k, t: np.ndarray, d: int) -> np.ndarray:
    if is_spectral(inner):
        out = np.empty((t.size, d), dtype=complex)
        order = np.argsort(np.abs(t), kind="stable")
        for start in range(0, t.size, 256):
            idx = order[start:start + 256]
            tt = t[idx]
            nodes, w, F = _conv_spectral_nodes(inner, k, float(np.max(np.abs(tt))), d)
            out[idx] = np.exp(1j * np.outer(tt, nodes)) @ (F * w[:, None]) / (2.0 * math.pi)
        return out
    return _time_convolution(inner, k, t, d)


def _time_convolution(inner, k, t: np.ndarray, d: int, half_line: bool = False) -> np.ndarray:
    """``∫ inner(t-u) k(u) du`` by panelled quadrature over the kernel support.

    With ``half_line`` the inner function is extended by zero on ``t < 0``.
    """
    klo, khi = k.effective_time_support
    out = np.zeros((t.size, d), dtype=complex)
    kfreq = max(abs(k.freq_support[0]), abs(k.freq_support[1]))
    for i, ti in enumerate(t):
        lo, hi = klo, khi
        if isinstance(inner, Sampled):
            lo = max(lo, ti - inner.t_end)
            hi = min(hi, ti - inner.t0)
        if half_line:
            hi = min(hi, ti)
        if hi <= lo:
            continue
        fb = freq_bound(inner, ti - hi, ti - lo) + kfreq
        edges = panel_edges(lo, hi, oscillation_panel_length(fb, cap=2.0))
        if edges.size > 400001:
            raise EvalError("convolution quadrature exceeds the node budget")
        u, w = gl_panels(edges, order=10)
        vals = eval_body(inner, ti - u, d) * (np.asarray(k.time_eval(u)) * w)[:, None]
        out[i] = vals.sum(axis=0)
    return out


# ---------------------------------------------------------------------------
# modulated primitives  Q(s) = ∫₀^s e^{-iωt} body(t) dt
# ---------------------------------------------------------------------------

def prim_body(body, omega: float, s, d: int) -> np.ndarray:
    """``∫₀^s e^{-iωt} body(t) dt`` for each ``s``; shape (n, d)."""
    s = np.asarray(s, dtype=float).ravel()
    omega = float(omega)
    if isinstance(body, Character):
        return (s * gfun(1j * (body.omega - omega) * s))[:, None] * _a(body.c)[None, :]
    if isinstance(body, TrigPoly):
        out = np.zeros((s.size, d), dtype=complex)
        for w, c in body.terms:
            out = out + (s * gfun(1j * (w - omega) * s))[:, None] * _a(c)[None, :]
        return out
    if isinstance(body, ExpSum):
        out = np.zeros((s.size, d), dtype=complex)
        for mu, c in body.terms:
            out = out + (s * gfun((mu - 1j * omega) * s))[:, None] * _a(c)[None, :]
        return out
    if isinstance(body, Chirp):
        half = 0.5 * omega
        v = cmath.exp(-0.25j * omega * omega) * (fresnel_primitive(s - half) - fresnel_primitive(-half))
        return v[:, None] * _a(body.c)[None, :]
    if isinstance(body, LinearChirp):
        nu = 1.0 - omega
        return (s * s * h2fun(1j * nu * s))[:, None] * _a(body.c)[None, :]
    if isinstance(body, Translate):
        a = body.s
        q = prim_body(body.inner, omega, np.concatenate([s + a, [a]]), d)
        return cmath.exp(1j * omega * a) * (q[:-1] - q[-1][None, :])
    if isinstance(body, ModulateChar):
        return prim_body(body.inner, omega - body.omega, s, d)
    if isinstance(body, Sum):
        out = np.zeros((s.size, d), dtype=complex)
        for b in body.terms:
            out = out + prim_body(b, omega, s, d)
        return out
    if isinstance(body, Scale):
        return body.alpha * prim_body(body.inner, omega, s, d)
    if isinstance(body, Mollified):
        return _prim_mollified(body, omega, s, d)
    return _generic_prim(body, omega, s, d)


def second_prim(body, x, d: int) -> np.ndarray | None:
    """``D(x) = ∫₀^x (x - t) body(t) dt`` in closed form, or ``None``.

    Available for characters, exponential sums, the chirp and sums, scalings
    and translates of these.
    """
    x = np.asarray(x, dtype=float).ravel()
    if isinstance(body, (Character, TrigPoly, ExpSum)):
        if isinstance(body, Character):
            terms = [(1j * body.omega, body.c)]
        elif isinstance(body, TrigPoly):
            terms = [(1j * w, c) for w, c in body.terms]
        else:
            terms = list(body.terms)
        out = np.zeros((x.size, d), dtype=complex)
        for mu, c in terms:
            z = mu * x
            out = out + (x * x * (gfun(z) - h2fun(z)))[:, None] * _a(c)[None, :]
        return out
    if isinstance(body, Chirp):
        v = x * fresnel_primitive(x) + 0.5j * np.expm1(1j * x * x)
        return v[:, None] * _a(body.c)[None, :]
    if isinstance(body, Translate):
        a = body.s
        D = second_prim(body.inner, np.concatenate([x + a, [a]]), d)
        if D is None:
            return None
        P = prim_body(body.inner, 0.0, np.array([a]), d)
        return D[:-1] - D[-1][None, :] - x[:, None] * P
    if isinstance(body, Scale):
        D = second_prim(body.inner, x, d)
        return None if D is None else body.alpha * D
    if isinstance(body, Sum):
        out = np.zeros((x.size, d), dtype=complex)
        for b in body.terms:
            D = second_prim(b, x, d)
            if D is None:
                return None
            out = out + D
        return out
    return None


def _prim_mollified(body: Mollified, omega: float, s: np.ndarray, d: int) -> np.ndarray:
    """``(1/h) ∫₀^h e^{iωv} [Q(s+v) - Q(v)] dv`` with ``Q`` the inner primitive.

    For ``ω ≠ 0`` the ``v``-integral is done by parts: with
    ``E(y) = (e^{iωy} - 1)/(iω)`` and ``P`` the unmodulated primitive,
    ``∫_s^{s+h} e^{iωy} Q(y) dy = [E Q]_s^{s+h} - (ΔP - ΔQ)/(iω)``, so only
    inner primitives at ``s`` and ``s + h`` are needed.
    """
    h = body.h
    if omega == 0.0:
        D = second_prim(body.inner, np.concatenate([s, s + h, [h]]), d)
        if D is not None:
            n = s.size
            return (D[n:2 * n] - D[:n] - D[-1][None, :]) / h
    if abs(omega) >= 1e-3:
        x = np.concatenate([s, s + h, [0.0, h]])
        q = prim_body(body.inner, omega, x, d)
        p = prim_body(body.inner, 0.0, x, d)
        e = (x * gfun(1j * omega * x))[:, None]
        n = s.size

        def k(lo, hi):
            return (e[hi] * q[hi] - e[lo] * q[lo]
                    - ((p[hi] - p[lo]) - (q[hi] - q[lo])) / (1j * omega))

        ks = k(np.arange(n), np.arange(n, 2 * n))
        k0 = k(np.array([2 * n]), np.array([2 * n + 1]))
        return (np.exp(-1j * omega * s)[:, None] * ks - k0) / h
    out = np.empty((s.size, d), dtype=complex)
    for start in range(0, s.size, 64):
        ss = s[start:start + 64]
        smax = float(np.max(np.abs(ss))) if ss.size else 0.0
        fb = min(freq_bound(body.inner, -smax - h, smax + h), 200.0) + abs(omega)
        n_pan = max(1, int(math.ceil(h * fb / math.pi)))
        v, w = gl_panels(np.linspace(0.0, h, n_pan + 1), order=16)
        pts = (ss[:, None] + v[None, :]).ravel()
        q = prim_body(body.inner, omega, np.concatenate([pts, v]), d)
        qs = q[:pts.size].reshape(ss.size, v.size, d)
        qv = q[pts.size:]
        wv = (w * np.exp(1j * omega * v))[None, :, None]
        out[start:start + 64] = ((qs - qv[None, :, :]) * wv).sum(axis=1) / h
    return out


@lru_cache(maxsize=32)
def _node_table(body, d: int, lo: float, hi: float, plen: float):
    edges = panel_edges(lo, hi, plen)
    nodes, w = gl_panels(edges, order=10)
    vals = eval_body(body, nodes, d)
    return edges, nodes, w, vals


def _generic_prim(body, omega: float, s: np.ndarray, d: int) -> np.ndarray:
    """Cumulative panel quadrature of ``e^{-iωt} body(t)`` from 0 to each ``s``."""
    out = np.zeros((s.size, d), dtype=complex)
    if s.size == 0:
        return out
    for sign in (1.0, -1.0):
        mask = (s > 0) if sign > 0 else (s < 0)
        if not mask.any():
            continue
        smax = float(np.max(np.abs(s[mask])))
        lo, hi = (0.0, smax) if sign > 0 else (-smax, 0.0)
        # quantise the table length so repeated calls share the cache
        span = 2.0 ** math.ceil(math.log2(max(smax, 1.0)))
        lo_t, hi_t = (0.0, span) if sign > 0 else (-span, 0.0)
        fb = freq_bound(body, lo_t, hi_t) + abs(omega)
        # dyadic panels no longer than 1/2: half-integer s land on edges
        plen = oscillation_panel_length(fb, cap=0.5)
        plen = 2.0 ** math.floor(math.log2(plen))
        edges, nodes, w, vals = _node_table(body, d, lo_t, hi_t, plen)
        f = vals * (w * np.exp(-1j * omega * nodes))[:, None]
        npan = edges.size - 1
        panel = f.reshape(npan, 10, d).sum(axis=1)
        if sign > 0:
            cum = np.concatenate([np.zeros((1, d)), np.cumsum(panel, axis=0)])
            ss = s[mask]
            j = np.clip(np.searchsorted(edges, ss, side="right") - 1, 0, npan)
            base = cum[j]
            left = edges[j]
        else:
            # cumulative from 0 leftwards: value at edge k is -∫_{edge_k}^0
            rev = np.cumsum(panel[::-1], axis=0)[::-1]
            cum = -np.concatenate([rev, np.zeros((1, d))])
            ss = s[mask]
            j = np.clip(np.searchsorted(edges, ss, side="left"), 0, npan)
            base = cum[j]
            left = edges[j]
        # partial panel between the edge and s (skipped when s is an edge)
        part = np.nonzero(ss != left)[0]
        if part.size:
            x, wx = gl_panels(np.array([0.0, 1.0]), order=10)
            ln = (ss - left)[part]
            pts = left[part, None] + ln[:, None] * x[None, :]
            fv = eval_body(body, pts.ravel(), d).reshape(part.size, 10, d)
            fv = fv * (np.exp(-1j * omega * pts) * wx[None, :] * ln[:, None])[:, :, None]
            base = base.copy()
            base[part] += fv.sum(axis=1)
        out[mask] = base
    return out


# ---------------------------------------------------------------------------
# public evaluation
# ---------------------------------------------------------------------------

def evaluate_many(phi: FunctionDescriptor, t) -> np.ndarray:
    """Values of ``φ`` at an array of points; shape (n, d)."""
    t = np.asarray(t, dtype=float).ravel()
    if phi.domain.is_half and np.any(t < 0):
        raise DomainError("half-line descriptor evaluated at negative time")
    try:
        return eval_body(phi.body, t, phi.dim)
    except (FloatingPointError, OverflowError) as exc:  # pragma: no cover - defensive
        raise EvalError(str(exc)) from exc


def evaluate(phi: FunctionDescriptor, t) -> np.ndarray:
    """``φ(t)`` as a vector in ℂᵈ (or an (n, d) array for array ``t``)."""
    if np.ndim(t) == 0:
        return evaluate_many(phi, np.array([float(t)]))[0]
    return evaluate_many(phi, t)


def norm(values: np.ndarray) -> np.ndarray:
    """Max-of-component-moduli norm along the last axis."""
    return np.max(np.abs(values), axis=-1)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def _cj(z: complex) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _jc(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(float(v), 0.0)
    return complex(float(v[0]), float(v[1]))


def _amp_j(c: Amp) -> list:
    return [_cj(v) for v in c]


def _j_amp(v) -> Amp:
    return tuple(_jc(x) for x in v)


def body_to_json(body) -> dict:
    if isinstance(body, Character):
        return {"type": "character", "omega": body.omega, "c": _amp_j(body.c)}
    if isinstance(body, TrigPoly):
        return {"type": "trig_poly", "terms": [{"omega": w, "c": _amp_j(c)} for w, c in body.terms]}
    if isinstance(body, ExpSum):
        return {"type": "exp_sum", "terms": [{"rate": _cj(mu), "c": _amp_j(c)} for mu, c in body.terms]}
    if isinstance(body, Chirp):
        return {"type": "chirp", "c": _amp_j(body.c)}
    if isinstance(body, LinearChirp):
        return {"type": "linear_chirp", "c": _amp_j(body.c)}
    if isinstance(body, L1Kernel):
        return {"type": "l1_kernel", "kernel_id": body.kernel_id, "c": _amp_j(body.c)}
    if isinstance(body, Translate):
        return {"type": "translate", "s": body.s, "inner": body_to_json(body.inner)}
    if isinstance(body, ModulateChar):
        return {"type": "modulate", "omega": body.omega, "inner": body_to_json(body.inner)}
    if isinstance(body, Sum):
        return {"type": "sum", "terms": [body_to_json(b) for b in body.terms]}
    if isinstance(body, Scale):
        return {"type": "scale", "alpha": _cj(body.alpha), "inner": body_to_json(body.inner)}
    if isinstance(body, Mollified):
        return {"type": "mollified", "h": body.h, "inner": body_to_json(body.inner)}
    if isinstance(body, Primitive):
        return {"type": "primitive", "offset": _amp_j(body.offset), "inner": body_to_json(body.inner)}
    if isinstance(body, Convolved):
        return {"type": "convolved", "kernel_id": body.kernel_id, "inner": body_to_json(body.inner)}
    if isinstance(body, Sampled):
        return {"type": "sampled", "t0": body.t0, "dt": body.dt, "hold": body.hold,
                "values": [_amp_j(row) for row in body.values]}
    raise TypeError(type(body).__name__)


def body_from_json(obj: dict):
    try:
        kind = obj["type"]
        if kind == "character":
            return Character(float(obj["omega"]), _j_amp(obj["c"]))
        if kind == "trig_poly":
            return TrigPoly(tuple((float(t["omega"]), _j_amp(t["c"])) for t in obj["terms"]))
        if kind == "exp_sum":
            return ExpSum(tuple((_jc(t["rate"]), _j_amp(t["c"])) for t in obj["terms"]))
        if kind == "chirp":
            return Chirp(_j_amp(obj["c"]))
        if kind == "linear_chirp":
            return LinearChirp(_j_amp(obj["c"]))
        if kind == "l1_kernel":
            _kern.get_kernel(obj["kernel_id"])
            return L1Kernel(str(obj["kernel_id"]), _j_amp(obj["c"]))
        if kind == "translate":
            return Translate(body_from_json(obj["inner"]), float(obj["s"]))
        if kind == "modulate":
            return ModulateChar(body_from_json(obj["inner"]), float(obj["omega"]))
        if kind == "sum":
            return Sum(tuple(body_from_json(t) for t in obj["terms"]))
        if kind == "scale":
            return Scale(body_from_json(obj["inner"]), _jc(obj["alpha"]))
        if kind == "mollified":
            h = float(obj["h"])
            if not h > 0:
                raise PrecondError("mollifier width must be positive")
            return Mollified(body_from_json(obj["inner"]), h)
        if kind == "primitive":
            return Primitive(body_from_json(obj["inner"]), _j_amp(obj["offset"]))
        if kind == "convolved":
            _kern.get_kernel(obj["kernel_id"])
            return Convolved(body_from_json(obj["inner"]), str(obj["kernel_id"]))
        if kind == "sampled":
            if not float(obj["dt"]) > 0:
                raise PrecondError("sample spacing must be positive")
            return Sampled(float(obj["t0"]), float(obj["dt"]),
                           tuple(_j_amp(r) for r in obj["values"]), str(obj.get("hold", "linear")))
    except (KeyError, TypeError, IndexError) as exc:
        raise PrecondError(f"malformed descriptor body: {exc}") from exc
    raise PrecondError(f"unknown body type {obj.get('type')!r}")


def _body_dims(body) -> set:
    if isinstance(body, (Character, Chirp, LinearChirp, L1Kernel)):
        return {len(body.c)}
    if isinstance(body, (TrigPoly, ExpSum)):
        return {len(c) for _, c in body.terms}
    if isinstance(body, Sampled):
        return {len(r) for r in body.values}
    if isinstance(body, Sum):
        out = set()
        for b in body.terms:
            out |= _body_dims(b)
        return out
    if isinstance(body, Primitive):
        return {len(body.offset)} | _body_dims(body.inner)
    return _body_dims(body.inner)


def to_json_obj(phi: FunctionDescriptor) -> dict:
    return {"domain": phi.domain.value, "dim": phi.dim, "body": body_to_json(phi.body),
            "sup_norm_bound": phi.sup_norm_bound if math.isfinite(phi.sup_norm_bound) else "inf"}


def to_json(phi: FunctionDescriptor, indent: int | None = None) -> str:
    """Serialise to the descriptor JSON schema (floats in shortest round-trip form)."""
    return json.dumps(to_json_obj(phi), indent=indent)


def from_json_obj(obj: dict) -> FunctionDescriptor:
    try:
        domain = Domain(obj["domain"])
        dim = int(obj["dim"])
        body = body_from_json(obj["body"])
    except (KeyError, ValueError, TypeError) as exc:
        raise PrecondError(f"malformed descriptor: {exc}") from exc
    if dim < 1:
        raise PrecondError("dimension must be positive")
    dims = _body_dims(body)
    if dims and dims != {dim}:
        raise PrecondError(f"amplitude lengths {sorted(dims)} do not match dim={dim}")
    snb = obj.get("sup_norm_bound")
    if snb is None:
        bound = body_bound(body, domain.is_half)
    elif snb == "inf":
        bound = math.inf
    else:
        bound = float(snb)
    return FunctionDescriptor(domain, dim, body, bound)


def from_json(text: str) -> FunctionDescriptor:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PrecondError(f"invalid JSON: {exc}") from exc
    return from_json_obj(obj)


__all__ = [
    "Domain", "FunctionDescriptor", "Character", "TrigPoly", "ExpSum", "Chirp", "LinearChirp",
    "L1Kernel", "Translate", "ModulateChar", "Sum", "Scale", "Mollified", "Primitive",
    "Convolved", "Sampled", "character", "trig_poly", "exp_sum", "chirp", "linear_chirp",
    "l1_kernel", "sampled", "make", "translate", "modulate", "add", "scale", "subtract",
    "restrict_and_extend", "simplify", "equivalent", "evaluate", "evaluate_many", "norm",
    "to_json", "from_json", "to_json_obj", "from_json_obj", "gfun", "fresnel_primitive",
]
