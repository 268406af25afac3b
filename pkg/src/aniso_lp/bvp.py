"""Model boundary value problem on the half-cylinder ``[0, inf) x T^{n2}``.

Operator ``A = -d_t^2 - Delta_x + 1``. For the tangential character
``exp(i k.x)`` the normal ODE is ``-u'' + mu_k^2 u = 0`` with
``mu_k = <k>``, whose decaying solutions are multiples of ``exp(-mu_k t)``.
Everything per frequency is closed form:

* Cauchy data of decaying solutions span ``(1, -mu)``; the projector
  along the growing direction ``(1, mu)`` is
  ``P+ = [[1/2, -1/(2 mu)], [-mu/2, 1/2]]``.
* Poisson coefficient ``c(k) = (mu g0 - g1) / (2 mu)``.
* A boundary row ``B(k)(a, b) = alpha a + beta b`` restricted to the
  Calderon line is the scalar ``alpha - beta mu``.

Half-cylinder fields are finite sums of ``c t^p exp(-lambda t) exp(i k.x)``
so norms of integer normal order are exact Gram sums of
``int_0^inf t^n exp(-s t) dt = n! / s^{n+1}``.

Tangential coefficients are stored in FFT order and indexed by the ``k``
of ``exp(i k.x)`` (not the ``xi = -k`` slot of :func:`grid.dft`).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .grid import DomainError, Field, Lattice, StructureError
from .lp import make_profile, phi_table
from .sampling import generator


class NonFredholm(Exception):
    def __init__(self, diagnostic: dict):
        super().__init__(f"boundary condition {diagnostic.get('bc')!r} is not Fredholm")
        self.diagnostic = diagnostic


def boundary_lattice(size: int, n2: int = 1) -> Lattice:
    return Lattice(0, n2, (size,) * n2)


def char_coefficients(g: Field) -> np.ndarray:
    """Coefficient of ``exp(i k.x)`` at slot ``k`` (FFT order)."""
    return np.fft.fftn(g.samples) / g.lattice.total


def from_char_coefficients(lat: Lattice, c: np.ndarray) -> Field:
    return Field(lat, np.fft.ifftn(c) * lat.total)


def mu(lat: Lattice) -> np.ndarray:
    return lat.bracket("full")


# ---------------------------------------------------------------------------
# Calderon projector and Poisson operator


def calderon(m: float) -> np.ndarray:
    """``P+`` at a frequency with ``mu_k = m``."""
    return np.array([[0.5, -0.5 / m], [-0.5 * m, 0.5]])


def calderon_apply(m, a, b):
    c = poisson_coefficient(m, a, b)
    return c, -m * c


def poisson_coefficient(m, a, b):
    return (m * a - b) / (2.0 * m)


@dataclass(frozen=True)
class Term:
    """``coef(k) * t^tpower * exp(-rate(k) t)`` over the boundary lattice."""

    coef: np.ndarray
    rate: np.ndarray
    tpower: int


@dataclass(frozen=True, eq=False)
class HalfCylinderField:
    lattice: Lattice
    terms: tuple[Term, ...] = ()

    def __post_init__(self):
        if self.lattice.n1 != 0:
            raise StructureError("half-cylinder fields live over a boundary lattice (n1 = 0)")
        for t in self.terms:
            if t.coef.shape != self.lattice.shape or t.rate.shape != self.lattice.shape:
                raise StructureError("term arrays must match the boundary lattice")
            if np.any(t.rate <= 0):
                raise DomainError("decay rates must be positive")
            if t.tpower < 0:
                raise DomainError("t-powers must be non-negative")

    def __add__(self, other: "HalfCylinderField") -> "HalfCylinderField":
        if other.lattice != self.lattice:
            raise StructureError("fields live on different lattices")
        return HalfCylinderField(self.lattice, self.terms + other.terms)

    def scaled(self, s: complex) -> "HalfCylinderField":
        return HalfCylinderField(self.lattice, tuple(Term(s * t.coef, t.rate, t.tpower)
                                                     for t in self.terms))

    def __sub__(self, other):
        return self + other.scaled(-1.0)

    def dt(self) -> "HalfCylinderField":
        out = []
        for t in self.terms:
            if t.tpower:
                out.append(Term(t.tpower * t.coef, t.rate, t.tpower - 1))
            out.append(Term(-t.rate * t.coef, t.rate, t.tpower))
        return HalfCylinderField(self.lattice, tuple(out))

    def evaluate(self, t) -> np.ndarray:
        """Coefficient arrays at the heights ``t``; shape ``t.shape + lattice.shape``."""
        t = np.asarray(t, dtype=float)
        tt = t.reshape(t.shape + (1,) * self.lattice.ndim)
        out = np.zeros(t.shape + self.lattice.shape, dtype=complex)
        for term in self.terms:
            out += term.coef * tt ** term.tpower * np.exp(-term.rate * tt)
        return out

    def trace_pair(self) -> tuple[np.ndarray, np.ndarray]:
        """``(u, d_t u)`` at ``t = 0`` per tangential frequency."""
        a = np.zeros(self.lattice.shape, dtype=complex)
        b = np.zeros(self.lattice.shape, dtype=complex)
        for t in self.terms:
            if t.tpower == 0:
                a += t.coef
                b -= t.rate * t.coef
            elif t.tpower == 1:
                b += t.coef
        return a, b

    def to_samples(self, t) -> np.ndarray:
        """Grid values ``u(t, x)`` at heights ``t``."""
        c = self.evaluate(t)
        axes = tuple(range(np.ndim(t), c.ndim))
        return np.fft.ifftn(c, axes=axes) * self.lattice.total

    def modes(self, drop: float = 1e-13) -> list[dict]:
        """JSON-ready mode list ``[{k, terms: [[re, im, rate, tpower], ...]}, ...]``.

        Coefficients below ``drop`` times the largest one are omitted.
        """
        freqs = [np.broadcast_to(f, self.lattice.shape) for f in self.lattice.frequencies()]
        out = []
        big = max((float(np.max(np.abs(t.coef))) for t in self.terms), default=0.0)
        for idx in np.ndindex(*self.lattice.shape):
            k = [int(f[idx]) for f in freqs]
            rows = [[float(t.coef[idx].real), float(t.coef[idx].imag), float(t.rate[idx]), t.tpower]
                    for t in self.terms if abs(t.coef[idx]) > drop * big]
            if rows:
                out.append({"k": k, "terms": rows})
        return out

    def to_json(self) -> str:
        lat = self.lattice
        return json.dumps({"n2": lat.n2, "sizes": list(lat.sizes), "modes": self.modes()},
                          sort_keys=True)


def apply_A(u: HalfCylinderField) -> HalfCylinderField:
    """``A(c t^p e^{-l t}) = c [-p(p-1) t^{p-2} + 2 p l t^{p-1} + (mu^2 - l^2) t^p] e^{-l t}``."""
    m2 = mu(u.lattice) ** 2
    out = []
    for t in u.terms:
        p, lam, c = t.tpower, t.rate, t.coef
        out.append(Term(c * (m2 - lam ** 2), lam, p))
        if p >= 1:
            out.append(Term(2.0 * p * lam * c, lam, p - 1))
        if p >= 2:
            out.append(Term(-p * (p - 1) * c, lam, p - 2))
    return HalfCylinderField(u.lattice, tuple(out))


@dataclass(frozen=True)
class BoundaryData:
    """Dirichlet and Neumann traces ``(u, d_t u)`` at ``t = 0``."""

    g0: Field
    g1: Field

    def __post_init__(self):
        if self.g0.lattice != self.g1.lattice:
            raise StructureError("boundary data on different lattices")
        if self.g0.lattice.n1 != 0:
            raise StructureError("boundary data lives on a boundary lattice (n1 = 0)")

    @property
    def lattice(self) -> Lattice:
        return self.g0.lattice


def poisson(g: BoundaryData) -> HalfCylinderField:
    """Decaying solution of ``A u = 0`` whose Cauchy data is ``P+ (g0, g1)``."""
    lat = g.lattice
    m = mu(lat)
    c = poisson_coefficient(m, char_coefficients(g.g0), char_coefficients(g.g1))
    return HalfCylinderField(lat, (Term(c, m.copy(), 0),))


# ---------------------------------------------------------------------------
# norms


def _gram(terms_a, terms_b, shape) -> np.ndarray:
    """``int_0^inf u_a(t) conj(u_b(t)) dt`` per frequency."""
    out = np.zeros(shape, dtype=complex)
    for ta in terms_a:
        for tb in terms_b:
            n = ta.tpower + tb.tpower
            out += ta.coef * np.conj(tb.coef) * math.factorial(n) / (ta.rate + tb.rate) ** (n + 1)
    return out


def normal_energy(u: HalfCylinderField, s1: int) -> list[np.ndarray]:
    """``int |d_t^j u_k|^2 dt`` for ``j = 0..s1``."""
    out = []
    cur = u
    for j in range(s1 + 1):
        out.append(_gram(cur.terms, cur.terms, u.lattice.shape).real)
        cur = cur.dt()
    return out


def half_norm(u: HalfCylinderField, s1: int, s2: float) -> float:
    """``H^{(s1, s2), 2}`` norm on the half-cylinder for integer ``s1 >= 0``:
    ``sum_k <k>^{2 s2} sum_j C(s1, j) <k>^{2(s1-j)} int |d_t^j u_k|^2``."""
    if s1 < 0 or int(s1) != s1:
        raise DomainError("half-cylinder norms need integer s1 >= 0")
    s1 = int(s1)
    m = mu(u.lattice)
    en = normal_energy(u, s1)
    acc = sum(math.comb(s1, j) * m ** (2 * (s1 - j)) * en[j] for j in range(s1 + 1))
    return float(np.sqrt(np.sum(m ** (2 * s2) * acc)))


def boundary_norm(c: np.ndarray, lat: Lattice, smoothness: float) -> float:
    return float(np.sqrt(np.sum(mu(lat) ** (2 * smoothness) * np.abs(c) ** 2)))


# ---------------------------------------------------------------------------
# boundary conditions


@dataclass(frozen=True, eq=False)
class BCondSpec:
    """Per-frequency row ``B(k)(a, b) = alpha(mu) a + beta(mu) b``.

    ``order`` grades the target: the indicator divides the Calderon-line
    restriction by ``mu^order``.
    """

    name: str
    alpha: Callable[[np.ndarray], np.ndarray]
    beta: Callable[[np.ndarray], np.ndarray]
    order: int

    def rows(self, m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        a = np.broadcast_to(np.asarray(self.alpha(m), dtype=complex), m.shape)
        b = np.broadcast_to(np.asarray(self.beta(m), dtype=complex), m.shape)
        return a, b

    def apply(self, m, a, b):
        al, be = self.rows(m)
        return al * a + be * b

    def on_calderon_line(self, m: np.ndarray) -> np.ndarray:
        """``B(k)(1, -mu_k)``."""
        al, be = self.rows(m)
        return al - be * m

    def indicator(self, m: np.ndarray) -> np.ndarray:
        return np.abs(self.on_calderon_line(m)) / m ** self.order


def dirichlet() -> BCondSpec:
    return BCondSpec("dirichlet", lambda m: 1.0, lambda m: 0.0, 0)


def neumann() -> BCondSpec:
    return BCondSpec("neumann", lambda m: 0.0, lambda m: 1.0, 1)


def robin(gamma: float) -> BCondSpec:
    """``b + gamma a``; with ``gamma = <k0>`` it annihilates the Calderon line at ``|k| = |k0|``."""
    return BCondSpec(f"robin:{gamma:g}", lambda m: gamma, lambda m: 1.0, 1)


def pathological() -> BCondSpec:
    """``b + mu a``: vanishes on the Calderon line at every frequency."""
    return BCondSpec("pathological", lambda m: m, lambda m: 1.0, 1)


def bc_from_name(text: str) -> BCondSpec:
    if text == "dirichlet":
        return dirichlet()
    if text == "neumann":
        return neumann()
    if text == "pathological":
        return pathological()
    if text.startswith("robin:"):
        try:
            return robin(float(text.split(":", 1)[1]))
        except ValueError as exc:
            raise DomainError(f"bad Robin coefficient in {text!r}") from exc
    raise DomainError(f"unknown boundary condition {text!r}")


def robin_kernel_witness(lat: Lattice, k0) -> BCondSpec:
    """Robin condition whose Calderon restriction vanishes exactly at ``|k| = |k0|``."""
    k0 = np.asarray(k0, dtype=float)
    gamma = float(np.sqrt(1.0 + np.sum(k0 ** 2)))
    return robin(gamma)


def fredholm_diagnostic(bc: BCondSpec, lat: Lattice, floor: float = 1e-3, tol: float = 1e-12) -> dict:
    """Indicator statistics over the lattice.

    Fredholm verdict: the zero set of the indicator stays clear of the top
    dyadic shell and the indicator is at least ``floor`` on that shell, i.e.
    the restriction to the Calderon line is invertible up to finitely many
    low frequencies, uniformly at high frequency.
    """
    m = mu(lat)
    ind = bc.indicator(m)
    r = lat.freq_norm()
    top = len(phi_table(lat)) - 1
    outer = r >= 2.0 ** (top - 2)
    zero = ind <= tol
    freqs = [np.broadcast_to(f, lat.shape) for f in lat.frequencies()]
    zero_k = [[int(f[idx]) for f in freqs] for idx in zip(*np.nonzero(zero))]
    fredholm = (not np.any(zero & outer)) and float(ind[outer].min()) >= floor
    return {"bc": bc.name, "indicator_min": float(ind.min()),
            "indicator_min_outer": float(ind[outer].min()),
            "indicator_max": float(ind.max()),
            "zero_set": zero_k, "kernel_dim": int(zero.sum()), "fredholm": bool(fredholm)}


# ---------------------------------------------------------------------------
# solving


def particular_solution(f: HalfCylinderField) -> HalfCylinderField:
    """Exact decaying ``v`` with ``A v = f`` by a polynomial ansatz per term.

    For ``c t^p e^{-l t}`` with ``l != mu`` the ansatz has degree ``p``; at
    resonance ``l = mu`` the degree is ``p + 1`` and the constant is 0.
    """
    m = mu(f.lattice)
    out = []
    for t in f.terms:
        p, lam, c = t.tpower, t.rate, t.coef
        D = m ** 2 - lam ** 2
        res = np.abs(D) <= 1e-12 * m ** 2
        Dsafe = np.where(res, 1.0, D)
        # non-resonant: a_p = c/D, a_i = ((i+2)(i+1) a_{i+2} - 2 l (i+1) a_{i+1}) / D
        a = [np.zeros_like(c) for _ in range(p + 3)]
        a[p] = c / Dsafe
        for i in range(p - 1, -1, -1):
            a[i] = ((i + 2) * (i + 1) * a[i + 2] - 2 * lam * (i + 1) * a[i + 1]) / Dsafe
        # resonant: 2 l (i+1) a_{i+1} = (i+2)(i+1) a_{i+2} + c delta_{ip}
        b = [np.zeros_like(c) for _ in range(p + 3)]
        b[p + 1] = c / (2 * lam * (p + 1))
        for i in range(p - 1, -1, -1):
            b[i + 1] = (i + 2) * (i + 1) * b[i + 2] / (2 * lam * (i + 1))
        for i in range(p + 2):
            coef = np.where(res, b[i], a[i] if i <= p else 0.0)
            if np.any(coef != 0):
                out.append(Term(coef, lam, i))
    return HalfCylinderField(f.lattice, tuple(out))


@dataclass
class BVPSolution:
    u: HalfCylinderField | None
    diagnostic: dict
    residuals: dict = dc_field(default_factory=dict)


def solve_bvp(f: HalfCylinderField, bc: BCondSpec, g: Field, check: bool = True) -> BVPSolution:
    """``A u = f`` on the half-cylinder with ``B r_1 u = g``.

    ``u = v + w`` with ``v`` a particular solution and ``w`` in the Poisson
    range fixing the boundary row. If the condition is not Fredholm the
    solution is ``None`` and the diagnostic says why. On the (finite) zero
    set of a Fredholm condition the kernel component is set to 0 and the
    data's obstruction is reported as ``cokernel_residual``.
    """
    lat = f.lattice
    if g.lattice != lat:
        raise StructureError("boundary data lattice differs from the field's")
    diag = fredholm_diagnostic(bc, lat)
    if not diag["fredholm"]:
        return BVPSolution(None, diag)
    m = mu(lat)
    v = particular_solution(f)
    a0, a1 = v.trace_pair()
    rhs = char_coefficients(g) - bc.apply(m, a0, a1)
    line = bc.on_calderon_line(m)
    zero = bc.indicator(m) <= 1e-12
    c = np.where(zero, 0.0, rhs / np.where(zero, 1.0, line))
    diag["cokernel_residual"] = float(np.max(np.abs(rhs[zero]), initial=0.0))
    u = v + HalfCylinderField(lat, (Term(c, m.copy(), 0),))
    out = BVPSolution(u, diag)
    if check:
        out.residuals = bvp_residuals(u, f, bc, g)
    return out


def bvp_residuals(u: HalfCylinderField, f: HalfCylinderField, bc: BCondSpec, g: Field) -> dict:
    """Max-relative residuals of ``A u = f`` (on a t-grid) and ``B r_1 u = g``."""
    t = np.linspace(0.0, 8.0, 65)
    fa = f.evaluate(t)
    scale = max(float(np.max(np.abs(fa))), 1e-300)
    interior = float(np.max(np.abs(apply_A(u).evaluate(t) - fa))) / scale
    m = mu(u.lattice)
    a, b = u.trace_pair()
    gh = char_coefficients(g)
    gs = max(float(np.max(np.abs(gh))), 1e-300)
    zero = bc.indicator(m) <= 1e-12
    bres = np.abs(bc.apply(m, a, b) - gh)
    boundary = float(np.max(np.where(zero, 0.0, bres))) / gs
    return {"interior": interior if np.any(fa) else float(np.max(np.abs(apply_A(u).evaluate(t)))),
            "boundary": boundary}


# ---------------------------------------------------------------------------
# invertible double (grid route)


def doubled_lattice(nt: int, size: int, n2: int = 1) -> Lattice:
    """``T^1 x T^{n2}``: axis 0 is ``t`` on ``[-pi, pi)``, the half-cylinder is ``t in [0, pi]``."""
    return Lattice(1, n2, (nt,) + (size,) * n2)


def double_symbol(lat: Lattice) -> np.ndarray:
    return lat.freq_norm() ** 2 + 1.0


def invertible_double_solve(f: Field) -> Field:
    lat = f.lattice
    if lat.n1 != 1:
        raise StructureError("the doubled lattice carries one t-axis as factor 1")
    c = np.fft.ifftn(f.samples) / double_symbol(lat)
    return Field(lat, np.fft.fftn(c))


def apply_double(v: Field) -> Field:
    c = np.fft.ifftn(v.samples) * double_symbol(v.lattice)
    return Field(v.lattice, np.fft.fftn(c))


def t_cutoff(lat: Lattice) -> np.ndarray:
    """Zero for ``t < 0``; 1 on ``[0, pi/2]``; smoothly 0 by ``t = pi``."""
    n = lat.sizes[0]
    t = 2.0 * np.pi * np.arange(n) / n
    t = np.where(t >= np.pi, t - 2.0 * np.pi, t)
    g = make_profile()
    w = np.where(t >= 0, g(t / (np.pi / 2.0)), 0.0)
    return w.reshape((n,) + (1,) * lat.n2)


def extend_source(f: Field) -> Field:
    """Zero extension to ``t < 0`` followed by the smooth cutoff in ``t``."""
    return Field(f.lattice, f.samples * t_cutoff(f.lattice))


@dataclass
class GridBVPSolution:
    v: Field
    w: HalfCylinderField
    diagnostic: dict
    residuals: dict

    def samples(self, t_index) -> np.ndarray:
        """``u = v + w`` at grid heights ``t_index`` (indices into the t-axis)."""
        n = self.v.lattice.sizes[0]
        t = 2.0 * np.pi * np.asarray(t_index) / n
        return self.v.samples[t_index] + self.w.to_samples(t)


def solve_bvp_grid(f: Field, bc: BCondSpec, g: Field) -> GridBVPSolution | BVPSolution:
    """Grid route: ``v = D^-1 E f`` on the doubled torus, corrected by a Poisson term.

    ``A u = f`` holds where the cutoff is 1 (``0 <= t <= pi/2``), in the
    discrete spectral sense; the boundary row holds per frequency.
    """
    lat = f.lattice
    blat = g.lattice
    if blat != lat.without_axis(0):
        raise StructureError("boundary data must live on the tangential lattice")
    diag = fredholm_diagnostic(bc, blat)
    if not diag["fredholm"]:
        return BVPSolution(None, diag)
    ef = extend_source(f)
    v = invertible_double_solve(ef)
    from .trace import trace

    tr = trace(v, 1, 0)
    a0 = char_coefficients(tr.components[0])
    a1 = char_coefficients(tr.components[1])
    m = mu(blat)
    rhs = char_coefficients(g) - bc.apply(m, a0, a1)
    zero = bc.indicator(m) <= 1e-12
    c = np.where(zero, 0.0, rhs / np.where(zero, 1.0, bc.on_calderon_line(m)))
    w = HalfCylinderField(blat, (Term(c, m.copy(), 0),))
    # residuals: D v = E f exactly; E f = f on the plateau; A w = 0 termwise
    plateau = t_cutoff(lat).ravel() == 1.0
    dv = apply_double(v).samples[plateau]
    fs = f.samples[plateau]
    scale = max(float(np.max(np.abs(fs))), 1e-300)
    aw = apply_A(w).evaluate(np.array([0.0]))
    wa, wb = w.trace_pair()
    bres = np.abs(bc.apply(m, a0 + wa, a1 + wb) - char_coefficients(g))
    gs = max(float(np.max(np.abs(char_coefficients(g)))), 1e-300)
    res = {"interior": float(np.max(np.abs(dv - fs))) / scale + float(np.max(np.abs(aw))),
           "boundary": float(np.max(np.where(zero, 0.0, bres))) / gs}
    return GridBVPSolution(v, w, diag, res)


# ---------------------------------------------------------------------------
# elliptic estimate


def shell_data(lat: Lattice, k: int, rng: np.random.Generator, terms: int = 2) -> tuple[HalfCylinderField, Field]:
    """Random source and boundary data supported on tangential shell ``k``."""
    w = phi_table(lat)[k]
    m = mu(lat)
    fterms = []
    for _ in range(terms):
        coef = w * (rng.standard_normal(lat.shape) + 1j * rng.standard_normal(lat.shape))
        rate = m * np.exp(rng.uniform(np.log(0.25), np.log(4.0), lat.shape))
        fterms.append(Term(coef, rate, int(rng.integers(0, 2))))
    gc = w * (rng.standard_normal(lat.shape) + 1j * rng.standard_normal(lat.shape))
    return HalfCylinderField(lat, tuple(fterms)), from_char_coefficients(lat, gc)


def estimate_ratio(u: HalfCylinderField, f: HalfCylinderField, g: Field, bc: BCondSpec,
                   s1: int, s2: float, lift: float = 0.0) -> float:
    """``||u||_{(s1+2, s2+lift)} / (||A u||_{(s1, s2)} + ||B r_1 u||)`` (m = 2, pi = 0)."""
    lhs = half_norm(u, s1 + 2, s2 + lift)
    a, b = u.trace_pair()
    m = mu(u.lattice)
    trace_smooth = s1 + s2 + 1.5 - bc.order
    rhs = half_norm(apply_A(u), s1, s2) + boundary_norm(bc.apply(m, a, b), u.lattice, trace_smooth)
    return 0.0 if rhs == 0.0 else lhs / rhs


def elliptic_constant(bc: BCondSpec, s1: int, s2: float, trials: int, seed: int,
                      sizes=(16, 32, 64), n2: int = 1, lift: float = 0.0) -> dict:
    """Measured constant of the elliptic estimate per tangential size.

    For each size the probes are random ``(f, g)`` on each tangential dyadic
    shell; ``C`` is the max ratio. ``lift`` raises the tangential order of
    the left side (the over-greedy variant); the per-shell max ratios of the
    largest size then give a growth slope.
    """
    if s1 not in (0, 1, 2):
        raise DomainError("s1 must be 0, 1 or 2")
    rows = []
    last_shells = None
    for size in sizes:
        lat = boundary_lattice(size, n2)
        diag = fredholm_diagnostic(bc, lat)
        if not diag["fredholm"]:
            raise NonFredholm(diag)
        per_shell = []
        for k in range(len(phi_table(lat))):
            best = 0.0
            for t in range(trials):
                f, g = shell_data(lat, k, generator(seed, size, k, t))
                sol = solve_bvp(f, bc, g, check=False)
                best = max(best, estimate_ratio(sol.u, f, g, bc, s1, s2, lift))
            per_shell.append(best)
        rows.append({"size": size, "C": max(per_shell), "per_shell": per_shell})
        last_shells = per_shell
    cs = np.array([r["C"] for r in rows])
    ks = np.array([k for k, r in enumerate(last_shells) if k >= 1 and r > 0])
    slope = float(np.polyfit(ks, np.log2([last_shells[k] for k in ks]), 1)[0])
    return {"bc": bc.name, "s1": s1, "s2": s2, "lift": lift, "rows": rows,
            "drift": float(cs.max() / cs.min()), "shell_slope": slope}


def single_mode_ratio(s1: int, s2: float, k=(1,), size: int = 16) -> float:
    """Estimate ratio for ``u = exp(-mu t) exp(i k.x)`` under Dirichlet data."""
    lat = boundary_lattice(size, len(k))
    c = np.zeros(lat.shape, dtype=complex)
    c[tuple(int(x) % size for x in k)] = 1.0
    u = HalfCylinderField(lat, (Term(c, mu(lat).copy(), 0),))
    f = HalfCylinderField(lat, ())
    return estimate_ratio(u, f, from_char_coefficients(lat, c), dirichlet(), s1, s2)
