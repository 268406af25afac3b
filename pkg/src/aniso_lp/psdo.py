"""Symbols, periodic Kohn-Nirenberg quantization and operator probes.

A symbol ``a(x, xi)`` acts by

    (Op(a) f)(x) = sum_eta a(x, eta) exp(i eta.x) f_check(eta),
    f_check(eta) = (1/Ntot) sum_y exp(-i eta.y) f(y),

i.e. ``f_check(eta)`` is the coefficient of ``exp(i eta.x)`` in ``f``, so
``a = xi_k`` quantizes to ``-i d/dx_k``. Symbols that are finite sums
``sum_r c_r(x) m_r(xi)`` carry their terms and use an FFT fast path;
everything else goes through the dense reference path, which costs
``O(Ntot^2)`` and is evaluated in row chunks.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .grid import DomainError, Field, Lattice, StructureError
from .lp import make_profile, phi_table
from .sampling import generator, mixed_fields, shell_field
from .spaces import SpaceSpec, multiplier_weight

CHUNK = 1 << 22  # complex entries per dense block


@dataclass(frozen=True)
class SymbolClass:
    """``radial(m)``, ``aniso(m1, m2)`` or ``product(m1, m2)``.

    ``split`` is the number of leading axes forming the first frequency
    group; ``None`` means the lattice's own factor split.
    """

    kind: str
    m1: float
    m2: float = 0.0
    split: int | None = None

    def __post_init__(self):
        if self.kind not in ("radial", "aniso", "product"):
            raise DomainError(f"unknown symbol class {self.kind!r}")
        if self.kind == "radial" and self.m2 != 0.0:
            raise DomainError("radial class has a single order")

    def groups(self, ndim: int, n1: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        if self.split is None:
            k = n1
        else:
            k = self.split if self.split >= 0 else ndim + self.split
        return tuple(range(k)), tuple(range(k, ndim))

    def weight(self, xi: Sequence[np.ndarray], n1: int, alpha: Sequence[int]) -> np.ndarray:
        """Class weight ``<.>^{m - |alpha|}`` at frequencies ``xi``."""
        g1, g2 = self.groups(len(xi), n1)
        a1 = sum(alpha[k] for k in g1)
        a2 = sum(alpha[k] for k in g2)

        def br(axes):
            return np.sqrt(1.0 + sum(np.asarray(xi[k], float) ** 2 for k in axes))

        if self.kind == "radial":
            return br(g1 + g2) ** (self.m1 - a1 - a2)
        if self.kind == "aniso":
            return br(g1 + g2) ** (self.m1 - a1) * br(g2) ** (self.m2 - a2)
        return br(g1) ** (self.m1 - a1) * br(g2) ** (self.m2 - a2)

    def order_shift(self) -> tuple[float, float]:
        return self.m1, self.m2

    def label(self) -> str:
        if self.kind == "radial":
            return f"radial({self.m1:g})"
        return f"{self.kind}({self.m1:g},{self.m2:g})"


XFun = Callable[[tuple], np.ndarray]
XiFun = Callable[[tuple], np.ndarray]


@dataclass(frozen=True, eq=False)
class SymbolSpec:
    """A named symbol with its declared class.

    ``evaluator(x, xi)`` takes tuples of broadcastable coordinate arrays.
    ``terms``, when present, is a separable representation
    ``((c_1, m_1), ...)`` with ``c_r(x)`` and ``m_r(xi)`` of the same form.
    """

    name: str
    klass: SymbolClass
    evaluator: Callable[[tuple, tuple], np.ndarray] | None = None
    terms: tuple[tuple[XFun, XiFun], ...] | None = None

    def __post_init__(self):
        if self.evaluator is None and self.terms is None:
            raise DomainError("symbol needs an evaluator or separable terms")

    def __call__(self, x: tuple, xi: tuple) -> np.ndarray:
        if self.evaluator is not None:
            return np.asarray(self.evaluator(x, xi))
        return sum(np.asarray(c(x)) * np.asarray(m(xi)) for c, m in self.terms)

    @property
    def x_independent(self) -> bool:
        return self.terms is not None and all(getattr(c, "constant", False) for c, _ in self.terms)

    @property
    def xi_independent(self) -> bool:
        return self.terms is not None and all(getattr(m, "constant", False) for _, m in self.terms)


def _const(value=1.0):
    def fn(coords):
        return np.asarray(value, dtype=complex)

    fn.constant = True
    return fn


def _grid_x(lat: Lattice) -> tuple:
    return lat.coordinates()


def _grid_xi(lat: Lattice) -> tuple:
    return tuple(k.astype(float) for k in lat.frequencies())


# ---------------------------------------------------------------------------
# quantization


def _spectral_apply(lat: Lattice, m: np.ndarray, u: np.ndarray) -> np.ndarray:
    """``sum_eta m(eta) u_check(eta) exp(i eta.x)`` for an x-independent ``m``."""
    return np.fft.ifftn(np.broadcast_to(m, lat.shape) * np.fft.fftn(u))


def _dense_rows(a: SymbolSpec, lat: Lattice, u_check: np.ndarray, conj=False):
    """Row-chunked evaluation of ``sum_eta a(x, eta) exp(i eta.x) u_check(eta)``."""
    n = lat.ndim
    xs = [c.ravel() for c in np.meshgrid(*[c.ravel() for c in lat.coordinates()], indexing="ij")]
    ks = [k.ravel().astype(float)
          for k in np.meshgrid(*[k.ravel() for k in lat.frequencies()], indexing="ij")]
    total = lat.total
    step = max(1, CHUNK // total)
    out = np.empty(total, dtype=complex)
    uc = u_check.ravel()
    for start in range(0, total, step):
        sl = slice(start, min(start + step, total))
        xr = tuple(x[sl][:, None] for x in xs)
        kr = tuple(k[None, :] for k in ks)
        vals = np.broadcast_to(a(xr, kr), (sl.stop - sl.start, total))
        if conj:
            vals = np.conj(vals)
        phase = np.exp(1j * sum(xr[d] * kr[d] for d in range(n)))
        out[sl] = (vals * phase) @ uc
    return out.reshape(lat.shape)


def quantize(a: SymbolSpec, f: Field, dense: bool = False) -> Field:
    """``Op(a) f``; ``dense=True`` forces the reference summation."""
    if not isinstance(f, Field):
        raise StructureError("quantize expects a Field")
    lat = f.lattice
    if a.terms is not None and not dense:
        xs, ks = _grid_x(lat), _grid_xi(lat)
        acc = np.zeros(lat.shape, dtype=complex)
        for c, m in a.terms:
            acc = acc + np.broadcast_to(c(xs), lat.shape) * _spectral_apply(lat, m(ks), f.samples)
        return Field(lat, acc)
    u_check = np.fft.fftn(f.samples) / lat.total
    return Field(lat, _dense_rows(a, lat, u_check))


def quantize_adjoint(a: SymbolSpec, g: Field) -> Field:
    """``Op(a)^*`` with respect to the normalized ``L^2`` pairing."""
    lat = g.lattice
    xs, ks = _grid_x(lat), _grid_xi(lat)
    if a.terms is not None:
        acc = np.zeros(lat.shape, dtype=complex)
        for c, m in a.terms:
            u = np.conj(np.broadcast_to(c(xs), lat.shape)) * g.samples
            acc = acc + _spectral_apply(lat, np.conj(np.broadcast_to(m(ks), lat.shape)), u)
        return Field(lat, acc)
    # h(eta) = (1/Ntot) sum_x conj(a(x, eta)) exp(-i eta.x) g(x), then synthesize
    xg = [c.ravel() for c in np.meshgrid(*[c.ravel() for c in lat.coordinates()], indexing="ij")]
    kg = [k.ravel().astype(float)
          for k in np.meshgrid(*[k.ravel() for k in lat.frequencies()], indexing="ij")]
    total = lat.total
    step = max(1, CHUNK // total)
    h = np.empty(total, dtype=complex)
    gv = g.samples.ravel()
    for start in range(0, total, step):
        sl = slice(start, min(start + step, total))
        kr = tuple(k[sl][:, None] for k in kg)
        xr = tuple(x[None, :] for x in xg)
        vals = np.conj(np.broadcast_to(a(xr, kr), (sl.stop - sl.start, total)))
        phase = np.exp(-1j * sum(xr[d] * kr[d] for d in range(lat.ndim)))
        h[sl] = (vals * phase) @ gv / total
    # sum_eta h(eta) exp(i eta.y): h is laid out in FFT order already
    return Field(lat, np.fft.ifftn(h.reshape(lat.shape)) * total)


def operator_matrix(a: SymbolSpec, lattice: Lattice, dense: bool = True) -> np.ndarray:
    """Matrix of ``Op(a)`` in the point basis (small lattices only)."""
    total = lattice.total
    cols = np.empty((total, total), dtype=complex)
    for k in range(total):
        e = np.zeros(total, dtype=complex)
        e[k] = 1.0
        cols[:, k] = quantize(a, Field(lattice, e), dense=dense).samples.ravel()
    return cols


def symbol_product(a: SymbolSpec, b: SymbolSpec) -> SymbolSpec:
    """Pointwise product ``a(x, xi) b(x, xi)``; class orders add."""
    ka, kb = a.klass, b.klass
    if ka.kind == kb.kind and ka.split == kb.split:
        klass = SymbolClass(ka.kind, ka.m1 + kb.m1, ka.m2 + kb.m2, ka.split)
    else:
        # fall back to the coarser product class
        klass = SymbolClass("product", ka.m1 + kb.m1 + max(ka.m2, 0) + max(kb.m2, 0),
                            ka.m2 + kb.m2 + max(ka.m1, 0) + max(kb.m1, 0))
    name = f"{a.name}*{b.name}"
    if a.terms is not None and b.terms is not None:
        terms = []
        for ca, ma in a.terms:
            for cb, mb in b.terms:
                terms.append((_mul_fn(ca, cb), _mul_fn(ma, mb)))
        return SymbolSpec(name, klass, terms=tuple(terms))
    return SymbolSpec(name, klass, evaluator=lambda x, xi: a(x, xi) * b(x, xi))


def _mul_fn(u, v):
    def fn(coords):
        return np.asarray(u(coords)) * np.asarray(v(coords))

    fn.constant = getattr(u, "constant", False) and getattr(v, "constant", False)
    return fn


# ---------------------------------------------------------------------------
# built-in symbol library


def _xi_fn(fn):
    fn.constant = False
    return fn


def _bracket(xi, axes):
    return np.sqrt(1.0 + sum(np.asarray(xi[k], float) ** 2 for k in axes))


def sym_one() -> SymbolSpec:
    return SymbolSpec("one", SymbolClass("radial", 0.0), terms=((_const(), _const()),))


def sym_bessel(s: float) -> SymbolSpec:
    m = _xi_fn(lambda xi: _bracket(xi, range(len(xi))) ** s)
    return SymbolSpec(f"bessel({s:g})", SymbolClass("radial", s), terms=((_const(), m),))


def _factor2_axes(xi, n1):
    return range(n1, len(xi))


def sym_bessel2(s: float, n1: int = 1) -> SymbolSpec:
    m = _xi_fn(lambda xi: _bracket(xi, _factor2_axes(xi, n1)) ** s)
    return SymbolSpec(f"bessel2({s:g})", SymbolClass("aniso", 0.0, s), terms=((_const(), m),))


def sym_equiv_mult(s: float, n1: int = 1) -> SymbolSpec:
    """``<xi>^s / (<xi^(1)>^s + <xi^(2)>^s)``; bounded by 1 for ``s >= 0``."""

    def m(xi):
        full = _bracket(xi, range(len(xi))) ** s
        return full / (_bracket(xi, range(n1)) ** s + _bracket(xi, _factor2_axes(xi, n1)) ** s)

    return SymbolSpec(f"equiv_mult({s:g})", SymbolClass("product", 0.0, 0.0),
                      terms=((_const(), _xi_fn(m)),))


def sym_jj(s1: float, s2: float, n1: int = 1) -> SymbolSpec:
    """``<xi>^-s1 <xi'>^s1 * <xi^(2)>^-s2 <xi_n>^s2`` with ``xi'`` all but the
    last coordinate; order zero in the product class split as ``(xi', xi_n)``."""

    def m(xi):
        n = len(xi)
        w = _bracket(xi, range(n)) ** (-s1) * _bracket(xi, range(n - 1)) ** s1
        return w * _bracket(xi, _factor2_axes(xi, n1)) ** (-s2) * _bracket(xi, [n - 1]) ** s2

    return SymbolSpec(f"jj({s1:g},{s2:g})", SymbolClass("product", 0.0, 0.0, split=-1),
                      terms=((_const(), _xi_fn(m)),))


def sym_smooth_cutoff(c: float) -> SymbolSpec:
    """x-only bump: 1 within distance ``c`` of the torus center, 0 beyond ``2c``."""
    if not 0.0 < c <= np.pi / 2:
        raise DomainError("cutoff radius must lie in (0, pi/2]")
    g = make_profile()

    def cx(x):
        r = np.sqrt(sum((np.asarray(xx) - np.pi) ** 2 for xx in x))
        return g(r / c)

    cx.constant = False
    return SymbolSpec(f"smooth_cutoff({c:g})", SymbolClass("radial", 0.0), terms=((cx, _const()),))


_TRIG = re.compile(r"^(sin|cos)(\d+)$")


def x_factor(name: str) -> XFun:
    """``one``, ``sin<k>``/``cos<k>`` (of the k-th coordinate, 1-based)."""
    if name == "one":
        return _const()
    mt = _TRIG.match(name)
    if not mt:
        raise DomainError(f"unknown x-factor {name!r}")
    fn = np.sin if mt.group(1) == "sin" else np.cos
    k = int(mt.group(2)) - 1
    if k < 0:
        raise DomainError("coordinate index is 1-based")

    def cx(x):
        if k >= len(x):
            raise StructureError(f"x-factor {name} needs at least {k + 1} axes")
        return fn(x[k])

    cx.constant = False
    return cx


def xi_factor(name: str, n1: int = 1) -> XiFun:
    """``one``, ``ratio1`` = <xi^(1)>/<xi>, ``ratio2`` = <xi^(2)>/<xi>."""
    if name == "one":
        return _const()
    if name == "ratio1":
        return _xi_fn(lambda xi: _bracket(xi, range(n1)) / _bracket(xi, range(len(xi))))
    if name == "ratio2":
        return _xi_fn(lambda xi: _bracket(xi, _factor2_axes(xi, n1)) / _bracket(xi, range(len(xi))))
    raise DomainError(f"unknown xi-factor {name!r}")


def sym_mixed(cname: str, mname: str, n1: int = 1) -> SymbolSpec:
    # the bracket ratios are smooth only factor by factor
    klass = SymbolClass("radial", 0.0) if mname == "one" else SymbolClass("product", 0.0, 0.0)
    return SymbolSpec(f"mixed({cname},{mname})", klass,
                      terms=((x_factor(cname), xi_factor(mname, n1)),))


def symbol_from_name(text: str, n1: int = 1) -> SymbolSpec:
    """Parse ``one``, ``bessel(s)``, ``bessel2(s)``, ``equiv_mult(s)``,
    ``jj(s1,s2)``, ``smooth_cutoff(c)``, ``mixed(c,m)``."""
    text = text.replace(" ", "")
    mt = re.match(r"^(\w+)(?:\((.*)\))?$", text)
    if not mt:
        raise DomainError(f"cannot parse symbol {text!r}")
    name, args = mt.group(1), mt.group(2)
    parts = [] if not args else args.split(",")
    try:
        if name == "one" and not parts:
            return sym_one()
        if name == "bessel" and len(parts) == 1:
            return sym_bessel(float(parts[0]))
        if name == "bessel2" and len(parts) == 1:
            return sym_bessel2(float(parts[0]), n1)
        if name == "equiv_mult" and len(parts) == 1:
            return sym_equiv_mult(float(parts[0]), n1)
        if name == "jj" and len(parts) == 2:
            return sym_jj(float(parts[0]), float(parts[1]), n1)
        if name == "smooth_cutoff" and len(parts) == 1:
            return sym_smooth_cutoff(float(parts[0]))
        if name == "mixed" and len(parts) == 2:
            return sym_mixed(parts[0], parts[1], n1)
    except ValueError as exc:
        raise DomainError(f"bad arguments in {text!r}") from exc
    raise DomainError(f"unknown symbol {text!r}")


ORDER_ZERO_BUILTINS = ("one", "equiv_mult(1)", "jj(1,1)", "smooth_cutoff(1)",
                       "mixed(sin1,one)", "mixed(sin1,ratio1)")


# ---------------------------------------------------------------------------
# seminorms


_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0  # offsets -2..2


def _stencil(order: int) -> np.ndarray:
    """Composed 4th-order centered stencil for the ``order``-th derivative."""
    s = np.array([1.0])
    for _ in range(order):
        s = np.convolve(s, _D1)
    return s


def seminorm(a: SymbolSpec, alpha: Sequence[int], beta: Sequence[int], lattice: Lattice,
             shells: bool = False):
    """``sup |d_x^beta d_xi^alpha a| / weight`` over grid x lattice.

    Derivatives are composed 4th-order centered differences: step 1 in
    ``xi`` (lattice spacing), periodic step ``2 pi / N`` in ``x``. The sup
    runs over lattice frequencies whose whole ``xi``-stencil stays on the
    lattice. With ``shells=True`` also returns the sup restricted to each
    dyadic shell of ``|xi|``.
    """
    n = lattice.ndim
    alpha, beta = tuple(int(v) for v in alpha), tuple(int(v) for v in beta)
    if len(alpha) != n or len(beta) != n:
        raise StructureError("multi-indices must have one entry per axis")
    if min(alpha + beta) < 0 or sum(alpha) > 4 or sum(beta) > 4:
        raise DomainError("finite-difference orders limited to |alpha|, |beta| <= 4")
    # frequency points where the xi-stencil fits
    kept = []
    for d, N in enumerate(lattice.sizes):
        r = 2 * alpha[d]
        k = np.arange(-N // 2 + r, N // 2 - r)
        if k.size == 0:
            raise DomainError(f"stencil of width {2 * r + 1} exceeds axis {d}")
        kept.append(k.astype(float))
    kgrid = [k.ravel() for k in np.meshgrid(*kept, indexing="ij")]
    xgrid = [x.ravel() for x in np.meshgrid(*[c.ravel() for c in lattice.coordinates()],
                                            indexing="ij")]
    offs_xi = [np.arange(-2 * alpha[d], 2 * alpha[d] + 1) for d in range(n)]
    offs_x = [np.arange(-2 * beta[d], 2 * beta[d] + 1) for d in range(n)]
    w_xi = [_stencil(alpha[d]) for d in range(n)]
    w_x = [_stencil(beta[d]) * (lattice.sizes[d] / (2 * np.pi)) ** beta[d] for d in range(n)]
    h = [2 * np.pi / N for N in lattice.sizes]

    weight = a.klass.weight(kgrid, lattice.n1, alpha)

    nk = kgrid[0].size
    step = max(1, CHUNK // (8 * nk))
    best = np.zeros(nk)
    for start in range(0, xgrid[0].size, step):
        sl = slice(start, start + step)
        xr = [x[sl][:, None] for x in xgrid]
        acc = 0.0
        for ox in np.ndindex(*[len(o) for o in offs_x]):
            cx = np.prod([w_x[d][ox[d]] for d in range(n)])
            if cx == 0.0:
                continue
            xs = tuple(xr[d] + offs_x[d][ox[d]] * h[d] for d in range(n))
            for ok in np.ndindex(*[len(o) for o in offs_xi]):
                ck = np.prod([w_xi[d][ok[d]] for d in range(n)])
                if ck == 0.0:
                    continue
                ks = tuple(kgrid[d][None, :] + offs_xi[d][ok[d]] for d in range(n))
                acc = acc + cx * ck * a(xs, ks)
        val = np.abs(np.broadcast_to(acc, (xr[0].shape[0], nk)))
        best = np.maximum(best, val.max(axis=0))
    ratio = best / weight
    value = float(ratio.max())
    if not shells:
        return value
    r = np.sqrt(sum(k ** 2 for k in kgrid))
    table = []
    j = 0
    while True:
        lo, hi = (0.0, 2.0) if j == 0 else (2.0 ** (j - 1), 2.0 ** j)
        sel = (r >= lo) & (r < hi) if j else (r < hi)
        if not np.any(r >= lo):
            break
        table.append(float(ratio[sel].max()) if np.any(sel) else 0.0)
        j += 1
    return value, table


def seminorm_growth(a: SymbolSpec, alpha, beta, lattice: Lattice, floor: float = 1e-8) -> dict:
    """Seminorm with a flag for growth along the dyadic shells.

    A symbol in its declared class has shell sups that stay bounded; an
    under-declared order shows geometric growth. The flag is raised when
    the least-squares log2 slope of the shell sups (shells >= 1) exceeds
    1/2. Shells at rounding level (below ``floor``) are left out of the fit.
    """
    value, table = seminorm(a, alpha, beta, lattice, shells=True)
    js = np.array([j for j, v in enumerate(table) if j >= 1 and v > floor])
    slope = 0.0
    if js.size >= 2:
        slope = float(np.polyfit(js, np.log2([table[j] for j in js]), 1)[0])
    return {"value": value, "shells": table, "slope": slope, "unbounded": slope > 0.5}


# ---------------------------------------------------------------------------
# boundedness


def with_class(a: SymbolSpec, klass: SymbolClass) -> SymbolSpec:
    """Same symbol, declared in another class."""
    return SymbolSpec(a.name, klass, a.evaluator, a.terms)


def target_spec(a: SymbolSpec, spec: SpaceSpec) -> SpaceSpec:
    m1, m2 = a.klass.order_shift()
    return spec.shifted(m1, m2)


def _weights(lat: Lattice, spec: SpaceSpec) -> np.ndarray:
    return multiplier_weight(lat, spec)


def ratio_on(a: SymbolSpec, f: Field, spec: SpaceSpec, target: SpaceSpec | None = None) -> float:
    from .spaces import norm_value

    target = target or target_spec(a, spec)
    backend = "multiplier" if spec.p == 2.0 else "lp"
    return norm_value(quantize(a, f), target, backend) / norm_value(f, spec, backend)


def power_iteration(a: SymbolSpec, lat: Lattice, spec: SpaceSpec, start: Field,
                    iters: int = 40) -> float:
    """Largest singular value of ``W_t Op(a) W_s^-1`` (p = 2)."""
    ws = _weights(lat, spec)
    wt = _weights(lat, target_spec(a, spec))

    def mult(u, w):
        return Field(lat, np.fft.fftn(w * np.fft.ifftn(u.samples)))

    v = mult(start, ws)  # work in the weighted L^2 picture
    est = 0.0
    for _ in range(iters):
        nv = v.l2()
        if nv == 0.0:
            return 0.0
        v = v * (1.0 / nv)
        tv = mult(quantize(a, mult(v, 1.0 / ws)), wt)
        est = tv.l2()
        v = mult(quantize_adjoint(a, mult(tv, wt)), 1.0 / ws)
    return est


def boundedness_probe(a: SymbolSpec, spec: SpaceSpec, trials: int, seed: int,
                      size: int = 32, n1: int = 1, n2: int = 1, iters: int = 40) -> dict:
    """Sup of ``||Op(a) f||_target / ||f||_source`` on one lattice size.

    Candidates are seeded random fields plus single-shell fields; at p = 2
    the best candidate seeds a power iteration on the weighted operator.
    """
    lat = Lattice.square(size, n1, n2)
    fields = mixed_fields(lat, seed, trials, stream=size)
    for j in range(len(phi_table(lat))):
        try:
            fields.append(shell_field(lat, generator(seed, size, 10_000 + j), j))
        except DomainError:
            pass
    ratios = [ratio_on(a, f, spec) for f in fields]
    best = int(np.argmax(ratios))
    sup = float(ratios[best])
    out = {"size": size, "sampled_sup": sup}
    if spec.p == 2.0:
        sup = max(sup, power_iteration(a, lat, spec, fields[best], iters))
    out["sup_ratio"] = sup
    return out


def boundedness_sweep(a: SymbolSpec, spec: SpaceSpec, sizes=(16, 32, 64), trials: int = 8,
                      seed: int = 0) -> dict:
    rows = [boundedness_probe(a, spec, trials, seed, size) for size in sizes]
    sups = np.array([r["sup_ratio"] for r in rows])
    return {"rows": rows, "drift": float(sups.max() / sups.min()) if sups.min() > 0 else math.inf}


def dense_operator_norm(a: SymbolSpec, spec: SpaceSpec, size: int = 16, n1: int = 1,
                        n2: int = 1) -> float:
    """Oracle: spectral norm of the dense weighted matrix (p = 2)."""
    lat = Lattice.square(size, n1, n2)
    A = operator_matrix(a, lat, dense=True)
    eye = np.eye(lat.total).reshape((lat.total,) + lat.shape)
    axes = tuple(range(1, lat.ndim + 1))

    def mult_matrix(w):
        # rows of the result are images of point masses; transpose to columns
        img = np.fft.fftn(w * np.fft.ifftn(eye, axes=axes), axes=axes)
        return img.reshape(lat.total, lat.total).T

    T = mult_matrix(_weights(lat, target_spec(a, spec))) @ A @ mult_matrix(
        1.0 / _weights(lat, spec))
    return float(np.linalg.norm(T, 2))


# ---------------------------------------------------------------------------
# composition


def composition_remainder(a: SymbolSpec, b: SymbolSpec, j: int, trials: int, seed: int,
                          size: int = 32, n1: int = 1, n2: int = 1) -> float:
    """``max ||(Op(a)Op(b) - Op(ab)) f_j|| / ||f_j||`` over shell-``j`` fields."""
    lat = Lattice.square(size, n1, n2)
    ab = symbol_product(a, b)
    worst = 0.0
    for t in range(trials):
        fj = shell_field(lat, generator(seed, size, j, t), j)
        r = quantize(a, quantize(b, fj)) - quantize(ab, fj)
        worst = max(worst, r.l2() / fj.l2())
    return worst


def remainder_slope(a: SymbolSpec, b: SymbolSpec, js=(2, 3, 4, 5), trials: int = 4,
                    seed: int = 0, size: int = 32) -> dict:
    r = np.array([composition_remainder(a, b, j, trials, seed, size) for j in js])
    slope = float(np.polyfit(np.array(js, float), np.log2(r), 1)[0]) if np.all(r > 0) else -math.inf
    return {"js": list(js), "r": r.tolist(), "slope": slope}
