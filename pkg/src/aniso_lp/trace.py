"""Traces on coordinate sub-tori, boundary extensions and trace-loss probes.

The trace ``r_m`` restricts ``f, d_t f, ..., d_t^m f`` to the plane
``x_axis = 2 pi at / N`` with ``t = x_axis``; derivatives are spectral, so
traces are exact for band-limited fields. Odd derivatives drop the Nyquist
slot along the traced axis (its derivative is not real-representable).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import DomainError, Field, Lattice, StructureError, dft
from .lp import make_profile, phi_table
from .sampling import generator
from .spaces import SpaceSpec, norm_value


@dataclass(frozen=True, eq=False)
class TraceData:
    components: tuple[Field, ...]
    axis: int
    source: Lattice

    def __post_init__(self):
        b = self.source.without_axis(self.axis)
        if any(c.lattice != b for c in self.components):
            raise StructureError("trace components must live on the boundary lattice")

    @property
    def m(self) -> int:
        return len(self.components) - 1

    @property
    def boundary(self) -> Lattice:
        return self.source.without_axis(self.axis)


def derivative_weight(lat: Lattice, axis: int, k: int) -> np.ndarray:
    """Spectral weight of ``d^k / dx_axis^k`` in the module's coefficient layout.

    ``exp(i q x)`` sits at ``xi = -q``, so one derivative multiplies the slot
    ``xi`` by ``-i xi``.
    """
    xi = lat.frequencies()[axis].astype(float)
    w = (-1j * xi) ** k
    if k % 2 == 1:
        w = np.where(xi == -lat.sizes[axis] // 2, 0.0, w)
    return w


def normal_derivative(f: Field, axis: int, k: int) -> Field:
    if k == 0:
        return f
    c = np.fft.ifftn(f.samples)
    return Field(f.lattice, np.fft.fftn(derivative_weight(f.lattice, axis, k) * c))


def trace(f: Field, m: int, axis: int, at: int = 0) -> TraceData:
    lat = f.lattice
    if not 0 <= axis < lat.ndim:
        raise StructureError(f"axis {axis} out of range")
    if lat.ndim < 2:
        raise StructureError("trace needs at least two axes")
    if m < 0 or m + 1 > lat.sizes[axis] // 2:
        raise DomainError("trace order too large for this axis")
    comps = []
    for k in range(m + 1):
        d = normal_derivative(f, axis, k).samples
        comps.append(Field(lat.without_axis(axis), np.take(d, at % lat.sizes[axis], axis=axis)))
    return TraceData(tuple(comps), axis, lat)


# ---------------------------------------------------------------------------
# boundary extension e_m


def _signed_t(n: int) -> np.ndarray:
    """Grid coordinate along an axis wrapped to ``[-pi, pi)``."""
    t = 2.0 * np.pi * np.arange(n) / n
    return np.where(t >= np.pi, t - 2.0 * np.pi, t)


def extension_rate(eta_bracket, n_axis: int):
    """Decay rate of the normal profile: ``<eta>`` capped so the bump keeps
    at least about eight grid points, and floored so it fits in a period."""
    return np.clip(eta_bracket, 2.0 / np.pi, n_axis / 16.0)


def _profiles(m: int, n_axis: int, rates: np.ndarray) -> np.ndarray:
    """Raw profiles ``(t^k / k!) chi(lambda t)`` with shape (m+1, n_axis, R)."""
    g = make_profile()
    t = _signed_t(n_axis)[:, None]
    chi = g(np.abs(rates[None, :] * t))
    return np.stack([t ** k / math.factorial(k) * chi for k in range(m + 1)])


def _spectral_traces(prof: np.ndarray, n_axis: int) -> np.ndarray:
    """``M[k, l, r] = d^k prof_l(0)`` computed spectrally along the axis."""
    m1 = prof.shape[0]
    lat1 = Lattice(1, 0, (n_axis,))
    c = np.fft.ifft(prof, axis=1)
    out = np.empty((m1, m1, prof.shape[2]), dtype=complex)
    for k in range(m1):
        w = derivative_weight(lat1, 0, k)[:, None]
        out[k] = np.sum(w[None] * c, axis=1)  # value at t = 0 is the coefficient sum
    return out


def extension_profiles(m: int, n_axis: int, rates: np.ndarray) -> np.ndarray:
    """Profiles ``psi_l(t; eta)`` with spectral traces ``d^k psi_l(0) = delta_kl``."""
    prof = _profiles(m, n_axis, rates).astype(complex)
    M = _spectral_traces(prof, n_axis)  # (k, l, r)
    Minv = np.linalg.inv(np.moveaxis(M, 2, 0))  # (r, l, k)
    # psi_k = sum_l prof_l (M^{-1})_{l k}
    return np.einsum("ltr,rlk->ktr", prof, Minv)


def extend(data: TraceData, at: int = 0) -> Field:
    """``e_m``: boundary data to a field on the source lattice with ``r_m e_m = id``."""
    lat = data.source
    axis = data.axis
    n_axis = lat.sizes[axis]
    b = data.boundary
    coef = np.stack([dft(c).coefficients for c in data.components])  # (m+1, *bshape)
    brk = b.bracket().ravel()
    rates, inv = np.unique(extension_rate(brk, n_axis), return_inverse=True)
    psi = extension_profiles(data.m, n_axis, rates)  # (m+1, n_axis, R)
    psi_full = psi[:, :, inv]  # (m+1, n_axis, B)
    # per boundary frequency: normal profile sum_k g_k(eta) psi_k(t; eta)
    prof = np.einsum("kb,ktb->tb", coef.reshape(coef.shape[0], -1), psi_full)
    prof = np.roll(prof, at % n_axis, axis=0)
    # synthesize tangentially: boundary coefficients -> samples, per t
    prof = prof.reshape((n_axis,) + b.shape)
    samples = np.fft.fftn(prof, axes=tuple(range(1, b.ndim + 1)))
    return Field(lat, np.moveaxis(samples, 0, axis))


def boundary_data(lattice: Lattice, axis: int, components) -> TraceData:
    b = lattice.without_axis(axis)
    comps = tuple(c if isinstance(c, Field) else Field(b, c) for c in components)
    return TraceData(comps, axis, lattice)


# ---------------------------------------------------------------------------
# whole-space extension E_k by higher-order reflection


def reflection_coefficients(k: int) -> np.ndarray:
    """``c_1..c_{k+1}`` with ``sum_r c_r (-1/r)^j = 1`` for ``j = 0..k``.

    Then ``F(-t) = sum_r c_r f(t / r)`` matches ``f`` to order ``k`` at 0.
    """
    if k < 1:
        raise DomainError("reflection order must be >= 1")
    r = np.arange(1, k + 2, dtype=float)
    V = np.vstack([(-1.0 / r) ** j for j in range(k + 1)])
    return np.linalg.solve(V, np.ones(k + 1))


def reflect(f, k: int):
    """Callable extension of a function given on ``t >= 0``."""
    c = reflection_coefficients(k)

    def F(t):
        t = np.asarray(t, dtype=float)
        neg = t < 0
        out = np.array(f(np.where(neg, 0.0, t)), dtype=complex)
        if np.any(neg):
            s = -t[neg]
            out[neg] = sum(cr * np.asarray(f(s / (r + 1)), dtype=complex) for r, cr in enumerate(c))
        return out

    return F


def _lagrange(values: np.ndarray, pos: np.ndarray, order: int = 6) -> np.ndarray:
    """Interpolate samples ``values[..., a]`` (unit spacing) at fractional ``pos``."""
    n = values.shape[-1]
    base = np.clip(np.floor(pos).astype(int) - order // 2 + 1, 0, n - order)
    out = np.zeros(values.shape[:-1] + pos.shape, dtype=complex)
    for a in range(order):
        node = base + a
        w = np.ones_like(pos)
        for b in range(order):
            if b != a:
                w = w * (pos - (base + b)) / (a - b)
        out += values[..., node] * w
    return out


def whole_space_extension(f: Field, k: int, axis: int = 0, s1: float | None = None) -> Field:
    """``E_k`` on the torus: keep ``0 <= x_axis <= pi``, fill ``(pi, 2 pi)`` by
    reflection through the seam at 0.

    Values ``f(t / r)`` between grid points use local 6-point Lagrange
    interpolation on the kept half. Only the seam at 0 is matched; the
    opposite seam at ``pi`` is an artifact of the periodic box.
    """
    if k < 1:
        raise DomainError("reflection order must be >= 1")
    if s1 is not None and not abs(s1) < k:
        raise DomainError("E_k is valid for |s1| < k")
    lat = f.lattice
    n = lat.sizes[axis]
    half = n // 2
    c = reflection_coefficients(k)
    v = np.moveaxis(f.samples, axis, -1)
    kept = v[..., : half + 1]
    out = v.copy().astype(complex)
    for a in range(half + 1, n):
        t = n - a  # grid distance below the seam, in cells
        pos = np.array([t / (r + 1) for r in range(len(c))])
        vals = _lagrange(kept, pos)
        out[..., a] = np.tensordot(vals, c, axes=([-1], [0]))
    return Field(lat, np.moveaxis(out, -1, axis))


# ---------------------------------------------------------------------------
# trace-loss probe


CASES = ("tangential", "mixed")


def probe_lattice(direction: str, tangential: int = 64, normal: int = 128) -> tuple[Lattice, int]:
    """Lattice and traced axis for each probe direction.

    tangential: ``n1 = 2, n2 = 1``, normal axis is the first axis of factor 1.
    mixed: ``n1 = 1, n2 = 2``, normal axis is the last axis of factor 2.
    """
    if direction == "tangential":
        return Lattice(2, 1, (normal, tangential, tangential)), 0
    if direction == "mixed":
        return Lattice(1, 2, (tangential, tangential, normal)), 2
    raise DomainError(f"unknown probe direction {direction!r}")


def extremal_field(lat: Lattice, axis: int, spec: SpaceSpec, boundary_coef: np.ndarray) -> Field:
    """Normal profile ``c(eta, tau) = a(eta) w(eta, tau)^-2`` maximizing the
    trace at each boundary frequency for the ``p = 2`` source weight."""
    from .spaces import multiplier_weight

    w = multiplier_weight(lat, spec)
    a = np.expand_dims(boundary_coef, axis)
    return Field(lat, np.fft.fftn(a * w ** -2.0))


def trace_loss_probe(direction: str, s1: float, s2: float, p: float = 2.0,
                     eps=(0.0, 0.0), seeds: int = 16, seed: int = 0,
                     tangential: int = 64, normal: int = 128, shells=None) -> dict:
    """Ratios ``||r_0 f_k||_target / ||f_k||_source`` over boundary shells ``k``.

    Source ``H^{(s1,s2),p}``; targets ``(s1 - 1/2 - e1, s2 - e2)`` for the
    tangential case and ``(s1 - e1, s2 - 1/2 - e2)`` for the mixed case
    (``1/2`` reads ``1/p`` in general). Probes put random coefficients on
    the boundary product shell ``(k, k)`` and use the extremal normal
    profile of the ``p = 2`` source weight; 16 seeds per shell, max taken.
    """
    if direction not in CASES:
        raise DomainError(f"unknown probe direction {direction!r}")
    lat, axis = probe_lattice(direction, tangential, normal)
    src = SpaceSpec("Haniso", s1, s2, p)
    e1, e2 = eps
    if direction == "tangential":
        if not s1 > 1.0 / p:
            raise DomainError("tangential trace needs s1 > 1/p")
        tgt = SpaceSpec("Haniso" if p == 2.0 else "Baniso", s1 - 1.0 / p - e1, s2 - e2, p)
    else:
        if not s2 > 1.0 / p:
            raise DomainError("mixed trace needs s2 > 1/p")
        tgt = SpaceSpec("Haniso" if p == 2.0 else "Baniso", s1 - e1, s2 - 1.0 / p - e2, p)
    b = lat.without_axis(axis)
    # product shells phi_k(eta^(1)) psi_k(eta^(2)): the anisotropic weights have
    # uniform size on them, unlike on radial annuli
    table = [u * v for u, v in zip(phi_table(b, "factor1"), phi_table(b, "factor2"))]
    if shells is None:
        shells = [k for k in range(1, len(table)) if 2 ** (k + 1) <= tangential // 2]
    if len(shells) < 2:
        raise DomainError("lattice too small for a shell sweep")
    backend = "multiplier" if p == 2.0 else "lp"
    src_w = SpaceSpec("Haniso", s1, s2, 2.0)
    ratios = []
    for k in shells:
        best = 0.0
        for t in range(seeds):
            rng = generator(seed, k, t)
            a = table[k] * (rng.standard_normal(b.shape) + 1j * rng.standard_normal(b.shape))
            f = extremal_field(lat, axis, src_w, a)
            g = trace(f, 0, axis).components[0]
            best = max(best, norm_value(g, tgt, backend) / norm_value(f, src, backend))
        ratios.append(best)
    slope = float(np.polyfit(np.array(shells, float), np.log2(ratios), 1)[0])
    return {"direction": direction, "source": src.as_dict(), "target": tgt.as_dict(),
            "shells": list(shells), "ratios": ratios, "slope": slope,
            "bounded": slope <= 0.05}


def closed_form_ratio(direction: str, s1: float, s2: float, eta: tuple, eps=(0.0, 0.0),
                      normal: int = 128) -> float:
    """Single-boundary-frequency trace ratio for the extremal profile (p = 2):
    ``W_t(eta) * sqrt(sum_tau w(eta, tau)^-2)``."""
    tau = np.fft.fftfreq(normal, 1.0 / normal)
    e1, e2 = eps
    eta = np.asarray(eta, dtype=float)
    full = 1.0 + np.sum(eta ** 2) + tau ** 2
    if direction == "tangential":
        # boundary (eta1 | eta2): factor 1 = (tau, eta1), factor 2 = eta2
        f2 = 1.0 + eta[-1] ** 2
        w2 = full ** s1 * f2 ** s2
        wt = (1.0 + np.sum(eta ** 2)) ** ((s1 - 0.5 - e1) / 2) * f2 ** ((s2 - e2) / 2)
    else:
        # boundary (eta1 | eta2): factor 1 = eta1, factor 2 = (eta2, tau)
        f2 = 1.0 + eta[-1] ** 2 + tau ** 2
        w2 = full ** s1 * f2 ** s2
        wt = (1.0 + np.sum(eta ** 2)) ** ((s1 - e1) / 2) * (1.0 + eta[-1] ** 2) ** ((s2 - 0.5 - e2) / 2)
    return float(wt * np.sqrt(np.sum(1.0 / w2)))
