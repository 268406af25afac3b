"""Dyadic Littlewood-Paley partitions of unity and block decompositions.

The bump ``phi_0(xi) = g(|xi|)`` uses the transition

    g(t) = chi(2 - t) / (chi(2 - t) + chi(t - 1)),  chi(u) = exp(-1/u) (u > 0)

which is 1 on ``[0, 1]``, 0 on ``[2, inf)`` and smooth in between. Higher
pieces are ``phi_j(xi) = g(2^-j |xi|) - g(2^{1-j} |xi|)``, so partial sums
telescope to ``g(2^-J |xi|)`` and the partition is exact on the lattice once
``2^-J max|xi| <= 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .grid import DomainError, Field, Lattice, Scope, StructureError, apply_multiplier, dft

SCOPES: tuple[Scope, ...] = ("full", "factor1", "factor2")


def _chi(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


@dataclass(frozen=True)
class BumpProfile:
    """Transition ``g: [0, inf) -> [0, 1]`` defining ``phi_0(xi) = g(|xi|)``."""

    inner: float = 1.0
    outer: float = 2.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        a = _chi(self.outer - t)
        b = _chi(t - self.inner)
        # a + b > 0 everywhere since at least one argument is positive
        return a / (a + b)


def make_profile() -> BumpProfile:
    return BumpProfile()


@dataclass(frozen=True)
class LPPartition:
    profile: BumpProfile
    jmax: int
    scope: Scope

    def phi(self, j: int, magnitude):
        """``phi_j`` evaluated at frequency magnitude(s) ``|xi|``."""
        if j < 0:
            raise DomainError(f"dyadic index must be >= 0, got {j}")
        r = np.asarray(magnitude, dtype=float)
        g = self.profile
        if j == 0:
            return g(r)
        return g(r / 2.0 ** j) - g(r / 2.0 ** (j - 1))

    def low(self, i: int, magnitude):
        """``sum_{k<=i} phi_k = phi_0(2^-i .)``; zero for ``i < 0``."""
        r = np.asarray(magnitude, dtype=float)
        if i < 0:
            return np.zeros_like(r)
        return self.profile(r / 2.0 ** i)

    def support(self, j: int) -> tuple[float, float]:
        if j == 0:
            return 0.0, self.profile.outer
        return 2.0 ** (j - 1), 2.0 ** (j + 1)


def jmax_for(max_freq: float) -> int:
    """``ceil(log2(max|xi|)) + 1``; 0 for an empty scope."""
    if max_freq == 0.0:
        return 0
    return max(int(math.ceil(math.log2(max_freq))) + 1, 1)


def partition(lattice: Lattice, scope: Scope = "full") -> LPPartition:
    if scope not in SCOPES:
        raise DomainError(f"unknown scope {scope!r}")
    return LPPartition(make_profile(), jmax_for(lattice.max_freq(scope)), scope)


def phi(part: LPPartition, j: int, xi: Sequence[float], lattice: Lattice | None = None) -> float:
    """``phi_j`` at a single frequency point.

    For factor scopes the point is projected onto the factor's coordinates,
    which needs the lattice split (pass ``lattice``); a point given with
    only the factor's coordinates is accepted as is.
    """
    xi = np.asarray(xi, dtype=float)
    if lattice is not None and part.scope != "full":
        if xi.size != lattice.ndim:
            raise StructureError("frequency point has wrong dimension")
        xi = xi[list(lattice.scope_axes(part.scope))]
    return float(part.phi(j, np.linalg.norm(xi)))


@lru_cache(maxsize=128)
def _phi_table(lattice: Lattice, scope: Scope) -> tuple[np.ndarray, ...]:
    part = partition(lattice, scope)
    r = lattice.freq_norm(scope)
    out = []
    for j in range(part.jmax + 1):
        w = part.phi(j, r)
        w.setflags(write=False)
        out.append(w)
    return tuple(out)


def phi_table(lattice: Lattice, scope: Scope = "full") -> tuple[np.ndarray, ...]:
    """``phi_j`` on the whole frequency lattice for ``j = 0..jmax``."""
    return _phi_table(lattice, scope)


def low_pass(f: Field, i: int, scope: Scope = "factor1") -> Field:
    """``Phi_i f = F^-1 phi_0(2^-i xi_scope) F f``."""
    part = partition(f.lattice, scope)
    return apply_multiplier(f, part.low(i, f.lattice.freq_norm(scope)))


@dataclass(frozen=True, eq=False)
class DyadicBlock:
    indices: tuple[int, ...]
    field: Field
    weight: np.ndarray  # spectral window of the block, FFT order

    def energy(self) -> float:
        return self.field.l2() ** 2

    def leakage(self) -> float:
        """Fraction of spectral energy outside the block's window support."""
        c = np.abs(dft(self.field).coefficients) ** 2
        total = c.sum()
        if total == 0.0:
            return 0.0
        return float(c[self.weight == 0.0].sum() / total)


def radial_blocks(f: Field, scope: Scope = "full") -> list[DyadicBlock]:
    """``f_j = F^-1 phi_j F f`` for ``j = 0..jmax``."""
    table = phi_table(f.lattice, scope)
    c = np.fft.ifftn(f.samples)
    return [DyadicBlock((j,), Field(f.lattice, np.fft.fftn(w * c)), w)
            for j, w in enumerate(table)]


def product_blocks(f: Field) -> list[list[DyadicBlock]]:
    """``f_{i,j} = F^-1 phi^(1)_i phi^(2)_j F f`` as a nested list ``[i][j]``."""
    lat = f.lattice
    if lat.n1 == 0 or lat.n2 == 0:
        raise StructureError("product decomposition needs n1 >= 1 and n2 >= 1")
    t1 = phi_table(lat, "factor1")
    t2 = phi_table(lat, "factor2")
    c = np.fft.ifftn(f.samples)
    out = []
    for i, w1 in enumerate(t1):
        row = []
        for j, w2 in enumerate(t2):
            w = w1 * w2
            row.append(DyadicBlock((i, j), Field(lat, np.fft.fftn(w * c)), w))
        out.append(row)
    return out


def partition_defect(lattice: Lattice, scope: Scope = "full") -> float:
    """``max_xi |sum_j phi_j(xi) - 1|`` over the frequency lattice."""
    total = np.sum(np.stack(phi_table(lattice, scope)), axis=0)
    return float(np.max(np.abs(total - 1.0)))


def product_support_leakage(f: Field, g: Field, i: int, i2: int) -> float:
    """Spectral leakage of ``(phi_i f)(phi_{i2} g)`` outside the factor-1 corridor
    ``2^{i-2} <= |xi^(1)| <= 2^{i+2}``, as a fraction of its energy.

    Requires ``i2 <= i - 3`` and a lattice large enough that the product does
    not alias in the first factor.
    """
    lat = f.lattice
    if i2 > i - 3:
        raise DomainError("support lemma needs i2 <= i - 3")
    n_min = min(lat.sizes[a] for a in lat.axes1)
    if 2.0 ** (i + 1) + 2.0 ** (i2 + 1) >= n_min / 2:
        raise DomainError("product would alias on this lattice")
    t1 = phi_table(lat, "factor1")
    fi = apply_multiplier(f, t1[i])
    gi = apply_multiplier(g, t1[i2])
    c = np.abs(dft(fi * gi).coefficients) ** 2
    r = lat.freq_norm("factor1")
    inside = (r >= 2.0 ** (i - 2)) & (r <= 2.0 ** (i + 2))
    total = c.sum()
    return 0.0 if total == 0.0 else float(c[~inside].sum() / total)


def block_energy_rows(f: Field, product: bool = False) -> list[dict]:
    """Per-block energy table used by the ``decompose`` command."""
    rows = []
    if product:
        for row in product_blocks(f):
            for b in row:
                rows.append({"i": b.indices[0], "j": b.indices[1],
                             "energy": b.energy(), "support_leakage": b.leakage()})
    else:
        for b in radial_blocks(f):
            rows.append({"j": b.indices[0], "energy": b.energy(),
                         "support_leakage": b.leakage()})
    return rows
