"""Product Littlewood-Paley splitting of pointwise products.

With ``f_{i,j} = phi_i(xi^(1)) psi_j(xi^(2)) f`` the product expands as

    f g = sum_{i, i', j, j'} f_{i,j} g_{i',j'}

and each index tuple is assigned to exactly one case by comparing ``j`` with
``j'``, then ``i`` with ``i'`` (and with ``j``). Index relations::

    GG:  i >= i' + 3      SIM: |i - i'| < 3      LL:  i <= i' - 3

which partition all pairs. Case table (group by the ``j`` relation):

    j GG j'   C1a  i <= j-3 and i' <= j-3
              C1b  i GG i', i > j-3
              C1c  i SIM i', and not C1a      (includes i <= j-3 < i')
              C1d  i LL i', i' > j-3
    j SIM j'  C2a / C2b / C2c  by i GG / SIM / LL i'
    j LL j'   C3
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .grid import DomainError, Field, Lattice, StructureError
from .lp import phi_table, product_blocks
from .sampling import generator, smooth_field
from .spaces import SpaceSpec, norm_value


class FreqRelation(enum.Enum):
    LL = "LL"
    SIM = "SIM"
    GG = "GG"


CASES = ("C1a", "C1b", "C1c", "C1d", "C2a", "C2b", "C2c", "C3")

# factor whose dyadic content dominates in each easy case
DOMINANT = {"C1a": "f", "C1b": "f", "C1c": "f", "C2a": "f", "C2b": "f", "C2c": "g"}


def classify(i: int, i2: int) -> FreqRelation:
    if i < 0 or i2 < 0:
        raise DomainError("dyadic indices must be non-negative")
    if i <= i2 - 3:
        return FreqRelation.LL
    if i >= i2 + 3:
        return FreqRelation.GG
    return FreqRelation.SIM


def case_label(i: int, i2: int, j: int, j2: int) -> str:
    """Case of the term ``f_{i,j} g_{i2,j2}``."""
    rj = classify(j, j2)
    ri = classify(i, i2)
    if rj is FreqRelation.GG:
        if i <= j - 3 and i2 <= j - 3:
            return "C1a"
        if ri is FreqRelation.GG:
            return "C1b"
        if ri is FreqRelation.LL:
            return "C1d"
        return "C1c"
    if rj is FreqRelation.SIM:
        return {FreqRelation.GG: "C2a", FreqRelation.SIM: "C2b", FreqRelation.LL: "C2c"}[ri]
    return "C3"


def literal_cases(i: int, i2: int, j: int, j2: int) -> list[str]:
    """Every case whose defining conditions hold literally (no tie-breaking)."""
    rj, ri = classify(j, j2), classify(i, i2)
    hits = []
    if rj is FreqRelation.GG:
        if i <= j - 3 and i2 <= j - 3:
            hits.append("C1a")
        if ri is FreqRelation.GG and i > j - 3:
            hits.append("C1b")
        if ri is FreqRelation.SIM and i > j - 3:
            hits.append("C1c")
        if ri is FreqRelation.LL and i2 > j - 3:
            hits.append("C1d")
    elif rj is FreqRelation.SIM:
        hits.append({FreqRelation.GG: "C2a", FreqRelation.SIM: "C2b", FreqRelation.LL: "C2c"}[ri])
    else:
        hits.append("C3")
    return hits


def case_partition(f: Field, g: Field) -> dict[str, Field]:
    """Case fields; their sum is ``f * g`` up to rounding."""
    if f.lattice != g.lattice:
        raise StructureError("fields live on different lattices")
    fb = product_blocks(f)
    gb = product_blocks(g)
    lat = f.lattice
    acc = {c: np.zeros(lat.shape, dtype=complex) for c in CASES}
    for i, row in enumerate(fb):
        for j, bf in enumerate(row):
            for i2, grow in enumerate(gb):
                for j2, bg in enumerate(grow):
                    acc[case_label(i, i2, j, j2)] += bf.field.samples * bg.field.samples
    return {c: Field(lat, v) for c, v in acc.items()}


def _filter(f: Field, w1, w2) -> Field:
    return Field(f.lattice, np.fft.fftn(w1 * w2 * np.fft.ifftn(f.samples)))


def _low(lat: Lattice, i: int, scope: str) -> np.ndarray:
    table = phi_table(lat, scope)
    if i < 0:
        return np.zeros(lat.shape)
    return np.sum(np.stack(table[: i + 1]), axis=0)


def case_1a_regrouped(f: Field, g: Field) -> Field:
    """``sum_j (Phi_{j-3} psi_j f)(Phi_{j-3} Psi_{j-3} g)``."""
    lat = f.lattice
    t2 = phi_table(lat, "factor2")
    out = np.zeros(lat.shape, dtype=complex)
    for j in range(3, len(t2)):
        lo1 = _low(lat, j - 3, "factor1")
        a = _filter(f, lo1, t2[j])
        b = _filter(g, lo1, _low(lat, j - 3, "factor2"))
        out += a.samples * b.samples
    return Field(lat, out)


def case_1d_regrouped(f: Field, g: Field) -> Field:
    """``sum_{i' > j-3} (Phi_{i'-3} psi_j f)(phi_{i'} Psi_{j-3} g)``."""
    lat = f.lattice
    t1 = phi_table(lat, "factor1")
    t2 = phi_table(lat, "factor2")
    out = np.zeros(lat.shape, dtype=complex)
    for j in range(3, len(t2)):
        for i2 in range(max(j - 2, 3), len(t1)):
            a = _filter(f, _low(lat, i2 - 3, "factor1"), t2[j])
            b = _filter(g, t1[i2], _low(lat, j - 3, "factor2"))
            out += a.samples * b.samples
    return Field(lat, out)


def sup_norm(f: Field) -> float:
    return f.max_abs()


def aniso_norm(f: Field, s1: float, s2: float) -> float:
    return norm_value(f, SpaceSpec("Haniso", s1, s2, 2.0))


def dominance_ratios(f: Field, g: Field, s1: float, s2: float) -> dict[str, float]:
    """``||case||_H / (||dominant||_H ||other||_inf)`` for each easy case."""
    cases = case_partition(f, g)
    nf, ng = aniso_norm(f, s1, s2), aniso_norm(g, s1, s2)
    sf, sg = sup_norm(f), sup_norm(g)
    out = {}
    for c, who in DOMINANT.items():
        den = nf * sg if who == "f" else ng * sf
        out[c] = aniso_norm(cases[c], s1, s2) / den if den > 0 else 0.0
    return out


@dataclass(frozen=True)
class MultParams:
    s1: float
    s2p: float
    s2pp: float
    s2: float
    n1: int = 1
    n2: int = 1

    @property
    def threshold(self) -> float:
        return self.s1 + self.s2p + self.s2pp - (self.n1 + self.n2) / 2.0

    def violations(self) -> list[str]:
        out = []
        if not self.s1 > self.n1 / 2.0:
            out.append("s1 <= n1/2")
        if self.s2p < 0 or self.s2pp < 0:
            out.append("negative s2' or s2''")
        if self.s2 > min(self.s2p, self.s2pp):
            out.append("s2 > min(s2', s2'')")
        if not self.s2 < self.threshold:
            out.append("s2 >= s1 + s2' + s2'' - (n1+n2)/2")
        return out


def mult_ratio(f: Field, g: Field, prm: MultParams) -> float:
    num = aniso_norm(f * g, prm.s1, max(prm.s2, 0.0))
    den = (aniso_norm(f, prm.s1, prm.s2p) + sup_norm(f)) * (aniso_norm(g, prm.s1, prm.s2pp) + sup_norm(g))
    return num / den


def mult_bound_probe(prm: MultParams, trials: int, seed: int, sizes=(32, 64)) -> dict:
    """Sup of the multiplication ratio over smooth seeded pairs, per size.

    The spectral decay of the probes exceeds the largest Sobolev order in
    play by ``n/2 + 1`` so every probe norm converges as the grid refines.
    """
    rows = []
    for size in sizes:
        lat = Lattice.square(size, prm.n1, prm.n2)
        decay = prm.s1 + max(prm.s2p, prm.s2pp, prm.s2, 0.0) + lat.ndim / 2 + 1
        best = 0.0
        for t in range(trials):
            f = smooth_field(lat, generator(seed, size, t, 0), decay=decay)
            g = smooth_field(lat, generator(seed, size, t, 1), decay=decay)
            best = max(best, mult_ratio(f, g, prm))
        rows.append({"size": size, "sup_ratio": best})
    sups = np.array([r["sup_ratio"] for r in rows])
    return {"rows": rows, "drift": float(sups.max() / sups.min()),
            "violations": prm.violations()}


# ---------------------------------------------------------------------------
# bump sharpness


def _extent(a: int, b: int) -> int:
    """Largest frequency magnitude per axis in the product of shells ``a`` and ``b``."""
    return 2 ** (a + 1) + 2 ** (b + 1)


def bump_lattice(ext1: int, ext2: int, n1: int = 1, n2: int = 1) -> Lattice:
    """Smallest power-of-two lattice on which products with per-factor
    frequency extents ``ext1``, ``ext2`` do not alias."""
    def size(ext):
        return max(16, 1 << (2 * ext).bit_length())

    return Lattice(n1, n2, (size(ext1),) * n1 + (size(ext2),) * n2)


def product_bump(lat: Lattice, i: int, j: int) -> Field:
    """Field whose coefficients are ``phi_i(xi^(1)) psi_j(xi^(2))``."""
    t1 = phi_table(lat, "factor1")
    t2 = phi_table(lat, "factor2")
    if i >= len(t1) or j >= len(t2):
        raise DomainError("bump index exceeds the lattice")
    return Field(lat, np.fft.fftn(t1[i] * t2[j]))


def predicted_exponents(i, j, i2, j2, s1, s2p, s2pp, s2, n1=1, n2=1) -> dict:
    """log2 of the squared norms up to constants, for Case 1(d) orderings."""
    return {
        "f": 2 * s1 * max(i, j) + 2 * s2p * j + i * n1 + j * n2,
        "g": 2 * s1 * i2 + 2 * s2pp * j2 + i2 * n1 + j2 * n2,
        "fg": 2 * s1 * i2 + 2 * s2 * j + (2 * i + i2) * n1 + (2 * j2 + j) * n2,
    }


def sharpness_scan(i, j, i2, j2, s1, s2p, s2pp, s2, n1=1, n2=1, lattice=None) -> dict:
    """Measured ``log2`` squared norms of the bump pair against prediction."""
    if not (j2 <= j <= i2 and i <= i2):
        raise DomainError("bump indices must satisfy j' <= j <= i' and i <= i'")
    e1, e2 = _extent(i, i2), _extent(j, j2)
    lat = lattice or bump_lattice(e1, e2, n1, n2)
    for ext, axes in ((e1, lat.axes1), (e2, lat.axes2)):
        if any(2 * ext >= lat.sizes[a] for a in axes):
            raise DomainError("bump product would alias on this lattice")
    f = product_bump(lat, i, j)
    g = product_bump(lat, i2, j2)
    measured = {
        "f": 2 * math.log2(aniso_norm(f, s1, s2p)),
        "g": 2 * math.log2(aniso_norm(g, s1, s2pp)),
        "fg": 2 * math.log2(aniso_norm(f * g, s1, s2)),
    }
    return {"indices": (i, j, i2, j2), "measured": measured,
            "predicted": predicted_exponents(i, j, i2, j2, s1, s2p, s2pp, s2, n1, n2)}


def _slope(xs, ys) -> float:
    return float(np.polyfit(np.asarray(xs, float), np.asarray(ys, float), 1)[0])


def sharpness_sweep(s1=1.0, s2p=1.0, s2pp=1.0, s2=1.0, js=(4, 5, 6, 7), i=2, j2=2,
                    n1=1, n2=1) -> dict:
    """Sweep ``j`` with ``i' = j + 1``; compare measured and predicted slopes."""
    lat = bump_lattice(_extent(i, max(js) + 1), _extent(max(js), j2), n1, n2)
    rows = [sharpness_scan(i, j, j + 1, j2, s1, s2p, s2pp, s2, n1, n2, lat) for j in js]
    out = {"js": list(js), "rows": rows, "slopes": {}}
    for key in ("f", "g", "fg"):
        m = _slope(js, [r["measured"][key] for r in rows])
        p = _slope(js, [r["predicted"][key] for r in rows])
        out["slopes"][key] = {"measured": m, "predicted": p,
                              "rel_error": abs(m - p) / abs(p) if p else abs(m)}
    return out


def contrast_sweep(s1=1.0, s2p=1.0, s2pp=1.0, offset=0.2, ks=(2, 3, 4, 5), n1=1, n2=1) -> dict:
    """Diagonal sweep ``i = j' = k, j = k+1, i' = k+2`` at ``s2 = threshold + offset``.

    The log2 of ``||fg||^2 / (||f||^2 ||g||^2)`` then has predicted slope
    ``2 * offset`` in ``k``: growth above the threshold, decay below.
    """
    prm = MultParams(s1, s2p, s2pp, 0.0, n1, n2)
    s2 = prm.threshold + offset
    k = max(ks)
    lat = bump_lattice(_extent(k, k + 2), _extent(k + 1, k), n1, n2)
    logs = []
    for k in ks:
        r = sharpness_scan(k, k + 1, k + 2, k, s1, s2p, s2pp, s2, n1, n2, lat)["measured"]
        logs.append(r["fg"] - r["f"] - r["g"])
    slope = _slope(ks, logs)
    return {"s2": s2, "offset": offset, "ks": list(ks), "log_ratio": logs, "slope": slope,
            "grows": slope >= 0.2, "bounded": slope <= 0.05}
