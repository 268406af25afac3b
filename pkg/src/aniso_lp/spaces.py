"""Discrete norms for isotropic, product-type and anisotropic spaces.

Two independent backends:

* ``lp``: dyadic blocks, ``l^q``-then-``L^p`` for F-type families and
  ``L^p``-then-``l^q`` for B-type families, with ``q = 2`` resp. ``q = p``.
* ``multiplier`` (``p = 2`` only): a single weighted Plancherel sum.

``L^p`` is taken with respect to the normalized counting measure, so
``||1||_{L^p} = 1`` at every resolution.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .grid import DomainError, Field, StructureError, bessel_potential, dft
from .lp import phi_table, product_blocks, radial_blocks

FAMILIES = ("H", "B", "Fprod", "Bprod", "Haniso", "Baniso")
F_TYPE = {"H", "Fprod", "Haniso"}
ANISO = {"Haniso", "Baniso"}
PRODUCT = {"Fprod", "Bprod"}
BACKENDS = ("lp", "multiplier")


class UnsupportedConfiguration(ValueError):
    pass


@dataclass(frozen=True)
class SpaceSpec:
    family: str
    s1: float
    s2: float = 0.0
    p: float = 2.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if not 1.0 < self.p < np.inf:
            raise DomainError(f"integrability p={self.p} outside (1, inf)")
        if self.family in ("H", "B") and self.s2 != 0.0:
            raise DomainError("isotropic families carry s2 = 0")

    @property
    def q(self) -> float:
        return 2.0 if self.family in F_TYPE else self.p

    @classmethod
    def parse(cls, text: str) -> "SpaceSpec":
        """``family:s1:s2:p``, e.g. ``Haniso:1:0.5:2``; trailing parts optional."""
        parts = text.split(":")
        fam = parts[0]
        nums = [float(eval_fraction(x)) for x in parts[1:]]
        s1 = nums[0] if nums else 0.0
        s2 = nums[1] if len(nums) > 1 else 0.0
        p = nums[2] if len(nums) > 2 else 2.0
        return cls(fam, s1, s2, p)

    def shifted(self, d1: float, d2: float) -> "SpaceSpec":
        """Same family with smoothness lowered by ``(d1, d2)``."""
        fam = self.family
        if fam in ("H", "B") and d2 != 0.0:
            fam = "Haniso" if fam == "H" else "Baniso"
        return replace(self, family=fam, s1=self.s1 - d1, s2=self.s2 - d2)

    def as_dict(self) -> dict:
        return {"family": self.family, "s1": self.s1, "s2": self.s2, "p": self.p, "q": self.q}


def eval_fraction(text: str) -> float:
    if "/" in text:
        a, b = text.split("/")
        return float(a) / float(b)
    return float(text)


@dataclass(frozen=True)
class NormReport:
    value: float
    backend: str
    spec: SpaceSpec
    blocks_used: int

    def as_dict(self) -> dict:
        return {"value": self.value, "backend": self.backend,
                "spec": self.spec.as_dict(), "blocks_used": self.blocks_used}


def lp_mean(values: np.ndarray, p: float) -> float:
    return float(np.mean(np.abs(values) ** p) ** (1.0 / p))


def multiplier_weight(lattice, spec: SpaceSpec) -> np.ndarray:
    if spec.family in PRODUCT:
        return lattice.bracket("factor1") ** spec.s1 * lattice.bracket("factor2") ** spec.s2
    w = lattice.bracket("full") ** spec.s1
    if spec.s2 != 0.0:
        w = w * lattice.bracket("factor2") ** spec.s2
    return w


def _multiplier_norm(f: Field, spec: SpaceSpec) -> float:
    c = dft(f).coefficients
    w = multiplier_weight(f.lattice, spec)
    return float(np.sqrt(np.sum((w * np.abs(c)) ** 2)))


def _radial_lp(f: Field, s: float, p: float, f_type: bool) -> tuple[float, int]:
    blocks = radial_blocks(f)
    if f_type:
        sq = np.zeros(f.lattice.shape)
        for b in blocks:
            sq = sq + 4.0 ** (s * b.indices[0]) * np.abs(b.field.samples) ** 2
        return lp_mean(np.sqrt(sq), p), len(blocks)
    acc = np.array([2.0 ** (s * p * b.indices[0]) * lp_mean(b.field.samples, p) ** p
                    for b in blocks])
    return float(np.sum(acc) ** (1.0 / p)), len(blocks)


def _product_lp(f: Field, s: float, t: float, p: float, f_type: bool) -> tuple[float, int]:
    grid = product_blocks(f)
    blocks = [b for row in grid for b in row]
    if f_type:
        sq = np.zeros(f.lattice.shape)
        for b in blocks:
            i, j = b.indices
            sq = sq + 4.0 ** (s * i + t * j) * np.abs(b.field.samples) ** 2
        return lp_mean(np.sqrt(sq), p), len(blocks)
    acc = np.array([2.0 ** ((s * b.indices[0] + t * b.indices[1]) * p)
                    * lp_mean(b.field.samples, p) ** p for b in blocks])
    return float(np.sum(acc) ** (1.0 / p)), len(blocks)


def norm(f: Field, spec: SpaceSpec, backend: str = "multiplier") -> NormReport:
    if backend not in BACKENDS:
        raise DomainError(f"unknown backend {backend!r}")
    if spec.family in PRODUCT and (f.lattice.n1 == 0 or f.lattice.n2 == 0):
        raise StructureError("product-type norms need a nondegenerate factor split")
    if backend == "multiplier":
        if spec.p != 2.0:
            raise UnsupportedConfiguration("multiplier backend is only available at p = 2")
        return NormReport(_multiplier_norm(f, spec), backend, spec, 0)

    f_type = spec.family in F_TYPE
    if spec.family in PRODUCT:
        value, used = _product_lp(f, spec.s1, spec.s2, spec.p, f_type)
    else:
        g = bessel_potential(f, spec.s2, "factor2") if spec.family in ANISO and spec.s2 else f
        value, used = _radial_lp(g, spec.s1, spec.p, f_type)
    return NormReport(value, backend, spec, used)


def norm_value(f: Field, spec: SpaceSpec, backend: str = "multiplier") -> float:
    return norm(f, spec, backend).value


def default_backend(spec: SpaceSpec) -> str:
    return "multiplier" if spec.p == 2.0 else "lp"


# ---------------------------------------------------------------------------
# mixed (vector-valued) norms


def _bessel_axes(samples: np.ndarray, lattice, axes, s: float) -> np.ndarray:
    if s == 0.0 or not axes:
        return samples
    freqs = lattice.frequencies()
    sq = 0.0
    for a in axes:
        sq = sq + freqs[a].astype(float) ** 2
    w = (1.0 + sq) ** (s / 2.0)
    return np.fft.fftn(w * np.fft.ifftn(samples, axes=axes), axes=axes)


def mixed_norm(f: Field, outer_factor: int, outer: str, inner: str,
               s_outer: float = 0.0, s_inner: float = 0.0, p: float = 2.0) -> float:
    """Iterated norm ``X(T^{n_outer}, Y(T^{n_inner}))``.

    ``X``, ``Y`` are ``Lp`` or ``Hs``; ``H^{s,p}`` is realized as
    ``||J^s u||_{L^p}``, with ``J^s`` acting on the relevant variables only
    (the vector-valued definition). At ``p = 2`` this is the weighted
    Plancherel sum.
    """
    lat = f.lattice
    if lat.n1 == 0 or lat.n2 == 0:
        raise StructureError("mixed norms need a nondegenerate factor split")
    if outer not in ("Lp", "Hs") or inner not in ("Lp", "Hs"):
        raise DomainError("outer/inner must be 'Lp' or 'Hs'")
    if not 1.0 < p < np.inf:
        raise DomainError("p outside (1, inf)")
    out_axes = lat.factor_axes(outer_factor)
    in_axes = lat.factor_axes(3 - outer_factor)
    g = f.samples
    if outer == "Hs":
        g = _bessel_axes(g, lat, out_axes, s_outer)
    if inner == "Hs":
        g = _bessel_axes(g, lat, in_axes, s_inner)
    profile = np.mean(np.abs(g) ** p, axis=in_axes) ** (1.0 / p)
    return float(np.mean(profile ** p) ** (1.0 / p))


# ---------------------------------------------------------------------------
# probes


def overlap_factor(lattice) -> np.ndarray:
    """``sum_{i,j} (phi^(1)_i phi^(2)_j)^2`` on the lattice."""
    a = np.sum(np.stack(phi_table(lattice, "factor1")) ** 2, axis=0)
    b = np.sum(np.stack(phi_table(lattice, "factor2")) ** 2, axis=0)
    return a * b


def prod_lp_ratios(f: Field, p: float) -> dict:
    """``||f||_{F^{0,0}_{p,2}} / ||f||_{L^p}`` and, at p=2, the overlap-corrected ratio."""
    num = norm_value(f, SpaceSpec("Fprod", 0.0, 0.0, p), "lp")
    den = lp_mean(f.samples, p)
    out = {"ratio": num / den,
           "radial_ratio": norm_value(f, SpaceSpec("H", 0.0, 0.0, p), "lp") / den}
    if p == 2.0:
        c2 = np.abs(dft(f).coefficients) ** 2
        overlap = np.sqrt(np.sum(overlap_factor(f.lattice) * c2) / np.sum(c2))
        out["overlap"] = float(overlap)
        out["corrected_ratio"] = out["ratio"] / float(overlap)
    return out


def prodLP_equivalence_probe(p: float, trials: int, seed: int, size: int,
                             n1: int = 1, n2: int = 1) -> dict:
    """Ratio statistics of the product square function against ``L^p``."""
    from .grid import Lattice
    from .sampling import mixed_fields

    lat = Lattice.square(size, n1, n2)
    rows = [prod_lp_ratios(f, p) for f in mixed_fields(lat, seed, trials, stream=size)]
    ratios = np.array([r["ratio"] for r in rows])
    out = {"p": p, "size": size, "trials": trials,
           "sup": float(ratios.max()), "inf": float(ratios.min()),
           "band": float(ratios.max() / ratios.min())}
    if p == 2.0:
        corr = np.array([r["corrected_ratio"] for r in rows])
        out["max_corrected_defect"] = float(np.max(np.abs(corr - 1.0)))
    return out


def lift_probe(f: Field, s1: float, s2: float, s1p: float, s2p: float, p: float = 2.0,
               family: str = "Haniso", backend: str | None = None) -> float:
    """``||J^{s1'} J_(2)^{s2'} f||_{A^{(s1-s1', s2-s2')}} / ||f||_{A^{(s1,s2)}}``."""
    src = SpaceSpec(family, s1, s2, p)
    backend = backend or default_backend(src)
    g = bessel_potential(bessel_potential(f, s1p, "full"), s2p, "factor2")
    return norm_value(g, src.shifted(s1p, s2p), backend) / norm_value(f, src, backend)


def equiv_norm_probe(f: Field, s1: float, s2: float, p: float = 2.0,
                     family: str = "H", backend: str | None = None) -> dict:
    """Ratios ``r1`` (isotropic + lifted norm) and ``r2`` (mixed-norm intersection)."""
    if s2 < 0:
        raise DomainError("equivalence probe needs s2 >= 0")
    aniso = "Haniso" if family == "H" else "Baniso"
    backend = backend or default_backend(SpaceSpec(family, s1, 0.0, p))
    base = norm_value(f, SpaceSpec(aniso, s1, s2, p), backend)
    iso = norm_value(f, SpaceSpec(family, s1, 0.0, p), backend)
    lifted = norm_value(bessel_potential(f, s2, "factor2"), SpaceSpec(family, s1, 0.0, p), backend)
    out = {"r1": (iso + lifted) / base}
    if p == 2.0 and family == "H":
        # L^2(T^{n1}, H^{s1+s2}(T^{n2})) + H^{s1}(T^{n1}, H^{s2}(T^{n2}))
        a = mixed_norm(f, 1, "Lp", "Hs", 0.0, s1 + s2, 2.0)
        b = mixed_norm(f, 1, "Hs", "Hs", s1, s2, 2.0)
        out["r2"] = (a + b) / base
    return out


def interpolated_spec(spec0: SpaceSpec, spec1: SpaceSpec, theta: float) -> SpaceSpec:
    return replace(spec0, s1=(1 - theta) * spec0.s1 + theta * spec1.s1,
                   s2=(1 - theta) * spec0.s2 + theta * spec1.s2)


def interp_inequality_check(f: Field, spec0: SpaceSpec, spec1: SpaceSpec, theta: float) -> float:
    """``||f||_theta - ||f||_0^{1-theta} ||f||_1^theta`` (non-positive up to rounding)."""
    if not 0.0 < theta < 1.0:
        raise DomainError("theta must lie in (0, 1)")
    if spec0.p != 2.0 or spec1.p != 2.0 or spec0.family != spec1.family:
        raise DomainError("interpolation check runs at p = 2 within one family")
    if spec0.s1 > spec1.s1 or spec0.s2 > spec1.s2:
        raise DomainError("endpoint smoothness must be ordered componentwise")
    n0 = norm_value(f, spec0)
    n1 = norm_value(f, spec1)
    nt = norm_value(f, interpolated_spec(spec0, spec1, theta))
    return nt - n0 ** (1 - theta) * n1 ** theta


def backend_ratios(fields, spec: SpaceSpec) -> np.ndarray:
    """LP-backend over multiplier-backend values for each field (p = 2)."""
    return np.array([norm_value(f, spec, "lp") / norm_value(f, spec, "multiplier")
                     for f in fields])
