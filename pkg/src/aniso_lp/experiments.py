"""Named experiments behind ``aniso-lp run``.

Each experiment takes a resolved config dict and returns a :class:`Report`
holding pass/fail verdicts, the measured constants and CSV rows. Defaults
reproduce the acceptance thresholds at desk scale.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import bvp, paraproduct, psdo, spaces, trace
from .grid import Lattice, StructureError
from .lp import partition_defect
from .sampling import generator, mixed_fields, smooth_field


@dataclass
class Report:
    verdicts: dict[str, bool]
    measured: dict
    rows: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())


@dataclass(frozen=True)
class Experiment:
    name: str
    func: Callable[[dict], Report]
    defaults: dict
    summary: str


REGISTRY: dict[str, Experiment] = {}


def register(name: str, summary: str, **defaults):
    def deco(func):
        REGISTRY[name] = Experiment(name, func, defaults, summary)
        return func
    return deco


def resolve(name: str, overrides: dict) -> dict:
    """Defaults of ``name`` updated by the non-``None`` entries of ``overrides``."""
    if name not in REGISTRY:
        raise KeyError(name)
    cfg = dict(REGISTRY[name].defaults)
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    if "seed" not in cfg:
        raise StructureError("a seed is required")
    sizes = cfg.get("sizes")
    if sizes is not None:
        cfg["sizes"] = [int(s) for s in sizes]
        if any(b <= a for a, b in zip(cfg["sizes"], cfg["sizes"][1:])):
            raise StructureError("sizes must be strictly ascending")
    return cfg


def run(name: str, cfg: dict) -> Report:
    return REGISTRY[name].func(cfg)


def _drift(values) -> float:
    v = np.asarray(values, float)
    return float(v.max() / v.min()) if v.min() > 0 else math.inf


# ---------------------------------------------------------------------------
# partitions and spaces


@register("partition-exactness", "max |sum_j phi_j - 1| for radial and factor partitions",
          sizes=[16, 32, 64], tol=1e-12)
def _partition_exactness(cfg: dict) -> Report:
    rows = []
    for size in cfg["sizes"]:
        lat = Lattice.square(size)
        for scope in ("full", "factor1", "factor2"):
            rows.append({"size": size, "scope": scope, "defect": partition_defect(lat, scope)})
    worst = max(r["defect"] for r in rows)
    return Report({"defect<=tol": worst <= cfg["tol"]}, {"max_defect": worst}, rows)


@register("backend-crossval", "LP against multiplier H^s norms",
          sizes=[16, 32, 64], trials=64, s=[-2, -1, 0, 1, 2], max_constant=8.0, max_drift=2.0)
def _backend_crossval(cfg: dict) -> Report:
    rows = []
    for size in cfg["sizes"]:
        fields = mixed_fields(Lattice.square(size), cfg["seed"], cfg["trials"], stream=size)
        for s in cfg["s"]:
            r = spaces.backend_ratios(fields, spaces.SpaceSpec("H", float(s)))
            rows.append({"size": size, "s": s, "sup": float(r.max()), "inf": float(r.min()),
                         "C": float(max(r.max(), 1.0 / r.min()))})
    C = max(r["C"] for r in rows)
    drift = max(_drift([r["C"] for r in rows if r["s"] == s]) for s in cfg["s"])
    return Report({"C<=max_constant": C <= cfg["max_constant"], "drift<=max_drift": drift <= cfg["max_drift"]},
                  {"C": C, "drift": drift}, rows)


@register("prod-lp", "product square function against L^p",
          sizes=[16, 32], trials=24, ps=["2", "4/3", "4"], tol=1e-10, max_band=16.0, max_drift=2.0)
def _prod_lp(cfg: dict) -> Report:
    rows = []
    for ptxt in cfg["ps"]:
        p = spaces.eval_fraction(str(ptxt))
        for size in cfg["sizes"]:
            r = spaces.prodLP_equivalence_probe(p, cfg["trials"], cfg["seed"], size)
            rows.append({"p": ptxt, "size": size, "sup": r["sup"], "inf": r["inf"], "band": r["band"],
                         "max_corrected_defect": r.get("max_corrected_defect", "")})
    defect = max(r["max_corrected_defect"] for r in rows if r["p"] == "2")
    bands = [r for r in rows if r["p"] != "2"]
    band = max(r["band"] for r in bands)
    drift = max(_drift([r["band"] for r in bands if r["p"] == p]) for p in cfg["ps"] if p != "2")
    return Report({"p2_corrected<=tol": defect <= cfg["tol"], "band<=max_band": band <= cfg["max_band"],
                   "band_drift<=max_drift": drift <= cfg["max_drift"]},
                  {"p2_corrected_defect": defect, "band": band, "band_drift": drift}, rows)


LIFTS = ((1.0, 0.5, 1.0, 0.5), (0.0, 1.0, -1.0, 0.5), (2.0, 0.0, 1.5, -1.0), (-1.0, 0.5, 0.5, 0.5))


@register("lift", "Bessel lift between anisotropic spaces", sizes=[32], trials=16,
          tol=1e-10, band=[0.25, 4.0])
def _lift(cfg: dict) -> Report:
    rows = []
    for size in cfg["sizes"]:
        fields = mixed_fields(Lattice.square(size), cfg["seed"], cfg["trials"], stream=size)
        for (s1, s2, a, b), (t, f) in itertools.product(LIFTS, enumerate(fields)):
            rows.append({"size": size, "trial": t, "s1": s1, "s2": s2, "s1p": a, "s2p": b,
                         "multiplier": spaces.lift_probe(f, s1, s2, a, b, backend="multiplier"),
                         "lp": spaces.lift_probe(f, s1, s2, a, b, backend="lp")})
    mdef = max(abs(r["multiplier"] - 1.0) for r in rows)
    lo = min(r["lp"] for r in rows)
    hi = max(r["lp"] for r in rows)
    lo_b, hi_b = cfg["band"]
    return Report({"multiplier_exact": mdef <= cfg["tol"], "lp_in_band": lo_b <= lo and hi <= hi_b},
                  {"multiplier_defect": mdef, "lp_min": lo, "lp_max": hi}, rows)


@register("interpolation", "p=2 log-convexity of anisotropic norms", size=32, trials=64,
          thetas=[0.25, 0.5, 0.75], tol=1e-12)
def _interpolation(cfg: dict) -> Report:
    lat = Lattice.square(cfg["size"])
    pairs = ((spaces.SpaceSpec("Haniso", -1.0, 0.0), spaces.SpaceSpec("Haniso", 1.0, 1.0)),
             (spaces.SpaceSpec("Haniso", 0.0, -1.0), spaces.SpaceSpec("Haniso", 2.0, 0.5)))
    rows = []
    for t, f in enumerate(mixed_fields(lat, cfg["seed"], cfg["trials"])):
        for (a, b), th in itertools.product(pairs, cfg["thetas"]):
            d = spaces.interp_inequality_check(f, a, b, th)
            rel = d / spaces.norm_value(f, spaces.interpolated_spec(a, b, th))
            rows.append({"trial": t, "s0": f"{a.s1}:{a.s2}", "s1": f"{b.s1}:{b.s2}",
                         "theta": th, "relative_defect": rel})
    worst = max(r["relative_defect"] for r in rows)
    return Report({"defect<=tol": worst <= cfg["tol"]}, {"max_relative_defect": worst}, rows)


# ---------------------------------------------------------------------------
# pseudodifferential operators


@register("psdo-boundedness", "order-0 symbols on H^{(s1,s2),2} across sizes",
          sizes=[16, 32, 64], trials=4, symbols=list(psdo.ORDER_ZERO_BUILTINS),
          specs=[[0, 0], [0, 1], [1, 0], [1, 1]], max_drift=2.0, oracle_size=16, oracle_tol=0.1)
def _psdo_boundedness(cfg: dict) -> Report:
    rows = []
    drift = 0.0
    oracle = 0.0
    for name in cfg["symbols"]:
        a = psdo.symbol_from_name(name)
        for s1, s2 in cfg["specs"]:
            spec = spaces.SpaceSpec("Haniso", float(s1), float(s2))
            sw = psdo.boundedness_sweep(a, spec, tuple(cfg["sizes"]), cfg["trials"], cfg["seed"])
            drift = max(drift, sw["drift"])
            for r in sw["rows"]:
                row = {"symbol": name, "s1": s1, "s2": s2, "size": r["size"],
                       "sup_ratio": r["sup_ratio"], "dense": ""}
                if r["size"] == cfg["oracle_size"]:
                    dense = psdo.dense_operator_norm(a, spec, r["size"])
                    row["dense"] = dense
                    oracle = max(oracle, abs(r["sup_ratio"] - dense) / dense)
                rows.append(row)
    return Report({"drift<=max_drift": drift <= cfg["max_drift"],
                   "oracle_match": oracle <= cfg["oracle_tol"]},
                  {"max_drift": drift, "max_oracle_rel_error": oracle}, rows)


@register("composition-remainder", "Op(a)Op(b) - Op(ab) on dyadic shells",
          a="mixed(one,ratio1)", b="mixed(sin1,one)", js=[2, 3, 4, 5], size=64, trials=4,
          target=-1.0, tol=0.3)
def _composition(cfg: dict) -> Report:
    a = psdo.symbol_from_name(cfg["a"])
    b = psdo.symbol_from_name(cfg["b"])
    r = psdo.remainder_slope(a, b, tuple(cfg["js"]), cfg["trials"], cfg["seed"], cfg["size"])
    rows = [{"j": j, "remainder": v} for j, v in zip(r["js"], r["r"])]
    return Report({"slope_near_target": abs(r["slope"] - cfg["target"]) <= cfg["tol"]},
                  {"slope": r["slope"]}, rows)


# ---------------------------------------------------------------------------
# paraproducts


@register("paraproduct-partition", "case split of fg and its enumeration",
          size=32, trials=64, tol=1e-10, enumerate_to=8)
def _paraproduct_partition(cfg: dict) -> Report:
    lat = Lattice.square(cfg["size"])
    rows = []
    worst = 0.0
    for t in range(cfg["trials"]):
        f = smooth_field(lat, generator(cfg["seed"], t, 0))
        g = smooth_field(lat, generator(cfg["seed"], t, 1))
        fg = f * g
        parts = paraproduct.case_partition(f, g)
        err = (sum(parts.values(), start=f * 0.0) - fg).max_abs() / fg.max_abs()
        worst = max(worst, err)
        rows.append({"trial": t, "relative_error": err})
    n = cfg["enumerate_to"] + 1
    labels = [paraproduct.case_label(*ix) for ix in itertools.product(range(n), repeat=4)]
    total = all(lab in paraproduct.CASES for lab in labels)
    return Report({"sum==fg": worst <= cfg["tol"], "assignment_total": total},
                  {"max_relative_error": worst, "tuples": len(labels)}, rows)


@register("mult-sharpness", "bump-pair norm exponents and the threshold contrast",
          s1=1.0, s2p=1.0, s2pp=1.0, s2=1.0, js=[4, 5, 6, 7], i=2, j2=2, tol=0.05, offset=0.2)
def _mult_sharpness(cfg: dict) -> Report:
    sw = paraproduct.sharpness_sweep(cfg["s1"], cfg["s2p"], cfg["s2pp"], cfg["s2"],
                                     tuple(cfg["js"]), cfg["i"], cfg["j2"])
    rows = [{"kind": "sweep", "key": k, **v} for k, v in sw["slopes"].items()]
    worst = max(v["rel_error"] for v in sw["slopes"].values())
    hi = paraproduct.contrast_sweep(cfg["s1"], cfg["s2p"], cfg["s2pp"], +cfg["offset"])
    lo = paraproduct.contrast_sweep(cfg["s1"], cfg["s2p"], cfg["s2pp"], -cfg["offset"])
    rows += [{"kind": "contrast", "key": f"{c['offset']:+g}", "measured": c["slope"],
              "predicted": 2 * c["offset"], "rel_error": ""} for c in (hi, lo)]
    return Report({"exponents_within_tol": worst <= cfg["tol"], "above_grows": hi["grows"],
                   "below_bounded": lo["bounded"]},
                  {"max_rel_error": worst, "slope_above": hi["slope"], "slope_below": lo["slope"]},
                  rows)


# ---------------------------------------------------------------------------
# traces


def _extension_defect(seed: int) -> float:
    lat, axis = Lattice(1, 1, (64, 32)), 0
    b = lat.without_axis(axis)
    g = smooth_field(b, generator(seed, 99))
    e = trace.extend(trace.boundary_data(lat, axis, [g]))
    back = trace.trace(e, 0, axis).components[0]
    return (back - g).max_abs() / g.max_abs()


@register("trace-exponents", "trace ratios at the sharp targets, p = 2",
          s1=1.0, s2=1.0, p=2.0, seeds=16, max_slope=0.05, extension_tol=1e-8)
def _trace_exponents(cfg: dict) -> Report:
    rows = []
    slopes = {}
    for d in trace.CASES:
        r = trace.trace_loss_probe(d, cfg["s1"], cfg["s2"], cfg["p"], seeds=cfg["seeds"], seed=cfg["seed"])
        slopes[d] = r["slope"]
        rows += [{"direction": d, "shell": k, "ratio": v} for k, v in zip(r["shells"], r["ratios"])]
    ext = _extension_defect(cfg["seed"])
    verdicts = {f"{d}_bounded": s <= cfg["max_slope"] for d, s in slopes.items()}
    verdicts["r0e0=id"] = ext <= cfg["extension_tol"]
    return Report(verdicts, {"slopes": slopes, "extension_defect": ext}, rows)


@register("trace-sharpness", "mixed trace with the target raised by eps",
          s1=1.0, s2=1.0, p=2.0, eps=0.2, seeds=16, min_slope=0.15)
def _trace_sharpness(cfg: dict) -> Report:
    r = trace.trace_loss_probe("mixed", cfg["s1"], cfg["s2"], cfg["p"], eps=(0.0, -cfg["eps"]),
                               seeds=cfg["seeds"], seed=cfg["seed"])
    rows = [{"shell": k, "ratio": v} for k, v in zip(r["shells"], r["ratios"])]
    return Report({"growth>=min_slope": r["slope"] >= cfg["min_slope"]}, {"slope": r["slope"]}, rows)


# ---------------------------------------------------------------------------
# boundary value problems


def calderon_defects(lat: Lattice) -> dict:
    """Per-frequency identity defects over the whole boundary lattice."""
    m = bvp.mu(lat).ravel()
    P = np.stack([bvp.calderon(x) for x in m])
    eye = np.eye(2)
    idem = float(np.max(np.abs(P @ P - P)))
    # r_1 P(a, b) = c (1, -mu) with c from the Poisson map; compare on both unit vectors
    rP = 0.0
    PPp = 0.0
    for e in eye:
        c = bvp.poisson_coefficient(m, e[0], e[1])
        rP = max(rP, float(np.max(np.abs(np.stack([c, -m * c], 1) - P @ e))))
        pe = P @ e
        c2 = bvp.poisson_coefficient(m, pe[:, 0], pe[:, 1])
        PPp = max(PPp, float(np.max(np.abs(c2 - c))))
    return {"idempotence": idem, "r1P=P+": rP, "PP+=P": PPp}


@register("bvp-identities", "Calderon/Poisson identities, solve residuals, Fredholm contrast",
          size=32, n2=1, trials=32, tol=1e-12, solve_tol=1e-10)
def _bvp_identities(cfg: dict) -> Report:
    lat = bvp.boundary_lattice(cfg["size"], cfg["n2"])
    d = calderon_defects(lat)
    rng = generator(cfg["seed"], 0)
    g0 = smooth_field(lat, rng)
    g1 = smooth_field(lat, rng)
    u = bvp.poisson(bvp.BoundaryData(g0, g1))
    d["A_poisson"] = float(np.max(np.abs(bvp.apply_A(u).evaluate(np.linspace(0, 4, 9)))))
    rows = [{"check": k, "value": v} for k, v in d.items()]
    res = 0.0
    for t in range(cfg["trials"]):
        bc = (bvp.dirichlet(), bvp.neumann(), bvp.robin(0.5))[t % 3]
        k = 1 + t % (len(bvp.phi_table(lat)) - 1)
        f, g = bvp.shell_data(lat, k, generator(cfg["seed"], 1, t))
        sol = bvp.solve_bvp(f, bc, g)
        r = max(sol.residuals.values())
        res = max(res, r)
        rows.append({"check": f"solve:{bc.name}:{t}", "value": r})
    ind = {b.name: bvp.fredholm_diagnostic(b, lat) for b in (bvp.dirichlet(), bvp.neumann(), bvp.pathological())}
    for name, dg in ind.items():
        rows.append({"check": f"indicator_min:{name}", "value": dg["indicator_min"]})
    verdicts = {f"{k}<=tol": v <= cfg["tol"] for k, v in d.items()}
    verdicts["solve_residuals<=solve_tol"] = res <= cfg["solve_tol"]
    verdicts["dirichlet_neumann_bounded_below"] = all(
        ind[n]["fredholm"] and ind[n]["indicator_min"] > 0 for n in ("dirichlet", "neumann"))
    verdicts["pathological_exact_zero"] = ind["pathological"]["indicator_max"] == 0.0
    return Report(verdicts, {**d, "max_solve_residual": res,
                             "indicator_min": {n: v["indicator_min"] for n, v in ind.items()}}, rows)


@register("bvp-fredholm", "Fredholm diagnostic of one boundary condition",
          bc="dirichlet", sizes=[16, 32, 64], n2=1)
def _bvp_fredholm(cfg: dict) -> Report:
    bc = bvp.bc_from_name(cfg["bc"])
    rows = []
    for size in cfg["sizes"]:
        dg = bvp.fredholm_diagnostic(bc, bvp.boundary_lattice(size, cfg["n2"]))
        rows.append({"size": size, "fredholm": dg["fredholm"], "indicator_min": dg["indicator_min"],
                     "indicator_min_outer": dg["indicator_min_outer"], "kernel_dim": dg["kernel_dim"]})
    all_zero = all(bvp.fredholm_diagnostic(bc, bvp.boundary_lattice(s, cfg["n2"]))["indicator_max"] == 0.0
                   for s in cfg["sizes"])
    fred = all(r["fredholm"] for r in rows)
    consistent = fred or all_zero or not any(r["fredholm"] for r in rows)
    verdict = "fredholm" if fred else "non-fredholm detected"
    return Report({"classified": consistent}, {"verdict": verdict, "identically_zero": all_zero,
                                               "kernel_dim": rows[-1]["kernel_dim"]}, rows)


@register("elliptic-estimate", "measured elliptic-estimate constants",
          bc="dirichlet", sizes=[16, 32, 64], n2=1, trials=4, specs=[[0, 0], [0, 1], [1, 0], [1, 1]],
          max_drift=2.0, lift=0.2, min_growth=0.1)
def _elliptic(cfg: dict) -> Report:
    bc = bvp.bc_from_name(cfg["bc"])
    rows = []
    drift = 0.0
    growth = math.inf
    for s1, s2 in cfg["specs"]:
        for lift in (0.0, cfg["lift"]):
            r = bvp.elliptic_constant(bc, int(s1), float(s2), cfg["trials"], cfg["seed"],
                                      tuple(cfg["sizes"]), cfg["n2"], lift)
            if lift == 0.0:
                drift = max(drift, r["drift"])
            else:
                growth = min(growth, r["shell_slope"])
            rows += [{"s1": s1, "s2": s2, "lift": lift, "size": x["size"], "C": x["C"],
                      "shell_slope": r["shell_slope"]} for x in r["rows"]]
    return Report({"drift<=max_drift": drift <= cfg["max_drift"],
                   "over_greedy_growth": growth >= cfg["min_growth"]},
                  {"max_drift": drift, "min_over_greedy_slope": growth}, rows)
