"""Discrete product torus, Fourier transforms and Bessel-potential multipliers.

Grid points along an axis of size ``N`` are ``x_a = 2*pi*a/N``. The forward
transform carries the ``e^{+i xi.x}`` sign and the ``1/Ntot`` factor::

    c(xi) = (1/Ntot) * sum_x exp(+i xi.x) f(x)
    f(x)  = sum_xi c(xi) exp(-i xi.x)

so a character ``exp(i k.x)`` has a unit coefficient sitting at ``xi = -k``.
Coefficient arrays are stored in FFT order; the signed frequency attached to
each slot is in ``{-N/2, ..., N/2-1}`` (the Nyquist slot carries ``-N/2``).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Literal, Sequence

import numpy as np

TWO_PI = 2.0 * np.pi

Scope = Literal["full", "factor1", "factor2"]


class StructureError(ValueError):
    """Shape, lattice or split mismatch."""


class DomainError(ValueError):
    """Argument outside the domain of an operation."""


@dataclass(frozen=True)
class Lattice:
    """Product sampling grid on ``T^{n1} x T^{n2}`` (period 2*pi per axis).

    Axes ``0..n1-1`` belong to the first factor, the rest to the second.
    Either factor may be empty (``n1 == 0`` or ``n2 == 0``), which is how
    boundary sub-tori are represented.
    """

    n1: int
    n2: int
    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if self.n1 < 0 or self.n2 < 0 or self.n1 + self.n2 < 1:
            raise StructureError(f"invalid factor split n1={self.n1}, n2={self.n2}")
        if len(sizes) != self.n1 + self.n2:
            raise StructureError(f"{len(sizes)} sizes given for n1+n2={self.n1 + self.n2} axes")
        for s in sizes:
            if s < 4 or s % 2:
                raise StructureError(f"axis size {s} must be even and >= 4")

    @classmethod
    def square(cls, size: int, n1: int = 1, n2: int = 1) -> "Lattice":
        return cls(n1, n2, (size,) * (n1 + n2))

    @property
    def ndim(self) -> int:
        return self.n1 + self.n2

    @property
    def shape(self) -> tuple[int, ...]:
        return self.sizes

    @property
    def total(self) -> int:
        return int(np.prod(self.sizes))

    @property
    def axes1(self) -> tuple[int, ...]:
        return tuple(range(self.n1))

    @property
    def axes2(self) -> tuple[int, ...]:
        return tuple(range(self.n1, self.ndim))

    def factor_axes(self, factor: int) -> tuple[int, ...]:
        if factor == 1:
            return self.axes1
        if factor == 2:
            return self.axes2
        raise StructureError(f"factor must be 1 or 2, got {factor}")

    def scope_axes(self, scope: Scope) -> tuple[int, ...]:
        if scope == "full":
            return tuple(range(self.ndim))
        return self.factor_axes(1 if scope == "factor1" else 2)

    def without_axis(self, axis: int) -> "Lattice":
        """Boundary lattice obtained by deleting one axis."""
        if not 0 <= axis < self.ndim:
            raise StructureError(f"axis {axis} out of range for {self.ndim}-d lattice")
        sizes = self.sizes[:axis] + self.sizes[axis + 1:]
        if axis < self.n1:
            return Lattice(self.n1 - 1, self.n2, sizes)
        return Lattice(self.n1, self.n2 - 1, sizes)

    def frequencies(self) -> tuple[np.ndarray, ...]:
        """Signed integer frequencies per axis, broadcastable, FFT order."""
        return _frequencies(self)

    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Grid coordinates per axis, broadcastable."""
        return _coordinates(self)

    def freq_norm(self, scope: Scope = "full") -> np.ndarray:
        """``|xi|`` restricted to the axes of ``scope``, full lattice shape."""
        return _freq_norm(self, scope)

    def bracket(self, scope: Scope = "full") -> np.ndarray:
        """Japanese bracket ``<xi> = (1 + |xi|^2)^{1/2}`` over ``scope``."""
        return _bracket(self, scope)

    def max_freq(self, scope: Scope = "full") -> float:
        axes = self.scope_axes(scope)
        return float(np.sqrt(sum((self.sizes[a] // 2) ** 2 for a in axes)))


@lru_cache(maxsize=64)
def _frequencies(lat: Lattice) -> tuple[np.ndarray, ...]:
    out = []
    for axis, n in enumerate(lat.sizes):
        k = np.fft.fftfreq(n, d=1.0 / n).round().astype(np.int64)
        shape = [1] * lat.ndim
        shape[axis] = n
        k = k.reshape(shape)
        k.setflags(write=False)
        out.append(k)
    return tuple(out)


@lru_cache(maxsize=64)
def _coordinates(lat: Lattice) -> tuple[np.ndarray, ...]:
    out = []
    for axis, n in enumerate(lat.sizes):
        shape = [1] * lat.ndim
        shape[axis] = n
        x = (TWO_PI * np.arange(n) / n).reshape(shape)
        x.setflags(write=False)
        out.append(x)
    return tuple(out)


@lru_cache(maxsize=128)
def _freq_norm(lat: Lattice, scope: Scope) -> np.ndarray:
    freqs = lat.frequencies()
    sq = np.zeros(lat.shape)
    for a in lat.scope_axes(scope):
        sq = sq + freqs[a].astype(float) ** 2
    out = np.sqrt(sq)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=128)
def _bracket(lat: Lattice, scope: Scope) -> np.ndarray:
    out = np.sqrt(1.0 + lat.freq_norm(scope) ** 2)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples on a lattice; immutable after construction."""

    lattice: Lattice
    samples: np.ndarray

    def __post_init__(self):
        arr = np.array(self.samples, dtype=np.complex128)
        if arr.size != self.lattice.total:
            raise StructureError(
                f"{arr.size} samples for a lattice with {self.lattice.total} points")
        arr = arr.reshape(self.lattice.shape)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @classmethod
    def from_function(cls, lattice: Lattice, func: Callable[..., np.ndarray]) -> "Field":
        vals = func(*lattice.coordinates())
        return cls(lattice, np.broadcast_to(vals, lattice.shape))

    @classmethod
    def zeros(cls, lattice: Lattice) -> "Field":
        return cls(lattice, np.zeros(lattice.shape, dtype=complex))

    def _check(self, other: "Field") -> None:
        if other.lattice != self.lattice:
            raise StructureError("fields live on different lattices")

    def __add__(self, other: "Field") -> "Field":
        self._check(other)
        return Field(self.lattice, self.samples + other.samples)

    def __sub__(self, other: "Field") -> "Field":
        self._check(other)
        return Field(self.lattice, self.samples - other.samples)

    def __mul__(self, other) -> "Field":
        if isinstance(other, Field):
            self._check(other)
            return Field(self.lattice, self.samples * other.samples)
        return Field(self.lattice, self.samples * other)

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(self.lattice, -self.samples)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def l2(self) -> float:
        """L^2 norm with respect to the normalized counting measure."""
        return float(np.sqrt(np.mean(np.abs(self.samples) ** 2)))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Fourier coefficients indexed by the frequency lattice (FFT order)."""

    lattice: Lattice
    coefficients: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coefficients, dtype=np.complex128).reshape(self.lattice.shape)
        arr.setflags(write=False)
        object.__setattr__(self, "coefficients", arr)

    def index(self, xi: Sequence[int]) -> tuple[int, ...]:
        """Array index holding the signed frequency ``xi`` (wrapped)."""
        if len(xi) != self.lattice.ndim:
            raise StructureError("frequency has wrong dimension")
        return tuple(int(k) % n for k, n in zip(xi, self.lattice.sizes))

    def at(self, xi: Sequence[int]) -> complex:
        return complex(self.coefficients[self.index(xi)])

    def energy(self) -> float:
        return float(np.sum(np.abs(self.coefficients) ** 2))


def dft(f: Field) -> Spectrum:
    """Forward transform with the ``e^{+i xi.x}`` sign and ``1/Ntot`` factor."""
    if not isinstance(f, Field):
        raise StructureError("dft expects a Field")
    # numpy's ifftn is exactly (1/Ntot) sum_x exp(+2 pi i k a / N) f
    return Spectrum(f.lattice, np.fft.ifftn(f.samples))


def idft(c: Spectrum) -> Field:
    if not isinstance(c, Spectrum):
        raise StructureError("idft expects a Spectrum")
    return Field(c.lattice, np.fft.fftn(c.coefficients))


def dft_reference(f: Field) -> Spectrum:
    """O(Ntot^2) direct summation; independent of the FFT path."""
    lat = f.lattice
    xs = [c.ravel() for c in np.meshgrid(*[TWO_PI * np.arange(n) / n for n in lat.sizes],
                                          indexing="ij")]
    ks = [k.ravel() for k in np.meshgrid(*[np.fft.fftfreq(n, 1.0 / n) for n in lat.sizes],
                                          indexing="ij")]
    phase = sum(np.outer(k, x) for k, x in zip(ks, xs))
    coef = np.exp(1j * phase) @ f.samples.ravel() / lat.total
    return Spectrum(lat, coef.reshape(lat.shape))


def mode(lattice: Lattice, k: Sequence[int], amplitude: complex = 1.0) -> Field:
    """The character ``amplitude * exp(i k.x)``."""
    if len(k) != lattice.ndim:
        raise StructureError("mode frequency has wrong dimension")
    xs = lattice.coordinates()
    phase = sum(int(kk) * x for kk, x in zip(k, xs))
    return Field(lattice, amplitude * np.broadcast_to(np.exp(1j * phase), lattice.shape))


def apply_multiplier(f: Field, w) -> Field:
    """Multiply the spectrum of ``f`` pointwise by ``w``.

    ``w`` is an array broadcastable to the lattice shape (FFT order) or a
    callable ``w(lattice) -> array``.
    """
    if callable(w):
        w = w(f.lattice)
    w = np.asarray(w)
    if not np.all(np.isfinite(w)):
        raise DomainError("multiplier has non-finite weights")
    try:
        w = np.broadcast_to(w, f.lattice.shape)
    except ValueError as exc:
        raise StructureError("multiplier not defined on the full frequency lattice") from exc
    return Field(f.lattice, np.fft.fftn(w * np.fft.ifftn(f.samples)))


def bessel_weight(lattice: Lattice, s: float, mode: str = "full") -> np.ndarray:
    if mode == "full":
        return lattice.bracket("full") ** s
    if mode == "factor2":
        return lattice.bracket("factor2") ** s
    if mode == "factor1":
        return lattice.bracket("factor1") ** s
    raise DomainError(f"unknown Bessel mode {mode!r}")


def bessel_potential(f: Field, s: float, mode: str = "full") -> Field:
    """``J^s`` (mode ``full``) or ``J_(2)^s`` (mode ``factor2``)."""
    if not np.isfinite(s):
        raise DomainError("Bessel order must be finite")
    return apply_multiplier(f, bessel_weight(f.lattice, s, mode))


# ---------------------------------------------------------------------------
# .fld files

_FLD_MAGIC = "FLD v1"


def fld_bytes(f: Field) -> bytes:
    lat = f.lattice
    header = f"{_FLD_MAGIC} n1={lat.n1} n2={lat.n2} sizes={','.join(map(str, lat.sizes))}\n"
    return header.encode("ascii") + np.ascontiguousarray(f.samples, dtype="<c16").tobytes()


def write_fld(path, f: Field) -> None:
    with open(path, "wb") as fh:
        fh.write(fld_bytes(f))


def read_fld(path) -> Field:
    with open(path, "rb") as fh:
        blob = fh.read()
    return parse_fld(blob)


def parse_fld(blob: bytes) -> Field:
    nl = blob.find(b"\n")
    if nl < 0:
        raise StructureError("missing .fld header line")
    header = blob[:nl].decode("ascii").split()
    if " ".join(header[:2]) != _FLD_MAGIC:
        raise StructureError(f"not an {_FLD_MAGIC} file")
    fields = dict(item.split("=", 1) for item in header[2:])
    try:
        lat = Lattice(int(fields["n1"]), int(fields["n2"]),
                      tuple(int(s) for s in fields["sizes"].split(",")))
    except KeyError as exc:
        raise StructureError(f"header lacks {exc}") from exc
    payload = blob[nl + 1:]
    if len(payload) % 16:
        raise StructureError("payload is not a whole number of complex128 samples")
    data = np.frombuffer(payload, dtype="<c16")
    if data.size != lat.total:
        raise StructureError(f"payload holds {data.size} samples, header says {lat.total}")
    return Field(lat, data.reshape(lat.shape))
