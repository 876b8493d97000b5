"""
Functions of one complex variable packaged with exact Wirtinger derivatives.

All callables act elementwise on numpy arrays (or scalars) of complex numbers.
"""

from collections.abc import Callable, Sequence
from dataclasses import dataclass
import math
from typing import Final

import numpy as np

from .exceptions import InvalidInputError


ArrayFunc = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class WirtingerFunction:
    """f together with its Wirtinger derivatives df/dz and df/dzbar."""

    name: str
    value: ArrayFunc
    dz: ArrayFunc
    dzbar: ArrayFunc

    def __call__(self, z: np.ndarray | complex) -> np.ndarray:
        return np.asarray(self.value(np.asarray(z, dtype=complex)), dtype=complex)

    def d(self, z: np.ndarray | complex) -> np.ndarray:
        return np.asarray(self.dz(np.asarray(z, dtype=complex)), dtype=complex)

    def dbar(self, z: np.ndarray | complex) -> np.ndarray:
        return np.asarray(self.dzbar(np.asarray(z, dtype=complex)), dtype=complex)

    def __add__(self, other: "WirtingerFunction") -> "WirtingerFunction":
        return WirtingerFunction(
            name=f"({self.name} + {other.name})",
            value=lambda z: self(z) + other(z),
            dz=lambda z: self.d(z) + other.d(z),
            dzbar=lambda z: self.dbar(z) + other.dbar(z),
        )

    def __mul__(self, other: "WirtingerFunction") -> "WirtingerFunction":
        return WirtingerFunction(
            name=f"{self.name}*{other.name}",
            value=lambda z: self(z) * other(z),
            dz=lambda z: self.d(z) * other(z) + self(z) * other.d(z),
            dzbar=lambda z: self.dbar(z) * other(z) + self(z) * other.dbar(z),
        )

    def scaled(self, factor: complex) -> "WirtingerFunction":
        return WirtingerFunction(
            name=f"{factor}*{self.name}",
            value=lambda z: factor * self(z),
            dz=lambda z: factor * self.d(z),
            dzbar=lambda z: factor * self.dbar(z),
        )

    def conjugated(self) -> "WirtingerFunction":
        """conj o f o conj, whose Wirtinger derivatives are conjugates of f's."""
        return WirtingerFunction(
            name=f"conj({self.name})(conj z)",
            value=lambda z: np.conj(self(np.conj(z))),
            dz=lambda z: np.conj(self.d(np.conj(z))),
            dzbar=lambda z: np.conj(self.dbar(np.conj(z))),
        )


def bipolynomial(
    coefficients: dict[tuple[int, int], complex], name: str | None = None
) -> WirtingerFunction:
    """sum c_jk z^j conj(z)^k"""
    terms = {k: complex(v) for k, v in coefficients.items() if v != 0}
    for j, k in terms:
        if j < 0 or k < 0:
            raise InvalidInputError(f"Negative exponent in term z^{j} conj(z)^{k}")

    def value(z: np.ndarray) -> np.ndarray:
        zc = np.conj(z)
        out = np.zeros_like(z, dtype=complex)
        for (j, k), c in terms.items():
            out = out + c * z**j * zc**k
        return out

    def dz(z: np.ndarray) -> np.ndarray:
        zc = np.conj(z)
        out = np.zeros_like(z, dtype=complex)
        for (j, k), c in terms.items():
            if j:
                out = out + c * j * z ** (j - 1) * zc**k
        return out

    def dzbar(z: np.ndarray) -> np.ndarray:
        zc = np.conj(z)
        out = np.zeros_like(z, dtype=complex)
        for (j, k), c in terms.items():
            if k:
                out = out + c * k * z**j * zc ** (k - 1)
        return out

    if name is None:
        name = " + ".join(f"{c}*z^{j}*conj(z)^{k}" for (j, k), c in sorted(terms.items()))
    return WirtingerFunction(name=name or "0", value=value, dz=dz, dzbar=dzbar)


def polynomial(coefficients: Sequence[complex], name: str | None = None) -> WirtingerFunction:
    """Holomorphic polynomial sum_k c_k z^k (coefficients in increasing degree)."""
    return bipolynomial(
        {(k, 0): c for k, c in enumerate(coefficients)},
        name=name or f"poly{list(coefficients)}",
    )


def identity() -> WirtingerFunction:
    return bipolynomial({(1, 0): 1}, name="z")


def conjugate() -> WirtingerFunction:
    return bipolynomial({(0, 1): 1}, name="conj(z)")


def square() -> WirtingerFunction:
    return bipolynomial({(2, 0): 1}, name="z^2")


def modulus_squared() -> WirtingerFunction:
    return bipolynomial({(1, 1): 1}, name="z*conj(z)")


def exp() -> WirtingerFunction:
    return WirtingerFunction(name="exp(z)", value=np.exp, dz=np.exp, dzbar=np.zeros_like)


def exp_partial_sum(degree: int) -> WirtingerFunction:
    return polynomial(
        [1.0 / math.factorial(k) for k in range(degree + 1)], name=f"exp_{degree}(z)"
    )


def bump(radius: float = 1.0, center: complex = 0j) -> WirtingerFunction:
    """(1 - |z - c|^2 / r^2)^2 on the disk |z - c| < r, 0 outside; C^1 with compact support."""

    def inner(z: np.ndarray) -> np.ndarray:
        w = z - center
        return 1.0 - (w * np.conj(w)).real / radius**2

    def value(z: np.ndarray) -> np.ndarray:
        s = inner(z)
        return np.where(s > 0, s**2, 0.0).astype(complex)

    def dz(z: np.ndarray) -> np.ndarray:
        s = inner(z)
        return np.where(s > 0, -2.0 * s * np.conj(z - center) / radius**2, 0.0)

    def dzbar(z: np.ndarray) -> np.ndarray:
        s = inner(z)
        return np.where(s > 0, -2.0 * s * (z - center) / radius**2, 0.0)

    name = "bump" if (radius, center) == (1.0, 0j) else f"bump(r={radius}, c={center})"
    return WirtingerFunction(name=name, value=value, dz=dz, dzbar=dzbar)


FUNCTION_CATALOG: Final[dict[str, Callable[[], WirtingerFunction]]] = {
    "bump": bump,
    "conj(z)": conjugate,
    "z": identity,
    "z*conj(z)": modulus_squared,
    "z^2": square,
}
"""Symbols resolvable without parameters; "polynomial" and "koch-parameter" take data."""


def resolve(symbol: str, coefficients: Sequence[complex] | None = None) -> WirtingerFunction:
    if symbol == "koch-parameter":
        raise InvalidInputError("Symbol 'koch-parameter' is defined on snowflake curves only")
    if symbol == "polynomial":
        if not coefficients:
            raise InvalidInputError("Symbol 'polynomial' needs coefficients")
        return polynomial(coefficients)
    try:
        return FUNCTION_CATALOG[symbol]()
    except KeyError:
        raise InvalidInputError(f"Unknown function symbol {symbol!r}") from None
