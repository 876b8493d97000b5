"""
Real-linear maps C^n -> C split into complex-linear and conjugate-linear parts.

Real coordinates of v in C^n are interleaved as (Re v_1, Im v_1, ..., Re v_n, Im v_n);
a 2 x 2n real matrix acts on them with rows (Re L(v), Im L(v)).
"""

import logging
from typing import Self

import numpy as np
from pydantic import field_validator, model_validator
from scipy import linalg

from .exceptions import InvalidInputError, NotComplexLinearOnComplexPart
from .schemas.base import ArrayBaseModel, readonly
from .settings import get_settings


logger = logging.getLogger(__name__)


def realify(vectors: np.ndarray) -> np.ndarray:
    """(k, n) complex rows -> (2n, k) real matrix with interleaved coordinates."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=complex))
    k, n = vectors.shape
    out = np.empty((2 * n, k))
    out[0::2] = vectors.real.T
    out[1::2] = vectors.imag.T
    return out


def complexify(columns: np.ndarray) -> np.ndarray:
    """Inverse of ``realify``: (2n, k) real -> (k, n) complex rows."""
    return (columns[0::2] + 1j * columns[1::2]).T


class RealLinearMap(ArrayBaseModel):
    """L(v) = sum_j holo_j v_j + anti_j conj(v_j)"""

    holo: np.ndarray
    anti: np.ndarray

    @field_validator("holo", "anti", mode="before")
    @classmethod
    def _as_vector(cls, v: object) -> np.ndarray:
        return readonly(np.atleast_1d(np.array(v, dtype=np.complex128)))

    @model_validator(mode="after")
    def _check(self) -> Self:
        if self.holo.ndim != 1 or self.holo.shape != self.anti.shape or self.holo.size == 0:
            raise ValueError("holo and anti must be nonempty vectors of equal length")
        if not (np.all(np.isfinite(self.holo)) and np.all(np.isfinite(self.anti))):
            raise ValueError("RealLinearMap coefficients must be finite")
        return self

    @property
    def n(self) -> int:
        return self.holo.size

    @classmethod
    def zero(cls, n: int) -> Self:
        return cls(holo=np.zeros(n), anti=np.zeros(n))

    def __call__(self, v: np.ndarray | complex) -> np.ndarray:
        v = np.asarray(v, dtype=complex)
        if self.n == 1 and (v.ndim == 0 or v.shape[-1] != 1):
            return self.holo[0] * v + self.anti[0] * np.conj(v)
        return v @ self.holo + np.conj(v) @ self.anti

    def complex_part(self) -> Self:
        return type(self)(holo=self.holo, anti=np.zeros(self.n))

    def conjugate_part(self) -> Self:
        return type(self)(holo=np.zeros(self.n), anti=self.anti)

    def is_complex_linear(self, atol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.anti) <= atol))

    def is_conjugate_linear(self, atol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.holo) <= atol))

    def to_real_matrix(self) -> np.ndarray:
        """2 x 2n matrix with columns L(e_j), L(i e_j) split into (Re, Im)."""
        on_e = self.holo + self.anti
        on_ie = 1j * (self.holo - self.anti)
        out = np.empty((2, 2 * self.n))
        out[:, 0::2] = np.vstack([on_e.real, on_e.imag])
        out[:, 1::2] = np.vstack([on_ie.real, on_ie.imag])
        return out

    @classmethod
    def from_samples(cls, vectors: np.ndarray, values: np.ndarray) -> Self:
        """Recover L from its values on 2n real-linearly independent vectors."""
        vectors = np.atleast_2d(np.asarray(vectors, dtype=complex))
        values = np.asarray(values, dtype=complex)
        k, n = vectors.shape
        if k != 2 * n or values.shape != (k,):
            raise InvalidInputError(f"Need exactly {2 * n} samples, got {k}")
        rhs = np.column_stack([values.real, values.imag])
        matrix = linalg.solve(realify(vectors).T, rhs).T
        return from_real_matrix(matrix)


def from_real_matrix(matrix: np.ndarray) -> RealLinearMap:
    """
    Split the real-linear map given by a 2 x 2n real matrix.

    holo_j = (L(e_j) - i L(i e_j)) / 2, anti_j = (L(e_j) + i L(i e_j)) / 2.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != 2 or matrix.shape[1] % 2 or not matrix.shape[1]:
        raise InvalidInputError(f"Expected a 2 x 2n real matrix, got shape {matrix.shape}")
    on_e = matrix[0, 0::2] + 1j * matrix[1, 0::2]
    on_ie = matrix[0, 1::2] + 1j * matrix[1, 1::2]
    return RealLinearMap(holo=(on_e - 1j * on_ie) / 2, anti=(on_e + 1j * on_ie) / 2)


class RealSubspace(ArrayBaseModel):
    """Real-linear span of the rows of ``basis`` (k x n complex, k <= 2n)."""

    n: int
    basis: np.ndarray

    @model_validator(mode="before")
    @classmethod
    def _as_rows(cls, data: dict) -> dict:
        if isinstance(data, dict) and "basis" in data:
            n = data.get("n")
            basis = np.array(data["basis"], dtype=np.complex128)
            if basis.ndim == 1 and n == 1:
                basis = basis.reshape(-1, 1)
            if basis.size == 0:
                basis = basis.reshape(0, n if n is not None else 0)
            basis = np.atleast_2d(basis)
            data = {**data, "basis": readonly(basis), "n": n if n is not None else basis.shape[1]}
        return data

    @model_validator(mode="after")
    def _check_independent(self) -> Self:
        k, n = self.basis.shape
        if n != self.n or self.n <= 0:
            raise ValueError(f"basis vectors must lie in C^{self.n}")
        if k > 2 * n:
            raise ValueError(f"{k} vectors cannot be real-independent in C^{n}")
        if k and np.linalg.matrix_rank(realify(self.basis), tol=_rank_tol(self.basis)) != k:
            raise ValueError("basis vectors are not real-linearly independent")
        return self

    @property
    def dim(self) -> int:
        """Real dimension."""
        return self.basis.shape[0]

    @classmethod
    def zero(cls, n: int) -> Self:
        return cls(n=n, basis=np.zeros((0, n), dtype=complex))

    def coordinates(self, vectors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Real least-squares coefficients of ``vectors`` in the basis, and residual norms."""
        target = realify(vectors)
        coeffs, *_ = linalg.lstsq(realify(self.basis), target)
        residual = np.linalg.norm(realify(self.basis) @ coeffs - target, axis=0)
        return coeffs.T, residual


def _rank_tol(vectors: np.ndarray, rtol: float | None = None) -> float:
    rtol = rtol if rtol is not None else get_settings().rank_rtol
    if vectors.size == 0:
        return rtol
    return rtol * float(linalg.svdvals(realify(vectors))[0])


def complex_part(subspace: RealSubspace, rtol: float | None = None) -> RealSubspace:
    """
    Basis of W ∩ iW, orthonormal in the real inner product.

    v = B^T a = i B^T b is found from the null space of [realify(B), -realify(iB)].
    """
    rtol = rtol if rtol is not None else get_settings().rank_rtol
    k = subspace.dim
    if k == 0:
        return RealSubspace.zero(subspace.n)
    system = np.hstack([realify(subspace.basis), -realify(1j * subspace.basis)])
    null = linalg.null_space(system, rcond=rtol)
    if null.shape[1] == 0:
        return RealSubspace.zero(subspace.n)
    vectors = null[:k].T @ subspace.basis
    orthonormal = linalg.orth(realify(vectors), rcond=rtol)
    logger.debug("complex part has real dimension %d", orthonormal.shape[1])
    return RealSubspace(n=subspace.n, basis=complexify(orthonormal))


def is_totally_real(subspace: RealSubspace, rtol: float | None = None) -> bool:
    return complex_part(subspace, rtol=rtol).dim == 0


def extend_complex_linear(
    subspace: RealSubspace,
    values: np.ndarray,
    rtol: float | None = None,
) -> RealLinearMap:
    """
    Complex-linear map on C^n agreeing with the prescribed values on the basis of W.

    Raises NotComplexLinearOnComplexPart when L(iv) != iL(v) for some v in W ∩ iW.
    """
    rtol = rtol if rtol is not None else get_settings().rank_rtol
    values = np.atleast_1d(np.asarray(values, dtype=complex))
    if values.shape != (subspace.dim,):
        raise InvalidInputError(
            f"Expected {subspace.dim} prescribed values, got {values.shape[0]}"
        )
    if subspace.dim == 0:
        return RealLinearMap.zero(subspace.n)
    if not np.all(np.isfinite(values)):
        raise InvalidInputError("Prescribed values must be finite")

    sigma_max = float(linalg.svdvals(realify(subspace.basis))[0])
    tol = rtol * max(1.0, sigma_max) * max(1.0, float(np.max(np.abs(values))))

    inner = complex_part(subspace, rtol=rtol)
    if inner.dim:
        coeffs_v, _ = subspace.coordinates(inner.basis)
        coeffs_iv, _ = subspace.coordinates(1j * inner.basis)
        defect = np.abs(coeffs_iv @ values - 1j * (coeffs_v @ values))
        if float(defect.max()) > tol:
            logger.error("Complex-linearity defect %.3e on the complex part", defect.max())
            raise NotComplexLinearOnComplexPart(
                "Prescribed map is not complex-linear on W ∩ iW "
                "(defect %.3e > tolerance %.3e)" % (defect.max(), tol)
            )

    holo, *_ = linalg.lstsq(subspace.basis, values, cond=rtol)
    residual = float(np.max(np.abs(subspace.basis @ holo - values)))
    if residual > tol:
        raise NotComplexLinearOnComplexPart(
            "Interpolation constraints are inconsistent (residual %.3e)" % residual
        )
    return RealLinearMap(holo=holo, anti=np.zeros(subspace.n))
