"""Exterior algebra over Euclidean R^n with exact basis bookkeeping.

Tensors are stored sparsely, keyed by strictly increasing 0-based index
tuples. The standard basis is orthonormal and e_1 ^ ... ^ e_n is positive.
The same type carries forms and multivectors; with an orthonormal basis the
two are identified coefficient-wise.

Interior products contract into the *first* slots:
``(iota_{v1^...^vj} a)(w...) = a(v1, ..., vj, w...)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

MAX_DIM = 10
ZERO_THRESHOLD = 1e-14


class ExteriorError(ValueError):
    pass


def sort_with_sign(seq: Sequence[int]) -> tuple[tuple[int, ...] | None, int]:
    """Sort ``seq`` and return ``(sorted_tuple, parity_sign)``.

    Returns ``(None, 0)`` if ``seq`` has a repeated entry.
    """
    items = list(seq)
    sign = 1
    # insertion sort, counting transpositions
    for i in range(1, len(items)):
        j = i
        while j > 0 and items[j - 1] > items[j]:
            items[j - 1], items[j] = items[j], items[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(items, items[1:]):
        if a == b:
            return None, 0
    return tuple(items), sign


@dataclass(frozen=True)
class AlternatingTensor:
    dim: int
    grade: int
    coeffs: Mapping[tuple[int, ...], float] = field(default_factory=dict, hash=False)

    def __post_init__(self):
        if not (1 <= self.dim <= MAX_DIM):
            raise ExteriorError(f"dimension {self.dim} outside 1..{MAX_DIM}")
        if not (0 <= self.grade <= self.dim):
            raise ExteriorError(f"grade {self.grade} outside 0..{self.dim}")
        clean: dict[tuple[int, ...], float] = {}
        for key, c in self.coeffs.items():
            key = tuple(int(i) for i in key)
            if len(key) != self.grade:
                raise ExteriorError(f"key {key} does not have grade {self.grade}")
            if any(b <= a for a, b in zip(key, key[1:])):
                raise ExteriorError(f"key {key} is not strictly increasing")
            if key and (key[0] < 0 or key[-1] >= self.dim):
                raise ExteriorError(f"key {key} out of range for dim {self.dim}")
            c = float(c)
            if abs(c) >= ZERO_THRESHOLD:
                clean[key] = c
        object.__setattr__(self, "coeffs", clean)

    # construction -----------------------------------------------------

    @classmethod
    def zero(cls, dim: int, grade: int) -> AlternatingTensor:
        return cls(dim, grade, {})

    @classmethod
    def scalar(cls, dim: int, value: float) -> AlternatingTensor:
        return cls(dim, 0, {(): value})

    @classmethod
    def from_unsorted(cls, dim: int, grade: int,
                      terms: Iterable[tuple[Sequence[int], float]]) -> AlternatingTensor:
        """Accumulate terms whose index lists need not be sorted."""
        acc: dict[tuple[int, ...], float] = {}
        for idx, c in terms:
            key, sign = sort_with_sign(idx)
            if key is None:
                continue
            acc[key] = acc.get(key, 0.0) + sign * c
        return cls(dim, grade, acc)

    @classmethod
    def from_vector(cls, v) -> AlternatingTensor:
        v = np.asarray(v, dtype=float)
        return cls(v.size, 1, {(i,): x for i, x in enumerate(v)})

    @classmethod
    def from_vectors(cls, vectors) -> AlternatingTensor:
        """The decomposable k-vector v_1 ^ ... ^ v_k (rows of ``vectors``)."""
        vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
        k, n = vectors.shape
        if k == 0:
            return cls.scalar(n, 1.0)
        keys = list(itertools.combinations(range(n), k))
        minors = np.linalg.det(np.stack([vectors[:, list(key)] for key in keys]))
        return cls(n, k, dict(zip(keys, minors)))

    # access -----------------------------------------------------------

    def coeff(self, key: Sequence[int]) -> float:
        sorted_key, sign = sort_with_sign(key)
        if sorted_key is None:
            return 0.0
        return sign * self.coeffs.get(sorted_key, 0.0)

    def to_vector(self):
        if self.grade != 1:
            raise ExteriorError("only grade-1 tensors convert to vectors")
        out = np.zeros(self.dim)
        for (i,), c in self.coeffs.items():
            out[i] = c
        return out

    def to_matrix(self):
        """Skew matrix A with A[i, j] = a(e_i, e_j) for a grade-2 tensor."""
        if self.grade != 2:
            raise ExteriorError("only grade-2 tensors convert to matrices")
        out = np.zeros((self.dim, self.dim))
        for (i, j), c in self.coeffs.items():
            out[i, j] = c
            out[j, i] = -c
        return out

    @classmethod
    def from_matrix(cls, mat) -> AlternatingTensor:
        mat = np.asarray(mat, dtype=float)
        n = mat.shape[0]
        return cls(n, 2, {(i, j): 0.5 * (mat[i, j] - mat[j, i])
                          for i, j in itertools.combinations(range(n), 2)})

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for c in self.coeffs.values())

    @cached_property
    def _index_arrays(self):
        keys = sorted(self.coeffs)
        idx = np.array(keys, dtype=int).reshape(len(keys), self.grade)
        vals = np.array([self.coeffs[k] for k in keys], dtype=float)
        return idx, vals

    # arithmetic -------------------------------------------------------

    def _check_compatible(self, other: AlternatingTensor) -> None:
        if self.dim != other.dim:
            raise ExteriorError(f"dimension mismatch {self.dim} != {other.dim}")
        if self.grade != other.grade:
            raise ExteriorError(f"grade mismatch {self.grade} != {other.grade}")

    def __add__(self, other: AlternatingTensor) -> AlternatingTensor:
        self._check_compatible(other)
        acc = dict(self.coeffs)
        for k, c in other.coeffs.items():
            acc[k] = acc.get(k, 0.0) + c
        return AlternatingTensor(self.dim, self.grade, acc)

    def __neg__(self) -> AlternatingTensor:
        return AlternatingTensor(self.dim, self.grade, {k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other: AlternatingTensor) -> AlternatingTensor:
        return self + (-other)

    def __mul__(self, s) -> AlternatingTensor:
        s = float(s)
        return AlternatingTensor(self.dim, self.grade, {k: s * c for k, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __truediv__(self, s) -> AlternatingTensor:
        return self * (1.0 / float(s))

    def __xor__(self, other: AlternatingTensor) -> AlternatingTensor:
        return wedge(self, other)

    def __repr__(self):
        if not self.coeffs:
            return f"AlternatingTensor(dim={self.dim}, grade={self.grade}, 0)"
        body = " ".join(f"{c:+g}*e{''.join(str(i + 1) for i in k)}"
                        for k, c in sorted(self.coeffs.items()))
        return f"AlternatingTensor(dim={self.dim}, grade={self.grade}, {body})"

    # serialization ----------------------------------------------------

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "grade": self.grade,
            "terms": [{"idx": [i + 1 for i in k], "c": c} for k, c in sorted(self.coeffs.items())],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> AlternatingTensor:
        try:
            dim, grade, terms = int(data["dim"]), int(data["grade"]), data["terms"]
        except (KeyError, TypeError) as exc:
            raise ExteriorError(f"malformed tensor JSON: {exc}") from exc
        coeffs = {}
        for term in terms:
            key = tuple(int(i) - 1 for i in term["idx"])
            if key in coeffs:
                raise ExteriorError(f"duplicate key {term['idx']}")
            coeffs[key] = float(term["c"])
        return cls(dim, grade, coeffs)


def dx(dim: int, *labels: int) -> AlternatingTensor:
    """Basis form dx^{i1} ^ ... ^ dx^{ik} using 1-based coordinate labels.

    ``dx(7, 2, 1)`` is dx^2 ^ dx^1 = -dx^{12}, so the sign follows the
    order the labels are written in.
    """
    return AlternatingTensor.from_unsorted(dim, len(labels), [([i - 1 for i in labels], 1.0)])


def volume_form(dim: int) -> AlternatingTensor:
    return AlternatingTensor(dim, dim, {tuple(range(dim)): 1.0})


def wedge(a: AlternatingTensor, b: AlternatingTensor) -> AlternatingTensor:
    if a.dim != b.dim:
        raise ExteriorError(f"dimension mismatch {a.dim} != {b.dim}")
    grade = a.grade + b.grade
    if grade > a.dim:
        raise ExteriorError(f"grade overflow {a.grade} + {b.grade} > {a.dim}")
    terms = [(ka + kb, ca * cb) for ka, ca in a.coeffs.items() for kb, cb in b.coeffs.items()]
    return AlternatingTensor.from_unsorted(a.dim, grade, terms)


def wedge_all(tensors: Sequence[AlternatingTensor]) -> AlternatingTensor:
    out = tensors[0]
    for t in tensors[1:]:
        out = wedge(out, t)
    return out


def interior(x: AlternatingTensor, a: AlternatingTensor) -> AlternatingTensor:
    """Contract the multivector ``x`` into the first slots of ``a``."""
    if x.dim != a.dim:
        raise ExteriorError(f"dimension mismatch {x.dim} != {a.dim}")
    if x.grade > a.grade:
        raise ExteriorError(f"cannot contract grade {x.grade} into grade {a.grade}")
    acc: dict[tuple[int, ...], float] = {}
    for kx, cx in x.coeffs.items():
        sx = set(kx)
        for ka, ca in a.coeffs.items():
            if not sx.issubset(ka):
                continue
            rest = tuple(i for i in ka if i not in sx)
            _, sign = sort_with_sign(kx + rest)
            acc[rest] = acc.get(rest, 0.0) + sign * cx * ca
    return AlternatingTensor(a.dim, a.grade - x.grade, acc)


def interior_vectors(vectors, a: AlternatingTensor) -> AlternatingTensor:
    """iota_{v1 ^ ... ^ vj} a for real vectors given as rows."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    out = a
    # iota_{v1^v2} = iota_{v2} iota_{v1} under the first-slot convention
    for v in vectors:
        out = interior(AlternatingTensor.from_vector(v), out)
    return out


def hodge_star(a: AlternatingTensor) -> AlternatingTensor:
    n = a.dim
    acc = {}
    for key, c in a.coeffs.items():
        comp = tuple(i for i in range(n) if i not in key)
        _, sign = sort_with_sign(key + comp)
        acc[comp] = sign * c
    return AlternatingTensor(n, n - a.grade, acc)


def inner(a: AlternatingTensor, b: AlternatingTensor) -> float:
    a._check_compatible(b)
    small, big = (a, b) if len(a.coeffs) <= len(b.coeffs) else (b, a)
    return math.fsum(c * big.coeffs[k] for k, c in small.coeffs.items() if k in big.coeffs)


def norm(a) -> float:
    if isinstance(a, ComplexAlternatingTensor):
        return math.sqrt(inner(a.re, a.re) + inner(a.im, a.im))
    return math.sqrt(inner(a, a))


def evaluate(a: AlternatingTensor, vectors):
    """a(v_1, ..., v_k) for vectors stacked on the second-to-last axis.

    ``vectors`` has shape (..., k, n); the result has shape (...). Works for
    real or complex input by multilinearity.
    """
    vectors = np.asarray(vectors)
    if vectors.shape[-1] != a.dim:
        raise ExteriorError(f"vectors of length {vectors.shape[-1]} for dim {a.dim}")
    if a.grade == 0:
        return a.coeffs.get((), 0.0) * np.ones(vectors.shape[:-2])
    if vectors.shape[-2] != a.grade:
        raise ExteriorError(f"{vectors.shape[-2]} vectors for a grade-{a.grade} tensor")
    idx, vals = a._index_arrays
    if len(vals) == 0:
        return np.zeros(vectors.shape[:-2]) if vectors.ndim > 2 else 0.0
    sub = vectors[..., idx]                      # (..., k, T, k)
    sub = np.moveaxis(sub, -2, -3)               # (..., T, k, k)
    return np.linalg.det(sub) @ vals


def restrict(a: AlternatingTensor, plane) -> AlternatingTensor:
    """Pull ``a`` back to span(frame), using the frame as the new basis.

    ``plane`` is an OrientedPlane or a (k, n) array of orthonormal rows.
    """
    frame = np.atleast_2d(np.asarray(getattr(plane, "frame", plane), dtype=float))
    k, n = frame.shape
    if n != a.dim:
        raise ExteriorError(f"frame in R^{n} for a tensor on R^{a.dim}")
    if np.max(np.abs(frame @ frame.T - np.eye(k))) > 1e-10:
        raise ExteriorError("restriction frame is not orthonormal")
    if a.grade > k:
        # the pullback vanishes identically; represent it as the zero top form
        return AlternatingTensor.zero(k, k)
    keys = list(itertools.combinations(range(k), a.grade))
    if a.grade == 0:
        return AlternatingTensor(k, 0, dict(a.coeffs))
    vals = evaluate(a, np.stack([frame[list(key)] for key in keys]))
    return AlternatingTensor(k, a.grade, dict(zip(keys, vals)))


@dataclass(frozen=True)
class ComplexAlternatingTensor:
    re: AlternatingTensor
    im: AlternatingTensor

    def __post_init__(self):
        if self.re.dim != self.im.dim or self.re.grade != self.im.grade:
            raise ExteriorError("real and imaginary parts disagree in dim/grade")

    @property
    def dim(self) -> int:
        return self.re.dim

    @property
    def grade(self) -> int:
        return self.re.grade

    @classmethod
    def from_real(cls, re: AlternatingTensor) -> ComplexAlternatingTensor:
        return cls(re, AlternatingTensor.zero(re.dim, re.grade))

    def conj(self) -> ComplexAlternatingTensor:
        return ComplexAlternatingTensor(self.re, -self.im)

    def __add__(self, other: ComplexAlternatingTensor) -> ComplexAlternatingTensor:
        return ComplexAlternatingTensor(self.re + other.re, self.im + other.im)

    def __neg__(self):
        return ComplexAlternatingTensor(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s: complex) -> ComplexAlternatingTensor:
        s = complex(s)
        return ComplexAlternatingTensor(s.real * self.re - s.imag * self.im,
                                        s.real * self.im + s.imag * self.re)

    def phase_rotate(self, theta: float) -> ComplexAlternatingTensor:
        """e^{i theta} times this tensor."""
        c, s = math.cos(theta), math.sin(theta)
        return ComplexAlternatingTensor(c * self.re - s * self.im, c * self.im + s * self.re)

    def evaluate(self, vectors):
        return evaluate(self.re, vectors) + 1j * evaluate(self.im, vectors)

    def interior_vectors(self, vectors) -> ComplexAlternatingTensor:
        """Complex-linear contraction by complex vectors (rows)."""
        vectors = np.atleast_2d(np.asarray(vectors, dtype=complex))
        re, im = self.re, self.im
        for v in vectors:
            vr = AlternatingTensor.from_vector(v.real)
            vi = AlternatingTensor.from_vector(v.imag)
            re, im = (interior(vr, re) - interior(vi, im),
                      interior(vr, im) + interior(vi, re))
        return ComplexAlternatingTensor(re, im)

    def restrict(self, plane) -> ComplexAlternatingTensor:
        return ComplexAlternatingTensor(restrict(self.re, plane), restrict(self.im, plane))

    def norm(self) -> float:
        return norm(self)

    def to_json(self) -> dict:
        return {"re": self.re.to_json(), "im": self.im.to_json()}

    @classmethod
    def from_json(cls, data: Mapping) -> ComplexAlternatingTensor:
        return cls(AlternatingTensor.from_json(data["re"]), AlternatingTensor.from_json(data["im"]))


def complex_wedge(a: ComplexAlternatingTensor, b: ComplexAlternatingTensor) -> ComplexAlternatingTensor:
    return ComplexAlternatingTensor(wedge(a.re, b.re) - wedge(a.im, b.im),
                                    wedge(a.re, b.im) + wedge(a.im, b.re))


def interior_coefficients(a: AlternatingTensor, front) -> np.ndarray:
    """Coefficients of iota_{front} a on the sorted basis subsets.

    ``front`` has shape (..., j, n) and may be complex. The result has shape
    (..., C(n, k - j)) ordered as ``itertools.combinations(range(n), k - j)``;
    its Euclidean norm is the norm of the contracted tensor.
    """
    front = np.asarray(front)
    j, n = front.shape[-2:]
    if n != a.dim:
        raise ExteriorError(f"vectors of length {n} for dim {a.dim}")
    if j > a.grade:
        raise ExteriorError(f"cannot contract {j} vectors into grade {a.grade}")
    rest = list(itertools.combinations(range(n), a.grade - j))
    tails = np.eye(n)[np.array(rest, dtype=int).reshape(len(rest), a.grade - j)]  # (R, k-j, n)
    lead = front.shape[:-2]
    head = np.broadcast_to(front[..., None, :, :], lead + (len(rest), j, n))
    tail = np.broadcast_to(tails, lead + tails.shape)
    return evaluate(a, np.concatenate([head, tail], axis=-2))
