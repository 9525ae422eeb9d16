"""Quaternions and octonions, with the octonion table generated from the G2 3-form.

The imaginary units e_1..e_7 multiply as
``e_i e_j = -delta_ij + sum_k Omega_ijk e_k`` where Omega is the G2 form
built in :mod:`crosscal.vcp`. Deriving the table from the form keeps the
algebra and the form on a single sign convention.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exterior import AlternatingTensor, sort_with_sign

# 0-based keys; coordinate labels are one higher
G2_COEFFS = {
    (0, 1, 2): 1.0,
    (0, 5, 6): -1.0,
    (0, 3, 4): 1.0,
    (1, 4, 6): 1.0,
    (1, 3, 5): 1.0,
    (2, 4, 5): -1.0,
    (2, 3, 6): 1.0,
}


class AlgebraError(ValueError):
    pass


@lru_cache(maxsize=None)
def structure_constants() -> np.ndarray:
    """Array M with e_a e_b = sum_c M[a, b, c] e_c, basis (1, e_1, ..., e_7)."""
    m = np.zeros((8, 8, 8))
    for a in range(8):
        m[0, a, a] = 1.0
        m[a, 0, a] = 1.0
    for i in range(1, 8):
        m[i, i, 0] = -1.0
    for key, c in G2_COEFFS.items():
        for perm in itertools.permutations(key):
            _, sign = sort_with_sign(perm)
            i, j, k = perm
            m[i + 1, j + 1, k + 1] = sign * c
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class Octonion:
    coeffs: tuple[float, ...]

    def __post_init__(self):
        c = tuple(float(x) for x in self.coeffs)
        if len(c) != 8:
            raise AlgebraError(f"an octonion has 8 coefficients, got {len(c)}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def unit(cls, i: int) -> Octonion:
        """Basis element: 0 is the real unit, 1..7 are e_1..e_7."""
        c = [0.0] * 8
        c[i] = 1.0
        return cls(tuple(c))

    @classmethod
    def from_array(cls, arr) -> Octonion:
        return cls(tuple(np.asarray(arr, dtype=float)))

    def array(self) -> np.ndarray:
        return np.array(self.coeffs)

    @property
    def real(self) -> float:
        return self.coeffs[0]

    def imag(self) -> Octonion:
        return Octonion((0.0,) + self.coeffs[1:])

    def conj(self) -> Octonion:
        return Octonion((self.coeffs[0],) + tuple(-x for x in self.coeffs[1:]))

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def is_imaginary(self, tol: float = 1e-12) -> bool:
        return abs(self.coeffs[0]) <= tol

    def __add__(self, other: Octonion) -> Octonion:
        return Octonion(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: Octonion) -> Octonion:
        return Octonion(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> Octonion:
        return Octonion(tuple(-a for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, Octonion):
            return oct_mul(self, other)
        return Octonion(tuple(float(other) * a for a in self.coeffs))

    def __rmul__(self, s):
        return Octonion(tuple(float(s) * a for a in self.coeffs))


def oct_mul_array(a, b) -> np.ndarray:
    """Vectorized product on arrays of shape (..., 8)."""
    return np.einsum("...a,...b,abc->...c", a, b, structure_constants())


def oct_mul(a: Octonion, b: Octonion) -> Octonion:
    return Octonion.from_array(oct_mul_array(a.array(), b.array()))


def cross2(a: Octonion, b: Octonion) -> Octonion:
    """a x b = Im(ab) on purely imaginary octonions."""
    if not (a.is_imaginary() and b.is_imaginary()):
        raise AlgebraError("cross2 takes purely imaginary octonions")
    return oct_mul(a, b).imag()


def _conj_array(a):
    out = -np.asarray(a, dtype=float)
    out[..., 0] *= -1
    return out


def cross3_array(a, b, c) -> np.ndarray:
    bc = oct_mul_array(_conj_array(b), c)
    ba = oct_mul_array(_conj_array(b), a)
    return 0.5 * (oct_mul_array(a, bc) - oct_mul_array(c, ba))


def cross3(a: Octonion, b: Octonion, c: Octonion) -> Octonion:
    """a x b x c = (a(b* c) - c(b* a)) / 2."""
    return Octonion.from_array(cross3_array(a.array(), b.array(), c.array()))


def associator(a: Octonion, b: Octonion, c: Octonion) -> Octonion:
    return (a * b) * c - a * (b * c)


def cross3_form() -> AlternatingTensor:
    """The 4-form (a, b, c, d) -> <cross3(a, b, c), d> on R^8 = O."""
    eye = np.eye(8)
    coeffs = {}
    for key in itertools.combinations(range(8), 4):
        i, j, k, l = key
        coeffs[key] = float(cross3_array(eye[i], eye[j], eye[k]) @ eye[l])
    return AlternatingTensor(8, 4, coeffs)


def multiplication_table() -> dict:
    """JSON-ready table: entry [a][b] lists the signed unit index of e_a e_b."""
    m = structure_constants()
    names = ["1"] + [f"e{i}" for i in range(1, 8)]
    rows = []
    for a in range(8):
        row = []
        for b in range(8):
            (c,) = np.nonzero(m[a, b])[0]
            sign = "-" if m[a, b, c] < 0 else ""
            row.append(sign + names[c])
        rows.append(row)
    return {"basis": names, "table": rows}


def find_signed_permutation(source: AlternatingTensor, target: AlternatingTensor):
    """Search x_i -> s_i x_{p(i)} carrying ``source`` to ``target``.

    Returns ``(perm, signs)`` with the pullback of ``source`` along the map
    equal to ``target``, or None. Used to compare the Cayley form with the
    octonion 4-form; only the support pattern is enumerated exhaustively,
    the signs are then solved for.
    """
    n = source.dim
    target_keys = set(target.coeffs)
    for perm in itertools.permutations(range(n)):
        mapped = {}
        for key in target_keys:
            image, sign = sort_with_sign([perm[i] for i in key])
            if image not in source.coeffs:
                break
            mapped[key] = sign * source.coeffs[image]
        else:
            if len(mapped) != len(source.coeffs):
                continue
            for bits in itertools.product((1, -1), repeat=n):
                if all(abs(np.prod([bits[i] for i in key]) * mapped[key] - target.coeffs[key]) < 1e-12
                       for key in target_keys):
                    return perm, bits
    return None


class Quaternion:
    """Quaternions on the basis (1, e_1, e_2, e_3) with e_1 e_2 = e_3."""

    __slots__ = ("q",)

    def __init__(self, w=0.0, x=0.0, y=0.0, z=0.0):
        self.q = np.array([w, x, y, z], dtype=float)

    @classmethod
    def from_array(cls, arr):
        return cls(*np.asarray(arr, dtype=float))

    def __mul__(self, other):
        if not isinstance(other, Quaternion):
            return Quaternion.from_array(self.q * float(other))
        w1, x1, y1, z1 = self.q
        w2, x2, y2, z2 = other.q
        return Quaternion(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )

    def __add__(self, other):
        return Quaternion.from_array(self.q + other.q)

    def __sub__(self, other):
        return Quaternion.from_array(self.q - other.q)

    def __neg__(self):
        return Quaternion.from_array(-self.q)

    def __eq__(self, other):
        return isinstance(other, Quaternion) and np.array_equal(self.q, other.q)

    def __repr__(self):
        return "Quaternion({:g}, {:g}, {:g}, {:g})".format(*self.q)

    def conj(self):
        return Quaternion(self.q[0], *(-self.q[1:]))

    def norm(self):
        return float(np.linalg.norm(self.q))

    def to_octonion(self) -> Octonion:
        return Octonion(tuple(self.q) + (0.0,) * 4)

    def left_matrix(self):
        """Matrix of x -> self * x on R^4."""
        return np.column_stack([(self * Quaternion.from_array(e)).q for e in np.eye(4)])
