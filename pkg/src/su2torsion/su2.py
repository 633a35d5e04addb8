"""Unit quaternions as SU(2), the adjoint action on su(2), and the Killing
pairing.

A quaternion (a, b, c, d) embeds as the unitary matrix

    [ a + b i    c + d i ]
    [-c + d i    a - b i ]

su(2) elements are kept as 3-vectors in the (i, j, k) basis; with the
normalization <X, Y> = -1/2 tr(XY) the Killing pairing is the Euclidean dot
product in these coordinates, and Ad acts by rotations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CentralElement

CENTRAL_TOL = 1e-10


class SU2:
    """Unit quaternion; not renormalized on arithmetic (products of units)."""

    __slots__ = ("q",)

    def __init__(self, q, normalize: bool = False):
        v = np.asarray(q, dtype=float).reshape(4).copy()
        if normalize:
            v /= np.linalg.norm(v)
        self.q = v

    @classmethod
    def identity(cls) -> "SU2":
        return cls([1.0, 0.0, 0.0, 0.0])

    @classmethod
    def from_axis_angle(cls, theta: float, axis) -> "SU2":
        ax = np.asarray(axis, dtype=float).reshape(3)
        n = np.linalg.norm(ax)
        if n == 0:
            raise ValueError("zero axis")
        u = np.empty(4)
        u[0] = np.cos(theta)
        u[1:] = np.sin(theta) * ax / n
        return cls(u)

    @classmethod
    def from_matrix(cls, m) -> "SU2":
        m = np.asarray(m, dtype=complex)
        a = 0.5 * (m[0, 0] + m[1, 1]).real
        b = 0.5 * (m[0, 0] - m[1, 1]).imag
        c = 0.5 * (m[0, 1] - m[1, 0]).real
        d = 0.5 * (m[0, 1] + m[1, 0]).imag
        return cls([a, b, c, d], normalize=True)

    @classmethod
    def random(cls, rng) -> "SU2":
        v = rng.normal(size=4)
        return cls(v / np.linalg.norm(v))

    # -- group operations -----------------------------------------------------

    def __mul__(self, other: "SU2") -> "SU2":
        a1, b1, c1, d1 = self.q
        a2, b2, c2, d2 = other.q
        return SU2([
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ])

    def inverse(self) -> "SU2":
        a, b, c, d = self.q
        return SU2([a, -b, -c, -d])

    def __neg__(self) -> "SU2":
        return SU2(-self.q)

    def conj_by(self, g: "SU2") -> "SU2":
        return g * self * g.inverse()

    def __eq__(self, other):
        return isinstance(other, SU2) and np.array_equal(self.q, other.q)

    def close_to(self, other: "SU2", tol: float = 1e-9) -> bool:
        return bool(np.linalg.norm(self.q - other.q) <= tol)

    # -- views ------------------------------------------------------------------

    def matrix(self) -> np.ndarray:
        a, b, c, d = self.q
        return np.array([[a + 1j * b, c + 1j * d],
                         [-c + 1j * d, a - 1j * b]], dtype=complex)

    def trace(self) -> float:
        return 2.0 * self.q[0]

    def adjoint(self) -> np.ndarray:
        """Rotation matrix of Ad(g) on su(2) in vector coordinates."""
        a = self.q[0]
        u = self.q[1:]
        uu = np.outer(u, u)
        cross = np.array([[0.0, -u[2], u[1]],
                          [u[2], 0.0, -u[0]],
                          [-u[1], u[0], 0.0]])
        return (a * a - u @ u) * np.eye(3) + 2.0 * uu + 2.0 * a * cross

    def axis_angle(self) -> "AxisAngle":
        """Write g = cos(theta) I + sin(theta) P with theta in (0, pi).

        Raises CentralElement when g = +-I within tolerance.
        """
        a = float(np.clip(self.q[0], -1.0, 1.0))
        s = np.linalg.norm(self.q[1:])
        if s <= CENTRAL_TOL:
            raise CentralElement(f"element is central (sin theta = {s:.2e})")
        return AxisAngle(theta=float(np.arctan2(s, a)), axis=self.q[1:] / s)

    def __repr__(self):
        a, b, c, d = self.q
        return f"SU2([{a:.6f}, {b:.6f}, {c:.6f}, {d:.6f}])"


@dataclass(frozen=True)
class AxisAngle:
    theta: float
    axis: np.ndarray


# ---- su(2) vectors -----------------------------------------------------------

def vec_to_matrix(x) -> np.ndarray:
    """su(2) matrix of a 3-vector in the (i, j, k) basis."""
    b, c, d = np.asarray(x, dtype=float).reshape(3)
    return np.array([[1j * b, c + 1j * d],
                     [-c + 1j * d, -1j * b]], dtype=complex)


def matrix_to_vec(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    return np.array([m[0, 0].imag,
                     (m[0, 1] - m[1, 0]).real / 2.0,
                     (m[0, 1] + m[1, 0]).imag / 2.0])


def killing(x, y) -> float:
    """Pairing -1/2 tr(XY); the Euclidean dot product in vector coordinates."""
    return float(np.dot(np.asarray(x, dtype=float).reshape(3),
                        np.asarray(y, dtype=float).reshape(3)))


@dataclass(frozen=True)
class IrreducibilityReport:
    irreducible: bool
    near_reducible: bool
    margin: float


def is_irreducible(images, tol: float = 1e-8) -> IrreducibilityReport:
    """Axes of the non-central images must span at least two directions.

    margin is the largest cross-product norm between unit axes; reports
    near_reducible when the verdict holds only by less than 10x tolerance.
    """
    axes = []
    for g in images:
        try:
            axes.append(g.axis_angle().axis)
        except CentralElement:
            continue
    margin = 0.0
    for i in range(len(axes)):
        for j in range(i + 1, len(axes)):
            margin = max(margin, float(np.linalg.norm(np.cross(axes[i], axes[j]))))
    irr = margin > tol
    near = irr and margin <= 10.0 * tol
    return IrreducibilityReport(irreducible=irr, near_reducible=near, margin=margin)


def su2_images_matrices(images: dict) -> dict:
    """Generator name -> 2x2 matrix, from a dict of SU2 elements."""
    return {g: u.matrix() for g, u in images.items()}


def su2_images_adjoint(images: dict) -> dict:
    """Generator name -> 3x3 rotation, from a dict of SU2 elements."""
    return {g: u.adjoint() for g, u in images.items()}
