"""Irreducible representations of su(2) and the SU(2) group manifold.

The m-dimensional spin representation is generated by three skew-Hermitian
matrices X_m, Y_m, Z_m normalized so that

    [X,Y] = 2Z,  [Y,Z] = 2X,  [Z,X] = 2Y,

matching the 2x2 defining matrices

    X = [[0,1],[-1,0]],  Y = [[0,i],[i,0]],  Z = [[i,0],[0,-i]].

Construction uses ladder operators on the Z-eigenbasis |1>,...,|m> with
Z|j> = i(m-2j+1)|j>:

    L+|j> = sqrt((j-1)(m-j+1)) |j-1>,   L- = (L+)†,
    X = L+ - L-,   Y = i(L+ + L-).

The bracket relations and the Casimir identity X²+Y²+Z² = -(m²-1)·I are
the binding contract and are machine-checked in the test suite for
m = 1..8.

Group elements are unit quaternions g = c·I + x·X + y·Y + z·Z with
c²+x²+y²+z² = 1; (X,Y,Z) multiply exactly like the quaternion units
(i,j,k), so group multiplication is quaternion multiplication.  Haar
measure is the uniform measure on the 3-sphere, sampled by normalizing
4-vectors of independent standard Gaussians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidInput
from .numkit import expm_skew


@dataclass(frozen=True)
class IrrepGenerators:
    """Skew-Hermitian generator triple of the m-dimensional irrep."""

    m: int
    X: np.ndarray
    Y: np.ndarray
    Z: np.ndarray

    def as_tuple(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.X, self.Y, self.Z


@dataclass(frozen=True)
class GroupElement:
    """Unit quaternion (c, x, y, z) on the 3-sphere."""

    c: float
    x: float
    y: float
    z: float

    def __post_init__(self):
        n = self.c**2 + self.x**2 + self.y**2 + self.z**2
        if abs(n - 1.0) > 1e-12:
            raise InvalidInput(f"quaternion norm² = {n!r}, expected 1")

    def vector(self) -> np.ndarray:
        return np.array([self.c, self.x, self.y, self.z])


IDENTITY = GroupElement(1.0, 0.0, 0.0, 0.0)


def build_generators(m: int) -> IrrepGenerators:
    """Generators of the m-dimensional irreducible representation.

    m = 1 is the trivial representation (all three generators zero);
    m = 2 reproduces the defining matrices above exactly.
    """
    if m < 1:
        raise InvalidInput(f"representation dimension must be >= 1, got {m}")
    lp = np.zeros((m, m), dtype=complex)
    for j in range(2, m + 1):
        lp[j - 2, j - 1] = math.sqrt((j - 1) * (m - j + 1))
    lm = lp.conj().T
    x = lp - lm
    y = 1j * (lp + lm)
    z = 1j * np.diag(m - 2 * np.arange(1, m + 1) + 1).astype(complex)
    for a in (x, y, z):
        a.flags.writeable = False
    return IrrepGenerators(m=m, X=x, Y=y, Z=z)


@lru_cache(maxsize=64)
def cached_generators(m: int) -> IrrepGenerators:
    return build_generators(m)


def casimir(gen: IrrepGenerators) -> np.ndarray:
    """X² + Y² + Z²; equals -(m²-1)·I."""
    return gen.X @ gen.X + gen.Y @ gen.Y + gen.Z @ gen.Z


def horizontal_symbol(gen: IrrepGenerators) -> np.ndarray:
    """X² + Y², the horizontal second-order symbol.

    Diagonal in the Z-eigenbasis with entries -(m²-1) + (m-2j+1)²,
    j = 1..m; negative semidefinite; the heat semigroup acts on band-m
    coefficients by exp(t · this).
    """
    return gen.X @ gen.X + gen.Y @ gen.Y


def horizontal_eigenvalues(m: int) -> np.ndarray:
    """The diagonal of the horizontal symbol as exact integers."""
    j = np.arange(1, m + 1)
    return -(m * m - 1) + (m - 2 * j + 1) ** 2


def represent(gen: IrrepGenerators, g: GroupElement) -> np.ndarray:
    """Unitary matrix of the group element in the m-dimensional irrep.

    Computed as exp(theta·(n_x X + n_y Y + n_z Z)) where theta is the
    rotation angle atan2(|v|, c) of the quaternion and n its axis; for
    g = -identity the axis is fixed at (1, 0, 0).  For m = 2 this equals
    c·I + x·X + y·Y + z·Z.
    """
    v = math.sqrt(g.x**2 + g.y**2 + g.z**2)
    theta = math.atan2(v, g.c)
    if v < 1e-15:
        if g.c > 0:
            return np.eye(gen.m, dtype=complex)
        nx, ny, nz = 1.0, 0.0, 0.0
    else:
        nx, ny, nz = g.x / v, g.y / v, g.z / v
    a = theta * (nx * gen.X + ny * gen.Y + nz * gen.Z)
    return expm_skew(a)


def group_mul(g: GroupElement, h: GroupElement) -> GroupElement:
    """Quaternion product; matches matrix multiplication in every irrep."""
    c = g.c * h.c - g.x * h.x - g.y * h.y - g.z * h.z
    x = g.c * h.x + h.c * g.x + g.y * h.z - g.z * h.y
    y = g.c * h.y + h.c * g.y + g.z * h.x - g.x * h.z
    z = g.c * h.z + h.c * g.z + g.x * h.y - g.y * h.x
    n = math.sqrt(c * c + x * x + y * y + z * z)
    return GroupElement(c / n, x / n, y / n, z / n)


def group_inv(g: GroupElement) -> GroupElement:
    return GroupElement(g.c, -g.x, -g.y, -g.z)


def group_exp_step(g: GroupElement, direction: str, t: float) -> GroupElement:
    """Right translate: g · exp(t·V) for V in {X, Y, Z}."""
    c, s = math.cos(t), math.sin(t)
    step = {
        "X": GroupElement(c, s, 0.0, 0.0),
        "Y": GroupElement(c, 0.0, s, 0.0),
        "Z": GroupElement(c, 0.0, 0.0, s),
    }[direction]
    return group_mul(g, step)


def flatten_seed(seed) -> tuple[int, ...]:
    """Flatten arbitrarily nested seed tuples into one int sequence, so
    sub-seeds like (base, stage, member) compose freely."""
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    out: tuple[int, ...] = ()
    for part in seed:
        out += flatten_seed(part)
    return out


def haar_sample(rng_seed, count: int) -> list[GroupElement]:
    """Independent Haar-uniform samples, deterministic per seed.

    Normalizes 4-vectors of standard Gaussians; exactly uniform on the
    3-sphere, branch-free.
    """
    if count < 1:
        raise InvalidInput(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(flatten_seed(rng_seed))
    out: list[GroupElement] = []
    while len(out) < count:
        v = rng.standard_normal(4)
        n = np.linalg.norm(v)
        if n < 1e-12:  # probability ~0, but keep the sampler total
            continue
        v = v / n
        v = v / np.linalg.norm(v)  # second pass nails |q| = 1 to <1e-16
        out.append(GroupElement(*map(float, v)))
    return out
