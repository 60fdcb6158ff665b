"""Lie groups behind the package's idempotent symbols.

Group arithmetic for the built-in groups, Herz-Schur matrices, the
pointwise Cotlar identity for actions on the line, the codimension-1
Lie-subalgebra boundary criterion, and Fourier <-> Schur transference on
finite cyclic groups.

The projective group is represented only through its fractional-linear
chart near the identity: poles are rejected, and samples stay inside the
branch where the chart action preserves the order of the line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import expm

from .errors import (
    ChartOverflow,
    DegenerateBasis,
    DegenerateGradient,
    ExpressionError,
    GroupMismatch,
    NoConvergence,
)
from .matcore import multiplier_norm_lower_bound
from .multiplier import circulant
from .symbols import parse_expression

__all__ = [
    "GroupElement",
    "real_element",
    "affine_element",
    "sl2_element",
    "so3_element",
    "heisenberg_element",
    "cyclic_element",
    "identity",
    "group_op",
    "group_inv",
    "act_on_line",
    "random_element",
    "herz_schur_matrix",
    "cotlar_pointwise_check",
    "LieAlgebraBasis",
    "bracket_coords",
    "subalgebra_check",
    "sl2_algebra",
    "so3_algebra",
    "heisenberg_algebra",
    "abelian_algebra",
    "affine_algebra",
    "SubalgebraVerdict",
    "boundary_subalgebra_verdict",
    "named_boundary_field",
    "TransferenceResult",
    "fourier_multiplier_norm_finite_cyclic",
]

REAL = "real"
AFFINE = "affine"
SL2R = "sl2r"
SO3 = "so3"
HEISENBERG = "heisenberg"
CYCLIC = "cyclic"

_GROUP_IDS = (REAL, AFFINE, SL2R, SO3, HEISENBERG, CYCLIC)

_CONSTRAINT_TOL = 1e-10


@dataclass(frozen=True)
class GroupElement:
    group_id: str
    coords: np.ndarray

    def __repr__(self):
        return f"GroupElement({self.group_id}, {np.array2string(self.coords, precision=6)})"


def real_element(t: float) -> GroupElement:
    return GroupElement(REAL, np.array([float(t)]))


def affine_element(a: float, b: float) -> GroupElement:
    if not a > 0:
        raise GroupMismatch("affine elements need a > 0")
    return GroupElement(AFFINE, np.array([float(a), float(b)]))


def sl2_element(mat) -> GroupElement:
    m = np.asarray(mat, dtype=float)
    if m.shape != (2, 2) or abs(np.linalg.det(m) - 1.0) > _CONSTRAINT_TOL:
        raise GroupMismatch("sl2r elements are 2x2 with det 1")
    return GroupElement(SL2R, m)


def so3_element(mat) -> GroupElement:
    m = np.asarray(mat, dtype=float)
    if (
        m.shape != (3, 3)
        or np.max(np.abs(m.T @ m - np.eye(3))) > _CONSTRAINT_TOL
        or abs(np.linalg.det(m) - 1.0) > _CONSTRAINT_TOL
    ):
        raise GroupMismatch("so3 elements are 3x3 rotations")
    return GroupElement(SO3, m)


def heisenberg_element(x: float, y: float, z: float) -> GroupElement:
    return GroupElement(HEISENBERG, np.array([float(x), float(y), float(z)]))


def cyclic_element(k: int, n: int) -> GroupElement:
    if n < 1:
        raise GroupMismatch("cyclic group order must be >= 1")
    return GroupElement(CYCLIC, np.array([int(k) % int(n), int(n)]))


def identity(group_id: str, n: Optional[int] = None) -> GroupElement:
    if group_id == REAL:
        return real_element(0.0)
    if group_id == AFFINE:
        return affine_element(1.0, 0.0)
    if group_id == SL2R:
        return GroupElement(SL2R, np.eye(2))
    if group_id == SO3:
        return GroupElement(SO3, np.eye(3))
    if group_id == HEISENBERG:
        return heisenberg_element(0.0, 0.0, 0.0)
    if group_id == CYCLIC:
        if n is None:
            raise GroupMismatch("cyclic identity needs the group order")
        return cyclic_element(0, n)
    raise GroupMismatch(f"unknown group {group_id!r}")


def _same_group(g: GroupElement, h: GroupElement):
    if g.group_id != h.group_id:
        raise GroupMismatch(f"{g.group_id} vs {h.group_id}")
    if g.group_id == CYCLIC and g.coords[1] != h.coords[1]:
        raise GroupMismatch("cyclic elements from different orders")


def group_op(g: GroupElement, h: GroupElement) -> GroupElement:
    _same_group(g, h)
    gid = g.group_id
    if gid == REAL:
        return real_element(g.coords[0] + h.coords[0])
    if gid == AFFINE:
        a1, b1 = g.coords
        a2, b2 = h.coords
        return affine_element(a1 * a2, a1 * b2 + b1)
    if gid in (SL2R, SO3):
        return GroupElement(gid, g.coords @ h.coords)
    if gid == HEISENBERG:
        x1, y1, z1 = g.coords
        x2, y2, z2 = h.coords
        return heisenberg_element(x1 + x2, y1 + y2, z1 + z2 + x1 * y2)
    if gid == CYCLIC:
        n = int(g.coords[1])
        return cyclic_element(int(g.coords[0]) + int(h.coords[0]), n)
    raise GroupMismatch(f"unknown group {gid!r}")


def group_inv(g: GroupElement) -> GroupElement:
    gid = g.group_id
    if gid == REAL:
        return real_element(-g.coords[0])
    if gid == AFFINE:
        a, b = g.coords
        return affine_element(1.0 / a, -b / a)
    if gid == SL2R:
        a, b = g.coords[0]
        c, d = g.coords[1]
        return GroupElement(SL2R, np.array([[d, -b], [-c, a]]))
    if gid == SO3:
        return GroupElement(SO3, g.coords.T.copy())
    if gid == HEISENBERG:
        x, y, z = g.coords
        return heisenberg_element(-x, -y, -z + x * y)
    if gid == CYCLIC:
        n = int(g.coords[1])
        return cyclic_element(-int(g.coords[0]), n)
    raise GroupMismatch(f"unknown group {gid!r}")


def act_on_line(g: GroupElement, t: float, pole_tol: float = 1e-9) -> float:
    """The group's action on the real line.

    Translation for the real line, t -> a t + b for the affine group, and
    the fractional-linear chart for sl2r (ChartOverflow at poles).
    """
    gid = g.group_id
    if gid == REAL:
        return float(t + g.coords[0])
    if gid == AFFINE:
        a, b = g.coords
        return float(a * t + b)
    if gid == SL2R:
        a, b = g.coords[0]
        c, d = g.coords[1]
        den = c * t + d
        if abs(den) < pole_tol * (1.0 + abs(c) + abs(d)):
            raise ChartOverflow(f"fractional-linear pole at t = {t}")
        return float((a * t + b) / den)
    raise GroupMismatch(f"group {gid!r} has no line action")


def random_element(group_id: str, rng, radius: float = 0.4, n: Optional[int] = None) -> GroupElement:
    """Coordinate-box uniform sample (for sl2r: exponential coordinates in
    a branch-safe box)."""
    if group_id == REAL:
        return real_element(rng.uniform(-2.0, 2.0))
    if group_id == AFFINE:
        return affine_element(rng.uniform(0.25, 4.0), rng.uniform(-2.0, 2.0))
    if group_id == SL2R:
        xh, xe, xf = rng.uniform(-radius, radius, size=3)
        return GroupElement(SL2R, _sl2_exp_single(xh, xe, xf))
    if group_id == SO3:
        w = rng.uniform(-math.pi / 2, math.pi / 2, size=3)
        return GroupElement(SO3, expm(_so3_hat(w)))
    if group_id == HEISENBERG:
        x, y, z = rng.uniform(-2.0, 2.0, size=3)
        return heisenberg_element(x, y, z)
    if group_id == CYCLIC:
        if n is None:
            raise GroupMismatch("cyclic sampling needs the group order")
        return cyclic_element(int(rng.integers(0, n)), n)
    raise GroupMismatch(f"unknown group {group_id!r}")


def herz_schur_matrix(group_id: str, m: Callable, grid: Sequence[GroupElement]) -> np.ndarray:
    """Matrix M[i, j] = m(g_i g_j^{-1}) over a finite grid of elements."""
    grid = list(grid)
    k = len(grid)
    out = np.zeros((k, k), dtype=complex)
    invs = [group_inv(g) for g in grid]
    for j in range(k):
        for i in range(k):
            if grid[i].group_id != group_id:
                raise GroupMismatch(f"grid element from {grid[i].group_id!r}")
            out[i, j] = m(group_op(grid[i], invs[j]))
    return out


# ---------------------------------------------------------------------------
# Pointwise Cotlar identity for half-line symbols of line actions
# ---------------------------------------------------------------------------


def _sl2_exp_single(xh, xe, xf):
    x = np.array([[xh, xe], [xf, -xh]])
    disc = xh * xh + xe * xf
    if disc > 1e-12:
        s = math.sqrt(disc)
        return math.cosh(s) * np.eye(2) + (math.sinh(s) / s) * x
    if disc < -1e-12:
        s = math.sqrt(-disc)
        return math.cos(s) * np.eye(2) + (math.sin(s) / s) * x
    return np.eye(2) + x


def _sl2_exp_batch(xh, xe, xf):
    k = xh.shape[0]
    disc = xh * xh + xe * xf
    cosv = np.where(disc >= 0, np.cosh(np.sqrt(np.abs(disc))), np.cos(np.sqrt(np.abs(disc))))
    s = np.sqrt(np.abs(disc))
    with np.errstate(invalid="ignore", divide="ignore"):
        sincv = np.where(
            disc >= 0,
            np.where(s > 1e-8, np.sinh(s) / np.where(s > 1e-8, s, 1.0), 1.0),
            np.where(s > 1e-8, np.sin(s) / np.where(s > 1e-8, s, 1.0), 1.0),
        )
    out = np.zeros((k, 2, 2))
    out[:, 0, 0] = cosv + sincv * xh
    out[:, 0, 1] = sincv * xe
    out[:, 1, 0] = sincv * xf
    out[:, 1, 1] = cosv - sincv * xh
    return out


class _RealBatch:
    @staticmethod
    def sample(k, rng):
        return rng.uniform(-2.0, 2.0, size=k)

    @staticmethod
    def op(g, h):
        return g + h

    @staticmethod
    def inv(g):
        return -g

    @staticmethod
    def act0(g):
        return g


class _AffineBatch:
    @staticmethod
    def sample(k, rng):
        return np.stack([rng.uniform(0.25, 4.0, size=k), rng.uniform(-2.0, 2.0, size=k)], axis=-1)

    @staticmethod
    def op(g, h):
        return np.stack([g[:, 0] * h[:, 0], g[:, 0] * h[:, 1] + g[:, 1]], axis=-1)

    @staticmethod
    def inv(g):
        return np.stack([1.0 / g[:, 0], -g[:, 1] / g[:, 0]], axis=-1)

    @staticmethod
    def act0(g):
        return g[:, 1]


class _Sl2ChartBatch:
    # branch-safe sampling radius: inside it the chart action at the
    # relevant points stays on one order-preserving branch
    RADIUS = 0.4

    @staticmethod
    def sample(k, rng):
        xh, xe, xf = rng.uniform(-_Sl2ChartBatch.RADIUS, _Sl2ChartBatch.RADIUS, size=(3, k))
        return _sl2_exp_batch(xh, xe, xf)

    @staticmethod
    def op(g, h):
        return np.einsum("kij,kjl->kil", g, h)

    @staticmethod
    def inv(g):
        out = np.empty_like(g)
        out[:, 0, 0] = g[:, 1, 1]
        out[:, 0, 1] = -g[:, 0, 1]
        out[:, 1, 0] = -g[:, 1, 0]
        out[:, 1, 1] = g[:, 0, 0]
        return out

    @staticmethod
    def act0(g):
        den = g[:, 1, 1]
        with np.errstate(invalid="ignore", divide="ignore"):
            val = g[:, 0, 1] / den
        return np.where(np.abs(den) < 1e-9, np.nan, val)


_COTLAR_BATCHES = {REAL: _RealBatch, AFFINE: _AffineBatch, SL2R: _Sl2ChartBatch}


def cotlar_pointwise_check(
    group_id: str,
    samples: int = 100_000,
    seed: int = 0,
    band: float = 1e-9,
) -> int:
    """Count violations of the pointwise Cotlar identity.

    With m = chi_{g . 0 > 0}, checks
    m(g^-1) m(g^-1 h) = m(h) m(g^-1) + m(h^-1) m(g^-1 h)
    on seeded samples, rejecting the measure-zero sets alpha = 0, beta = 0,
    alpha = beta (band 1e-9) and chart poles.  Contract: 0 failures.
    """
    if group_id not in _COTLAR_BATCHES:
        raise GroupMismatch(f"group {group_id!r} has no line action")
    batch = _COTLAR_BATCHES[group_id]
    rng = np.random.default_rng(seed)
    failures = 0
    done = 0
    while done < samples:
        k = min(65536, int(1.4 * (samples - done)) + 64)
        g = batch.sample(k, rng)
        h = batch.sample(k, rng)
        alpha = batch.act0(g)
        beta = batch.act0(h)
        gi = batch.inv(g)
        gih = batch.op(gi, h)
        hi = batch.inv(h)
        vals = np.stack(
            [batch.act0(gi), batch.act0(gih), batch.act0(h), batch.act0(hi)]
        )
        valid = (
            np.isfinite(alpha)
            & np.isfinite(beta)
            & np.all(np.isfinite(vals), axis=0)
            & (np.abs(alpha) > band)
            & (np.abs(beta) > band)
            & (np.abs(alpha - beta) > band)
            & np.all(np.abs(vals) > band, axis=0)
        )
        m_gi, m_gih, m_h, m_hi = (vals[:, valid] > 0.0).astype(int)
        take = min(int(valid.sum()), samples - done)
        m_gi, m_gih, m_h, m_hi = (v[:take] for v in (m_gi, m_gih, m_h, m_hi))
        failures += int(np.sum(m_gi * m_gih != m_h * m_gi + m_hi * m_gih))
        done += take
    return failures


# ---------------------------------------------------------------------------
# Lie algebra machinery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LieAlgebraBasis:
    """Structure constants c[i][j][k] with [X_i, X_j] = sum_k c[i][j][k] X_k
    and a candidate subspace given by coordinate vectors (rows)."""

    dim: int
    structure_constants: np.ndarray
    candidate_subspace: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    def __post_init__(self):
        c = np.asarray(self.structure_constants, dtype=float)
        if c.shape != (self.dim, self.dim, self.dim):
            raise ValueError("structure constants must have shape (d, d, d)")
        if np.max(np.abs(c + np.swapaxes(c, 0, 1))) > 1e-10:
            raise ValueError("structure constants are not antisymmetric")
        jac = _jacobi_defect(c)
        if jac > 1e-10:
            raise ValueError(f"Jacobi identity violated by {jac:.3e}")
        object.__setattr__(self, "structure_constants", c)
        object.__setattr__(
            self, "candidate_subspace", np.atleast_2d(np.asarray(self.candidate_subspace, dtype=float))
        )


def _jacobi_defect(c: np.ndarray) -> float:
    # [[x, y], z] components via double contraction of the constants
    t1 = np.einsum("ijm,mkl->ijkl", c, c)  # [[i, j], k]
    defect = t1 + np.einsum("jkm,mil->jkil", c, c).transpose(2, 0, 1, 3) + np.einsum(
        "kim,mjl->kijl", c, c
    ).transpose(1, 2, 0, 3)
    return float(np.max(np.abs(defect))) if c.size else 0.0


def bracket_coords(structure_constants: np.ndarray, u, v) -> np.ndarray:
    """[u, v] in basis coordinates."""
    return np.einsum("i,j,ijk->k", np.asarray(u, dtype=float), np.asarray(v, dtype=float), structure_constants)


def subalgebra_check(basis: LieAlgebraBasis, tol: float = 1e-9) -> bool:
    """True iff the candidate subspace is closed under the bracket.

    Brackets of the (normalized) candidate vectors are projected onto the
    orthogonal complement of the subspace; closure requires every residual
    norm <= tol.  Raises DegenerateBasis for dependent candidates.
    """
    s = np.atleast_2d(np.asarray(basis.candidate_subspace, dtype=float))
    if s.size == 0 or s.shape[0] == 0:
        return True  # the zero subalgebra
    if s.shape[1] != basis.dim:
        raise ValueError("candidate vectors have the wrong dimension")
    sv = np.linalg.svd(s, compute_uv=False)
    if sv[-1] < 1e-12 * sv[0]:
        raise DegenerateBasis("candidate subspace vectors are linearly dependent")
    norms = np.linalg.norm(s, axis=1)
    s = s / norms[:, None]
    q, _ = np.linalg.qr(s.T)  # columns span the subspace
    proj = q @ q.T
    for i in range(s.shape[0]):
        for j in range(i + 1, s.shape[0]):
            w = bracket_coords(basis.structure_constants, s[i], s[j])
            resid = w - proj @ w
            if float(np.linalg.norm(resid)) > tol:
                return False
    return True


def _structure_from_table(dim, entries):
    c = np.zeros((dim, dim, dim))
    for (i, j), vec in entries.items():
        c[i, j, :] = vec
        c[j, i, :] = [-v for v in vec]
    return c


def sl2_algebra(candidate=None) -> LieAlgebraBasis:
    """Basis (H, E, F): [H,E] = 2E, [H,F] = -2F, [E,F] = H."""
    c = _structure_from_table(
        3,
        {
            (0, 1): (0.0, 2.0, 0.0),
            (0, 2): (0.0, 0.0, -2.0),
            (1, 2): (1.0, 0.0, 0.0),
        },
    )
    return LieAlgebraBasis(3, c, candidate if candidate is not None else np.zeros((0, 3)))


def so3_algebra(candidate=None) -> LieAlgebraBasis:
    """Basis (L1, L2, L3): [L_i, L_j] = eps_ijk L_k."""
    c = _structure_from_table(
        3,
        {
            (0, 1): (0.0, 0.0, 1.0),
            (1, 2): (1.0, 0.0, 0.0),
            (2, 0): (0.0, 1.0, 0.0),
        },
    )
    return LieAlgebraBasis(3, c, candidate if candidate is not None else np.zeros((0, 3)))


def heisenberg_algebra(candidate=None) -> LieAlgebraBasis:
    """Basis (X, Y, Z): [X, Y] = Z central."""
    c = _structure_from_table(3, {(0, 1): (0.0, 0.0, 1.0)})
    return LieAlgebraBasis(3, c, candidate if candidate is not None else np.zeros((0, 3)))


def abelian_algebra(n: int, candidate=None) -> LieAlgebraBasis:
    return LieAlgebraBasis(
        n, np.zeros((n, n, n)), candidate if candidate is not None else np.zeros((0, n))
    )


def affine_algebra(candidate=None) -> LieAlgebraBasis:
    """Basis (A, B): [A, B] = B (the ax+b algebra)."""
    c = _structure_from_table(2, {(0, 1): (0.0, 1.0)})
    return LieAlgebraBasis(2, c, candidate if candidate is not None else np.zeros((0, 2)))


# ---------------------------------------------------------------------------
# Boundary subalgebra criterion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _LieGroupMeta:
    dim: int
    basis_mats: tuple
    to_element: Callable
    algebra: Callable


def _so3_hat(w):
    return np.array(
        [[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]]
    )


def _real_meta():
    t = np.array([[0.0, 1.0], [0.0, 0.0]])
    return _LieGroupMeta(
        dim=1,
        basis_mats=(t,),
        to_element=lambda m: real_element(m[0, 1]),
        algebra=lambda: abelian_algebra(1),
    )


def _affine_meta():
    xa = np.array([[1.0, 0.0], [0.0, 0.0]])
    xb = np.array([[0.0, 1.0], [0.0, 0.0]])
    return _LieGroupMeta(
        dim=2,
        basis_mats=(xa, xb),
        to_element=lambda m: affine_element(m[0, 0], m[0, 1]),
        algebra=affine_algebra,
    )


def _sl2_meta():
    h = np.array([[1.0, 0.0], [0.0, -1.0]])
    e = np.array([[0.0, 1.0], [0.0, 0.0]])
    f = np.array([[0.0, 0.0], [1.0, 0.0]])
    return _LieGroupMeta(
        dim=3,
        basis_mats=(h, e, f),
        to_element=lambda m: GroupElement(SL2R, m),
        algebra=sl2_algebra,
    )


def _so3_meta():
    l1 = _so3_hat([1.0, 0.0, 0.0])
    l2 = _so3_hat([0.0, 1.0, 0.0])
    l3 = _so3_hat([0.0, 0.0, 1.0])
    return _LieGroupMeta(
        dim=3,
        basis_mats=(l1, l2, l3),
        to_element=lambda m: GroupElement(SO3, m),
        algebra=so3_algebra,
    )


def _heisenberg_meta():
    x = np.zeros((3, 3))
    x[0, 1] = 1.0
    y = np.zeros((3, 3))
    y[1, 2] = 1.0
    z = np.zeros((3, 3))
    z[0, 2] = 1.0
    return _LieGroupMeta(
        dim=3,
        basis_mats=(x, y, z),
        to_element=lambda m: heisenberg_element(m[0, 1], m[1, 2], m[0, 2]),
        algebra=heisenberg_algebra,
    )


_LIE_GROUPS = {
    REAL: _real_meta,
    AFFINE: _affine_meta,
    SL2R: _sl2_meta,
    SO3: _so3_meta,
    HEISENBERG: _heisenberg_meta,
}


def _embed_matrix(g: GroupElement) -> np.ndarray:
    gid = g.group_id
    if gid == REAL:
        return np.array([[1.0, g.coords[0]], [0.0, 1.0]])
    if gid == AFFINE:
        a, b = g.coords
        return np.array([[a, b], [0.0, 1.0]])
    if gid in (SL2R, SO3):
        return np.array(g.coords, dtype=float)
    if gid == HEISENBERG:
        x, y, z = g.coords
        return np.array([[1.0, x, z], [0.0, 1.0, y], [0.0, 0.0, 1.0]])
    raise GroupMismatch(f"group {gid!r} is not a matrix Lie group here")


def _alg_coords(mat, basis_mats) -> np.ndarray:
    a = np.stack([b.ravel() for b in basis_mats], axis=1)
    sol, *_ = np.linalg.lstsq(a, np.asarray(mat, dtype=float).ravel(), rcond=None)
    return sol


@dataclass
class SubalgebraVerdict:
    passed: bool
    subalgebra_ok: bool
    ad_ok: bool
    hyperplane: np.ndarray
    boundary_residual: float
    ad_defect: float
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "verdict": "PASS" if self.passed else "FAIL",
            "subalgebra_ok": self.subalgebra_ok,
            "ad_ok": self.ad_ok,
            "hyperplane": [list(map(float, row)) for row in np.atleast_2d(self.hyperplane)],
            "boundary_residual": self.boundary_residual,
            "ad_defect": self.ad_defect,
            "notes": self.notes,
        }


def boundary_subalgebra_verdict(
    group_id: str,
    omega_f: Callable[[GroupElement], float],
    g0: GroupElement,
    tol: float = 1e-9,
    ad_samples: int = 32,
    radius: float = 0.1,
    seed: int = 0,
) -> SubalgebraVerdict:
    """Test whether the boundary {omega_f = 0} is locally g0 exp(h) for a
    codimension-1 Lie subalgebra h.

    The tangent hyperplane at g0, pulled to the identity by left
    translation (exponential coordinates), is the only candidate; the
    verdict runs the bracket-closure check on it and verifies
    Ad-invariance at boundary points sampled near the identity of the
    translated domain.
    """
    if group_id not in _LIE_GROUPS:
        raise GroupMismatch(f"group {group_id!r} is not a Lie group here")
    meta = _LIE_GROUPS[group_id]()
    d = meta.dim
    g0m = _embed_matrix(g0)
    base_res = abs(float(omega_f(meta.to_element(g0m))))

    def f_alg(zvec) -> float:
        z = sum(float(c) * b for c, b in zip(zvec, meta.basis_mats))
        return float(omega_f(meta.to_element(g0m @ expm(z))))

    h_fd = 1e-6
    w = np.zeros(d)
    for i in range(d):
        e = np.zeros(d)
        e[i] = h_fd
        w[i] = (f_alg(e) - f_alg(-e)) / (2.0 * h_fd)
    wn = float(np.linalg.norm(w))
    if wn < 1e-10:
        raise DegenerateGradient("omega field has vanishing chart gradient at g0")
    w_hat = w / wn

    if d == 1:
        hyper = np.zeros((0, 1))
    else:
        _, _, vh = np.linalg.svd(w_hat.reshape(1, -1))
        hyper = vh[1:]

    alg = meta.algebra()
    sub_ok = subalgebra_check(
        LieAlgebraBasis(d, alg.structure_constants, hyper), tol
    )

    ad_defect = 0.0
    ad_ok = True
    notes = []
    if hyper.shape[0] > 0:
        rng = np.random.default_rng(seed)
        basis_cols = np.stack([b.ravel() for b in meta.basis_mats], axis=1)
        q, _ = np.linalg.qr(hyper.T)
        proj = q @ q.T
        found = 0
        attempts = 0
        while found < ad_samples and attempts < 20 * ad_samples:
            attempts += 1
            v = rng.uniform(-radius, radius, size=d)
            v = v - np.dot(v, w_hat) * w_hat  # start on the tangent hyperplane

            def fline(t):
                return f_alg(v + t * w_hat)

            try:
                t_star = _newton_scalar(fline, 0.0, 1e-12, 60)
            except NoConvergence:
                continue
            z = sum(float(c) * b for c, b in zip(v + t_star * w_hat, meta.basis_mats))
            x = expm(z)
            x_inv = np.linalg.inv(x)
            for row in hyper:
                hm = sum(float(c) * b for c, b in zip(row, meta.basis_mats))
                ad = x @ hm @ x_inv
                coords = _alg_coords(ad, meta.basis_mats)
                nrm = float(np.linalg.norm(coords))
                if nrm < 1e-14:
                    continue
                resid = coords - proj @ coords
                ad_defect = max(ad_defect, float(np.linalg.norm(resid)) / nrm)
            found += 1
        if found == 0:
            notes.append("no boundary points found near the identity")
            ad_ok = False
        else:
            ad_ok = ad_defect <= max(tol, 1e-9) * 100.0
    passed = bool(sub_ok and ad_ok)
    return SubalgebraVerdict(
        passed=passed,
        subalgebra_ok=bool(sub_ok),
        ad_ok=bool(ad_ok),
        hyperplane=hyper,
        boundary_residual=base_res,
        ad_defect=ad_defect,
        notes=notes,
    )


def _newton_scalar(f, t0, tol, max_iter):
    t = float(t0)
    val = f(t)
    h = 1e-7
    for _ in range(max_iter):
        if abs(val) <= tol:
            return t
        d = (f(t + h) - f(t - h)) / (2.0 * h)
        if d == 0.0 or not np.isfinite(d):
            raise NoConvergence("flat direction in scalar solve")
        t_new = t - val / d
        val_new = f(t_new)
        if not np.isfinite(val_new):
            raise NoConvergence("scalar solve left the chart")
        t, val = t_new, val_new
    if abs(val) <= tol * 100:
        return t
    raise NoConvergence(f"scalar solve stalled at |f| = {abs(val):.3e}")


_GROUP_CHART_VARS = {
    REAL: ("t",),
    AFFINE: ("a", "b"),
    SL2R: ("a", "b", "c", "d"),
    SO3: tuple(f"g{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3)),
    HEISENBERG: ("x", "y", "z"),
}


def expression_boundary_field(group_id: str, expr: str) -> Callable[[GroupElement], float]:
    """Boundary-defining field from an expression in the group's chart
    coordinates (real: t; affine: a, b; sl2r: a, b, c, d; so3: g11..g33;
    heisenberg: x, y, z)."""
    variables = _GROUP_CHART_VARS.get(group_id)
    if variables is None:
        raise GroupMismatch(f"group {group_id!r} has no chart coordinates here")
    fn = parse_expression(expr, variables)

    def field(g: GroupElement) -> float:
        return float(fn(list(np.asarray(g.coords, dtype=float).ravel())))

    return field


def named_boundary_field(group_id: str, name: str) -> Callable[[GroupElement], float]:
    """Predefined boundary-defining fields selectable from configs;
    anything not in the table is parsed as a chart-coordinate expression."""
    fields = {
        (SL2R, "sgn_c"): lambda g: float(g.coords[1, 0]),
        (SL2R, "m0"): lambda g: float(
            g.coords[0, 0] * g.coords[1, 0] + g.coords[0, 1] * g.coords[1, 1]
        ),
        (SO3, "g11"): lambda g: float(g.coords[0, 0]),
        (REAL, "t"): lambda g: float(g.coords[0]),
        (AFFINE, "b"): lambda g: float(g.coords[1]),
        (HEISENBERG, "x"): lambda g: float(g.coords[0]),
    }
    try:
        return fields[(group_id, name)]
    except KeyError:
        try:
            return expression_boundary_field(group_id, name)
        except ExpressionError as exc:
            raise GroupMismatch(
                f"no field {name!r} for group {group_id!r} and it does not parse "
                f"as a chart expression: {exc}"
            ) from exc


# ---------------------------------------------------------------------------
# Fourier <-> Schur transference on finite cyclic groups
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransferenceResult:
    fourier_lb: float
    schur_lb: float
    n: int
    p: float

    @property
    def contract_ok(self) -> bool:
        return self.fourier_lb <= self.schur_lb * (1.0 + 1e-9)


def _vec_lp(v, p) -> float:
    mag = np.abs(v)
    if np.isinf(p):
        return float(mag.max())
    top = float(mag.max())
    if top == 0.0:
        return 0.0
    return top * float(np.sum((mag / top) ** p) ** (1.0 / p))


def fourier_multiplier_norm_finite_cyclic(
    m,
    n: int,
    p,
    budget: int = 8,
    seed: int = 0,
) -> TransferenceResult:
    """Lower bounds for the Fourier multiplier T_m on L_p(Z_N) and the
    Herz-Schur multiplier M(i, j) = m(i - j mod N) on S_p.

    Circulants diagonalize in the Fourier basis, so the Fourier side only
    needs vector norms of DFTs.  The best circulant witness is forwarded
    to the Schur estimator, which makes fourier_lb <= schur_lb hold by
    construction (the Fourier action is the restriction of the Schur
    action to circulants).
    """
    if n < 1 or n > 512:
        raise ValueError("group order must be in [1, 512]")
    mv = np.asarray(m, dtype=complex)
    if mv.shape != (n,):
        raise ValueError(f"symbol must have length {n}")
    p = float(p)

    starts = [np.zeros(n, dtype=complex)]
    starts[0][0] = 1.0  # identity of the group algebra
    shift = np.zeros(n, dtype=complex)
    shift[int(np.argmax(np.abs(mv)))] = 1.0  # best single shift lambda(g)
    starts.append(shift)
    starts.append(np.ones(n, dtype=complex) / n)
    for k in range(budget):
        rng = np.random.default_rng([seed, 211, k])
        starts.append(rng.standard_normal(n) + 1j * rng.standard_normal(n))

    best_ratio, best_c = 0.0, starts[0]
    for c in starts:
        denom = _vec_lp(np.fft.fft(c), p)
        if denom == 0.0:
            continue
        ratio = _vec_lp(np.fft.fft(mv * c), p) / denom
        if ratio > best_ratio:
            best_ratio, best_c = ratio, c

    idx = np.arange(n)
    schur_symbol = mv[(idx[:, None] - idx[None, :]) % n]
    schur_lb = multiplier_norm_lower_bound(
        schur_symbol,
        p,
        budget=budget,
        seed=seed,
        extra_starts=[circulant(best_c)],
    )
    return TransferenceResult(fourier_lb=best_ratio, schur_lb=float(schur_lb), n=n, p=p)
