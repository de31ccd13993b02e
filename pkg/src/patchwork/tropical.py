"""Compactified non-singular tropical hypersurfaces as face posets.

A hypersurface dual to a primitive triangulation of its Newton polytope is
stored stratum by stratum: for each fan cone the faces are the duals of the
positive-dimensional cells of the triangulation induced on the dual polytope
face.  Every face carries its sedentarity, dual cell, integer tangent data
reduced mod 2, and boundary/parent relations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import lattice
from .errors import FanError, PrimitivityError
from .gf2 import BitVector, Gf2Matrix, Subspace, rref
from .lattice import Fan, Triangulation, Vector, dot, vsub


@dataclass(frozen=True, order=True)
class FaceId:
    """Canonical face name: sedentarity rays plus the dual triangulation cell."""

    sedentarity: tuple[int, ...]
    dual_cell: tuple[int, ...]

    def __str__(self) -> str:
        sed = ",".join(str(i) for i in self.sedentarity)
        cell = ",".join(str(i) for i in self.dual_cell)
        return f"sed{{{sed}}}/cell{{{cell}}}"

    @classmethod
    def make(cls, sedentarity: Iterable[int], dual_cell: Iterable[int]) -> "FaceId":
        return cls(tuple(sorted(sedentarity)), tuple(sorted(dual_cell)))

    @classmethod
    def parse(cls, text: str) -> "FaceId":
        try:
            sed_part, cell_part = text.split("/")
            assert sed_part.startswith("sed{") and sed_part.endswith("}")
            assert cell_part.startswith("cell{") and cell_part.endswith("}")
            sed = sed_part[4:-1]
            cell = cell_part[5:-1]
            sed_idx = [int(x) for x in sed.split(",")] if sed else []
            cell_idx = [int(x) for x in cell.split(",")] if cell else []
        except (ValueError, AssertionError) as exc:
            raise ValueError(f"malformed face id {text!r}") from exc
        return cls.make(sed_idx, cell_idx)


@dataclass
class Face:
    """One face of the compactified hypersurface."""

    id: FaceId
    dim: int
    ambient_dim: int
    bounded: bool
    tangent: Subspace
    boundary: list[FaceId] = field(default_factory=list)
    parent: FaceId | None = None

    @property
    def tangent_basis(self) -> tuple[BitVector, ...]:
        return self.tangent.basis


class _Stratum:
    """Coordinates of one torus orbit: a chosen complement basis of the cone."""

    def __init__(self, cone: frozenset[int], fan: Fan, ambient: int) -> None:
        self.cone = cone
        rays = [fan.rays[i] for i in sorted(cone)]
        self.m = ambient - len(rays)
        basis = lattice.extend_to_unimodular_basis(rays, ambient)
        self.complement: list[Vector] = basis[len(rays) :]
        rows = [[basis[j][i] for j in range(ambient)] for i in range(ambient)]
        self._inverse = lattice.int_matrix_inverse(rows)
        self._s = len(rays)

    def project(self, v: Vector) -> Vector:
        """Coordinates of v's class in the quotient by the cone's rays."""
        coords = [sum(self._inverse[i][j] * v[j] for j in range(len(v))) for i in range(len(v))]
        return tuple(coords[self._s :])


@dataclass(eq=False)
class TropicalComplex:
    n: int
    triangulation: Triangulation
    fan: Fan
    complete_fan: Fan
    faces: dict[FaceId, Face]
    face_order: list[FaceId]
    strata: dict[frozenset[int], list[FaceId]]
    _stratum_data: dict[frozenset[int], _Stratum]
    _cells_by_stratum: dict[frozenset[int], dict[int, set[tuple[int, ...]]]]

    @property
    def points(self) -> tuple[Vector, ...]:
        return self.triangulation.points

    @property
    def is_compact(self) -> bool:
        return self.fan.is_complete(list(self.points))

    def faces_of_dim(self, q: int) -> list[FaceId]:
        return [fid for fid in self.face_order if self.faces[fid].dim == q]

    def stratum_ambient(self, cone: frozenset[int]) -> int:
        return self._stratum_data[cone].m

    def stratum_facets_above(self, fid: FaceId) -> list[FaceId]:
        """Facets of the same stratum containing the face (duals of the edges of its cell)."""
        cone = frozenset(fid.sedentarity)
        cells = self._cells_by_stratum[cone]
        out = []
        for pair in itertools.combinations(fid.dual_cell, 2):
            if pair in cells.get(1, set()):
                out.append(FaceId.make(fid.sedentarity, pair))
        return sorted(out)

    def project_int(self, cone: frozenset[int], v: Vector) -> Vector:
        return self._stratum_data[cone].project(v)


def _face_key(fid: FaceId) -> tuple:
    return (len(fid.sedentarity), fid.sedentarity, len(fid.dual_cell), fid.dual_cell)


def build_complex(tri: Triangulation, fan: Fan | None = None) -> TropicalComplex:
    """Build the face poset of the hypersurface dual to a primitive triangulation.

    The fan must be a subfan of the dual fan of the Newton polytope; omitting
    it compactifies fully.  Faces unbounded toward cones missing from the fan
    simply have no boundary face there.
    """
    violations = lattice.validate_primitive(tri)
    if violations:
        raise PrimitivityError("; ".join(violations))
    points = list(tri.points)
    ambient = tri.ambient_dim
    n = ambient - 1
    complete = lattice.dual_fan(points)
    if fan is None:
        fan = complete
    else:
        if fan.rays != complete.rays or not fan.cones <= complete.cones:
            raise FanError("fan is not a subfan of the dual fan of the Newton polytope")

    strata_data: dict[frozenset[int], _Stratum] = {}
    cells_by_stratum: dict[frozenset[int], dict[int, set[tuple[int, ...]]]] = {}
    faces: dict[FaceId, Face] = {}
    strata: dict[frozenset[int], list[FaceId]] = {}

    for cone in sorted(fan.cones, key=lambda c: (len(c), sorted(c))):
        data = _Stratum(cone, fan, ambient)
        strata_data[cone] = data
        if cone:
            face_points = fan.dual_face_points(cone, points)
            if lattice.affine_rank([points[i] for i in face_points]) == 0:
                cells_by_stratum[cone] = {}
                strata[cone] = []
                continue
            induced = lattice.induced_triangulation(tri, fan, cone)
            top_cells = induced.simplices
        else:
            top_cells = tri.simplices
        by_dim: dict[int, set[tuple[int, ...]]] = {}
        for cell in top_cells:
            for k in range(1, len(cell)):
                for sub in itertools.combinations(sorted(cell), k + 1):
                    by_dim.setdefault(k, set()).add(sub)
        cells_by_stratum[cone] = by_dim
        strata[cone] = []

    # create faces
    for cone, by_dim in cells_by_stratum.items():
        data = strata_data[cone]
        for cell_dim, cells in by_dim.items():
            for cell in cells:
                fid = FaceId.make(sorted(cone), cell)
                dim = data.m - cell_dim
                tangent = _geometric_tangent(tri, data, cell)
                if tangent.dim != dim:
                    raise PrimitivityError(
                        f"tangent of face {fid} drops rank mod 2: hypersurface is singular"
                    )
                bounded = _is_bounded(complete, cone, cell, points)
                parent = None
                if cone:
                    parent = FaceId.make((), cell)
                faces[fid] = Face(fid, dim, data.m, bounded, tangent, [], parent)
                strata[cone].append(fid)

    # boundary relations
    for fid, face in faces.items():
        cone = frozenset(fid.sedentarity)
        cell = fid.dual_cell
        by_dim = cells_by_stratum[cone]
        cell_dim = len(cell) - 1
        for sup in by_dim.get(cell_dim + 1, set()):
            if set(cell) <= set(sup):
                face.boundary.append(FaceId.make(fid.sedentarity, sup))
        for bigger in fan.cones:
            if len(bigger) == len(cone) + 1 and cone < bigger:
                target_points = set(fan.dual_face_points(bigger, points))
                if set(cell) <= target_points:
                    candidate = FaceId.make(sorted(bigger), cell)
                    if candidate in faces:
                        face.boundary.append(candidate)
        face.boundary.sort(key=_face_key)

    for fid, face in faces.items():
        if face.parent is not None and face.parent not in faces:
            raise PrimitivityError(f"parent face of {fid} is missing")

    order = sorted(faces, key=_face_key)
    complex_ = TropicalComplex(
        n=n,
        triangulation=tri,
        fan=fan,
        complete_fan=complete,
        faces=faces,
        face_order=order,
        strata=strata,
        _stratum_data=strata_data,
        _cells_by_stratum=cells_by_stratum,
    )
    _check_poset(complex_)
    return complex_


def _geometric_tangent(tri: Triangulation, stratum: _Stratum, cell: Sequence[int]) -> Subspace:
    """Mod-2 tangent space of the face dual to a cell, in stratum coordinates."""
    pts = [tri.points[i] for i in cell]
    base = pts[0]
    pairing_rows = []
    for p in pts[1:]:
        d = vsub(p, base)
        pairing_rows.append(tuple(dot(c, d) for c in stratum.complement))
    integral = lattice.integral_annihilator_basis(pairing_rows, stratum.m)
    masks = [BitVector.from_bits([x & 1 for x in v]).mask for v in integral]
    reduced = rref(masks)
    if len(reduced) != len(integral):
        raise PrimitivityError("integral tangent basis drops rank mod 2")
    return Subspace(stratum.m, reduced)


def _is_bounded(complete: Fan, cone: frozenset[int], cell: Sequence[int], points: Sequence[Vector]) -> bool:
    cell_set = set(cell)
    for bigger in complete.cones:
        if len(bigger) == len(cone) + 1 and cone < bigger:
            if cell_set <= set(complete.dual_face_points(bigger, points)):
                return False
    return True


def _check_poset(x: TropicalComplex) -> None:
    for fid, face in x.faces.items():
        for bid in face.boundary:
            if x.faces[bid].dim != face.dim - 1:
                raise PrimitivityError(f"boundary face {bid} of {fid} has wrong dimension")
        if face.parent is not None:
            parent = x.faces[face.parent]
            if parent.dim != face.dim + len(fid.sedentarity):
                raise PrimitivityError(f"parent dimension law fails at {fid}")


def f1_basis(x: TropicalComplex, fid: FaceId) -> Subspace:
    """The tangent cosheaf value at a face: sum of adjacent facet tangents."""
    if fid not in x.faces:
        raise KeyError(f"unknown face {fid}")
    face = x.faces[fid]
    facets = x.stratum_facets_above(fid)
    if not facets:
        return face.tangent
    vectors: list[int] = []
    for sid in facets:
        vectors.extend(x.faces[sid].tangent.rows)
    return Subspace.from_vectors(vectors, face.ambient_dim)


def projection_matrix(x: TropicalComplex, small: frozenset[int], big: frozenset[int]) -> Gf2Matrix:
    """Mod-2 matrix of the quotient between two nested strata, in chosen bases."""
    small = frozenset(small)
    big = frozenset(big)
    if not small <= big:
        raise ValueError("cones are not nested")
    if small not in x._stratum_data or big not in x._stratum_data:
        raise ValueError("cone not in the fan")
    source = x._stratum_data[small]
    target = x._stratum_data[big]
    if small == big:
        return Gf2Matrix.identity(source.m)
    columns = []
    for c in source.complement:
        columns.append(tuple(v & 1 for v in target.project(c)))
    row_masks = []
    for i in range(target.m):
        mask = 0
        for j, col in enumerate(columns):
            mask |= col[i] << j
        row_masks.append(mask)
    return Gf2Matrix(target.m, source.m, tuple(row_masks))


@dataclass(frozen=True)
class EulerCheck:
    face: FaceId
    dims: tuple[int, ...]
    expected: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return self.dims == self.expected


def _poly_mul(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _poly_pow(p: list[int], e: int) -> list[int]:
    out = [1]
    for _ in range(e):
        out = _poly_mul(out, p)
    return out


def expected_fp_dims(n: int, face_dim: int, sed_dim: int) -> tuple[int, ...]:
    """Alternating-sign dimension polynomial for the tangent cosheaves at a face."""
    k = face_dim
    e = n - k + 1 - sed_dim
    one_minus = _poly_pow([1, -1], k)
    bracket = [a - b for a, b in itertools.zip_longest(_poly_pow([1, -1], e), _poly_pow([0, -1], e), fillvalue=0)]
    chi = _poly_mul(one_minus, bracket)
    chi += [0] * (n + 1 - len(chi))
    return tuple(abs(chi[p]) for p in range(n + 1))


def euler_poly_face(x: TropicalComplex, fid: FaceId) -> EulerCheck:
    """Tangent cosheaf dimensions at a face, checked against the closed formula."""
    from .cosheaf import multitangent_space

    face = x.faces[fid]
    dims = tuple(multitangent_space(x, fid, p).dim for p in range(x.n + 1))
    expected = expected_fp_dims(x.n, face.dim, len(fid.sedentarity))
    return EulerCheck(fid, dims, expected)
