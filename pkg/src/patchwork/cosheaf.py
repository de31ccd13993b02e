"""Cellular cosheaf chain complexes over GF(2) and their homology.

A cosheaf assigns a subspace of a face-dependent ambient space to every face
and a linear map to every boundary pair; the chain complex in degree q is the
direct sum over q-faces.  The multi-tangent cosheaves (wedge powers of facet
tangents) are provided as the built-in instantiation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Literal, Sequence

from .errors import NonCompactError, PatchworkError
from .gf2 import Gf2Matrix, Subspace, det, kernel_basis, rank
from .tropical import FaceId, TropicalComplex, projection_matrix

Flavor = Literal["ordinary", "borel_moore"]


def p_subsets(m: int, p: int) -> list[tuple[int, ...]]:
    """Lexicographically ordered p-subsets of {0..m-1}; these index wedge coordinates."""
    return list(itertools.combinations(range(m), p))


def wedge_of_basis(vectors: Sequence[int], m: int) -> int:
    """Wedge of mask vectors as a mask over lex-ordered p-subset coordinates."""
    p = len(vectors)
    out = 0
    for idx, subset in enumerate(p_subsets(m, p)):
        rows = []
        for v in vectors:
            mask = 0
            for col, j in enumerate(subset):
                mask |= ((v >> j) & 1) << col
            rows.append(mask)
        if det(Gf2Matrix(p, p, tuple(rows))):
            out |= 1 << idx
    return out


def lambda_p_matrix(mat: Gf2Matrix, p: int) -> Gf2Matrix:
    """P-th exterior power of a GF(2) matrix in lex p-subset coordinates."""
    rows_idx = p_subsets(mat.rows, p)
    cols_idx = p_subsets(mat.cols, p)
    row_masks = []
    for s_out in rows_idx:
        mask = 0
        for j, s_in in enumerate(cols_idx):
            sub = []
            for i in s_out:
                bits = 0
                for col, c in enumerate(s_in):
                    bits |= ((mat.row_masks[i] >> c) & 1) << col
                sub.append(bits)
            if det(Gf2Matrix(p, p, tuple(sub))):
                mask |= 1 << j
        row_masks.append(mask)
    return Gf2Matrix(len(rows_idx), len(cols_idx), tuple(row_masks))


def multitangent_space(x: TropicalComplex, fid: FaceId, p: int) -> Subspace:
    """Span of the p-wedges of adjacent facet tangents, in lex wedge coordinates."""
    if fid not in x.faces:
        raise KeyError(f"unknown face {fid}")
    if not 0 <= p <= x.n:
        raise ValueError(f"p={p} out of range 0..{x.n}")
    face = x.faces[fid]
    ambient = comb(face.ambient_dim, p)
    if p == 0:
        return Subspace.full(1)
    vectors = []
    for sid in x.stratum_facets_above(fid):
        basis = x.faces[sid].tangent.rows
        for subset in itertools.combinations(basis, p):
            vectors.append(wedge_of_basis(subset, face.ambient_dim))
    return Subspace.from_vectors(vectors, ambient)


def multitangent_map(x: TropicalComplex, sid: FaceId, tid: FaceId, p: int) -> Gf2Matrix:
    """Cosheaf map on wedge coordinates: inclusion within a stratum, projection across."""
    if tid not in x.faces[sid].boundary:
        raise ValueError(f"{tid} is not a boundary face of {sid}")
    if sid.sedentarity == tid.sedentarity:
        return Gf2Matrix.identity(comb(x.faces[sid].ambient_dim, p))
    proj = projection_matrix(x, frozenset(sid.sedentarity), frozenset(tid.sedentarity))
    return lambda_p_matrix(proj, p)


@dataclass
class CosheafAssignment:
    """Per-face subspaces plus one ambient-space matrix per boundary pair."""

    spaces: dict[FaceId, Subspace]
    maps: dict[tuple[FaceId, FaceId], Gf2Matrix]


def f_p_cosheaf(x: TropicalComplex, p: int) -> CosheafAssignment:
    spaces = {fid: multitangent_space(x, fid, p) for fid in x.face_order}
    maps = {}
    for fid, face in x.faces.items():
        for tid in face.boundary:
            maps[(fid, tid)] = multitangent_map(x, fid, tid, p)
    return CosheafAssignment(spaces, maps)


def verify_cosheaf(x: TropicalComplex, g: CosheafAssignment) -> list[str]:
    """Containment of images and commutation of all length-2 composition squares."""
    problems = []
    for (sid, tid), mat in g.maps.items():
        space = g.spaces[sid]
        target = g.spaces[tid]
        for v in space.rows:
            if not target.member(mat.apply(v)):
                problems.append(f"map {sid} -> {tid} leaves the target subspace")
                break
    for sid, face in x.faces.items():
        for t1, t2 in itertools.combinations(face.boundary, 2):
            shared = set(x.faces[t1].boundary) & set(x.faces[t2].boundary)
            for rid in shared:
                left = g.maps[(t1, rid)] @ g.maps[(sid, t1)]
                right = g.maps[(t2, rid)] @ g.maps[(sid, t2)]
                for v in g.spaces[sid].rows:
                    if left.apply(v) != right.apply(v):
                        problems.append(f"composition square {sid} -> {{{t1},{t2}}} -> {rid} does not commute")
                        break
    return problems


@dataclass
class ChainComplex:
    """Graded GF(2) boundary matrices with per-face block bookkeeping."""

    n: int
    dims: tuple[int, ...]
    boundaries: tuple[Gf2Matrix, ...]  # boundaries[q] maps C_q -> C_{q-1}; entry 0 is a 0-row matrix
    blocks: dict[int, list[tuple[FaceId, int, int]]]  # q -> (face, offset, local dim)

    def boundary(self, q: int) -> Gf2Matrix:
        return self.boundaries[q]

    def block_offset(self, q: int, fid: FaceId) -> tuple[int, int]:
        for face, offset, dim in self.blocks[q]:
            if face == fid:
                return offset, dim
        raise KeyError(f"face {fid} not in degree {q}")


def assemble_complex(x: TropicalComplex, g: CosheafAssignment, flavor: Flavor = "borel_moore") -> ChainComplex:
    """Assemble the graded boundary matrices; the square of the boundary is checked."""
    if flavor not in ("ordinary", "borel_moore"):
        raise ValueError(f"unknown flavor {flavor!r}")
    if flavor == "ordinary" and not x.is_compact:
        raise NonCompactError("ordinary homology needs a complete fan; use borel_moore")
    blocks: dict[int, list[tuple[FaceId, int, int]]] = {}
    dims = []
    for q in range(x.n + 1):
        offset = 0
        rows = []
        for fid in x.faces_of_dim(q):
            local = g.spaces[fid].dim
            rows.append((fid, offset, local))
            offset += local
        blocks[q] = rows
        dims.append(offset)
    boundaries: list[Gf2Matrix] = [Gf2Matrix.zero(0, dims[0])]
    for q in range(1, x.n + 1):
        columns = []
        for fid in x.faces_of_dim(q):
            space = g.spaces[fid]
            for v in space.rows:
                col = 0
                for tid in x.faces[fid].boundary:
                    w = g.maps[(fid, tid)].apply(v)
                    t_offset, _ = _find_block(blocks[q - 1], tid)
                    col ^= g.spaces[tid].coordinates(w) << t_offset
                columns.append(col)
        boundaries.append(Gf2Matrix.from_columns(columns, dims[q - 1]))
    for q in range(2, x.n + 1):
        if not (boundaries[q - 1] @ boundaries[q]).is_zero():
            raise PatchworkError(f"boundary squared is nonzero in degree {q}: broken cosheaf")
    return ChainComplex(x.n, tuple(dims), tuple(boundaries), blocks)


def _find_block(rows: list[tuple[FaceId, int, int]], fid: FaceId) -> tuple[int, int]:
    for face, offset, dim in rows:
        if face == fid:
            return offset, dim
    raise KeyError(f"face {fid} has no block")


def homology_dims(c: ChainComplex) -> tuple[int, ...]:
    """dim H_q = dim ker boundary_q - rank boundary_{q+1}."""
    out = []
    for q in range(c.n + 1):
        if q == 0:
            kernel = c.dims[0]
        else:
            kernel = c.dims[q] - rank(c.boundaries[q])
        image = rank(c.boundaries[q + 1]) if q + 1 <= c.n else 0
        out.append(kernel - image)
    return tuple(out)


def cycle_space(c: ChainComplex, q: int) -> Subspace:
    if q == 0:
        return Subspace.full(c.dims[0])
    return kernel_basis(c.boundaries[q])


def euler_char(c: ChainComplex) -> int:
    return sum((-1) ** q * d for q, d in enumerate(c.dims))


def tropical_homology_table(x: TropicalComplex, flavor: Flavor = "borel_moore") -> list[tuple[int, ...]]:
    """Row q, column p table of the tangent cosheaf homology dimensions."""
    table = []
    complexes = [assemble_complex(x, f_p_cosheaf(x, p), flavor) for p in range(x.n + 1)]
    homologies = [homology_dims(c) for c in complexes]
    for q in range(x.n + 1):
        table.append(tuple(homologies[p][q] for p in range(x.n + 1)))
    return table


def chi_y_at_minus_one(x: TropicalComplex) -> int:
    """Sum over p of the Euler characteristics of the tangent cosheaf complexes."""
    flavor: Flavor = "ordinary" if x.is_compact else "borel_moore"
    return sum(euler_char(assemble_complex(x, f_p_cosheaf(x, p), flavor)) for p in range(x.n + 1))
