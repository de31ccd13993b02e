"""Plane-curve specialization: cycle bases, twists, the explicit pairing
matrix of the first differential, component counts, and Haas' criterion.

Twists are computed from a phase with exact integer cross products and
cross-checked against the endpoint sign-matching formulation; a disagreement
is reported instead of silently resolved.
"""

from __future__ import annotations

import itertools
from functools import cmp_to_key
from typing import Iterator

from .errors import CurveError, PatchworkError, PhaseError
from .gf2 import Gf2Matrix, kernel_basis
from .lattice import Vector, dot, vsub
from .phase import RealPhaseStructure, _extension, validate_phase
from .tropical import FaceId, TropicalComplex

TwistSet = frozenset[FaceId]


def _require_curve(x: TropicalComplex) -> None:
    if x.n != 1:
        raise CurveError(f"operation needs a curve, got an {x.n}-dimensional hypersurface")


def _det2(a: Vector, b: Vector) -> int:
    return a[0] * b[1] - a[1] * b[0]


def interior_vertex_indices(x: TropicalComplex) -> list[int]:
    """Triangulation points strictly inside the Newton polygon."""
    fan = x.complete_fan
    out = []
    for idx, p in enumerate(x.points):
        if all(dot(fan.rays[i], p) < fan.offsets[i] for i in range(len(fan.rays))):
            out.append(idx)
    return out


def bounded_edges(x: TropicalComplex) -> list[FaceId]:
    _require_curve(x)
    return [
        fid
        for fid in x.face_order
        if not fid.sedentarity and x.faces[fid].dim == 1 and x.faces[fid].bounded
    ]


def edge_direction(x: TropicalComplex, fid: FaceId) -> Vector:
    """Primitive direction of a sedentarity-zero curve edge (sign is arbitrary)."""
    a, b = (x.points[i] for i in fid.dual_cell)
    d = vsub(b, a)
    return (-d[1], d[0])


def _angle_cmp(a: Vector, b: Vector) -> int:
    def half(v: Vector) -> int:
        return 0 if (v[1], v[0]) > (0, 0) else 1

    ha, hb = half(a), half(b)
    if ha != hb:
        return ha - hb
    cross = _det2(a, b)
    return -1 if cross > 0 else (1 if cross < 0 else 0)


def cycle_basis(x: TropicalComplex) -> list[list[FaceId]]:
    """One edge cycle per interior triangulation vertex, ordered around it."""
    _require_curve(x)
    cells1 = {tuple(sorted(c)) for c in x.triangulation.cells(1)}
    cycles = []
    for v in interior_vertex_indices(x):
        neighbors = sorted({u for cell in cells1 for u in cell if v in cell and u != v})
        ordered = sorted(neighbors, key=cmp_to_key(lambda a, b: _angle_cmp(vsub(x.points[a], x.points[v]), vsub(x.points[b], x.points[v]))))
        cycle = [FaceId.make((), (v, u)) for u in ordered]
        for fid in cycle:
            if fid not in x.faces:
                raise PatchworkError(f"cycle edge {fid} missing from the complex")
        cycles.append(cycle)
    return cycles


def _vertex_edges(x: TropicalComplex) -> dict[FaceId, list[FaceId]]:
    out: dict[FaceId, list[FaceId]] = {}
    for fid, face in x.faces.items():
        if fid.sedentarity or face.dim != 1:
            continue
        for tid in face.boundary:
            if not tid.sedentarity:
                out.setdefault(tid, []).append(fid)
    return out


def _outward_direction(x: TropicalComplex, edge: FaceId, vertex: FaceId) -> Vector:
    """Primitive direction of an edge leaving a trivalent vertex."""
    a_idx, b_idx = edge.dual_cell
    third_idx = next(i for i in vertex.dual_cell if i not in edge.dual_cell)
    a, b, c = x.points[a_idx], x.points[b_idx], x.points[third_idx]
    d = vsub(b, a)
    w = (-d[1], d[0])
    if dot(w, vsub(c, a)) > 0:
        w = (-w[0], -w[1])
    return w


def twists_from_phase(x: TropicalComplex, e: RealPhaseStructure) -> TwistSet:
    """Bounded edges whose real lifts change sides, from the phase structure.

    For each sign vector on the edge, the unique continuations at the two
    endpoints either stay within a half plane bordered by the edge or not;
    the answer must not depend on the chosen sign vector.
    """
    _require_curve(x)
    problems = validate_phase(x, e)
    if problems:
        raise PhaseError("; ".join(problems))
    ext = _extension(x, e)
    at_vertex = _vertex_edges(x)
    twisted = set()
    for fid in bounded_edges(x):
        ends = [tid for tid in x.faces[fid].boundary if not tid.sedentarity]
        if len(ends) != 2:
            raise CurveError(f"bounded edge {fid} does not have two finite endpoints")
        u = _outward_direction(x, fid, ends[0])
        space = ext.facet_spaces[fid]
        verdicts = []
        for eps in space.members():
            dets = []
            for vertex in ends:
                others = [g for g in at_vertex[vertex] if g != fid]
                continuations = [g for g in others if ext.facet_spaces[g].contains(eps)]
                if len(continuations) != 1:
                    raise PhaseError(
                        f"sign vector continues into {len(continuations)} edges at {vertex}"
                    )
                dets.append(_det2(u, _outward_direction(x, continuations[0], vertex)))
            verdicts.append(dets[0] * dets[1] < 0)
        if verdicts[0] != verdicts[1]:
            raise CurveError(f"twist of {fid} depends on the sign vector: invalid phase")
        by_dets = verdicts[0]
        # endpoint formulation: same-side continuations must carry the same sign vector
        picks = []
        for vertex in ends:
            others = [g for g in at_vertex[vertex] if g != fid]
            same_side = [g for g in others if _det2(u, _outward_direction(x, g, vertex)) > 0]
            if len(same_side) != 1:
                raise CurveError(f"vertex {vertex} has no unique same-side continuation")
            common = [
                eps for eps in space.members() if ext.facet_spaces[same_side[0]].contains(eps)
            ]
            if len(common) != 1:
                raise PhaseError(f"edge spaces at {vertex} share {len(common)} sign vectors")
            picks.append(common[0])
        by_endpoints = picks[0] != picks[1]
        if by_dets != by_endpoints:
            raise CurveError(
                f"twist formulations disagree on {fid}: half-plane test says {by_dets}, "
                f"endpoint sign vectors say {by_endpoints}"
            )
        if by_dets:
            twisted.add(fid)
    return frozenset(twisted)


def is_admissible(x: TropicalComplex, twists: TwistSet) -> bool:
    """Mod-2 direction balance of the twisted edges along every basis cycle."""
    _require_curve(x)
    for cycle in cycle_basis(x):
        total = (0, 0)
        for fid in cycle:
            if fid in twists:
                d = edge_direction(x, fid)
                total = ((total[0] + d[0]) & 1, (total[1] + d[1]) & 1)
        if total != (0, 0):
            return False
    return True


def d1_matrix(x: TropicalComplex, twists: TwistSet) -> Gf2Matrix:
    """The pairing matrix of the first differential in the cycle bases.

    Entry (i, j) counts twisted edges shared by cycles i and j mod 2; the
    diagonal counts twisted edges on the cycle itself.
    """
    _require_curve(x)
    if not is_admissible(x, twists):
        raise CurveError("twist set is not admissible")
    cycles = cycle_basis(x)
    g = len(cycles)
    edge_sets = [frozenset(c) for c in cycles]
    for i, j in itertools.combinations(range(g), 2):
        if len(edge_sets[i] & edge_sets[j]) > 1:
            raise PatchworkError(f"cycles {i} and {j} share more than one edge")
    rows = []
    for i in range(g):
        mask = 0
        for j in range(g):
            if i == j:
                value = len(edge_sets[i] & twists) & 1
            else:
                value = len(edge_sets[i] & edge_sets[j] & twists) & 1
            mask |= value << j
        rows.append(mask)
    return Gf2Matrix(g, g, tuple(rows))


def component_count(x: TropicalComplex, twists: TwistSet) -> int:
    """Connected components of the real curve: kernel dimension plus one."""
    matrix = d1_matrix(x, twists)
    return kernel_basis(matrix).dim + 1


def exposed_edges(x: TropicalComplex) -> tuple[list[FaceId], list[FaceId]]:
    """Split the bounded edges into exposed ones and the rest.

    An edge is exposed exactly when its dual triangulation edge reaches the
    polygon boundary, i.e. borders an unbounded complement region.
    """
    _require_curve(x)
    interior = set(interior_vertex_indices(x))
    exposed, hidden = [], []
    for fid in bounded_edges(x):
        if all(i in interior for i in fid.dual_cell):
            hidden.append(fid)
        else:
            exposed.append(fid)
    return exposed, hidden


def haas_predicate(x: TropicalComplex, twists: TwistSet) -> bool:
    """Maximality test: no twist on a non-exposed edge, even count on every cycle."""
    _require_curve(x)
    if not is_admissible(x, twists):
        raise CurveError("twist set is not admissible")
    _, hidden = exposed_edges(x)
    if twists & frozenset(hidden):
        return False
    return all(len(frozenset(cycle) & twists) % 2 == 0 for cycle in cycle_basis(x))


def enumerate_admissible(
    x: TropicalComplex, cap: int = 20
) -> Iterator[tuple[TwistSet, int, bool]]:
    """All admissible twist sets with their component counts and Haas verdicts."""
    _require_curve(x)
    edges = bounded_edges(x)
    if len(edges) > cap:
        raise CurveError(f"{len(edges)} bounded edges exceed the cap {cap}")
    for size in range(len(edges) + 1):
        for combo in itertools.combinations(edges, size):
            twists = frozenset(combo)
            if is_admissible(x, twists):
                yield twists, component_count(x, twists), haas_predicate(x, twists)
