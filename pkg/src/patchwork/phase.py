"""Real phase structures: Viro sign distributions, validation, extension to
all strata, the sign cosheaf, and real Betti numbers.

A phase assigns to each sedentarity-zero facet an affine subspace of sign
vectors parallel to the facet tangent; sign-vector spaces live inside the
full coordinate space indexed by all of GF(2)^m in lexicographic order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .cosheaf import CosheafAssignment, Flavor, assemble_complex, homology_dims, multitangent_space
from .errors import PhaseError
from .gf2 import BitVector, Gf2Matrix, Subspace
from .lattice import vsub
from .tropical import FaceId, TropicalComplex, projection_matrix

SignDistribution = Mapping[int, int]


def lex_index(mask: int, m: int) -> int:
    """Position of a sign vector in the lexicographic ordering of GF(2)^m."""
    return sum(((mask >> i) & 1) << (m - 1 - i) for i in range(m))


def mask_from_lex(index: int, m: int) -> int:
    return sum(((index >> (m - 1 - i)) & 1) << i for i in range(m))


@dataclass(frozen=True)
class AffineSignSpace:
    """An affine subspace base + direction of GF(2)^ambient_dim, stored canonically."""

    ambient_dim: int
    base_mask: int
    direction: Subspace

    @classmethod
    def make(cls, ambient_dim: int, base_mask: int, direction: Subspace) -> "AffineSignSpace":
        return cls(ambient_dim, direction.reduce(base_mask), direction)

    @property
    def base(self) -> BitVector:
        return BitVector(self.ambient_dim, self.base_mask)

    @property
    def dim(self) -> int:
        return self.direction.dim

    def contains(self, mask: int) -> bool:
        return self.direction.member(mask ^ self.base_mask)

    def members(self) -> list[int]:
        return sorted(self.base_mask ^ v for v in self.direction.enumerate_vectors())


@dataclass(eq=False)
class RealPhaseStructure:
    """Affine sign spaces for the sedentarity-zero facets."""

    spaces: dict[FaceId, AffineSignSpace]

    def __post_init__(self) -> None:
        self._extensions: dict[int, "_PhaseExtension"] = {}


class _PhaseExtension:
    """Phase pushed to every stratum facet, with per-face sign sets cached."""

    def __init__(self, x: TropicalComplex, e: RealPhaseStructure) -> None:
        self.facet_spaces: dict[FaceId, AffineSignSpace] = {}
        self.sign_sets: dict[FaceId, tuple[int, ...]] = {}
        n = x.n
        for fid, face in x.faces.items():
            if face.dim != n - len(fid.sedentarity):
                continue
            if not fid.sedentarity:
                space = e.spaces.get(fid)
                if space is None:
                    raise PhaseError(f"phase is missing facet {fid}")
                self.facet_spaces[fid] = space
            else:
                parent = face.parent
                assert parent is not None
                source = e.spaces.get(parent)
                if source is None:
                    raise PhaseError(f"phase is missing facet {parent}")
                proj = projection_matrix(x, frozenset(), frozenset(fid.sedentarity))
                base = proj.apply(source.base_mask)
                direction = Subspace.from_vectors(
                    (proj.apply(v) for v in source.direction.rows), face.ambient_dim
                )
                self.facet_spaces[fid] = AffineSignSpace.make(face.ambient_dim, base, direction)
        for fid in x.face_order:
            members: set[int] = set()
            for sid in x.stratum_facets_above(fid):
                members.update(self.facet_spaces[sid].members())
            self.sign_sets[fid] = tuple(sorted(members))


def _extension(x: TropicalComplex, e: RealPhaseStructure) -> _PhaseExtension:
    key = id(x)
    ext = e._extensions.get(key)
    if ext is None:
        ext = _PhaseExtension(x, e)
        e._extensions[key] = ext
    return ext


def _mod2_mask(vector: tuple[int, ...]) -> int:
    return BitVector.from_bits([v & 1 for v in vector]).mask


def phase_from_signs(x: TropicalComplex, signs: SignDistribution) -> RealPhaseStructure:
    """Phase structure of a Viro sign distribution on the triangulation vertices.

    The facet dual to an edge picks the affine space on which pairing with the
    edge direction is 0 when the endpoint signs differ and 1 when they agree.
    """
    points = x.points
    spaces: dict[FaceId, AffineSignSpace] = {}
    for fid, face in x.faces.items():
        if fid.sedentarity or face.dim != x.n:
            continue
        u_idx, v_idx = fid.dual_cell
        try:
            du, dv = signs[u_idx], signs[v_idx]
        except KeyError as exc:
            raise PhaseError(f"missing sign for point {exc.args[0]}") from exc
        if du not in (-1, 1) or dv not in (-1, 1):
            raise PhaseError("signs must be +1 or -1")
        offset = 0 if du != dv else 1
        d_mask = _mod2_mask(vsub(points[u_idx], points[v_idx]))
        if d_mask == 0:
            raise PhaseError(f"edge of facet {fid} vanishes mod 2")
        if offset == 0:
            base = 0
        else:
            base = d_mask & -d_mask  # lowest coordinate with odd pairing
        spaces[fid] = AffineSignSpace.make(face.ambient_dim, base, face.tangent)
    return RealPhaseStructure(spaces)


def signs_from_phase(x: TropicalComplex, e: RealPhaseStructure) -> dict[int, int]:
    """Propagate signs along dual edges; unique up to one global flip.

    The vertex of smallest index gets +1.  Inconsistent propagation raises,
    which happens exactly when the phase is invalid.
    """
    points = x.points
    edges = []
    for fid, face in x.faces.items():
        if fid.sedentarity or face.dim != x.n:
            continue
        space = e.spaces.get(fid)
        if space is None:
            raise PhaseError(f"phase is missing facet {fid}")
        u_idx, v_idx = fid.dual_cell
        d_mask = _mod2_mask(vsub(points[u_idx], points[v_idx]))
        offset = (space.base_mask & d_mask).bit_count() & 1
        edges.append((u_idx, v_idx, offset))
    adjacency: dict[int, list[tuple[int, int]]] = {}
    for u, v, c in edges:
        adjacency.setdefault(u, []).append((v, c))
        adjacency.setdefault(v, []).append((u, c))
    if not adjacency:
        return {}
    signs: dict[int, int] = {}
    start = min(adjacency)
    signs[start] = 1
    queue = [start]
    while queue:
        u = queue.pop()
        for v, c in adjacency[u]:
            expected = signs[u] * (-1 if c == 0 else 1)
            if v in signs:
                if signs[v] != expected:
                    raise PhaseError("sign propagation is inconsistent: invalid phase")
            else:
                signs[v] = expected
                queue.append(v)
    if set(signs) != set(adjacency):
        raise PhaseError("triangulation edge graph is disconnected")
    return signs


def validate_phase(x: TropicalComplex, e: RealPhaseStructure) -> list[str]:
    """Violations of the phase axioms; empty means valid."""
    violations = []
    n = x.n
    for fid, face in x.faces.items():
        if fid.sedentarity or face.dim != n:
            continue
        space = e.spaces.get(fid)
        if space is None:
            violations.append(f"facet {fid} has no sign space")
            continue
        if space.ambient_dim != face.ambient_dim:
            violations.append(f"facet {fid}: sign space lives in the wrong ambient space")
        elif space.direction != face.tangent:
            violations.append(f"facet {fid}: direction differs from the facet tangent space")
    if violations:
        return violations
    for fid, face in x.faces.items():
        if fid.sedentarity or face.dim != n - 1:
            continue
        facets = x.stratum_facets_above(fid)
        if len(facets) != 3:
            violations.append(f"face {fid} has {len(facets)} adjacent facets, expected 3")
            continue
        members: set[int] = set()
        for sid in facets:
            members.update(e.spaces[sid].members())
        for eps in sorted(members):
            count = sum(1 for sid in facets if e.spaces[sid].contains(eps))
            if count != 2:
                violations.append(
                    f"face {fid}: sign vector {BitVector(face.ambient_dim, eps).bits}"
                    f" lies in {count} facet spaces, expected 2"
                )
    return violations


def extended_sign_set(x: TropicalComplex, e: RealPhaseStructure, fid: FaceId) -> list[BitVector]:
    """All sign vectors incident to a face (union over adjacent same-stratum facets)."""
    ext = _extension(x, e)
    m = x.faces[fid].ambient_dim
    return [BitVector(m, mask) for mask in ext.sign_sets[fid]]


def sign_space(x: TropicalComplex, e: RealPhaseStructure, fid: FaceId) -> Subspace:
    """Span of the incident sign vectors inside GF(2)^(2^m), lex coordinates."""
    ext = _extension(x, e)
    m = x.faces[fid].ambient_dim
    vectors = [1 << lex_index(mask, m) for mask in ext.sign_sets[fid]]
    return Subspace.from_vectors(vectors, 1 << m)


def sign_map(x: TropicalComplex, sid: FaceId, tid: FaceId) -> Gf2Matrix:
    """Cosheaf map on sign coordinates: inclusion, or the linear extension of the projection."""
    if tid not in x.faces[sid].boundary:
        raise ValueError(f"{tid} is not a boundary face of {sid}")
    m_s = x.faces[sid].ambient_dim
    m_t = x.faces[tid].ambient_dim
    if sid.sedentarity == tid.sedentarity:
        return Gf2Matrix.identity(1 << m_s)
    proj = projection_matrix(x, frozenset(sid.sedentarity), frozenset(tid.sedentarity))
    rows = [0] * (1 << m_t)
    for col in range(1 << m_s):
        eps = mask_from_lex(col, m_s)
        image = lex_index(proj.apply(eps), m_t)
        rows[image] |= 1 << col
    return Gf2Matrix(1 << m_t, 1 << m_s, tuple(rows))


def sign_cosheaf(x: TropicalComplex, e: RealPhaseStructure) -> CosheafAssignment:
    spaces = {fid: sign_space(x, e, fid) for fid in x.face_order}
    maps = {}
    for fid, face in x.faces.items():
        for tid in face.boundary:
            maps[(fid, tid)] = sign_map(x, fid, tid)
    return CosheafAssignment(spaces, maps)


def real_betti(x: TropicalComplex, e: RealPhaseStructure, flavor: Flavor | None = None) -> tuple[int, ...]:
    """GF(2) Betti numbers of the patchworked real hypersurface."""
    problems = validate_phase(x, e)
    if problems:
        raise PhaseError("; ".join(problems))
    if flavor is None:
        flavor = "ordinary" if x.is_compact else "borel_moore"
    complex_ = assemble_complex(x, sign_cosheaf(x, e), flavor)
    return homology_dims(complex_)


@dataclass
class DimensionAudit:
    checked: int
    failures: list[str]

    @property
    def ok(self) -> bool:
        return not self.failures


def dimension_audit(x: TropicalComplex, e: RealPhaseStructure) -> DimensionAudit:
    """Per-face size laws: dim of the sign space and its match with the tangent cosheaves."""
    failures = []
    checked = 0
    for fid, face in x.faces.items():
        checked += 1
        k = face.dim
        stratum_dim = x.n - len(fid.sedentarity)
        expected = (1 << (stratum_dim + 1)) - (1 << k)
        got = sign_space(x, e, fid).dim
        if got != expected:
            failures.append(f"face {fid}: dim sign space {got}, expected {expected}")
        total_fp = sum(multitangent_space(x, fid, p).dim for p in range(x.n + 1))
        if total_fp != got:
            failures.append(f"face {fid}: tangent cosheaf dims sum to {total_fp}, sign space has {got}")
    return DimensionAudit(checked, failures)
