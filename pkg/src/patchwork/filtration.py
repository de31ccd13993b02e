"""The augmentation filtration of the sign cosheaf, Viro maps, the spectral
sequence of the filtered chain complex, and maximality diagnostics.

Filtration levels are built facet by facet from translated monomials: with an
anchor in the facet sign space and a basis v1..vd of its direction, the
products of (w_0 + w_{v_i}) over subsets of size >= p span level p.  Subspace
arithmetic in the global chain coordinates then yields every page.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

from .cosheaf import (
    ChainComplex,
    CosheafAssignment,
    Flavor,
    assemble_complex,
    homology_dims,
    multitangent_map,
    multitangent_space,
    tropical_homology_table,
    wedge_of_basis,
)
from .errors import NonCompactError, PatchworkError, PhaseError
from .gf2 import (
    BitVector,
    Gf2Matrix,
    SpanSolver,
    Subspace,
    kernel_basis,
    preimage_subspace,
    subspace_intersection,
    subspace_sum,
)
from .phase import (
    RealPhaseStructure,
    _extension,
    lex_index,
    sign_cosheaf,
    sign_map,
    sign_space,
    validate_phase,
)
from .tropical import FaceId, TropicalComplex


@dataclass(frozen=True)
class MonomialElement:
    """A translated monomial of the facet group algebra.

    Expands in the w-basis as the sum of w over the affine subspace
    anchor + span{direction basis vectors indexed by subset}.
    """

    anchor: BitVector
    subset: tuple[int, ...]
    direction_basis: tuple[BitVector, ...]

    def expand(self) -> int:
        """Mask over the 2^m lex sign coordinates."""
        m = self.anchor.length
        total = 0
        chosen = [self.direction_basis[i].mask for i in self.subset]
        for r in range(len(chosen) + 1):
            for combo in itertools.combinations(chosen, r):
                eps = self.anchor.mask
                for v in combo:
                    eps ^= v
                total ^= 1 << lex_index(eps, m)
        return total


def _facet_monomials(x: TropicalComplex, e: RealPhaseStructure, sid: FaceId) -> list[MonomialElement]:
    ext = _extension(x, e)
    space = ext.facet_spaces.get(sid)
    if space is None:
        raise ValueError(f"{sid} is not a facet of its stratum")
    anchor = BitVector(space.ambient_dim, space.base_mask)
    basis = space.direction.basis
    out = []
    for size in range(len(basis) + 1):
        for subset in itertools.combinations(range(len(basis)), size):
            out.append(MonomialElement(anchor, subset, basis))
    return out


def kp_facet_space(x: TropicalComplex, e: RealPhaseStructure, sid: FaceId, p: int) -> Subspace:
    """Level p of the augmentation filtration on one facet sign space."""
    face = x.faces[sid]
    ambient = 1 << face.ambient_dim
    vectors = [mon.expand() for mon in _facet_monomials(x, e, sid) if len(mon.subset) >= p]
    return Subspace.from_vectors(vectors, ambient)


def kp_space(x: TropicalComplex, e: RealPhaseStructure, fid: FaceId, p: int) -> Subspace:
    """Sum of the facet filtration levels over the same-stratum facets above a face."""
    face = x.faces[fid]
    ambient = 1 << face.ambient_dim
    vectors: list[int] = []
    for sid in x.stratum_facets_above(fid):
        vectors.extend(kp_facet_space(x, e, sid, p).rows)
    return Subspace.from_vectors(vectors, ambient)


def _bv_generators(
    x: TropicalComplex, e: RealPhaseStructure, fid: FaceId, p: int
) -> tuple[list[int], list[int]]:
    """Monomial generators of level p at a face and their wedge images."""
    face = x.faces[fid]
    m = face.ambient_dim
    gens: list[int] = []
    images: list[int] = []
    for sid in x.stratum_facets_above(fid):
        for mon in _facet_monomials(x, e, sid):
            if len(mon.subset) < p:
                continue
            gens.append(mon.expand())
            if len(mon.subset) == p:
                images.append(wedge_of_basis([mon.direction_basis[i].mask for i in mon.subset], m))
            else:
                images.append(0)
    return gens, images


def bv_map(x: TropicalComplex, e: RealPhaseStructure, fid: FaceId, p: int) -> Gf2Matrix:
    """Matrix of the Viro homomorphism from filtration level p to the wedge space.

    Columns are indexed by the canonical basis of the level-p subspace; rows by
    the lex wedge coordinates.  Monomials of degree p map to the wedge of their
    direction vectors, higher degrees map to zero.
    """
    face = x.faces[fid]
    m = face.ambient_dim
    gens, images = _bv_generators(x, e, fid, p)
    level = kp_space(x, e, fid, p)
    solver = SpanSolver(gens)
    # well-definedness: relations among generators must map to relations
    gen_matrix = Gf2Matrix.from_columns(gens, 1 << m)
    for relation in kernel_basis(gen_matrix).rows:
        image = 0
        rel = relation
        while rel:
            i = (rel & -rel).bit_length() - 1
            rel &= rel - 1
            image ^= images[i]
        if image:
            raise PatchworkError(f"Viro map is not well defined at {fid}, p={p}")
    columns = []
    for v in level.rows:
        combo = solver.solve(v)
        if combo is None:
            raise PatchworkError(f"element not in filtration level {p} at {fid}")
        image = 0
        while combo:
            i = (combo & -combo).bit_length() - 1
            combo &= combo - 1
            image ^= images[i]
        columns.append(image)
    return Gf2Matrix.from_columns(columns, comb(m, p))


@dataclass
class ExactnessReport:
    checked_faces: int
    checked_pairs: int
    failures: list[str]

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_exact_commutative(x: TropicalComplex, e: RealPhaseStructure) -> ExactnessReport:
    """Exactness of 0 -> K_{p+1} -> K_p -> F_p -> 0 at every face and
    commutation of the Viro maps with every cosheaf map."""
    failures: list[str] = []
    checked_faces = 0
    levels: dict[tuple[FaceId, int], Subspace] = {}
    bvs: dict[tuple[FaceId, int], Gf2Matrix] = {}
    for fid in x.face_order:
        checked_faces += 1
        for p in range(x.n + 2):
            levels[(fid, p)] = kp_space(x, e, fid, p)
        for p in range(x.n + 1):
            level = levels[(fid, p)]
            nxt = levels[(fid, p + 1)]
            fp = multitangent_space(x, fid, p)
            try:
                bv = bv_map(x, e, fid, p)
            except PatchworkError as exc:
                failures.append(str(exc))
                continue
            bvs[(fid, p)] = bv
            if level.dim - nxt.dim != fp.dim:
                failures.append(
                    f"{fid} p={p}: level dims {level.dim}-{nxt.dim} do not match wedge dim {fp.dim}"
                )
            image = Subspace.from_vectors(bv.columns(), bv.rows)
            if image != fp:
                failures.append(f"{fid} p={p}: Viro map image differs from the wedge cosheaf value")
            kernel_combos = kernel_basis(bv)
            kernel_vectors = []
            for combo in kernel_combos.rows:
                v = 0
                rem = combo
                while rem:
                    i = (rem & -rem).bit_length() - 1
                    rem &= rem - 1
                    v ^= level.rows[i]
                kernel_vectors.append(v)
            kernel = Subspace.from_vectors(kernel_vectors, level.ambient_dim)
            if kernel != nxt:
                failures.append(f"{fid} p={p}: kernel of the Viro map is not the next level")
    checked_pairs = 0
    for sid in x.face_order:
        for tid in x.faces[sid].boundary:
            checked_pairs += 1
            imap = sign_map(x, sid, tid)
            for p in range(x.n + 1):
                src = levels[(sid, p)]
                dst = levels[(tid, p)]
                for v in src.rows:
                    w = imap.apply(v)
                    if not dst.member(w):
                        failures.append(f"{sid}->{tid} p={p}: cosheaf map leaves the filtration level")
                        break
                else:
                    fmap = multitangent_map(x, sid, tid, p)
                    bv_s = bvs[(sid, p)]
                    bv_t = bvs[(tid, p)]
                    for v in src.rows:
                        lhs = bv_t.apply(dst.coordinates(imap.apply(v)))
                        rhs = fmap.apply(bv_s.apply(src.coordinates(v)))
                        if lhs != rhs:
                            failures.append(f"{sid}->{tid} p={p}: Viro square does not commute")
                            break
    return ExactnessReport(checked_faces, checked_pairs, failures)


@dataclass
class FilteredChainComplex:
    """The sign chain complex plus the filtration levels in global coordinates."""

    x: TropicalComplex
    chain: ChainComplex
    cosheaf: CosheafAssignment
    levels: dict[int, list[Subspace]]  # p -> per-degree subspace of C_q

    def level(self, q: int, p: int) -> Subspace:
        if q < 0 or q > self.x.n:
            return Subspace.zero(0)
        if p <= 0:
            return Subspace.full(self.chain.dims[q])
        if p > self.x.n:
            return Subspace.zero(self.chain.dims[q])
        return self.levels[p][q]


def build_filtration(
    x: TropicalComplex, e: RealPhaseStructure, flavor: Flavor | None = None
) -> FilteredChainComplex:
    problems = validate_phase(x, e)
    if problems:
        raise PhaseError("; ".join(problems))
    if flavor is None:
        flavor = "ordinary" if x.is_compact else "borel_moore"
    cosheaf = sign_cosheaf(x, e)
    chain = assemble_complex(x, cosheaf, flavor)
    levels: dict[int, list[Subspace]] = {}
    for p in range(1, x.n + 1):
        per_degree = []
        for q in range(x.n + 1):
            vectors = []
            for fid, offset, _ in chain.blocks[q]:
                space = cosheaf.spaces[fid]
                for v in kp_space(x, e, fid, p).rows:
                    vectors.append(space.coordinates(v) << offset)
            per_degree.append(Subspace.from_vectors(vectors, chain.dims[q]))
        levels[p] = per_degree
    filt = FilteredChainComplex(x, chain, cosheaf, levels)
    for p in range(x.n + 1):
        for q in range(1, x.n + 1):
            image_vectors = [chain.boundaries[q].apply(v) for v in filt.level(q, p).rows]
            target = filt.level(q - 1, p)
            if not all(target.member(w) for w in image_vectors):
                raise PatchworkError(f"filtration level {p} is not a subcomplex in degree {q}")
    return filt


def relative_homology(
    x: TropicalComplex, e: RealPhaseStructure, p: int, flavor: Flavor | None = None
) -> tuple[int, ...]:
    """Homology of the quotient of consecutive filtration levels.

    Computed directly on quotient bases; must agree with the homology of the
    wedge cosheaf complex, otherwise the filtration or the Viro maps are broken.
    """
    if flavor is None:
        flavor = "ordinary" if x.is_compact else "borel_moore"
    if p > x.n or p < 0:
        return tuple(0 for _ in range(x.n + 1))
    reps: dict[FaceId, list[int]] = {}
    solvers: dict[FaceId, tuple[SpanSolver, int]] = {}
    for fid in x.face_order:
        level = kp_space(x, e, fid, p)
        nxt = kp_space(x, e, fid, p + 1)
        chosen: list[int] = []
        span = nxt
        for v in level.rows:
            if not span.member(v):
                chosen.append(v)
                span = subspace_sum(span, Subspace.from_vectors([v], level.ambient_dim))
        reps[fid] = chosen
        solvers[fid] = (SpanSolver(chosen + list(nxt.rows)), len(chosen))
    dims = []
    offsets: dict[int, dict[FaceId, int]] = {}
    for q in range(x.n + 1):
        offset = 0
        offsets[q] = {}
        for fid in x.faces_of_dim(q):
            offsets[q][fid] = offset
            offset += len(reps[fid])
        dims.append(offset)
    boundaries: list[Gf2Matrix] = [Gf2Matrix.zero(0, dims[0])]
    for q in range(1, x.n + 1):
        columns = []
        for sid in x.faces_of_dim(q):
            for v in reps[sid]:
                col = 0
                for tid in x.faces[sid].boundary:
                    w = sign_map(x, sid, tid).apply(v)
                    solver, rep_count = solvers[tid]
                    combo = solver.solve(w)
                    if combo is None:
                        raise PatchworkError(f"boundary image leaves filtration level at {tid}")
                    col ^= (combo & ((1 << rep_count) - 1)) << offsets[q - 1][tid]
                columns.append(col)
        boundaries.append(Gf2Matrix.from_columns(columns, dims[q - 1]))
    for q in range(2, x.n + 1):
        if not (boundaries[q - 1] @ boundaries[q]).is_zero():
            raise PatchworkError("quotient boundary does not square to zero")
    quotient = ChainComplex(x.n, tuple(dims), tuple(boundaries), {})
    table = homology_dims(quotient)
    wedge_complex = assemble_complex(x, _fp_assignment(x, p), flavor)
    expected = homology_dims(wedge_complex)
    if table != expected:
        raise PatchworkError(
            f"relative homology {table} differs from wedge cosheaf homology {expected} at p={p}"
        )
    return table


def _fp_assignment(x: TropicalComplex, p: int) -> CosheafAssignment:
    from .cosheaf import f_p_cosheaf

    return f_p_cosheaf(x, p)


@dataclass
class SpectralReport:
    """Dimensions of every page, differential ranks, limits, and verdicts."""

    n: int
    flavor: str
    pages: dict[int, list[list[int]]]
    ranks: dict[int, dict[tuple[int, int], int]]
    einfty: list[list[int]]
    degeneration_page: int
    betti: tuple[int, ...]
    f_homology: list[tuple[int, ...]]
    e1_matches_f_homology: bool
    euler_by_page: dict[int, int]
    chi_y_minus_one: int
    maximal: bool | None

    @property
    def total_e1(self) -> int:
        return sum(sum(row) for row in self.pages[1])

    @property
    def total_einfty(self) -> int:
        return sum(sum(row) for row in self.einfty)


def spectral_sequence(
    x: TropicalComplex, e: RealPhaseStructure, flavor: Flavor | None = None
) -> SpectralReport:
    """All pages of the spectral sequence of the filtered sign chain complex."""
    if flavor is None:
        flavor = "ordinary" if x.is_compact else "borel_moore"
    filt = build_filtration(x, e, flavor)
    chain = filt.chain
    n = x.n
    last_page = n + 2

    z_cache: dict[tuple[int, int, int], Subspace] = {}

    def zspace(r: int, q: int, p: int) -> Subspace:
        if q < 0 or q > n:
            return Subspace.zero(0)
        key = (r, q, p)
        if key not in z_cache:
            fp = filt.level(q, p)
            if q == 0:
                z_cache[key] = fp
            else:
                target = filt.level(q - 1, p + r)
                pre = preimage_subspace(chain.boundaries[q], target)
                z_cache[key] = subspace_intersection(fp, pre)
        return z_cache[key]

    def boundary_image(space: Subspace, q: int) -> list[int]:
        if q < 1 or q > n:
            return []
        mat = chain.boundaries[q]
        return [mat.apply(v) for v in space.rows]

    def bspace(r: int, q: int, p: int) -> Subspace:
        inner = zspace(r - 1, q, p + 1)
        vectors = list(inner.rows)
        vectors += boundary_image(zspace(r - 1, q + 1, p - r + 1), q + 1)
        return Subspace.from_vectors(vectors, chain.dims[q] if 0 <= q <= n else 0)

    pages: dict[int, list[list[int]]] = {}
    ranks: dict[int, dict[tuple[int, int], int]] = {}
    euler_by_page: dict[int, int] = {}
    graded = [
        [filt.level(q, p).dim - filt.level(q, p + 1).dim for p in range(n + 1)] for q in range(n + 1)
    ]
    euler_by_page[0] = sum((-1) ** q * sum(row) for q, row in enumerate(graded))
    pages[0] = graded
    ranks[0] = {}

    bs: dict[tuple[int, int, int], Subspace] = {}
    for r in range(1, last_page + 1):
        table = [[0] * (n + 1) for _ in range(n + 1)]
        page_ranks: dict[tuple[int, int], int] = {}
        for q in range(n + 1):
            for p in range(n + 1):
                z = zspace(r, q, p)
                b = bspace(r, q, p)
                bs[(r, q, p)] = b
                table[q][p] = z.dim - b.dim
        for q in range(n + 1):
            for p in range(n + 1):
                if q - 1 < 0 or p + r > n:
                    continue
                image = boundary_image(zspace(r, q, p), q)
                target_b = bs[(r, q - 1, p + r)]
                total = Subspace.from_vectors(list(target_b.rows) + image, chain.dims[q - 1])
                drank = total.dim - target_b.dim
                if drank:
                    page_ranks[(q, p)] = drank
        pages[r] = table
        ranks[r] = page_ranks
        euler_by_page[r] = sum((-1) ** q * sum(row) for q, row in enumerate(table))

    # monotonicity and stabilization checks
    for r in range(1, last_page):
        for q in range(n + 1):
            for p in range(n + 1):
                if pages[r + 1][q][p] > pages[r][q][p]:
                    raise PatchworkError("page dimensions increased: spectral sequence bug")
    if ranks[last_page]:
        raise PatchworkError("differentials did not stabilize by the expected page")

    einfty = pages[last_page]
    degeneration = 1
    for r in range(1, last_page + 1):
        if ranks[r]:
            degeneration = r + 1
    betti = homology_dims(chain)
    f_table = tropical_homology_table(x, flavor)
    e1_matches = all(
        pages[1][q][p] == f_table[q][p] for q in range(n + 1) for p in range(n + 1)
    )
    if not e1_matches:
        raise PatchworkError("first page differs from the wedge cosheaf homology table")
    for q in range(n + 1):
        if sum(einfty[q]) != betti[q]:
            raise PatchworkError("limit page does not converge to the sign homology")
    from .cosheaf import chi_y_at_minus_one

    chi_y = chi_y_at_minus_one(x)
    maximal: bool | None = None
    if x.is_compact:
        maximal = all(not ranks[r] for r in ranks)
    return SpectralReport(
        n=n,
        flavor=flavor,
        pages=pages,
        ranks=ranks,
        einfty=einfty,
        degeneration_page=degeneration,
        betti=betti,
        f_homology=f_table,
        e1_matches_f_homology=e1_matches,
        euler_by_page=euler_by_page,
        chi_y_minus_one=chi_y,
        maximal=maximal,
    )


def maximality(x: TropicalComplex, e: RealPhaseStructure) -> bool:
    """First-page degeneration, equivalently the Betti sum attains the page-1 total."""
    if not x.is_compact:
        raise NonCompactError("maximality is defined for compact hypersurfaces only")
    report = spectral_sequence(x, e, "ordinary")
    by_ranks = all(not report.ranks[r] for r in report.ranks)
    by_sums = report.total_e1 == sum(report.betti)
    if by_ranks != by_sums:
        raise PatchworkError("maximality criteria disagree: spectral sequence bug")
    return by_ranks


def _on_lines(n: int, q: int, p: int) -> bool:
    return p == q or p + q == n


@dataclass
class DifferentialRecord:
    page: int
    source: tuple[int, int]
    target: tuple[int, int]
    rank: int
    allowed_shape: bool


@dataclass
class QSharpness:
    q: int
    bound: int
    betti: int
    attained: bool
    culprits: list[DifferentialRecord] = field(default_factory=list)


@dataclass
class SharpnessReport:
    hypotheses_verified: bool
    rows: list[QSharpness]
    differentials: list[DifferentialRecord]
    all_shapes_allowed: bool


def sharpness_report(x: TropicalComplex, e: RealPhaseStructure) -> SharpnessReport:
    """Per-degree sharpness of the Betti bounds and the observed differentials.

    Each nonzero differential is classified against the allowed shapes: both
    its endpoints must lie on the diagonal or the antidiagonal of the page.
    """
    if not x.is_compact:
        raise NonCompactError("sharpness analysis needs a compact hypersurface")
    report = spectral_sequence(x, e, "ordinary")
    n = x.n
    hypotheses = all(
        report.f_homology[q][p] == 0
        for q in range(n + 1)
        for p in range(n + 1)
        if not _on_lines(n, q, p)
    )
    differentials = []
    for r, page_ranks in report.ranks.items():
        for (q, p), drank in page_ranks.items():
            allowed = _on_lines(n, q, p) and _on_lines(n, q - 1, p + r)
            differentials.append(DifferentialRecord(r, (q, p), (q - 1, p + r), drank, allowed))
    rows = []
    for q in range(n + 1):
        bound = sum(report.f_homology[q])
        culprits = [d for d in differentials if d.source[0] == q or d.target[0] == q]
        rows.append(QSharpness(q, bound, report.betti[q], report.betti[q] == bound, culprits))
    for row in rows:
        if row.attained != (not row.culprits):
            raise PatchworkError("sharpness flags disagree with observed differentials")
    return SharpnessReport(
        hypotheses_verified=hypotheses,
        rows=rows,
        differentials=differentials,
        all_shapes_allowed=all(d.allowed_shape for d in differentials) if hypotheses else True,
    )


@dataclass
class EulerReport:
    euler_by_page: dict[int, int]
    euler_einfty: int
    euler_betti: int
    chi_y_minus_one: int

    @property
    def ok(self) -> bool:
        values = set(self.euler_by_page.values())
        values.add(self.euler_einfty)
        values.add(self.euler_betti)
        values.add(self.chi_y_minus_one)
        return len(values) == 1


def euler_invariance(x: TropicalComplex, e: RealPhaseStructure) -> EulerReport:
    """Euler characteristics of every page agree with each other and with the
    alternating Betti sum and the tangent cosheaf total."""
    report = spectral_sequence(x, e)
    einf = sum((-1) ** q * sum(row) for q, row in enumerate(report.einfty))
    betti_sum = sum((-1) ** q * b for q, b in enumerate(report.betti))
    return EulerReport(report.euler_by_page, einf, betti_sum, report.chi_y_minus_one)
