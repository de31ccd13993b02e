"""Lattice polytopes, primitive triangulations, dual fans, and exact integer
linear algebra (Smith diagonalization, saturated kernels, unimodular bases).

All arithmetic is exact; points and directions are tuples of Python ints.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from .errors import FanError, PrimitivityError

Vector = tuple[int, ...]


def vsub(a: Vector, b: Vector) -> Vector:
    return tuple(x - y for x, y in zip(a, b))


def dot(a: Vector, b: Vector) -> int:
    return sum(x * y for x, y in zip(a, b))


def primitive(v: Vector) -> Vector:
    g = 0
    for x in v:
        g = gcd(g, x)
    if g == 0:
        raise ValueError("zero vector has no primitive representative")
    return tuple(x // g for x in v)


# ---------------------------------------------------------------------------
# exact integer matrix routines


def _identity(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def smith_diagonalize(mat: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Diagonalize an integer matrix by unimodular row/column operations.

    Returns (S, U, V) with U @ mat @ V = S and S diagonal (no divisibility
    normalization; the nonzero diagonal entries are the elementary divisors
    up to ordering and multiplication into each other's product).
    """
    s = [list(row) for row in mat]
    nrows = len(s)
    ncols = len(s[0]) if nrows else 0
    u = _identity(nrows)
    v = _identity(ncols)

    def swap_rows(i, j):
        s[i], s[j] = s[j], s[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in s:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, c):
        s[dst] = [x + c * y for x, y in zip(s[dst], s[src])]
        u[dst] = [x + c * y for x, y in zip(u[dst], u[src])]

    def add_col(src, dst, c):
        for row in s:
            row[dst] += c * row[src]
        for row in v:
            row[dst] += c * row[src]

    t = 0
    while t < min(nrows, ncols):
        # find a pivot of minimal absolute value in the trailing submatrix
        best = None
        for i in range(t, nrows):
            for j in range(t, ncols):
                if s[i][j] != 0 and (best is None or abs(s[i][j]) < abs(s[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        clean = True
        for i in range(t + 1, nrows):
            q = s[i][t] // s[t][t]
            if q:
                add_row(t, i, -q)
            if s[i][t]:
                clean = False
        for j in range(t + 1, ncols):
            q = s[t][j] // s[t][t]
            if q:
                add_col(t, j, -q)
            if s[t][j]:
                clean = False
        if clean:
            t += 1
    return s, u, v


def elementary_divisors(mat: Sequence[Sequence[int]]) -> list[int]:
    """Absolute values of the nonzero diagonal of a Smith diagonalization."""
    s, _, _ = smith_diagonalize(mat)
    return [abs(s[i][i]) for i in range(min(len(s), len(s[0]) if s else 0)) if s[i][i] != 0]


def integer_kernel_basis(mat: Sequence[Sequence[int]], ncols: int) -> list[Vector]:
    """A basis of the saturated lattice {x in Z^ncols : mat @ x = 0}."""
    rows = [list(r) for r in mat]
    if not rows:
        return [tuple(1 if i == j else 0 for j in range(ncols)) for i in range(ncols)]
    s, _, v = smith_diagonalize(rows)
    r = len(elementary_divisors(rows))
    cols = []
    for j in range(r, ncols):
        cols.append(tuple(v[i][j] for i in range(ncols)))
    return cols


def lattice_rank(vectors: Sequence[Vector]) -> int:
    if not vectors:
        return 0
    return len(elementary_divisors(list(vectors)))


def is_saturated_basis(vectors: Sequence[Vector]) -> bool:
    """True when the vectors are independent and span a saturated sublattice."""
    if not vectors:
        return True
    divisors = elementary_divisors(list(vectors))
    return len(divisors) == len(vectors) and all(d == 1 for d in divisors)


def int_matrix_inverse(mat: Sequence[Sequence[int]]) -> list[list[int]]:
    """Inverse of a unimodular integer matrix, computed exactly."""
    n = len(mat)
    work = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(mat)]
    for col in range(n):
        pivot = next((i for i in range(col, n) if work[i][col] != 0), None)
        if pivot is None:
            raise ValueError("matrix is singular")
        work[col], work[pivot] = work[pivot], work[col]
        inv = 1 / work[col][col]
        work[col] = [x * inv for x in work[col]]
        for i in range(n):
            if i != col and work[i][col] != 0:
                factor = work[i][col]
                work[i] = [x - factor * y for x, y in zip(work[i], work[col])]
    out = []
    for i in range(n):
        row = []
        for j in range(n, 2 * n):
            x = work[i][j]
            if x.denominator != 1:
                raise ValueError("matrix is not unimodular")
            row.append(int(x))
        out.append(row)
    return out


def extend_to_unimodular_basis(vectors: Sequence[Vector], ambient: int) -> list[Vector]:
    """Extend a saturated independent family to a Z-basis of Z^ambient.

    Deterministic: standard basis vectors are tried in index order.
    """
    base = [tuple(v) for v in vectors]
    if not is_saturated_basis(base):
        raise ValueError("input vectors do not form a saturated independent family")
    for i in range(ambient):
        if len(base) == ambient:
            break
        candidate = base + [tuple(1 if j == i else 0 for j in range(ambient))]
        if is_saturated_basis(candidate):
            base = candidate
    if len(base) != ambient:
        raise ValueError("could not extend to a basis")
    return base


def integral_annihilator_basis(directions: Sequence[Vector], ambient: int) -> list[Vector]:
    """Z-basis of the saturated sublattice orthogonal to all directions.

    Reduction mod 2 of the result spans a space of the same rank whenever the
    ambient geometry is non-singular.
    """
    rows = [list(d) for d in directions]
    return integer_kernel_basis(rows, ambient)


# ---------------------------------------------------------------------------
# polytopes and their dual fans


def affine_rank(points: Sequence[Vector]) -> int:
    if len(points) <= 1:
        return 0
    base = points[0]
    return lattice_rank([vsub(p, base) for p in points[1:]])


def hull_facets(points: Sequence[Vector]) -> list[tuple[Vector, int]]:
    """Facet inequalities (outer primitive normal, offset) of a full-dimensional hull."""
    m = len(points[0])
    if affine_rank(points) != m:
        raise FanError("polytope is not full-dimensional")
    seen: dict[tuple[Vector, int], None] = {}
    for subset in itertools.combinations(range(len(points)), m):
        pts = [points[i] for i in subset]
        diffs = [vsub(p, pts[0]) for p in pts[1:]]
        if lattice_rank(diffs) != m - 1:
            continue
        kernel = integer_kernel_basis(diffs, m)
        if len(kernel) != 1:
            continue
        normal = primitive(kernel[0])
        h = dot(normal, pts[0])
        values = [dot(normal, p) for p in points]
        if max(values) == h and min(values) < h:
            seen[(normal, h)] = None
        elif min(values) == h and max(values) > h:
            seen[(tuple(-x for x in normal), -h)] = None
    return list(seen)


def lattice_volume(points: Sequence[Vector]) -> int:
    """Normalized lattice volume of the convex hull of full-dimensional points."""
    pts = list(dict.fromkeys(points))
    m = len(pts[0])
    if m == 1:
        xs = [p[0] for p in pts]
        return max(xs) - min(xs)
    facets = hull_facets(pts)
    apex = pts[0]
    total = 0
    for normal, h in facets:
        height = h - dot(normal, apex)
        if height == 0:
            continue
        on_facet = [p for p in pts if dot(normal, p) == h]
        total += height * _facet_volume(on_facet, normal)
    return total


def _facet_volume(points: Sequence[Vector], normal: Vector) -> int:
    """Normalized (m-1)-volume of a facet, in its own lattice coordinates."""
    m = len(points[0])
    basis = integer_kernel_basis([list(normal)], m)
    coords = [project_to_basis(vsub(p, points[0]), basis) for p in points]
    if m - 1 == 0:
        return 1
    return lattice_volume(coords)


def project_to_basis(vector: Vector, basis: Sequence[Vector]) -> Vector:
    """Coordinates of vector in a saturated lattice basis (must be integral)."""
    k = len(basis)
    if k == 0:
        if any(vector):
            raise ValueError("vector outside the zero lattice")
        return ()
    work = [[Fraction(basis[j][i]) for j in range(k)] + [Fraction(vector[i])] for i in range(len(vector))]
    solution: list[Fraction | None] = [None] * k
    row = 0
    for col in range(k):
        pivot = next((i for i in range(row, len(work)) if work[i][col] != 0), None)
        if pivot is None:
            continue
        work[row], work[pivot] = work[pivot], work[row]
        inv = 1 / work[row][col]
        work[row] = [x * inv for x in work[row]]
        for i in range(len(work)):
            if i != row and work[i][col] != 0:
                f = work[i][col]
                work[i] = [x - f * y for x, y in zip(work[i], work[row])]
        row += 1
    for i in range(row, len(work)):
        if work[i][k] != 0:
            raise ValueError("vector outside the lattice span")
    # after full reduction the leading columns are unit; read off solutions
    out = []
    for col in range(k):
        value = Fraction(0)
        for i in range(len(work)):
            if work[i][col] == 1 and all(work[i][c] == 0 for c in range(k) if c != col):
                value = work[i][k]
                break
        if value.denominator != 1:
            raise ValueError("vector not in the integer span")
        out.append(int(value))
    return tuple(out)


@dataclass(frozen=True)
class Fan:
    """A subfan of the dual (outer normal) fan of a lattice polytope.

    Cones are sets of ray indices; the zero cone is the empty set.  Offsets
    record max(<ray, x>) over the polytope, so the face of the polytope dual
    to a cone can be recovered from any point set.
    """

    rays: tuple[Vector, ...]
    offsets: tuple[int, ...]
    cones: frozenset[frozenset[int]]

    def dual_face_points(self, cone: frozenset[int], points: Sequence[Vector]) -> tuple[int, ...]:
        """Indices of the points lying on the polytope face dual to the cone."""
        out = []
        for idx, p in enumerate(points):
            if all(dot(self.rays[i], p) == self.offsets[i] for i in cone):
                out.append(idx)
        return tuple(out)

    def cone_dim(self, cone: frozenset[int]) -> int:
        return len(cone)

    def is_complete(self, points: Sequence[Vector]) -> bool:
        """Complete iff every vertex of the polytope is dual to a top cone."""
        m = len(points[0])
        top = [c for c in self.cones if len(c) == m]
        vertex_count = sum(1 for idx in range(len(points)) if _is_vertex(points, idx))
        return len(top) == vertex_count

    def subfan(self, cones: Iterable[frozenset[int]]) -> "Fan":
        chosen: set[frozenset[int]] = {frozenset()}
        for cone in cones:
            if cone not in self.cones:
                raise FanError(f"cone {sorted(cone)} is not a cone of the dual fan")
            for k in range(len(cone) + 1):
                for sub in itertools.combinations(sorted(cone), k):
                    chosen.add(frozenset(sub))
        for cone in chosen:
            if cone not in self.cones:
                raise FanError(f"cone {sorted(cone)} is not a cone of the dual fan")
        return Fan(self.rays, self.offsets, frozenset(chosen))


def _is_vertex(points: Sequence[Vector], idx: int) -> bool:
    facets = hull_facets(points)
    m = len(points[0])
    on = [i for i, (nrm, h) in enumerate(facets) if dot(nrm, points[idx]) == h]
    if len(on) < m:
        return False
    return lattice_rank([facets[i][0] for i in on]) == m


def dual_fan(points: Sequence[Vector]) -> Fan:
    """The complete outer-normal fan of the hull, cones indexed by faces.

    Every cone must be simplicial and unimodular (the hull must be a
    non-singular polytope); otherwise a FanError is raised.
    """
    facets = hull_facets(points)
    rays = tuple(nrm for nrm, _ in facets)
    offsets = tuple(h for _, h in facets)
    facet_sets = []
    for nrm, h in facets:
        facet_sets.append(frozenset(i for i, p in enumerate(points) if dot(nrm, p) == h))
    # face lattice by closing facet point sets under intersection
    faces: set[frozenset[int]] = set(facet_sets)
    frontier = set(facet_sets)
    while frontier:
        new = set()
        for f in frontier:
            for g in facet_sets:
                h2 = f & g
                if h2 and h2 not in faces:
                    new.add(h2)
        faces |= new
        frontier = new
    m = len(points[0])
    cones: set[frozenset[int]] = {frozenset()}
    for face in faces:
        cone = frozenset(i for i, fs in enumerate(facet_sets) if face <= fs)
        cones.add(cone)
        face_dim = affine_rank([points[i] for i in face])
        if len(cone) != m - face_dim:
            raise FanError("polytope is not simple: dual fan is not simplicial")
        divisors = elementary_divisors([list(rays[i]) for i in sorted(cone)]) if cone else []
        if any(d != 1 for d in divisors) or (cone and len(divisors) != len(cone)):
            raise FanError(f"cone {sorted(cone)} is not unimodular: polytope is singular")
    return Fan(rays, offsets, frozenset(cones))


# ---------------------------------------------------------------------------
# triangulations


@dataclass(frozen=True)
class Triangulation:
    """A triangulation of the convex hull of its points.

    Simplices are index tuples into points; cells of every dimension are the
    subsets of simplices.
    """

    points: tuple[Vector, ...]
    simplices: tuple[tuple[int, ...], ...]

    @property
    def ambient_dim(self) -> int:
        return len(self.points[0])

    def cells(self, dim: int) -> list[tuple[int, ...]]:
        """All dim-cells (as sorted index tuples), each a face of some simplex."""
        out: set[tuple[int, ...]] = set()
        for simplex in self.simplices:
            for sub in itertools.combinations(sorted(simplex), dim + 1):
                out.add(sub)
        return sorted(out)

    def cell_points(self, cell: Sequence[int]) -> list[Vector]:
        return [self.points[i] for i in cell]


def normalized_volume(simplex_points: Sequence[Vector]) -> int:
    """Normalized lattice volume of a simplex given by its vertex points.

    For k+1 points this is the product of the elementary divisors of the edge
    matrix (0 when affinely degenerate); for a full-dimensional simplex it is
    |det| of the edge vectors.
    """
    pts = list(simplex_points)
    if len(pts) < 1:
        raise ValueError("empty simplex")
    edges = [list(vsub(p, pts[0])) for p in pts[1:]]
    if not edges:
        return 1
    divisors = elementary_divisors(edges)
    if len(divisors) != len(edges):
        return 0
    vol = 1
    for d in divisors:
        vol *= d
    return vol


def validate_primitive(tri: Triangulation) -> list[str]:
    """Violation messages; empty means the triangulation is primitive and tiles."""
    violations: list[str] = []
    m = tri.ambient_dim
    if affine_rank(tri.points) != m:
        return [f"points do not span a full-dimensional polytope in Z^{m}"]
    used: set[int] = set()
    for simplex in tri.simplices:
        if len(set(simplex)) != m + 1:
            violations.append(f"simplex {sorted(simplex)} does not have {m + 1} distinct vertices")
            continue
        used.update(simplex)
        vol = normalized_volume(tri.cell_points(simplex))
        if vol != 1:
            violations.append(f"simplex {sorted(simplex)} has normalized volume {vol}")
    unused = sorted(set(range(len(tri.points))) - used)
    if unused:
        violations.append(f"points {unused} are not used by any simplex")
    if violations:
        return violations
    total = sum(normalized_volume(tri.cell_points(s)) for s in tri.simplices)
    hull_vol = lattice_volume(list(tri.points))
    if total != hull_vol:
        violations.append(f"simplices have total volume {total} but the hull has volume {hull_vol}")
    violations.extend(_ridge_violations(tri))
    return violations


def _ridge_violations(tri: Triangulation) -> list[str]:
    """Interior ridges must be shared by exactly two simplices, boundary ones by one."""
    from collections import Counter

    m = tri.ambient_dim
    counts: Counter[tuple[int, ...]] = Counter()
    for simplex in tri.simplices:
        for ridge in itertools.combinations(sorted(simplex), m):
            counts[ridge] += 1
    facets = hull_facets(list(tri.points))
    out = []
    for ridge, count in counts.items():
        pts = tri.cell_points(ridge)
        on_boundary = any(all(dot(nrm, p) == h for p in pts) for nrm, h in facets)
        expected = 1 if on_boundary else 2
        if count != expected:
            out.append(f"ridge {list(ridge)} is shared by {count} simplices, expected {expected}")
    return out


def induced_triangulation(tri: Triangulation, fan: Fan, cone: frozenset[int]) -> Triangulation:
    """Restriction of the triangulation to the polytope face dual to a cone.

    The restriction keeps the original point indexing; its top cells are the
    cells of the triangulation whose points all lie on the face.
    """
    face_idx = set(fan.dual_face_points(cone, tri.points))
    if not face_idx:
        raise ValueError("cone has an empty dual face")
    face_dim = affine_rank([tri.points[i] for i in sorted(face_idx)])
    top: set[tuple[int, ...]] = set()
    for simplex in tri.simplices:
        inside = tuple(sorted(i for i in simplex if i in face_idx))
        if len(inside) == face_dim + 1:
            top.add(inside)
    return Triangulation(tri.points, tuple(sorted(top)))


def check_triangulation(tri: Triangulation) -> None:
    """Raise PrimitivityError when validate_primitive reports violations."""
    violations = validate_primitive(tri)
    if violations:
        raise PrimitivityError("; ".join(violations))
