"""Command line interface: instance ingestion, dispatch, and reporting.

Instances are JSON files naming lattice points, a primitive triangulation,
an optional sign distribution or explicit phase, a compactification, and an
optional twist set.  All numeric output is exact.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from . import curves as curves_mod
from .cosheaf import Flavor, tropical_homology_table
from .errors import CurveError, InstanceError, PatchworkError
from .filtration import (
    euler_invariance,
    maximality,
    sharpness_report,
    spectral_sequence,
    verify_exact_commutative,
)
from .gf2 import BitVector, Subspace
from .lattice import Fan, Triangulation, dual_fan, primitive, validate_primitive
from .phase import (
    AffineSignSpace,
    RealPhaseStructure,
    dimension_audit,
    phase_from_signs,
    real_betti,
    validate_phase,
)
from .report import new_report, render_json, render_table, report_failed
from .tropical import FaceId, TropicalComplex, build_complex

REGULARITY_WARNING = "regularity of the dual subdivision is assumed, not verified"


@dataclass
class Instance:
    path: str
    digest: str
    triangulation: Triangulation
    fan: Fan
    complex: TropicalComplex
    phase: RealPhaseStructure | None
    twists: frozenset[FaceId] | None
    warnings: list[str]

    def meta(self) -> dict[str, Any]:
        x = self.complex
        return {
            "path": self.path,
            "digest": self.digest,
            "ambient_dim": x.triangulation.ambient_dim,
            "hypersurface_dim": x.n,
            "points": len(x.points),
            "simplices": len(x.triangulation.simplices),
            "faces": len(x.faces),
            "compact": x.is_compact,
        }


def _parse_signs(raw: list, count: int) -> dict[int, int]:
    if len(raw) != count:
        raise InstanceError(f"signs list has {len(raw)} entries for {count} points")
    signs = {}
    for i, s in enumerate(raw):
        if s in ("+", "+1", 1):
            signs[i] = 1
        elif s in ("-", "-1", -1):
            signs[i] = -1
        else:
            raise InstanceError(f"sign {s!r} at position {i} is not '+' or '-'")
    return signs


def _parse_compactification(raw: Any, points: list, full: Fan) -> Fan:
    if raw in (None, "newton"):
        return full
    if raw == "torus":
        return full.subfan([])
    if isinstance(raw, list):
        ray_index = {full.rays[i]: i for i in range(len(full.rays))}
        cones = []
        for cone_vectors in raw:
            idxs = []
            for vec in cone_vectors:
                ray = primitive(tuple(int(v) for v in vec))
                if ray not in ray_index:
                    raise InstanceError(f"ray {list(ray)} is not a ray of the dual fan")
                idxs.append(ray_index[ray])
            cones.append(frozenset(idxs))
        return full.subfan(cones)
    raise InstanceError("compactification must be 'newton', 'torus', or a list of cones")


def _parse_phase(raw: dict, x: TropicalComplex) -> RealPhaseStructure:
    spaces: dict[FaceId, AffineSignSpace] = {}
    for key, bits in raw.items():
        fid = FaceId.parse(key)
        if fid not in x.faces:
            raise InstanceError(f"phase names unknown face {key}")
        face = x.faces[fid]
        if fid.sedentarity or face.dim != x.n:
            raise InstanceError(f"phase entry {key} is not a sedentarity-zero facet")
        base = BitVector.from_bits([int(b) for b in bits])
        if base.length != face.ambient_dim:
            raise InstanceError(f"phase base for {key} has wrong length")
        spaces[fid] = AffineSignSpace.make(face.ambient_dim, base.mask, face.tangent)
    return RealPhaseStructure(spaces)


def parse_instance(path: str | Path, assume_regular: bool = False) -> Instance:
    """Load, structurally validate, and cross-check an instance file."""
    path = Path(path)
    try:
        raw_bytes = path.read_bytes()
        data = json.loads(raw_bytes)
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed JSON in {path}: {exc}") from exc
    digest = "sha256:" + hashlib.sha256(raw_bytes).hexdigest()

    try:
        ambient = int(data["ambient_dim"])
        points = [tuple(int(c) for c in p) for p in data["points"]]
        simplices = [tuple(int(i) for i in s) for s in data["triangulation"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceError(f"instance is missing or mangles a required field: {exc}") from exc
    for p in points:
        if len(p) != ambient:
            raise InstanceError(f"point {list(p)} does not have {ambient} coordinates")

    tri = Triangulation(tuple(points), tuple(simplices))
    violations = validate_primitive(tri)
    if violations:
        raise InstanceError("triangulation is not primitive: " + "; ".join(violations))
    full = dual_fan(points)
    fan = _parse_compactification(data.get("compactification"), points, full)
    x = build_complex(tri, fan)

    warnings = [REGULARITY_WARNING]
    if assume_regular:
        warnings.append("--assume-regular acknowledged")

    phase: RealPhaseStructure | None = None
    if data.get("signs") is not None:
        signs = _parse_signs(data["signs"], len(points))
        phase = phase_from_signs(x, signs)
        if data.get("phase") is not None:
            explicit = _parse_phase(data["phase"], x)
            if explicit.spaces != phase.spaces:
                diff = [str(f) for f in phase.spaces if explicit.spaces.get(f) != phase.spaces[f]]
                raise InstanceError(
                    "explicit phase disagrees with the phase of the signs at: " + ", ".join(diff)
                )
    elif data.get("phase") is not None:
        phase = _parse_phase(data["phase"], x)
    if phase is not None:
        problems = validate_phase(x, phase)
        if problems:
            raise InstanceError("invalid phase: " + "; ".join(problems))

    twists: frozenset[FaceId] | None = None
    if data.get("twists") is not None:
        parsed = []
        for key in data["twists"]:
            fid = FaceId.parse(key)
            if fid not in x.faces:
                raise InstanceError(f"twist names unknown face {key}")
            parsed.append(fid)
        twists = frozenset(parsed)
        if x.n == 1:
            allowed = set(curves_mod.bounded_edges(x))
            stray = [str(t) for t in twists if t not in allowed]
            if stray:
                raise InstanceError("twists on unbounded or non-edges: " + ", ".join(stray))
        if phase is not None:
            derived = curves_mod.twists_from_phase(x, phase)
            if derived != twists:
                raise InstanceError(
                    "twist set disagrees with the twists of the supplied phase"
                )
    return Instance(str(path), digest, tri, fan, x, phase, twists, warnings)


def _require_phase(inst: Instance) -> RealPhaseStructure:
    if inst.phase is None:
        raise InstanceError("this command needs signs or a phase in the instance file")
    return inst.phase


def _twists_for(inst: Instance) -> frozenset[FaceId]:
    if inst.twists is not None:
        return inst.twists
    if inst.phase is not None:
        return curves_mod.twists_from_phase(inst.complex, inst.phase)
    raise InstanceError("this command needs twists, signs, or a phase in the instance file")


def _flavor(inst: Instance, borel_moore: bool) -> Flavor:
    if borel_moore or not inst.complex.is_compact:
        return "borel_moore"
    return "ordinary"


def _emit_ids(report: dict[str, Any], x: TropicalComplex) -> None:
    rows = {}
    for fid in x.face_order:
        face = x.faces[fid]
        rows[str(fid)] = f"dim={face.dim} bounded={face.bounded}"
    report["tables"]["face_ids"] = rows


def run(command: str, inst: Instance, args: argparse.Namespace) -> dict[str, Any]:
    """Execute one CLI command against a parsed instance."""
    report = new_report(command, inst.meta(), inst.warnings)
    x = inst.complex
    if getattr(args, "emit_ids", False):
        _emit_ids(report, x)

    if command == "validate":
        report["verdicts"]["primitive"] = True
        report["verdicts"]["fan_subfan"] = True
        if inst.phase is not None:
            report["verdicts"]["phase_valid"] = True
        by_dim: dict[str, int] = {}
        for fid in x.face_order:
            key = f"dim {x.faces[fid].dim}, sedentarity {len(fid.sedentarity)}"
            by_dim[key] = by_dim.get(key, 0) + 1
        report["tables"]["face_counts"] = by_dim
    elif command == "trop-homology":
        flavor = _flavor(inst, getattr(args, "borel_moore", False))
        table = tropical_homology_table(x, flavor)
        report["tables"]["tropical_homology"] = [list(row) for row in table]
        report["verdicts"]["flavor"] = flavor
    elif command == "real-betti":
        phase = _require_phase(inst)
        flavor = _flavor(inst, args.borel_moore)
        report["tables"]["real_betti"] = list(real_betti(x, phase, flavor))
        report["verdicts"]["flavor"] = flavor
    elif command == "spectral":
        phase = _require_phase(inst)
        flavor = _flavor(inst, args.borel_moore)
        sr = spectral_sequence(x, phase, flavor)
        max_page = args.max_page if args.max_page is not None else max(sr.pages)
        report["tables"]["pages"] = {
            str(r): [list(row) for row in sr.pages[r]] for r in sorted(sr.pages) if r <= max_page
        }
        report["tables"]["differential_ranks"] = {
            str(r): {f"q={q},p={p}": v for (q, p), v in sr.ranks[r].items()}
            for r in sorted(sr.ranks)
            if sr.ranks[r] and r <= max_page
        }
        report["tables"]["e_infinity"] = [list(row) for row in sr.einfty]
        report["tables"]["real_betti"] = list(sr.betti)
        report["verdicts"]["degeneration_page"] = sr.degeneration_page
        report["verdicts"]["e1_matches_tropical_homology"] = sr.e1_matches_f_homology
        if sr.maximal is not None:
            report["verdicts"]["maximal"] = sr.maximal
    elif command == "maximal":
        phase = _require_phase(inst)
        verdict = maximality(x, phase)
        sr = spectral_sequence(x, phase, "ordinary")
        report["tables"]["betti_sum"] = sum(sr.betti)
        report["tables"]["page_one_total"] = sr.total_e1
        report["verdicts"]["maximal"] = verdict
    elif command == "audit":
        phase = _require_phase(inst)
        audit = dimension_audit(x, phase)
        report["tables"]["dimension_audit"] = {
            "faces_checked": audit.checked,
            "failures": audit.failures,
        }
        report["verdicts"]["dimension_audit"] = audit.ok
        exact = verify_exact_commutative(x, phase)
        report["tables"]["exactness"] = {
            "faces_checked": exact.checked_faces,
            "pairs_checked": exact.checked_pairs,
            "failures": exact.failures,
        }
        report["verdicts"]["exact_commutative"] = exact.ok
        euler = euler_invariance(x, phase)
        report["tables"]["euler"] = {
            "by_page": {str(r): v for r, v in euler.euler_by_page.items()},
            "e_infinity": euler.euler_einfty,
            "betti_alternating_sum": euler.euler_betti,
            "chi_y_at_minus_one": euler.chi_y_minus_one,
        }
        report["verdicts"]["euler_invariance"] = euler.ok
        if x.is_compact:
            sharp = sharpness_report(x, phase)
            report["tables"]["sharpness"] = {
                f"q={row.q}": f"bound={row.bound} betti={row.betti} attained={row.attained}"
                for row in sharp.rows
            }
            report["verdicts"]["vanishing_hypotheses"] = sharp.hypotheses_verified
            report["verdicts"]["differential_shapes_allowed"] = sharp.all_shapes_allowed
    elif command == "curve":
        _run_curve(report, inst, args)
    else:
        raise InstanceError(f"unknown command {command}")
    return report


def _run_curve(report: dict[str, Any], inst: Instance, args: argparse.Namespace) -> None:
    x = inst.complex
    if x.n != 1:
        raise CurveError(f"curve commands need a plane curve, got dimension {x.n}")
    sub = args.subcommand
    if sub == "twists":
        twists = curves_mod.twists_from_phase(x, _require_phase(inst))
        report["tables"]["twists"] = sorted(str(t) for t in twists)
        report["tables"]["count"] = len(twists)
    elif sub == "admissible":
        twists = _twists_for(inst)
        report["tables"]["twists"] = sorted(str(t) for t in twists)
        report["verdicts"]["admissible"] = curves_mod.is_admissible(x, twists)
    elif sub == "components":
        twists = _twists_for(inst)
        matrix = curves_mod.d1_matrix(x, twists)
        report["tables"]["pairing_matrix"] = [list(row) for row in matrix.entries]
        report["tables"]["components"] = curves_mod.component_count(x, twists)
    elif sub == "haas":
        twists = _twists_for(inst)
        exposed, hidden = curves_mod.exposed_edges(x)
        report["tables"]["non_exposed_edges"] = sorted(str(t) for t in hidden)
        report["tables"]["twists_on_non_exposed"] = sorted(
            str(t) for t in twists & frozenset(hidden)
        )
        report["verdicts"]["haas_maximal"] = curves_mod.haas_predicate(x, twists)
    elif sub == "enumerate":
        cap = args.cap
        total = 0
        by_components: dict[str, int] = {}
        haas_count = 0
        maximal_count = 0
        genus = len(curves_mod.cycle_basis(x))
        for _, comp, haas in curves_mod.enumerate_admissible(x, cap):
            total += 1
            by_components[str(comp)] = by_components.get(str(comp), 0) + 1
            if haas:
                haas_count += 1
            if comp == genus + 1:
                maximal_count += 1
        report["tables"]["admissible_total"] = total
        report["tables"]["by_components"] = by_components
        report["tables"]["haas_positive"] = haas_count
        report["tables"]["maximal_component_count"] = maximal_count
        report["verdicts"]["haas_matches_maximal"] = haas_count == maximal_count
    else:
        raise InstanceError(f"unknown curve subcommand {sub}")


def _threads_from_env() -> int:
    raw = os.environ.get("PATCHWORK_THREADS")
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError as exc:
        raise InstanceError(f"PATCHWORK_THREADS={raw!r} is not an integer") from exc
    if value < 1:
        raise InstanceError("PATCHWORK_THREADS must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="patchwork",
        description="Homology of patchworked real tropical hypersurfaces over GF(2)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, curve: bool = False) -> None:
        if curve:
            p.add_argument("subcommand", choices=["twists", "admissible", "components", "haas", "enumerate"])
        p.add_argument("instance", help="path to the instance JSON file")
        p.add_argument("--format", choices=["json", "table"], default="table")
        p.add_argument("--assume-regular", action="store_true", help="acknowledge that regularity is assumed")
        p.add_argument("--emit-ids", action="store_true", help="list every face id of the complex")

    for name in ["validate", "trop-homology", "maximal", "audit"]:
        common(sub.add_parser(name))
    p_real = sub.add_parser("real-betti")
    common(p_real)
    p_real.add_argument("--borel-moore", action="store_true")
    p_spec = sub.add_parser("spectral")
    common(p_spec)
    p_spec.add_argument("--borel-moore", action="store_true")
    p_spec.add_argument("--max-page", type=int, default=None)
    p_curve = sub.add_parser("curve")
    common(p_curve, curve=True)
    p_curve.add_argument("--cap", type=int, default=20)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _threads_from_env()
    try:
        inst = parse_instance(args.instance, getattr(args, "assume_regular", False))
        report = run(args.command, inst, args)
    except PatchworkError as exc:
        report = new_report(args.command, {"path": args.instance}, [])
        report["errors"].append(str(exc))
    text = render_json(report) if args.format == "json" else render_table(report)
    sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return 1 if report_failed(report) else 0


if __name__ == "__main__":
    sys.exit(main())
