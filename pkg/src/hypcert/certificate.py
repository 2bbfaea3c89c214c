"""Certificates: externally checkable records of a verification run.

A certificate stores the combinatorial hash of the input, the edge
partition, outward-rounded decimal enclosures for every edge parameter
and every angle sum, the per-step statuses, and the gimbal loop words.
`recheck` re-parses the decimal intervals (again outward) and re-runs the
realization, angle-sum and gimbal stages from the file alone, so a
verification can be audited without trusting the original process.
"""

from __future__ import annotations

import decimal
import hashlib
import json
from fractions import Fraction
from math import inf, nextafter

from mpmath import libmp

from . import gimbal
from . import verify as vf
from .interval import MPInterval, kernel_for_precision
from .triangulation import serialize, vertex_link_hexagon_complex

__all__ = [
    "CertificateError",
    "certificate_dict",
    "certificate_json",
    "parse_certificate",
    "recheck",
    "triangulation_hash",
]

FORMAT = "hypcert-certificate/1"


class CertificateError(ValueError):
    pass


def triangulation_hash(tri):
    """Hash of the gluing table only; lengths do not enter."""
    text = serialize(tri, lengths=())
    text = text.rsplit("lengths:", 1)[0]
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# -- outward decimal endpoints ------------------------------------------------


def _decimal_down(x, digits):
    with decimal.localcontext() as ctx:
        ctx.prec = digits
        ctx.rounding = decimal.ROUND_FLOOR
        f = Fraction(x)
        return str(decimal.Decimal(int(f.numerator)) / decimal.Decimal(int(f.denominator)))


def _decimal_up(x, digits):
    with decimal.localcontext() as ctx:
        ctx.prec = digits
        ctx.rounding = decimal.ROUND_CEILING
        f = Fraction(x)
        return str(decimal.Decimal(int(f.numerator)) / decimal.Decimal(int(f.denominator)))


def _endpoints(iv, precision):
    if isinstance(iv, MPInterval):
        digits = int(precision * 0.302) + 8
        lo = _decimal_down(Fraction(*libmp.to_rational(iv.lo)), digits)
        hi = _decimal_up(Fraction(*libmp.to_rational(iv.hi)), digits)
        return [lo, hi]
    # binary doubles have finite exact decimal expansions: print those, so
    # the decimal document encloses the binary interval with no slack and
    # re-parses to exactly the same endpoints
    return [str(decimal.Decimal(iv.lo)), str(decimal.Decimal(iv.hi))]


def _float_down(s):
    f = float(s)
    if Fraction(f) > Fraction(s):
        f = nextafter(f, -inf)
    return f


def _float_up(s):
    f = float(s)
    if Fraction(f) < Fraction(s):
        f = nextafter(f, inf)
    return f


def _parse_interval(pair, kernel):
    lo_s, hi_s = pair
    if kernel.precision == 53:
        return kernel.interval(_float_down(lo_s), _float_up(hi_s))
    lo = libmp.from_str(lo_s, kernel.precision, libmp.round_floor)
    hi = libmp.from_str(hi_s, kernel.precision, libmp.round_ceiling)
    return MPInterval(lo, hi, kernel.precision)


# -- building and parsing -----------------------------------------------------


def certificate_dict(tri, result, method, timings=None):
    """Assemble the document for a finished pipeline run."""
    box = result.box
    part = result.partition
    out = {
        "format": FORMAT,
        "status": "VERIFIED" if result.verified else "FAILED",
        "triangulation_sha256": triangulation_hash(tri),
        "tetrahedra": tri.n_tets,
        "edges": tri.m,
        "vertices": tri.o,
        "precision_bits": box.precision if box else 53,
        "method": method,
        "steps": {str(k): str(v) for k, v in sorted(result.statuses.items(), key=lambda kv: str(kv[0]))},
    }
    if not result.verified:
        out["failed_step"] = result.failed_step
    if part is not None:
        out["partition"] = {
            "loose": part.e_sim,
            "kept": part.e_eq,
            "fixed": part.e_fixed,
            "variable": part.e_var,
        }
    if box is not None and box.nu is not None:
        p = box.precision
        out["nu"] = [_endpoints(x, p) for x in box.nu]
        if box.theta is not None:
            out["theta"] = [_endpoints(x, p) for x in box.theta]
    if result.verified and box.loops:
        out["gimbal_loops"] = [loop.serialize() for loop in box.loops]
    if timings is not None:
        out["timings_seconds"] = timings
    return out


def certificate_json(tri, result, method, timings=None):
    doc = certificate_dict(tri, result, method, timings=timings)
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def parse_certificate(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CertificateError(f"not a certificate: {exc}") from exc
    if doc.get("format") != FORMAT:
        raise CertificateError("unknown certificate format")
    return doc


def recheck(tri, doc, precision=None):
    """Re-run the realization, angle-sum and gimbal stages from a parsed
    certificate.  Returns (ok, detail)."""
    if doc.get("status") != "VERIFIED":
        return False, "certificate does not claim verification"
    if doc.get("triangulation_sha256") != triangulation_hash(tri):
        return False, "triangulation hash mismatch"
    if precision is None:
        precision = int(doc.get("precision_bits", 53))
    kernel = kernel_for_precision(precision)
    part = vf.Partition(
        e_sim=list(doc["partition"]["loose"]),
        e_eq=list(doc["partition"]["kept"]),
        e_fixed=list(doc["partition"]["fixed"]),
        e_var=list(doc["partition"]["variable"]),
    )
    part.check(tri.m, tri.o)
    nu = [_parse_interval(pair, kernel) for pair in doc["nu"]]
    box = vf.CertifiedBox(
        nu=nu, theta=None, partition=part, precision=precision
    )
    try:
        box = vf.check_realization_and_angles(tri, box, kernel=kernel)
    except vf.StepFailure as exc:
        return False, f"recheck failed: {exc}"
    labels = gimbal.CocycleLabels(tri, box.nu, data=box._gram_data)
    links = [vertex_link_hexagon_complex(tri, k) for k in range(tri.o)]
    theta_boxes = [box.theta[e] for e in part.e_sim]
    verdict = gimbal.gimbal_lock_check(tri, labels, part.e_sim, theta_boxes,
                                       links=links)
    if not verdict.avoided:
        return False, f"recheck failed: {verdict.reason}"
    return True, "realization, angle sums and gimbal check reverified"
