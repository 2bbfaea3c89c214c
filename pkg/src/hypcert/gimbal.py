"""Rotation cocycles on doubly truncated simplices and the gimbal test.

The short and middle edges of a doubly truncated simplex carry SO(3)
labels computed from the simplex angles:

* a middle edge starting at the corner permutation s gets the involution
  ``[[-cos e, 0, sin e], [0, -1, 0], [sin e, 0, cos e]]`` with
  e the vertex angle at s(0) in the triangle s(0)s(2)s(1);
* a short edge starting at s gets the z-rotation by the dihedral angle
  between faces s(2) and s(3), taken positively when s is an odd
  permutation and negatively when s is even.

The sign rule extends the explicitly known labels by even relabelings;
it is not assumed but enforced: `check_cocycle_closure` verifies that the
label product around every 2-cell of the complex encloses the identity,
and the builders refuse to proceed on a closure failure.

On each vertex link, removing the prism-end polygons of the edges whose
angle sums are only approximately full turns leaves a surface with
boundary.  A gimbal loop is a cyclic word in link edges plus one letter
per removed polygon; substituting z-rotations for the polygon letters
gives the gimbal matrix, and the upper-triangular entries of the per-link
matrices assemble the gimbal function g.  Invertibility of the interval
Jacobian [Dg(K)] over the box K of angle-sum enclosures upgrades the
approximate edge equations to exact ones.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from . import scalars as sc
from .interval import IntervalMatrix, interval_matrix_invertible
from .triangulation import (
    LOCAL_EDGES,
    TriangulationError,
    compose,
    hexagon_cycle,
    perm_parity,
    vertex_link_hexagon_complex,
)

__all__ = [
    "CocycleLabels",
    "GimbalLoop",
    "GimbalLoopError",
    "build_gimbal_loop",
    "validate_gimbal_loop",
    "gimbal_matrix",
    "gimbal_matrix_derivatives",
    "assemble_gimbal_jacobian",
    "gimbal_lock_check",
    "prism_holonomy",
    "polygon_angle_sum",
    "check_cocycle_closure",
    "probe_partitions",
    "rotation_matrix",
    "rotation_matrix_derivative",
    "mat3_mul",
    "mat3_identity",
    "edge_end_directions",
]


class GimbalLoopError(ValueError):
    pass


# ---------------------------------------------------------------------------
# midpoint-radius enclosures for long rotation products
#
# Entrywise interval products of hundreds of near-rotation matrices blow
# up exponentially (the entry 1-norms of a rotation exceed 1).  A ball
# (float midpoint matrix, spectral-norm radius) fixes this: rotation
# midpoints have operator norm one up to rounding, so radii only grow
# additively along a product.  All radius bookkeeping is done in outward
# interval arithmetic, so a ball rigorously encloses its matrix set.
# ---------------------------------------------------------------------------

from .interval import Interval as _FI


class BallMatrix3:
    """{ mid + E : ||E||_2 <= rad }, entrywise |E_ij| <= rad as well."""

    __slots__ = ("mid", "rad")

    def __init__(self, mid, rad):
        self.mid = mid
        self.rad = rad


def _iv_float(x):
    if hasattr(x, "lo_float"):
        return _FI(x.lo_float(), x.hi_float())
    if hasattr(x, "lo"):
        return x
    return _FI(x, x)


def _spec_bound(radii):
    """Rigorous upper bound for the spectral norm of a nonnegative 3x3
    matrix of floats: sqrt(max row sum * max col sum)."""
    rows = []
    cols = [None, None, None]
    for i in range(3):
        acc = _FI.point(radii[i][0]) + radii[i][1] + radii[i][2]
        rows.append(acc.hi)
        for j in range(3):
            c = _FI.point(radii[i][j])
            cols[j] = c if cols[j] is None else cols[j] + c
    r = max(rows)
    c = max(x.hi for x in cols)
    return (_FI.point(r) * _FI.point(c)).sqrt().hi


def _norm_bound(mid):
    """Rigorous upper bound for ||mid||_2 via max row sum of |mid^T mid|."""
    worst = 0.0
    for i in range(3):
        acc = None
        for j in range(3):
            entry = None
            for k in range(3):
                term = _FI.point(mid[k][i]) * _FI.point(mid[k][j])
                entry = term if entry is None else entry + term
            entry = entry.abs()
            acc = entry if acc is None else acc + entry
        worst = max(worst, acc.hi)
    return _FI.point(worst).sqrt().hi


def ball_from_interval_mat3(m):
    """Enclose an entrywise-interval 3x3 matrix in a ball."""
    mid = []
    radii = []
    for i in range(3):
        mid_row = []
        rad_row = []
        for j in range(3):
            iv = _iv_float(m[i][j])
            c = iv.mid()
            err = (iv - c).abs()
            mid_row.append(c)
            rad_row.append(err.hi)
        mid.append(tuple(mid_row))
        radii.append(rad_row)
    return BallMatrix3(tuple(mid), _spec_bound(radii))


def ball_identity():
    return BallMatrix3(((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)), 0.0)


def ball_mul(a, b):
    """Product enclosure: rigorous midpoint product plus norm cross terms."""
    prod = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            acc = None
            for k in range(3):
                term = _FI.point(a.mid[i][k]) * _FI.point(b.mid[k][j])
                acc = term if acc is None else acc + term
            prod[i][j] = acc
    mid = tuple(
        tuple(prod[i][j].mid() for j in range(3)) for i in range(3)
    )
    radii = [
        [(prod[i][j] - mid[i][j]).abs().hi for j in range(3)] for i in range(3)
    ]
    r0 = _spec_bound(radii)
    na = _norm_bound(a.mid)
    nb = _norm_bound(b.mid)
    rad = (
        _FI.point(r0)
        + _FI.point(na) * b.rad
        + _FI.point(a.rad) * nb
        + _FI.point(a.rad) * b.rad
    ).hi
    return BallMatrix3(mid, rad)


def ball_add(a, b):
    sums = [
        [_FI.point(a.mid[i][j]) + b.mid[i][j] for j in range(3)] for i in range(3)
    ]
    mid = tuple(tuple(s.mid() for s in row) for row in sums)
    radii = [
        [(sums[i][j] - mid[i][j]).abs().hi for j in range(3)] for i in range(3)
    ]
    rad = (_FI.point(_spec_bound(radii)) + a.rad + b.rad).hi
    return BallMatrix3(mid, rad)


def ball_entries(ball, kernel):
    """Entrywise interval enclosure of a ball."""
    r = ball.rad
    out = []
    for i in range(3):
        row = []
        for j in range(3):
            c = kernel.point(ball.mid[i][j])
            row.append(c + kernel.interval(-r, r))
        out.append(tuple(row))
    return tuple(out)


class _BallKernelType:
    precision = 53

    @staticmethod
    def point(x):
        return _FI.point(x)

    @staticmethod
    def interval(lo, hi):
        return _FI(lo, hi)


_BALL_KERNEL = _BallKernelType()


# ---------------------------------------------------------------------------
# generic 3x3 helpers (work for floats and intervals alike)
# ---------------------------------------------------------------------------


def mat3_mul(a, b):
    return tuple(
        tuple(
            a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j]
            for j in range(3)
        )
        for i in range(3)
    )


def mat3_identity(one, zero):
    return ((one, zero, zero), (zero, one, zero), (zero, zero, one))


def rotation_matrix(cos_w, sin_w, one, zero):
    """Rotation about the z-axis from precomputed cos/sin."""
    return (
        (cos_w, -sin_w, zero),
        (sin_w, cos_w, zero),
        (zero, zero, one),
    )


def rotation_matrix_derivative(w, zero):
    """d/dw of the z-rotation by w."""
    c = sc.cos(w)
    s = sc.sin(w)
    return ((-s, -c, zero), (c, -s, zero), (zero, zero, zero))


def middle_edge_matrix(cos_e, sin_e, one, zero):
    return (
        (-cos_e, zero, sin_e),
        (zero, -one, zero),
        (sin_e, zero, cos_e),
    )


# ---------------------------------------------------------------------------
# labels
# ---------------------------------------------------------------------------


class CocycleLabels:
    """SO(3) labels for the short and middle edges of every simplex.

    Generic over the scalar type of `params` (floats or intervals).  One
    matrix is computed per canonical edge token, so identified edges of
    glued simplices share their label bit for bit.
    """

    def __init__(self, tri, params, data=None):
        self.tri = tri
        self.params = params
        if data is None:
            data = [geo.simplex_data(tri, params, t) for t in range(tri.n_tets)]
        self.data = data
        sample = params[0]
        self.one = geo._point_like(sample, 1.0)
        self.zero = geo._point_like(sample, 0.0)
        self._gamma_cs = {}  # (tet, a, b) undirected -> (cos, sin) of dihedral
        self._beta_cache = {}  # canonical beta token -> matrix
        self._gamma_cache = {}  # (tet, a, b, sign) -> matrix

    def _dihedral_cs(self, tet, a, b):
        key = (tet, min(a, b), max(a, b))
        if key not in self._gamma_cs:
            i, j = geo.opposite_edge(a, b)
            cof = self.data[tet].cof
            c = geo.cos_dihedral(cof, i, j)
            s = geo.sin_dihedral(cof, i, j)
            self._gamma_cs[key] = (c, s)
        return self._gamma_cs[key]

    def gamma_for_sigma(self, tet, sigma):
        """Label of the short edge starting at corner permutation sigma."""
        a, b = sigma[0], sigma[1]
        sign = 1 if perm_parity(sigma) == -1 else -1
        key = (tet, min(a, b), max(a, b), sign)
        if key not in self._gamma_cache:
            c, s = self._dihedral_cs(tet, a, b)
            self._gamma_cache[key] = rotation_matrix(
                c, s if sign > 0 else -s, self.one, self.zero
            )
        return self._gamma_cache[key]

    def beta_for_token(self, token):
        """Label of a middle edge, computed once from its canonical side."""
        if token not in self._beta_cache:
            tet, s0, _s1 = token
            g = self.data[tet].gram
            c = geo.cos_vertex_angle(g, s0[0], s0[2], s0[1])
            s = geo.sin_vertex_angle(g, s0[0], s0[2], s0[1])
            self._beta_cache[token] = middle_edge_matrix(c, s, self.one, self.zero)
        return self._beta_cache[token]

    def for_letter(self, letter):
        if letter["kind"] == "b":
            return self.beta_for_token(letter["token"])
        if letter["kind"] == "g":
            return self.gamma_for_sigma(letter["tet"], letter["s_start"])
        raise GimbalLoopError(f"letter of kind {letter['kind']!r} has no label")

    def theta_interval(self, tet, a, b):
        return self.data[tet].theta_at_edge[(min(a, b), max(a, b))]

    # -- 2x2 forms, kept for cross-validation against the rotation forms --

    def pgl2_alpha(self, tet, sigma):
        v = self.data[tet].gram[sigma[0]][sigma[1]]
        x = sc.sqrt_nonneg(v * v - 1.0) - v
        zero, one = self.zero, self.one
        return ((zero, x), (one, zero))

    def pgl2_beta(self, tet, sigma):
        g = self.data[tet].gram
        # half angle via cos(e/2) = sqrt((1+cos e)/2), valid on (0, pi)
        ce = geo.cos_vertex_angle(g, sigma[0], sigma[2], sigma[1])
        ch = sc.sqrt_nonneg((ce + 1.0) / 2.0)
        sh = sc.sqrt_nonneg((-ce + 1.0) / 2.0)
        return ((-ch, sh), (sh, ch))

    def pgl2_gamma(self, tet, sigma):
        c, s = self._dihedral_cs(tet, sigma[0], sigma[1])
        if perm_parity(sigma) == 1:
            s = -s
        # complex entries as (re, im) pairs
        zero = self.zero
        return (((c, s), (zero, zero)), ((zero, zero), (self.one, zero)))


# ---------------------------------------------------------------------------
# prisms
# ---------------------------------------------------------------------------


def prism_holonomy(labels, link, pid):
    """Ordered product of the short-edge labels around one prism end.

    With the orientation induced from the removed polygon all factors are
    z-rotations by the positive dihedral angles, so the product encloses
    the rotation by the full angle sum around the edge class.
    """
    end = link.prism_ends[pid]
    acc = mat3_identity(labels.one, labels.zero)
    for (tet, a, b) in end.gammas:
        c, s = labels._dihedral_cs(tet, a, b)
        acc = mat3_mul(rotation_matrix(c, s, labels.one, labels.zero), acc)
    return acc


def polygon_angle_sum(labels, link, pid):
    """Sum of the branch-reduced rotation angles along the polygon boundary.

    Every boundary label is a rotation by a dihedral angle in (0, pi), so
    the branch reduction to (-pi, pi] is the angle itself and the sum is
    the angle sum around the edge class.
    """
    end = link.prism_ends[pid]
    acc = None
    for (tet, a, b) in end.gammas:
        th = labels.theta_interval(tet, a, b)
        acc = th if acc is None else acc + th
    return acc


# ---------------------------------------------------------------------------
# gimbal loops
# ---------------------------------------------------------------------------


@dataclass
class GimbalLoop:
    vertex_class: int
    link: object
    removed: tuple  # pids of removed polygons, sorted
    word: list  # letters in traversal order; P letters have kind 'P'
    variable_of_pid: dict = field(default_factory=dict)

    def serialize(self):
        out = []
        for letter in self.word:
            if letter["kind"] == "P":
                out.append(f"P{letter['pid']}")
            elif letter["kind"] == "b":
                t, s0, s1 = letter["token"]
                out.append(f"b:{t}:" + "".join(map(str, s0)))
            else:
                t, a, b = letter["token"]
                s = letter["s_start"]
                out.append(f"g:{t}:{a}{b}:" + "".join(map(str, s)))
        return " ".join(out)


def build_gimbal_loop(link, removed_pids, validate=True):
    """Grow a hexagon-boundary loop until it touches every removed polygon.

    Starts from one hexagon boundary and repeatedly replaces a middle edge
    with the other five edges of the unused hexagon behind it, hexagon by
    hexagon in breadth-first order; afterwards each removed-polygon letter
    is spliced in after the first word position ending on its boundary.
    """
    removed = sorted(removed_pids)
    for pid in removed:
        if pid >= len(link.prism_ends):
            raise GimbalLoopError(f"no prism end {pid} in this link")

    start = link.corners[0]
    word = [dict(letter, owner=start) for letter in link.hexagons[start]]
    used = {start}
    queue = [start]
    untouched = set(removed)
    for letter in word:
        untouched.discard(link.lv_to_pid[letter["end"]])

    while untouched:
        if not queue:
            raise GimbalLoopError(
                "link exhausted before touching every removed polygon"
            )
        h = queue.pop(0)
        for token in link.beta_of_corner[h]:
            c1, c2 = link.beta_pairs[token]
            other = c2 if c1 == h else c1
            if other in used:
                continue
            idx = next(
                (
                    i
                    for i, let in enumerate(word)
                    if let["kind"] == "b" and let["token"] == token
                ),
                None,
            )
            if idx is None:
                continue
            cycle = link.hexagons[other]
            j0 = next(
                i
                for i, let in enumerate(cycle)
                if let["kind"] == "b" and let["token"] == token
            )
            replacement = [
                dict(letter, owner=other)
                for letter in cycle[j0 + 1 :] + cycle[:j0]
            ]
            assert replacement[0]["start"] == word[idx]["start"]
            assert replacement[-1]["end"] == word[idx]["end"]
            word[idx : idx + 1] = replacement
            used.add(other)
            queue.append(other)
            for letter in replacement:
                untouched.discard(link.lv_to_pid[letter["end"]])
            if not untouched:
                break

    # splice removed-polygon letters after the first anchoring edge
    insert_at = {}
    pending = set(removed)
    for i, let in enumerate(word):
        pid = link.lv_to_pid[let["end"]]
        if pid in pending:
            insert_at[i] = pid
            pending.discard(pid)
        if not pending:
            break
    final = []
    for i, letter in enumerate(word):
        final.append(letter)
        if i in insert_at:
            pid = insert_at[i]
            final.append(
                {
                    "kind": "P",
                    "pid": pid,
                    "edge_class": link.prism_ends[pid].edge_class,
                    "start": letter["end"],
                    "end": letter["end"],
                }
            )
    loop = GimbalLoop(
        vertex_class=link.vertex_class,
        link=link,
        removed=tuple(removed),
        word=final,
    )
    if validate:
        validate_gimbal_loop(loop)
    return loop


def validate_gimbal_loop(loop):
    """Independent check of every gimbal-loop clause.

    Raises GimbalLoopError unless: each removed polygon letter occurs
    exactly once and follows an edge ending on its boundary; dropping the
    polygon letters leaves a closed edge path; that path is the boundary
    of a disk of hexagons glued along the crossed middle edges, traversed
    with the link's orientation.
    """
    link = loop.link
    word = loop.word
    n = len(word)
    if n == 0:
        raise GimbalLoopError("empty loop")

    # polygon letters: multiplicity and anchoring
    seen_p = [let["pid"] for let in word if let["kind"] == "P"]
    if sorted(seen_p) != sorted(loop.removed):
        raise GimbalLoopError("removed polygons not each visited exactly once")
    for i, let in enumerate(word):
        if let["kind"] != "P":
            continue
        prev = word[(i - 1) % n]
        if prev["kind"] == "P":
            raise GimbalLoopError("polygon letter preceded by another polygon")
        if prev["end"] not in link.prism_ends[let["pid"]].boundary_lvs:
            raise GimbalLoopError("polygon letter not anchored on its boundary")

    # dropping polygons leaves a closed edge path
    edges = [let for let in word if let["kind"] != "P"]
    for cur, nxt in zip(edges, edges[1:] + edges[:1]):
        if cur["end"] != nxt["start"]:
            raise GimbalLoopError("edge word is not a closed path")

    # reconstruct the disk: used hexagons glued along crossed middle edges
    used = sorted({let["owner"] for let in edges})
    used_set = set(used)
    word_count = {}
    for let in edges:
        word_count[let["token"]] = word_count.get(let["token"], 0) + 1
    crossed = []
    for token, (c1, c2) in link.beta_pairs.items():
        if c1 in used_set and c2 in used_set and word_count.get(token, 0) == 0:
            crossed.append(token)

    token_slots = {}
    all_slots = []
    for h in used:
        for i, letter in enumerate(link.hexagons[h]):
            token_slots.setdefault(letter["token"], []).append((h, i))
            all_slots.append((h, i))

    # every slot of every used hexagon is either crossed or claimed exactly
    # once by a word letter running in the hexagon's own direction
    claims = {}
    for let in edges:
        h = let["owner"]
        cands = [
            (hh, i)
            for (hh, i) in token_slots.get(let["token"], ())
            if hh == h
            and link.hexagons[h][i]["start"] == let["start"]
            and link.hexagons[h][i]["end"] == let["end"]
        ]
        if len(cands) != 1:
            raise GimbalLoopError("letter does not match a unique owner slot")
        claims[cands[0]] = claims.get(cands[0], 0) + 1
    crossed_slots = set()
    for token in crossed:
        slots = token_slots.get(token, ())
        if len(slots) != 2:
            raise GimbalLoopError("crossed edge without two used sides")
        crossed_slots.update(slots)
    for slot in all_slots:
        want = 0 if slot in crossed_slots else 1
        if claims.get(slot, 0) != want:
            raise GimbalLoopError("hexagon slots and word letters disagree")

    # Euler characteristic of the glued hexagon complex must be a disk's
    parent = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry

    for h in used:
        for i in range(6):
            parent[(h, i)] = (h, i)
    hex_parent = {h: h for h in used}

    def hfind(x):
        while hex_parent[x] != x:
            hex_parent[x] = hex_parent[hex_parent[x]]
            x = hex_parent[x]
        return x

    for token in crossed:
        (h1, i1), (h2, i2) = token_slots[token]
        union((h1, i1), (h2, (i2 + 1) % 6))
        union((h1, (i1 + 1) % 6), (h2, i2))
        hex_parent[hfind(h1)] = hfind(h2)
    if len({hfind(h) for h in used}) != 1:
        raise GimbalLoopError("hexagon disk is not connected")
    v = len({find(x) for x in parent})
    e = 6 * len(used) - len(crossed)
    f = len(used)
    if v - e + f != 1:
        raise GimbalLoopError("hexagon union is not a disk")

    if len(word) > 6 * len(used) + len(loop.removed):
        raise GimbalLoopError("loop longer than its hexagon budget")
    return True


# ---------------------------------------------------------------------------
# gimbal matrix, derivatives, lock check
# ---------------------------------------------------------------------------


def _letter_matrix(letter, labels, t_of_pid):
    if letter["kind"] == "P":
        w = t_of_pid[letter["pid"]]
        return rotation_matrix(sc.cos(w), sc.sin(w), labels.one, labels.zero)
    return labels.for_letter(letter)


def gimbal_matrix(loop, labels, t_of_pid):
    """Product of the letter matrices, first-traversed letter rightmost.

    Interval-valued labels go through ball arithmetic (entrywise interval
    products of long near-rotation words diverge); the result is then an
    entrywise float-interval enclosure.  Float labels multiply directly.
    """
    if sc.is_interval(labels.one):
        acc = ball_identity()
        for letter in loop.word:
            ball = ball_from_interval_mat3(_letter_matrix(letter, labels, t_of_pid))
            acc = ball_mul(ball, acc)
        return ball_entries(acc, _BALL_KERNEL)
    acc = mat3_identity(labels.one, labels.zero)
    for letter in loop.word:
        acc = mat3_mul(_letter_matrix(letter, labels, t_of_pid), acc)
    return acc


def gimbal_function(loop, labels, t_of_pid):
    m = gimbal_matrix(loop, labels, t_of_pid)
    return (m[0][1], m[0][2], m[1][2])


def gimbal_matrix_derivatives(loop, labels, t_of_pid):
    """d(gimbal matrix)/d(T_var) for every variable occurring in the loop.

    The derivative replaces one rotation letter at a time by the rotation
    derivative and sums over occurrences.  Prefix and suffix products make
    this linear in the word length.
    """
    word = loop.word
    n = len(word)
    if sc.is_interval(labels.one):
        balls = [
            ball_from_interval_mat3(_letter_matrix(let, labels, t_of_pid))
            for let in word
        ]
        ident = ball_identity()
        suffix = [ident] * (n + 1)  # suffix[i] = M(w[i-1]) ... M(w[0])
        for i in range(n):
            suffix[i + 1] = ball_mul(balls[i], suffix[i])
        prefix = [ident] * (n + 1)  # prefix[i] = M(w[n-1]) ... M(w[i])
        for i in range(n - 1, -1, -1):
            prefix[i] = ball_mul(prefix[i + 1], balls[i])
        acc = {}
        for i, letter in enumerate(word):
            if letter["kind"] != "P":
                continue
            var = loop.variable_of_pid[letter["pid"]]
            d = ball_from_interval_mat3(
                rotation_matrix_derivative(t_of_pid[letter["pid"]], labels.zero)
            )
            term = ball_mul(prefix[i + 1], ball_mul(d, suffix[i]))
            acc[var] = term if var not in acc else ball_add(acc[var], term)
        return {v: ball_entries(b, _BALL_KERNEL) for v, b in acc.items()}
    mats = [_letter_matrix(let, labels, t_of_pid) for let in word]
    ident = mat3_identity(labels.one, labels.zero)
    suffix = [ident] * (n + 1)
    for i in range(n):
        suffix[i + 1] = mat3_mul(mats[i], suffix[i])
    prefix = [ident] * (n + 1)
    for i in range(n - 1, -1, -1):
        prefix[i] = mat3_mul(prefix[i + 1], mats[i])
    out = {}
    for i, letter in enumerate(word):
        if letter["kind"] != "P":
            continue
        var = loop.variable_of_pid[letter["pid"]]
        d = rotation_matrix_derivative(t_of_pid[letter["pid"]], labels.zero)
        term = mat3_mul(prefix[i + 1], mat3_mul(d, suffix[i]))
        if var in out:
            out[var] = tuple(
                tuple(out[var][r][c] + term[r][c] for c in range(3)) for r in range(3)
            )
        else:
            out[var] = term
    return out


def assemble_gimbal_jacobian(loops, labels, box_of_variable):
    """Interval Jacobian [Dg(K)]: 3 rows per vertex, one column per
    variable; rows carry the (0,1), (0,2), (1,2) entries.

    The ball evaluation hands back 53-bit interval entries whatever the
    working precision; that is sound, and ample for the inversion margin.
    """
    nvar = len(box_of_variable)
    zero = _FI.point(0.0)
    rows = []
    for loop in loops:
        t_of_pid = {
            pid: box_of_variable[var] for pid, var in loop.variable_of_pid.items()
        }
        derivs = gimbal_matrix_derivatives(loop, labels, t_of_pid)
        for (r, c) in ((0, 1), (0, 2), (1, 2)):
            rows.append(
                [
                    derivs[v][r][c] if v in derivs else zero
                    for v in range(nvar)
                ]
            )
    return IntervalMatrix(rows)


def build_loops_for_partition(tri, e_sim, links=None, validate=True):
    """One gimbal loop per vertex class; polygon variables indexed by the
    position of their edge class in e_sim."""
    var_of_class = {cls: i for i, cls in enumerate(e_sim)}
    if links is None:
        links = [vertex_link_hexagon_complex(tri, k) for k in range(tri.o)]
    loops = []
    for link in links:
        removed = [
            pid
            for pid, end in enumerate(link.prism_ends)
            if end.edge_class in var_of_class
        ]
        loop = build_gimbal_loop(link, removed, validate=validate)
        loop.variable_of_pid = {
            pid: var_of_class[link.prism_ends[pid].edge_class] for pid in removed
        }
        loops.append(loop)
    return loops


@dataclass
class GimbalVerdict:
    avoided: bool
    reason: str
    loops: list
    jacobian: IntervalMatrix = None


def gimbal_lock_check(tri, labels, e_sim, theta_boxes, links=None):
    """Step that upgrades approximate edge equations to exact ones.

    e_sim: edge-class indices whose angle sums are only enclosed; the box
    K is their list of angle-sum enclosures `theta_boxes` (same order).
    Returns verdict `avoided` only if the interval Jacobian of the gimbal
    function over K is provably invertible.
    """
    expected = 3 * tri.o
    if len(e_sim) != expected or len(theta_boxes) != expected:
        return GimbalVerdict(False, f"need exactly {expected} loose edges", [])
    from .interval import contains_two_pi

    if not all(contains_two_pi(b) for b in theta_boxes):
        return GimbalVerdict(
            False, "box does not contain the full-turn point", []
        )
    try:
        loops = build_loops_for_partition(tri, e_sim, links=links)
    except (GimbalLoopError, TriangulationError) as exc:
        return GimbalVerdict(False, f"loop construction failed: {exc}", [])
    dg = assemble_gimbal_jacobian(loops, labels, theta_boxes)
    if interval_matrix_invertible(dg):
        return GimbalVerdict(True, "interval Jacobian invertible", loops, dg)
    return GimbalVerdict(
        False,
        "gimbal lock not excluded: interval Jacobian not proven invertible "
        "(perturb the structure or pick another partition)",
        loops,
        dg,
    )


# ---------------------------------------------------------------------------
# cocycle closure validation
# ---------------------------------------------------------------------------


def _c_mul(x, y):
    return (x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0])


def _c_add(x, y):
    return (x[0] + y[0], x[1] + y[1])


def _mat2c_mul(a, b):
    return tuple(
        tuple(
            _c_add(_c_mul(a[i][0], b[0][j]), _c_mul(a[i][1], b[1][j]))
            for j in range(2)
        )
        for i in range(2)
    )


def _as_mat2c(m, zero):
    out = []
    for row in m:
        out_row = []
        for x in row:
            out_row.append(x if isinstance(x, tuple) else (x, zero))
        out.append(tuple(out_row))
    return tuple(out)


def _contains_zero(x):
    if hasattr(x, "contains"):
        return x.contains(0.0)
    return abs(x) < 1e-9


def _swap01(s):
    return (s[1], s[0], s[2], s[3])


def _swap12(s):
    return (s[0], s[2], s[1], s[3])


def _swap23(s):
    return (s[0], s[1], s[3], s[2])


def big_hexagon_cycle(f):
    xs = sorted(x for x in range(4) if x != f)
    s = (xs[0], xs[1], xs[2], f)
    cyc = []
    for _ in range(3):
        t = _swap01(s)
        cyc.append(("a", s, t))
        u = _swap12(t)
        cyc.append(("b", t, u))
        s = u
    return cyc


def rectangle_cycle(a, b):
    cs = sorted(x for x in range(4) if x not in (a, b))
    s = (a, b, cs[0], cs[1])
    t = _swap01(s)
    u = _swap23(t)
    w = _swap01(u)
    return [("a", s, t), ("g", t, u), ("a", u, w), ("g", w, s)]


def check_cocycle_closure(tri, labels):
    """Verify the label products around every 2-cell of the doubly
    truncated complex.

    Small hexagons are checked in SO(3); big hexagons and rectangles use
    the 2x2 forms, where closure means enclosing a scalar matrix.  Also
    checks that identified middle edges of glued simplices carry equal
    labels.  Returns a list of failure descriptions (empty = closed).
    """
    failures = []
    ident = mat3_identity(labels.one, labels.zero)
    for tet in range(tri.n_tets):
        # small hexagons in SO(3)
        for a in range(4):
            acc = ident
            for kind, s0, _s1 in hexagon_cycle(a):
                if kind == "g":
                    acc = mat3_mul(labels.gamma_for_sigma(tet, s0), acc)
                else:
                    tok = _beta_token_of(tri, tet, s0)
                    acc = mat3_mul(labels.beta_for_token(tok), acc)
            for i in range(3):
                for j in range(3):
                    want = 1.0 if i == j else 0.0
                    if not _contains_zero(acc[i][j] - want):
                        failures.append(
                            f"tet {tet} corner {a}: small hexagon product "
                            f"entry ({i},{j}) excludes identity"
                        )
        # big hexagons and rectangles in the 2x2 forms
        for f in range(4):
            acc = None
            for kind, s0, _s1 in big_hexagon_cycle(f):
                m = (
                    labels.pgl2_alpha(tet, s0)
                    if kind == "a"
                    else labels.pgl2_beta(tet, s0)
                )
                m = _as_mat2c(m, labels.zero)
                acc = m if acc is None else _mat2c_mul(m, acc)
            failures.extend(
                _scalar_failures(acc, f"tet {tet} face {f}: big hexagon")
            )
        for (a, b) in LOCAL_EDGES:
            acc = None
            for kind, s0, _s1 in rectangle_cycle(a, b):
                if kind == "a":
                    m = _as_mat2c(labels.pgl2_alpha(tet, s0), labels.zero)
                else:
                    m = labels.pgl2_gamma(tet, s0)
                acc = m if acc is None else _mat2c_mul(m, acc)
            failures.extend(
                _scalar_failures(acc, f"tet {tet} edge {a}{b}: rectangle")
            )
        # shared middle edges across face gluings carry equal labels
        for f in range(4):
            j, p = tri.neighbor(tet, f)
            if (j, p[f]) < (tet, f):
                continue
            for s0 in itertools.permutations(range(4)):
                if s0[3] != f:
                    continue
                s1 = _swap12(s0)
                if s1 < s0:
                    continue
                tok_here = _canon_beta(tri, tet, s0, s1)
                tok_there = _canon_beta(tri, j, compose(p, s0), compose(p, s1))
                if tok_here != tok_there:
                    failures.append(
                        f"tet {tet} face {f}: identified middle edges have "
                        f"different canonical tokens"
                    )
    return failures


def _canon_beta(tri, tet, s0, s1):
    side = (tet, min(s0, s1), max(s0, s1))
    f = s0[3]
    j, p = tri.neighbor(tet, f)
    t0, t1 = compose(p, s0), compose(p, s1)
    other = (j, min(t0, t1), max(t0, t1))
    return min(side, other)


def _beta_token_of(tri, tet, s0):
    return _canon_beta(tri, tet, s0, _swap12(s0))


def _scalar_failures(acc, what):
    out = []
    # scalar matrix: zero off-diagonal, equal diagonal (complex entries)
    checks = [
        ("01.re", acc[0][1][0]),
        ("01.im", acc[0][1][1]),
        ("10.re", acc[1][0][0]),
        ("10.im", acc[1][0][1]),
        ("diag.re", acc[0][0][0] - acc[1][1][0]),
        ("diag.im", acc[0][0][1] - acc[1][1][1]),
    ]
    for name, x in checks:
        if not _contains_zero(x):
            out.append(f"{what}: deviation {name} excludes zero")
    return out


# ---------------------------------------------------------------------------
# direction extraction and the partition probe
# ---------------------------------------------------------------------------


def edge_end_directions(tri, params, vertex_class=0, links=None):
    """Float developing computation on one vertex link.

    Transports the corner frames over the link and reads off, for every
    prism end, the unit direction in which the corresponding edge leaves
    the vertex (the z-axis of any corner frame on that polygon).  Returns
    {pid: direction}, in the frame of the first corner.
    """
    labels = CocycleLabels(tri, [float(sc.midpoint(v)) for v in params.values])
    if links is None:
        link = vertex_link_hexagon_complex(tri, vertex_class)
    else:
        link = links[vertex_class]
    # frame transport: walking a letter u -> w multiplies the frame by the
    # label inverse (the label moves the simplex from u- to w-position)
    base = link.corners[0]
    frames = {}  # lv id -> 3x3 frame matrix
    first_lv = link.hexagons[base][0]["start"]
    frames[first_lv] = mat3_identity(1.0, 0.0)
    pending = [base]
    seen_corners = set()
    while pending:
        corner = pending.pop()
        if corner in seen_corners:
            continue
        cycle = link.hexagons[corner]
        known = next(
            (i for i, let in enumerate(cycle) if let["start"] in frames), None
        )
        if known is None:
            pending.insert(0, corner)
            continue
        seen_corners.add(corner)
        for step in range(6):
            let = cycle[(known + step) % 6]
            m = labels.for_letter(let)
            mt = tuple(tuple(m[j][i] for j in range(3)) for i in range(3))
            if let["end"] not in frames:
                frames[let["end"]] = mat3_mul(frames[let["start"]], mt)
        for token in link.beta_of_corner[corner]:
            c1, c2 = link.beta_pairs[token]
            other = c2 if c1 == corner else c1
            if other not in seen_corners:
                pending.append(other)
    directions = {}
    for end in link.prism_ends:
        lv = next(iter(end.boundary_lvs))
        fr = frames[lv]
        directions[end.pid] = (fr[0][2], fr[1][2], fr[2][2])
    return directions


def probe_partitions(tri, params, budget=20000, seed=0, sigma_tol=1e-7):
    """Scan edge partitions for gimbal lock at the float level.

    For each candidate loose set of 3o edges, evaluates the float gimbal
    Jacobian at full turns and records its smallest singular value.
    Exhaustive when the number of partitions fits the budget (always the
    case for one or two vertices at moderate size), sampled otherwise.
    Rows: (partition tuple, sigma_min, locked flag).
    """
    import random as _random

    floats = [float(sc.midpoint(v)) for v in params.values]
    labels = CocycleLabels(tri, floats)
    links = [vertex_link_hexagon_complex(tri, k) for k in range(tri.o)]
    m, o = tri.m, tri.o
    need = 3 * o
    total = math.comb(m, need)
    rows = []
    if total <= budget:
        candidates = itertools.combinations(range(m), need)
    else:
        rng = _random.Random(seed)
        pool = list(range(m))
        candidates = (
            tuple(sorted(rng.sample(pool, need))) for _ in range(budget)
        )
    two_pi = sc.TWO_PI_FLOAT
    for e_sim in candidates:
        try:
            loops = build_loops_for_partition(
                tri, list(e_sim), links=links, validate=False
            )
        except (GimbalLoopError, TriangulationError):
            rows.append((e_sim, float("nan"), True))
            continue
        dg_rows = []
        for loop in loops:
            t_of_pid = {pid: two_pi for pid in loop.variable_of_pid}
            derivs = gimbal_matrix_derivatives(loop, labels, t_of_pid)
            for (r, c) in ((0, 1), (0, 2), (1, 2)):
                dg_rows.append(
                    [
                        derivs[v][r][c] if v in derivs else 0.0
                        for v in range(need)
                    ]
                )
        dg = np.array(dg_rows, dtype=float)
        svals = np.linalg.svd(dg, compute_uv=False)
        smin = float(svals[-1]) if len(svals) else 0.0
        smax = float(svals[0]) if len(svals) else 0.0
        locked = smin <= sigma_tol * max(smax, 1.0)
        rows.append((e_sim, smin, locked))
    return rows
