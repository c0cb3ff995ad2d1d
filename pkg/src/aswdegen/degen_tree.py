"""Degeneration trees: decorated oriented trees of projective lines carrying
torsor data, their constraint validation, genus bookkeeping and realization by
local models whose boundary types are recomputed and compared.

Sign map used throughout: every per-point integer m is the m of the boundary
degeneration type of the vertex torsor at that point, in the local parameter
at that point (negative = pole).  Across the root marked point and across an
edge the two sides carry opposite m.  The genus identity converts etale poles
to positive conductors c = -m.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Union

from .errors import AswError, CompatibilityFailure, HypothesisViolated, SchemaError
from .ffseries import BiElement, ResidueSeries
from .torsor_p import RationalFunctionData, local_expansion, normalize_boundary_p
from .torsor_p2 import (
    DegenDataP2,
    DegTypeP2,
    classify_boundary_p2,
    is_admissible_pair,
    lift_degen_data,
    satisfies_condition_star,
)
from .witt import WittVec2

Point = Union[int, str]


def _P(p: int) -> int:
    return p * (p - 1) + 1


def _point(x: Any, p: int) -> Point:
    if x == "inf":
        return "inf"
    if isinstance(x, bool) or not isinstance(x, int):
        raise SchemaError(f"point {x!r} must be an element of F_p or 'inf'")
    return x % p


def _terms(p: int, raw: Any) -> RationalFunctionData:
    if isinstance(raw, RationalFunctionData):
        return raw
    if isinstance(raw, dict):
        raw = raw.get("terms", [])
    try:
        return RationalFunctionData.from_terms(p, raw)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"bad rational function terms {raw!r}: {exc}") from None


# ------------------------------------------------------------------ data model

@dataclass
class MarkedPoint:
    id: str
    point: Point
    m: Any                        # int (rank p) or (m1, m2) (rank p^2)


@dataclass
class Vertex:
    id: str
    n: Any                        # int (rank p) or (n1, n2)
    payload: dict                 # rank p: {"f": RationalFunctionData}; rank p^2: u1, u2, c
    marked: list[MarkedPoint] = field(default_factory=list)
    kind: str | None = None       # rank p^2: 'A' | 'B' | 'C'


@dataclass
class Edge:
    id: str
    source: str
    target: str
    source_point: Point
    target_point: Point
    m_source: Any
    m_target: Any
    e: int


@dataclass
class Root:
    vertex: str
    point: Point
    m: Any
    e: int


@dataclass
class DegenTree:
    rank: str                     # 'p' | 'p2'
    p: int
    r: int
    header: Any                   # (n, m) or ((n1, m1), (n2, m2))
    root: Root
    vertices: list[Vertex]
    edges: list[Edge]
    irreducible_fibres_assumed: bool = False

    # -- lookup helpers
    def vertex(self, vid: str) -> Vertex:
        for v in self.vertices:
            if v.id == vid:
                return v
        raise SchemaError(f"unknown vertex {vid!r}")

    def points_of(self, vid: str) -> list[tuple[str, str, Point]]:
        """(role, id, point) for every special point on a vertex, in a stable order."""
        out: list[tuple[str, str, Point]] = []
        if self.root.vertex == vid:
            out.append(("root", "x", self.root.point))
        for mp in self.vertex(vid).marked:
            out.append(("marked", mp.id, mp.point))
        for e in self.edges:
            if e.source == vid:
                out.append(("edge", e.id, e.source_point))
            if e.target == vid:
                out.append(("edge", e.id, e.target_point))
        return out

    # -- serialization
    @classmethod
    def from_dict(cls, d: dict) -> "DegenTree":
        try:
            rank = d["rank"]
            p = int(d["p"])
            if rank not in ("p", "p2"):
                raise SchemaError(f"rank must be 'p' or 'p2', got {rank!r}")
            pair = rank == "p2"
            hdr = d["header"]
            header = (_pair(hdr["pair"]) if pair else tuple(int(x) for x in hdr["type"]))
            rt = d["root"]
            root = Root(str(rt["vertex"]), _point(rt["point"], p), _mval(rt["m"], pair), int(rt["e"]))
            vertices = []
            for v in d["vertices"]:
                pl = v.get("payload", {})
                if pair:
                    payload = {"u1": _terms(p, pl.get("u1", [])), "u2": _terms(p, pl.get("u2", [])),
                               "c": [_terms(p, c) for c in pl.get("c", [])]}
                    n = tuple(int(x) for x in v["n"])
                else:
                    payload = {"f": _terms(p, pl.get("f", []))}
                    n = int(v["n"])
                marked = [MarkedPoint(str(mp["id"]), _point(mp["point"], p), _mval(mp["m"], pair))
                          for mp in v.get("marked", [])]
                vertices.append(Vertex(str(v["id"]), n, payload, marked, v.get("kind")))
            edges = [Edge(str(e["id"]), str(e["source"]), str(e["target"]),
                          _point(e["source_point"], p), _point(e["target_point"], p),
                          _mval(e["m_source"], pair), _mval(e["m_target"], pair), int(e["e"]))
                     for e in d.get("edges", [])]
            return cls(rank, p, int(hdr["r"]), header, root, vertices, edges,
                       bool(d.get("irreducible_fibres_assumed", False)))
        except KeyError as exc:
            raise SchemaError(f"degeneration tree is missing field {exc}") from None
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"malformed degeneration tree: {exc}") from None

    def to_dict(self) -> dict:
        pair = self.rank == "p2"
        hdr = {"r": self.r}
        if pair:
            hdr["pair"] = [list(x) for x in self.header]
        else:
            hdr["type"] = list(self.header)
        verts = []
        for v in self.vertices:
            if pair:
                payload = {"u1": [list(t) for t in v.payload["u1"].terms],
                           "u2": [list(t) for t in v.payload["u2"].terms],
                           "c": [[list(t) for t in c.terms] for c in v.payload["c"]]}
            else:
                payload = {"f": [list(t) for t in v.payload["f"].terms]}
            item = {"id": v.id, "n": list(v.n) if pair else v.n, "payload": payload,
                    "marked": [{"id": mp.id, "point": mp.point, "m": _mjson(mp.m)} for mp in v.marked]}
            if v.kind is not None:
                item["kind"] = v.kind
            verts.append(item)
        return {
            "rank": self.rank, "p": self.p, "header": hdr,
            "root": {"vertex": self.root.vertex, "point": self.root.point,
                     "m": _mjson(self.root.m), "e": self.root.e},
            "vertices": verts,
            "edges": [{"id": e.id, "source": e.source, "target": e.target,
                       "source_point": e.source_point, "target_point": e.target_point,
                       "m_source": _mjson(e.m_source), "m_target": _mjson(e.m_target), "e": e.e}
                      for e in self.edges],
            "irreducible_fibres_assumed": self.irreducible_fibres_assumed,
        }

    @classmethod
    def from_json(cls, text: str) -> "DegenTree":
        return cls.from_dict(json.loads(text))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_dot(self) -> str:
        lines = ["digraph degeneration {", "  rankdir=LR;",
                 f'  header [shape=box, label="r={self.r}\\ntype={_fmt(self.header)}"];']
        for v in self.vertices:
            label = f"{v.id}\\nn={_fmt(v.n)}"
            if v.kind:
                label += f"\\nkind {v.kind}"
            for mp in v.marked:
                label += f"\\n{mp.id}@{mp.point}: m={_fmt(mp.m)}"
            lines.append(f'  "{v.id}" [label="{label}"];')
        lines.append(f'  header -> "{self.root.vertex}" [label="x e={self.root.e} m={_fmt(self.root.m)}"];')
        for e in self.edges:
            lines.append(f'  "{e.source}" -> "{e.target}" '
                         f'[label="{e.id} e={e.e} m={_fmt(e.m_source)}/{_fmt(e.m_target)}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _pair(raw) -> tuple[tuple[int, int], tuple[int, int]]:
    (a, b), (c, d) = raw
    return (int(a), int(b)), (int(c), int(d))


def _mval(raw, pair: bool):
    if pair:
        a, b = raw
        return int(a), int(b)
    return int(raw)


def _mjson(m):
    return list(m) if isinstance(m, tuple) else m


def _fmt(x) -> str:
    if isinstance(x, tuple):
        return "(" + ", ".join(_fmt(y) for y in x) + ")"
    return str(x)


# ------------------------------------------------------------------ reports

@dataclass(frozen=True)
class CheckResult:
    label: str
    ok: bool
    where: str
    message: str

    def to_dict(self) -> dict:
        return {"label": self.label, "ok": self.ok, "where": self.where, "message": self.message}


@dataclass
class ValidationReport:
    rank: str
    checks: list[CheckResult] = field(default_factory=list)
    genus: int | None = None
    notes: list[str] = field(default_factory=list)

    def add(self, label: str, ok: bool, where: str, message: str = "") -> bool:
        self.checks.append(CheckResult(label, bool(ok), where, message))
        return bool(ok)

    @property
    def valid(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failed_labels(self) -> list[str]:
        seen: list[str] = []
        for c in self.checks:
            if not c.ok and c.label not in seen:
                seen.append(c.label)
        return seen

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.ok]

    def summary(self) -> dict:
        labels = sorted({c.label for c in self.checks})
        return {lab: all(c.ok for c in self.checks if c.label == lab) for lab in labels}

    def to_dict(self) -> dict:
        return {"rank": self.rank, "valid": self.valid, "genus": self.genus,
                "summary": self.summary(), "failed": self.failed_labels,
                "checks": [c.to_dict() for c in self.checks], "notes": list(self.notes)}


# ------------------------------------------------------------------ local tools

def _prec_for(f: RationalFunctionData) -> int:
    top = max((abs(e) for _, e, _ in f.terms), default=0)
    return 4 * f.p * f.p + 2 * top + 8


def _exact(series: ResidueSeries) -> ResidueSeries:
    return ResidueSeries(series.p, dict(series.items()))


def local_series(f: RationalFunctionData, point: Point, prec: int | None = None) -> ResidueSeries:
    """Truncated Laurent expansion at a point, returned as an exact series."""
    return _exact(local_expansion(f, point, prec if prec is not None else _prec_for(f)))


def _boundary(x: BiElement) -> BiElement:
    return BiElement(x.p, x.terms)


def _cross(x: BiElement, e: int) -> BiElement:
    """Rewrite a Laurent polynomial in U on the annulus U*V = pi^e as one in V."""
    return BiElement(x.p, {(i + e * j, -j): c for (i, j), c in x.items()})


def _has_pole(s: ResidueSeries) -> bool:
    return any(e < 0 for e, _ in s.items())


def _rank_p_type(f: RationalFunctionData, n: int, point: Point) -> tuple[int, int]:
    """Boundary type at a point of the lift X^p - pi^(n(p-1))X = f (split -> (0, 0))."""
    s = local_series(f, point)
    if n == 0 and not _has_pole(s):
        return (0, 0)
    res = normalize_boundary_p(BiElement.from_residue(s, -f.p * n))
    return (0, 0) if res.type.split else (res.type.n, res.type.m)


def _rank_p_lift_text(f: RationalFunctionData, n: int, p: int) -> str:
    if n == 0:
        return f"X^p − X = {f}"
    return f"X^p − π^{n * (p - 1)}X = {f}"


def _vertex_datum_p2(v: Vertex, point: Point, p: int) -> DegenDataP2:
    u1 = local_series(v.payload["u1"], point)
    u2 = local_series(v.payload["u2"], point)
    cs = tuple(local_series(c, point) for c in v.payload["c"])
    return DegenDataP2(v.kind, u1, u2, cs, False, tuple(v.n))


def _vertex_lift_p2(v: Vertex, point: Point, p: int) -> WittVec2:
    """Generic equations of the vertex lift, expanded at a point, as boundary elements."""
    data = _vertex_datum_p2(v, point, p)
    n1, n2 = v.n
    if v.kind == "C":
        if p * n2 == n1 * _P(p):
            lifted = lift_degen_data(data, n=n1, variant=1)
        else:
            m = (p * n2 + n1 * (p - 1))
            if m % p:
                raise HypothesisViolated(f"vertex {v.id}: p*n2 + n1(p-1) = {m} is not divisible by p")
            lifted = lift_degen_data(data, n=n1, m=m // p, variant=2)
    else:
        lifted = lift_degen_data(data, n=n2 if v.kind == "B" else None)
    w = lifted.generic
    return WittVec2(_boundary(w.x1), _boundary(w.x2))


def _pair_of(t: DegTypeP2) -> tuple[tuple[int, int], tuple[int, int]] | None:
    if t.split_level is not None:
        return None
    return (tuple(t.first), tuple(t.second))


def _rank_p2_type(v: Vertex, point: Point, p: int):
    w = _vertex_lift_p2(v, point, p)
    if v.kind in ("A", "B") and not any(j < 0 for (_, j), _ in w.x1.items()) \
            and not any(j < 0 for (_, j), _ in w.x2.items()):
        return None
    return _pair_of(classify_boundary_p2(w.x1, w.x2))


# ------------------------------------------------------------------ structure

def _check_structure(tree: DegenTree, rep: ValidationReport) -> dict[str, str] | None:
    """Deg.2: tree shape, unique origin, orientation away from the origin.
    Returns the parent map on success."""
    ids = [v.id for v in tree.vertices]
    ok = rep.add("Deg.2", len(ids) == len(set(ids)) and ids, "vertices", "vertex ids must be unique and nonempty")
    ok &= rep.add("Deg.2", tree.root.vertex in ids, "root", f"origin vertex {tree.root.vertex!r} must exist")
    for e in tree.edges:
        ok &= rep.add("Deg.2", e.source in ids and e.target in ids and e.source != e.target,
                      e.id, "edge endpoints must be two distinct vertices")
    if not ok:
        return None
    rep.add("Deg.2", len(tree.edges) == len(ids) - 1, "graph",
            f"a tree on {len(ids)} vertices has {len(ids) - 1} edges, got {len(tree.edges)}")
    parent: dict[str, str] = {tree.root.vertex: ""}
    queue = deque([tree.root.vertex])
    adj: dict[str, list[Edge]] = {i: [] for i in ids}
    for e in tree.edges:
        adj[e.source].append(e)
        adj[e.target].append(e)
    while queue:
        cur = queue.popleft()
        for e in adj[cur]:
            other = e.target if e.source == cur else e.source
            if other in parent:
                continue
            parent[other] = cur
            rep.add("Deg.2", e.source == cur, e.id,
                    f"edge must be oriented away from the origin ({cur} -> {other})")
            queue.append(other)
    rep.add("Deg.2", len(parent) == len(ids), "graph", "the tree must be connected")
    for v in tree.vertices:
        pts = [pt for _, _, pt in tree.points_of(v.id)]
        rep.add("Deg.2", len(pts) == len(set(pts)), v.id, "special points on a vertex must be distinct")
    return parent


# ------------------------------------------------------------------ rank p

def validate_degen_p(tree: DegenTree) -> ValidationReport:
    if tree.rank != "p":
        raise SchemaError("validate_degen_p needs a rank-p tree")
    p = tree.p
    rep = ValidationReport("p")
    n_h, m_h = tree.header
    rep.add("Deg.1", tree.r >= 0, "header", f"r={tree.r} must be >= 0")
    rep.add("Deg.1", n_h >= 0 and m_h % p != 0, "header", f"header type ({n_h}, {m_h}) needs n >= 0, m prime to p")
    rep.add("Deg.1", tree.r + m_h - 1 >= 0, "header", f"r+m-1 = {tree.r + m_h - 1} must be >= 0")
    if _check_structure(tree, rep) is None:
        return rep

    vmap = {v.id: v for v in tree.vertices}
    computed: dict[tuple[str, Point], tuple[int, int] | None] = {}
    for v in tree.vertices:
        f = v.payload["f"]
        rep.add("Deg.4", isinstance(v.n, int) and v.n >= 0, v.id, f"n={v.n} must be a nonnegative integer")
        if v.n > 0:
            rep.add("Deg.4", not local_series(f, 0).is_pth_power(), v.id,
                    "an alpha_p payload must not be a p-th power")
        pts = {pt for _, _, pt in tree.points_of(v.id)}
        stray = [q for q in f.poles() if q not in pts]
        rep.add("Deg.4", not stray, v.id, f"payload has poles {stray} outside the special points")
        for _, _, pt in tree.points_of(v.id):
            try:
                computed[(v.id, pt)] = _rank_p_type(f, v.n, pt)
            except AswError as exc:
                computed[(v.id, pt)] = None
                rep.add("Deg.4", False, f"{v.id}@{pt}", f"payload type not computable: {exc}")

    def stored_ok(vid: str, pt: Point, m: int, label: str, where: str):
        v = vmap[vid]
        got = computed.get((vid, pt))
        if got is None:
            return
        want = (0, 0) if (v.n == 0 and m == 0) else (v.n, m)
        rep.add(label, got == want, where, f"payload gives type {got}, stored {want}")

    # Deg.5: marked points and the root conductor
    rt = tree.root
    v0 = vmap[rt.vertex]
    rep.add("Deg.5", rt.m == -m_h, "root", f"root conductor {rt.m} must equal -m = {-m_h}")
    stored_ok(rt.vertex, rt.point, rt.m, "Deg.5", "root")
    for v in tree.vertices:
        for mp in v.marked:
            rep.add("Deg.5", mp.m == 0 and v.n == 0 or mp.m % p != 0, mp.id,
                    f"conductor {mp.m} must be prime to p")
            if v.n > 0:
                rep.add("Deg.5", mp.m <= -1, mp.id, f"radicial vertex needs m <= -1 at smooth points, got {mp.m}")
            stored_ok(v.id, mp.point, mp.m, "Deg.5", mp.id)

    # Deg.6: edge conductors
    for e in tree.edges:
        split = e.m_source == 0 and e.m_target == 0
        rep.add("Deg.6", split or (e.m_source % p and e.m_target % p), e.id,
                f"edge conductors {e.m_source}, {e.m_target} must be prime to p")
        rep.add("Deg.6", e.m_source + e.m_target == 0, e.id,
                f"m + m' = {e.m_source + e.m_target} must vanish")
        stored_ok(e.source, e.source_point, e.m_source, "Deg.6", e.id)
        stored_ok(e.target, e.target_point, e.m_target, "Deg.6", e.id)

    # Deg.4 strict decrease of n toward the ends (toward etale vertices)
    for e in tree.edges:
        ns, nt = vmap[e.source].n, vmap[e.target].n
        ok = (nt < ns) if ns > 0 else (nt == 0)
        rep.add("Deg.4", ok, e.id, f"n must decrease strictly along the orientation: {ns} -> {nt}")

    # Deg.7: thickness and level relations
    for where, e_val, ns, nt, m in (
            [("root", rt.e, n_h, v0.n, m_h)]
            + [(e.id, e.e, vmap[e.source].n, vmap[e.target].n, e.m_source) for e in tree.edges]):
        if not rep.add("Deg.7", e_val > 0 and e_val % p == 0, where,
                       f"thickness e={e_val} must be a positive multiple of p"):
            continue
        t = e_val // p
        rep.add("Deg.7", ns - nt == m * t, where, f"n - n' = {ns - nt} must equal m*t = {m * t}")

    # Deg.8: genus identity, right-hand side recomputed from payloads
    try:
        g_tree = tree_genus_p(tree, computed)
        g_head = (tree.r + m_h - 1) * (p - 1)
        ok = rep.add("Deg.8", g_head == 2 * g_tree, "genus",
                     f"(r+m-1)(p-1)/2 = {g_head}/2 but the etale vertices give {g_tree}")
        rep.genus = g_tree if ok else None
    except AswError as exc:
        rep.add("Deg.8", False, "genus", str(exc))
    return rep


def _genus_num_p(tree: DegenTree, computed) -> int:
    total = 0
    for v in tree.vertices:
        if v.n != 0:
            continue
        s = -2
        for _, _, pt in tree.points_of(v.id):
            ty = computed.get((v.id, pt))
            if ty is None:
                raise HypothesisViolated(f"no type at {v.id}@{pt}")
            if ty != (0, 0):
                s += -ty[1] + 1
        total += s
    return total


def tree_genus_p(tree: DegenTree, computed=None) -> int:
    """Sum over etale vertices of (-2 + sum (c_j + 1))(p-1)/2, with c_j the pole orders."""
    p = tree.p
    if computed is None:
        computed = {(v.id, pt): _rank_p_type(v.payload["f"], v.n, pt)
                    for v in tree.vertices for _, _, pt in tree.points_of(v.id)}
    num = _genus_num_p(tree, computed) * (p - 1)
    if num % 2:
        raise HypothesisViolated(f"tree genus numerator {num} is odd")
    return num // 2


# ------------------------------------------------------------------ rank p^2

def _d_point(pair, p: int, kind: str) -> int:
    (_, m1), (_, m2) = pair
    c1 = -m1
    if kind == "B":
        return c1 + 1
    c2 = -m2
    return p * c1 + c2 + p + 1


def validate_degen_p2(tree: DegenTree, strict_paper: bool = False) -> ValidationReport:
    if tree.rank != "p2":
        raise SchemaError("validate_degen_p2 needs a rank-p^2 tree")
    p = tree.p
    P = _P(p)
    rep = ValidationReport("p2")
    if tree.irreducible_fibres_assumed:
        rep.notes.append("irreducibility of the fibres over every component is assumed by the input, not verified")
    (n1h, m1h), (n2h, m2h) = tree.header
    hdr = DegTypeP2((n1h, m1h), (n2h, m2h))
    rep.add("Deg.1", tree.r >= 0, "header", f"r={tree.r} must be >= 0")
    rep.add("Deg.1", p * n2h >= n1h * P, "header", f"n2 >= n1(p(p-1)+1)/p fails for ({n1h}, {n2h})")
    rep.add("Deg.1", tree.r + p * m1h + m2h - p - 1 >= 0, "header",
            f"r+p*m1+m2-p-1 = {tree.r + p * m1h + m2h - p - 1} must be >= 0")
    rep.add("Deg.1", is_admissible_pair(hdr, p), "header", f"header pair {hdr} must be admissible")
    if _check_structure(tree, rep) is None:
        return rep
    vmap = {v.id: v for v in tree.vertices}

    computed: dict[tuple[str, Point], Any] = {}
    for v in tree.vertices:
        n1, n2 = v.n
        kind_ok = {"A": n1 == 0 and n2 == 0, "B": n1 == 0 and n2 > 0, "C": n1 > 0}.get(v.kind, False)
        rep.add("Deg.3", kind_ok, v.id, f"kind {v.kind!r} does not match levels ({n1}, {n2})")
        rep.add("Deg.3", p * n2 >= n1 * P, v.id, f"n2 >= n1(p(p-1)+1)/p fails for ({n1}, {n2})")
        if v.kind == "C":
            rep.add("Deg.3", len(v.payload["c"]) == p - 1, v.id, f"kind C needs {p - 1} functions c_j")
        if not (kind_ok and (v.kind != "C" or len(v.payload["c"]) == p - 1)):
            continue
        pts = {pt for _, _, pt in tree.points_of(v.id)}
        stray = sorted({q for f in [v.payload["u1"], v.payload["u2"], *v.payload["c"]] for q in f.poles()
                        if q not in pts}, key=str)
        rep.add("Deg.3", not stray, v.id, f"payload has poles {stray} outside the special points")
        for _, _, pt in tree.points_of(v.id):
            try:
                computed[(v.id, pt)] = _rank_p2_type(v, pt, p)
            except AswError as exc:
                computed[(v.id, pt)] = "error"
                rep.add("Deg.3'", False, f"{v.id}@{pt}", f"factorized cover not reconstructible: {exc}")

    def stored_ok(vid: str, pt: Point, m, label: str, where: str):
        got = computed.get((vid, pt), "error")
        if got == "error":
            return
        v = vmap[vid]
        want = None if (v.kind == "A" and tuple(m) == (0, 0)) else ((v.n[0], m[0]), (v.n[1], m[1]))
        rep.add(label, got == want, where, f"recomputed pair {got}, stored {want}")

    rt = tree.root
    v0 = vmap[rt.vertex]
    rep.add("Deg.4", tuple(rt.m) == (-m1h, -m2h), "root", f"root pair {rt.m} must be (-m1, -m2) = {(-m1h, -m2h)}")
    stored_ok(rt.vertex, rt.point, rt.m, "Deg.4", "root")
    for v in tree.vertices:
        for mp in v.marked:
            pr = DegTypeP2((v.n[0], mp.m[0]), (v.n[1], mp.m[1]))
            rep.add("Deg.4", is_admissible_pair(pr, p), mp.id, f"pair {pr} must be admissible")
            rep.add("Deg.4", satisfies_condition_star(pr, p), mp.id, f"pair {pr} must satisfy condition (*)")
            stored_ok(v.id, mp.point, mp.m, "Deg.4", mp.id)

    for e in tree.edges:
        vs, vt = vmap[e.source], vmap[e.target]
        for side, vv, m in (("source", vs, e.m_source), ("target", vt, e.m_target)):
            pr = DegTypeP2((vv.n[0], m[0]), (vv.n[1], m[1]))
            rep.add("Deg.5", is_admissible_pair(pr, p), f"{e.id}:{side}", f"pair {pr} must be admissible")
        rep.add("Deg.5", e.m_source[0] + e.m_target[0] == 0 and e.m_source[1] + e.m_target[1] == 0, e.id,
                f"conductors {e.m_source} and {e.m_target} must be opposite")
        stored_ok(e.source, e.source_point, e.m_source, "Deg.5", e.id)
        stored_ok(e.target, e.target_point, e.m_target, "Deg.5", e.id)

    for where, e_val, ns, nt, m in (
            [("root", rt.e, (n1h, n2h), v0.n, (m1h, m2h))]
            + [(e.id, e.e, vmap[e.source].n, vmap[e.target].n, e.m_source) for e in tree.edges]):
        if not rep.add("Deg.6", e_val > 0 and e_val % (p * p) == 0, where,
                       f"thickness e={e_val} must be a positive multiple of p^2"):
            continue
        t = e_val // (p * p)
        rep.add("Deg.6", ns[0] - nt[0] == p * t * m[0], where,
                f"n1 - n1' = {ns[0] - nt[0]} must equal p*t*m1 = {p * t * m[0]}")
        rep.add("Deg.6", ns[1] - nt[1] == t * m[1], where,
                f"n2 - n2' = {ns[1] - nt[1]} must equal t*m2 = {t * m[1]}")

    try:
        g_tree = tree_genus_p2(tree, computed, strict_paper)
        g_head = (tree.r + p * m1h + m2h - p - 1) * (p - 1)
        ok = rep.add("Deg.7", g_head == 2 * g_tree, "genus",
                     f"(r+p*m1+m2-p-1)(p-1)/2 = {g_head}/2 but the vertices give {g_tree}")
        rep.genus = g_tree if ok else None
    except AswError as exc:
        rep.add("Deg.7", False, "genus", str(exc))

    if all(c.ok for c in rep.checks if c.label in ("Deg.3", "Deg.3'", "Deg.4", "Deg.5", "Deg.6")):
        for cert in _compatibility_p2(tree):
            rep.add("Deg.8", cert["match"], cert["where"],
                    f"lift gives {cert['vertex_side']}, local model gives {cert['model_side']}")
    return rep


def tree_genus_p2(tree: DegenTree, computed=None, strict_paper: bool = False) -> int:
    """Sum over vertices of kind A or B of (-2(p+1) + sum d_j)(p-1)/2 for kind A and
    (-2 + sum d_j)(p-1)/2 for kind B; ``strict_paper`` uses -2 for both kinds."""
    p = tree.p
    if computed is None:
        computed = {(v.id, pt): _rank_p2_type(v, pt, p)
                    for v in tree.vertices if v.kind in ("A", "B") for _, _, pt in tree.points_of(v.id)}
    num = 0
    for v in tree.vertices:
        if v.kind not in ("A", "B"):
            continue
        s = -2 if (v.kind == "B" or strict_paper) else -2 * (p + 1)
        for _, _, pt in tree.points_of(v.id):
            pair = computed.get((v.id, pt))
            if pair == "error":
                raise HypothesisViolated(f"no type at {v.id}@{pt}")
            if pair is not None:
                s += _d_point(pair, p, v.kind)
        num += s
    num *= p - 1
    if num % 2:
        raise HypothesisViolated(f"tree genus numerator {num} is odd")
    return num // 2


def tree_genus(tree: DegenTree) -> int:
    """Genus of a validated tree, asserted equal to the header genus."""
    rep = validate(tree)
    if not rep.valid:
        raise HypothesisViolated(f"tree does not validate: {rep.failed_labels}")
    return rep.genus


def validate(tree: DegenTree, strict_paper: bool = False) -> ValidationReport:
    return validate_degen_p(tree) if tree.rank == "p" else validate_degen_p2(tree, strict_paper)


# ------------------------------------------------------------------ realization

@dataclass(frozen=True)
class LocalModel:
    location: str                 # 'vertex-open' | 'smooth-marked-point' | 'double-point'
    id: str
    equations: tuple[str, ...]
    predicted: tuple[tuple[str, Any], ...]

    def to_dict(self) -> dict:
        return {"location": self.location, "id": self.id, "equations": list(self.equations),
                "predicted": {k: _jsonable(v) for k, v in self.predicted}}


def _jsonable(x):
    if isinstance(x, tuple):
        return [_jsonable(y) for y in x]
    return x


@dataclass
class Realization:
    models: list[LocalModel]
    certificate: list[dict]
    notes: list[str]

    @property
    def compatible(self) -> bool:
        return all(c["match"] for c in self.certificate)

    def to_dict(self) -> dict:
        return {"compatible": self.compatible, "models": [m.to_dict() for m in self.models],
                "certificate": self.certificate, "notes": list(self.notes)}


def _edge_model_p(n_src: int, m_src: int, e: int, p: int) -> tuple[BiElement, BiElement]:
    """X^p - X = pi^(-p n) U^m on the annulus U V = pi^e, seen from both sides."""
    if m_src == 0:
        z = BiElement.zero(p)
        return z, z
    a = BiElement.monomial(p, -p * n_src, m_src)
    return a, _cross(a, e)


def _type_p(a: BiElement) -> tuple[int, int]:
    if len(a) == 0:
        return (0, 0)
    res = normalize_boundary_p(a)
    return (0, 0) if res.type.split else (res.type.n, res.type.m)


def _realize_p(tree: DegenTree) -> Realization:
    p = tree.p
    vmap = {v.id: v for v in tree.vertices}
    models: list[LocalModel] = []
    cert: list[dict] = []
    notes: list[str] = []
    vertex_types: dict[tuple[str, Point], tuple[int, int]] = {}
    for v in tree.vertices:
        f = v.payload["f"]
        pred = []
        for role, pid, pt in tree.points_of(v.id):
            ty = _rank_p_type(f, v.n, pt)
            vertex_types[(v.id, pt)] = ty
            pred.append((f"{pid}@{pt}", ty))
        models.append(LocalModel("vertex-open", v.id, (_rank_p_lift_text(f, v.n, p),), tuple(pred)))
    for v in tree.vertices:
        for mp in v.marked:
            a = BiElement.monomial(p, -p * v.n, mp.m) if mp.m else BiElement.zero(p)
            eq = (f"Y^p − π^{v.n * (p - 1)}Y = T^{mp.m}" if v.n else f"Y^p − Y = T^{mp.m}")
            ty = _type_p(a)
            models.append(LocalModel("smooth-marked-point", mp.id, (eq,), (("boundary", ty),)))
            got = vertex_types[(v.id, mp.point)]
            cert.append({"where": mp.id, "vertex_side": list(got), "model_side": list(ty), "match": got == ty})
    n_h, m_h = tree.header
    rt = tree.root
    sides = [("root", n_h, m_h, rt.e, None, (rt.vertex, rt.point))]
    for e in tree.edges:
        sides.append((e.id, vmap[e.source].n, e.m_source, e.e, (e.source, e.source_point),
                      (e.target, e.target_point)))
    for where, n_src, m_src, e_val, src, tgt in sides:
        a_src, a_tgt = _edge_model_p(n_src, m_src, e_val, p)
        t_src, t_tgt = _type_p(a_src), _type_p(a_tgt)
        t = e_val // p
        eq = f"X^p − X = π^{-p * n_src}U^{m_src} = π^{-p * n_src + e_val * m_src}V^{-m_src}, UV = π^{e_val}"
        models.append(LocalModel("double-point", where, (eq,), (("source", t_src), ("target", t_tgt))))
        if src is None:
            want = tuple(tree.header)
            cert.append({"where": f"{where}:header", "vertex_side": list(want), "model_side": list(t_src),
                         "match": want == t_src})
        else:
            got = vertex_types[src]
            cert.append({"where": f"{where}:source", "vertex_side": list(got), "model_side": list(t_src),
                         "match": got == t_src})
        got = vertex_types[tgt]
        cert.append({"where": f"{where}:target", "vertex_side": list(got), "model_side": list(t_tgt),
                     "match": got == t_tgt})
        if m_src == 0 and src is not None:
            notes.append(f"{where}: the cover is split over this double point, giving p double points "
                         f"upstairs and p-1 independent cycles in the dual graph")
        elif t and m_src:
            notes.append(f"{where}: double point of thickness {e_val} upstairs becomes thickness {t}")
    notes.append("thicknesses are realized formally; base ramification needed to realize e: "
                 + ", ".join(f"{w}={ev}" for w, _, _, ev, _, _ in sides))
    return Realization(models, cert, notes)


def _compatibility_p2(tree: DegenTree) -> list[dict]:
    p = tree.p
    vmap = {v.id: v for v in tree.vertices}
    out = []
    rt = tree.root
    w = _vertex_lift_p2(vmap[rt.vertex], rt.point, p)
    hdr = _pair_of(classify_boundary_p2(_cross(w.x1, rt.e), _cross(w.x2, rt.e)))
    want = tuple(tuple(x) for x in tree.header)
    out.append({"where": "root:header", "vertex_side": _jsonable(want), "model_side": _jsonable(hdr),
                "match": hdr == want})
    for e in tree.edges:
        w = _vertex_lift_p2(vmap[e.source], e.source_point, p)
        model_t = _pair_of(classify_boundary_p2(_cross(w.x1, e.e), _cross(w.x2, e.e)))
        got = _rank_p2_type(vmap[e.target], e.target_point, p)
        out.append({"where": f"{e.id}:target", "vertex_side": _jsonable(got), "model_side": _jsonable(model_t),
                    "match": got == model_t})
    return out


def _realize_p2(tree: DegenTree) -> Realization:
    p = tree.p
    vmap = {v.id: v for v in tree.vertices}
    models: list[LocalModel] = []
    cert: list[dict] = []
    for v in tree.vertices:
        pred = []
        eqs = []
        for role, pid, pt in tree.points_of(v.id):
            w = _vertex_lift_p2(v, pt, p)
            pred.append((f"{pid}@{pt}", _rank_p2_type(v, pt, p)))
            eqs.append(f"at {pid}: (T1^p, T2^p) − (T1, T2) = ({w.x1}, {w.x2})")
        models.append(LocalModel("vertex-open", v.id, tuple(eqs), tuple(pred)))
        for mp in v.marked:
            w = _vertex_lift_p2(v, mp.point, p)
            ty = _pair_of(classify_boundary_p2(w.x1, w.x2))
            models.append(LocalModel("smooth-marked-point", mp.id,
                                     (f"(X1^p, X2^p) − (X1, X2) = ({w.x1}, {w.x2})",), (("boundary", ty),)))
            want = ((v.n[0], mp.m[0]), (v.n[1], mp.m[1]))
            cert.append({"where": mp.id, "vertex_side": _jsonable(want), "model_side": _jsonable(ty),
                         "match": ty == want})
    rt = tree.root
    for where, vid, pt, e_val in ([("root", rt.vertex, rt.point, rt.e)]
                                  + [(e.id, e.source, e.source_point, e.e) for e in tree.edges]):
        w = _vertex_lift_p2(vmap[vid], pt, p)
        far = WittVec2(_cross(w.x1, e_val), _cross(w.x2, e_val))
        near_t = _pair_of(classify_boundary_p2(w.x1, w.x2))
        far_t = _pair_of(classify_boundary_p2(far.x1, far.x2))
        models.append(LocalModel("double-point", where,
                                 (f"(X1^p, X2^p) − (X1, X2) = ({w.x1}, {w.x2}) = ({far.x1}, {far.x2}), "
                                  f"UV = π^{e_val}",),
                                 (("vertex side", near_t), ("far side", far_t))))
    cert.extend(_compatibility_p2(tree))
    notes = ["irreducibility of the fibres over every component is assumed by the input, not verified"
             if tree.irreducible_fibres_assumed else
             "irreducibility of the fibres over every component was not asserted by the input"]
    return Realization(models, cert, notes)


def realize_degen(tree: DegenTree) -> Realization:
    """Emit local models for a valid tree and certify that every shared boundary
    gets the same degeneration type from both sides."""
    rep = validate(tree)
    if not rep.valid:
        raise HypothesisViolated(f"tree does not validate: {rep.failed_labels}")
    real = _realize_p(tree) if tree.rank == "p" else _realize_p2(tree)
    bad = [c for c in real.certificate if not c["match"]]
    if bad:
        c = bad[0]
        raise CompatibilityFailure(f"{c['where']}: vertex side {c['vertex_side']} vs model {c['model_side']}")
    return real


# ------------------------------------------------------------------ fixtures

def ex_single_etale_vertex(p: int, t: int = 1) -> DegenTree:
    """One etale line with conductor 2 at the root: genus (p-1)/2 (p odd)."""
    return DegenTree.from_dict({
        "rank": "p", "p": p, "header": {"r": 0, "type": [2 * t, 2]},
        "root": {"vertex": "X1", "point": "inf", "m": -2, "e": p * t},
        "vertices": [{"id": "X1", "n": 0, "payload": {"f": [[0, 2, 1]]}}],
        "edges": [],
    })


def ex_two_etale_vertices(p: int, m: int = 1, m_prime: int | None = None, t: int = 1,
                          t_edge: int = 1) -> DegenTree:
    """Two etale lines joined by a split edge; the origin has conductor m at the root
    and the second line conductor m' at a smooth marked point."""
    if m_prime is None:
        m_prime = next(k for k in range(m + 1, m + 2 * p + 2) if k % p)
    return DegenTree.from_dict({
        "rank": "p", "p": p, "header": {"r": m_prime - 1, "type": [m * t, m]},
        "root": {"vertex": "X1", "point": "inf", "m": -m, "e": p * t},
        "vertices": [
            {"id": "X1", "n": 0, "payload": {"f": [[0, m, 1]]}},
            {"id": "X2", "n": 0, "payload": {"f": [[0, -m_prime, 1]]},
             "marked": [{"id": "x2", "point": 0, "m": -m_prime}]},
        ],
        "edges": [{"id": "z1", "source": "X1", "target": "X2", "source_point": 0,
                   "target_point": "inf", "m_source": 0, "m_target": 0, "e": p * t_edge}],
    })


def ex_radicial_chain(p: int, c: int | None = None, t_root: int = 1, t_edge: int = 1) -> DegenTree:
    """A radicial origin line joined to an etale end line: genus (c-1)(p-1)/2."""
    if c is None:
        c = 1 if p == 2 else 2
    n0 = c * t_edge
    return DegenTree.from_dict({
        "rank": "p", "p": p, "header": {"r": 0, "type": [n0 + c * t_root, c]},
        "root": {"vertex": "X0", "point": "inf", "m": -c, "e": p * t_root},
        "vertices": [
            {"id": "X0", "n": n0, "payload": {"f": [[0, c, 1]]}},
            {"id": "X1", "n": 0, "payload": {"f": [[0, -c, 1]]}},
        ],
        "edges": [{"id": "z1", "source": "X0", "target": "X1", "source_point": 0,
                   "target_point": 0, "m_source": c, "m_target": -c, "e": p * t_edge}],
    })


def ex_kind_c_vertex(p: int, nt: int = 1, t: int = 1) -> DegenTree:
    """Single alpha_p-by-alpha_p line with levels (p*nt, nt*(p(p-1)+1)) over an etale header."""
    if nt % p == 0:
        raise HypothesisViolated("nt must be prime to p")
    P = _P(p)
    n1, n2 = p * nt, nt * P
    m1, m2 = -n1 // (p * t), -n2 // t
    if n1 % (p * t) or n2 % t:
        raise HypothesisViolated("t must divide nt")
    r = p + 1 - p * m1 - m2
    return DegenTree.from_dict({
        "rank": "p2", "p": p, "header": {"r": r, "pair": [[0, m1], [0, m2]]},
        "root": {"vertex": "X1", "point": "inf", "m": [-m1, -m2], "e": p * p * t},
        "vertices": [{"id": "X1", "n": [n1, n2], "kind": "C",
                      "payload": {"u1": [[0, -nt, 1]], "u2": [], "c": [[] for _ in range(p - 1)]},
                      "marked": [{"id": "x1", "point": 0, "m": [-nt, -nt * P]}]}],
        "edges": [],
        "irreducible_fibres_assumed": True,
    })
