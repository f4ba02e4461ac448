"""Cell complexes with qubits (or group spins) on edges.

Two families are provided:

* ``Lattice``: the square lattice on an ``Lx x Ly`` torus. Vertex
  ``(x, y)``; the horizontal edge ``h(x, y)`` runs ``(x, y) -> (x+1, y)``
  and has index ``y*Lx + x``; the vertical edge ``v(x, y)`` runs
  ``(x, y) -> (x, y+1)`` and has index ``Lx*Ly + y*Lx + x``. Cell
  ``(x, y)`` has lower-left vertex ``(x, y)``.
* ``capped_cylinder``: a sphere made of rings of vertices joined by
  vertical edges and closed by two poles. Small enough for brute-force
  Hilbert-space checks while still carrying annuli with a genuine hole.

Rectangular annuli on the torus are rings of cells. The site set is the
set of edges strictly inside the outer rectangle and not on or inside the
hole rectangle. Both boundary rings belong to the complement, so a block
one cell narrower than the torus still contains no non-contractible loop.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence


class GeometryError(ValueError):
    """Invalid region or annulus request."""


class CellComplex:
    """Oriented 2-complex. Subclasses fill ``edge_ends`` and ``face_loops``.

    ``edge_ends[e] = (tail, head)`` are vertex ids. ``face_loops[f]`` is the
    boundary of face ``f`` as ``(edge, sign)`` pairs in traversal order,
    ``sign = +1`` when the edge is walked tail to head.
    """

    edge_ends: tuple[tuple[int, int], ...]
    face_loops: tuple[tuple[tuple[int, int], ...], ...]
    n_vertex_ids: int

    @property
    def n_sites(self) -> int:
        return len(self.edge_ends)

    @cached_property
    def vertex_edges(self) -> tuple[tuple[int, ...], ...]:
        inc: list[list[int]] = [[] for _ in range(self.n_vertex_ids)]
        for e, (t, h) in enumerate(self.edge_ends):
            inc[t].append(e)
            if h != t:
                inc[h].append(e)
        return tuple(tuple(sorted(set(x))) for x in inc)

    @cached_property
    def stars(self) -> tuple[tuple[int, ...], ...]:
        return tuple(s for s in self.vertex_edges if s)

    @cached_property
    def star_vertices(self) -> tuple[int, ...]:
        return tuple(v for v, s in enumerate(self.vertex_edges) if s)

    @cached_property
    def plaquettes(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(sorted({e for e, _ in loop})) for loop in self.face_loops)

    @cached_property
    def site_neighbors(self) -> tuple[frozenset[int], ...]:
        """Edges sharing a star or a plaquette with each edge."""
        member: list[set[int]] = [set() for _ in range(self.n_sites)]
        for supp in self.stars + self.plaquettes:
            for s in supp:
                member[s].update(supp)
        for s in range(self.n_sites):
            member[s].discard(s)
        return tuple(frozenset(m) for m in member)

    def region(self, sites: Iterable[int]) -> "Region":
        return Region(self, tuple(sorted(set(int(s) for s in sites))))

    def all_sites(self) -> "Region":
        return Region(self, tuple(range(self.n_sites)))

    def euler_characteristic(self) -> int:
        return len(self.stars) - self.n_sites + len(self.face_loops)

    def describe(self) -> str:
        return f"complex[{self.n_sites} edges]"


@dataclass(frozen=True, eq=True)
class Lattice(CellComplex):
    Lx: int
    Ly: int

    def __post_init__(self):
        if self.Lx < 2 or self.Ly < 2:
            raise GeometryError(f"torus dimensions must be >= 2, got {self.Lx}x{self.Ly}")

    @property
    def n_sites(self) -> int:
        return 2 * self.Lx * self.Ly

    @property
    def n_vertices(self) -> int:
        return self.Lx * self.Ly

    @property
    def n_vertex_ids(self) -> int:
        return self.Lx * self.Ly

    @property
    def n_plaquettes(self) -> int:
        return self.Lx * self.Ly

    def describe(self) -> str:
        return f"{self.Lx}x{self.Ly}"

    def vid(self, x: int, y: int) -> int:
        return (y % self.Ly) * self.Lx + (x % self.Lx)

    def h(self, x: int, y: int) -> int:
        return (y % self.Ly) * self.Lx + (x % self.Lx)

    def v(self, x: int, y: int) -> int:
        return self.Lx * self.Ly + (y % self.Ly) * self.Lx + (x % self.Lx)

    def edge_coords(self, s: int) -> tuple[str, int, int]:
        """Return ``(kind, x, y)`` with kind ``'h'`` or ``'v'``."""
        half = self.Lx * self.Ly
        kind = "h" if s < half else "v"
        s %= half
        return kind, s % self.Lx, s // self.Lx

    def edge_vertices(self, s: int) -> tuple[tuple[int, int], tuple[int, int]]:
        kind, x, y = self.edge_coords(s)
        if kind == "h":
            return (x, y), ((x + 1) % self.Lx, y)
        return (x, y), (x, (y + 1) % self.Ly)

    @cached_property
    def edge_ends(self) -> tuple[tuple[int, int], ...]:
        out = []
        for s in range(self.n_sites):
            (a, b), (c, d) = self.edge_vertices(s)
            out.append((self.vid(a, b), self.vid(c, d)))
        return tuple(out)

    @cached_property
    def face_loops(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        # counterclockwise from the lower-left corner
        return tuple(
            ((self.h(x, y), 1), (self.v(x + 1, y), 1), (self.h(x, y + 1), -1), (self.v(x, y), -1))
            for y in range(self.Ly)
            for x in range(self.Lx)
        )

    def star(self, x: int, y: int) -> tuple[int, ...]:
        return tuple(sorted({self.h(x, y), self.h(x - 1, y), self.v(x, y), self.v(x, y - 1)}))

    def plaquette(self, x: int, y: int) -> tuple[int, ...]:
        return tuple(sorted({self.h(x, y), self.h(x, y + 1), self.v(x, y), self.v(x + 1, y)}))

    @cached_property
    def stars(self) -> tuple[tuple[int, ...], ...]:
        return tuple(self.star(x, y) for y in range(self.Ly) for x in range(self.Lx))

    @cached_property
    def star_vertices(self) -> tuple[int, ...]:
        return tuple(range(self.n_vertices))

    @cached_property
    def plaquettes(self) -> tuple[tuple[int, ...], ...]:
        return tuple(self.plaquette(x, y) for y in range(self.Ly) for x in range(self.Lx))

    def block_interior_edges(self, x0: int, y0: int, w: int, h: int) -> set[int]:
        """Edges strictly inside the rectangle of ``w x h`` cells at ``(x0, y0)``."""
        out = set()
        for j in range(1, h):
            for i in range(w):
                out.add(self.h(x0 + i, y0 + j))
        for j in range(h):
            for i in range(1, w):
                out.add(self.v(x0 + i, y0 + j))
        return out

    def block_edges(self, x0: int, y0: int, w: int, h: int) -> set[int]:
        """Edges on or inside the closed rectangle of ``w x h`` cells at ``(x0, y0)``."""
        out = set()
        for j in range(h + 1):
            for i in range(w):
                out.add(self.h(x0 + i, y0 + j))
        for j in range(h):
            for i in range(w + 1):
                out.add(self.v(x0 + i, y0 + j))
        return out


def build_torus(Lx: int, Ly: int) -> Lattice:
    return Lattice(Lx, Ly)


def parse_lattice(text: str) -> Lattice:
    """``"8x8"`` -> ``Lattice(8, 8)``."""
    try:
        a, b = text.lower().split("x")
        return Lattice(int(a), int(b))
    except (ValueError, TypeError) as exc:
        raise GeometryError(f"bad lattice spec {text!r}, expected LxxLy like 8x8") from exc


class CappedCylinder(CellComplex):
    """Sphere built from rings of vertices, two poles and vertical edges.

    Adjacent rings must have equal sizes (square faces) or sizes differing
    by a factor of two (each vertex of the small ring fans out to two
    vertices of the large ring, giving alternating triangles and
    quadrilaterals). Ring edge ``i`` of a ring runs from its vertex ``i`` to
    vertex ``i+1``; a ring of size two is a pair of parallel edges.
    """

    def __init__(self, rings: Sequence[int]):
        rings = tuple(int(k) for k in rings)
        if len(rings) < 1 or any(k < 2 for k in rings):
            raise GeometryError("every ring needs at least two vertices")
        for a, b in zip(rings, rings[1:]):
            if not (a == b or a == 2 * b or b == 2 * a):
                raise GeometryError(f"adjacent rings {a} and {b} must be equal or differ by a factor 2")
        self.rings = rings
        north = 0
        vid = 1
        ring_v: list[list[int]] = []
        for k in rings:
            ring_v.append(list(range(vid, vid + k)))
            vid += k
        south = vid
        self.n_vertex_ids = vid + 1
        ends: list[tuple[int, int]] = []
        faces: list[tuple[tuple[int, int], ...]] = []

        def edge(t: int, h: int) -> int:
            ends.append((t, h))
            return len(ends) - 1

        self.spokes_north = [edge(north, v) for v in ring_v[0]]
        self.ring_edges: list[list[int]] = []
        for vs in ring_v:
            k = len(vs)
            self.ring_edges.append([edge(vs[i], vs[(i + 1) % k]) for i in range(k)])
        self.verticals: list[list[int]] = []
        for r in range(len(rings) - 1):
            up, dn = ring_v[r], ring_v[r + 1]
            ku, kd = len(up), len(dn)
            if ku == kd:
                self.verticals.append([edge(up[i], dn[i]) for i in range(ku)])
            elif ku == 2 * kd:
                self.verticals.append([edge(up[i], dn[i // 2]) for i in range(ku)])
            else:
                self.verticals.append([edge(up[i // 2], dn[i]) for i in range(kd)])
        self.spokes_south = [edge(v, south) for v in ring_v[-1]]

        k0 = rings[0]
        for i in range(k0):
            faces.append(((self.spokes_north[i], 1), (self.ring_edges[0][i], 1), (self.spokes_north[(i + 1) % k0], -1)))
        for r in range(len(rings) - 1):
            faces.extend(self._band_faces(r))
        kl = rings[-1]
        last = self.ring_edges[-1]
        for i in range(kl):
            faces.append(((last[i], 1), (self.spokes_south[(i + 1) % kl], 1), (self.spokes_south[i], -1)))
        self.edge_ends = tuple(ends)
        self.face_loops = tuple(faces)
        self.ring_vertices = ring_v
        if self.euler_characteristic() != 2:
            raise GeometryError("capped cylinder is not a sphere")

    def _band_faces(self, r: int):
        up_e, dn_e, vert = self.ring_edges[r], self.ring_edges[r + 1], self.verticals[r]
        ku, kd = len(up_e), len(dn_e)
        out = []
        if ku == kd:
            for i in range(ku):
                j = (i + 1) % ku
                out.append(((up_e[i], 1), (vert[j], 1), (dn_e[i], -1), (vert[i], -1)))
        elif ku == 2 * kd:
            # up vertices 2j, 2j+1 hang from down vertex j
            for j in range(kd):
                a, b, c = 2 * j, 2 * j + 1, (2 * j + 2) % ku
                out.append(((up_e[a], 1), (vert[b], 1), (vert[a], -1)))
                out.append(((up_e[b], 1), (vert[c], 1), (dn_e[j], -1), (vert[b], -1)))
        else:
            for j in range(ku):
                a, b, c = 2 * j, 2 * j + 1, (2 * j + 2) % kd
                out.append(((vert[a], 1), (dn_e[a], 1), (vert[b], -1)))
                out.append(((up_e[j], 1), (vert[c], 1), (dn_e[b], -1), (vert[b], -1)))
        return out

    def describe(self) -> str:
        return "cyl[" + ",".join(str(k) for k in self.rings) + "]"

    def __eq__(self, other) -> bool:
        return isinstance(other, CappedCylinder) and other.rings == self.rings

    def __hash__(self) -> int:
        return hash(("cyl", self.rings))


def capped_cylinder(rings: Sequence[int]) -> CappedCylinder:
    return CappedCylinder(rings)


@dataclass(frozen=True)
class Region:
    lattice: CellComplex
    sites: tuple[int, ...]

    def __post_init__(self):
        if any(s < 0 or s >= self.lattice.n_sites for s in self.sites):
            raise GeometryError("region sites outside the lattice")
        if list(self.sites) != sorted(set(self.sites)):
            object.__setattr__(self, "sites", tuple(sorted(set(self.sites))))

    def __len__(self) -> int:
        return len(self.sites)

    def __iter__(self):
        return iter(self.sites)

    def __contains__(self, s) -> bool:
        return s in self.siteset

    @cached_property
    def siteset(self) -> frozenset[int]:
        return frozenset(self.sites)

    def complement(self) -> "Region":
        return Region(self.lattice, tuple(s for s in range(self.lattice.n_sites) if s not in self.siteset))

    def union(self, *others: "Region") -> "Region":
        acc = set(self.sites)
        for o in others:
            acc.update(o.sites)
        return self.lattice.region(acc)

    def __or__(self, other: "Region") -> "Region":
        return self.union(other)

    def isdisjoint(self, other: "Region") -> bool:
        return self.siteset.isdisjoint(other.siteset)

    def issubset(self, other: "Region") -> bool:
        return self.siteset <= other.siteset


def components(lat: CellComplex, sites: Iterable[int]) -> list[list[int]]:
    """Connected components under the common-star-or-plaquette adjacency."""
    todo = set(sites)
    comps = []
    nbrs = lat.site_neighbors
    while todo:
        start = min(todo)
        todo.discard(start)
        comp = [start]
        queue = deque([start])
        while queue:
            s = queue.popleft()
            for t in nbrs[s]:
                if t in todo:
                    todo.discard(t)
                    comp.append(t)
                    queue.append(t)
        comps.append(sorted(comp))
    return comps


@dataclass(frozen=True)
class Annulus:
    region: Region
    width: int
    inner_boundary: tuple[int, ...] = field(compare=False)
    outer_boundary: tuple[int, ...] = field(compare=False)
    hole: Region = field(compare=False)
    label: str = ""
    anchor: tuple[int, int] | None = None
    outer_w: int | None = None
    outer_h: int | None = None
    contractible: bool = True

    @property
    def lattice(self) -> CellComplex:
        return self.region.lattice

    @property
    def sites(self) -> tuple[int, ...]:
        return self.region.sites

    @property
    def hole_w(self) -> int:
        return self.outer_w - 2 * self.width

    @property
    def hole_h(self) -> int:
        return self.outer_h - 2 * self.width

    def describe(self) -> str:
        return self.label

    def shrink(self, r: int) -> "Annulus":
        """Rectangular annulus of width ``t - r`` around the same hole centre.

        The outer rectangle loses ``ceil(r/2)`` cells on every side and the
        hole grows by ``floor(r/2)``.
        """
        if self.anchor is None:
            raise GeometryError("only rectangular annuli can be shrunk")
        if r < 0 or r >= self.width:
            raise GeometryError(f"cannot shrink width {self.width} by {r}")
        out = (r + 1) // 2
        x, y = self.anchor
        return rect_annulus(self.lattice, (x + out, y + out), self.outer_w - 2 * out, self.outer_h - 2 * out, self.width - r)


def _split_boundaries(lat: CellComplex, sites: set[int], inner_hint: set[int]):
    comps = components(lat, set(range(lat.n_sites)) - sites)
    if len(comps) != 2 or len(components(lat, sites)) != 1:
        raise GeometryError("region is not an annulus (complement must have exactly 2 components)")
    inner = [c for c in comps if set(c) <= inner_hint]
    if len(inner) != 1:
        raise GeometryError("could not identify the inner complement component")
    d_in = set(inner[0])
    d_out = set(range(lat.n_sites)) - sites - d_in
    nb = lat.site_neighbors
    inner_b = tuple(sorted(s for s in sites if nb[s] & d_in))
    outer_b = tuple(sorted(s for s in sites if nb[s] & d_out))
    return inner_b, outer_b, d_in


def rect_annulus(lat: Lattice, anchor: tuple[int, int], outer_w: int, outer_h: int, width: int) -> Annulus:
    if width < 1:
        raise GeometryError("annulus width must be >= 1")
    if outer_w >= lat.Lx or outer_h >= lat.Ly:
        raise GeometryError(
            f"non-contractible: {outer_w}x{outer_h} block does not fit strictly inside the {lat.Lx}x{lat.Ly} torus"
        )
    hw, hh = outer_w - 2 * width, outer_h - 2 * width
    if hw < 1 or hh < 1:
        raise GeometryError(f"disc, not annulus: hole {hw}x{hh} is empty")
    x0, y0 = anchor
    outer = lat.block_interior_edges(x0, y0, outer_w, outer_h)
    hole_closed = lat.block_edges(x0 + width, y0 + width, hw, hh)
    sites = outer - hole_closed
    inner_b, outer_b, d_in = _split_boundaries(lat, sites, hole_closed)
    x0, y0 = x0 % lat.Lx, y0 % lat.Ly
    return Annulus(
        region=lat.region(sites),
        width=width,
        inner_boundary=inner_b,
        outer_boundary=outer_b,
        hole=lat.region(d_in),
        label=f"{x0},{y0},{outer_w},{outer_h},w{width}",
        anchor=(x0, y0),
        outer_w=outer_w,
        outer_h=outer_h,
    )


def parse_annulus(lat: Lattice, text: str) -> Annulus:
    """``"x,y,W,H,wT"`` -> rectangular annulus."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 5 or not parts[4].lower().startswith("w"):
        raise GeometryError(f"bad annulus spec {text!r}, expected x,y,W,H,wT")
    try:
        x, y, W, H = (int(p) for p in parts[:4])
        t = int(parts[4][1:])
    except ValueError as exc:
        raise GeometryError(f"bad annulus spec {text!r}") from exc
    return rect_annulus(lat, (x, y), W, H, t)


def ring_annulus(cc: CappedCylinder, first: int, last: int, closed: bool = True) -> Annulus:
    """Band of a capped cylinder between rings ``first`` and ``last``.

    Contains the ring edges of ``first..last`` (the last ring only when
    ``closed``) and the vertical edges between them.
    """
    if not (0 <= first < last < len(cc.rings)):
        raise GeometryError("need 0 <= first < last < number of rings")
    sites: set[int] = set()
    for r in range(first, last + (1 if closed else 0)):
        sites.update(cc.ring_edges[r])
    for r in range(first, last):
        sites.update(cc.verticals[r])
    north_side = set(cc.spokes_north)
    for r in range(first):
        north_side.update(cc.ring_edges[r])
        north_side.update(cc.verticals[r])
    north_side -= sites
    inner_b, outer_b, d_in = _split_boundaries(cc, sites, north_side)
    tag = "" if closed else "o"
    return Annulus(
        region=cc.region(sites),
        width=last - first,
        inner_boundary=inner_b,
        outer_boundary=outer_b,
        hole=cc.region(d_in),
        label=f"rings{first}-{last}{tag}",
    )


def rect_disc(lat: Lattice, anchor: tuple[int, int], w: int, h: int) -> Region:
    """Closed rectangle of cells as a site region."""
    if w >= lat.Lx or h >= lat.Ly or w < 1 or h < 1:
        raise GeometryError("disc must fit strictly inside the torus")
    return lat.region(lat.block_edges(anchor[0], anchor[1], w, h))


def fatten(lat: CellComplex, X: Region | Iterable[int], terms: Sequence[Sequence[int]]) -> Region:
    """Union of the supports that intersect ``X``."""
    xs = X.siteset if isinstance(X, Region) else frozenset(X)
    acc: set[int] = set()
    for supp in terms:
        if not xs.isdisjoint(supp):
            acc.update(supp)
    return lat.region(acc)


def separated(X: Region, Z: Region, terms: Sequence[Sequence[int]]) -> bool:
    """True if no support meets both ``X`` and ``Z``."""
    xs, zs = X.siteset, Z.siteset
    return not any((not xs.isdisjoint(t)) and (not zs.isdisjoint(t)) for t in terms)


def tripartition(a: Annulus, terms: Sequence[Sequence[int]] | None = None) -> tuple[Region, Region, Region]:
    """Cut a rectangular annulus into quadrants about the hole centre.

    X is the lower-left arc, Z the upper-right arc and Y the two remaining
    arcs. Diagonal placement keeps X and Z apart even when the torus leaves
    only a one-cell gap around the annulus. Separation is certified against
    ``terms`` (default: stars and plaquettes of the lattice).
    """
    lat = a.lattice
    if a.anchor is None:
        raise GeometryError("tripartition needs a rectangular annulus")
    if a.width < 2:
        raise GeometryError("annulus too thin to separate (width must be >= 2)")
    x0, y0 = a.anchor
    cx, cy = a.outer_w / 2, a.outer_h / 2
    X, Y, Z = [], [], []
    for s in a.sites:
        kind, x, y = lat.edge_coords(s)
        u, w = (x - x0) % lat.Lx, (y - y0) % lat.Ly
        mu, mw = (u + 0.5, float(w)) if kind == "h" else (float(u), w + 0.5)
        # ties go left/down so the wrap-around neighbours of X are in Y
        if mu <= cx and mw <= cy:
            X.append(s)
        elif mu > cx and mw > cy:
            Z.append(s)
        else:
            Y.append(s)
    rx, ry, rz = lat.region(X), lat.region(Y), lat.region(Z)
    if terms is None:
        terms = lat.stars + lat.plaquettes
    if not separated(rx, rz, terms):
        raise GeometryError("tripartition does not separate X from Z")
    if len(components(lat, ry.sites)) != 2:
        raise GeometryError("Y must consist of two arcs")
    return rx, ry, rz
