"""A subset of the GCL geometry construction language.

Supported commands::

    point n x y [x1 y1]    towards n a b t     midpoint n a b
    line n a b             circle n c p        intersec2 n1 n2 o1 o2
    drawsegment a b        drawline a b        drawcircle c
    cmark p  cmark_t p  cmark_b p  mark_t p    distance n a b
    procedure name { params } { body }         call name { args }
    include file           animation_frames n m
    hide_layers_from d     layer k             % comment

plus four extensions used by the bundled interpretations::

    extend n a b p q       the point beyond b on ray ab with |bn| = |pq|
    random n lo hi         a number drawn uniformly from [lo, hi)
    drawrightangle v a b   right-angle square at v between rays va and vb
    drawticks a b k        k parallel-arrow ticks on segment ab

``point`` with five arguments is the animated form; only the first
position is used.  Procedure parameters are bound by name: assigning to a
parameter inside the body defines the caller's object.
"""

from __future__ import annotations

import math
import random as _random
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Union

from . import geometry as g
from .geometry import (
    Circle,
    GeoPoint,
    MarkPoint,
    RightAngleMark,
    Segment,
    Ticks,
)

ARITY = {
    "point": (3, 5), "towards": (4,), "midpoint": (3,), "line": (3,), "circle": (3,),
    "intersec2": (4,), "drawsegment": (2,), "drawline": (2,), "drawcircle": (1,),
    "cmark": (1,), "cmark_t": (1,), "cmark_b": (1,), "mark_t": (1,),
    "distance": (3,), "animation_frames": (2,), "hide_layers_from": (1,), "layer": (1,),
    "extend": (5,), "random": (3,), "drawrightangle": (3,), "drawticks": (3,),
}

MAX_CALL_DEPTH = 64


class GclError(Exception):
    pass


class GclSyntaxError(GclError):
    def __init__(self, msg: str, line: int, source: str = "<input>"):
        super().__init__(f"{source}:{line}: {msg}")
        self.line = line
        self.source = source


class UnknownCommand(GclSyntaxError):
    def __init__(self, command: str, line: int, source: str = "<input>"):
        super().__init__(f"unknown command {command!r}", line, source)
        self.command = command


class IncludeCycle(GclError):
    pass


class UndefinedName(GclError):
    def __init__(self, name: str, where: str = ""):
        super().__init__(f"{where}undefined name {name!r}")
        self.name = name


# --- program structure -----------------------------------------------------------

@dataclass(frozen=True)
class Command:
    op: str
    args: tuple[str, ...]
    line: int = field(default=0, compare=False)
    source: str = field(default="<input>", compare=False)


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple[str, ...]
    line: int = field(default=0, compare=False)
    source: str = field(default="<input>", compare=False)


@dataclass(frozen=True)
class Procedure:
    name: str
    params: tuple[str, ...]
    body: tuple
    line: int = field(default=0, compare=False)
    source: str = field(default="<input>", compare=False)


@dataclass(frozen=True)
class Include:
    name: str
    items: Optional[tuple] = None  # None: left unresolved


Item = Union[Command, Call, Procedure, Include]


@dataclass(frozen=True)
class GCLProgram:
    items: tuple

    def procedures(self) -> dict[str, Procedure]:
        out: dict[str, Procedure] = {}

        def walk(items):
            for it in items:
                if isinstance(it, Procedure):
                    if it.name in out:
                        raise GclError(f"procedure {it.name} defined twice")
                    out[it.name] = it
                elif isinstance(it, Include) and it.items:
                    walk(it.items)

        walk(self.items)
        return out


Resolver = Union[Mapping[str, str], Callable[[str], str], None]


def _lookup(resolver: Resolver, name: str) -> str:
    if resolver is None:
        raise GclError(f"cannot include {name}: no resolver")
    try:
        if callable(resolver):
            return resolver(name)
        return resolver[name]
    except (KeyError, FileNotFoundError, OSError):
        raise GclError(f"cannot include {name}: not found") from None


# --- parsing ------------------------------------------------------------------------

def _tokenize(text: str) -> list[tuple[str, int]]:
    out = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("%", 1)[0]
        for word in line.replace("{", " { ").replace("}", " } ").split():
            out.append((word, n))
    return out


class _Parser:
    def __init__(self, text: str, source: str, resolver: Resolver, stack: tuple, seen: set):
        self.toks = _tokenize(text)
        self.i = 0
        self.source = source
        self.resolver = resolver
        self.stack = stack
        self.seen = seen

    def err(self, msg, line=None):
        if line is None:
            line = self.toks[self.i][1] if self.i < len(self.toks) else \
                (self.toks[-1][1] if self.toks else 1)
        return GclSyntaxError(msg, line, self.source)

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        if self.i >= len(self.toks):
            raise self.err("unexpected end of input")
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, word):
        tok, line = self.take()
        if tok != word:
            raise self.err(f"expected {word!r}, found {tok!r}", line)

    def braced_names(self) -> tuple[str, ...]:
        self.expect("{")
        names = []
        while True:
            tok, line = self.take()
            if tok == "}":
                return tuple(names)
            if tok == "{":
                raise self.err("unexpected '{'", line)
            names.append(tok)

    def items(self, in_body: bool) -> tuple:
        out = []
        while True:
            tok, line = self.peek()
            if tok is None:
                if in_body:
                    raise self.err("unterminated procedure body")
                return tuple(out)
            if tok == "}":
                if not in_body:
                    raise self.err("unmatched '}'", line)
                self.i += 1
                return tuple(out)
            out.append(self.item())

    def item(self) -> Item:
        tok, line = self.take()
        if tok == "procedure":
            name, _ = self.take()
            params = self.braced_names()
            self.expect("{")
            body = self.items(in_body=True)
            for b in body:
                if isinstance(b, (Procedure, Include)):
                    raise self.err("procedures and includes must be top level", line)
            return Procedure(name, params, body, line, self.source)
        if tok == "call":
            name, _ = self.take()
            return Call(name, self.braced_names(), line, self.source)
        if tok == "include":
            name, _ = self.take()
            return self.include(name, line)
        if tok not in ARITY:
            if tok in ("{", "}"):
                raise self.err(f"unexpected {tok!r}", line)
            raise UnknownCommand(tok, line, self.source)
        args = []
        while self.i < len(self.toks) and self.toks[self.i][1] == line \
                and self.toks[self.i][0] not in ("{", "}"):
            args.append(self.toks[self.i][0])
            self.i += 1
        if len(args) not in ARITY[tok]:
            want = " or ".join(str(k) for k in ARITY[tok])
            raise self.err(f"{tok} takes {want} arguments, got {len(args)}", line)
        return Command(tok, tuple(args), line, self.source)

    def include(self, name: str, line: int) -> Include:
        if self.resolver is None:
            return Include(name, None)
        if name in self.stack:
            raise IncludeCycle(" -> ".join((*self.stack, name)))
        if name in self.seen:
            return Include(name, ())
        self.seen.add(name)
        text = _lookup(self.resolver, name)
        sub = _Parser(text, name, self.resolver, (*self.stack, name), self.seen)
        return Include(name, sub.items(in_body=False))


def parse_gcl(text: str, resolver: Resolver = None, source: str = "<input>") -> GCLProgram:
    """Parse GCL text; ``include`` lines are resolved through ``resolver``
    (a mapping or callable from file name to text) or kept unresolved."""
    p = _Parser(text, source, resolver, (source,), set())
    prog = GCLProgram(p.items(in_body=False))
    prog.procedures()  # duplicate check
    return prog


def print_gcl(items) -> str:
    """Text for ``items`` (a program or item tuple) in the grammar above."""
    if isinstance(items, GCLProgram):
        items = items.items
    lines: list[str] = []
    for it in items:
        _print_item(it, lines, "")
    return "\n".join(lines) + "\n"


def _print_item(it, lines, ind):
    if isinstance(it, Command):
        lines.append(f"{ind}{it.op} {' '.join(it.args)}")
    elif isinstance(it, Call):
        lines.append(f"{ind}call {it.name} {{ {' '.join(it.args)} }}")
    elif isinstance(it, Include):
        lines.append(f"{ind}include {it.name}")
    elif isinstance(it, Procedure):
        lines.append(f"{ind}procedure {it.name} {{ {' '.join(it.params)} }} {{")
        for b in it.body:
            _print_item(b, lines, ind + "  ")
        lines.append(f"{ind}}}")
    else:
        raise TypeError(it)


# --- evaluation -------------------------------------------------------------------

@dataclass(frozen=True)
class CircleObj:
    center: GeoPoint
    through: GeoPoint


@dataclass(frozen=True)
class LineObj:
    p: GeoPoint
    q: GeoPoint


@dataclass
class Scene:
    objects: dict = field(default_factory=dict)  # key -> GeoPoint | CircleObj | LineObj | float
    ops: list = field(default_factory=list)
    frames: Optional[int] = None  # from animation_frames
    hide_layers: bool = False
    max_layer: int = 0

    @property
    def points(self) -> dict[str, GeoPoint]:
        return {k: v for k, v in self.objects.items() if isinstance(v, GeoPoint)}

    @property
    def layer_count(self) -> int:
        used = max((op.layer for op in self.ops), default=-1)
        return max(used, self.max_layer if self.ops else -1) + 1

    def bbox(self) -> tuple[float, float, float, float]:
        """(minx, miny, maxx, maxy) over all drawn geometry, with a 5% margin."""
        pts = [p for op in self.ops for p in g.op_points(op)]
        if not pts:
            pts = list(self.points.values()) or [GeoPoint(0, 0), GeoPoint(1, 1)]
        xs = [p.x for p in pts]
        ys = [p.y for p in pts]
        x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
        w, h = x1 - x0, y1 - y0
        mx = 0.05 * w if w > 0 else 1.0
        my = 0.05 * h if h > 0 else 1.0
        return (x0 - mx, y0 - my, x1 + mx, y1 + my)


class Evaluator:
    """Executes GCL items against a growing Scene."""

    def __init__(self, procedures: Mapping[str, Procedure], rng: Optional[_random.Random] = None,
                 scene: Optional[Scene] = None, layer: int = 0):
        self.procs = dict(procedures)
        self.rng = rng if rng is not None else _random.Random(0)
        self.scene = scene if scene is not None else Scene()
        self.layer = layer
        self._frames = 0
        self._depth = 0

    # names ------------------------------------------------------------------
    def key(self, name: str, env: Optional[dict], define: bool = False) -> str:
        if env is None:
            return name
        if name in env:
            return env[name]
        if not define:
            raise UndefinedName(name)
        self._frames += 1
        env[name] = f"{name}@{self._frames}"
        return env[name]

    def get(self, name: str, env, kind):
        k = self.key(name, env)
        if k not in self.scene.objects:
            raise UndefinedName(name)
        obj = self.scene.objects[k]
        if not isinstance(obj, kind):
            want = "/".join(k.__name__ for k in (kind if isinstance(kind, tuple) else (kind,)))
            raise GclError(f"{name} is a {type(obj).__name__}, expected {want}")
        return obj

    def number(self, tok: str, env) -> float:
        try:
            v = float(tok)
        except ValueError:
            v = self.get(tok, env, float)
        if not math.isfinite(v):
            raise GclError(f"non-finite number {tok}")
        return v

    def define(self, name: str, env, value):
        self.scene.objects[self.key(name, env, define=True)] = value

    @staticmethod
    def label(key: str) -> str:
        return key.split("@", 1)[0]

    # execution ----------------------------------------------------------------
    def run(self, items, env: Optional[dict] = None):
        for it in items:
            if isinstance(it, Procedure):
                continue
            if isinstance(it, Include):
                if it.items is None:
                    raise GclError(f"include {it.name} was not resolved")
                self.run(it.items, env)
                continue
            try:
                if isinstance(it, Call):
                    self.call(it, env)
                else:
                    self.command(it, env)
            except (g.GeometryError, GclError) as e:
                if getattr(e, "located", False):
                    raise
                e.args = (f"{it.source}:{it.line}: {e}",)
                e.located = True
                raise

    def call(self, c: Call, env):
        proc = self.procs.get(c.name)
        if proc is None:
            raise UndefinedName(c.name, "call: ")
        if len(proc.params) != len(c.args):
            raise GclError(f"{c.name} expects {len(proc.params)} arguments, got {len(c.args)}")
        if self._depth >= MAX_CALL_DEPTH:
            raise GclError("procedure calls nested too deeply")
        inner = {p: self.key(a, env, define=True) for p, a in zip(proc.params, c.args)}
        self._depth += 1
        try:
            self.run(proc.body, inner)
        finally:
            self._depth -= 1

    def emit(self, op):
        self.scene.ops.append(op)

    def command(self, c: Command, env):
        op, a = c.op, c.args
        P = lambda i: self.get(a[i], env, GeoPoint)  # noqa: E731
        L = self.layer
        if op == "point":
            self.define(a[0], env, GeoPoint(self.number(a[1], env), self.number(a[2], env)))
        elif op == "towards":
            self.define(a[0], env, g.towards(P(1), P(2), self.number(a[3], env)))
        elif op == "midpoint":
            self.define(a[0], env, g.midpoint(P(1), P(2)))
        elif op == "extend":
            self.define(a[0], env, g.extend(P(1), P(2), g.dist(P(3), P(4))))
        elif op == "line":
            self.define(a[0], env, LineObj(P(1), P(2)))
        elif op == "circle":
            self.define(a[0], env, CircleObj(P(1), P(2)))
        elif op == "intersec2":
            o1 = self.get(a[2], env, (CircleObj, LineObj))
            o2 = self.get(a[3], env, (CircleObj, LineObj))
            p1, p2 = _intersect(o1, o2)
            self.define(a[0], env, p1)
            self.define(a[1], env, p2)
        elif op == "distance":
            self.define(a[0], env, g.dist(P(1), P(2)))
        elif op == "random":
            lo, hi = self.number(a[1], env), self.number(a[2], env)
            self.define(a[0], env, lo + (hi - lo) * self.rng.random())
        elif op == "drawsegment":
            self.emit(Segment(P(0), P(1), L))
        elif op == "drawline":
            self.emit(Segment(P(0), P(1), L, infinite=True))
        elif op == "drawcircle":
            c0 = self.get(a[0], env, CircleObj)
            self.emit(Circle(c0.center, c0.through, L))
        elif op in ("cmark", "cmark_t", "cmark_b", "mark_t"):
            pos = {"cmark": "none", "cmark_t": "t", "cmark_b": "b", "mark_t": "t"}[op]
            style = "plain-label" if op.startswith("mark") else "circled"
            self.emit(MarkPoint(P(0), self.label(self.key(a[0], env)), style, pos, L))
        elif op == "drawrightangle":
            self.emit(RightAngleMark(P(0), P(1), P(2), L))
        elif op == "drawticks":
            self.emit(Ticks(P(0), P(1), int(self.number(a[2], env)), L))
        elif op == "layer":
            k = int(self.number(a[0], env))
            if k < 0:
                raise GclError("negative layer")
            self.layer = k
            self.scene.max_layer = max(self.scene.max_layer, k)
        elif op == "animation_frames":
            self.scene.frames = int(self.number(a[0], env))
        elif op == "hide_layers_from":
            self.scene.hide_layers = True
        else:  # pragma: no cover - the parser rejects anything else
            raise UnknownCommand(op, c.line, c.source)


def _intersect(o1, o2) -> tuple[GeoPoint, GeoPoint]:
    if isinstance(o1, CircleObj) and isinstance(o2, CircleObj):
        return (g.circle_circle(o1.center, o1.through, o2.center, o2.through, "first"),
                g.circle_circle(o1.center, o1.through, o2.center, o2.through, "second"))
    if isinstance(o1, LineObj) and isinstance(o2, LineObj):
        p = g.line_line(o1.p, o1.q, o2.p, o2.q)
        return p, p
    line, circ = (o1, o2) if isinstance(o1, LineObj) else (o2, o1)
    return (g.line_circle(line.p, line.q, circ.center, circ.through, "first"),
            g.line_circle(line.p, line.q, circ.center, circ.through, "second"))


def evaluate(p: GCLProgram, seed: int = 0) -> Scene:
    ev = Evaluator(p.procedures(), _random.Random(seed))
    ev.run(p.items)
    return ev.scene


# --- frames and SVG -----------------------------------------------------------------

@dataclass(frozen=True)
class Frame:
    index: int  # 1-based
    total: int

    def __post_init__(self):
        if not 1 <= self.index <= self.total:
            raise ValueError(f"frame {self.index} outside 1..{self.total}")

    @property
    def visible_layers(self) -> range:
        return range(0, self.index)

    @property
    def highlighted(self) -> int:
        return self.index - 1


def frame_count(scene: Scene) -> int:
    return scene.frames if scene.frames else scene.layer_count + 1


def frames(scene: Scene) -> list[Frame]:
    n = frame_count(scene)
    return [Frame(i, n) for i in range(1, n + 1)]


MARK_RADIUS = 2.5
LABEL_PAD = 12
FONT_SIZE = 10


def _f(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def render_svg(scene: Scene, frame: Optional[Frame] = None, scale: float = 10.0) -> str:
    """One SVG document; ``frame=None`` draws every layer in black."""
    x0, y0, x1, y1 = scene.bbox()
    # fixed pixel padding keeps labels of extreme points inside the canvas
    W, H = (x1 - x0) * scale + 2 * LABEL_PAD, (y1 - y0) * scale + 2 * LABEL_PAD

    def X(p: GeoPoint) -> str:
        return _f((p.x - x0) * scale)

    def Y(p: GeoPoint) -> str:
        return _f((y1 - p.y) * scale)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_f(W)}" '
        f'height="{_f(H)}" viewBox="0 0 {_f(W)} {_f(H)}">',
        f'<rect x="0" y="0" width="{_f(W)}" height="{_f(H)}" fill="white"/>',
        f'<g transform="translate({LABEL_PAD},{LABEL_PAD})">',
    ]
    for op in scene.ops:
        if frame is not None and op.layer not in frame.visible_layers:
            continue
        color = "red" if frame is not None and op.layer == frame.highlighted else "black"
        width = "2" if op.role == "highlight" else "1"
        stroke = f'stroke="{color}" stroke-width="{width}"'
        if isinstance(op, Segment):
            p, q = (_clip_line(op.p, op.q, (x0, y0, x1, y1)) if op.infinite else (op.p, op.q))
            out.append(f'<line x1="{X(p)}" y1="{Y(p)}" x2="{X(q)}" y2="{Y(q)}" {stroke}/>')
        elif isinstance(op, Circle):
            r = g.dist(op.center, op.through) * scale
            out.append(f'<circle cx="{X(op.center)}" cy="{Y(op.center)}" r="{_f(r)}" '
                       f'fill="none" {stroke}/>')
        elif isinstance(op, MarkPoint):
            p = op.point
            if op.style == "circled":
                out.append(f'<circle cx="{X(p)}" cy="{Y(p)}" r="{_f(MARK_RADIUS)}" '
                           f'fill="white" {stroke}/>')
            if op.position != "none":
                dx, dy, anchor = {"t": (0, -6, "middle"), "b": (0, 6 + FONT_SIZE, "middle"),
                                  "r": (5, 4, "start")}[op.position]
                tx = _f((p.x - x0) * scale + dx)
                ty = _f((y1 - p.y) * scale + dy)
                out.append(f'<text x="{tx}" y="{ty}" font-family="sans-serif" '
                           f'font-size="{FONT_SIZE}" text-anchor="{anchor}" '
                           f'fill="{color}">{_escape(op.label)}</text>')
        elif isinstance(op, RightAngleMark):
            pts = _right_angle(op)
            out.append(f'<polyline points="{" ".join(f"{X(p)},{Y(p)}" for p in pts)}" '
                       f'fill="none" {stroke}/>')
        elif isinstance(op, Ticks):
            for pts in _ticks(op):
                out.append(f'<polyline points="{" ".join(f"{X(p)},{Y(p)}" for p in pts)}" '
                           f'fill="none" {stroke}/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _unit(v: GeoPoint) -> GeoPoint:
    n = v.norm()
    return GeoPoint(0, 0) if n == 0 else v.scale(1 / n)


def _right_angle(op: RightAngleMark) -> list[GeoPoint]:
    va, vb = op.toward_a - op.vertex, op.toward_b - op.vertex
    s = 0.15 * min(va.norm(), vb.norm())
    s = min(s, 1.5) if s > 0 else 0.5
    ua, ub = _unit(va).scale(s), _unit(vb).scale(s)
    v = op.vertex
    return [v + ua, v + ua + ub, v + ub]


def _ticks(op: Ticks) -> list[list[GeoPoint]]:
    d = op.q - op.p
    u = _unit(d)
    n = GeoPoint(-u.y, u.x)
    h = min(0.05 * d.norm(), 0.8) or 0.4
    m = g.midpoint(op.p, op.q)
    out = []
    for i in range(op.count):
        c = m + u.scale((i - (op.count - 1) / 2) * h)
        out.append([c - u.scale(h) + n.scale(h), c, c - u.scale(h) - n.scale(h)])
    return out


def _clip_line(p: GeoPoint, q: GeoPoint, box) -> tuple[GeoPoint, GeoPoint]:
    """Segment of the infinite line pq inside ``box`` (Liang-Barsky)."""
    x0, y0, x1, y1 = box
    dx, dy = q.x - p.x, q.y - p.y
    lo, hi = -math.inf, math.inf
    for d, a, b in ((dx, p.x, (x0, x1)), (dy, p.y, (y0, y1))):
        if abs(d) < 1e-15:
            if not b[0] <= a <= b[1]:
                return p, p
            continue
        t0, t1 = (b[0] - a) / d, (b[1] - a) / d
        lo, hi = max(lo, min(t0, t1)), min(hi, max(t0, t1))
    if lo > hi:
        return p, p
    return (GeoPoint(p.x + lo * dx, p.y + lo * dy), GeoPoint(p.x + hi * dx, p.y + hi * dy))
