import re

import pytest
from hypothesis import given, settings, strategies as st

from proofsketch import gcl
from proofsketch import geometry as g
from proofsketch.geometry import GeoPoint as P, MarkPoint, RightAngleMark

from conftest import GCL

LISTING_EXISTS = """\
procedure proposition_11_exists { a b c } {
  point a 8 2
  point b 22 7
  towards c a b 0.7
  cmark_t a
  cmark_t b
  cmark_t c
}
"""

LISTING_THEOREM = """\
procedure proposition_11 { a b c w } {
  call lemma_extension { a c a c w }
  mark_t w
  call proposition_01 { a w w1 }
  mark_t w1
  % --- Illustration for branch 2
  call defrightangle2 { a c w1 w }
}
"""

LISTING_MAIN = """\
% ----- Proof illustration -----
include proposition_11.gcl
include proposition_11_exists.gcl
include lemma_extension.gcl
include proposition_01.gcl
include defrightangle2.gcl
%-----
call proposition_11_exists { a b c }
call proposition_11 { a b c w }
"""


def library(extra=None):
    files = {p.name: p.read_text() for p in GCL.glob("*.gcl")}
    files.update(extra or {})
    return files


def run(text, **files):
    return gcl.evaluate(gcl.parse_gcl(text, library(files)))


def test_exists_listing_has_six_commands():
    prog = gcl.parse_gcl(LISTING_EXISTS)
    (proc,) = prog.items
    assert isinstance(proc, gcl.Procedure) and proc.params == ("a", "b", "c")
    assert len(proc.body) == 6
    assert all(isinstance(c, gcl.Command) for c in proc.body)


def test_main_listing_structure():
    prog = gcl.parse_gcl(LISTING_MAIN, library({"proposition_11.gcl": LISTING_THEOREM,
                                               "proposition_11_exists.gcl": LISTING_EXISTS}))
    assert sum(isinstance(i, gcl.Include) for i in prog.items) == 5
    assert sum(isinstance(i, gcl.Call) for i in prog.items) == 2


def test_unknown_command():
    with pytest.raises(gcl.UnknownCommand) as ei:
        gcl.parse_gcl("point p 0 0\nfoo x\n")
    assert ei.value.command == "foo" and ei.value.line == 2


def test_syntax_errors():
    with pytest.raises(gcl.GclSyntaxError):
        gcl.parse_gcl("midpoint m p\n")
    with pytest.raises(gcl.GclSyntaxError):
        gcl.parse_gcl("procedure p { A } {\n  cmark A\n")
    with pytest.raises(gcl.GclSyntaxError):
        gcl.parse_gcl("call p { A\n")


def test_include_cycle_and_missing():
    files = {"a.gcl": "include b.gcl\n", "b.gcl": "include a.gcl\n"}
    with pytest.raises(gcl.IncludeCycle):
        gcl.parse_gcl("include a.gcl\n", files)
    with pytest.raises(gcl.GclError):
        gcl.parse_gcl("include nowhere.gcl\n", {})


def test_include_resolved_once():
    files = {"p.gcl": "procedure p { A } {\n  cmark A\n}\n"}
    prog = gcl.parse_gcl("include p.gcl\ninclude p.gcl\npoint x 0 0\ncall p { x }\n", files)
    assert list(prog.procedures()) == ["p"]


def test_duplicate_procedures_rejected():
    text = "procedure p { A } {\n  cmark A\n}\nprocedure p { A } {\n  cmark A\n}\n"
    with pytest.raises(gcl.GclError):
        gcl.parse_gcl(text).procedures()


def test_call_arity_checked():
    text = "procedure p { A B } {\n  drawsegment A B\n}\npoint x 0 0\ncall p { x }\n"
    with pytest.raises(gcl.GclError):
        gcl.evaluate(gcl.parse_gcl(text))


def test_exists_listing_coordinates():
    s = run(LISTING_EXISTS + "call proposition_11_exists { a b c }\n")
    pts = s.points
    assert pts["a"] == P(8, 2) and pts["b"] == P(22, 7)
    assert abs(pts["c"].x - 17.8) < 1e-12 and abs(pts["c"].y - 5.5) < 1e-12
    marks = [op for op in s.ops if isinstance(op, MarkPoint)]
    assert [(m.label, m.style, m.position) for m in marks] == [
        ("a", "circled", "t"), ("b", "circled", "t"), ("c", "circled", "t")]


def test_midpoint_command():
    s = run("point p 0 0\npoint q 2 0\nmidpoint m p q\n")
    assert s.points["m"] == P(1, 0)


def test_undefined_name():
    with pytest.raises(gcl.UndefinedName):
        run("midpoint m p q\n")


def test_primitive_error_carries_location():
    text = "point a 0 0\npoint b 1 0\npoint c 5 0\npoint d 6 0\n" \
           "circle k1 a b\ncircle k2 c d\nintersec2 x y k1 k2\n"
    with pytest.raises(g.NoIntersection, match=":7:"):
        run(text)


def test_listing_files_evaluate_to_a_right_angle():
    s = run(LISTING_MAIN, **{"proposition_11.gcl": LISTING_THEOREM,
                           "proposition_11_exists.gcl": LISTING_EXISTS})
    pts = s.points
    a, c = pts["a"], pts["c"]
    w1 = next(v for k, v in pts.items() if k.split("@")[0] == "w1")
    assert abs(g.dot(a - c, w1 - c)) <= 1e-9 * g.dist(a, c) * g.dist(w1, c)
    assert any(isinstance(op, RightAngleMark) and op.vertex == c for op in s.ops)


def test_intersec2_orientation_matches_primitive():
    s = run("point a 0 0\npoint b 2 0\ncircle k1 a b\ncircle k2 b a\nintersec2 x y k1 k2\n")
    assert s.points["x"] == g.circle_circle(P(0, 0), P(2, 0), P(2, 0), P(0, 0), "first")
    assert s.points["y"] == g.circle_circle(P(0, 0), P(2, 0), P(2, 0), P(0, 0), "second")


@given(st.floats(-50, 50), st.floats(-50, 50), st.floats(-50, 50), st.floats(-50, 50),
       st.floats(0, 1))
def test_commands_agree_with_primitives(x1, y1, x2, y2, t):
    p, q = P(x1, y1), P(x2, y2)
    s = run(f"point p {x1!r} {y1!r}\npoint q {x2!r} {y2!r}\nmidpoint m p q\n"
            f"towards t p q {t!r}\n")
    assert s.points["m"] == g.midpoint(p, q)
    assert s.points["t"] == g.towards(p, q, t)
    if g.dist(p, q) > 1e-3:
        s = run(f"point p {x1!r} {y1!r}\npoint q {x2!r} {y2!r}\nextend e p q p q\n")
        assert s.points["e"] == g.extend(p, q, g.dist(p, q))


def test_layers_and_frames():
    text = "point a 0 0\npoint b 4 0\ncmark a\nlayer 1\ncmark b\nlayer 2\ndrawsegment a b\n" \
           "animation_frames 4 1\n"
    s = run(text)
    assert s.layer_count == 3 and gcl.frame_count(s) == 4
    fr = gcl.frames(s)
    assert [f.index for f in fr] == [1, 2, 3, 4]
    assert list(fr[0].visible_layers) == [0] and fr[0].highlighted == 0
    # the declared frame count wins over the number of layers actually used
    assert list(fr[-1].visible_layers) == [0, 1, 2, 3]


def _elements(svg):
    body = [ln for ln in svg.splitlines() if ln.startswith("<") and not ln.startswith(("<?", "<svg",
                                                                                      "</", "<g", "<rect"))]
    return [re.sub(r'(stroke|fill)="(red|black)"', "", ln) for ln in body]


def test_render_frames_red_and_monotone():
    text = "point a 0 0\npoint b 4 0\ncmark a\nlayer 1\ncmark b\nlayer 2\ndrawsegment a b\n"
    s = run(text)
    fr = gcl.frames(s)
    svgs = [gcl.render_svg(s, f) for f in fr]
    assert 'stroke="red"' in svgs[0]
    assert svgs[0].count("<circle") == 1
    for a, b in zip(svgs, svgs[1:]):
        ea, eb = _elements(a), _elements(b)
        assert all(ea.count(x) <= eb.count(x) for x in ea)
    assert gcl.render_svg(s, fr[1]) == svgs[1]


def test_svg_is_wellformed_and_flipped():
    import xml.dom.minidom
    s = run("point a 0 0\npoint b 10 10\ndrawsegment a b\n")
    svg = gcl.render_svg(s)
    doc = xml.dom.minidom.parseString(svg)
    (line,) = doc.getElementsByTagName("line")
    # model y grows upwards, SVG y downwards
    assert float(line.getAttribute("y1")) > float(line.getAttribute("y2"))


def test_bbox_margin():
    s = run("point a 0 0\npoint b 10 20\ndrawsegment a b\n")
    assert s.bbox() == pytest.approx((-0.5, -1.0, 10.5, 21.0))


@pytest.mark.parametrize("path", sorted(GCL.glob("*.gcl")), ids=lambda p: p.name)
def test_library_roundtrip(path):
    prog = gcl.parse_gcl(path.read_text(), source=path.name)
    again = gcl.parse_gcl(gcl.print_gcl(prog.items))
    assert again == prog


@settings(max_examples=50)
@given(st.lists(st.sampled_from(["point p 1 2", "midpoint m p q", "drawsegment p q", "cmark_t p",
                                 "layer 3", "call f { p q }", "towards t p q 0.5"]),
                max_size=8))
def test_parse_print_roundtrip(lines):
    text = "procedure f { A B } {\n  drawsegment A B\n}\n" + "\n".join(lines) + "\n"
    prog = gcl.parse_gcl(text)
    assert gcl.parse_gcl(gcl.print_gcl(prog.items)) == prog
