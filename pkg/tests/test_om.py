import math

import pytest
from hypothesis import given

from omtensor.errors import BadName, UnsupportedElement, XmlSyntax
from omtensor.om import (
    Application,
    Float,
    Integer,
    SumBinder,
    Symbol,
    Variable,
    apply,
    parse_xml,
    serialize_xml,
    sym,
    walk,
)
from strategies import om_trees, xml_floats

NS = 'xmlns="http://www.openmath.org/OpenMath"'


def wrap(body: str) -> str:
    return f"<OMOBJ {NS}>{body}</OMOBJ>"


@given(om_trees(leaf_floats=xml_floats))
def test_serialize_parse_roundtrip(tree):
    assert parse_xml(serialize_xml(tree)) == tree


@given(om_trees())
def test_serialization_is_canonical(tree):
    text = serialize_xml(tree)
    assert serialize_xml(parse_xml(text)) == text
    assert text.endswith("</OMOBJ>\n")


@given(om_trees())
def test_child_spans_nest_inside_parent(tree):
    parsed = parse_xml(serialize_xml(tree))
    for node in walk(parsed):
        assert node.span is not None
        if isinstance(node, Application):
            for c in (node.head, *node.args):
                assert node.span.contains(c.span)


def test_simple_application():
    node = parse_xml(wrap('<OMA><OMS cd="tensor1" name="Cartesian"/><OMI>2</OMI></OMA>'))
    assert node == apply("Cartesian", Integer(2))


def test_spans_line_and_column():
    text = f'<OMOBJ {NS}>\n  <OMA>\n    <OMS cd="tensor1" name="Cartesian"/>\n    <OMI>1</OMI>\n  </OMA>\n</OMOBJ>'
    node = parse_xml(text)
    assert (node.span.line, node.span.column) == (2, 3)
    assert (node.head.span.line, node.head.span.column) == (3, 5)
    assert (node.args[0].span.line, node.args[0].span.column) == (4, 5)
    assert text[node.args[0].span.start : node.args[0].span.end] == "<OMI>1</OMI>"


def test_span_counts_bytes_for_multibyte_text():
    text = f'<!-- é --><OMOBJ {NS}><OMV name="x"/></OMOBJ>'
    node = parse_xml(text)
    raw = text.encode()
    assert raw[node.span.start : node.span.end] == b'<OMV name="x"/>'


def test_integer_forms():
    assert parse_xml(wrap("<OMI> -42 </OMI>")) == Integer(-42)
    assert parse_xml(wrap("<OMI>x1F</OMI>")) == Integer(31)
    assert parse_xml(wrap("<OMI>-x10</OMI>")) == Integer(-16)


def test_float_forms():
    assert parse_xml(wrap('<OMF dec="2.5e-3"/>')) == Float(0.0025)
    assert parse_xml(wrap('<OMF dec="-INF"/>')) == Float(-math.inf)
    assert math.isnan(parse_xml(wrap('<OMF dec="NaN"/>')).value)
    # IEEE big-endian hex of 1.0
    assert parse_xml(wrap('<OMF hex="3FF0000000000000"/>')) == Float(1.0)


def test_sum_binder():
    body = (
        '<OMA><OMS cd="arith1" name="sum"/>'
        '<OMA><OMS cd="interval1" name="integer_interval"/><OMI>1</OMI><OMI>3</OMI></OMA>'
        '<OMBIND><OMS cd="fns1" name="lambda"/><OMBVAR><OMV name="j"/></OMBVAR><OMV name="j"/></OMBIND>'
        "</OMA>"
    )
    node = parse_xml(wrap(body))
    assert node == SumBinder("j", Integer(1), Integer(3), Variable("j"))


def test_namespace_is_optional():
    assert parse_xml('<OMOBJ><OMV name="x"/></OMOBJ>') == Variable("x")


def test_hyphenated_symbol_name():
    assert parse_xml(wrap('<OMS cd="tensor1" name="Levi-Civita"/>')) == sym("Levi-Civita")


@pytest.mark.parametrize(
    "body,exc",
    [
        ("<OMSTR>hi</OMSTR>", UnsupportedElement),
        ('<OMBIND><OMS cd="fns1" name="lambda"/><OMBVAR><OMV name="x"/></OMBVAR><OMV name="x"/></OMBIND>',
         UnsupportedElement),
        ('<OMS cd="tensor1" name="9lives"/>', BadName),
        ('<OMV name="a b"/>', BadName),
        ("<OMA><OMI>1</OMI>", XmlSyntax),
        ("<OMI>1.5</OMI>", XmlSyntax),
        ('<OMA><OMS cd="tensor1" name="tuple"/></OMA>', XmlSyntax),
    ],
)
def test_parse_errors(body, exc):
    with pytest.raises(exc) as info:
        parse_xml(wrap(body))
    assert info.value.code


def test_error_carries_position():
    with pytest.raises(UnsupportedElement) as info:
        parse_xml(f"<OMOBJ {NS}>\n<OMA>\n<OMS cd='a' name='b'/>\n<OMSTR>x</OMSTR></OMA></OMOBJ>")
    assert info.value.span.line == 4


def test_symbol_validation():
    with pytest.raises(BadName):
        Symbol("tensor 1", "x")
    assert Symbol("my_cd", "f-g").name == "f-g"


def test_span_of_empty_element_before_closing_tag():
    text = wrap('<OMA><OMS cd="tensor1" name="tuple"/><OMV name="a&gt;b_"/></OMA>').replace("a&gt;b_", "ab")
    node = parse_xml(text)
    raw = text.encode()
    assert raw[node.args[0].span.start : node.args[0].span.end] == b'<OMV name="ab"/>'
    assert raw[node.span.start : node.span.end].endswith(b"</OMA>")
