"""Content dictionary document for the tensor1 symbols."""

from __future__ import annotations

from xml.sax.saxutils import escape

from .om import TENSOR1_SYMBOLS

CD_NS = "http://www.openmath.org/OpenMathCD"

CD_DESCRIPTION = (
    "Symbols for writing tensor formulas in component form relative to "
    "arbitrary (including curvilinear) coordinate frames: coordinate tuples, "
    "Cartesian coordinates and unit vectors, basis vectors and covectors, "
    "variance-tagged indexes, tensor components, the metric tensor, the "
    "Kronecker tensor and the permutation symbol."
)

# name -> (role, description)
DEFINITIONS = {
    "tuple": (
        "application",
        "n-ary constructor of an ordered n-tuple holding its arguments in the given order. "
        "Intended for coordinate lists, which are not vectors in general coordinates.",
    ),
    "tuple_selector": (
        "application",
        "Binary accessor: given an n-tuple and a natural number k with k <= n, yields the k-th element.",
    ),
    "Cartesian": (
        "application",
        "Unary: for a natural number k, the k-th coordinate of a right-handed Cartesian frame.",
    ),
    "unit_Cartesian": (
        "application",
        "Unary: for a natural number k, the k-th orthonormal basis vector e_k of the Cartesian frame.",
    ),
    "Kronecker_tensor": (
        "application",
        "The mixed identity tensor delta^i_j, one for equal indexes and zero otherwise; the "
        "argument is the dimension. It pairs a basis with its dual basis.",
    ),
    "basis_selector": (
        "application",
        "Binary: an ordered basis and a covar_index or contra_index applied to a natural number. "
        "A covar_index selects basis vector g_i, a contra_index selects dual basis covector g^i.",
    ),
    "tensor_selector": (
        "application",
        "Ternary: a tensor, a tuple of contra_index/covar_index values, and a frame. Yields the "
        "scalar component of the tensor in that frame. The number of indexes equals the tensor "
        "order and components are stored row-major (last index fastest).",
    ),
    "contra_index": (
        "application",
        "Unary: marks a natural number as a contravariant (upper) index.",
    ),
    "covar_index": (
        "application",
        "Unary: marks a natural number as a covariant (lower) index.",
    ),
    "metric_tensor": (
        "application",
        "The symmetric, non-degenerate covariant metric g_ij of a frame, giving squared lengths "
        "g_ij v^i v^j and relating covariant and contravariant components.",
    ),
    "Levi-Civita": (
        "application",
        "The totally antisymmetric permutation symbol; the argument is the dimension of the space. "
        "Components are the sign of the index permutation and zero when an index repeats.",
    ),
}

assert tuple(DEFINITIONS) == TENSOR1_SYMBOLS


def emit_cd() -> str:
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<CD xmlns="{CD_NS}">',
        "  <CDName>tensor1</CDName>",
        "  <CDBase>http://www.openmath.org/cd</CDBase>",
        "  <CDURL>http://www.openmath.org/cd/tensor1.ocd</CDURL>",
        "  <CDStatus>experimental</CDStatus>",
        "  <CDVersion>1</CDVersion>",
        "  <CDRevision>0</CDRevision>",
        f"  <Description>{escape(CD_DESCRIPTION)}</Description>",
    ]
    for name, (role, desc) in DEFINITIONS.items():
        lines += [
            "  <CDDefinition>",
            f"    <Name>{escape(name)}</Name>",
            f"    <Role>{role}</Role>",
            f"    <Description>{escape(desc)}</Description>",
            "  </CDDefinition>",
        ]
    lines.append("</CD>")
    return "\n".join(lines) + "\n"
