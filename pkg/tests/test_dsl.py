from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modgrow import dsl
from modgrow.errors import DslSyntaxError, SignatureParseError
from modgrow.gateway import load_template
from modgrow.reference_modules import (
    CHOOSE_ATTRIBUTE_SOURCE,
    SORT_SPATIAL_SOURCE,
    fixture_signatures,
)
from modgrow.registry import builtin_library, signatures

from program_corpus import CORPUS, PURSE_PROGRAM


def corpus_signatures():
    sigs = signatures(builtin_library()) + fixture_signatures()
    template = load_template("initialization")
    sigs.append(dsl.parse_signature_block(template.body))  # COMPARE_SIZE header
    return sigs


class TestParse:
    def test_purse_program_shape(self):
        program = dsl.parse_program(PURSE_PROGRAM)
        assert len(program.statements) == 6
        st5 = program.statements[4]
        assert st5.module_name == "EVAL"
        (pname, arg), = st5.args
        assert pname == "expr" and arg.kind == "template-string"
        assert arg.placeholders() == ["ANSWER0"]

    def test_minimal_program(self):
        program = dsl.parse_program("FINAL_RESULT=RESULT(var=IMAGE)")
        assert len(program.statements) == 1
        arg = program.statements[0].args[0][1]
        assert arg.kind == "variable-reference" and arg.value == "IMAGE"

    def test_line_numbers_skip_blanks(self):
        program = dsl.parse_program("BOX0=LOC(image=IMAGE,object='cat')\n\nFINAL_RESULT=RESULT(var=BOX0)")
        assert [s.line_no for s in program.statements] == [1, 3]

    def test_malformed_line_raises_with_line_no(self):
        with pytest.raises(DslSyntaxError) as err:
            dsl.parse_program("BOX0=LOC(image=IMAGE\nFINAL_RESULT=RESULT(var=BOX0)")
        assert err.value.diagnostics[0].code == "SYNTAX"
        assert err.value.diagnostics[0].line_no == 1

    def test_empty_source_rejected(self):
        with pytest.raises(DslSyntaxError):
            dsl.parse_program("   \n  ")

    def test_duplicate_keyword_rejected(self):
        with pytest.raises(DslSyntaxError):
            dsl.parse_program("BOX0=LOC(image=IMAGE,image=IMAGE)")

    def test_string_escape(self):
        program = dsl.parse_program(r"ANSWER0=VQA(image=IMAGE,question='who\'s there')" "\nFINAL_RESULT=RESULT(var=ANSWER0)")
        assert program.statements[0].args[1][1].value == "who's there"

    def test_negative_and_float_numbers(self):
        program = dsl.parse_program(
            "BOXLIST1=SORT_SPATIAL(image=IMAGE,box_list=BOXLIST0,location='left',index=-1)"
        )
        assert program.statements[0].arg_map()["index"].value == -1
        program = dsl.parse_program("IMAGE0=CROP(image=IMAGE,box=BOX0)\nANSWER0=EVAL(expr=f\"1.5\")")
        assert program.statements[1].args[0][1].kind == "template-string"


class TestSerialize:
    @pytest.mark.parametrize("name,text,full,bindings", CORPUS, ids=[c[0] for c in CORPUS])
    def test_corpus_round_trip_byte_identical(self, name, text, full, bindings):
        assert dsl.serialize_program(dsl.parse_program(text)) == text

    def test_reparse_structural_equality(self):
        program = dsl.parse_program(PURSE_PROGRAM)
        again = dsl.parse_program(dsl.serialize_program(program))
        assert dsl.programs_equal(program, again)

    def test_minimal_exact(self):
        text = "FINAL_RESULT=RESULT(var=ANSWER0)"
        assert dsl.serialize_program(dsl.parse_program(text)) == text


class TestValidate:
    def test_corpus_validates_clean(self):
        sigs = corpus_signatures()
        for name, text, full, bindings in CORPUS:
            diags = dsl.check_program(text, sigs, bindings, require_result=full)
            assert diags == [], (name, diags)

    def test_unknown_module_flagged(self, builtin_lib):
        diags = dsl.check_program(
            "FLAG0=COMPARE_SIZE(image=IMAGE,box0=BOX0,box1=BOX0)\nFINAL_RESULT=RESULT(var=FLAG0)",
            signatures(builtin_lib),
            {"IMAGE": "image", "BOX0": "box-list"},
        )
        assert [d.code for d in diags] == ["UNKNOWN_MODULE"]
        assert diags[0].line_no == 1

    def test_undefined_var_and_missing_result(self, builtin_lib):
        diags = dsl.check_program("ANSWER0=COUNT(box=BOX9)", signatures(builtin_lib), {})
        codes = {d.code for d in diags}
        assert codes == {"UNDEFINED_VAR", "MISSING_RESULT"}

    def test_misspelled_keyword_is_arity_mismatch(self, builtin_lib):
        diags = dsl.check_program(
            "BOX0=LOC(image=IMAGE,objct='cat')\nFINAL_RESULT=RESULT(var=BOX0)",
            signatures(builtin_lib),
            {"IMAGE": "image"},
        )
        codes = [d.code for d in diags]
        assert "ARITY_MISMATCH" in codes  # unknown objct and missing object

    def test_reassignment_flagged(self, builtin_lib):
        diags = dsl.check_program(
            "BOX0=LOC(image=IMAGE,object='cat')\nBOX0=LOC(image=IMAGE,object='dog')\n"
            "FINAL_RESULT=RESULT(var=BOX0)",
            signatures(builtin_lib),
            {"IMAGE": "image"},
        )
        assert any(d.code == "REASSIGNMENT" and d.line_no == 2 for d in diags)

    def test_type_mismatch_flagged(self, builtin_lib):
        diags = dsl.check_program(
            "ANSWER0=COUNT(box='cat')\nFINAL_RESULT=RESULT(var=ANSWER0)",
            signatures(builtin_lib),
            {},
        )
        assert any(d.code == "TYPE_MISMATCH" for d in diags)

    def test_template_on_non_template_param(self, builtin_lib):
        diags = dsl.check_program(
            'BOX0=LOC(image=IMAGE,object=f"{IMAGE}")\nFINAL_RESULT=RESULT(var=BOX0)',
            signatures(builtin_lib),
            {"IMAGE": "image"},
        )
        assert any(d.code == "TYPE_MISMATCH" for d in diags)

    def test_validate_never_raises_and_is_pure(self, builtin_lib):
        program = dsl.parse_program(PURSE_PROGRAM)
        sigs = signatures(builtin_lib)
        first = dsl.validate_program(program, sigs, {"IMAGE": "image"})
        second = dsl.validate_program(program, sigs, {"IMAGE": "image"})
        assert first == second == []


class TestSignatureBlocks:
    def test_compare_size_header(self):
        template = load_template("initialization")
        sig = dsl.parse_signature_block(template.body)
        assert sig.name == "COMPARE_SIZE"
        assert sig.params == (("image", "image"), ("box0", "box-list"), ("box1", "box-list"))
        assert sig.returns == "boolean"
        assert any("COMPARE_SIZE(image=IMAGE" in ex for ex in sig.usage_examples)

    def test_sort_spatial_source(self):
        sig = dsl.parse_signature_block(SORT_SPATIAL_SOURCE)
        assert sig.params == (
            ("image", "image"),
            ("box_list", "box-list"),
            ("location", "text"),
            ("index", "number"),
        )
        assert sig.returns == "box-list"

    def test_missing_output_section(self):
        broken = CHOOSE_ATTRIBUTE_SOURCE.replace("Output:", "Something:")
        with pytest.raises(SignatureParseError):
            dsl.parse_signature_block(broken)

    def test_render_parse_round_trip(self, builtin_lib):
        for sig in signatures(builtin_lib):
            rendered = dsl.render_signature_block(sig)
            parsed = dsl.parse_signature_block(rendered)
            assert parsed.name == sig.name
            assert parsed.params == sig.params
            assert parsed.returns == sig.returns


# --- grammar-driven round-trip property ------------------------------------

_ident = st.from_regex(r"[A-Z][A-Z0-9_]{0,6}", fullmatch=True)
_string_chars = st.text(
    alphabet=st.characters(codec="ascii", exclude_characters="\\'\"\n\r"), min_size=0, max_size=12
)
_template_chars = st.from_regex(r"[a-z '{}<>=0-9A-Z_+\-*/.]{0,20}", fullmatch=True).filter(
    lambda s: '"' not in s and dsl.PLACEHOLDER_RE.sub("", s).count("{") == 0
    and dsl.PLACEHOLDER_RE.sub("", s).count("}") == 0
)


@st.composite
def _arg(draw):
    kind = draw(st.sampled_from(["string-literal", "number", "variable-reference", "template-string"]))
    if kind == "string-literal":
        return dsl.Arg(kind, draw(_string_chars))
    if kind == "number":
        if draw(st.booleans()):
            return dsl.Arg(kind, draw(st.integers(min_value=-9999, max_value=9999)))
        value = draw(st.floats(min_value=-99.0, max_value=99.0, allow_nan=False))
        return dsl.Arg(kind, float(round(value, 3)))
    if kind == "variable-reference":
        return dsl.Arg(kind, draw(_ident))
    return dsl.Arg(kind, draw(_template_chars))


@st.composite
def _program(draw):
    n = draw(st.integers(min_value=1, max_value=6))
    statements = []
    for i in range(n):
        arg_names = draw(
            st.lists(st.from_regex(r"[a-z][a-z0-9_]{0,5}", fullmatch=True), min_size=0,
                     max_size=3, unique=True)
        )
        args = tuple((name, draw(_arg())) for name in arg_names)
        statements.append(
            dsl.Statement(target=f"V{i}", module_name=draw(_ident), args=args, line_no=i + 1)
        )
    return dsl.Program(statements=tuple(statements))


@given(_program())
@settings(max_examples=200, deadline=None)
def test_round_trip_property(program):
    text = dsl.serialize_program(program)
    parsed = dsl.parse_program(text)
    assert dsl.programs_equal(parsed, program)
    assert dsl.serialize_program(parsed) == text
