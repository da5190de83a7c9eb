import networkx as nx
import pytest

from aslkit.parser import ParseError, parse, try_parse
from aslkit.pretty import format_program
from aslkit.syntax import Consume, Diagnostic, Span, structure
from aslkit.validate import validate
from progen import random_program


class TestParse:
    def test_connection_service(self, connection_program):
        p = connection_program
        assert p.name == "Connection"
        assert len(p.adaptable_classes) == 1
        assert [s.name for s in p.adaptable_classes[0].adaptable_methods] == ["send", "connect"]
        assert [a.name for a in p.alternatives] == ["Bluetooth", "Wifi"]
        assert all(a.adapts == "Connection" for a in p.alternatives)

    def test_empty_file_is_a_vacuous_program(self):
        p = parse("")
        assert p.plain_classes == ()
        assert p.adaptable_classes == ()
        assert p.alternatives == ()

    def test_single_consume_body(self):
        source = """
        adaptable class C { adaptable fn m(); }
        alternative A adapts C { fn m() { consume Energy 3; } }
        """
        p = parse(source)
        (alt,) = p.alternatives
        (mdef,) = alt.methods
        assert structure(mdef.body) == structure((Consume("Energy", 3),))

    @pytest.mark.parametrize(
        "source",
        [
            "bogus C {}",
            "class C {",
            "class C { fn m() { repeat n { use R; } } }",
            "class C { fn m() { repeat 0 { use R; } } }",
            "class C { fn m() { consume Energy; } }",
            "class C { fn m() { choose { } } }",
            "class C { fn m() { $ } }",
        ],
    )
    def test_syntax_errors_have_positioned_diagnostics(self, source):
        program, diags = try_parse(source)
        assert program is None
        assert len(diags) >= 1
        assert all(d.severity == "error" for d in diags)
        assert all(d.span.line >= 1 and d.span.column >= 1 for d in diags)

    def test_never_a_partial_ast(self):
        with pytest.raises(ParseError):
            parse("class C { fn m() { use R; } }  class D {")

    def test_parse_is_deterministic(self):
        source = "class C { fn m() { repeat 2 { oops } } }"
        _, first = try_parse(source)
        _, second = try_parse(source)
        assert first == second

    def test_diagnostic_rendering(self):
        diag = Diagnostic("error", "E100_SYNTAX", "boom", Span(3, 7, 1))
        assert diag.format("x.asl") == "x.asl:3:7: error[E100_SYNTAX]: boom"

    def test_comments_ignored(self):
        p = parse("// leading\nservice S; // trailing\nclass C { } // done")
        assert p.name == "S"
        assert p.plain_classes[0].name == "C"


class TestValidate:
    def test_connection_is_valid(self, connection_program):
        assert validate(connection_program) == []

    def test_uncovered_adaptable_method(self):
        p = parse("adaptable class C { adaptable fn send(); }")
        codes = [d.code for d in validate(p)]
        assert codes == ["E001_UNCOVERED_METHOD"]
        assert "send" in validate(p)[0].message

    def test_unknown_adapts_target(self):
        p = parse("alternative A adapts Nope { }")
        assert [d.code for d in validate(p)] == ["E002_UNKNOWN_ADAPTS_TARGET"]

    def test_signature_mismatch(self):
        p = parse(
            "adaptable class C { adaptable fn m(); }"
            "alternative A adapts C { fn m() { } fn other() { } }"
        )
        assert "E003_SIGNATURE_MISMATCH" in [d.code for d in validate(p)]

    def test_duplicate_definitions(self):
        p = parse(
            "adaptable class C { adaptable fn m(); }"
            "alternative A adapts C { fn m() { } fn m() { } }"
        )
        assert "E004_DUPLICATE_DEFINITION" in [d.code for d in validate(p)]
        p2 = parse(
            "adaptable class C { adaptable fn m(); }"
            "alternative A adapts C { fn m() { } }"
            "alternative A adapts C { fn m() { } }"
        )
        assert "E004_DUPLICATE_DEFINITION" in [d.code for d in validate(p2)]

    def test_unresolved_call(self):
        p = parse("class C { fn m() { call D.x(); } }")
        assert [d.code for d in validate(p)] == ["E005_UNRESOLVED_CALL"]

    def test_two_cycle_matches_graph_oracle(self):
        p = parse("class C { fn a() { call C.b(); } fn b() { call C.a(); } }")
        diags = validate(p)
        assert [d.code for d in diags] == ["E006_CALL_CYCLE"]
        # Independent oracle: the same edge set must be cyclic per networkx.
        g = nx.DiGraph([("C.a", "C.b"), ("C.b", "C.a")])
        assert not nx.is_directed_acyclic_graph(g)

    def test_self_recursion_rejected(self):
        p = parse("class C { fn a() { call C.a(); } }")
        assert [d.code for d in validate(p)] == ["E006_CALL_CYCLE"]

    def test_acyclic_chain_accepted(self):
        p = parse("class C { fn a() { call C.b(); } fn b() { use R; } }")
        assert validate(p) == []

    def test_cycle_through_alternatives_rejected(self):
        # m's only definition calls back into the adaptable method itself.
        p = parse(
            "adaptable class C { adaptable fn m(); }"
            "alternative A adapts C { fn m() { call C.m(); } }"
        )
        assert "E006_CALL_CYCLE" in [d.code for d in validate(p)]

    def test_validation_is_pure_and_deterministic(self, connection_program):
        before = structure(connection_program)
        assert validate(connection_program) == validate(connection_program)
        assert structure(connection_program) == before


class TestRoundTrip:
    @pytest.mark.parametrize("seed", range(40))
    def test_pretty_parse_round_trip(self, seed):
        program = random_program(seed)
        text = format_program(program)
        reparsed = parse(text)
        assert structure(reparsed) == structure(program)
        assert format_program(reparsed) == text

    def test_corpus_round_trip(self, connection_program):
        text = format_program(connection_program)
        assert structure(parse(text)) == structure(connection_program)

    @pytest.mark.parametrize("seed", range(40))
    def test_validated_programs_admit_a_binding(self, seed):
        from aslkit.customize import enumerate_bindings

        program = random_program(seed)
        assert validate(program) == []
        assert len(enumerate_bindings(program)) >= 1
