from __future__ import annotations

import pytest

from actorcps import source_lang as ast
from actorcps.errors import MalformedBody
from actorcps.parser import parse_stmt


def seq(*xs):
    return ast.seq_of(list(xs))


A, B, C = ast.Skip(), ast.Await("f"), ast.Return("x")


def test_flatten_and_seq_of_are_inverse():
    s = ast.Seq(ast.Seq(A, B), C)
    assert ast.flatten(s) == [A, B, C]
    assert ast.seq_of(ast.flatten(s)) == ast.Seq(A, ast.Seq(B, C))


def test_split_head_left_nested():
    head, rest = ast.split_head(ast.Seq(ast.Seq(A, B), C))
    assert head == A
    assert rest == ast.Seq(B, C)
    assert ast.split_head(C) == (C, None)


def test_canonical_reaches_into_branches():
    inner = ast.Seq(ast.Seq(A, A), C)
    s = ast.If(ast.Eq(ast.IntLit(1), ast.IntLit(1)), inner, A)
    assert ast.canonical(s).then == ast.Seq(A, ast.Seq(A, C))


def test_mark_writeback_marks_final_return():
    body = parse_stmt("x := 1; return x;")
    assert ast.flatten(ast.mark_writeback(body, ast.STAR))[-1] == ast.Return("x", ast.STAR)
    wb = ast.mark_writeback(body, ast.WriteBack("z"))
    assert ast.flatten(wb)[-1] == ast.Return("x", ast.WriteBack("z"))


def test_mark_writeback_rejects_marked_or_missing_return():
    with pytest.raises(MalformedBody):
        ast.mark_writeback(parse_stmt("return* x;"), ast.STAR)
    with pytest.raises(MalformedBody):
        ast.mark_writeback(parse_stmt("skip;"), ast.STAR)


def test_instantiate_body_substitutes_parameters():
    decl = ast.MethodDecl("m", ("a",), parse_stmt("r := a + 1; return r;", params=("a",)))
    body = ast.instantiate_body(decl, [41], ast.STAR)
    assert body == seq(ast.Assign("r", ast.Add(ast.IntLit(41), ast.IntLit(1))), ast.Return("r", ast.STAR))


def test_statement_count_counts_compound_statements():
    s = parse_stmt("if (x == 1) { skip; skip; } else { skip; } while (x == 2) { skip; } return x;")
    assert ast.statement_count(s) == 7


def _diag_kinds(program):
    return {d.kind for d in ast.validate(program)}


def test_validate_accepts_well_formed():
    p = ast.Program({"m": ast.MethodDecl("m", ("a",), parse_stmt("r := a; return r;", ("a",)))},
                    parse_stmt("x := m(y); return x;"))
    assert ast.validate(p) == []


@pytest.mark.parametrize("methods, main, kind", [
    ({}, "x := m(y); return x;", "UnknownMethod"),
    ({"m": ((), "return r;")}, "x := m(y); return x;", "ArityMismatch"),
    ({"m": (("a", "a"), "return r;")}, "return x;", "DuplicateParam"),
    ({}, "skip;", "MissingReturn"),
    ({}, "return x; return y;", "MultipleReturns"),
    ({}, "if (x == 1) { return x; } else { skip; }", "ReturnNotFinal"),
    ({}, "return* x;", "MarkedReturn"),
    ({"m": (("a",), "a := 1; return r;")}, "return x;", "AssignToParam"),
])
def test_validate_diagnostics(methods, main, kind):
    decls = {}
    for name, (params, body) in methods.items():
        decls[name] = ast.MethodDecl(name, params, parse_stmt(body))
    assert kind in _diag_kinds(ast.Program(decls, parse_stmt(main)))


def test_attribute_names_first_occurrence_main_first():
    p = ast.Program({"m": ast.MethodDecl("m", (), parse_stmt("q := 1; a := q; return a;"))},
                    parse_stmt("b := 1; a := b; return b;"))
    assert ast.attribute_names(p) == ["b", "a", "q"]


def test_deep_sequences_compare_and_hash_iteratively():
    from actorcps import source_lang as ast
    def body(n):
        return ast.seq_of([ast.Assign("x", ast.IntLit(i)) for i in range(n)])
    a, b = body(5000), body(5000)
    assert a == b and hash(a) == hash(b)
    assert a != body(4999) and a != ast.Skip()
