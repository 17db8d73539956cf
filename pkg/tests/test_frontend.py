import io
import json

import pytest

from obdm import Concept, Exists, Functional, Identification, Role, SubConcept, atom, const, var
from obdm.cli import cli_dispatch
from obdm.dsl import ParseError, format_query, load_db, parse_facts, parse_spec, print_spec

from conftest import FIXTURES

EXAMPLE2 = (FIXTURES / "example2.obdm").read_text()


def test_parse_example2():
    doc = parse_spec(EXAMPLE2)
    assert doc.source == {"man": 1, "woman": 1}
    assert doc.tbox.assertions == ()
    assert len(doc.mapping) == 2
    assert doc.mapping[0].body == (atom("man", var("x")),)
    assert doc.mapping[0].head == (atom("Person", var("x")),)
    assert set(doc.queries) == {"qs", "qg", "bottomq"}
    assert doc.query_kinds["qs"] == "source"
    assert doc.query_kinds["qg"] == "ontology"
    assert doc.query_kinds["bottomq"] == "either"
    assert doc.queries["bottomq"].form == "bottom"


def test_parse_empty_tbox_section():
    doc = parse_spec("[source]\nr/1.\n[tbox]\n[mapping]\n")
    assert doc.tbox.assertions == ()
    assert doc.mapping == ()


def test_parse_glav_rule_with_existential():
    doc = parse_spec(
        "[source]\nr1/2.\nr2/1.\n[tbox]\n[mapping]\nr1(x,y), r2(y) -> T(x,w).\n"
    )
    tgd = doc.mapping[0]
    assert tgd.body == (atom("r1", var("x"), var("y")), atom("r2", var("y")))
    assert tgd.head == (atom("T", var("x"), var("w")),)
    assert tgd.existentials() == [var("w")]


def test_parse_tbox_assertions():
    doc = parse_spec(
        "[source]\nr/1.\n[tbox]\n"
        "Man isa Person.\n"
        "Man disjoint Woman.\n"
        "hasPart subrole relatedTo.\n"
        "funct hasHead.\n"
        "funct inv(hasHead).\n"
        "id Person hasHead, inv(hasPart).\n"
        "exists hasHead isa Person.\n"
        "[mapping]\n"
    )
    kinds = [type(a).__name__ for a in doc.tbox.assertions]
    assert kinds == ["SubConcept", "DisjointConcepts", "SubRole", "Functional",
                     "Functional", "Identification", "SubConcept"]
    assert doc.tbox.assertions[4] == Functional("hasHead", inverse=True)
    assert doc.tbox.assertions[5] == Identification(
        Concept("Person"), (Role("hasHead"), Role("hasPart", inverse=True)))
    assert doc.tbox.assertions[6] == SubConcept(Exists("hasHead"), Concept("Person"))


def test_parse_quoted_constant_in_query():
    doc = parse_spec(
        '[source]\nr/1.\n[tbox]\n[mapping]\nr(x) -> T(x).\n[query qs]\nqs(x, "b") :- r(x).\n'
    )
    q = doc.queries["qs"]
    assert q.head == (var("x"), const("b"))


def test_parse_errors_carry_positions():
    with pytest.raises(ParseError) as e:
        parse_spec("[source]\nr/1.\n[tbox]\n[mapping]\nundeclared(x) -> T(x).\n")
    assert e.value.line == 5
    with pytest.raises(ParseError) as e:
        parse_spec("[source]\nr/2.\n[tbox]\n[mapping]\nr(x) -> T(x).\n")
    assert "arity" in str(e.value)
    with pytest.raises(ParseError):
        parse_spec("[source]\nr/1.\n[tbox]\nMan frobnicates Woman.\n[mapping]\n")
    with pytest.raises(ParseError):
        parse_spec("[source]\nr/1.\n[tbox]\n[mapping]\n[query q]\nq(x) :- r(x).\n[query q]\nq(x) :- r(x).\n")
    with pytest.raises(ParseError):
        parse_spec("[mapping]\n[source]\nr/1.\n")
    with pytest.raises(ParseError):
        parse_spec("[source]\ntop/1.\n[tbox]\n[mapping]\n")
    with pytest.raises(ParseError) as e:
        parse_spec("[source]\nr/1.\n[tbox]\n[mapping]\n[query q]\nq(y) :- r(x).\n")
    assert "unsafe" in str(e.value)


def test_parse_mixed_vocabulary_query_rejected():
    with pytest.raises(ParseError) as e:
        parse_spec(
            "[source]\nr/1.\n[tbox]\n[mapping]\nr(x) -> T(x).\n[query q]\nq(x) :- r(x), T(x).\n"
        )
    assert "mixes" in str(e.value)


def test_roundtrip_print_parse():
    for text in [
        EXAMPLE2,
        (FIXTURES / "example1.obdm").read_text(),
        "[source]\nr/1.\n[tbox]\nA isa B.\nfunct R.\nid B R.\n[mapping]\n"
        'r(x) -> A(x).\n[query q]\nq(x, "c") :- A(x).\n'
        "[query t]\nt(x) :- top.\n",
    ]:
        doc = parse_spec(text)
        printed = print_spec(doc)
        doc2 = parse_spec(printed)
        assert doc2.source == doc.source
        assert doc2.tbox == doc.tbox
        assert doc2.mapping == doc.mapping
        assert doc2.queries == doc.queries
        assert print_spec(doc2) == printed


def test_load_db(tmp_path):
    db = tmp_path / "c.facts"
    db.write_text("r1(a,b).\nr2(c).\n")
    inst = load_db(db)
    assert inst == frozenset({atom("r1", const("a"), const("b")), atom("r2", const("c"))})
    assert parse_facts("") == frozenset()
    with pytest.raises(ParseError) as e:
        parse_facts("r1(X,b).\n")
    assert "variable" in str(e.value)


def test_format_query_quotes_constants():
    q = parse_spec(
        '[source]\nr/1.\n[tbox]\n[mapping]\nr(x) -> T(x).\n[query qs]\nqs(x, "b") :- r(x).\n'
    ).queries["qs"]
    assert format_query("qs", q) == 'qs(x, "b") :- r(x).'


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli_dispatch(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def test_cli_validate():
    code, out, err = run_cli("validate", str(FIXTURES / "example2.obdm"))
    assert code == 0
    assert out.startswith("OK")


def test_cli_validate_bad_spec(tmp_path):
    bad = tmp_path / "bad.obdm"
    bad.write_text("[source]\nr/1.\n[tbox]\n[mapping]\nq(x) -> T(x).\n")
    code, out, err = run_cli("validate", str(bad))
    assert code == 2
    assert "error:" in err


def test_cli_find_complete_example2():
    code, out, _ = run_cli("find-complete", str(FIXTURES / "example2.obdm"),
                           "--source-query", "qs")
    assert code == 0
    assert out == "qg(x1) :- Person(x1).\n"


def test_cli_check_complete_exit_codes():
    code, out, _ = run_cli("check-complete", str(FIXTURES / "example2.obdm"),
                           "--source-query", "qs", "--onto-query", "qg")
    assert (code, out) == (0, "COMPLETE\n")
    code, out, _ = run_cli("check-complete", str(FIXTURES / "example2.obdm"),
                           "--source-query", "qs", "--onto-query", "bottomq")
    assert (code, out) == (1, "NOT COMPLETE\n")


def test_cli_chase_empty_mapping(tmp_path):
    spec = tmp_path / "s.obdm"
    spec.write_text("[source]\nr/1.\n[tbox]\n[mapping]\n[query qs]\nqs(x) :- r(x).\n")
    code, out, _ = run_cli("chase", str(spec), "--query", "qs")
    assert code == 0
    assert out == "(no atoms)\n"


def test_cli_chase_trace_and_psi(tmp_path):
    spec = tmp_path / "s.obdm"
    spec.write_text(
        "[source]\np/2.\n[tbox]\nfunct R.\n[mapping]\np(x,y) -> R(x,w), R(x,y).\n"
        "[query qs]\nqs(x) :- p(x,y).\n"
    )
    code, out, _ = run_cli("chase", str(spec), "--query", "qs", "--trace")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("STEP 1 TGD m1 ")
    assert lines[1].startswith("STEP 2 EGD e1 ")
    assert "R(d1, d2)." in lines


def test_cli_chase_bottom(tmp_path):
    spec = tmp_path / "s.obdm"
    spec.write_text(
        '[source]\np/1.\n[tbox]\nfunct R.\n[mapping]\np(x) -> R(x,"a"), R(x,"b").\n'
        "[query qs]\nqs(x) :- p(x).\n"
    )
    code, out, _ = run_cli("chase", str(spec), "--query", "qs")
    assert code == 0
    assert out == "BOTTOM\n"


def test_cli_qsat(tmp_path):
    spec = tmp_path / "s.obdm"
    spec.write_text("[source]\nr/1.\n[tbox]\nMan disjoint Woman.\nfunct R.\n[mapping]\n")
    code, out, _ = run_cli("qsat", str(spec))
    assert code == 0
    assert "qsat0:" in out and "qsat1:" in out
    assert "Man(x), Woman(x)" in out
    assert "y1 != y2" in out


def test_cli_perfect_ref(tmp_path):
    spec = tmp_path / "s.obdm"
    spec.write_text(
        "[source]\nr/1.\n[tbox]\nMan isa Person.\n[mapping]\nr(x) -> Man(x).\n"
        "[query qg]\nqg(x) :- Person(x).\n"
    )
    code, out, _ = run_cli("perfect-ref", str(spec), "--onto-query", "qg")
    assert code == 0
    assert "qg(x) :- Person(x)." in out
    assert "Man(" in out


def test_cli_cert(tmp_path):
    db = tmp_path / "a.facts"
    db.write_text("Man(a).\n")
    spec = tmp_path / "s.obdm"
    spec.write_text(
        "[source]\nr/1.\n[tbox]\nMan isa Person.\n[mapping]\nr(x) -> Man(x).\n"
        "[query qg]\nqg(x) :- Person(x).\n"
    )
    code, out, _ = run_cli("cert", str(spec), "--db", str(db), "--onto-query", "qg")
    assert code == 0
    assert out == "(a)\n"


def test_cli_cert_unsatisfiable(tmp_path):
    db = tmp_path / "a.facts"
    db.write_text("Man(a).\nWoman(a).\n")
    spec = tmp_path / "s.obdm"
    spec.write_text(
        "[source]\nr/1.\n[tbox]\nMan disjoint Woman.\n[mapping]\nr(x) -> Man(x).\n"
        "[query qg]\nqg(x) :- Man(x).\n"
    )
    code, out, _ = run_cli("cert", str(spec), "--db", str(db), "--onto-query", "qg")
    assert code == 1
    assert out == "UNSATISFIABLE\n"


def test_cli_oracle_json():
    code, out, _ = run_cli(
        "oracle", str(FIXTURES / "example1.obdm"),
        "--source-query", "qs", "--onto-query", "qg",
        "--variant", "sound", "--semantics", "model",
        "--budget", "pool=2,atoms=3,extra=1", "--format", "json",
    )
    assert code == 1
    payload = json.loads(out)
    assert payload["format_version"] == 1
    assert payload["holds"] is False
    assert payload["witness"]["model"]


def test_cli_unknown_query_is_usage_error():
    code, _, err = run_cli("chase", str(FIXTURES / "example2.obdm"), "--query", "nope")
    assert code == 2
    assert "unknown query" in err


def test_cli_missing_subcommand_is_usage_error(capsys):
    code, _, _ = run_cli()
    assert code == 2
    capsys.readouterr()


def test_cli_byte_stable():
    for argv in [
        ("find-complete", str(FIXTURES / "example2.obdm"), "--source-query", "qs"),
        ("chase", str(FIXTURES / "example1.obdm"), "--query", "qs", "--trace"),
        ("qsat", str(FIXTURES / "example1.obdm"), "--format", "json"),
    ]:
        first = run_cli(*argv)
        second = run_cli(*argv)
        assert first == second


def test_cli_json_chase():
    code, out, _ = run_cli("chase", str(FIXTURES / "example1.obdm"),
                           "--query", "qs", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["bottom"] is False
    assert payload["abox"] == [{"pred": "G", "args": ["d2", "d1"]}]
    assert payload["psi"] == {}
