import random

import pytest

from obdm import (
    Egd,
    StTgd,
    TBox,
    Functional,
    UnionQuery,
    Disjunct,
    abox_of,
    atom,
    chase_egds,
    chase_tgds,
    const,
    cq,
    dom,
    egds_of_negated_ucq,
    instance,
    instances_isomorphic,
    null_d,
    null_s,
    var,
)
from obdm.terms import NULL_D, NULL_S, CONST

from corpus import random_target_instance


def test_chase_tgds_example1():
    tgds = (
        StTgd("m1", (atom("r1", var("x"), var("y")),), (atom("G", var("x"), var("y")),)),
        StTgd("m2", (atom("r2", var("x")),), (atom("G", var("x"), var("Y")),)),
    )
    D = instance([atom("r1", const("a"), const("b")), atom("r2", const("c"))])
    J = chase_tgds(D, tgds)
    assert atom("G", const("a"), const("b")) in J
    others = [a for a in J if a != atom("G", const("a"), const("b"))]
    assert len(others) == 1
    assert others[0].args[0] == const("c")
    assert others[0].args[1].kind == NULL_S


def test_chase_tgds_empty_source():
    tgds = (StTgd("m1", (atom("r", var("x")),), (atom("P", var("x")),)),)
    assert chase_tgds(instance(), tgds) == instance()


def test_chase_tgds_join_unsatisfied():
    tgds = (StTgd("m1", (atom("r1", var("x"), var("y")), atom("r2", var("y"))),
                  (atom("T", var("x")),)),)
    D = instance([atom("r1", const("a"), const("b"))])
    assert chase_tgds(D, tgds) == instance()


def test_chase_tgds_size_bound():
    # at most (#tgds) x |D|^(max body vars) triggers, each adding the head
    tgds = (StTgd("m1", (atom("r", var("x"), var("y")),), (atom("G", var("x"), var("y")),)),)
    D = instance([atom("r", const(c1), const(c2)) for c1 in "abc" for c2 in "abc"])
    J = chase_tgds(D, tgds)
    assert len(J) <= 1 * len(D) ** 2


def _equality_egd(pred, name="e"):
    return Egd(name, (atom(pred, var("u"), var("v")),), (var("u"), var("v")))


def test_psi_illustration():
    # the running illustration: equate y with x, z with w, then w with a;
    #   psi over (x, y, z, w) reads (x, x, a, a)
    x, y, z, w, a = null_d("x"), null_d("y"), null_d("z"), null_d("w"), const("a")
    J = instance([atom("E1", x, y), atom("E2", z, w), atom("E3", w, a)])
    egds = [
        Egd("e1", (atom("E1", var("u"), var("v")),), (var("u"), var("v"))),
        Egd("e2", (atom("E2", var("u"), var("v")),), (var("u"), var("v"))),
        Egd("e3", (atom("E3", var("u"), var("v")),), (var("u"), var("v"))),
    ]
    out = chase_egds(J, egds)
    assert not out.failed
    psi = out.psi
    assert tuple(psi.get(t, t) for t in (x, y, z, w)) == (x, x, a, a)


def test_two_constants_fail():
    J = instance([atom("E", const("a"), const("b"))])
    out = chase_egds(J, [_equality_egd("E")])
    assert out.failed
    assert out.result is None


def test_null_d_beats_null_s():
    J = instance([atom("R", null_d("d1"), null_s("s1")), atom("R", null_d("d1"), null_d("d2"))])
    egd = Egd("f", (atom("R", var("x"), var("y1")), atom("R", var("x"), var("y2"))),
              (var("y1"), var("y2")))
    out = chase_egds(J, [egd])
    assert not out.failed
    assert out.result == instance([atom("R", null_d("d1"), null_d("d2"))])
    assert out.psi == {}


def test_constant_beats_null():
    J = instance([atom("R", null_d("d1"), const("a")), atom("R", null_d("d1"), null_d("d2"))])
    egd = Egd("f", (atom("R", var("x"), var("y1")), atom("R", var("x"), var("y2"))),
              (var("y1"), var("y2")))
    out = chase_egds(J, [egd])
    assert not out.failed
    assert out.result == instance([atom("R", null_d("d1"), const("a"))])
    assert out.psi == {null_d("d2"): const("a")}


def test_psi_idempotent_and_null_d_domain():
    rng = random.Random(23)
    egds = [
        _equality_egd("R", "f1"),
        Egd("f2", (atom("R", var("x"), var("y")), atom("R", var("xp"), var("y"))),
            (var("x"), var("xp"))),
    ]
    for _ in range(100):
        J = random_target_instance(rng)
        out = chase_egds(J, egds)
        if out.failed:
            continue
        for k, v in out.psi.items():
            assert k.kind == NULL_D
            assert out.psi.get(v, v) == v  # idempotent
        # priority soundness: no surviving class is represented below its rank
        surviving = dom(out.result)
        for k, v in out.psi.items():
            assert v.kind in (NULL_D, CONST)
        for t in surviving:
            if t.kind == NULL_S:
                assert all(v != t or k.kind == NULL_S for k, v in out.psi.items())


def test_confluence_up_to_chase_null_renaming():
    rng = random.Random(29)
    egds = [
        _equality_egd("R", "f1"),
        Egd("f2", (atom("R", var("x"), var("y")), atom("R", var("xp"), var("y"))),
            (var("x"), var("xp"))),
    ]
    checked = 0
    for _ in range(100):
        J = random_target_instance(rng, max_atoms=6)
        base = chase_egds(J, egds)
        shuffled = chase_egds(J, egds, pick=lambda vs: rng.randrange(len(vs)))
        assert base.failed == shuffled.failed
        if base.failed:
            continue
        checked += 1
        assert base.psi == shuffled.psi
        assert instances_isomorphic(base.result, shuffled.result,
                                    renamable_kinds=frozenset({NULL_S}))
    assert checked > 50


def test_egd_termination_strictly_reduces_terms():
    J = instance([atom("R", null_d("d1"), null_d(f"d{i}")) for i in range(2, 8)])
    egd = Egd("f", (atom("R", var("x"), var("y1")), atom("R", var("x"), var("y2"))),
              (var("y1"), var("y2")))
    out = chase_egds(J, [egd])
    assert not out.failed
    assert len(out.result) == 1


def test_egds_of_negated_ucq():
    q = cq((), (atom("R", var("x"), var("y1")), atom("R", var("x"), var("y2"))))
    Q1 = UnionQuery((Disjunct(q, (var("y1"), var("y2"))),))
    egds = egds_of_negated_ucq(Q1)
    assert len(egds) == 1
    assert egds[0].body == q.body
    assert egds[0].equality == (var("y1"), var("y2"))
    assert egds_of_negated_ucq(UnionQuery(())) == []
    with pytest.raises(ValueError):
        egds_of_negated_ucq(UnionQuery((Disjunct(q),)))


def test_abox_of_identity_psi():
    tgds = (StTgd("m1", (atom("woman", var("x")),), (atom("Person", var("x")),)),)
    D = instance([atom("woman", null_d("d1"))])
    res = abox_of(D, tgds, TBox())
    assert not res.failed
    assert res.abox == instance([atom("Person", const("d1"))])
    assert res.psi == {}


def test_abox_of_no_egds_keeps_conflicting_atoms():
    # disjointness lives in the inequality-free part; the chase never sees it
    from obdm import Concept, DisjointConcepts

    tbox = TBox((DisjointConcepts(Concept("Man"), Concept("Woman")),))
    tgds = (StTgd("m1", (atom("s", var("x")),),
                  (atom("Man", var("x")), atom("Woman", var("x")))),)
    D = instance([atom("s", null_d("d1"))])
    res = abox_of(D, tgds, tbox)
    assert not res.failed
    assert res.abox == instance([atom("Man", const("d1")), atom("Woman", const("d1"))])


def test_abox_of_functional_merge_golden():
    # mapping emits R(d1, s1) and R(d1, d2); functionality keeps the source null
    tbox = TBox((Functional("R"),))
    tgds = (StTgd("m1", (atom("p", var("x"), var("y")),),
                  (atom("R", var("x"), var("w")), atom("R", var("x"), var("y")))),)
    D = instance([atom("p", null_d("d1"), null_d("d2"))])
    trace: list[str] = []
    res = abox_of(D, tgds, tbox, trace=trace.append)
    assert not res.failed
    assert res.abox == instance([atom("R", const("d1"), const("d2"))])
    assert res.psi == {}
    assert trace == [
        "STEP 1 TGD m1 w -> s1, x -> d1, y -> d2",
        "STEP 2 EGD e1 s1 -> d2",
    ]


def test_abox_of_failure_is_bottom():
    tbox = TBox((Functional("R"),))
    tgds = (StTgd("m1", (atom("p", var("x")),),
                  (atom("R", var("x"), const("a")), atom("R", var("x"), const("b")))),)
    D = instance([atom("p", null_d("d1"))])
    res = abox_of(D, tgds, tbox)
    assert res.failed
    assert res.abox is None
