import json

import pytest

from oddrep.errors import BudgetExceeded
from oddrep.escalation import (
    CONJECTURE_FORMS,
    CRITICAL_INTEGERS,
    ODD,
    TargetSet,
    appendix_table,
    build_tree,
    check_appendix,
    contains_form_class,
    critical_integers,
    escalations,
    exceptions,
    kaplansky_candidates,
    truant,
)
from oddrep.forms import QuadraticForm, parse_form
from oddrep.lattice import is_isometric
from oddrep.verify import odd_universal_ternaries


def test_target_sets():
    assert 3 in ODD and 4 not in ODD and 0 not in ODD
    pos = TargetSet.positive()
    assert list(pos.iterate(1, 4)) == [1, 2, 3, 4]
    assert list(ODD.iterate(2, 9)) == [3, 5, 7, 9]
    assert ODD.mask(5).tolist() == [False, True, False, True, False, True]


def test_truant_examples():
    assert truant(QuadraticForm.empty()) == 1
    assert truant(parse_form("x^2")) == 3
    assert truant(parse_form("x^2+2y^2+5z^2+xz"), bound=2000) is None
    assert exceptions(parse_form("x^2+y^2+z^2"), bound=40) == [7, 15, 23, 31, 39]


def test_escalations_of_x2():
    children = escalations(parse_form("x^2"), 3)
    assert len(children) == 4
    for c in children:
        assert c.rank == 2 and c.disc > 0
        assert 3 in {c((a, b)) for a in range(-3, 4) for b in range(-3, 4)}


def test_tree_counts(odd_tree):
    assert odd_tree.counts() == [1, 1, 4, 73]
    assert sorted(n.truant for n in odd_tree.layers[2]) == [5, 5, 5, 7]
    assert odd_tree.layers[1][0].truant == 3


def test_tree_parent_links(odd_tree):
    for n in odd_tree.nodes():
        if n.parent is None:
            assert n.dim == 0
            continue
        par = odd_tree.node(n.parent)
        assert par.dim == n.dim - 1
        # the child represents its parent's truant
        assert truant(n.form, bound=par.truant) != par.truant


def test_tree_classes_distinct(odd_tree):
    layer = [n.form for n in odd_tree.layers[3]]
    for i in range(len(layer)):
        for j in range(i + 1, len(layer)):
            assert not is_isometric(layer[i], layer[j])


def test_kaplansky_candidates(odd_tree):
    cands = kaplansky_candidates(odd_tree)
    assert len(cands) == 23
    for text in CONJECTURE_FORMS:
        assert contains_form_class(cands, parse_form(text))
    bundled = odd_universal_ternaries()
    assert len(bundled) == 23
    assert all(contains_form_class(cands, f) for f in bundled)


def test_critical_integers_subset(odd_tree):
    crit = critical_integers(odd_tree)
    assert crit[:4] == [1, 3, 5, 7]
    assert set(crit) <= set(CRITICAL_INTEGERS)
    assert len(CRITICAL_INTEGERS) == 46


def test_appendix_rows():
    rows = appendix_table()
    assert len(rows) == 46
    assert sorted(r.truant for r in rows) == list(CRITICAL_INTEGERS)
    for row, got in check_appendix():
        assert got == row.truant, row.text


def test_appendix_detects_corruption(tmp_path):
    rows = appendix_table()
    path = tmp_path / "bad.csv"
    lines = ["form,truant"]
    for r in rows:
        t = r.truant
        if r.truant == 451:
            t = 449
        lines.append(f'"{r.text}",{t}')
    path.write_text("\n".join(lines) + "\n")
    bad = [(row, got) for row, got in check_appendix(path=str(path)) if got != row.truant]
    assert len(bad) == 1 and bad[0][1] == 451


def test_checkpoint_resume(tmp_path):
    ck = tmp_path / "tree.jsonl"
    first = build_tree(max_dim=2, checkpoint=str(ck))
    n_lines = len(ck.read_text().splitlines())
    # a half-written layer is dropped on resume
    with open(ck, "a") as fh:
        fh.write(json.dumps(first.layers[2][0].to_json() | {"dim": 3, "id": 999}) + "\n")
    again = build_tree(max_dim=3, checkpoint=str(ck))
    assert again.counts() == [1, 1, 4, 73]
    assert [n.form.gram for n in again.layers[2]] == [n.form.gram for n in first.layers[2]]
    assert len(ck.read_text().splitlines()) == n_lines + 74


def test_budget_stops_between_layers(tmp_path):
    ticks = iter(range(100))
    with pytest.raises(BudgetExceeded):
        build_tree(max_dim=3, deadline=1, clock=lambda: next(ticks), checkpoint=str(tmp_path / "t.jsonl"))
    resumed = build_tree(max_dim=3, checkpoint=str(tmp_path / "t.jsonl"))
    assert resumed.counts() == [1, 1, 4, 73]
