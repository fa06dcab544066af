import pytest

from hceclass import report
from hceclass.report import Comparison, attribute


def comp(cid, printed=None):
    return Comparison(cid, "stage", "a", "b", False, printed_reproduced=printed)


def test_longest_pattern_wins():
    entries = [{"id": "wide", "covers": ["invariants/*"]},
               {"id": "narrow", "covers": ["invariants/Z23/*/I1"]}]
    assert attribute(comp("invariants/Z23/+/I1"), entries) == "narrow"
    assert attribute(comp("invariants/Z4/I2"), entries) == "wide"


def test_printed_reproduction_required():
    entries = [{"id": "e", "covers": ["table3/*"], "requires_printed_reproduction": True}]
    assert attribute(comp("table3/row-3", printed=True), entries) == "e"
    assert attribute(comp("table3/row-3", printed=False), entries) is None


def test_strict_has_no_known_entries():
    rep = report.stage_report("symmetries", strict=True)
    assert rep.deviations
    assert all(d.known is None for d in rep.deviations)
    assert rep.exit_status() == 1


def test_allowlisted_characteristic():
    rep = report.stage_report("symmetries")
    q = [d for d in rep.deviations if d.id == "characteristic/Q"]
    assert q and q[0].known == "characteristic-leading-term"


@pytest.mark.parametrize("stage", ["commutator-table", "adjoint-table", "killing-form"])
def test_table_stages_clean(stage):
    rep = report.stage_report(stage)
    assert rep.exit_status() == 0
    assert all(c.match for c in rep.comparisons)


def test_allowlist_has_five_entries():
    assert len(report.allowlist()) == 5


def test_report_json_shape():
    data = report.stage_report("killing-form").to_json()
    assert data["stage"] == "killing-form"
    assert isinstance(data["deviations"], list)
