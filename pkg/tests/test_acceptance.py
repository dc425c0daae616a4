"""Acceptance gate: every pinned criterion must pass at full size.

Each test prints its own PASS/FAIL line with the measured quantities, so
a -s run shows the full evidence;  the same criteria back the
``hho-leray accept`` command.
"""

import pytest

from hho_leray.harness import ACCEPTANCE_CRITERIA, acceptance


def test_registry_has_nine_criteria():
    assert len(ACCEPTANCE_CRITERIA) == 9
    names = [name for name, _ in ACCEPTANCE_CRITERIA]
    assert len(set(names)) == 9


@pytest.mark.parametrize("name,fn", ACCEPTANCE_CRITERIA,
                         ids=[name.replace(" ", "-")
                              for name, _ in ACCEPTANCE_CRITERIA])
def test_criterion(name, fn):
    ok, detail = fn(False)
    print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_acceptance_exit_code_smoke():
    lines = []
    assert acceptance(smoke=True, writer=lines.append) == 0
    assert len(lines) == 9
    assert all(line.startswith("PASS") for line in lines)
