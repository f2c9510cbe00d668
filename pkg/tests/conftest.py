"""Shared test plumbing: the acceptance-criteria summary table.

Acceptance tests record one line per criterion through ``check``; the lines
are printed after the run so the pass/fail status of every criterion is
visible in one place regardless of how pytest interleaves output.
"""

CRITERIA: dict[int, tuple[str, bool, str]] = {}
EXPECTED = 11


def check(num: int, title: str, ok: bool, detail: str = "") -> None:
    CRITERIA[num] = (title, bool(ok), detail)
    assert ok, f"criterion {num}: {title}: {detail}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERIA:
        return
    terminalreporter.ensure_newline()
    terminalreporter.section("acceptance criteria", sep="-")
    for num in range(1, EXPECTED + 1):
        if num in CRITERIA:
            title, ok, detail = CRITERIA[num]
            line = f"criterion {num:02d} {'PASS' if ok else 'FAIL'}  {title}"
            if detail:
                line += f"  [{detail}]"
        else:
            line = f"criterion {num:02d} NOT RUN"
        terminalreporter.write_line(line)
