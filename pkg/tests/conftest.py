ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    by_criterion = {}
    for criterion, label, clause, ok, detail in ACCEPTANCE_RESULTS:
        by_criterion.setdefault((criterion, label), []).append(
            (clause, ok, detail))
    terminalreporter.section("acceptance criteria")
    for (criterion, label), clauses in sorted(by_criterion.items()):
        ok_all = all(ok for _, ok, _ in clauses)
        status = "PASS" if ok_all else "FAIL"
        terminalreporter.write_line(
            f"criterion {criterion} [{status}] {label}")
        for clause, ok, detail in clauses:
            mark = "ok " if ok else "FAIL"
            terminalreporter.write_line(f"    {mark} {clause}: {detail}")
