def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    ran = {int(r.nodeid.split("criterion_")[1][:2])
           for key in ("passed", "failed", "error")
           for r in terminalreporter.stats.get(key, [])
           if "test_acceptance.py::test_criterion_" in r.nodeid}
    if not ran:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ran):
        terminalreporter.write_line(REPORT.get(n, f"criterion {n:>2}: FAIL  (raised before a verdict)"))
