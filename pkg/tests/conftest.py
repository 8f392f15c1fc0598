import sys


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        parts = results[n]
        ok = all(p["ok"] for p in parts)
        secs = sum(p["seconds"] for p in parts)
        notes = "; ".join(p["note"] for p in parts if p["note"])
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'} ({secs:.1f} s) {notes}".rstrip())
