from helpers import RESULTS


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance")
    for label in sorted(RESULTS, key=lambda s: int(s.split()[0])):
        ok, detail = RESULTS[label]
        terminalreporter.write_line(f"ACCEPTANCE {label}: {'PASS' if ok else 'FAIL'}  {detail}")
