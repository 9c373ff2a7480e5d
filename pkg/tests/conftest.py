import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_results: dict = {}


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker is not None:
            item.user_properties.append(("criterion", marker.args[0]))
            item.user_properties.append(("title", marker.args[1]))


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or report.outcome != "passed":
        entry = _results.setdefault(props["criterion"], {"title": props["title"], "ok": True, "details": []})
        entry["ok"] = entry["ok"] and report.outcome == "passed"
        if "detail" in props and props["detail"] not in entry["details"]:
            entry["details"].append(props["detail"])


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(_results):
        entry = _results[crit]
        status = "PASS" if entry["ok"] else "FAIL"
        detail = "; ".join(entry["details"])
        tr.write_line(f"criterion {crit:>2} {status}  {entry['title']}" + (f"  [{detail}]" if detail else ""))
