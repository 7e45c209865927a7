import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

CRITERIA = {
    1: "plane wave, rational direction: gap to |J0(t)|^2",
    2: "plane wave, irrational direction: echo -> 1",
    3: "two coherent states: cos(t)^2 law",
    4: "coherent state, critical eps: pushforward limit",
    5: "strong perturbations: eps = hbar and eps = hbar^1/2",
    6: "short-time quadratic model",
    7: "property suite",
    8: "two-microlocal convergence",
}

_results: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        detail = dict(item.user_properties).get("detail", "")
        _results.setdefault(m.args[0], []).append((item.name, rep.outcome, detail))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(CRITERIA):
        runs = _results.get(n)
        if not runs:
            continue
        ok = all(o == "passed" for _, o, _ in runs)
        tr.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {CRITERIA[n]}")
        for name, o, detail in runs:
            if o != "passed" or detail:
                tr.write_line(f"    {name}: {o} {detail}")
