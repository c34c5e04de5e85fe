import itertools

import networkx as nx
import numpy as np
import pytest

from enharmonic.gallery import make_four_cycle, make_jacobi, make_path, make_small_graph
from enharmonic.network import Network

ROOT5 = np.sqrt(5.0)
H_HIGH = 0.5 + ROOT5 / 10
H_LOW = 0.5 - ROOT5 / 10
C_HIGH = (15 + 5 * ROOT5) / 2
C_LOW = (15 - 5 * ROOT5) / 2


_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, {"title": title, "ok": True, "seconds": 0.0, "ran": False})
    entry["seconds"] += report.duration
    if report.when == "call":
        entry["ran"] = True
    if report.failed or report.skipped:
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        status = "PASS" if entry["ok"] and entry["ran"] else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {entry['title']} ({entry['seconds']:.2f} s)")


@pytest.fixture
def small():
    return make_small_graph()


@pytest.fixture
def path2():
    return make_path(2)


@pytest.fixture
def four_cycle():
    return make_four_cycle()


def single_edge():
    return Network.build(["v0", "v1"], [("e", "v1", "v0")], ["v0", "v1"])


def planar_fixtures():
    return [make_path(1), make_path(2), make_path(4), make_small_graph(), make_four_cycle(),
            make_jacobi(2, 1, 1), make_jacobi(2, 2, 1)]


def brute_force_compatible(net, u):
    """All sign vectors passing a direct reading of the compatibility rules."""
    out = []
    for signs in itertools.product((1, -1), repeat=net.n_edges):
        g = nx.MultiDiGraph()
        g.add_nodes_from(net.vertices)
        for e, s in zip(net.edges, signs):
            g.add_edge(*((e.tail, e.head) if s > 0 else (e.head, e.tail)))
        if not nx.is_directed_acyclic_graph(g):
            continue
        if any(g.in_degree(v) == 0 or g.out_degree(v) == 0 for v in net.interior):
            continue
        bad = any(u[a] <= u[b] and nx.has_path(g, a, b)
                  for a in net.boundary for b in net.boundary if a != b)
        if not bad:
            out.append(tuple(signs))
    return out


def brute_force_path_edges(net):
    """Edge ids lying on some simple path between two distinct boundary vertices."""
    adj = {v: [] for v in net.vertices}
    for e in net.edges:
        adj[e.tail].append((e.id, e.head))
        adj[e.head].append((e.id, e.tail))
    found = set()
    b = set(net.boundary)

    def dfs(v, seen, used):
        for eid, w in adj[v]:
            if w in seen:
                continue
            if w in b:
                found.update(used + [eid])
            else:
                dfs(w, seen | {w}, used + [eid])

    for s in net.boundary:
        dfs(s, {s}, [])
    return found
