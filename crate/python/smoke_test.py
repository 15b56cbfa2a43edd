"""Smoke test for the pyspecgraph bindings; runs under pytest or directly."""

import json

import numpy as np

import pyspecgraph as sg


def test_suite_names():
    names = sg.suite_names()
    assert len(names) == 17
    assert names == sorted(names)


def test_spectrum_matches_numpy():
    for family, radius in [("offspring", 4), ("star-chain", 5), ("bipartite-chain", 6)]:
        h = np.array(sg.matrix(family, radius, seed=3))
        assert np.abs(h - h.conj().T).max() < 1e-14
        ours = np.array(sg.spectrum(family, radius, seed=3))
        assert np.abs(ours - np.linalg.eigvalsh(h)).max() < 1e-10


def test_form_two_routes_and_degree_bound():
    rng = np.random.default_rng(0)
    n = len(sg.vertices("chained-ary", 4, seed=1))
    f = rng.normal(size=n) + 1j * rng.normal(size=n)
    q, via = sg.forms("chained-ary", list(f), 4, seed=1)
    assert abs(q - via) <= 1e-10 * max(1.0, abs(q))
    lap = np.array(sg.matrix("chained-ary", 4, seed=1))
    deg = np.array(sg.matrix("chained-ary", 4, seed=1, operator="degree"))
    g = rng.normal(size=n) + 1j * rng.normal(size=n)
    assert (g.conj() @ lap @ g).real <= 2 * (g.conj() @ deg @ g).real + 1e-12


def test_suites():
    report = json.loads(sg.run_suite("negans", json.dumps({"seeds": [0], "trials": 8})))
    assert report["schema"] == 1 and report["passed"]
    star = json.loads(sg.run_suite("star-chain-identities"))
    # the ambient norm of the star-chain Laplacian image is 6, not 4
    chain = next(r for r in star["reports"] if r["name"] == "star-chain")
    assert not star["passed"]
    assert chain["witnesses"][0]["lhs"] == 6.0
    try:
        sg.run_suite("no-such-suite")
    except KeyError:
        pass
    else:
        raise AssertionError("unknown suite accepted")


def test_essaa():
    verdict, total, length = sg.essaa("star-chain", horizon=300)
    assert verdict == "diverges" and length == 301 and total > 1e6
    assert abs(sg.weighted_line_limit(0.4, 0.25, 1.0) - 8.0) < 1e-14


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print("ok", name)
