"""Smoke test for the Python extension.

Build and install it first, e.g.

    pip install maturin
    maturin build --release -m crates/py/Cargo.toml -o dist
    pip install dist/edgeexplain-*.whl

then run `python python/smoke.py`.
"""

import tempfile

import edgeexplain as ee


def main():
    fig1 = ee.Dataset.fig1()
    assert fig1.num_edges == 16, fig1

    explained = fig1.infer(mode="edgeexplain", alpha=10.0)
    assert explained.top("u", "hometown") == "H"
    assert explained.top("u", "current_city") == "C"

    propagated = fig1.infer(mode="lp")
    assert propagated.top("u", "current_city") == "C'"
    probs = [p for _, p in propagated.ranked("u", "current_city")]
    assert abs(sum(probs) - 1.0) < 1e-9 and probs == sorted(probs, reverse=True)

    group = ee.Dataset.group_example()
    assert group.infer().top("m6", "college") == "X"

    p = ee.project_simplex([0.5, 0.8])
    assert abs(p[0] - 0.35) < 1e-12 and abs(p[1] - 0.65) < 1e-12, p
    sparse = ee.project_simplex_ksparse([0.5, 0.8, 0.9], 2)
    assert sparse[0] == 0.0 and abs(sparse[1] - 0.45) < 1e-12 and abs(sparse[2] - 0.55) < 1e-12

    small = ee.Dataset.generate(seed=3)
    with tempfile.TemporaryDirectory() as d:
        small.save(d)
        again = ee.Dataset.load(d)
        assert again.num_edges == small.num_edges

    rows = small.cross_validate(mode="lp", folds=5, fold_limit=1)
    for name, r1, r3 in rows:
        assert 0.0 <= r1 <= r3 <= 1.0, (name, r1, r3)

    try:
        ee.Dataset.load("/nonexistent/dir")
    except OSError as e:
        assert "edges.tsv" in str(e)
    else:
        raise AssertionError("loading a missing directory should fail")

    print("smoke ok:", small, [(n, round(r1, 3)) for n, r1, _ in rows])


if __name__ == "__main__":
    main()
