"""Smoke test for the memeaxis Python extension.

Build and install first:
    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/memeaxis-*.whl
then run `python python/smoke_test.py`.
"""

import json
import os
import sys
import tempfile

import memeaxis


def check(cond, msg):
    if not cond:
        print(f"FAIL: {msg}")
        sys.exit(1)
    print(f"ok: {msg}")


def main():
    cfg = memeaxis.TrainConfig(epochs=60, seed=3)
    check(cfg.epochs == 60 and cfg.seed == 3, "TrainConfig kwargs")
    check(json.loads(cfg.to_json())["epochs"] == 60, "TrainConfig round-trips to JSON")
    try:
        memeaxis.TrainConfig(not_a_field=1)
        check(False, "unknown config key rejected")
    except ValueError:
        check(True, "unknown config key rejected")

    graph, labels, neutral = memeaxis.synth_graph(
        users_per_side=20, assertions_per_side=30, p_in=0.3, p_out=0.01, seed=5
    )
    n_assert = sum(1 for k in graph.kinds if k == "assertion")
    check(n_assert == 60 and len(labels) == 60 and neutral == [], "synthetic graph shape")

    emb, anchors = memeaxis.train(graph, cfg, labels=labels, anchors_per_label=3)
    check(len(emb.coords) == len(graph) and len(emb.coords[0]) == 2, "embedding shape")
    check(len(anchors) == 6, "six anchors selected")
    axes = emb.assertion_axes()
    report = memeaxis.evaluate(axes, labels, exclude=set(anchors), mapping=[0, 1])
    check(report["n_evaluated"] == 54, "anchors excluded from evaluation")
    print(f"   semi-supervised f1={report['f1']:.3f}")

    base = memeaxis.nmf(graph, rank=2, iters=200, seed=1)
    rep = memeaxis.evaluate(base.assertion_axes(), labels)
    check(0.0 <= rep["f1"] <= 1.0, "nmf baseline evaluates")

    with tempfile.TemporaryDirectory() as d:
        p = os.path.join(d, "emb.json")
        emb.save(p)
        back = memeaxis.Embedding.load(p)
        check(back.coords == emb.coords and back.node_ids == emb.node_ids, "embedding save/load")
        gp = os.path.join(d, "graph.json")
        graph.save(gp)
        check(len(memeaxis.Graph.load(gp)) == len(graph), "graph save/load")

    g = memeaxis.Graph([("u1", "i1"), ("u2", "i1"), ("u2", "i2")], {0: ["i1"], 1: ["i2"]})
    check(len(g) == 4 and len(g.edges) == 3, "graph from posts")

    pts = [((float(x), float(y)), (2.0 * x + 1.0, y - 3.0)) for x in range(5) for y in range(4)]
    fit = memeaxis.ransac_affine(pts, iters=200, tol_px=1.0, seed=0)
    check(fit is not None and fit["inliers"] == 20, "ransac recovers exact affine")
    check(abs(fit["matrix"][0][0] - 2.0) < 1e-9 and abs(fit["translation"][1] + 3.0) < 1e-9, "affine parameters")

    print("all smoke checks passed")


if __name__ == "__main__":
    main()
