"""HTTP endpoints: measurement answers, error codes and report envelopes."""

from __future__ import annotations

import base64

import numpy as np
import pytest

from matrixrepet import Matrix, gen_separation

from conftest import matrix_payload


def rand_payload(n: int, sigma: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    return matrix_payload(Matrix(rng.integers(0, sigma, size=(n, n), dtype=np.int64)))


def report_fields(body: dict, command: str):
    assert body["command"] == command
    assert body["version"]
    assert body["timing_ms"] >= 0
    return body["output"]


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok" and body["version"]


# ------------------------------------------------------------------- delta


def test_delta_fast_and_naive_agree(client):
    payload = rand_payload(8, 2, 42)
    outs = []
    for method in ("fast", "naive"):
        r = client.post("/delta", json={"matrix": payload, "method": method})
        assert r.status_code == 200
        out = report_fields(r.json(), "delta")
        assert out["method"] == method
        outs.append(out["profile"])
    assert outs[0] == outs[1]
    assert outs[0]["d"][0] == 2  # two symbols


def test_delta_rejects_non_square(client):
    payload = {"rows": 2, "cols": 3, "cells": [1, 2, 3, 4, 5, 6]}
    r = client.post("/delta", json={"matrix": payload})
    assert r.status_code == 400
    assert r.json()["detail"]["code"] == "format"


def test_delta_rejects_cell_count_mismatch(client):
    payload = {"rows": 2, "cols": 2, "cells": [1, 2, 3]}
    assert client.post("/delta", json={"matrix": payload}).status_code == 422


# ------------------------------------------------------------------- gamma


def test_gamma_greedy_and_exact(client):
    uniform = matrix_payload(Matrix(np.zeros((3, 3), dtype=np.int64)))
    for mode in ("greedy", "exact"):
        r = client.post("/gamma", json={"matrix": uniform, "mode": mode})
        assert r.status_code == 200
        out = report_fields(r.json(), "gamma")
        assert out["size"] == 1 and len(out["positions"]) == 1


def test_gamma_exact_guard_is_format_error(client):
    big = matrix_payload(Matrix(np.zeros((11, 11), dtype=np.int64)))
    r = client.post("/gamma", json={"matrix": big, "mode": "exact"})
    assert r.status_code == 400
    assert r.json()["detail"]["code"] == "format"
    assert "allow_large" in r.json()["detail"]["message"]


def test_gamma_exact_budget_exhaustion(client):
    r = client.post(
        "/gamma", json={"matrix": rand_payload(6, 2, 0), "mode": "exact", "budget": 3}
    )
    assert r.status_code == 400
    assert r.json()["detail"]["code"] == "inconclusive"


# ------------------------------------------------------------------ verify


def test_verify_valid_attractor(client):
    uniform = matrix_payload(Matrix(np.zeros((3, 3), dtype=np.int64)))
    r = client.post("/verify", json={"matrix": uniform, "positions": [[2, 2]]})
    out = report_fields(r.json(), "verify")
    assert out == {"valid": True, "size": 1}


def test_verify_empty_positions_reports_witness(client):
    uniform = matrix_payload(Matrix(np.zeros((3, 3), dtype=np.int64)))
    r = client.post("/verify", json={"matrix": uniform, "positions": []})
    out = report_fields(r.json(), "verify")
    assert out["valid"] is False and out["size"] == 0
    assert out["witness"] == {"k": 1, "anchor": [1, 1]}


def test_verify_rejects_out_of_range_position(client):
    uniform = matrix_payload(Matrix(np.zeros((3, 3), dtype=np.int64)))
    r = client.post("/verify", json={"matrix": uniform, "positions": [[4, 1]]})
    assert r.status_code == 400
    assert r.json()["detail"]["code"] == "format"


# --------------------------------------------------------------- reduce/gen


def test_reduce_builds_row_replicated_matrix(client):
    r = client.post("/reduce", json={"s": "ab"})
    out = report_fields(r.json(), "reduce")
    mp = out["matrix"]
    assert (mp["rows"], mp["cols"]) == (2, 2)
    assert mp["cells"] == [ord("a"), ord("b")] * 2


def test_gen_nonmono_returns_string_pair(client):
    r = client.post("/gen", json={"family": "nonmono", "n": 1})
    out = report_fields(r.json(), "gen")
    assert out == {"w": "abbbaab", "wb": "abbbaabb"}


def test_gen_separation_and_permuted(client):
    r = client.post("/gen", json={"family": "separation", "n": 16})
    cells = report_fields(r.json(), "gen")["matrix"]["cells"]
    assert cells[:16] == [ord(c) for c in "1000000011000000"]
    r2 = client.post("/gen", json={"family": "permuted", "n": 16, "perm": [2, 1]})
    cells2 = report_fields(r2.json(), "gen")["matrix"]["cells"]
    assert cells2[:16] == [ord(c) for c in "1100000010000000"]
    assert cells[16:] == cells2[16:]


def test_gen_random_is_deterministic(client):
    a = client.post("/gen", json={"family": "random", "n": 6, "sigma": 3, "seed": 9}).json()
    b = client.post("/gen", json={"family": "random", "n": 6, "sigma": 3, "seed": 9}).json()
    assert a["output"] == b["output"]


@pytest.mark.parametrize(
    "body",
    [
        {"family": "mystery", "n": 16},
        {"family": "separation", "n": 15},
        {"family": "nonmono", "n": 0},
    ],
)
def test_gen_rejects_bad_requests(client, body):
    r = client.post("/gen", json=body)
    assert r.status_code in (400, 422)
    if r.status_code == 400:
        assert r.json()["detail"]["code"] == "format"


# -------------------------------------------------------------- block trees


def test_build_access_stats_round_trip(client):
    payload = rand_payload(8, 2, 7)
    built = client.post("/build", json={"matrix": payload, "k": 2}).json()
    out = report_fields(built, "build")
    assert out["bytes"] > 0 and out["stats"]["source_side"] == 8
    tree = out["tree"]
    base64.b64decode(tree, validate=True)  # well-formed transport

    got = client.post("/access", json={"tree": tree, "i": 3, "j": 5}).json()
    acc = report_fields(got, "access")
    assert acc["symbol"] == payload["cells"][2 * 8 + 4]
    assert max(acc["visits_per_level"]) <= 2

    st = client.post("/stats", json={"tree": tree}).json()
    assert report_fields(st, "stats")["stats"] == out["stats"]


def test_build_with_attractor_and_shallow_is_rejected(client):
    payload = rand_payload(4, 2, 1)
    r = client.post(
        "/build",
        json={"matrix": payload, "shallow": True, "attractor": [[1, 1]]},
    )
    assert r.status_code == 400
    assert r.json()["detail"]["code"] == "format"


def test_build_with_invalid_attractor_names_witness(client):
    payload = rand_payload(4, 2, 1)
    r = client.post("/build", json={"matrix": payload, "attractor": []})
    assert r.status_code == 400
    detail = r.json()["detail"]
    assert detail["code"] == "invalid_attractor"
    assert detail["witness"]["k"] == 1 and len(detail["witness"]["anchor"]) == 2


def test_build_with_valid_attractor(client):
    m = gen_separation(16)
    g = client.post("/gamma", json={"matrix": matrix_payload(m)}).json()["output"]
    r = client.post(
        "/build", json={"matrix": matrix_payload(m), "attractor": g["positions"]}
    )
    assert r.status_code == 200
    assert report_fields(r.json(), "build")["stats"]["origin"] == "attractor"


def test_access_out_of_range_is_format_error(client):
    tree = client.post("/build", json={"matrix": rand_payload(4, 2, 2)}).json()["output"]["tree"]
    r = client.post("/access", json={"tree": tree, "i": 5, "j": 1})
    assert r.status_code == 400
    assert r.json()["detail"]["code"] == "format"


def test_tree_transport_rejects_garbage(client):
    r = client.post("/access", json={"tree": "not base64!!", "i": 1, "j": 1})
    assert r.status_code == 400
    assert r.json()["detail"]["code"] == "format"
    junk = base64.b64encode(b"XXXXjunk").decode()
    r2 = client.post("/stats", json={"tree": junk})
    assert r2.status_code == 400
    assert r2.json()["detail"]["code"] == "format"


# ------------------------------------------------------------------- bench


def test_bench_rows_shape(client):
    r = client.post("/bench", json={"family": "separation", "sizes": [16]})
    out = report_fields(r.json(), "bench")
    assert out["family"] == "separation"
    (row,) = out["rows"]
    assert row["n"] == 16
    assert row["delta2d"] == 3.0 and (row["delta2d_num"], row["delta2d_den"]) == (3, 1)
    assert row["gamma_greedy"] >= 2
    assert row["total_nodes"] > 0 and row["max_marked_per_level"] >= 1
