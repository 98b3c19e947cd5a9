"""Smoke test for the placesim Python extension.

Build and install the module first, e.g.

    pip install maturin
    maturin develop -m crates/py/Cargo.toml

then run ``python python/smoke_test.py``.
"""

import math
import pathlib
import sys

import placesim_py as ps

ROOT = pathlib.Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"


def close(a, b, tol=1e-6):
    return math.isclose(a, b, rel_tol=0.0, abs_tol=tol)


def main():
    assert close(ps.total_response_latency(0.022, 0.029, 0.0), 0.051)
    assert close(ps.amortized_latency(0.021, 10.0), 0.021 / 0.79)
    assert close(ps.cloud_break_even(0.095, 0.021, 10.0), 1.873418, 1e-6)
    prefer, break_even = ps.prefer_cloud(0.022, 0.095, 0.021, 10.0)
    assert prefer and break_even > 1.8

    v = ps.mph_to_mps(40.0)
    assert close(v, 17.8816, 1e-12)
    assert close(ps.reaction_budget(v, 6.0, 100.0), 4.10221, 1e-5)
    assert ps.stopping_distance(v, 6.0, 0.051) > ps.braking_distance(v, 6.0)

    catalog = ps.Catalog.load(str(CONFIGS / "table1.toml"))
    report = catalog.place()
    assert report["selected"]["device"] == ("YOLO11m", "jetson_orin"), report["selected"]
    assert report["selected"]["cloud"] == ("YOLO11x", "a5000"), report["selected"]
    rejected = {r["model"] for r in report["evaluated"] if not r["feasible"]}
    assert rejected == {"YOLO11x", "YOLO11l"}, rejected

    sampler = ps.LatencySampler.percentile_table(0.015, 0.022, 0.060)
    assert close(sampler.percentile(0.5), 0.022)
    assert len(sampler.sample(5, seed=1)) == 5
    emp = ps.LatencySampler.empirical([0.01, 0.02, 0.03])
    assert set(emp.sample(100, seed=3)) <= {0.01, 0.02, 0.03}

    stats = ps.simulate_mm1(10.0, 0.05, 200_000, 1)
    assert abs(stats["mean_sojourn"] - 0.1) / 0.1 < 0.03, stats

    run = ps.simulate(str(CONFIGS / "baseline.toml"))
    assert run["outcome"] == "safe"
    assert close(run["d_stop"], 91.83791, 1e-4), run

    try:
        ps.braking_distance(10.0, 0.0)
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")

    print("placesim_py smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
