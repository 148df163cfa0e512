"""Smoke test for the gridres extension module.

Build and stage the module first (see README), then run:

    python3 python/smoke_test.py
"""

import pathlib
import sys
import tempfile

import gridres

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "crates/core/tests/fixtures"


def main():
    price, qty = gridres.clear_market([("buy", 0.20, 10.0), ("sell", 0.10, 10.0)])
    assert abs(price - 0.15) < 1e-12 and qty == 10.0

    sc = gridres.Scenario.load(FIXTURES / "feeder_small.glm")
    assert len(sc) == 20
    assert sc.validate() == []
    res = sc.run()
    assert res.complete and res.steps == 180
    load = res.column("feeder_totals", "total_load")
    assert len(load) == 181 and max(load) > 0
    assert res.times("feeder_totals")[0] == "2019-07-01 10:00:00"

    bad = gridres.Scenario.load(FIXTURES / "cycle.glm")
    assert not bad.is_runnable()
    assert any(code == "NOT_RADIAL" for _, code, _, _ in bad.validate())

    text = gridres.generate_feeder(houses=3, seed=5)
    gen = gridres.Scenario.parse(text)
    assert gen.is_runnable()
    assert gridres.Scenario.parse(gen.pretty()).objects() == gen.objects()

    s1 = gridres.Scenario.load(FIXTURES / "scenario1.glm")
    partial = s1.with_attack("s1", fraction=0.2)
    summary = partial.run(seed=3).summary()
    assert summary["max_clearing_price"] == "0.630000", summary

    with tempfile.TemporaryDirectory() as d:
        paths = res.write(d)
        assert sorted(p.name for p in map(pathlib.Path, paths))[0] == "events.csv"

    print("gridres smoke test passed")


if __name__ == "__main__":
    sys.exit(main())
