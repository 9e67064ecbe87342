"""Builds the extension module and exercises the Python bindings.

Usage: python3 python/smoke_test.py [--no-build]
"""

import json
import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build() -> Path:
    subprocess.run(
        ["cargo", "build", "--release", "-p", "linkops-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    for name in ("libpylinkops.so", "libpylinkops.dylib"):
        lib = ROOT / "target" / "release" / name
        if lib.exists():
            return lib
    sys.exit("extension library not found under target/release")


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main() -> None:
    lib = ROOT / "target" / "release" / "libpylinkops.so"
    if "--no-build" not in sys.argv:
        lib = build()
    tmp = Path(tempfile.mkdtemp())
    shutil.copy(lib, tmp / "pylinkops.so")
    sys.path.insert(0, str(tmp))
    import pylinkops as lo

    cfg = lo.OperatorConfig(-1.0, 5.0, 2.0, 1)
    assert (cfg.c, cfg.n, cfg.rho, cfg.k) == (-1.0, 5.0, 2.0, 1)
    assert cfg.domain() == (0.0, 1.0)
    assert "V_normalized" in lo.kinds()

    assert close(lo.barycenter(cfg, 1), 7 / 22, 1e-15)
    assert close(lo.a_functional(cfg, 1, "t"), 7 / 22)
    assert close(lo.variance_a(cfg, 1), lo.second_moment_a(cfg, 1) - (7 / 22) ** 2, 1e-15)

    xs = [0.0, 0.25, 0.5, 0.75, 1.0]
    v = lo.evaluate("V", cfg, "t", xs)
    d = lo.evaluate("D", cfg, "t", xs)
    assert all(close(a, b) for a, b in zip(v, d))
    assert all(close(y, 1.0) for y in lo.evaluate("V", cfg, "1", xs))

    limit = cfg.with_rho("inf")
    assert math.isinf(limit.rho)
    assert lo.OperatorConfig(0.0, 10.0, float("inf"), 1) == lo.OperatorConfig(0.0, 10.0, "inf", 1)

    series, closed = lo.e_of_l(cfg, 0.3)
    assert close(series, closed)
    numeric, closed = lo.var_x(cfg, 0.3)
    assert closed is not None and close(numeric, closed)

    moments = json.loads(lo.monomial_images(cfg, xs))
    assert max(max(r["residual"]) for r in moments["rows"]) < 1e-9

    s, s_int, bound = lo.squared_sum(-1.0, 2.0, 0.5)
    assert (s, bound) == (0.375, 0.5) and close(s_int, s)

    report = json.loads(lo.run_suite("decomposition", [cfg]))
    assert report["overall"] and report["failed"] == 0
    assert not json.loads(lo.run_suite("decomposition", [cfg], mutate=True))["overall"]

    for bad in (lambda: lo.OperatorConfig(-0.3, 5.0), lambda: lo.run_suite("nope")):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")

    print(f"python smoke test passed ({len(report['cases'])} decomposition cases)")


if __name__ == "__main__":
    main()
