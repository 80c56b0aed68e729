#!/usr/bin/env python3
"""Builds the extension module, imports it and exercises the main entry points.

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
        ["cargo", "build", "--release", "-p", "theta-norms-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    lib = ROOT / "target" / "release" / "libtheta_norms.so"
    if not lib.exists():
        sys.exit(f"shared object not found at {lib}")
    return lib


def load(lib: Path):
    dest = Path(tempfile.mkdtemp(prefix="theta_norms_"))
    shutil.copy(lib, dest / "theta_norms.so")
    sys.path.insert(0, str(dest))
    import theta_norms  # noqa: E402

    return theta_norms


def main() -> None:
    lib = ROOT / "target" / "release" / "libtheta_norms.so"
    if "--no-build" not in sys.argv or not lib.exists():
        lib = build()
    tn = load(lib)

    assert tn.lp_norm([3.0, 4.0], 2.0) == 5.0
    assert tn.lp_norm([3.0, -7.0], math.inf) == 7.0
    assert tn.conjugate_exponent(math.inf) == 1.0
    try:
        tn.conjugate_exponent(1.0)
    except tn.ThetaNormsError:
        pass
    else:
        raise AssertionError("conjugate of 1 accepted")
    assert tn.conjugate_exponent(3.0) == 1.5

    theta = tn.ThetaExponent("power:2")
    assert theta(2.0) == 4.0
    assert theta.validate()  # θ(1) = 1 sits on the boundary
    assert tn.ThetaExponent("affine-power:1,1,1").validate() == []
    custom = tn.ThetaExponent.custom(lambda p: 1.0 + p, lambda p: 1.0, 1.0, 10.0)
    assert custom(2.0) == 3.0

    value, tail = tn.seq_norm([1.0, 0.5], 2.0, tail=(1.0, 1.0))
    assert abs(value - math.sqrt(math.pi**2 / 6)) <= tail + 1e-12

    r = tn.holder_seq([1.0, 2.0], [3.0, -1.0], 2.0)
    assert r.holds and r.lhs <= r.rhs
    assert tn.hardy([1.0] * 10_000, 2.0).ratio > 0.2499
    assert tn.hardy_power_family(0.7, 2.0, 10_000).holds
    _, _, kernel = tn.hilbert_kernel_bound(1, 2.0, 100_000)
    assert 1.8 <= kernel.lhs <= math.pi

    formula, extremal, _ = tn.dual_functional_norm([3.0, 4.0], 2.0)
    assert abs(formula - 5.0) < 1e-12 and abs(extremal - 5.0) < 1e-9

    emb = tn.embedding_strictness(2.0, 4.0, 1000, 4)
    assert emb["q_stable"] and emb["p_divergent"]

    nodes = [0.25, 0.75]
    weights = [0.5, 0.5]
    assert abs(tn.f_norm(nodes, weights, [2.0, -2.0], 3.0) - 2.0) < 1e-12
    assert tn.minkowski_fn(nodes, weights, [1.0, 2.0], [0.5, -1.0], 1.5).holds

    g, budget = tn.gamma_quadrature(5.0)
    assert abs(g - 24.0) <= 1e-8 and budget < 1e-8
    assert tn.gamma_log_convexity(1.5, 3.0, 0.3).holds

    cert = tn.find_gt_factorization([[1.0, 0.0], [0.0, 1.0]])
    assert cert.K <= 1.0 + 1e-6 and cert.form_norm == 2.0
    assert abs(sum(cert.lambda_) - 1.0) < 1e-12

    try:
        tn.find_gt_factorization([[1.0] * 25] * 25)
    except tn.ThetaNormsError:
        pass
    else:
        raise AssertionError("oversized matrix accepted")

    report, summary = tn.run_suite(seed=42, trials=3)
    assert summary["violations"] == 0
    body = [json.loads(line) for line in report.splitlines() if not line.startswith("#")]
    assert len(body) == summary["lines"]
    again, _ = tn.run_suite(seed=42, trials=3)
    assert report.split("#summary")[0] == again.split("#summary")[0]

    print("smoke test passed")


if __name__ == "__main__":
    main()
