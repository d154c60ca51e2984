"""Smoke tests for the python bindings.

Usage: python3 smoke_test.py <module_dir> <configs_dir>
"""

import math
import shutil
import sys
import tempfile

sys.path.insert(0, sys.argv[1])
configs = sys.argv[2] if len(sys.argv) > 2 else "configs"

import _core  # noqa: E402


def check(cond, msg):
    if not cond:
        print("FAIL:", msg)
        sys.exit(1)
    print("ok:", msg)


def main():
    # constant field: tensor reproduced, correctors vanish
    r = _core.cell_solve("constant", p1=3.0, resolution=16)
    check(abs(r["a"][0][0] - 3.0) < 1e-12, "constant tensor a11")
    check(r["corrector_sup"] < 1e-12, "constant correctors vanish")

    # laminate: harmonic / arithmetic means
    r = _core.cell_solve("laminate", p1=1.0, p2=4.0, resolution=64)
    check(abs(r["a"][0][0] - 1.6) / 1.6 < 0.01, "laminate a11 ~ 1.6")
    check(abs(r["a"][1][1] - 2.5) / 2.5 < 0.01, "laminate a22 ~ 2.5")
    check(r["coercivity_lower_bound"] > 0, "laminate certificate positive")

    # flux identities on a small laminate cell
    fx = _core.flux_identities("laminate", resolution=16)
    check(fx["identity_residual"] < 1e-8, "flux divergence identity")
    check(fx["b_mean_max"] < 1e-10, "flux b mean zero")

    # homogenized solve with nondegeneracy certificate
    s = _core.solve_homogenized("checkerboard", cell_resolution=16, resolution=32)
    check(s["converged"], "homogenized solve converged")
    check(s["sigma_min"] > 0, "nondegenerate at this resolution")

    # rate fitting
    slope, intercept, residual = _core.fit_rate(
        [1 / 8, 1 / 16, 1 / 32, 1 / 64], [(1 / 8) ** 0.5, (1 / 16) ** 0.5, (1 / 32) ** 0.5, (1 / 64) ** 0.5]
    )
    check(abs(slope - 0.5) < 1e-12, "exact power law slope")
    check(residual < 1e-12, "exact power law residual")

    # geometry helpers
    check(abs(_core.boundary_distance(0.5, 0.5) - 0.5) < 1e-14, "boundary distance")
    check(_core.cutoff(0.1, 0.5, 0.5) == 1.0, "cutoff plateau")
    check(_core.cutoff(0.1, 0.05, 0.5) == 0.0, "cutoff strip")

    # a tiny end-to-end study through the config front end
    out = tempfile.mkdtemp(prefix="homog2d_smoke_")
    try:
        rep = _core.run_study(configs + "/constant_sanity.cfg", out)
        check(rep["all_converged"], "sanity study converged")
        check(len(rep["records"]) == 2, "sanity study record count")
        for rec in rep["records"]:
            check(rec["sup_err"] < 1e-2, "sanity study error scale")
        check(any(f.endswith("sweep.csv") for f in rep["files"]), "csv emitted")
    finally:
        shutil.rmtree(out, ignore_errors=True)

    print("smoke test passed")


if __name__ == "__main__":
    main()
