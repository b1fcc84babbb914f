"""Walkthrough of the measurement pipeline on synthetic bench data.

Generates noisy force-depth series for three balls at known gauge
pressures, calibrates the linear force factor k_s on two of them, and
recovers the pressure and modulus of the third blind.

Run: python3 demos/estimate_from_synthetic_data.py
"""

import math

import numpy as np

from inflatekit import (
    CalibrationRecord,
    IndentationSample,
    IndentationSeries,
    calibrate_ks,
    regress_phat,
    run_procedure3,
)

KS_TRUE = 0.64  # the "physical" force factor our synthetic bench obeys
R, H = 0.13, 8.6e-4  # exercise-ball geometry (m)


def bench_series(pg, rng, object_id):
    """Synthetic indentation series: F = pi k_s R Pg w plus 3% sensor noise."""
    samples = []
    for w_mm in (5, 10, 15, 20, 25):
        w = w_mm * 1e-3
        f = math.pi * KS_TRUE * R * pg * w * (1 + 0.03 * rng.standard_normal())
        samples.append(IndentationSample(force=f, depth=w))
    return IndentationSeries(
        samples=tuple(samples), object_id=object_id, region_radius=R, region_thickness=H
    )


def main():
    rng = np.random.default_rng(1)

    print("== calibration (two balls with manometer-measured pressure) ==")
    records = []
    for pg in (800.0, 2000.0):
        reg = regress_phat(bench_series(pg, rng, f"cal_{pg:.0f}"))
        print(f"  Pg = {pg:6.0f} Pa  ->  Pg_hat = {reg.Pg_hat:7.1f} Pa  (r2 = {reg.r2:.4f})")
        records.append(CalibrationRecord(measured_Pg=pg, estimated_Pg_hat=reg.Pg_hat))
    cal = calibrate_ks(records)
    print(f"  k_s = {cal.ks:.4f}  (true {KS_TRUE})")

    print("\n== blind estimation of a third ball (true Pg = 1300 Pa) ==")
    target = bench_series(1300.0, rng, "mystery_ball")
    est = run_procedure3(target, cal, n=8)  # 8 wrinkles observed at deep poke
    print(f"  Pg = {est.Pg:7.1f} Pa")
    print(f"  E  = {est.E / 1e6:7.3f} MPa  (nu = {est.nu})")
    print(f"  bendability tau = {est.diagnostics['tau']:.1f}, fit r2 = {est.diagnostics['r2']:.4f}")


if __name__ == "__main__":
    main()
