"""Smoke test for the bass_mri extension module.

Build and install first, e.g. `pip install --no-build-isolation ./crates/python`,
then run `python3 python/smoke_test.py`.
"""

import os
import tempfile

import bass_mri as bm


def main():
    data, sens = bm.phantom(16, 16, nc=2, items=5, seed=3)
    assert len(data) == 5 and data.grid == (16, 16, 1, 2)
    assert len(data.kspace(0)) == 2 and len(data.kspace(0)[0]) == 256
    train, val = data.split(3)

    init = bm.generate_pattern(16, 16, "variable-density", 40, seed=1, calibration=(2, 2))
    assert len(init) == 40 and len(init.locked) == 4

    zf = bm.Reconstructor("zero-fill", sens)
    f0, per_item = bm.efficacy(init, train, zf)
    assert 0.0 < f0 < 1.0 and len(per_item) == 3

    full = bm.SamplingPattern(16, 16, list(range(256)))
    assert bm.efficacy(full, train, zf)[0] < 1e-20

    pattern, value, trace = bm.bass_run(init, train, zf, m=40, iterations=30, k_init=6, seed=2)
    assert len(pattern) == 40 and len(trace) == 30
    assert value <= f0
    at_m = [r["F"] for r in trace if r["accepted"] and r["size"] == 40]
    assert all(b <= a for a, b in zip(at_m, at_m[1:]))

    again = bm.bass_run(init, train, zf, m=40, iterations=30, k_init=6, seed=2)
    assert again[0].members == pattern.members

    cs = bm.Reconstructor("cs-sfd", sens, lam=1e-3, iterations=20)
    report = bm.evaluate(pattern, val, cs, sens)
    assert report["recon_calls"] == 2 and 0.0 < report["nrmse_kspace"] < 2.0

    centre = bm.generate_pattern(16, 16, "center-only", 4, calibration=(2, 2))
    grown, gvalue, gtrace = bm.greedy_forward(centre, train, zf, m=6)
    assert len(grown) == 6 and len(gtrace) == 2 and gvalue is not None

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "learned.mask")
        pattern.save(path)
        assert bm.SamplingPattern.load(path).members == pattern.members

    try:
        bm.Reconstructor("wavelets", sens)
    except bm.BassError as e:
        assert "wavelets" in str(e)
    else:
        raise AssertionError("unknown method accepted")

    print(f"smoke test ok: F {f0:.4f} -> {value:.4f}, validation NRMSE {report['nrmse_kspace']:.4f}")


if __name__ == "__main__":
    main()
