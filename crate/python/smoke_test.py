"""Smoke test for the pyacmhd extension module.

Build and install the module first, for example with
``pip install --no-build-isolation ./crates/py`` (needs maturin), then run
``python python/smoke_test.py``.
"""

import math
import os
import tempfile

import pyacmhd


def main():
    grid = pyacmhd.Grid(16)
    assert grid.n == 16
    assert abs(grid.length - 2 * math.pi) < 1e-15

    state = pyacmhd.State.initial(grid, "well_prepared", 1e-2)
    pi3 = math.pi ** 3
    assert abs(state.energy() - 2 * pi3) < 1e-10 * pi3, state.energy()
    d = state.diagnostics()
    assert d["div_u"] < 1e-12 and d["div_B"] < 1e-12

    solver = pyacmhd.Solver()
    end, records = solver.run(state, 1e-2, 10)
    assert len(records) == 11
    assert abs(end.time - 0.1) < 1e-12
    assert records[-1]["energy"] < records[0]["energy"]

    try:
        solver.step(state, 1.0)
    except RuntimeError as e:
        assert "CFL" in str(e) or "stab" in str(e).lower(), e
    else:
        raise AssertionError("oversized step was accepted")

    try:
        pyacmhd.Grid(12)
    except ValueError:
        pass
    else:
        raise AssertionError("non power-of-two grid was accepted")

    u = end.velocity()
    assert len(u) == 3 and len(u[0]) == 16 ** 3

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "end.bin")
        pyacmhd.save_checkpoint(end, path)
        back = pyacmhd.load_checkpoint(path)
        assert back.time == end.time and back.epsilon == end.epsilon
        worst = max(abs(a - b) for a, b in zip(back.pressure(), end.pressure()))
        assert worst < 1e-13, worst

    exponent, prefactor, r2 = pyacmhd.fit_rate([(0.1, 0.03), (0.01, 0.0003), (0.001, 3e-6)])
    assert abs(exponent - 2) < 1e-12 and abs(prefactor - 3) < 1e-9 and r2 > 0.999999

    text = pyacmhd.parse_config("n = 16\nepsilon = 0.01\nT = 1\n")
    assert pyacmhd.parse_config(text) == text

    print("pyacmhd smoke test passed")


if __name__ == "__main__":
    main()
