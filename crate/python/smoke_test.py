"""Smoke test for the freemult_py extension. Run with pytest or directly."""
import cmath
import json
import math

import freemult_py as fm


def test_point_masses():
    a = fm.AtomicMeasure.dirac("positive", 2.0)
    b = fm.AtomicMeasure.dirac("positive", 3.0)
    m = fm.boxtimes_moments(a, b, 4)
    assert all(abs(x - 6.0 ** (k + 1)) < 1e-9 for k, x in enumerate(m))
    assert fm.classical_multconv(a, b).atoms() == [(6.0, 1.0)]
    assert abs(fm.s_transform(a, -0.3) - 0.5) < 1e-12


def test_two_point_square():
    nu = fm.AtomicMeasure("positive", [1.0, 2.0], [0.5, 0.5])
    assert len(nu) == 2
    assert abs(fm.boxtimes_moments(nu, nu, 2)[1] - 6.1875) < 1e-10
    assert abs(fm.nc_moment_oracle(nu, nu, 2)[1] - 6.1875) < 1e-10
    back = fm.AtomicMeasure.from_json(nu.to_json())
    assert back.atoms() == nu.atoms()
    mean, se = fm.rmt_oracle(nu, nu, dim=64, samples=10, seed=5, order=2)
    assert abs(mean[0].real - 2.25) < 5 * se[0] + 1e-12


def test_circle_transforms():
    nu = fm.AtomicMeasure("circle", [0.3, -0.4], [0.5, 0.5])
    m1 = nu.moments(1)[0]
    assert abs(fm.sigma_series(nu, 3)[0] - 1 / m1) < 1e-12
    assert abs(fm.mellin_fourier(fm.AtomicMeasure.dirac("positive", math.e), 1.0) - cmath.exp(1j)) < 1e-12


def test_arrays():
    spec = json.dumps({
        "space": "circle",
        "family": "symmetric_pair",
        "rows": [100, 1000, 10000],
    })
    assert json.loads(fm.diagnose(spec))["verdict"]["kind"] == "haar_limit"
    report = json.loads(fm.verify(spec, check="haar"))
    assert report["pass"]


def test_errors():
    try:
        fm.AtomicMeasure("positive", [-1.0], [1.0])
    except ValueError:
        pass
    else:
        raise AssertionError("negative atom accepted")


if __name__ == "__main__":
    for name, f in list(globals().items()):
        if name.startswith("test_"):
            f()
    print("ok")
