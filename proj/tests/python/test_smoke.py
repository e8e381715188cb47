import json
import math

import numpy as np
import pytest

import mzlab


def plane_wave(n, k1, k2, L=math.pi):
    x = -L + 2 * L * np.arange(n) / n
    w = math.pi / L
    return np.exp(1j * w * (k1 * x[:, None] + k2 * x[None, :]))


def test_synthesize_is_unit_norm_and_zero_mean():
    f = mzlab.synthesize(7, 2.0, 5.0, N=64)
    assert f.shape == (64, 64)
    assert mzlab.lp_norm(f, 2.0) == pytest.approx(1.0, rel=1e-12)
    assert abs(f.mean()) < 1e-14


def test_lp_norm_of_plane_wave():
    f = plane_wave(32, 3, -1)
    # Unit modulus over the torus of area (2 pi)^2.
    assert mzlab.lp_norm(f, 2.0) == pytest.approx(2 * math.pi, rel=1e-12)


def test_sigma_hat_bessel_value():
    from scipy.special import j0

    got = mzlab.sigma_hat(1.0, 2.0, 0.0)
    assert got.real == pytest.approx(0.0, abs=1e-12)
    assert got.imag == pytest.approx(-math.pi * (j0(1.0) - j0(2.0)), rel=1e-10)


def test_mu_apply_is_homogeneous():
    f = mzlab.synthesize(3, 2.0, 5.0, N=32)
    a = mzlab.lp_norm(mzlab.mu_apply(f, t_min=0.03, t_max=8.0), 2.0)
    b = mzlab.lp_norm(mzlab.mu_apply(2.5 * f, t_min=0.03, t_max=8.0), 2.0)
    assert b == pytest.approx(2.5 * a, rel=1e-12)


def test_tl_norm_positive_and_frames_differ_by_name():
    f = mzlab.synthesize(5, 2.0, 6.0, N=64)
    assert mzlab.tl_norm(f, alpha=0.5) > 0.0
    with pytest.raises(ValueError):
        mzlab.tl_norm(f, frame="nonsense")


def test_z_omega_closed_form_and_divergence():
    value, divergent = mzlab.z_omega("constant", 0.5)
    expected = 2 * math.sqrt(math.pi) * math.gamma(0.25) / math.gamma(0.75)
    assert not divergent
    assert value == pytest.approx(expected, rel=1e-6)
    assert mzlab.z_omega("constant", 1.0)[1]


def test_alpha_range_and_exponents():
    lo, hi, degenerate = mzlab.alpha_range("z_flat", "positive")
    assert (lo, hi, degenerate) == (0.0, pytest.approx(1.0), False)
    assert mzlab.alpha_range("z_flat", "llogl")[2]
    with pytest.raises(ValueError):
        mzlab.alpha_range("w_flat", "positive", gamma=0.9)
    e = mzlab.interpolation_exponents(4, 2, 5, 0.05, 2, 1, 8, 2)
    assert e["theta1"] == pytest.approx(1 / 3)
    assert e["delta"] == pytest.approx(0.05)


def test_run_cli_and_config_errors(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"grid": {"N": 32}, "profile": {"kind": "identity"}}))
    code, out, err = mzlab.run("exponents", str(cfg), out=str(tmp_path / "o"))
    assert code == 0, err
    assert (tmp_path / "o" / "exponents.csv").exists()
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert "exponents" in summary
    bad = tmp_path / "bad.json"
    bad.write_text('{"grid": {"M": 3}}')
    code, out, err = mzlab.run("partition", str(bad))
    assert code == 2
    assert "grid.M" in err
