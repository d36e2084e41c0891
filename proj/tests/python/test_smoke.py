"""Smoke tests for the python bindings: exercise each exposed operation on a
reduced line and hold the frozen reference values from the native suite."""

import numpy as np
import pytest

import cochlea_tl as ct


@pytest.fixture(scope="module")
def params():
    p = ct.ModelParams()
    p.N = 120
    p.fs = 100e3
    return p


def test_maps(params):
    p = ct.ModelParams()
    assert ct.greenwood_cf(0.0, p) == pytest.approx(50076.0)
    assert ct.greenwood_cf(12.1e-3, p) == pytest.approx(183.8401676406139)
    assert ct.qerb(4000.0, p) == pytest.approx(3.240132700409437)
    assert ct.omega_bm_of(2 * np.pi * 20000.0) == pytest.approx(2 * np.pi * 25500.0)
    x, cf = ct.section_positions(p)
    assert len(x) == 1000 and x[-1] == p.L
    assert np.all(np.diff(cf) < 0)
    with pytest.raises(Exception):
        ct.greenwood_cf(-1.0, p)


def test_dispersion_and_beta(params):
    p = ct.ModelParams()
    sol = ct.solve_dispersion(2 * np.pi * 10000.0, 2 * np.pi * 25500.0, 1.3, p)
    assert sol["residual"] <= 1e-8
    assert sol["kappa"].real > 0
    freqs, beta = ct.beta_target(2 * np.pi * 25500.0, 0.7, p)
    assert len(freqs) == p.m2
    assert np.allclose(beta, 1.0)


def test_fit_and_poles(params):
    p = ct.ModelParams()
    freqs, beta = ct.beta_target(2 * np.pi * 25500.0, 1.3, p)
    filt, diag = ct.fit_filter(np.asarray(freqs), np.asarray(beta),
                               2 * np.pi * 25500.0, 1.3, p)
    assert abs(ct.beta_hat(filt, 0.0, p.fs) - 1.0) < 1e-9
    assert diag["max_pole_radius"] < 1.0
    roots = ct.filter_poles(filt)
    assert len(roots) == p.K
    assert max(abs(z) for z in roots) == pytest.approx(diag["max_pole_radius"])


def test_train_lut_query():
    # the correction pipeline presumes the native 200 kHz rate: at lower rates
    # the basal sections' fit band is truncated at Nyquist. A reduced map
    # (base CF near 20 kHz) keeps this short training run well-conditioned.
    p = ct.ModelParams()
    p.N = 120
    p.A1 = 20216.0
    net, report = ct.train_rbf(p, seed=5, stage1_steps=400, stage2_steps=60)
    assert net.weights.shape == (360, 32)
    assert report["stage1_last_mean"] < report["stage1_first_mean"]
    lut = ct.build_lut(net, p, 30)
    assert (lut.n_sections, lut.n_g, lut.K) == (p.N, 30, 32)
    f = ct.lut_query(lut, 10, 0.65)
    assert len(f.b) == 32
    assert f.eps == pytest.approx(-np.sum(f.b))
    # round trip through the binary format
    ct.save_lut(lut, "smoke.blut")
    back = ct.load_lut("smoke.blut", p)
    assert ct.lut_body_crc(back) == ct.lut_body_crc(lut)


def test_simulate_and_growth(params):
    spec = ct.StimulusSpec()
    spec.kind = ct.StimulusKind.tone
    spec.freq_hz = 8000.0
    spec.level_db = 40.0
    spec.duration_s = 0.02
    spec.fs = params.fs
    stim = ct.gen_stimulus(spec)
    assert np.abs(stim).max() == pytest.approx(100.0, rel=5e-3)

    cfg = ct.TLConfig()
    tr = ct.simulate(stim, params, cfg, ct.Mode.v1d, None, [60], 1, "start", None)
    v = np.asarray(tr["v"])[0]
    assert v.shape == np.asarray(tr["t"]).shape
    assert np.abs(v).max() > 0
    # linearity of the frozen-pole run
    spec.level_db = 46.0
    tr2 = ct.simulate(ct.gen_stimulus(spec), params, cfg, ct.Mode.v1d, None,
                      [60], 1, "start", None)
    v2 = np.asarray(tr2["v"])[0]
    ratio = np.sqrt(np.mean(v2[len(v2) // 2:] ** 2) / np.mean(v[len(v) // 2:] ** 2))
    assert 20 * np.log10(ratio) == pytest.approx(6.0, abs=0.1)


def test_calibration(params):
    cal = ct.calibrate_knees(params, ct.TLConfig(), ct.Mode.v1d, None, 20000.0)
    assert cal["i_knee2_db"] > cal["i_knee1_db"]
    assert cal["v_knee2"] > cal["v_knee1"] > 0
