"""Smoke tests for the python bindings."""

import math

import mfhb


def make_config(**kw):
    cfg = mfhb.RunConfig()
    cfg.d = 2
    cfg.n = 8
    cfg.n0 = 3
    cfg.m = 12
    cfg.dt = 0.01
    cfg.beta = 10.0
    cfg.seed = 4
    for key, value in kw.items():
        setattr(cfg, key, value)
    return cfg


def test_dataset_and_ensemble_are_deterministic():
    a = mfhb.sample_dataset(3, 2, 10, 123)
    b = mfhb.sample_dataset(3, 2, 10, 123)
    assert a.labels == b.labels
    assert a.features == b.features

    cfg = make_config()
    e1 = mfhb.init_ensemble(cfg)
    e2 = mfhb.init_ensemble(cfg)
    assert e1.to_json() == e2.to_json()


def test_risk_matches_numpy_brute_force():
    import numpy as np

    data = mfhb.sample_dataset(3, 2, 15, 7)
    cfg = make_config(d=3, n=5)
    ens = mfhb.init_ensemble(cfg)

    X = np.array(data.features)
    y = np.array(data.labels)
    A = np.array([p.theta.a for p in ens.particles])
    b = np.array([p.theta.b for p in ens.particles])
    psi = (1.0 / (1.0 + np.exp(-(X @ A.T))) * b).mean(axis=1)
    expected = 0.5 * np.mean((psi - y) ** 2)
    assert math.isclose(mfhb.risk(ens, data), expected, rel_tol=1e-12)


def test_trajectory_runs_and_descends():
    cfg = make_config(n=20, steps=500, record_every=100, integrator=mfhb.Integrator.HB,
                      beta=1e4, dt=0.05)
    data = mfhb.sample_dataset(cfg.d, cfg.n0, cfg.m, 9)
    out = mfhb.run_trajectory(cfg, data)
    assert out.records[0].step == 0
    assert out.records[-1].step == 500
    assert out.records[-1].risk < out.records[0].risk


def test_fixed_point_linear_case_single_iteration():
    grid = mfhb.ThetaGrid.line(-6.0, 6.0, 200)
    f = [0.5 * grid.center(c)[0] ** 2 for c in range(grid.cells())]
    kernels = mfhb.GridKernels.linear_case(grid, f)
    res = mfhb.solve_fixed_point(mfhb.ThetaDensity.uniform(grid), kernels, 1.0,
                                 damping=1.0, tol=1e-10, max_iter=50)
    assert res.converged
    assert res.iterations == 1
    assert math.isclose(res.density.mass(), 1.0, abs_tol=1e-9)


def test_knn_entropy_gaussian():
    import numpy as np

    rng = np.random.default_rng(0)
    pts = rng.standard_normal((5000, 2)).tolist()
    est = mfhb.knn_entropy(pts)
    assert abs(est - math.log(2 * math.pi * math.e)) < 0.1


def test_serialization_roundtrip():
    cfg = make_config(steps=3)
    text = cfg.to_json()
    back = mfhb.RunConfig.from_json(text)
    assert back.to_json() == text
