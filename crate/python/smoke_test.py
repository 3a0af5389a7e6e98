"""Smoke test for the suslov_hk_py extension.

Build and install first:

    maturin develop --release -m crates/python/Cargo.toml
"""

import math

import suslov_hk_py as hk


def main():
    fig = hk.preset(1)
    inertia, eps = fig["inertia"], fig["epsilon"]
    print(inertia)

    # one step, against the exact rational result
    w = hk.hk_step((1.0, 1.0), inertia, eps)
    assert abs(w[0] - 1.0360536886450475) < 1e-15, w
    assert abs(w[1] - 0.84010972861761535) < 1e-15, w

    states = hk.orbit((1.0, 1.0), inertia, eps, 1000)
    f = [hk.first_integral(s, inertia, eps) for s in states]
    drift = max(abs(v - f[0]) for v in f) / abs(f[0])
    assert drift < 1e-12, drift
    assert abs(hk.constraint_residual(states[-1], inertia)) < 1e-12

    back = hk.hk_step_back(w, inertia, eps)
    assert math.dist(back, (1.0, 1.0)) < 1e-14

    p = hk.to_planar((1.0, 1.0), inertia)
    assert math.dist(hk.from_planar(p, inertia), (1.0, 1.0)) < 1e-14

    params = hk.fit_params((1.0, 1.0), inertia, eps)
    print(params)
    worst = max(math.dist(params.omega(n), states[n]) for n in range(200))
    assert worst < 1e-8, worst

    nd = hk.NDInertia([1.5, 2.0, 2.5, 0.5], [0.3, -0.2, 0.7])
    fixed = hk.steady_rotation(nd, 0.8)
    assert math.dist(hk.hk_step_nd(fixed, nd, 0.25), fixed) < 1e-14
    nxt = hk.hk_step_nd([0.5, -0.75, 1.2], nd, 0.25)
    assert abs(nxt[2] - 1.1811413738161991) < 1e-14, nxt
    assert len(hk.build_step_matrix([0.5, -0.75, 1.2], nd, 0.25)) == 3

    try:
        hk.Inertia3(-1.0, 1.0, 0.0, 0.0)
    except hk.SuslovError as e:
        print("rejected:", e)
    else:
        raise AssertionError("negative moment accepted")

    try:
        hk.preset(5)
    except hk.SuslovError:
        pass
    else:
        raise AssertionError("unknown figure accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
