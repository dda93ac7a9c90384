"""Smoke test for the Python bindings. Run after `maturin develop`."""

import math

import bioconvect_py as bc


def main():
    cfg = bc.SimConfig("weak")
    cfg.n_modes = 6
    cfg.t_end = 0.2
    assert bc.SimConfig.from_toml(cfg.to_toml()).n_modes == 6

    sys = bc.System(cfg)
    assert sys.n == 6
    ev = sys.velocity_eigenvalues
    assert all(b >= a - 1e-10 for a, b in zip(ev, ev[1:]))

    traj = sys.integrate()
    assert traj.blowup is None
    norms = traj.norms()
    assert len(norms) == len(traj)
    assert all(abs(n["mass"] - cfg.alpha) < 1e-8 for n in norms)

    m = bc.malpha(1.0, 0.1, 1.0, nx=32, nz=32)
    assert m["bounds"]["all_pass"]
    assert math.isclose(m["diagnostics"]["mass"], 1.0, rel_tol=1e-10)

    strong = bc.SimConfig("strong")
    strong.n_modes = 6
    st = bc.System(strong).stationary()
    assert st["converged"]

    try:
        bc.SimConfig("nope")
    except ValueError:
        pass
    else:
        raise AssertionError("bad variant accepted")
    print("ok")


if __name__ == "__main__":
    main()
