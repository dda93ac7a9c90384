use pyo3::ffi::c_str;
use pyo3::prelude::*;

#[test]
fn module_round_trip() {
    use bioconvect_py::bioconvect_py;
    pyo3::append_to_inittab!(bioconvect_py);
    Python::attach(|py| {
        py.run(
            c_str!(
                r#"
import bioconvect_py as bc
cfg = bc.SimConfig("weak")
cfg.n_modes = 4
cfg.t_end = 0.05
again = bc.SimConfig.from_json(cfg.to_json())
assert again.n_modes == 4 and again.t_end == 0.05
sys = bc.System(cfg)
traj = sys.integrate()
assert traj.blowup is None and len(traj) == len(traj.times)
assert traj.max_energy_residual() < 1e-6
s = sys.initial_state()
assert len(s.c) == 4 and len(s.d) == 4
try:
    bc.malpha(1.0, 0.1, 1.0, lx=-1.0)
    raise SystemExit("bad domain accepted")
except ValueError:
    pass
"#
            ),
            None,
            None,
        )
        .unwrap();
    });
}
