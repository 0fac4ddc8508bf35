import numpy as np

from wulffflow import Anisotropy, FlowConfig, build_sphere_grid, run
from wulffflow.bodies import harmonic_radial
from wulffflow.flow import make_solver
from wulffflow.io import (FLOW_SCHEMA, flow_columns, read_report, read_table, write_final_state,
                          write_flow_csv, write_obj, write_report, write_table)


def test_table_roundtrip_preserves_floats(tmp_path):
    rows = [[0.1, 1 / 3], {"a": 2.0, "b": np.float64(1e-300)}]
    path = write_table(tmp_path / "sub" / "t.csv", ["a", "b"], rows, comment="hello")
    assert path.read_text().startswith("# hello\n")
    header, data = read_table(path)
    assert header == ["a", "b"]
    np.testing.assert_array_equal(data, [[0.1, 1 / 3], [2.0, 1e-300]])


def test_report_roundtrip(tmp_path):
    write_report(tmp_path / "r.txt", {"status": "ok", "x": 0.1, "n": 3})
    rep = read_report(tmp_path / "r.txt")
    assert rep == {"status": "ok", "x": "0.1", "n": "3"}


def _short_run(grid):
    f = Anisotropy.round()
    body = harmonic_radial(2, 1.0, {(1, 0): 1.0}, 0.2)
    res = run(f, grid, body, FlowConfig(k=2, t_max=0.02, record_stride=2))
    return make_solver(f, grid, 2), res


def test_flow_csv_columns(tmp_path):
    _, res = _short_run(build_sphere_grid("axisymmetric", 16))
    path = write_flow_csv(tmp_path / "flow.csv", res.records, 2)
    assert FLOW_SCHEMA in path.read_text().splitlines()[0]
    header, data = read_table(path)
    assert header == flow_columns(2)
    assert data.shape == (len(res.records), len(header))
    assert np.all(np.diff(data[:, 0]) > 0)


def test_final_state_rows(tmp_path):
    grid = build_sphere_grid("full", 16)
    solver, res = _short_run(grid)
    pts = solver.surface_points(res.field)
    path = write_final_state(tmp_path / "s.csv", grid, res.field, solver.support_values(res.field),
                             pts)
    header, data = read_table(path)
    assert len(data) == grid.theta.size * grid.shape[1]
    np.testing.assert_allclose(data[:, header.index("X2")], pts[..., 2].ravel())


def test_obj_mesh_counts(tmp_path):
    for mode, n_phi in (("full", 32), ("axisymmetric", 64)):
        grid = build_sphere_grid(mode, 16)
        pts = grid.x * 1.5
        text = write_obj(tmp_path / f"{mode}.obj", grid, pts).read_text().splitlines()
        verts = [ln for ln in text if ln.startswith("v ")]
        faces = [ln for ln in text if ln.startswith("f ")]
        assert len(verts) == 16 * n_phi + 2
        assert len(faces) == 2 * n_phi + 15 * n_phi
        idx = np.array([int(i) for ln in faces for i in ln.split()[1:]])
        assert idx.min() == 1 and idx.max() == len(verts)
        v = np.array([[float(c) for c in ln.split()[1:]] for ln in verts[1:-1]])
        np.testing.assert_allclose(np.linalg.norm(v, axis=1), 1.5)
