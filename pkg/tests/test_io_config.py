import csv
import json

import numpy as np
import pytest

from mcf_arrival import io
from mcf_arrival.arrival import ArrivalField
from mcf_arrival.config import load_config, parse_lines
from mcf_arrival.errors import ConfigError, FormatError
from mcf_arrival.grid import GridSpec, ScalarField


@pytest.fixture
def meridian():
    return GridSpec.box((-1.0, 0.0), (1.0, 1.0), 17, axisymmetric=True)


class TestMcaf:
    def test_levelset_round_trip(self, tmp_path, meridian, rng):
        f = ScalarField(meridian, rng.normal(size=meridian.shape))
        io.write_mcaf(tmp_path / "v.mcaf", f)
        g = io.read_mcaf(tmp_path / "v.mcaf", expect="levelset")
        assert g.spec == f.spec and np.array_equal(g.values, f.values)

    def test_arrival_round_trip_keeps_nan(self, tmp_path, meridian):
        u = ArrivalField.from_function(meridian, lambda p: 0.25 - np.sum(p * p, axis=-1))
        io.write_mcaf(tmp_path / "u.mcaf", u)
        back = io.read_mcaf(tmp_path / "u.mcaf", expect="arrival")
        assert isinstance(back, ArrivalField) and back.spec.axisymmetric
        assert np.array_equal(np.isnan(back.u), np.isnan(u.u))
        assert np.array_equal(back.u[u.mask], u.u[u.mask])

    def test_header_layout(self, tmp_path):
        spec = GridSpec((8, 9), (0.5, -1.0), 0.25)
        io.write_mcaf(tmp_path / "a.mcaf", ScalarField(spec, np.zeros(spec.shape)))
        data = (tmp_path / "a.mcaf").read_bytes()
        assert data[:6] == b"MCAF1\x00" and data[6] == 2 and data[7] == 0
        assert len(data) == 8 + 16 * 2 + 8 + 8 * 72

    def test_errors(self, tmp_path, meridian):
        path = tmp_path / "v.mcaf"
        io.write_mcaf(path, ScalarField(meridian, np.zeros(meridian.shape)))
        good = path.read_bytes()
        with pytest.raises(FormatError):
            io.read_mcaf(path, expect="arrival")
        for bad in [b"XXXXX\x00" + good[6:], good[:-8], good[:7] + b"\x08" + good[8:],
                    good[:6] + b"\x05" + good[7:]]:
            path.write_bytes(bad)
            with pytest.raises(FormatError):
                io.read_mcaf(path)


class TestTables:
    def test_csv_header_and_lf(self, tmp_path):
        io.write_csv(tmp_path / "t.csv", ["a", "b"], [(0.1, 2), (1 / 3, 4)])
        raw = (tmp_path / "t.csv").read_bytes()
        assert b"\r" not in raw and raw.startswith(b"a,b\n")
        rows = list(csv.reader(raw.decode().splitlines()))
        assert float(rows[2][0]) == 1 / 3

    def test_field_csv(self, tmp_path, meridian):
        io.write_field_csv(tmp_path / "f.csv", ScalarField(meridian, np.ones(meridian.shape)))
        lines = (tmp_path / "f.csv").read_text().splitlines()
        assert lines[0] == "i0,i1,x,rho,value"
        assert len(lines) == meridian.size + 1


class TestPgm:
    def test_round_trip(self, tmp_path):
        a = np.array([[0.0, 1.0, np.nan], [0.5, 0.25, 1.0]])
        lo, hi = io.write_pgm(tmp_path / "a.pgm", a)
        img, rlo, rhi = io.read_pgm(tmp_path / "a.pgm")
        assert (lo, hi) == (rlo, rhi) == (0.0, 1.0)
        assert img.shape == (2, 3)
        assert img[0, 2] == 0 and img[0, 0] == 1 and img[0, 1] == 255

    def test_header_comment(self, tmp_path):
        io.write_pgm(tmp_path / "a.pgm", np.eye(3))
        assert (tmp_path / "a.pgm").read_bytes().split(b"\n")[1] == b"# min=0.0 max=1.0"

    def test_needs_2d(self, tmp_path):
        with pytest.raises(FormatError):
            io.write_pgm(tmp_path / "a.pgm", np.zeros(3))


class TestJson:
    def test_nan_is_null_and_floats_round_trip(self):
        x = 0.1 + 0.2
        text = io.dumps({"a": np.nan, "b": np.float64(x), "c": np.arange(2), "d": np.bool_(1)})
        back = json.loads(text)
        assert back == {"a": None, "b": x, "c": [0, 1], "d": True}

    def test_manifest_digests(self, tmp_path):
        (tmp_path / "x.txt").write_text("hello")
        io.write_manifest(tmp_path / "m.json", {"seed": 0}, "0.1", {"s": 1.0},
                          [tmp_path / "x.txt"])
        m = json.loads((tmp_path / "m.json").read_text())
        assert m["outputs"]["x.txt"] == io.sha256(tmp_path / "x.txt")
        assert m["config"] == {"seed": 0}


class TestConfig:
    def test_defaults(self):
        cfg = load_config()
        assert cfg["scenario.name"] == "circle" and cfg["grid.n"] == 256
        assert cfg.get("analysis.tau") is None
        assert cfg.get("analysis.tau", 0.3) == 0.3

    def test_file_then_overrides_then_flags(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("# comment\nscenario.name = torus\ngrid.n = 64  # inline\nseed = 3\n")
        cfg = load_config(path, ["grid.n=32"], seed=9, out="o")
        assert (cfg["scenario.name"], cfg["grid.n"], cfg["seed"], cfg["output.dir"]) == \
            ("torus", 32, 9, "o")
        assert cfg.scenario_params() == {"R0": 1.0, "r0": 0.25}

    def test_lists_and_auto(self):
        vals = parse_lines(["analysis.radii = 0.3, 0.1", "evolve.epsilon = auto"])
        assert vals == {"analysis.radii": (0.3, 0.1), "evolve.epsilon": "auto"}

    @pytest.mark.parametrize("lines", [
        ["grid.n = 4"], ["nope = 1"], ["grid.n = many"], ["analysis.tol = -1"],
        ["analysis.radii = 0.1, 0.2"], ["scenario.name = cube"], ["evolve.cfl = 2"],
        ["just text"], ["seed = -1"],
    ])
    def test_rejected(self, lines):
        with pytest.raises(ConfigError):
            load_config(overrides=lines)

    def test_echo_is_plain(self):
        echo = load_config().echo()
        assert json.loads(json.dumps(echo)) == echo
        assert echo["analysis.radii"] == [0.2, 0.1, 0.05]

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "none.cfg")
