import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drivenwell import (
    ConfigurationError, DoubleWell, Drive, Grid, SimulationConfig,
    drive_amplitude, evaluate_potential, load_config, validate_config,
)
from drivenwell.model import collect_violations, config_as_dict

from conftest import reference_grid, reference_well


def make_config(**overrides):
    base = dict(grid=reference_grid(0.05), well=reference_well(),
                drive=Drive(a0=0.3, epsilon=0.1, omega_mod=0.01755,
                            omega_carrier=2.0),
                dt=0.005, t_total=100.0, sample_stride=200)
    base.update(overrides)
    return SimulationConfig(**base)


class TestEvaluatePotential:
    def test_left_shaft_depth_matches_figure_caption(self):
        well = reference_well()
        assert evaluate_potential(well, 0.5 * (well.a + well.b)) == -13.82

    def test_gap_is_zero(self):
        well = reference_well()
        assert evaluate_potential(well, 0.5 * (well.b + well.c)) == 0.0

    def test_edge_point_belongs_to_shaft(self):
        well = reference_well()
        assert evaluate_potential(well, well.b) == -well.u_left
        assert evaluate_potential(well, well.d) == -well.u_right

    def test_tie_at_contiguous_shafts_goes_left(self):
        well = DoubleWell(a=0.0, b=1.0, c=1.0, d=2.0, u_left=3.0, u_right=5.0)
        assert evaluate_potential(well, 1.0) == -3.0

    @given(st.floats(-2.6, -0.3), st.floats(-2.6, -0.3))
    def test_piecewise_constant_inside_left_shaft(self, x1, x2):
        well = reference_well()
        assert evaluate_potential(well, x1) == evaluate_potential(well, x2)

    @given(st.floats(-50, 50, allow_nan=False))
    def test_bounded_between_deepest_shaft_and_zero(self, x):
        well = reference_well()
        u = evaluate_potential(well, x)
        assert -max(well.u_left, well.u_right) <= u <= 0.0

    def test_vectorized_evaluation(self):
        well = reference_well()
        x = np.array([well.a - 1.0, well.a, well.c, well.d + 1.0])
        np.testing.assert_array_equal(
            evaluate_potential(well, x),
            [0.0, -well.u_left, -well.u_right, 0.0])


class TestDriveAmplitude:
    def test_figure_parameters_at_t_zero(self):
        drive = Drive(a0=0.3, epsilon=0.1, omega_mod=0.01755, omega_carrier=2.0)
        assert drive_amplitude(drive, 0.0) == 0.3

    @given(st.floats(0, 1e4))
    def test_unmodulated_is_constant(self, t):
        drive = Drive(a0=0.7, epsilon=0.0, omega_mod=0.3, omega_carrier=2.0)
        assert drive_amplitude(drive, t) == 0.7

    def test_quarter_modulation_period(self):
        drive = Drive(a0=0.3, epsilon=0.1, omega_mod=0.01755, omega_carrier=2.0)
        t = (math.pi / 2.0) / 0.01755
        assert drive_amplitude(drive, t) == pytest.approx(0.27, abs=1e-12)

    @given(st.floats(0, 1e3))
    @settings(max_examples=50)
    def test_periodic_in_modulation_period(self, t):
        drive = Drive(a0=0.3, epsilon=0.25, omega_mod=0.4, omega_carrier=2.0)
        period = 2.0 * math.pi / drive.omega_mod
        assert drive_amplitude(drive, t) == pytest.approx(
            drive_amplitude(drive, t + period), abs=1e-9)

    @given(st.floats(0, 1e4), st.floats(0, 0.999), st.floats(0.001, 10))
    @settings(max_examples=100)
    def test_modulation_depth_bound(self, t, eps, om):
        drive = Drive(a0=0.4, epsilon=eps, omega_mod=om, omega_carrier=2.0)
        assert abs(drive_amplitude(drive, t) - 0.4) <= 0.4 * eps * (1 + 1e-12)


class TestValidateConfig:
    def test_reference_geometry_in_box_60_is_valid(self):
        cfg = make_config()
        assert validate_config(cfg) is cfg

    def test_reversed_edges_name_the_ordering(self):
        bad = DoubleWell(a=1.0, b=0.0, c=2.0, d=3.0, u_left=1.0, u_right=2.0)
        with pytest.raises(ConfigurationError) as err:
            validate_config(make_config(well=bad))
        assert any("a < b <= c < d" in v for v in err.value.violations)

    def test_box_equal_to_well_extent_violates_margin(self):
        well = reference_well()
        grid = Grid(well.a, well.d, 100)
        with pytest.raises(ConfigurationError) as err:
            validate_config(make_config(grid=grid))
        assert any("margin_factor" in v for v in err.value.violations)

    def test_equal_depths_rejected(self):
        well = DoubleWell(a=-2.0, b=-1.0, c=1.0, d=2.0, u_left=5.0, u_right=5.0)
        with pytest.raises(ConfigurationError):
            validate_config(make_config(well=well))

    def test_epsilon_out_of_range(self):
        drive = Drive(a0=0.3, epsilon=1.2, omega_mod=0.1, omega_carrier=2.0)
        with pytest.raises(ConfigurationError):
            validate_config(make_config(drive=drive))

    def test_unresolved_carrier_rejected_unless_allowed(self):
        drive = Drive(a0=0.3, epsilon=0.0, omega_mod=0.0, omega_carrier=None)
        cfg = make_config(drive=drive)
        with pytest.raises(ConfigurationError):
            validate_config(cfg)
        assert validate_config(cfg, require_resolved=False) is cfg

    def test_every_violation_collected_at_once(self):
        bad = make_config(dt=-1.0, sample_stride=0)
        violations = collect_violations(bad)
        assert any("dt" in v for v in violations)
        assert any("sample_stride" in v for v in violations)


CONFIG_TEXT = """
[grid]
x_min = -30.0
x_max = 30.0
n_interior = 1199

[well]
width_left = 2.337
gap = 0.876
width_right = 2.045
u_left = 13.82
u_right = 11.91

[drive]
a0 = 0.3
epsilon = 0.1
omega_mod = 0.01755
omega_carrier = resonant

[run]
dt = 0.005
t_total = 500.0
sample_stride = 200
initial_state = ground
"""


class TestConfigFile:
    def test_geometry_form_centers_the_well(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(CONFIG_TEXT)
        cfg = load_config(str(path))
        well = cfg.well
        assert well.width_left == pytest.approx(2.337)
        assert well.gap == pytest.approx(0.876)
        assert well.a + well.d == pytest.approx(0.0, abs=1e-12)
        assert cfg.drive.omega_carrier is None
        assert cfg.initial_state == 0
        assert cfg.sample_stride == 200

    def test_unknown_key_is_an_error(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(CONFIG_TEXT.replace("[run]", "[run]\nbogus_key = 1"))
        with pytest.raises(ConfigurationError) as err:
            load_config(str(path))
        assert any("bogus_key" in v for v in err.value.violations)

    def test_unknown_section_is_an_error(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(CONFIG_TEXT + "\n[extras]\nfoo = 1\n")
        with pytest.raises(ConfigurationError):
            load_config(str(path))

    def test_missing_file_names_the_path(self, tmp_path):
        with pytest.raises(ConfigurationError) as err:
            load_config(str(tmp_path / "absent.cfg"))
        assert "absent.cfg" in str(err.value)

    def test_explicit_edges_form(self, tmp_path):
        text = CONFIG_TEXT.replace(
            "width_left = 2.337\ngap = 0.876\nwidth_right = 2.045",
            "a = -2.0\nb = -0.5\nc = 0.5\nd = 2.0")
        path = tmp_path / "run.cfg"
        path.write_text(text)
        cfg = load_config(str(path))
        assert (cfg.well.a, cfg.well.d) == (-2.0, 2.0)

    def test_custom_initial_state_index(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(CONFIG_TEXT.replace("initial_state = ground",
                                            "initial_state = 2"))
        assert load_config(str(path)).initial_state == 2

    def test_dict_snapshot_round_trips_keys(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(CONFIG_TEXT)
        snapshot = config_as_dict(load_config(str(path)))
        assert snapshot["drive"]["omega_carrier"] == "resonant"
        assert snapshot["well"]["u_left"] == 13.82
        assert set(snapshot) == {"grid", "well", "drive", "run"}
