from fractions import Fraction

import pytest
from rama.core.errors import ParameterError
from rama.schema import CheckReport, CommandConfig, DiscrepancyReport, RadiusReport


def test_command_config_defaults():
    cfg = CommandConfig(subcommand="analyze", q=3, d=2, e=2, target_r=2)
    assert cfg.seed == 7
    assert cfg.samples == 10_000
    assert cfg.max_elements == 5_000_000
    assert cfg.dense_threshold == 4096
    assert cfg.threads == 1
    assert cfg.selected_checks == ["spectra", "mixing", "color", "radius", "diameter"]


def test_command_config_selected_checks_keep_canonical_order():
    cfg = CommandConfig(subcommand="analyze", checks=["diameter", "spectra"])
    assert cfg.selected_checks == ["spectra", "diameter"]


@pytest.mark.parametrize("values", [
    {"q": 2},
    {"q": 4},
    {"q": 6},
    {"d": 1},
    {"e": 1},
    {"d": 3, "target_r": 2},
    {"samples": -1},
    {"threads": 0},
    {"checks": ["bogus"]},
    {"qs": [3, 8]},
])
def test_command_config_rejects(values):
    with pytest.raises(ParameterError):
        CommandConfig.resolve(subcommand="build", **values)


def test_check_report_render():
    report = CheckReport(title="demo")
    report.note("q", 3)
    assert report.check("eigen", True, 3.4641016151377544, 3.5, anchor="ramanujan")
    assert not report.check("count", False, 5, 4)
    text = report.render()
    assert text.splitlines()[0] == "# demo"
    assert "q = 3" in text
    assert "PASS eigen 3.46410161514 3.5 [ramanujan]" in text
    assert "FAIL count 5 4" in text
    assert text.rstrip().endswith("RESULT FAIL")
    assert not report.passed


def test_check_report_extend_prefixes_names():
    inner = CheckReport(title="inner")
    inner.check("x", True, Fraction(1, 18), Fraction(1, 9))
    inner.note("k", 4)
    outer = CheckReport(title="outer")
    outer.extend(inner)
    assert outer.lines[0].name == "inner.x"
    assert outer.notes["inner.k"] == "4"
    assert "PASS inner.x 1/18 1/9" in outer.render()
    assert outer.passed


def test_check_report_csv():
    report = CheckReport(title="t", csv_rows=[["index", "eigenvalue"], [0, 4.0], [1, -4.0]])
    assert report.render_csv() == "index,eigenvalue\n0,4\n1,-4\n"


def test_result_models():
    disc = DiscrepancyReport(mode="exhaustive", families=4, failures=0, max_disc=0.25, max_disc_exact="1/4",
                             worst_sizes=[1, 1], hypergraph_bound_at_worst=0.5)
    assert disc.passed
    assert disc.seed is None
    rad = RadiusReport(measured_radius=2, building_sizes=[1, 5, 17, 53], quotient_sizes=[1, 5, 17, 50],
                       order=720, displacement_from_radius=5)
    assert rad.radius_lower_bound is None
    assert rad.model_dump()["measured_radius"] == 2


if __name__ == "__main__":
    test_command_config_defaults()
    test_command_config_selected_checks_keep_canonical_order()
    test_check_report_render()
    test_check_report_extend_prefixes_names()
    test_check_report_csv()
    test_result_models()
    print("All Schema tests passed!")
