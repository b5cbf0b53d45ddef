import math

import pytest
from hypothesis import given, strategies as st

from cheese_lab.builder import LabeledHole, MCKISSICK
from cheese_lab.cli import main
from cheese_lab.config import ConfigError, RunConfig, parse_config
from cheese_lab.geometry import Disc
from cheese_lab.ledger import Ledger, LedgerRow, parse_ledger, read_ledger
from cheese_lab.plan_io import plan_from_text, plan_to_text, read_plan, write_plan

QUICK = """mode = "{mode}"
N = 12
s_min = 0.05
annihilation_count = 3
cole_samples = 10
cole_family_size = 4
truncations = [5, 10]
timing = false
"""


def test_minimal_config_defaults():
    cfg = parse_config('mode = "thm14"\n')
    assert cfg.tol == 1e-10 and cfg.s_min == 0.02 and cfg.pass_tol == 1e-8


@pytest.mark.parametrize("text,line", [
    ('mode = "thm14"\nrho_pairs = [[2.0, 1.0]]\n', 2),
    ('mode = "thm14"\n\nfoo = 1\n', 3),
    ('mode = "thm14"\ntol = -1.0\n', 2),
])
def test_bad_configs_are_line_anchored(text, line):
    with pytest.raises(ConfigError, match=f"cfg.toml:{line}:"):
        parse_config(text, "cfg.toml")


def test_missing_mode_rejected():
    with pytest.raises(ConfigError, match="mode"):
        parse_config("N = 3\n")


def test_syntax_error_reports_position():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config('mode = "thm14"\nN = = 3\n')


def test_plan_text_round_trip(plan14, plan15):
    for plan in (plan14, plan15):
        text = plan_to_text(plan)
        back = plan_from_text(text)
        assert back.holes == plan.holes and back.families == plan.families
        assert back.lambda_set == plan.lambda_set and back.gammas == plan.gammas
        assert plan_to_text(back) == text
    assert "[lambda]" in plan_to_text(plan15) and "[lambda]" not in plan_to_text(plan14)


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)
rows = st.builds(
    lambda i, s, e, o, res, tol, ms: LedgerRow(f"t{i}", s, f"n={i};x=a,b", e, o, abs(res),
                                               abs(tol), abs(res) <= abs(tol), ms),
    st.integers(0, 99), st.sampled_from(["a", "b,c", 'q"x']), st.complex_numbers(allow_nan=False, allow_infinity=False),
    st.complex_numbers(allow_nan=False, allow_infinity=False), finite, finite, st.integers(0, 10 ** 6))


@given(st.lists(rows, max_size=8))
def test_ledger_round_trip(rs):
    led = Ledger(list(rs))
    assert parse_ledger(led.to_csv()).rows == led.rows


def test_ledger_pass_flag_consistency():
    with pytest.raises(ValueError):
        LedgerRow("t", "s", "", 0, 0, 1.0, 0.5, True)
    led = Ledger()
    row = led.add("t", "s", "", 0, 0, 1.0, 0.5, passed=True)
    assert not row.passed


def _cfg(tmp_path, mode="thm14", extra=""):
    p = tmp_path / f"{mode}.toml"
    p.write_text(QUICK.format(mode=mode) + extra)
    return p


def test_build_is_byte_identical(tmp_path):
    cfg = _cfg(tmp_path)
    assert main(["build", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert main(["build", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
    for name in ("plan.toml", "plan.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    text = (tmp_path / "a" / "plan.toml").read_text()
    assert "radius_sum" in text
    assert read_plan(tmp_path / "a" / "plan.toml").radius_sum < 1


def test_build_thm15_includes_lambda(tmp_path):
    assert main(["build", "--config", str(_cfg(tmp_path, "thm15")), "--out", str(tmp_path)]) == 0
    assert "[[lambda.arc]]" in (tmp_path / "plan.toml").read_text()


@pytest.mark.parametrize("mode", ["thm14", "thm15"])
def test_verify_pipelines_and_report(tmp_path, mode):
    cfg = _cfg(tmp_path, mode)
    out = tmp_path / "out"
    assert main(["build", "--config", str(cfg), "--out", str(out)]) == 0
    assert main(["verify-ideals", "--config", str(cfg), "--plan", str(out / "plan.toml"), "--out", str(out)]) == 0
    assert main(["verify-cole", "--config", str(cfg), "--out", str(out)]) == 0
    led = read_ledger(out / "ideals.csv")
    sep = [r for r in led.rows if r.test_id.startswith("separation/rho=(0.0,1.0)")]
    assert sep and all(r.passed for r in sep)
    if mode == "thm14":
        assert sep[0].expected == pytest.approx(4j * math.pi * math.exp(-1))
    cole_rows = {r.test_id: r for r in read_ledger(out / "cole.csv").rows}
    assert cole_rows["cole/T-pistar-identity"].residual == 0
    assert cole_rows["cole/fiber-over-hull"].observed == 1
    assert main(["report", str(out / "ideals.csv"), str(out / "cole.csv"), "--out", str(out)]) == 0
    summary = (out / "summary.md").read_text()
    assert "separation" in summary and "cole-sqrt" in summary
    assert (out / "convergence.svg").exists()


def test_ledgers_reproducible_without_timing(tmp_path):
    cfg = _cfg(tmp_path)
    for d in ("a", "b"):
        assert main(["verify-ideals", "--config", str(cfg), "--out", str(tmp_path / d)]) == 0
    assert (tmp_path / "a" / "ideals.csv").read_bytes() == (tmp_path / "b" / "ideals.csv").read_bytes()


def test_sabotaged_plan_fails_with_winding_row(tmp_path, plan14):
    bad = plan_from_text(plan_to_text(plan14))
    bad.holes.insert(0, LabeledHole(Disc(1.0, 0.01), MCKISSICK, 0, 1))
    write_plan(bad, tmp_path / "bad.toml")
    cfg = _cfg(tmp_path)
    assert main(["verify-ideals", "--config", str(cfg), "--plan", str(tmp_path / "bad.toml"),
                 "--out", str(tmp_path)]) == 1
    rows = read_ledger(tmp_path / "ideals.csv").rows
    assert any(r.suite == "winding" and not r.passed for r in rows)


def test_exit_codes_for_bad_input(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text('mode = "thm14"\nunknown = 1\n')
    assert main(["build", "--config", str(bad)]) == 2
    assert main(["build", "--config", str(tmp_path / "missing.toml")]) == 2
    assert main(["build"]) == 2
    assert main(["report"]) == 2
    assert main(["report", str(tmp_path / "nope.csv")]) == 2
    assert main(["nonsense"]) == 2


def test_failed_report_exits_one(tmp_path):
    led = Ledger()
    led.add("x", "s", "", 0, 1, 1.0, 0.1)
    led.write(tmp_path / "f.csv")
    assert main(["report", str(tmp_path / "f.csv"), "--out", str(tmp_path)]) == 1


def test_tol_and_seed_overrides(tmp_path):
    cfg = RunConfig(mode="thm14").with_overrides(pass_tol=1e-6, seed=3, out=None)
    assert cfg.pass_tol == 1e-6 and cfg.seed == 3 and cfg.out == "out"
