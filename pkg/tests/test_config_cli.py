import csv
import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leobuf import ConfigError, ConstellationConfig, GilbertElliottParams, PoissonArrivalParams, PolicyKind
from leobuf.cli import main
from leobuf.config import normalize_config_text, parse_config, serialize_config
from leobuf.sim import MeasureEpoch


def test_empty_text_gives_reference_defaults():
    cfg = parse_config("")
    assert cfg == ConstellationConfig()
    assert (cfg.L, cfg.arr.lam, cfg.ch.alpha, cfg.ch.beta, cfg.ch.c) == (10, 10.0, 0.7, 0.3, 16)


def test_comments_and_blank_lines():
    cfg = parse_config("# header\n\nalpha = 0.6   # inline\n  c=18\n")
    assert cfg.ch == GilbertElliottParams(0.6, 0.3, 18)


@pytest.mark.parametrize("text, key, line", [
    ("alpha=1.5", "alpha", 1),
    ("\nbeta=-0.2", "beta", 2),
    ("c=0", "c", 1),
    ("L=ten", "L", 1),
    ("tau=30,20", "tau", 1),
    ("policy=fancy", "policy", 1),
    ("bogus=1", "bogus", 1),
])
def test_errors_name_key_and_line(text, key, line):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.key == key
    assert info.value.line == line
    assert key in str(info.value)


def test_missing_equals_reports_line():
    with pytest.raises(ConfigError) as info:
        parse_config("alpha=0.5\njust words\n")
    assert info.value.line == 2


def test_cross_field_error():
    with pytest.raises(ConfigError) as info:
        parse_config("slots=100\nwarmup=100")
    assert info.value.key == "warmup"


configs = st.builds(
    lambda L, lam, a, b, c, pol, slots, warm, seed, taus, qmax, ep, init: ConstellationConfig(
        L=L, arr=PoissonArrivalParams(lam), ch=GilbertElliottParams(a, b, c), policy=pol,
        slots=slots + warm + 1, warmup_slots=warm, seed=seed, thresholds=tuple(sorted(set(taus))),
        q_max=qmax, measure_epoch=ep, initial_channel=init,
    ),
    st.integers(1, 50), st.floats(0, 100), st.floats(0.01, 1), st.floats(0, 1), st.integers(1, 64),
    st.sampled_from(list(PolicyKind)), st.integers(1, 10**7), st.integers(0, 10**5), st.integers(0, 2**64 - 1),
    st.lists(st.integers(0, 1000), min_size=1, max_size=8), st.none() | st.integers(1, 500),
    st.sampled_from(list(MeasureEpoch)), st.sampled_from(["stationary", "good", "bad"]),
)


@settings(max_examples=200, deadline=None)
@given(configs)
def test_round_trip(cfg):
    text = serialize_config(cfg)
    assert parse_config(text) == cfg
    assert normalize_config_text(text) == text


@settings(max_examples=100, deadline=None)
@given(configs, st.randoms(use_true_random=False))
def test_normalize_ignores_order_comments_and_spacing(cfg, rnd):
    lines = serialize_config(cfg).splitlines()
    rnd.shuffle(lines)
    messy = "\n".join(f"  {l.replace('=', ' = ')}   # note" for l in lines) + "\n\n# end\n"
    assert normalize_config_text(messy) == serialize_config(cfg)


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_analyze(capsys):
    code, out, _ = run_cli(["analyze", "--tau", "40", "259"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert float(rows[0]["theta_star"]) == pytest.approx(0.0356, abs=1e-3)
    assert rows[1]["required_buffer_no_isl"] == "259"
    assert rows[0]["required_buffer_virtual"] == "26"


def test_cli_sweep_csv_format(tmp_path, capsys, caplog):
    out = tmp_path / "c.csv"
    code, _, _ = run_cli(["sweep-c", "--values", "14,16", "--tau", "15", "30", "--slots", "3000",
                            "--warmup", "500", "--replications", "2", "--out", str(out)], capsys)
    assert code == 0
    assert "unstable" in caplog.text
    text = out.read_text()
    assert text.endswith("\n")
    lines = text.splitlines()
    assert lines[0] == "sweep_var,value,policy,tau,p_hat,ci,samples"
    rows = [r.split(",") for r in lines[1:]]
    assert len(rows) == 2 * 3 * 2
    assert [r[:4] for r in rows[:3]] == [["c", "14", "no-isl", "15"], ["c", "14", "no-isl", "30"], ["c", "14", "virtual", "15"]]
    unstable = [r for r in rows if r[1] == "14"]
    assert all(r[4] == "1.0" and r[6] == "0" for r in unstable)
    for r in rows:
        if r[1] == "16":
            assert 0.0 <= float(r[4]) <= 1.0 and float(r[5]) >= 0
            assert int(r[6]) == 2 * (3000 - 500) * 10
            assert repr(float(r[4])) == r[4]


def test_cli_is_deterministic(tmp_path, capsys):
    args = ["sweep-L", "--values", "2", "4", "--slots", "4000", "--warmup", "100", "--policy", "mqla"]
    _, a, _ = run_cli(args, capsys)
    _, b, _ = run_cli(args, capsys)
    assert a == b


def test_cli_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# test\nslots=3000\nwarmup=100\nL=3\nbeta=0.2\n", encoding="utf-8")
    code, out, _ = run_cli(["sweep-alpha", "--config", str(cfg), "--values", "0.5", "--L", "2",
                            "--policy", "no-isl", "--tau", "20"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]["samples"] == str((3000 - 100) * 2)


def test_cli_drop_mode(capsys):
    code, out, _ = run_cli(["sweep-beta", "--values", "0.3", "--qmax", "15", "--mode", "drop",
                            "--slots", "5000", "--warmup", "100"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert {r["tau"] for r in rows} == {"15"}
    assert len(rows) == 3


def test_cli_qmax_as_threshold(capsys):
    code, out, _ = run_cli(["sweep-c", "--values", "16", "--qmax", "30", "--slots", "3000", "--warmup", "10"], capsys)
    assert code == 0
    assert {r["tau"] for r in csv.DictReader(io.StringIO(out))} == {"30"}


def test_cli_errors(tmp_path, capsys):
    code, _, err = run_cli(["sweep-c", "--alpha", "1.5"], capsys)
    assert code == 2 and "alpha" in err
    code, _, err = run_cli(["analyze", "--config", str(tmp_path / "missing.cfg")], capsys)
    assert code == 3
    code, _, err = run_cli(["analyze", "--out", str(tmp_path / "no" / "dir.csv")], capsys)
    assert code == 3
    code, _, err = run_cli(["sweep-c", "--mode", "drop"], capsys)
    assert code == 2 and "qmax" in err


def test_cli_validate_passes(capsys):
    code, out, _ = run_cli(["validate", "--slots", "4000000", "--tau", "10", "30", "60"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0, out
    assert all(r["passed"] == "true" for r in rows)
    checks = {r["check"] for r in rows}
    assert {"qos_anchor", "buffer_anchor", "virtual_exponent", "oracle_vs_sim", "allocation_optimality"} <= checks


def test_cli_validate_fails_with_nonzero_exit(capsys):
    code, out, _ = run_cli(["validate", "--c", "14", "--slots", "3000", "--warmup", "100"], capsys)
    assert code == 1
    assert "false" in out
