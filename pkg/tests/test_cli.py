import csv
import io

import numpy as np
import pytest

from dursma import cli


def _run(argv, tmp_path, name="out.csv"):
    out = tmp_path / name
    code = cli.run(list(argv) + ["--out", str(out)])
    return code, out.read_text() if out.exists() else ""


def _rows(text):
    body = "\n".join(line for line in text.splitlines() if not line.startswith("#"))
    return list(csv.reader(io.StringIO(body)))


def test_parse_snr_db_sets_both():
    rc = cli.parse_config("snr_db=75\n")
    cfg = rc.system()
    np.testing.assert_allclose([cfg.snr_a, cfg.snr_b], [10 ** 7.5] * 2, rtol=1e-15)


def test_parse_comments_and_override_order():
    rc = cli.parse_config("alpha=0.2  # first\n# alpha=0.9\nalpha=0.3\n")
    assert rc["alpha"] == 0.3


@pytest.mark.parametrize("text, key, where", [
    ("alpha=1.2", "alpha", "line 1"),
    ("d_ia=5\nfoo=1", "foo", "line 2"),
    ("d_ia=5\n\nd_ib=abc", "d_ib", "line 3"),
    ("samples=2.5", "samples", "line 1"),
    ("rate_a=0", "rate_a", "line 1"),
    ("snr_grid=", "snr_grid", "line 1"),
])
def test_parse_errors_name_key_and_line(text, key, where):
    with pytest.raises(cli.ConfigError) as exc:
        cli.parse_config(text)
    assert exc.value.key == key
    assert where in str(exc.value) and key in str(exc.value)


def test_missing_equals_sign():
    with pytest.raises(cli.ConfigError, match="line 1"):
        cli.parse_config("alpha 0.3")


def test_fig3_preset_geometry():
    rc = cli.preset("fig3")
    assert (rc["d_ia"], rc["d_ib"], rc["d_ja"], rc["d_jb"]) == (5, 15, 17, 8)
    assert rc["pathloss_c"] == 1e-3 and rc["pathloss_n"] == 2.5


@pytest.mark.parametrize("name", sorted(cli.PRESETS))
def test_echo_round_trip(name):
    rc = cli.preset(name)
    again = cli.config_from_header(rc.echo())
    assert again.values == rc.values


def test_partial_fixed_channel_rejected(tmp_path):
    code, _ = _run(["region", "--set", "g_ia=1.0"], tmp_path)
    assert code == cli.EXIT_CONFIG


def test_config_error_exit_codes(tmp_path, capsys):
    assert _run(["region", "--set", "alpha=1.2"], tmp_path)[0] == 2
    assert "alpha" in capsys.readouterr().err
    bad = tmp_path / "bad.cfg"
    bad.write_text("d_ia=5\nbogus=1\n")
    assert _run(["region", "--config", str(bad)], tmp_path)[0] == 2
    assert "line 2" in capsys.readouterr().err
    assert _run(["region", "--preset", "nope"], tmp_path)[0] == 2
    assert _run(["validate", "--grid", "huge"], tmp_path)[0] == 2


def test_region_fig2_output(tmp_path):
    code, text = _run(["region", "--preset", "fig2"], tmp_path)
    assert code == 0
    rows = _rows(text)
    assert rows[0] == list(cli.REGION_COLUMNS)
    schemes = {r[3] for r in rows[1:]}
    assert schemes == {"DU-RSMA", "RRH-i", "RRH-j", "DU-NOMA-TS"}
    assert "# FF2 DU-RSMA=" in text and "# FF0 DU-NOMA-TS=" in text
    assert cli.config_from_header(text).values == cli.preset("fig2").values


def test_fill_factor_fixed_channel(tmp_path):
    code, text = _run(["fill-factor", "--preset", "fig2", "--grid", "201"], tmp_path)
    assert code == 0
    rows = _rows(text)
    assert rows[0] == ["scheme", "q", "ff", "r_a", "r_b"]
    assert len(rows) == 1 + 4 * 3


def test_ergodic_sweep_schema(tmp_path):
    code, text = _run(["ergodic-sweep", "--preset", "fig3", "--samples", "20000",
                       "--set", "snr_grid=60,80"], tmp_path)
    assert code == 0
    rows = _rows(text)
    assert rows[0] == list(cli.ERGODIC_COLUMNS)
    assert [r[0] for r in rows[1:]] == ["60.0", "80.0"]


def test_outage_sweep_schema_and_rates(tmp_path):
    code, text = _run(["outage-sweep", "--preset", "fig6", "--rates", "1,2", "--samples", "20000",
                       "--set", "snr_grid=60,70"], tmp_path)
    assert code == 0
    rows = _rows(text)
    assert rows[0][:7] == ["snr_db", "op_a_analytic", "op_b_analytic", "op_a_mc", "op_b_mc", "se_a", "se_b"]
    assert len(rows) == 1 + 2 * 2 * 2
    assert {r[7] for r in rows[1:]} == {"DU-RSMA", "DU-NOMA"}
    assert {r[8] for r in rows[1:]} == {"1.0", "2.0"}


def test_outage_sweep_over_alpha(tmp_path):
    code, text = _run(["outage-sweep", "--preset", "fig5", "--samples", "20000",
                       "--set", "alpha_sweep=0.2,0.4", "--set", "snr_grid=70"], tmp_path)
    assert code == 0
    rows = _rows(text)
    assert rows[0][0] == "alpha" and rows[0][-1] == "snr_db"


def test_outputs_are_byte_identical(tmp_path):
    argv = ["outage-sweep", "--preset", "fig5", "--samples", "30000", "--set", "alpha_sweep=0.3"]
    a = _run(argv, tmp_path, "a.csv")[1]
    b = _run(argv, tmp_path, "b.csv")[1]
    assert a == b


def test_validate_small_passes_and_is_worker_independent(tmp_path, monkeypatch):
    texts = []
    for w in ("1", "4", "8"):
        monkeypatch.setenv("DU_RSMA_THREADS", w)
        code, text = _run(["validate", "--grid", "small", "--samples", "200000"], tmp_path, "v%s.csv" % w)
        assert code == 0
        texts.append(text)
    assert texts[0] == texts[1] == texts[2]
    rows = _rows(texts[0])
    assert rows[0] == list(cli.VALIDATE_COLUMNS)
    assert all(r[6] == "yes" for r in rows[1:])


def test_validate_failure_exit_code(tmp_path, monkeypatch):
    # a deliberately wrong analytic value must trip the 4-SE gate
    real = cli.op_analytic.outage_a
    monkeypatch.setattr(cli.op_analytic, "outage_a", lambda ctx: min(1.0, real(ctx) + 0.05))
    code, text = _run(["validate", "--preset", "fig5", "--samples", "100000"], tmp_path)
    assert code == cli.EXIT_VALIDATION
    assert any(r[1] == "op_a" and r[6] == "no" for r in _rows(text)[1:])


def test_stdout_when_no_out(capsys):
    assert cli.run(["region", "--preset", "fig2", "--grid", "11"]) == 0
    assert capsys.readouterr().out.startswith("# subcommand=region\n")
