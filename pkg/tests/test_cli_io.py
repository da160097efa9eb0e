import numpy as np
import pytest
from hypothesis import given, strategies as st

from thinfilm import cli, continuation, csvio
from thinfilm.config import RunConfig, parse_config
from thinfilm.errors import ConfigError


def test_parse_minimal_config():
    cfg = parse_config("g = 1\nk0 = 1")
    assert cfg == RunConfig()
    assert "M_star_k0 = 8\n" in cfg.echo()


def test_empty_config_gives_defaults():
    cfg = parse_config("")
    assert (cfg.g, cfg.k0) == (1.0, 1.0)
    assert cfg.resolved_M() == 8.0


def test_comments_and_blank_lines():
    cfg = parse_config("# header\n\nM = 7.5  # below onset\nN = 32\n")
    assert cfg.M == 7.5 and cfg.N == 32


@pytest.mark.parametrize("text,fragment", [
    ("g = -1", "line 1: g must be > 0"),
    ("\nfoo = 3", "line 2: unknown key 'foo'"),
    ("g = 1\ng = 2", "line 2: duplicate key 'g'"),
    ("N = many", "line 1: cannot parse"),
    ("just text", "line 1: expected 'key = value'"),
    ("tol = 1e-3", "line 1: tol must be in"),
    ("g = nan", "line 1: cannot parse"),
])
def test_config_errors(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config(text)


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 10.0))
def test_echo_round_trips(g, k0):
    cfg = RunConfig(g=g, k0=k0)
    lines = [l for l in cfg.echo().splitlines() if not l.startswith("M_star")]
    assert parse_config("\n".join(lines)) == cfg


@pytest.fixture(scope="module")
def short_record():
    return continuation.trace_branch(1.0, 1.0, max_steps=1)


def test_emit_branch_files(short_record, tmp_path):
    assert len(short_record) == 3
    csvio.emit_branch(short_record, tmp_path)
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["bifurcation_diagram.csv", "branch.csv", "profile_0.csv", "profile_1.csv",
                     "profile_2.csv"]
    raw = (tmp_path / "branch.csv").read_bytes()
    assert raw.startswith(b"s,M,K,min_h,max_h,l2_norm,h2_norm,flux_residual,leading_eig\n")
    assert b"\r" not in raw
    assert (tmp_path / "profile_1.csv").read_text().startswith("x,v,h\n")


def test_emit_empty_record_fails(tmp_path):
    with pytest.raises(ValueError):
        csvio.emit_branch(continuation.BranchRecord([]), tmp_path)


def test_branch_round_trip(short_record, tmp_path):
    csvio.emit_branch(short_record, tmp_path)
    back = csvio.read_branch(tmp_path)
    for name in csvio.BRANCH_COLUMNS:
        a, b = short_record.column(name), back.column(name)
        assert np.array_equal(a, b, equal_nan=True), name
    for orig, again in zip(short_record.points, back.points):
        _, data = csvio.read_profile(tmp_path / f"profile_{short_record.points.index(orig)}.csv")
        x, v = orig.profile.sample()
        assert np.array_equal(data[:, 0], x) and np.array_equal(data[:, 1], v)
        n = min(orig.profile.N, again.profile.N)
        assert np.max(np.abs(orig.profile.coeffs[:n] - again.profile.coeffs[:n])) < 1e-14


def test_diagram_sorted_by_s(short_record, tmp_path):
    shuffled = continuation.BranchRecord(short_record.points[::-1])
    csvio.emit_branch(shuffled, tmp_path)
    _, data = csvio.read_csv(tmp_path / "bifurcation_diagram.csv")
    assert np.array_equal(data[:, 0], short_record.column("M"))


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_format_is_exact(x):
    assert float(csvio.fmt(x)) == x


def run(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr()


def test_cli_solve_is_deterministic(tmp_path, capsys):
    outs = []
    for name in ("a", "b"):
        code, _ = run(["solve", "--M", "7.9", "--amplitude", "0.2", "--output-dir",
                       str(tmp_path / name)], capsys)
        assert code == 0
        outs.append({p.name: p.read_bytes() for p in (tmp_path / name).iterdir()})
    assert outs[0] == outs[1]
    assert set(outs[0]) == {"profile.csv", "config_resolved.txt"}


def test_cli_branch_is_deterministic(tmp_path, capsys):
    outs = []
    for name in ("a", "b"):
        code, _ = run(["continue-branch", "--max-steps", "4", "--output-dir",
                       str(tmp_path / name)], capsys)
        assert code == 0
        outs.append({p.name: p.read_bytes() for p in (tmp_path / name).iterdir()})
    assert outs[0] == outs[1]


def test_cli_config_file_and_echo(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("g = 1\nk0 = 1\n")
    code, cap = run(["fixed-points", "--config", str(cfg), "--output-dir", str(tmp_path)], capsys)
    assert code == 0 and "v_u" in cap.out
    echo = (tmp_path / "config_resolved.txt").read_text()
    assert "M_star_k0 = 8" in echo


def test_cli_exit_codes(tmp_path, capsys):
    out = ["--output-dir", str(tmp_path)]
    assert run(["fixed-points", "--g", "-1"] + out, capsys)[0] == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    code, cap = run(["fixed-points", "--config", str(bad)] + out, capsys)
    assert code == 2 and "line 1" in cap.err
    assert run(["fixed-points", "--config", str(tmp_path / "missing.cfg")] + out, capsys)[0] == 2
    assert run(["period", "--energy", "100"] + out, capsys)[0] == 1
    assert run(["solve", "--M", "7.9", "--amplitude", "1.5"] + out, capsys)[0] == 1


def test_output_dir_precedence(tmp_path, monkeypatch, capsys):
    env_dir, flag_dir = tmp_path / "env", tmp_path / "flag"
    monkeypatch.setenv(csvio.OUTPUT_DIR_ENV, str(env_dir))
    assert run(["spectrum", "--M", "8.5"], capsys)[0] == 0
    assert (env_dir / "spectrum.csv").exists()
    assert run(["spectrum", "--M", "8.5", "--output-dir", str(flag_dir)], capsys)[0] == 0
    assert (flag_dir / "spectrum.csv").exists()


def test_cli_spectrum_from_branch(tmp_path, capsys):
    assert run(["continue-branch", "--max-steps", "3", "--output-dir", str(tmp_path)], capsys)[0] == 0
    code, cap = run(["spectrum", "--branch-file", str(tmp_path / "branch.csv"), "--point-index",
                     "1", "--n-eigs", "4", "--output-dir", str(tmp_path / "spec")], capsys)
    assert code == 0
    header, data = csvio.read_csv(tmp_path / "spec" / "spectrum.csv")
    assert header == ["re", "im"] and data.shape == (4, 2)
    assert data[0, 0] > 0


def test_cli_evolve_and_amplitude(tmp_path, capsys):
    code, cap = run(["evolve", "--M", "8.5", "--t-end", "0.01", "--dt", "1e-3",
                     "--snapshot-every", "0.005", "--output-dir", str(tmp_path / "ev")], capsys)
    assert code == 0 and "steps = 10" in cap.out
    header, diag = csvio.read_csv(tmp_path / "ev" / "diagnostics.csv")
    assert header[0] == "t" and diag.shape[0] == 3
    code, cap = run(["amplitude", "--t-end", "0.02", "--dt", "1e-3", "--snapshot-every", "0.01",
                     "--grid", "64", "--no-compare", "--output-dir", str(tmp_path / "am")], capsys)
    assert code == 0 and "blow_up = False" in cap.out


def test_cli_verify_subset(capsys):
    code, cap = run(["verify", "--only", "1,3"], capsys)
    assert code == 0
    assert cap.out.count("[PASS]") == 2
