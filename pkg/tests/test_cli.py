import json

import pytest

from hypcert import cli
from tests.conftest import BAD_LINK_TEXT, S3_TEXT, data_path


def run_cli(capsys, *argv):
    try:
        code = cli.main(list(argv))
    except SystemExit as exc:
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_fixture(capsys):
    code, out, _ = run_cli(capsys, "check", str(data_path("dodec27a.tri")))
    assert code == 0
    assert "OK" in out
    assert "tetrahedra: 27" in out


def test_check_malformed_permutation(tmp_path, capsys):
    f = tmp_path / "bad.tri"
    f.write_text("tets 1\ntet 0: 0:1022 0:1023 0:1023 0:1023\n")
    code, _, err = run_cli(capsys, "check", str(f))
    assert code == 1
    assert "permutation" in err


def test_check_bad_link(tmp_path, capsys):
    f = tmp_path / "badlink.tri"
    f.write_text(BAD_LINK_TEXT)
    code, _, err = run_cli(capsys, "check", str(f))
    assert code == 1
    assert "Euler characteristic" in err


def test_check_missing_file(capsys):
    code, _, err = run_cli(capsys, "check", "/nonexistent/foo.tri")
    assert code == 1


def test_solve_fixture(tmp_path, capsys):
    out_file = tmp_path / "solved.tri"
    code, out, err = run_cli(
        capsys, "solve", str(data_path("dodec27a.tri")), "-o", str(out_file)
    )
    assert code == 0
    assert "residual" in out
    text = out_file.read_text()
    assert "lengths:" in text
    resid = float(out.split("residual")[1].split(";")[0])
    assert resid < 1e-9


def test_solve_s3_unsolved(tmp_path, capsys):
    f = tmp_path / "s3.tri"
    f.write_text(S3_TEXT + "lengths:\n" + " ".join(["1.0"] * 6) + "\n")
    code, _, err = run_cli(capsys, "solve", str(f))
    assert code == 2
    assert "unsolved" in err


def test_certify_fixture_verified(tmp_path, capsys):
    out_file = tmp_path / "cert.json"
    code, _, err = run_cli(
        capsys, "certify", str(data_path("dodec27a.tri")), "-o", str(out_file)
    )
    assert code == 0
    assert "VERIFIED" in err
    doc = json.loads(out_file.read_text())
    assert doc["status"] == "VERIFIED"
    assert "timings_seconds" not in doc


def test_certify_perturbed_fails_step_two(tmp_path, capsys, dodec27a):
    from hypcert.triangulation import serialize

    pert = [float(l) + 0.5 for l in dodec27a.lengths]
    f = tmp_path / "pert.tri"
    f.write_text(serialize(dodec27a, lengths=pert))
    code, out, err = run_cli(capsys, "certify", str(f))
    assert code == 2
    assert "step 2" in err
    doc = json.loads(out)
    assert doc["status"] == "FAILED"
    assert doc["failed_step"] == 2


def test_certify_s3_never_exit_zero(tmp_path, capsys):
    f = tmp_path / "s3.tri"
    f.write_text(S3_TEXT)
    code, _, err = run_cli(capsys, "certify", str(f))
    assert code == 2


def test_certify_without_lengths_graceful(tmp_path, capsys, dodec27a):
    # no lengths section: the bootstrap must find a candidate on its own;
    # whether or not it does, the command ends cleanly
    from hypcert.triangulation import serialize

    text = serialize(dodec27a, lengths=())
    f = tmp_path / "bare.tri"
    f.write_text(text.rsplit("lengths:", 1)[0])
    code, out, err = run_cli(capsys, "certify", str(f))
    assert code in (0, 2)
    doc = json.loads(out)
    assert doc["status"] in ("VERIFIED", "FAILED")


def test_certify_interval_newton_flag(tmp_path, capsys):
    out_file = tmp_path / "cert.json"
    code, _, _ = run_cli(
        capsys,
        "certify",
        str(data_path("dodec27a.tri")),
        "--interval-newton",
        "-o",
        str(out_file),
    )
    assert code == 0
    assert json.loads(out_file.read_text())["method"] == "newton"


def test_certify_timings_flag(tmp_path, capsys):
    out_file = tmp_path / "cert.json"
    code, _, _ = run_cli(
        capsys,
        "certify",
        str(data_path("dodec27a.tri")),
        "--timings",
        "-o",
        str(out_file),
    )
    assert code == 0
    assert "timings_seconds" in json.loads(out_file.read_text())


def test_recheck_command(tmp_path, capsys):
    out_file = tmp_path / "cert.json"
    run_cli(capsys, "certify", str(data_path("dodec27a.tri")), "-o", str(out_file))
    code, out, _ = run_cli(
        capsys, "recheck", str(data_path("dodec27a.tri")), str(out_file)
    )
    assert code == 0
    assert "reverified" in out


def test_probe_gimbal_row_count(capsys):
    code, out, _ = run_cli(
        capsys,
        "probe-gimbal",
        str(data_path("dodec27a.tri")),
        "--budget",
        "40",
        "--seed",
        "1",
    )
    assert code == 0
    lines = [l for l in out.splitlines() if l and not l.startswith("#")]
    assert len(lines) == 40
    for line in lines:
        cols = line.split()
        assert len(cols) == 3
        assert float(cols[1]) >= 0.0
        assert cols[2] in ("LOCKED", "ok")


def test_probe_gimbal_needs_lengths(tmp_path, capsys):
    f = tmp_path / "s3.tri"
    f.write_text(S3_TEXT)
    code, _, err = run_cli(capsys, "probe-gimbal", str(f))
    assert code == 1
