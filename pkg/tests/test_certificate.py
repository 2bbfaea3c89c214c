import json
from fractions import Fraction

import pytest

from hypcert import certificate as cert
from hypcert import verify
from hypcert.interval import kernel_for_precision


def test_certificate_round_trip(dodec27a, verified27a):
    text = cert.certificate_json(dodec27a, verified27a, "krawczyk")
    doc = cert.parse_certificate(text)
    assert doc["status"] == "VERIFIED"
    assert doc["tetrahedra"] == 27
    assert doc["vertices"] == 1
    assert len(doc["nu"]) == dodec27a.m
    assert len(doc["theta"]) == dodec27a.m
    assert len(doc["gimbal_loops"]) == dodec27a.o
    ok, detail = cert.recheck(dodec27a, doc)
    assert ok, detail


def test_certificate_serialization_outward(dodec27a, verified27a):
    doc = cert.certificate_dict(dodec27a, verified27a, "krawczyk")
    for pair, iv in zip(doc["nu"], verified27a.box.nu):
        assert Fraction(pair[0]) <= Fraction(iv.lo)
        assert Fraction(iv.hi) <= Fraction(pair[1])


def test_certificate_reparse_exact_for_floats(dodec27a, verified27a):
    doc = cert.certificate_dict(dodec27a, verified27a, "krawczyk")
    kernel = kernel_for_precision(53)
    for pair, iv in zip(doc["nu"], verified27a.box.nu):
        back = cert._parse_interval(pair, kernel)
        assert back.lo == iv.lo and back.hi == iv.hi


def test_certificate_deterministic(dodec27a):
    r1 = verify.run_pipeline(dodec27a)
    r2 = verify.run_pipeline(dodec27a)
    t1 = cert.certificate_json(dodec27a, r1, "krawczyk")
    t2 = cert.certificate_json(dodec27a, r2, "krawczyk")
    assert t1 == t2


def test_certificate_hash_binds_triangulation(dodec27a, dodec27b, verified27a):
    doc = cert.certificate_dict(dodec27a, verified27a, "krawczyk")
    ok, detail = cert.recheck(dodec27b, doc)
    assert not ok
    assert "hash" in detail


def test_failed_run_certificate(dodec27a):
    pert = [float(l) + 0.5 for l in dodec27a.lengths]
    res = verify.run_pipeline(dodec27a, lengths=pert)
    doc = cert.certificate_dict(dodec27a, res, "krawczyk")
    assert doc["status"] == "FAILED"
    assert doc["failed_step"] == 2
    assert "nu" not in doc
    ok, _ = cert.recheck(dodec27a, doc)
    assert not ok


def test_mp_certificate_roundtrip(dodec27a):
    res = verify.run_pipeline(dodec27a, precision=80)
    assert res.verified
    text = cert.certificate_json(dodec27a, res, "krawczyk")
    doc = cert.parse_certificate(text)
    assert doc["precision_bits"] == 80
    for pair, iv in zip(doc["nu"], res.box.nu):
        lo_f = Fraction(*__import__("mpmath").libmp.to_rational(iv.lo))
        hi_f = Fraction(*__import__("mpmath").libmp.to_rational(iv.hi))
        assert Fraction(pair[0]) <= lo_f
        assert hi_f <= Fraction(pair[1])
    ok, detail = cert.recheck(dodec27a, doc)
    assert ok, detail


def test_malformed_certificate_rejected():
    with pytest.raises(cert.CertificateError):
        cert.parse_certificate("not json at all")
    with pytest.raises(cert.CertificateError):
        cert.parse_certificate(json.dumps({"format": "something-else"}))
