import pathlib

import pytest

from hypcert import verify
from hypcert.triangulation import parse, parse_file

DATA = pathlib.Path(__file__).resolve().parent.parent / "src" / "hypcert" / "data"

HYPERBOLIC_FIXTURES = ("dodec27a.tri", "dodec27b.tri", "dodec30x2.tri")

S3_TEXT = """tets 2
tet 0: 1:1023 1:1023 1:1023 1:1023
tet 1: 0:1023 0:1023 0:1023 0:1023
"""

# a closed oriented gluing whose vertex link is a genus-2 surface
BAD_LINK_TEXT = """tets 2
tet 0: 1:1302 0:1230 0:3012 1:1230
tet 1: 0:3012 0:2031 1:2031 1:1302
"""


def data_path(name):
    return DATA / name


@pytest.fixture(scope="session")
def s3():
    return parse(S3_TEXT)


@pytest.fixture(scope="session")
def dodec27a():
    return parse_file(DATA / "dodec27a.tri")


@pytest.fixture(scope="session")
def dodec27b():
    return parse_file(DATA / "dodec27b.tri")


@pytest.fixture(scope="session")
def dodec30x2():
    return parse_file(DATA / "dodec30x2.tri")


@pytest.fixture(scope="session")
def hyperbolic_triangulations(dodec27a, dodec27b, dodec30x2):
    return {
        "dodec27a": dodec27a,
        "dodec27b": dodec27b,
        "dodec30x2": dodec30x2,
    }


@pytest.fixture(scope="session")
def verified27a(dodec27a):
    result = verify.run_pipeline(dodec27a)
    assert result.verified
    return result


@pytest.fixture(scope="session")
def verified_all(hyperbolic_triangulations):
    out = {}
    for name, tri in hyperbolic_triangulations.items():
        result = verify.run_pipeline(tri)
        assert result.verified, (name, result.statuses)
        out[name] = result
    return out
