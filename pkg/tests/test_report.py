import json
import math

from nodal_lab.bounds import BoundCheckReport, ScalingFit
from nodal_lab.report import ClaimResult, Report, fmt, rows_csv


def checks(ok=True):
    return [BoundCheckReport("X", 2.0, 1.0, 3.0, "explicit"),
            BoundCheckReport("X", 5.0, 4.0 if ok else 6.0, 5.0, "explicit")]


def test_fmt():
    assert fmt(0.1 + 0.2) == "0.3"
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(True) == "true"
    assert fmt(None) == ""
    assert fmt(7) == "7"


def test_verdicts():
    assert ClaimResult.from_checks("A", checks()).verdict == "pass"
    assert ClaimResult.from_checks("A", checks(False)).verdict == "fail"
    assert ClaimResult.from_checks("A", checks(False), asserted=False).verdict == "reported"
    good = ClaimResult.from_checks("A", checks())
    reported = ClaimResult.from_checks("B", checks(False), asserted=False)
    assert Report({}, [good, reported]).ok
    assert not Report({}, [good, ClaimResult.from_checks("C", checks(False))]).ok


def test_json_round_trip_and_infinity():
    fit = ScalingFit.fit([1.0, 2.0, 4.0, 8.0, 16.0], [1.0, 2.0, 4.0, 8.0, 16.0])
    c = ClaimResult.from_checks("A", checks(), fit, notes={"big": math.inf, "p": 2.0})
    r = Report({"started": "2020-01-01T00:00:00+00:00"}, [c])
    text = r.to_json()
    assert "Infinity" not in text
    assert json.loads(text)["claims"][0]["notes"]["big"] is None
    back = Report.from_json(text)
    assert back.meta == r.meta
    assert [x.to_dict() for x in back.claims] == [json.loads(json.dumps(x.to_dict()))
                                                  for x in r.claims]
    assert back.to_json() == text


def test_write_csv(tmp_path):
    c = ClaimResult.from_checks("A", checks())
    written = Report({}, [c]).write(tmp_path)
    assert [p.name for p in written] == ["report.json", "A.csv"]
    raw = (tmp_path / "A.csv").read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "claim,lambda,lhs,rhs,margin,pass"
    assert lines[1] == "X,2,1,3,2,true"


def test_rows_csv_empty():
    assert rows_csv([]) == "claim,lambda,lhs,rhs,margin,pass\n"
