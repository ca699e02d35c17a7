import io
import json

import pytest

from bbap import cli
from bbap.io import (FormatError, dumps_instance, dumps_solution, export_compact_lp, instance_digest,
                     loads_instance, loads_solution)
from bbap.model import check_solution
from bbap.oracle import oracle_solve
from bbap.profits import TableProfit
from bbap.report import read_records, summarize

from conftest import make_instance, small_instance


def _same(a, b):
    assert a.flights == b.flights and a.belts == b.belts and a.t_max == b.t_max
    assert a.durations == b.durations
    for (i, j), (ws, mat) in a.profit_rows.items():
        assert [b.p(i, j, t, w) for w in ws for t in range(a.t_max)] == \
               [a.p(i, j, t, w) for w in ws for t in range(a.t_max)]


@pytest.mark.parametrize("seed", range(5))
def test_round_trip_generated(seed):
    inst = small_instance(seed)
    text = dumps_instance(inst)
    back = loads_instance(text)
    _same(inst, back)
    assert dumps_instance(back) == text
    assert '"rule"' in text


def test_round_trip_table_and_explicit_durations():
    table = {(0, j, t, w): 3 * j + t - w for j in range(2) for t in range(12) for w in (2, 3)}
    inst = make_instance([(10, 0), (20, 1)], 12, durations={(0, 0): (2, [2, 3]), (0, 1): (3, [2, 3])},
                         profit=TableProfit(table))
    text = dumps_instance(inst)
    assert '"explicit"' in text and '"table"' in text
    _same(inst, loads_instance(text))


def test_round_trip_dual_station():
    inst = make_instance([(120, 0), (80, 2)], 40, belts=[(10, None, 100), (12, {1})])
    back = loads_instance(dumps_instance(inst))
    _same(inst, back)
    assert back.belts[0].dual_station_threshold == 100 and back.belts[1].compatible_flights == {1}


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(extra=1),
    lambda d: d["flights"][0].update(color="red"),
    lambda d: d.update(format_version=99),
    lambda d: d["profit"].update(table=[]),
    lambda d: d.update(durations={"rule": "other"}),
    lambda d: d.pop("t_max"),
])
def test_malformed_instances_rejected(tiny, mutate):
    doc = json.loads(dumps_instance(tiny))
    mutate(doc)
    with pytest.raises(FormatError):
        loads_instance(json.dumps(doc))
    with pytest.raises(FormatError):
        loads_instance("{not json")


def test_solution_round_trip(tiny):
    sol, obj = oracle_solve(make_instance([(100, 0), (95, 5)], 30))
    inst = make_instance([(100, 0), (95, 5)], 30)
    text = dumps_solution(inst, sol, dict(ub=float(obj), gap_percent=0.0, proven_optimal=True))
    back, digest, meta = loads_solution(text)
    assert back == sol and digest == instance_digest(inst) and meta["proven_optimal"]
    assert digest != instance_digest(tiny)


def _lp_text(inst):
    buf = io.StringIO()
    export_compact_lp(inst, buf)
    return buf.getvalue()


def test_export_single_variable():
    inst = make_instance([(10, 0)], 1, durations={(0, 0): (1, [1])})
    text = _lp_text(inst)
    assert text.count("x_0_0_0_1") == 3       # objective, assign row, binaries
    assert "assign_0" in text and "prec_" not in text


def test_export_pairwise_rows_per_belt():
    inst = make_instance([(10, 0), (10, 0)], 10, belts=[(10, None)] * 3)
    text = _lp_text(inst)
    assert sum(line.lstrip().startswith("prec_") for line in text.splitlines()) == 3
    assert text == _lp_text(inst)


def test_export_is_byte_deterministic():
    a = _lp_text(small_instance(3))
    b = _lp_text(loads_instance(dumps_instance(small_instance(3))))
    assert a == b and a.endswith("End\n")


# ------------------------------------------------------------------ CLI

def test_cli_generate_is_reproducible(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["generate", "--flights", "6", "--belts", "2", "--tmax", "30", "--seed", "5"]
    assert cli.main(args + ["--out", str(a)]) == 0
    assert cli.main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.fixture
def inst_file(tmp_path):
    p = tmp_path / "inst.json"
    p.write_text(dumps_instance(small_instance(11)))
    return p


def test_cli_solve_then_verify(tmp_path, inst_file, capsys):
    sol = tmp_path / "sol.json"
    png = tmp_path / "gantt.png"
    assert cli.main(["solve", str(inst_file), "--out", str(sol), "--plot", str(png)]) == 0
    assert png.stat().st_size > 0
    assert cli.main(["verify", str(inst_file), str(sol)]) == 0
    assert "feasible" in capsys.readouterr().out


def test_cli_verify_rejects_tampering(tmp_path, inst_file):
    sol = tmp_path / "sol.json"
    cli.main(["solve", str(inst_file), "--out", str(sol)])
    doc = json.loads(sol.read_text())
    doc["objective"] += 1
    sol.write_text(json.dumps(doc))
    assert cli.main(["verify", str(inst_file), str(sol)]) == 1
    doc["objective"] -= 1
    doc["instance_digest"] = "0" * 64
    sol.write_text(json.dumps(doc))
    assert cli.main(["verify", str(inst_file), str(sol)]) == 1


def test_cli_malformed_input(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2")
    assert cli.main(["solve", str(bad)]) == 3
    assert cli.main(["oracle", str(tmp_path / "missing.json")]) == 3


def test_cli_oracle_limit(tmp_path):
    big = tmp_path / "big.json"
    assert cli.main(["generate", "--flights", "12", "--belts", "2", "--seed", "1", "--out", str(big)]) == 0
    assert cli.main(["oracle", str(big)]) == 4


def test_cli_oracle_agrees_with_solve(inst_file, capsys):
    assert cli.main(["oracle", str(inst_file)]) == 0
    obj = int(capsys.readouterr().out.split()[1])
    assert cli.main(["solve", str(inst_file)]) == 0
    assert f"objective {obj}\t" in capsys.readouterr().out


def test_cli_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.main(["solve"])
    assert exc.value.code == 2


def test_cli_unwritable_output(inst_file):
    assert cli.main(["export", str(inst_file), "--out", "/nonexistent-dir/x.lp"]) == 5


def test_cli_bench_summary_recomputes(tmp_path, capsys, monkeypatch):
    monkeypatch.setitem(cli.FAMILIES, "tiny", dict(n=6, m=2, t_max=30))
    rc = cli.main(["bench", "--family", "tiny", "--seeds", "2", "--time-limit", "5", "--out-dir", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    recs = read_records((tmp_path / "records.tsv").read_text())
    assert len(recs) == 2
    assert summarize(recs).row() in out
    assert (tmp_path / "bench.png").stat().st_size > 0
