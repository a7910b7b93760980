"""Acceptance suite: one or more tests per criterion, summarized at the end of the run.

Each test carries ``@pytest.mark.criterion(number, title)``; the conftest hook
prints a ``[PASS]``/``[FAIL]`` line per criterion in the terminal summary.
"""

import json
import time

import numpy as np
import pytest

from conftest import make_seq, make_track
from oracles import oracle_clear_mot, oracle_hota, oracle_idf1, random_instance
from trackcount.assignment import assignment_total, exhaustive_assignment, solve_assignment
from trackcount.cli import main
from trackcount.counting import count_tracks, counting_errors
from trackcount.metrics import bootstrap_summary, clear_mot, hota, idf1
from trackcount.motio import parse_mot_text, write_mot_file
from trackcount.refine import HeuristicConfig, apply_h1, merge_tracks, refine_pipeline
from trackcount.report import REPORT_SCHEMA
from trackcount.simulate import PRESETS, generate_scene, preset_scenario, simulate

criterion = pytest.mark.criterion
SEEDS = range(5)
_START = {}


@pytest.fixture(scope="module", autouse=True)
def _suite_clock():
    _START["t"] = time.perf_counter()
    yield


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


# 1 ------------------------------------------------------------------------

@criterion(1, "assignment solver matches exhaustive enumeration (500 matrices up to 7x7, < 10 s)")
def test_assignment_oracle():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    n = 0
    for _ in range(500):
        rows, cols = (int(x) for x in rng.integers(1, 8, 2))
        # Small integer ranges give many ties; totals of integers are exact.
        high = int(rng.choice([3, 10, 1000]))
        c = rng.integers(-high, high + 1, (rows, cols)).astype(float)
        mode = "maximize" if rng.random() < 0.3 else "minimize"
        got = solve_assignment(c, mode)
        want = exhaustive_assignment(c, mode)
        assert len(got) == min(rows, cols)
        assert len({r for r, _ in got}) == len({k for _, k in got}) == len(got)
        assert assignment_total(c, got) == assignment_total(c, want)
        assert got == want
        n += 1
    assert n >= 500
    assert time.perf_counter() - start < 10.0


# 2 ------------------------------------------------------------------------

@criterion(2, "MOTA/IDF1/HOTA/DetA/AssA match brute-force oracles on 300 micro-instances (1e-9, < 30 s)")
def test_metric_oracles():
    rng = np.random.default_rng(77)
    start = time.perf_counter()
    checked = 0
    while checked < 300:
        gt, pred = random_instance(rng, max_ids=3, max_frames=5)
        if gt.num_detections() == 0:
            continue
        assert len(gt.tracks) <= 3 and len(pred.tracks) <= 3 and gt.num_frames() <= 5
        m, om = clear_mot(gt, pred), oracle_clear_mot(gt, pred, 0.5)
        assert m.mota == pytest.approx(om["mota"], abs=1e-9)
        assert (m.fp, m.fn, m.idsw) == (om["fp"], om["fn"], om["idsw"])
        i, oi = idf1(gt, pred), oracle_idf1(gt, pred, 0.5)
        assert i.idf1 == pytest.approx(oi["idf1"], abs=1e-9)
        h, oh = hota(gt, pred), oracle_hota(gt, pred)
        assert h.hota == pytest.approx(oh["hota"], abs=1e-9)
        assert h.deta == pytest.approx(oh["deta"], abs=1e-9)
        assert h.assa == pytest.approx(oh["assa"], abs=1e-9)
        checked += 1
    assert time.perf_counter() - start < 30.0


# 3 ------------------------------------------------------------------------

@criterion(3, "perfect prediction scores MOTA=IDF1=HOTA=1 and zero counting error on every preset")
@pytest.mark.parametrize("preset", sorted(PRESETS))
def test_perfect_prediction(preset):
    gt = generate_scene(preset_scenario(preset))
    ids = gt.track_ids()
    relabel = dict(zip(ids, reversed([i + 1000 for i in ids])))
    pred = gt.with_tracks([t.with_id(relabel[t.track_id]) for t in gt.tracks])
    assert clear_mot(gt, pred).mota == 1.0
    assert idf1(gt, pred).idf1 == 1.0
    assert hota(gt, pred).hota == pytest.approx(1.0, abs=1e-12)
    e = counting_errors(count_tracks(gt), count_tracks(pred))
    assert (e.mae, e.sad, e.rmse, e.mape) == (0, 0, 0, 0)


# 4 ------------------------------------------------------------------------

@criterion(4, "clutter preset: baseline MAE > 0, MAE = 0 after H1")
@pytest.mark.parametrize("seed", SEEDS)
def test_clutter_scenario(seed):
    cfg = preset_scenario("clutter", seed=seed)
    gt, pred, log = simulate(cfg, return_log=True)
    assert log.clutter_ids
    assert all(t.duration_frames() < 15 for t in pred.tracks if t.track_id in log.clutter_ids)
    gt_counts = count_tracks(gt)
    assert counting_errors(gt_counts, count_tracks(pred)).mae > 0
    h1 = refine_pipeline(pred, HeuristicConfig.regime("h1"))
    assert counting_errors(gt_counts, count_tracks(h1)).mae == 0


# 5 ------------------------------------------------------------------------

@criterion(5, "fragmentation preset: H1+H2 restores per-class counts; report prints 100.0% MAE reduction")
@pytest.mark.parametrize("seed", SEEDS)
def test_fragmentation_scenario(seed):
    cfg = preset_scenario("fragmentation", seed=seed)
    gt, pred, log = simulate(cfg, return_log=True)
    assert log.n_splits == len(gt.tracks)
    assert cfg.noise.fragment_gap[1] + 1 <= 20
    refined = refine_pipeline(pred, HeuristicConfig.regime("h1+h2"))
    assert count_tracks(refined) == count_tracks(gt)
    before = counting_errors(count_tracks(gt), count_tracks(pred)).mae
    after = counting_errors(count_tracks(gt), count_tracks(refined)).mae
    assert before > 0 and after == 0


@criterion(5, "fragmentation preset: H1+H2 restores per-class counts; report prints 100.0% MAE reduction")
def test_fragmentation_report(tmp_path, capsys):
    d = tmp_path / "sim"
    meta = d / "seqinfo.ini"
    assert run_cli(capsys, "simulate", "--preset", "fragmentation", "-o", d)[0] == 0
    refined = tmp_path / "refined.txt"
    assert run_cli(capsys, "refine", d / "pred.txt", "--meta", meta, "-o", refined, "--disable-h3")[0] == 0
    base_json, ours_json = tmp_path / "base.json", tmp_path / "ours.json"
    assert run_cli(capsys, "evaluate", d / "gt.txt", d / "pred.txt", "--meta", meta,
                   "--label", "Baseline", "-o", base_json)[0] == 0
    assert run_cli(capsys, "evaluate", d / "gt.txt", refined, "--meta", meta,
                   "--label", "H1+H2", "-o", ours_json)[0] == 0
    code, out, _ = run_cli(capsys, "report", base_json, ours_json, "--compare")
    assert code == 0
    print(out)
    header, _, base_row, ours_row = out.strip().splitlines()
    cols = [c.strip() for c in header.strip("|").split("|")]
    cells = [c.strip() for c in ours_row.strip("|").split("|")]
    assert cells[cols.index("MAE reduction")] == "100.0%"


# 6 ------------------------------------------------------------------------

@criterion(6, "sequential same-class preset: H2 lowers MAE and IDF1 vs H1; H3 recovers IDF1")
@pytest.mark.parametrize("seed", SEEDS)
def test_identity_tradeoff(seed):
    gt, pred = simulate(preset_scenario("sequential_same_class", seed=seed))
    gt_counts = count_tracks(gt)
    runs = {name: refine_pipeline(pred, HeuristicConfig.regime(name)) for name in ("h1", "h1+h2", "h1+h2+h3")}
    mae = {k: counting_errors(gt_counts, count_tracks(v)).mae for k, v in runs.items()}
    f1 = {k: idf1(gt, v).idf1 for k, v in runs.items()}
    assert mae["h1+h2"] < mae["h1"]
    assert f1["h1+h2"] < f1["h1"]
    assert f1["h1+h2+h3"] > f1["h1+h2"]


# 7 ------------------------------------------------------------------------

@criterion(7, "heuristic boundaries: duration 14/15, gap 20/21, distance 0.10/0.1000001")
def test_boundary_triple():
    cfg = HeuristicConfig()
    seq = make_seq(make_track(1, range(14)), make_track(2, range(15), class_id=2))
    assert apply_h1(seq, cfg.min_duration).track_ids() == [2]

    def gap_pair(gap):
        a = make_track(1, range(0, 20))
        b = make_track(2, range(19 + gap, 39 + gap))
        return make_seq(a, b)

    assert len(merge_tracks(gap_pair(20), cfg).tracks) == 1
    assert len(merge_tracks(gap_pair(21), cfg).tracks) == 2

    def dist_pair(dx):
        # 1000x1000 image: a shift of dx pixels is dx/1000 normalized units.
        a = make_track(1, range(0, 20), box=(100, 100, 50, 50))
        b = make_track(2, range(25, 45), box=(100 + dx, 100, 50, 50))
        return make_seq(a, b, width=1000, height=1000)

    assert len(merge_tracks(dist_pair(100.0), cfg).tracks) == 1
    assert len(merge_tracks(dist_pair(100.0001), cfg).tracks) == 2


# 8 ------------------------------------------------------------------------

def fuzzed_mot_text(rng):
    """A messy but valid MOT file: shuffled lines, 6-9 fields, odd precision, spacing."""
    lines = []
    for tid in rng.choice(np.arange(1, 60), size=int(rng.integers(0, 7)), replace=False):
        frames = rng.choice(np.arange(1, 80), size=int(rng.integers(1, 15)), replace=False)
        cls = int(rng.integers(1, 8))
        arity = int(rng.integers(6, 10))
        for f in frames:
            x, y = rng.uniform(-400, 1800), rng.uniform(-400, 1000)
            w, h = rng.uniform(1, 400, 2)
            digits = int(rng.integers(0, 7))
            values = [f"{v:.{digits}f}" for v in (x, y, w, h)]
            extra = [f"{rng.uniform(0, 1):.{int(rng.integers(1, 7))}f}", str(cls if rng.random() < 0.8 else int(rng.integers(1, 8))),
                     f"{rng.uniform(0, 1):.3f}"]
            fields = [str(f), str(int(tid))] + values + extra[: arity - 6]
            sep = ", " if rng.random() < 0.2 else ","
            lines.append(sep.join(fields))
    rng.shuffle(lines)
    return "\n".join(lines) + ("\n" if lines else "")


@criterion(8, "parse -> write -> parse is stable on 100 fuzzed MOT files")
def test_round_trip_fuzz(caplog):
    rng = np.random.default_rng(8)
    for _ in range(100):
        text = fuzzed_mot_text(rng)
        first = parse_mot_text(text)
        text2 = write_mot_file(first)
        second = parse_mot_text(text2)
        text3 = write_mot_file(second)
        third = parse_mot_text(text3)
        assert second == third
        assert text2 == text3
        assert second.track_ids() == first.track_ids()
        assert second.num_detections() == first.num_detections()


# 9 ------------------------------------------------------------------------

SIM_FILES = ("gt.txt", "pred.txt", "seqinfo.ini", "sim_config.json", "corruption.json")


@criterion(9, "simulate and bootstrap are byte-identical for a fixed seed and differ across seeds")
@pytest.mark.parametrize("preset", sorted(PRESETS))
def test_simulate_determinism(tmp_path, capsys, preset):
    dirs = {}
    for name, seed in (("a", 11), ("b", 11), ("c", 12)):
        dirs[name] = tmp_path / name
        assert run_cli(capsys, "simulate", "--preset", preset, "--seed", seed, "-o", dirs[name])[0] == 0
    for f in SIM_FILES:
        assert (dirs["a"] / f).read_bytes() == (dirs["b"] / f).read_bytes(), f
    assert (dirs["a"] / "pred.txt").read_bytes() != (dirs["c"] / "pred.txt").read_bytes()


@criterion(9, "simulate and bootstrap are byte-identical for a fixed seed and differ across seeds")
def test_bootstrap_determinism():
    values = [81.4, 55.1, 66.8, 70.2, 60.0]
    a = bootstrap_summary(values, 10, seed=5)
    b = bootstrap_summary(values, 10, seed=5)
    c = bootstrap_summary(values, 10, seed=6)
    assert repr(a) == repr(b)
    assert a != c


# 10 -----------------------------------------------------------------------

def _report(path, label, mae):
    pooled = {k: None for k in ("mota", "idf1", "hota", "deta", "assa", "sad", "rmse", "mape")}
    pooled["mae"] = mae
    path.write_text(json.dumps({"schema": REPORT_SCHEMA, "label": label, "pooled": pooled}))
    return path


@criterion(10, "report prints 79.6% for MAE 3.48 -> 0.71 and 86.0% for 6.43 -> 0.90")
@pytest.mark.parametrize("before,after,expected", [(3.48, 0.71, 79.6), (6.43, 0.90, 86.0)])
def test_report_arithmetic(tmp_path, capsys, before, after, expected):
    a = _report(tmp_path / "a.json", "Baseline", before)
    b = _report(tmp_path / "b.json", "Ours", after)
    code, out, _ = run_cli(capsys, "report", a, b, "--compare")
    assert code == 0
    lines = out.strip().splitlines()
    cols = [c.strip() for c in lines[0].strip("|").split("|")]
    cell = [c.strip() for c in lines[3].strip("|").split("|")][cols.index("MAE reduction")]
    assert cell.endswith("%")
    assert abs(float(cell[:-1]) - expected) <= 0.05


# 11 -----------------------------------------------------------------------

@criterion(11, "the acceptance suite finishes in under 2 minutes")
def test_suite_runtime():
    elapsed = time.perf_counter() - _START["t"]
    print(f"acceptance suite elapsed: {elapsed:.1f} s")
    assert elapsed < 120.0
