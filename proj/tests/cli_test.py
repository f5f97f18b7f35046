"""End-to-end checks of the qwalk binary. Usage: cli_test.py QWALK CONFIG_DIR WORK_DIR CASE"""

import csv
import json
import subprocess
import sys
from collections import defaultdict
from pathlib import Path

QWALK, CONFIGS, WORK, CASE = Path(sys.argv[1]), Path(sys.argv[2]), Path(sys.argv[3]), sys.argv[4]


def run(command, config, out, *extra):
    return subprocess.run([str(QWALK), command, "--config", str(config), "--out", str(out), *extra],
                          capture_output=True, text=True)


def write(name, text):
    path = WORK / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def expect(cond, message):
    if not cond:
        raise SystemExit(f"FAIL {CASE}: {message}")


def error_json(proc):
    return json.loads(proc.stderr.strip().splitlines()[-1])


def walk_minimal():
    out = WORK / "walk_a"
    proc = run("walk", CONFIGS / "walk_minimal.toml", out)
    expect(proc.returncode == 0, proc.stderr)
    rows = list(csv.DictReader((out / "diagnostics.csv").open()))
    expect(len(rows) == 101, f"{len(rows)} diagnostics rows")
    expect(list(rows[0]) == ["t", "l2", "l5", "linf", "weak_l4", "support_lo", "support_hi"], "header")
    totals = defaultdict(float)
    for r in csv.DictReader((out / "probabilities.csv").open()):
        totals[int(r["t"])] += float(r["p"])
    expect(sorted(totals) == list(range(101)), "probability snapshots at every t")
    worst = max(abs(v - 1) for v in totals.values())
    expect(worst <= 1e-12, f"sum p_t deviates by {worst}")
    summary = json.loads((out / "summary.json").read_text())
    expect(summary["schema_version"] == 1, "schema_version")
    state = json.loads((out / "final_state.json").read_text())
    expect(state["schema_version"] == 1 and state["offset"] >= -100, "final state")


def walk_deterministic():
    a, b = WORK / "det_a", WORK / "det_b"
    for out in (a, b):
        proc = run("walk", CONFIGS / "walk_minimal.toml", out)
        expect(proc.returncode == 0, proc.stderr)
    for name in ("diagnostics.csv", "probabilities.csv", "summary.json", "final_state.json", "config.toml"):
        expect((a / name).read_bytes() == (b / name).read_bytes(), f"{name} differs between runs")


def random_seed():
    cfg = write("random.toml", '[coin]\na = 0.6\n[initial]\nkind = "random"\nsites = 8\nseed = 3\n'
                               "[walk]\nhorizon = 10\n")
    outs = {}
    for tag, extra in (("a", []), ("b", []), ("c", ["--seed", "99"])):
        proc = run("walk", cfg, WORK / f"seed_{tag}", *extra)
        expect(proc.returncode == 0, proc.stderr)
        outs[tag] = (WORK / f"seed_{tag}" / "diagnostics.csv").read_bytes()
    expect(outs["a"] == outs["b"], "same seed must reproduce")
    expect(outs["a"] != outs["c"], "--seed must change the random state")


def decay_default():
    out = WORK / "decay"
    proc = run("decay", CONFIGS / "decay_default.toml", out)
    expect(proc.returncode == 0, proc.stderr)
    fits = json.loads((out / "fits.json").read_text())
    expect(fits["schema_version"] == 1, "schema_version")
    by = {f["norm"]: f for f in fits["fits"]}
    for norm, target in (("linf", -1 / 3), ("weak_l4", -0.25), ("l5", -4 / 15)):
        expect(abs(by[norm]["slope"] - target) <= 0.05, f"{norm} slope {by[norm]['slope']}")
        expect(by[norm]["pass"] is True, f"{norm} pass flag")
        expect((out / f"series_{norm}.csv").exists(), f"series_{norm}.csv")
    expect(fits["strichartz"]["linf_l2"] - 1 <= 1e-9, "Strichartz report")


def decay_edge_regime():
    cfg = write("edge.toml", "[coin]\na = 1\nb = 0\n[decay]\nt_min = 64\nt_max = 256\n")
    proc = run("decay", cfg, WORK / "edge")
    expect(proc.returncode == 4, f"exit {proc.returncode}")
    err = error_json(proc)
    expect(err["error"] == "regime_violation", err)
    expect("|a| = 0 and |a| = 1" in err["message"], err["message"])


def decay_empty_times():
    cfg = write("empty.toml", "[coin]\na = 0.6\n[decay]\ntimes = []\n")
    proc = run("decay", cfg, WORK / "empty")
    expect(proc.returncode == 2, f"exit {proc.returncode}")
    expect(error_json(proc)["error"] == "config_error", proc.stderr)


def config_errors():
    for name, text in (("unknown_key.toml", "[coin]\na = 0.6\ncolour = 1\n"),
                       ("syntax.toml", "[coin\na = 0.6\n"),
                       ("bad_kind.toml", '[nonlinear]\nkind = "warp"\n')):
        proc = run("walk", write(name, text), WORK / "cfgerr")
        expect(proc.returncode == 2, f"{name}: exit {proc.returncode}")
        expect(error_json(proc)["error"] == "config_error", proc.stderr)
    proc = subprocess.run([str(QWALK), "walk", "--config", str(CONFIGS / "walk_minimal.toml")],
                          capture_output=True, text=True)
    expect(proc.returncode == 2, "missing --out must be a usage error")


def scatter_linear():
    cfg = write("scatter_linear.toml", '[coin]\na = 0.6\n[initial]\nkind = "delta"\namplitude = 0.3\n')
    out = WORK / "scatter_linear"
    proc = run("scatter", cfg, out)
    expect(proc.returncode == 0, proc.stderr)
    rep = json.loads((out / "scatter.json").read_text())
    expect(rep["certified"] and rep["t_star"] == 0, rep)
    expect(rep["u_plus"]["cells"] == [[0.3, 0.0, 0.0, 0.0]], rep["u_plus"])


def scatter_small_kerr():
    out = WORK / "scatter_kerr"
    proc = run("scatter", CONFIGS / "scatter_kerr_small.toml", out)
    expect(proc.returncode == 0, proc.stderr)
    rep = json.loads((out / "scatter.json").read_text())
    expect(rep["schema_version"] == 1 and rep["certified"], "certified")
    expect(rep["tail_bound"] <= 1e-10, rep["tail_bound"])
    defect = list(csv.DictReader((out / "defect.csv").open()))
    at_tstar = [float(r["defect"]) for r in defect if int(r["t"]) == rep["t_star"]]
    expect(at_tstar and at_tstar[0] <= 2e-10, defect)


def scatter_oversized():
    cfg = write("oversized.toml", "[coin]\ntheta = 0.7853981633974483\n"
                                  '[nonlinear]\nkind = "kerr_diagonal"\ng1 = 1\ng2 = 1\n'
                                  '[initial]\nkind = "delta"\namplitude = 0.45\n[scatter]\nt_max = 3000\n')
    out = WORK / "oversized"
    proc = run("scatter", cfg, out)
    expect(proc.returncode == 3, f"exit {proc.returncode}: {proc.stderr}")
    expect(error_json(proc)["error"] == "non_convergence", proc.stderr)
    rep = json.loads((out / "scatter.json").read_text())
    expect(rep["certified"] is False and rep["u_plus"] is None, "partial report")


def invscat_kerr_demo():
    out = WORK / "invscat"
    proc = run("invscat", CONFIGS / "invscat_kerr.toml", out, "--threads", "2")
    expect(proc.returncode == 0, proc.stderr)
    rep = json.loads((out / "invscat.json").read_text())
    expect(rep["schema_version"] == 1 and rep["truth"]["d1"] is not None, "ground truth")
    rows = {float(r["lambda"]): r for r in csv.DictReader((out / "errors.csv").open())}
    for lam in (0.4, 0.3, 0.2):
        for k in ("order1", "order2"):
            order = float(rows[lam][k])
            print(f"lambda {lam} {k} {order:.3f}")
            expect(abs(order - 3) <= 1, f"lambda {lam}: {k} = {order:.3f}, expected about 3")


def invscat_no_tilde():
    cfg = write("no_tilde.toml", '[coin]\ntheta = 0.7853981633974483\n'
                                 '[nonlinear]\nkind = "custom"\norder = 2\ntilde = false\n'
                                 'magnitude = ["1", "0", "0", "1"]\nphase = ["s1 * s2", "0", "0", "s1 * s1"]\n'
                                 "[invscat]\nlambdas = [0.3]\n")
    out = WORK / "no_tilde"
    proc = run("invscat", cfg, out)
    expect(proc.returncode == 0, proc.stderr)
    expect("warning" in proc.stderr, "warning on stderr")
    rep = json.loads((out / "invscat.json").read_text())
    expect(rep["truth"]["d1"] is None and rep["truth"]["d2"] is None, "null ground truth")
    expect(rep["warnings"], "warnings recorded")
    expect(rep["entries"][0]["err1"] is None, "no errors without truth")
    expect(rep["entries"][0]["d1_hat"] is not None, "reconstruction emitted")


def invscat_window_flags():
    cfg = write("window.toml", '[nonlinear]\nkind = "kerr_diagonal"\ng1 = 1\ng2 = -0.5\n'
                               "[coin]\ntheta = 0.7853981633974483\n[invscat]\nlambdas = [0.45, 0.3]\n")
    out = WORK / "window"
    proc = run("invscat", cfg, out)
    expect(proc.returncode == 0, proc.stderr)
    rep = json.loads((out / "invscat.json").read_text())
    flags = {e["lambda"]: e["flags"] for e in rep["entries"]}
    expect("outside_window" in flags[0.45], flags)
    expect("outside_window" not in flags[0.3], flags)


def spectrum():
    out = WORK / "spectrum"
    proc = run("spectrum", CONFIGS / "spectrum.toml", out)
    expect(proc.returncode == 0, proc.stderr)
    rows = list(csv.DictReader((out / "dispersion.csv").open()))
    expect(len(rows) == 512 and list(rows[0]) == ["xi", "p", "dp", "d2p", "d3p"], "dispersion csv")
    rep = json.loads((out / "spectrum.json").read_text())
    expect(max(abs(float(r["dp"])) for r in rows) <= rep["abs_a"] + 1e-15, "group velocity bound")


globals()[CASE]()
print(f"PASS {CASE}")
