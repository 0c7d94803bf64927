"""Built-in acceptance suite: every stability claim measured end to end.

Nine criteria, each with pinned tolerances.  The expensive ones drive the
real CLI in subprocesses (which is also what makes the determinism
criterion meaningful: reruns and thread-count variants are separate
processes).  A small scheduler keeps the long 3-d run alone on the
machine while it is being timed and packs the remaining runs two wide.
"""

from __future__ import annotations

import filecmp
import math
import os
import shutil
import subprocess
import sys
import threading
import time
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = ["CriterionResult", "AcceptanceRuns", "run_acceptance", "CRITERIA", "RUN_CONFIGS"]


@dataclass
class CriterionResult:
    name: str
    passed: bool
    details: str
    seconds: float


def _cfg_c4(n1: int, tol: float) -> str:
    return f"""
[domain]
L = 50.0
N1 = {n1}
[shock]
rho_minus = 1.2
rho_plus = 1.0
T = 1.0
[profile]
tol = {tol}
[sim]
t_final = 10.0
output_every = 1.0
cfl_adv = 0.5
cfl_visc = 0.4
eps4 = 0.01
[perturb]
amplitude = 0.0
[io]
snapshots = false
"""


_CFG_C5 = """
[domain]
L = 30.0
N1 = 1024
[shock]
rho_minus = 1.1
rho_plus = 1.0
T = 1.0
[profile]
tol = 3e-11
[sim]
t_final = 100.0
output_every = 1.0
cfl_adv = 0.5
cfl_visc = 0.4
eps4 = 0.01
[perturb]
amplitude = 1e-2
x1_width = 5.0
modes = 0:0:1.0
seed = 5
targets = z r1
[io]
snapshots = false
"""

_CFG_C6 = """
[domain]
L = 30.0
N1 = 512
N2 = 16
N3 = 16
[shock]
rho_minus = 1.1
rho_plus = 1.0
T = 0.3
[profile]
tol = 2e-10
[sim]
t_final = 50.0
output_every = 0.5
cfl_adv = 0.5
cfl_visc = 0.1
eps4 = 0.01
[perturb]
amplitude = 1e-2
x1_width = 4.0
modes = 1:0:1.0
seed = 6
targets = z
[io]
snapshots = true
"""

RUN_CONFIGS = {
    "c4a": _cfg_c4(2048, 3e-11),
    "c4b": _cfg_c4(4096, 1e-11),
    "c5": _CFG_C5,
    "c6": _CFG_C6,
}

# (name, config key, threads); group 1 runs two wide, then the timed c6
# base runs alone, then the c6 variants share the machine.
_GROUPS = [
    [
        ("c4a", "c4a", 1), ("c4b", "c4b", 1), ("c5", "c5", 1),
        ("c4a_rerun", "c4a", 1), ("c4b_rerun", "c4b", 1), ("c5_rerun", "c5", 1),
        ("c4a_t2", "c4a", 2), ("c4a_t8", "c4a", 8),
        ("c4b_t2", "c4b", 2), ("c4b_t8", "c4b", 8),
        ("c5_t2", "c5", 2), ("c5_t8", "c5", 8),
    ],
    [("c6", "c6", 1)],
    [("c6_rerun", "c6", 1), ("c6_t2", "c6", 2), ("c6_t8", "c6", 8)],
]


@dataclass
class RunResult:
    name: str
    rundir: str
    seconds: float
    returncode: int
    stderr: str


class AcceptanceRuns:
    """Launches and caches the acceptance simulations (CLI subprocesses)."""

    def __init__(self, out_dir: str, progress=None):
        self.out_dir = out_dir
        self.progress = progress or (lambda s: None)
        if os.path.isdir(out_dir):
            shutil.rmtree(out_dir)
        os.makedirs(out_dir)
        self._results: dict[str, RunResult] = {}
        self._done: dict[str, threading.Event] = {}
        for group in _GROUPS:
            for name, _, _ in group:
                self._done[name] = threading.Event()
        self._driver = threading.Thread(target=self._drive, daemon=True)
        self._driver.start()

    def _launch(self, name: str, cfg_key: str, threads: int):
        cfg_path = os.path.join(self.out_dir, f"{cfg_key}.cfg")
        if not os.path.exists(cfg_path):
            with open(cfg_path, "w") as fh:
                fh.write(RUN_CONFIGS[cfg_key])
        rundir = os.path.join(self.out_dir, name)
        env = {
            k: v
            for k, v in os.environ.items()
            if k not in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS")
        }
        cmd = [
            sys.executable, "-m", "nspshock.cli", "--threads", str(threads),
            "simulate", cfg_path, "--out-dir", rundir,
        ]
        self.progress(f"  launching {name} (threads={threads})")
        t0 = time.perf_counter()
        proc = subprocess.Popen(
            cmd, env=env, stdout=subprocess.DEVNULL, stderr=subprocess.PIPE, text=True
        )
        return proc, rundir, t0

    def _drive(self):
        for group in _GROUPS:
            live = []
            for name, cfg_key, threads in group:
                proc, rundir, t0 = self._launch(name, cfg_key, threads)
                live.append((name, proc, rundir, t0))
            for name, proc, rundir, t0 in live:
                _, errout = proc.communicate()
                secs = time.perf_counter() - t0
                self._results[name] = RunResult(
                    name, rundir, secs, proc.returncode, errout[-2000:] if errout else ""
                )
                self.progress(f"  run {name} finished in {secs/60:.1f} min (rc={proc.returncode})")
                self._done[name].set()

    def wait(self, name: str) -> RunResult:
        self._done[name].wait()
        res = self._results[name]
        if res.returncode != 0:
            raise RuntimeError(f"run {name} failed (rc={res.returncode}): {res.stderr}")
        return res


def _read_diag(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return header, data


def _col(header, data, name):
    return data[:, header.index(name)]


# --------------------------------------------------------------------------
# criteria
# --------------------------------------------------------------------------


def criterion_1_endstate_algebra(_runs=None) -> CriterionResult:
    """Closed-form jump conditions vs an independent root-find; Lax margins."""
    import scipy.optimize

    from .shock import check_lax, solve_rankine_hugoniot

    t0 = time.perf_counter()
    es = solve_rankine_hugoniot(1.2, 1.0, 1.0)

    def rh(v):  # eq residuals in the s = 0 frame, unknowns (u-, u+)
        um, up = v
        r1 = 1.0 * up - 1.2 * um
        r2 = 1.0 * up**2 - 1.2 * um**2 + 2.0 * (1.0 - 1.2)
        return [r1, r2]

    sol = scipy.optimize.fsolve(rh, [-1.2, -1.5], xtol=1e-14, full_output=True)
    uroot, ok = sol[0], sol[2] == 1
    err = max(
        abs(es.u_minus - uroot[0]),
        abs(es.u_plus - uroot[1]),
        abs(es.j - 1.2 * uroot[0]),
        abs(es.j + math.sqrt(2.0 * 1.2)),
        max(abs(r) for r in es.rh_residuals()),
    )
    lax = check_lax(es)
    best = min(
        _time_once(lambda: solve_rankine_hugoniot(1.2, 1.0, 1.0)) for _ in range(5)
    )
    passed = ok and err < 1e-12 and lax.ok and best < 1e-3
    details = (
        f"closed-form vs root-find err {err:.2e} (tol 1e-12); "
        f"Lax margins {lax.margins[0]:.4f},{lax.margins[1]:.4f},{lax.margins[2]:.4f}; "
        f"solve time {best*1e6:.1f} us (< 1 ms)"
    )
    return CriterionResult("1 end-state algebra", passed, details, time.perf_counter() - t0)


def _time_once(fn):
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def criterion_2_profile(_runs=None) -> CriterionResult:
    """Profile residual, monotonicity, Eq.(2.1) identity, tail-rate scaling."""
    from .grid import GridSpec
    from .shock import solve_profile, solve_rankine_hugoniot, verify_profile

    t0 = time.perf_counter()
    grid = GridSpec(L=50.0, N1=2048)
    out = []
    passed = True
    tails_right = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for rho_minus in (1.1, 1.2):
            es = solve_rankine_hugoniot(rho_minus, 1.0, 1.0)
            p = solve_profile(es, grid, tol=3e-11)
            rep = verify_profile(p)
            tails_right[es.delta] = rep.tail_rate_right
            ok_res = p.residual_norm < 1e-10
            ok_mono = rep.monotone
            ok_eq = rep.eq_ratio_error < 5e-8
            passed &= ok_res and ok_mono and ok_eq
            out.append(
                f"delta={es.delta:.1f}: resid {p.residual_norm:.1e}"
                f"{'' if ok_res else ' (FAIL>1e-10)'}, monotone {rep.monotone}"
                f"{'' if ok_mono else ' (FAIL: oscillatory rho_- tail, see ledger)'}"
                f", eq2.1 {rep.eq_ratio_error:.1e}{'' if ok_eq else ' (FAIL>5e-8)'}"
            )
    ratio = tails_right[0.2] / tails_right[0.1]
    ok_ratio = 1.5 <= ratio <= 2.5
    passed &= ok_ratio
    el = time.perf_counter() - t0
    passed &= el < 30.0
    out.append(f"tail-rate ratio theta(0.2)/theta(0.1) = {ratio:.3f} (in [1.5,2.5]: {ok_ratio})")
    out.append(f"runtime {el:.1f}s (< 30 s)")
    return CriterionResult("2 profile correctness", passed, "; ".join(out), el)


def criterion_3_poisson(_runs=None) -> CriterionResult:
    """Manufactured-solution order, residual certificates, comparison probe."""
    from .grid import GridSpec
    from .poisson import PoissonConfig, poisson_residual_norm, solve_nonlinear_poisson

    t0 = time.perf_counter()
    cfg = PoissonConfig()
    certs = []

    def mms(n1, amp=0.02, L=16.0):
        g = GridSpec(L=L, N1=n1, N2=8, N3=4)
        x1 = g.x1[:, None, None]
        x2 = g.x2[None, :, None]
        one = np.ones(g.shape)
        sech = 1.0 / np.cosh(x1)
        estar = (0.1 * np.tanh(x1 / 2) + amp * np.sin(2 * np.pi * x2) * sech) * one
        lap = (
            -0.05 * np.tanh(x1 / 2) / np.cosh(x1 / 2) ** 2
            + amp * np.sin(2 * np.pi * x2) * (sech - 2 * sech**3)
            - 4 * np.pi**2 * amp * np.sin(2 * np.pi * x2) * sech
        ) * one
        rho = np.exp(estar) - lap
        bc = (0.1 * math.tanh((-L - g.dx1 / 2) / 2), 0.1 * math.tanh((L + g.dx1 / 2) / 2))
        E = solve_nonlinear_poisson(rho, np.log(np.maximum(rho, 1e-8)), bc, cfg, g)
        certs.append(poisson_residual_norm(E, rho, bc, g))
        return float(np.max(np.abs(E - estar)))

    errs = [mms(n) for n in (128, 256, 512)]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    ok_order = all(o >= 1.9 for o in orders)

    ok_probe = True
    probe_min = np.inf
    for seed in range(3):
        rng = np.random.default_rng(seed)
        g = GridSpec(L=6.0, N1=96, N2=8, N3=8)
        x1 = g.x1[:, None, None]
        x2 = g.x2[None, :, None]
        x3 = g.x3[None, None, :]
        c = rng.standard_normal(3)
        rho = 1.0 + 0.3 * np.exp(-(x1**2) / 4) * (
            c[0] + 0.5 * np.sin(2 * np.pi * x2 + c[1]) + 0.5 * np.cos(2 * np.pi * x3 + c[2])
        )
        rho = np.maximum(rho * np.ones(g.shape), 0.3)
        e1 = solve_nonlinear_poisson(rho, np.log(rho), (0.0, 0.0), cfg, g)
        e2 = solve_nonlinear_poisson(rho + 0.1, np.log(rho + 0.1), (0.0, 0.0), cfg, g)
        certs.append(poisson_residual_norm(e1, rho, (0.0, 0.0), g))
        certs.append(poisson_residual_norm(e2, rho + 0.1, (0.0, 0.0), g))
        probe_min = min(probe_min, float(np.min(e2 - e1)))
    ok_probe = probe_min > -1e-13
    ok_cert = max(certs) < 1e-10
    el = time.perf_counter() - t0
    passed = ok_order and ok_probe and ok_cert and el < 120.0
    details = (
        f"MMS orders {orders[0]:.3f}, {orders[1]:.3f} (>= 1.9); "
        f"max certificate {max(certs):.1e} over {len(certs)} solves (< 1e-10); "
        f"comparison probe min(dE) {probe_min:.1e} >= -1e-13; runtime {el:.0f}s (< 2 min)"
    )
    return CriterionResult("3 Poisson solver", passed, details, el)


def criterion_4_steady(runs: AcceptanceRuns) -> CriterionResult:
    """Steady-shock preservation and its refinement scaling."""
    t0 = time.perf_counter()
    ra = runs.wait("c4a")
    rb = runs.wait("c4b")
    drifts = {}
    for name, rr in (("c4a", ra), ("c4b", rb)):
        header, data = _read_diag(os.path.join(rr.rundir, "diagnostics.csv"))
        drifts[name] = float(_col(header, data, "Linf_z")[-1])
    ok_a = drifts["c4a"] < 1e-5
    ok_ratio = drifts["c4b"] <= drifts["c4a"] / 3.0
    run_secs = ra.seconds + rb.seconds
    ok_time = run_secs < 600.0
    passed = ok_a and ok_ratio and ok_time
    details = (
        f"drift(N1=2048) {drifts['c4a']:.2e} (< 1e-5); "
        f"drift(N1=4096) {drifts['c4b']:.2e}, reduction x{drifts['c4a']/max(drifts['c4b'],1e-300):.1f} (>= 3); "
        f"runs {run_secs:.0f}s (< 10 min)"
    )
    return CriterionResult("4 steady-shock preservation", passed, details, time.perf_counter() - t0)


def criterion_5_stability_1d(runs: AcceptanceRuns) -> CriterionResult:
    """Zero-mode stability: Linf contraction and anti-derivative decay."""
    t0 = time.perf_counter()
    rr = runs.wait("c5")
    header, data = _read_diag(os.path.join(rr.rundir, "diagnostics.csv"))
    t = _col(header, data, "t")
    linf = np.maximum(_col(header, data, "Linf_z"), _col(header, data, "Linf_w"))
    ratio = linf[-1] / linf[0]
    ok_linf = ratio < 0.1
    win = t >= 0.2 * t[-1]
    ok_mono = True
    worst = -np.inf
    for name in ("L2_Z", "L2_R"):
        v = _col(header, data, name)[win]
        incr = np.diff(v) - (1e-9 * v[:-1] + 1e-15)
        worst = max(worst, float(np.max(incr / np.maximum(v[:-1], 1e-300))))
        ok_mono &= bool(np.all(incr <= 0.0))
    ok_time = rr.seconds < 1800.0
    passed = ok_linf and ok_mono and ok_time
    details = (
        f"Linf(z,w) ratio at t=100: {ratio:.4f} (< 0.1); "
        f"L2_Z, L2_R non-increasing on [20,100]: {ok_mono} "
        f"(worst rel increment {worst:.1e}); run {rr.seconds:.0f}s (< 30 min)"
    )
    return CriterionResult("5 one-dimensional stability", passed, details, time.perf_counter() - t0)


def criterion_6_nonzero_decay(runs: AcceptanceRuns) -> CriterionResult:
    """Exponential decay of the non-zero mode, measured by log-linear fit."""
    from .diagnostics import decay_fit

    t0 = time.perf_counter()
    rr = runs.wait("c6")
    header, data = _read_diag(os.path.join(rr.rundir, "diagnostics.csv"))
    t = _col(header, data, "t")
    msgs = []
    passed = True
    for name in ("L2_z_neq", "L2_w_neq"):
        y = _col(header, data, name)
        fit = decay_fit(np.column_stack([t, y]), window=(0.2 * t[-1], t[-1]))
        ok = fit.c > 0.0 and fit.r2 > 0.98
        passed &= ok
        msgs.append(
            f"{name}: c={fit.c:.4f} (>0), r2={fit.r2:.5f} (>0.98){'' if ok else ' FAIL'}"
        )
    ok_time = rr.seconds < 7200.0
    passed &= ok_time
    msgs.append(f"run {rr.seconds/60:.1f} min (< 2 h); measured c reported, not asserted")
    return CriterionResult("6 non-zero-mode decay", passed, "; ".join(msgs), time.perf_counter() - t0)


def criterion_7_conservation(runs: AcceptanceRuns) -> CriterionResult:
    """Mass ledger of the 3-d run: zero-mass condition preserved."""
    t0 = time.perf_counter()
    rr = runs.wait("c6")
    header, data = _read_diag(os.path.join(rr.rundir, "diagnostics.csv"))
    worst = {}
    for name in ("mass_z", "mass_r1", "mass_r2", "mass_r3"):
        worst[name] = float(np.max(np.abs(_col(header, data, name))))
    mx = max(worst.values())
    passed = mx < 1e-8
    details = "; ".join(f"max|{k}| = {v:.2e}" for k, v in worst.items()) + " (< 1e-8)"
    return CriterionResult("7 conservation under zero-mass data", passed, details, time.perf_counter() - t0)


def criterion_8_mode_split(runs: AcceptanceRuns) -> CriterionResult:
    """Orthogonality and Poincare inequalities on every recorded field."""
    from .config import parse_config_text
    from .shock import solve_profile
    from .snapshot import read_snapshot

    t0 = time.perf_counter()
    rr = runs.wait("c6")
    cfg = parse_config_text(RUN_CONFIGS["c6"])
    grid = cfg.grid()
    es = cfg.endstates()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        prof = solve_profile(es, grid, tol=cfg["profile.tol"])
    snaps = sorted(
        f for f in os.listdir(rr.rundir) if f.startswith("snap_") and f.endswith(".nsps")
    )
    worst_orth = 0.0
    worst_poin = -np.inf
    checked = 0
    for fname in snaps:
        s = read_snapshot(os.path.join(rr.rundir, fname))
        fields = {
            "z": s.rho - prof.rho[:, None, None],
            "w1": s.m[0] / s.rho - prof.u1[:, None, None],
            "w2": s.m[1] / s.rho,
            "w3": s.m[2] / s.rho,
            "H": s.E - prof.E[:, None, None],
        }
        for f in fields.values():
            fbar = grid.transverse_average(f)
            fneq = grid.nonzero_part(f)
            g1 = np.float64(grid.dx1)
            tot = grid.l2(f) ** 2
            split = float(np.sum(fbar * fbar) * grid.dx1) + grid.l2(fneq) ** 2
            worst_orth = max(worst_orth, abs(tot - split) / max(1.0, tot))
            gradn = math.sqrt(grid.l2(grid.d_x2(fneq)) ** 2 + grid.l2(grid.d_x3(fneq)) ** 2)
            worst_poin = max(
                worst_poin, grid.l2(fneq) - gradn / (2 * math.pi) - 1e-12
            )
            checked += 1
    passed = worst_orth < 1e-10 and worst_poin <= 0.0 and checked > 0
    details = (
        f"{checked} fields over {len(snaps)} snapshots; "
        f"orthogonality defect {worst_orth:.1e} (< 1e-10); "
        f"Poincare margin {-worst_poin:.2e} (>= 0)"
    )
    return CriterionResult("8 mode-split identities", passed, details, time.perf_counter() - t0)


def criterion_9_determinism(runs: AcceptanceRuns) -> CriterionResult:
    """Bitwise reruns at fixed threads; norm equality across thread counts."""
    t0 = time.perf_counter()
    msgs = []
    passed = True

    for base in ("c4a", "c4b", "c5", "c6"):
        rb = runs.wait(base)
        rr = runs.wait(f"{base}_rerun")
        same = filecmp.cmp(
            os.path.join(rb.rundir, "diagnostics.csv"),
            os.path.join(rr.rundir, "diagnostics.csv"),
            shallow=False,
        ) and filecmp.cmp(
            os.path.join(rb.rundir, "final.nsps"),
            os.path.join(rr.rundir, "final.nsps"),
            shallow=False,
        )
        passed &= same
        msgs.append(f"{base} rerun bitwise: {same}")

    for base in ("c4a", "c4b", "c5", "c6"):
        rb = runs.wait(base)
        hb, db = _read_diag(os.path.join(rb.rundir, "diagnostics.csv"))
        final_b = db[-1]
        worst = 0.0
        for thr in ("t2", "t8"):
            rt = runs.wait(f"{base}_{thr}")
            ht, dt_ = _read_diag(os.path.join(rt.rundir, "diagnostics.csv"))
            diff = np.max(np.abs(dt_[-1] - final_b) / np.maximum(1.0, np.abs(final_b)))
            worst = max(worst, float(diff))
        ok = worst <= 1e-14
        passed &= ok
        msgs.append(f"{base} norms across threads 1/2/8: max rel diff {worst:.1e}")

    # reclaim the snapshot space of the c6 variants once compared
    for name in ("c6_rerun", "c6_t2", "c6_t8"):
        rundir = runs.wait(name).rundir
        for f in os.listdir(rundir):
            if f.startswith("snap_"):
                os.unlink(os.path.join(rundir, f))
    return CriterionResult("9 determinism", passed, "; ".join(msgs), time.perf_counter() - t0)


CRITERIA = [
    criterion_1_endstate_algebra,
    criterion_2_profile,
    criterion_3_poisson,
    criterion_4_steady,
    criterion_5_stability_1d,
    criterion_6_nonzero_decay,
    criterion_7_conservation,
    criterion_8_mode_split,
    criterion_9_determinism,
]

_QUICK = [criterion_1_endstate_algebra, criterion_2_profile, criterion_3_poisson]


def run_acceptance(quick: bool = False, out_dir: str = "runs/acceptance", progress=print):
    """Run the acceptance criteria; returns a list of CriterionResult."""
    results = []
    if quick:
        for fn in _QUICK:
            res = fn(None)
            progress(f"[{'PASS' if res.passed else 'FAIL'}] {res.name}: {res.details}")
            results.append(res)
        return results
    runs = AcceptanceRuns(out_dir, progress=progress)
    for fn in CRITERIA:
        res = fn(runs)
        progress(f"[{'PASS' if res.passed else 'FAIL'}] {res.name}: {res.details}")
        results.append(res)
    return results
