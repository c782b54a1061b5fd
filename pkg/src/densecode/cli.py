"""Batch experiment driver.

Modes
-----
``haar``          Monte Carlo campaign over Haar-random four-qubit states:
                  GGM, capacity bound, condition flags, and position relative
                  to the two-term reference curve, one CSV row per sample.
``gghz-curve``    The reference curve itself: rows (m, E, bound) for the
                  two-term family swept over m in [0.5, 1].
``channel-scan``  Numeric bound vs closed form for the four-qubit GHZ state
                  over a channel-parameter sweep.
``bound``         All capacity quantities for one state.
``ggm``           GGM and the per-cut Schmidt table for one state.

CSV columns are documented per mode in the functions below; floats are
printed with 12 significant digits. Campaign RNG streams are keyed by
(seed, state_id), so serial and parallel runs emit identical files.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .capacity import (CAMPAIGN_OPT, DEFAULT_OPT, BoundReport, OptConfig,
                       OptimizationError, closed_form_ghz_bound, covariant_chi,
                       global_capacity, locc_bound_noiseless, noisy_locc_bound)
from .channels import ChannelSpec, PAULI, parse_channel
from .ggm import ggm, theorem2_conditions
from .qcore import RegisterLayout, binary_entropy
from .states import (GghzParams, RngSeed, StateFormatError, haar_random_pure,
                     load_state, make_gghz, make_ghz)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3

HAAR_COLUMNS = ["state_id", "ggm", "bound_bits", "cond_i", "cond_ii",
                "swapped_i", "swapped_ii", "above_gghz_line", "argmax_cut"]
LINE_POINTS = 257
LINE_TOL = 1e-9


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _layout4() -> RegisterLayout:
    return RegisterLayout.split(2)


# ---------------------------------------------------------------------------
# the gGHZ reference line in the (bound, GGM) plane
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GghzLine:
    """Bound of the two-term family as a function of its GGM E = 1 - m.

    Noiseless the curve is exact (bound = 2 + H(1 - E)); under a channel it
    is tabulated on a dense E grid and interpolated.
    """

    noiseless: bool
    e_grid: np.ndarray | None = None
    bound_grid: np.ndarray | None = None

    @classmethod
    def build(cls, spec: ChannelSpec, opt: OptConfig = CAMPAIGN_OPT,
              points: int = LINE_POINTS) -> "GghzLine":
        if spec.is_identity:
            return cls(noiseless=True)
        layout = _layout4()
        m_vals = np.linspace(0.5, 1.0, points)
        bounds = np.empty(points)
        covariant = spec.family == PAULI
        for i, m in enumerate(m_vals):
            st = make_gghz(GghzParams(p=float(m)), layout)
            rep = (covariant_chi(st, spec, opt) if covariant
                   else noisy_locc_bound(st, spec, opt))
            bounds[i] = rep.bound_bits
        e = 1.0 - m_vals[::-1]          # ascending E in [0, 1/2]
        return cls(noiseless=False, e_grid=e, bound_grid=bounds[::-1].copy())

    def bound_at(self, e: float) -> float:
        e = min(max(e, 0.0), 0.5)
        if self.noiseless:
            return 2.0 + binary_entropy(1.0 - e)
        return float(np.interp(e, self.e_grid, self.bound_grid))

    def above(self, ggm_value: float, bound_bits: float) -> bool:
        """On or above the curve: the state's bound does not exceed the
        family's bound at equal entanglement."""
        return bound_bits <= self.bound_at(ggm_value) + LINE_TOL


def _bound_for(state, spec: ChannelSpec, opt: OptConfig) -> BoundReport:
    if spec.is_identity:
        return locc_bound_noiseless(state)
    if spec.family == PAULI:
        return covariant_chi(state, spec, opt)
    return noisy_locc_bound(state, spec, opt)


# ---------------------------------------------------------------------------
# haar campaign
# ---------------------------------------------------------------------------

def _haar_chunk(task) -> list[list[str]]:
    lo, hi, seed, channel_str, line = task
    spec = parse_channel(channel_str)
    layout = _layout4()
    rows = []
    for sid in range(lo, hi):
        st = haar_random_pure(4, RngSeed(seed, sid), layout)
        value, scan = ggm(st)
        flags = theorem2_conditions(st)
        rep = _bound_for(st, spec, CAMPAIGN_OPT)
        above = line.above(value, rep.bound_bits)
        rows.append([str(sid), _fmt(value), _fmt(rep.bound_bits),
                     str(int(flags.cond_i)), str(int(flags.cond_ii)),
                     str(int(flags.swapped_i)), str(int(flags.swapped_ii)),
                     str(int(above)), scan.argmax_label])
    return rows


@dataclass
class HaarSummary:
    n_samples: int
    seed: int
    channel: str
    counts_strict: tuple[int, int, int] = (0, 0, 0)
    counts_swapped: tuple[int, int, int] = (0, 0, 0)

    def fractions(self, convention: str) -> tuple[float, float, float]:
        c = self.counts_strict if convention == "strict" else self.counts_swapped
        return tuple(v / self.n_samples for v in c)

    def lines(self) -> list[str]:
        out = [f"mode=haar n={self.n_samples} seed={self.seed} channel={self.channel}"]
        for conv, c in (("strict", self.counts_strict),
                        ("swapped", self.counts_swapped)):
            f = self.fractions(conv)
            out.append(
                f"convention={conv} premises_above={c[0]} violated_above={c[1]} "
                f"below={c[2]} fractions {f[0]:.6f}/{f[1]:.6f}/{f[2]:.6f}")
        return out


def summarize_rows(rows, n_samples: int, seed: int, channel: str) -> HaarSummary:
    """Tally the three populations (premises satisfied and above the line /
    premises violated but above / below) under both premise conventions."""
    cs = [0, 0, 0]
    cw = [0, 0, 0]
    for row in rows:
        cond_i, cond_ii, sw_i, sw_ii, above = (int(row[3]), int(row[4]),
                                               int(row[5]), int(row[6]),
                                               int(row[7]))
        strict = cond_i and cond_ii
        either = strict or (sw_i and sw_ii)
        if not above:
            cs[2] += 1
            cw[2] += 1
        else:
            cs[0 if strict else 1] += 1
            cw[0 if either else 1] += 1
    return HaarSummary(n_samples=n_samples, seed=seed, channel=channel,
                       counts_strict=tuple(cs), counts_swapped=tuple(cw))


def run_haar(n_samples: int, seed: int, channel: str, out_path: str,
             jobs: int = 1) -> HaarSummary:
    spec = parse_channel(channel)
    line = GghzLine.build(spec)
    chunk = max(64, math.ceil(n_samples / max(jobs, 1) / 8))
    tasks = [(lo, min(lo + chunk, n_samples), seed, channel, line)
             for lo in range(0, n_samples, chunk)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_haar_chunk, tasks))
    else:
        parts = [_haar_chunk(t) for t in tasks]
    rows = [row for part in parts for row in part]
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(HAAR_COLUMNS)
        writer.writerows(rows)
    return summarize_rows(rows, n_samples, seed, channel)


# ---------------------------------------------------------------------------
# curves and scans
# ---------------------------------------------------------------------------

def run_gghz_curve(points: int, channel: str, out_path: str) -> None:
    """CSV rows (m, ggm, bound_bits) for the two-term family."""
    if points < 2:
        raise ValueError("need at least 2 points")
    spec = parse_channel(channel)
    layout = _layout4()
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m", "ggm", "bound_bits"])
        for m in np.linspace(0.5, 1.0, points):
            st = make_gghz(GghzParams(p=float(m)), layout)
            rep = _bound_for(st, spec, CAMPAIGN_OPT)
            writer.writerow([_fmt(m), _fmt(1.0 - m), _fmt(rep.bound_bits)])


def run_channel_scan(family: str, points: int | None, seed: int,
                     out_path: str) -> None:
    """GHZ bound sweep: numeric optimizer vs closed form.

    ``ad``/``pd`` sweep the damping strength over [0, 1]; ``pauli`` draws
    random weight vectors from the probability simplex.
    """
    ghz = make_ghz(4, _layout4())
    rows = []
    if family in ("ad", "pd"):
        points = points if points is not None else 11
        make = (ChannelSpec.amplitude_damping if family == "ad"
                else ChannelSpec.phase_damping)
        header = ["param", "numeric_bound", "closed_form_bound", "minimizer_a",
                  "abs_deviation"]
        for t in np.linspace(0.0, 1.0, points):
            spec = make(float(t), float(t))
            rep = noisy_locc_bound(ghz, spec, DEFAULT_OPT)
            closed = closed_form_ghz_bound(spec)
            a = rep.minimizer[0].a if rep.minimizer else 1.0
            rows.append([_fmt(t), _fmt(rep.bound_bits), _fmt(closed), _fmt(a),
                         _fmt(abs(rep.bound_bits - closed))])
    elif family == "pauli":
        points = points if points is not None else 50
        gen = np.random.default_rng(seed)
        header = ["draw", "q0", "q1", "q2", "q3", "numeric_bound",
                  "closed_form_bound", "minimizer_a", "abs_deviation"]
        for i in range(points):
            q = gen.dirichlet(np.ones(4))
            spec = ChannelSpec.pauli_correlated(q / q.sum())
            rep = covariant_chi(ghz, spec, DEFAULT_OPT)
            closed = closed_form_ghz_bound(spec)
            a = rep.minimizer[0].a if rep.minimizer else 1.0
            rows.append([str(i)] + [_fmt(v) for v in q]
                        + [_fmt(rep.bound_bits), _fmt(closed), _fmt(a),
                           _fmt(abs(rep.bound_bits - closed))])
    else:
        raise ValueError(f"channel-scan family must be ad, pd, or pauli, "
                         f"got {family!r}")
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# single-state modes
# ---------------------------------------------------------------------------

def parse_state_arg(text: str):
    text = text.strip()
    if text == "ghz":
        return make_ghz(4, _layout4())
    if text.startswith("gghz:"):
        vals = [float(v) for v in text[len("gghz:"):].split(",")]
        if len(vals) == 1:
            vals.append(0.0)
        if len(vals) != 2:
            raise ValueError("gghz state takes p[,phi]")
        return make_gghz(GghzParams(p=vals[0], phi=vals[1]), _layout4())
    with open(text) as fh:
        return load_state(fh.read())


def run_bound(state_arg: str, channel: str, write=print) -> BoundReport:
    state = parse_state_arg(state_arg)
    spec = parse_channel(channel)
    write(f"state: {state_arg} (n={state.n_qubits}, roles="
          f"{' '.join(state.layout.roles)})")
    write(f"channel: {channel}")
    write(f"global_capacity_bits: {_fmt(global_capacity(state))}")
    write(f"classical_threshold_bits: {_fmt(state.layout.n_senders)}")
    rep = _bound_for(state, spec, DEFAULT_OPT)
    label = "noiseless_bound" if spec.is_identity else "noisy_bound"
    write(f"{label}_bits: {_fmt(rep.bound_bits)}")
    write(f"term_S_R1_bits: {_fmt(rep.term_S_R1)}")
    write(f"term_S_R2_bits: {_fmt(rep.term_S_R2)}")
    write(f"term_min_entropy_bits: {_fmt(rep.term_min_entropy)}")
    write(f"which_side: {rep.which_side}")
    for side, mins in ((1, rep.minimizer_side1), (2, rep.minimizer_side2)):
        desc = "; ".join(f"a={_fmt(p.a)} theta1={_fmt(p.theta1)} "
                         f"theta2={_fmt(p.theta2)}" for p in mins)
        write(f"minimizer_side{side}: {desc}")
    value, scan = ggm(state)
    write(f"ggm: {_fmt(value)} (argmax_cut={scan.argmax_label})")
    return rep


def run_ggm(state_arg: str, write=print) -> float:
    state = parse_state_arg(state_arg)
    value, scan = ggm(state)
    write(f"state: {state_arg}")
    write(f"ggm: {_fmt(value)}")
    write(f"argmax_cut: {scan.argmax_label}")
    for label, lam2 in scan.entries:
        write(f"cut {label}: max_schmidt_sq={_fmt(lam2)}")
    return value


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved settings for one CLI invocation."""

    mode: str
    n_samples: int = 50000
    seed: int = 42
    channel: str = "none"
    out: str | None = None
    points: int | None = None
    jobs: int = 1
    state: str = "ghz"
    family: str = "ad"

    def __post_init__(self):
        if self.mode not in ("haar", "gghz-curve", "channel-scan", "bound", "ggm"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "haar" and self.n_samples < 1:
            raise ValueError("haar mode needs n >= 1")
        if self.mode == "gghz-curve" and (self.points or 2) < 2:
            raise ValueError("gghz-curve needs at least 2 points")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def _read_config(path: str) -> dict[str, str]:
    out = {}
    with open(path) as fh:
        for i, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{i}: expected key=value, got {raw!r}")
            key, _, val = line.partition("=")
            out[key.strip()] = val.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="densecode",
        description="LOCC dense-coding capacity bounds and multipartite "
                    "entanglement for multiqubit states.")
    sub = p.add_subparsers(dest="mode", required=True)

    def common(sp):
        sp.add_argument("--config", help="key=value defaults file")
        sp.add_argument("--seed", type=int, default=None,
                        help="RNG seed (default 42)")
        sp.add_argument("--channel", default=None,
                        help="none | ad:g1,g2 | pd:p1,p2 | pauli:q0,q1,q2,q3 "
                             "| pauli-gen:<16 values>")
        sp.add_argument("--out", default=None, help="output CSV path")

    sp = sub.add_parser("haar", help="Monte Carlo campaign over Haar states")
    common(sp)
    sp.add_argument("--n", type=int, default=None,
                    help="number of samples (default 50000)")
    sp.add_argument("--jobs", type=int, default=None, help="worker processes")

    sp = sub.add_parser("gghz-curve", help="two-term reference curve")
    common(sp)
    sp.add_argument("--points", type=int, default=None,
                    help="sweep points (default 201)")

    sp = sub.add_parser("channel-scan", help="GHZ bound vs closed form")
    common(sp)
    sp.add_argument("--family", default=None, help="ad | pd | pauli")
    sp.add_argument("--points", type=int, default=None)

    sp = sub.add_parser("bound", help="capacity bounds for one state")
    common(sp)
    sp.add_argument("--state", default=None,
                    help="ghz | gghz:p[,phi] | <state file>")

    sp = sub.add_parser("ggm", help="GGM of one state")
    common(sp)
    sp.add_argument("--state", default=None)

    return p


_DEFAULTS = {"seed": 42, "channel": "none", "n": 50000, "jobs": 1,
             "points": None, "state": "ghz", "out": None, "family": "ad"}


def _resolve(args: argparse.Namespace, key: str, config: dict, cast):
    val = getattr(args, key, None)
    if val is None and key in config:
        val = cast(config[key])
    if val is None:
        val = _DEFAULTS[key]
    return val


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = _read_config(args.config) if args.config else {}
        cfg = ExperimentConfig(
            mode=args.mode,
            n_samples=_resolve(args, "n", config, int),
            seed=_resolve(args, "seed", config, int),
            channel=_resolve(args, "channel", config, str),
            out=_resolve(args, "out", config, str),
            points=_resolve(args, "points", config, int),
            jobs=_resolve(args, "jobs", config, int),
            state=_resolve(args, "state", config, str),
            family=_resolve(args, "family", config, str))
        if cfg.mode == "haar":
            out = cfg.out or "haar.csv"
            summary = run_haar(cfg.n_samples, cfg.seed, cfg.channel, out,
                               jobs=cfg.jobs)
            for line in summary.lines():
                print(line)
            print(f"csv: {out}")
        elif cfg.mode == "gghz-curve":
            out = cfg.out or "gghz_curve.csv"
            run_gghz_curve(cfg.points or 201, cfg.channel, out)
            print(f"csv: {out}")
        elif cfg.mode == "channel-scan":
            out = cfg.out or "channel_scan.csv"
            run_channel_scan(cfg.family, cfg.points, cfg.seed, out)
            print(f"csv: {out}")
        elif cfg.mode == "bound":
            run_bound(cfg.state, cfg.channel)
        elif cfg.mode == "ggm":
            run_ggm(cfg.state)
        return EXIT_OK
    except (ValueError, StateFormatError, OSError) as exc:
        print(f"densecode: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OptimizationError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"densecode: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
