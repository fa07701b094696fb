"""Command-line interface.

    mventropy [options] entropy  CONFIG NAME
    mventropy [options] refine   CONFIG NAME [NAME ...]
    mventropy [options] dynamics CONFIG NAME
    mventropy [options] compare  CONFIG_A CONFIG_B [--bijection 2,0,1]

Exit codes: 0 ok, 2 invalid config, 3 invariant violation, 4 solver
budget exceeded, 5 invalid isomorphism.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from fractions import Fraction

from .config import load_config
from .dynamics import (
    IsomorphismMap,
    entropy_sequence,
    h_bar,
    transport_partition,
    transport_system,
)
from .errors import ConfigError, InvariantViolation, MvEntropyError
from .partitions import NATURAL, entropy_H
from .refine import SolverConfig, min_entropy_refinement

DIGITS = 8


def fmt(x) -> str:
    return f"{float(x):.{DIGITS}f}"


def fmt_mass(x):
    if isinstance(x, Fraction):
        return {"fraction": f"{x.numerator}/{x.denominator}", "decimal": fmt(x)}
    return fmt(x)


class Run:
    """Effective settings of one invocation: config + flags."""

    def __init__(self, args, cfg):
        self.args = args
        self.cfg = cfg
        opts = cfg.options
        self.base = args.log_base or str(opts.get("log_base", NATURAL))
        self.numeric = args.numeric or opts.get("numeric", "rational")
        self.tolerance = args.tolerance
        self.n_max = args.n_max or int(opts.get("n_max", 4))
        self.solver = SolverConfig(
            mode=args.mode or opts.get("mode", "auto"),
            max_cells=args.max_cells or int(opts.get("max_cells", 32)),
            max_combos=args.max_combos or int(opts.get("max_combos", 5_000_000)),
            seed=args.seed if args.seed is not None else int(opts.get("seed", 0)),
            workers=args.workers,
        )
        self.system, self.partitions = cfg.build(self.numeric, self.tolerance)

    def partition(self, name):
        try:
            return self.partitions[name]
        except KeyError:
            known = ", ".join(sorted(self.partitions)) or "none"
            raise ConfigError(f"unknown partition {name!r} (known: {known})") from None

    def settings(self):
        s = self.solver
        return {
            "log_base": self.base, "numeric": self.numeric, "tolerance": self.tolerance,
            "n_max": self.n_max, "mode": s.mode, "max_cells": s.max_cells,
            "max_combos": s.max_combos, "seed": s.seed,
        }


def digest(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(p.encode() if isinstance(p, str) else json.dumps(p, sort_keys=True).encode())
        h.update(b"\0")
    return h.hexdigest()


def record(command, run_digest, outputs, certificates, timing=None):
    return {
        "command": command,
        "inputs_digest": run_digest,
        "outputs": outputs,
        "certificates": certificates,
        "timing": timing,
    }


def cmd_entropy(run: Run, name):
    A = run.partition(name)
    h = entropy_H(A, run.system.state, run.base)
    masses = [run.system.state(a) for a in A]
    out = {
        "partition": name,
        "log_base": run.base,
        "entropy": fmt(h.value),
        "masses": [fmt_mass(x) for x in masses],
    }
    return record("entropy", digest(run.cfg.digest, "entropy", name, run.settings()), out, [])


def cmd_refine(run: Run, names):
    parts = [run.partition(n) for n in names]
    sol = min_entropy_refinement(parts, run.system.state, run.base, run.solver)
    masses = sol.tensor.masses(run.system.state)
    out = {
        "partitions": list(names),
        "log_base": run.base,
        "entropy": fmt(sol.entropy.value),
        "lower_bound": fmt(sol.lower_bound),
        "bound_gap": None if sol.bound_gap is None else fmt(sol.bound_gap),
        "shape": list(sol.tensor.shape),
        "cells": [{"index": list(ix), "mass": fmt_mass(masses[ix])} for ix in sol.tensor.indices()],
    }
    return record(
        "refine", digest(run.cfg.digest, "refine", list(names), run.settings()),
        out, [sol.certificate],
    )


def cmd_dynamics(run: Run, name):
    A = run.partition(name)
    seq = entropy_sequence(run.system, A, run.n_max, run.solver, run.base)
    _, bar = h_bar(run.system, A, run.n_max, run.base)
    tol = run.system.space.numeric.tolerance
    flags = [hn <= hj + tol for hn, hj in zip(seq.values, bar.values)]
    out = {
        "partition": name,
        "log_base": run.base,
        "n": list(range(1, run.n_max + 1)),
        "H_n": [fmt(v) for v in seq.values],
        "H_n_over_n": [fmt(v) for v in seq.per_step],
        "running_inf": [fmt(v) for v in seq.running_inf],
        "h_estimate": fmt(seq.estimate),
        "join_entropy": [fmt(v) for v in bar.values],
        "join_over_n": [fmt(v) for v in bar.per_step],
        "h_bar_estimate": fmt(bar.per_step[-1]),
        "H_n_le_join": flags,
        "subadditivity_violations": [[n, k, fmt(e)] for n, k, e in seq.violations],
    }
    rec = record(
        "dynamics", digest(run.cfg.digest, "dynamics", name, run.settings()),
        out, seq.certificates,
    )
    if (seq.violations and seq.exact) or not all(flags):
        raise _violation(rec)
    return rec


def _violation(rec):
    err = InvariantViolation("H_n sequence violates subadditivity or the product bound")
    err.record = rec
    return err


def cmd_compare(run_a: Run, run_b: Run, bijection, names):
    n = len(run_a.system.space)
    sigma = tuple(range(n)) if bijection is None else tuple(bijection)
    iso = IsomorphismMap(run_a.system.space, run_b.system.space, sigma)
    iso.check_commutes(run_a.system, run_b.system)
    moved = transport_system(run_a.system, iso)
    rows = {}
    certs = []
    for name in names or sorted(run_a.partitions):
        A = run_a.partition(name)
        B = transport_partition(A, iso)
        sa = entropy_sequence(run_a.system, A, run_a.n_max, run_a.solver, run_a.base)
        sb = entropy_sequence(run_b.system, B, run_a.n_max, run_a.solver, run_a.base)
        target = run_b.partitions.get(name)
        rows[name] = {
            "H_n_a": [fmt(v) for v in sa.values],
            "H_n_b": [fmt(v) for v in sb.values],
            "delta": [fmt(abs(x - y)) for x, y in zip(sa.values, sb.values)],
            "max_delta": fmt(max(abs(x - y) for x, y in zip(sa.values, sb.values))),
            "target_partition_matches": None if target is None else all(
                t.equals(b) for t, b in zip(target, B)) and len(target) == len(B),
        }
        certs.extend(sa.certificates + sb.certificates)
    out = {
        "bijection": list(sigma),
        "transported_map": list(moved.tau.point_map),
        "log_base": run_a.base,
        "partitions": rows,
    }
    d = digest(run_a.cfg.digest, run_b.cfg.digest, "compare", list(sigma), names or [],
               run_a.settings())
    return record("compare", d, out, sorted(set(certs)))


def render(rec, output) -> str:
    if output == "json-lines":
        return json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n"
    if output == "csv":
        return _render_csv(rec)
    return _render_text(rec)


def _flat(x):
    if isinstance(x, dict) and set(x) == {"fraction", "decimal"}:
        return f"{x['fraction']} ({x['decimal']})"
    return x


def _render_text(rec) -> str:
    lines = [f"command: {rec['command']}", f"inputs_digest: {rec['inputs_digest']}"]
    out = rec["outputs"]
    base = out.get("log_base", NATURAL)
    unit = "nats" if base == NATURAL else "bits"
    for k, v in out.items():
        if k == "cells":
            for c in v:
                lines.append(f"  cell {tuple(c['index'])}: {_flat(c['mass'])}")
        elif k == "partitions" and isinstance(v, dict):
            for name, row in v.items():
                lines.append(f"partition {name}:")
                for rk, rv in row.items():
                    shown = ", ".join(map(str, rv)) if isinstance(rv, list) else rv
                    lines.append(f"  {rk}: {shown}")
        elif isinstance(v, list):
            lines.append(f"{k}: " + ", ".join(str(_flat(x)) for x in v))
        elif k in ("entropy", "lower_bound", "bound_gap", "h_estimate", "h_bar_estimate") and v is not None:
            lines.append(f"{k}: {v} {unit} (log base {base})")
        else:
            lines.append(f"{k}: {v}")
    lines.append("certificates: " + ", ".join(rec["certificates"]))
    if rec.get("timing") is not None:
        lines.append(f"timing: {rec['timing']} s")
    return "\n".join(lines) + "\n"


def _render_csv(rec) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    out = rec["outputs"]
    if rec["command"] == "dynamics":
        w.writerow(["n", "H_n", "H_n_over_n", "running_inf", "join_entropy", "join_over_n",
                    "H_n_le_join", "certificate"])
        for i, n in enumerate(out["n"]):
            w.writerow([n, out["H_n"][i], out["H_n_over_n"][i], out["running_inf"][i],
                        out["join_entropy"][i], out["join_over_n"][i], out["H_n_le_join"][i],
                        rec["certificates"][i]])
    elif rec["command"] == "refine":
        w.writerow(["index", "mass"])
        for c in out["cells"]:
            m = c["mass"]
            w.writerow([" ".join(map(str, c["index"])), m["fraction"] if isinstance(m, dict) else m])
    elif rec["command"] == "compare":
        w.writerow(["partition", "n", "H_n_a", "H_n_b", "delta"])
        for name, row in out["partitions"].items():
            for i, d in enumerate(row["delta"]):
                w.writerow([name, i + 1, row["H_n_a"][i], row["H_n_b"][i], d])
    else:
        w.writerow(["key", "value"])
        for k, v in out.items():
            w.writerow([k, json.dumps(v, sort_keys=True) if isinstance(v, (list, dict)) else v])
    return buf.getvalue()


def _bijection(text):
    try:
        return [int(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad bijection {text!r}; expected e.g. 2,0,1")


def build_parser():
    p = argparse.ArgumentParser(prog="mventropy", description=__doc__.split("\n\n")[0])
    p.add_argument("--log-base", choices=["e", "2"])
    p.add_argument("--mode", choices=["exact", "heuristic", "auto"])
    p.add_argument("--numeric", choices=["rational", "float"])
    p.add_argument("--tolerance", type=float)
    p.add_argument("--n-max", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--output", choices=["text", "csv", "json-lines"], default="text")
    p.add_argument("--max-cells", type=int)
    p.add_argument("--max-combos", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="include wall-clock time in records")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("entropy", help="entropy of one partition")
    s.add_argument("config")
    s.add_argument("name")
    s = sub.add_parser("refine", help="least-entropy common refinement")
    s.add_argument("config")
    s.add_argument("names", nargs="+")
    s = sub.add_parser("dynamics", help="H_n sequence, limit estimate and product join")
    s.add_argument("config")
    s.add_argument("name")
    s = sub.add_parser("compare", help="check an isomorphism and compare H_n on both sides")
    s.add_argument("config_a")
    s.add_argument("config_b")
    s.add_argument("--bijection", type=_bijection, help="target index of each source point")
    s.add_argument("--partition", action="append", dest="names")
    return p


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        if args.command == "compare":
            run = Run(args, load_config(args.config_a))
            rec = cmd_compare(run, Run(args, load_config(args.config_b)), args.bijection, args.names)
        else:
            run = Run(args, load_config(args.config))
            if args.command == "entropy":
                rec = cmd_entropy(run, args.name)
            elif args.command == "refine":
                rec = cmd_refine(run, args.names)
            else:
                rec = cmd_dynamics(run, args.name)
    except MvEntropyError as exc:
        partial = getattr(exc, "record", None)
        if partial is not None:
            stdout.write(render(partial, args.output))
        msg = f"error: {exc}"
        if exc.exit_code == 4:
            msg += " (rerun with --mode heuristic or --mode auto, or raise --max-cells/--max-combos)"
        print(msg, file=stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    if args.timing:
        rec["timing"] = round(time.perf_counter() - start, 6)
    stdout.write(render(rec, args.output))
    return 0


if __name__ == "__main__":
    sys.exit(main())
