"""Command line front end.

``curvkit SUBCOMMAND [flags]`` prints one JSON report on standard output.
Exit status is 0 on success, 2 on usage or domain errors (reported as a
JSON ``error`` object) and 3 on I/O failures.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional

from .errors import CurvkitError
from .geometry import Triple, circumradius, menger_curvature
from .kernels import Cauchy, format_kernel, parse_kernel
from .measures import DiscreteMeasure, load_measure, write_csv
from .multiscale import DEFAULT_ETA1, build_lattice, classify_cubes, packing_ratio
from .operators import mv_residual, norm_chain, t1_norm_sq
from .permutations import (
    cauchy_permutation,
    endpoint_ts,
    omega_big_region,
    omega_region,
    permutation,
)
from .scan import (
    SAMPLERS,
    ScanConfig,
    constrained_inf_search,
    ratio_sup_search,
    region_boundary_scan,
    sign_change_search,
)

MAX_LEVEL = 24


class UsageError(CurvkitError):
    def __init__(self, flag: str, message: str):
        super().__init__(f"{flag}: {message}")
        self.flag = flag


class UnknownSubcommand(UsageError):
    pass


class BadFlag(UsageError):
    pass


class MissingRequired(UsageError):
    pass


@dataclass(frozen=True)
class RunPlan:
    subcommand: str
    kernel: Optional[str] = None
    io: Optional[str] = None
    params: dict = field(default_factory=dict)
    output: str = "-"


# ---------------------------------------------------------------------------
# flag conversion, each raising BadFlag that names the flag


def _float(flag, text, lo=None, hi=None, lo_open=False):
    try:
        v = float(text)
    except ValueError:
        raise BadFlag(flag, f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise BadFlag(flag, f"must be finite, got {text!r}")
    if lo is not None and (v < lo or (lo_open and v == lo)):
        raise BadFlag(flag, f"must be {'>' if lo_open else '>='} {lo}, got {v}")
    if hi is not None and v > hi:
        raise BadFlag(flag, f"must be <= {hi}, got {v}")
    return v


def _int(flag, text, lo=None, hi=None):
    try:
        v = int(text)
    except ValueError:
        raise BadFlag(flag, f"not an integer: {text!r}") from None
    if lo is not None and v < lo:
        raise BadFlag(flag, f"must be >= {lo}, got {v}")
    if hi is not None and v > hi:
        raise BadFlag(flag, f"must be <= {hi}, got {v}")
    return v


def _kernel(text):
    try:
        return format_kernel(parse_kernel(text))
    except CurvkitError as exc:
        raise BadFlag("--kernel", str(exc)) from None


def _triple(text):
    parts = text.split(",")
    if len(parts) != 6:
        raise BadFlag("--triple", f"expected 6 comma-separated numbers, got {len(parts)}")
    vals = tuple(_float("--triple", p) for p in parts)
    try:
        Triple.of(*vals)
    except CurvkitError as exc:
        raise BadFlag("--triple", str(exc)) from None
    return vals


def _grid(text):
    """``lo:hi:step`` (inclusive, step > 0) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise BadFlag("--grid", "expected lo:hi:step")
        lo, hi, step = (_float("--grid", p) for p in parts)
        if not step > 0 or hi < lo:
            raise BadFlag("--grid", "need step > 0 and lo <= hi")
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        if count > 100_000:
            raise BadFlag("--grid", f"{count} grid points is too many")
        return tuple(round(lo + k * step, 12) for k in range(count))
    vals = tuple(_float("--grid", p) for p in text.split(","))
    return vals


# flag name -> (params key, converter); converters see the raw string
CONVERTERS = {
    "--eps": ("eps", lambda s: _float("--eps", s, 0.0, lo_open=True)),
    "--t": ("t", lambda s: _float("--t", s)),
    "--n": ("n", lambda s: _int("--n", s, 1)),
    "--N": ("N", lambda s: _int("--N", s, 1)),
    "--alpha0": ("alpha0", lambda s: _float("--alpha0", s, 0.0, lo_open=True)),
    "--tau": ("tau", lambda s: _float("--tau", s, 1.0)),
    "--eta1": ("eta1", lambda s: _float("--eta1", s, 4.0, lo_open=True)),
    "--seed": ("seed", lambda s: _int("--seed", s, 0, 2 ** 64 - 1)),
    "--samples": ("samples", lambda s: _int("--samples", s, 1, 10 ** 9)),
    "--grid": ("grid", _grid),
    "--threads": ("threads", lambda s: _int("--threads", s, 1, 1024)),
    "--triple": ("triple", _triple),
    "--sampler": ("sampler", lambda s: _choice("--sampler", s, SAMPLERS)),
    "--refine": ("refine", lambda s: _int("--refine", s, 0, 10 ** 6)),
    "--mode": ("mode", lambda s: _choice("--mode", s, ("sign", "boundary", "constrained"))),
    "--clause": ("clause", lambda s: _choice("--clause", s, ("i", "ii"))),
    "--jmin": ("jmin", lambda s: _int("--jmin", s, 0, MAX_LEVEL)),
    "--jmax": ("jmax", lambda s: _int("--jmax", s, 0, MAX_LEVEL)),
}
FLAG_OF = {key: flag for flag, (key, _) in CONVERTERS.items()}


def _choice(flag, text, options):
    if text not in options:
        raise BadFlag(flag, f"{text!r} is not one of {', '.join(options)}")
    return text


SCAN_FLAGS = ("--sampler", "--samples", "--seed", "--refine", "--threads")
LATTICE_FLAGS = ("--eps", "--eta1", "--seed", "--jmin", "--jmax")

# subcommand -> (uses --kernel, uses --measure, numeric flags)
SUBCOMMANDS = {
    "perm": (True, False, ("--triple",)),
    "curvature": (False, False, ("--triple",)),
    "region": (False, False, ("--n", "--N")),
    "scan": (True, False, ("--mode", "--n", "--N", "--grid", "--alpha0", "--tau", "--clause")
             + SCAN_FLAGS),
    "measure-gen": (False, True, ()),
    "op-norm": (True, True, ("--eps", "--t", "--threads")),
    "mv-check": (True, True, ("--eps", "--threads")),
    "beta": (False, True, LATTICE_FLAGS),
    "packing": (False, True, LATTICE_FLAGS),
    "ratio-search": (False, False, ("--n", "--N") + SCAN_FLAGS),
}

DEFAULTS = {
    "scan": {"mode": "sign", "sampler": "uniform-box", "samples": 100_000, "seed": 0,
             "refine": 200, "threads": 1},
    "ratio-search": {"sampler": "uniform-box", "samples": 100_000, "seed": 0,
                     "refine": 200, "threads": 1},
    "op-norm": {"threads": 1},
    "mv-check": {"threads": 1},
    "beta": {"eta1": DEFAULT_ETA1, "seed": 0, "jmin": 0, "jmax": 4, "eps": 0.01},
    "packing": {"eta1": DEFAULT_ETA1, "seed": 0, "jmin": 0, "jmax": 4},
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        m = re.search(r"argument (\S+?)[:/ ]", message)
        raise BadFlag(m.group(1) if m else "<args>", message)


def _build_parser(sub: str) -> _Parser:
    kernel, measure, flags = SUBCOMMANDS[sub]
    p = _Parser(prog=f"curvkit {sub}", allow_abbrev=False)
    if kernel:
        p.add_argument("--kernel")
    if measure:
        p.add_argument("--measure")
    for f in flags:
        p.add_argument(f)
    p.add_argument("--out", default="-")
    p.add_argument("--no-timestamp", action="store_true")
    return p


def _require(params, sub, *keys):
    for k in keys:
        if k not in params:
            raise MissingRequired(FLAG_OF.get(k, k), f"required by {sub}")


def _check_plan(plan: RunPlan) -> None:
    sub, p = plan.subcommand, plan.params
    if sub in ("perm", "mv-check") and plan.kernel is None:
        raise MissingRequired("--kernel", f"required by {sub}")
    if SUBCOMMANDS[sub][1] and plan.io is None:
        raise MissingRequired("--measure", f"required by {sub}")
    if "n" in p and "N" in p and p["n"] > p["N"]:
        raise BadFlag("--N", f"need n <= N, got ({p['n']}, {p['N']})")
    if "jmin" in p and "jmax" in p and p["jmin"] > p["jmax"]:
        raise BadFlag("--jmax", f"need jmin <= jmax, got ({p['jmin']}, {p['jmax']})")
    if "alpha0" in p and not p["alpha0"] < math.pi / 2:
        raise BadFlag("--alpha0", "must lie in (0, pi/2)")
    if sub == "perm":
        _require(p, sub, "triple")
    elif sub == "curvature":
        _require(p, sub, "triple")
    elif sub in ("region", "ratio-search"):
        _require(p, sub, "n", "N")
    elif sub == "scan":
        if p["mode"] == "boundary":
            _require(p, sub, "n", "N", "grid")
        else:
            if plan.kernel is None:
                raise MissingRequired("--kernel", f"required by scan mode {p['mode']}")
            if isinstance(parse_kernel(plan.kernel), Cauchy):
                raise BadFlag("--kernel", "scans need a real kernel")
            if p["mode"] == "constrained":
                _require(p, sub, "alpha0", "tau")
    elif sub in ("op-norm", "mv-check"):
        _require(p, sub, "eps")
        if sub == "op-norm":
            if plan.kernel is None and "t" not in p:
                raise MissingRequired("--kernel", "op-norm needs --kernel or --t")
            if "t" in p and not abs(p["t"]) > math.sqrt(2.0):
                raise BadFlag("--t", f"the norm chain needs |t| > sqrt(2), got {p['t']}")
    elif sub == "packing":
        _require(p, sub, "eps")


def _attach_values(args, valued) -> list:
    """Rewrite ``--flag value`` as ``--flag=value`` so values like ``-1,0.5`` parse."""
    out, i = [], 0
    while i < len(args):
        a = args[i]
        if a in valued and i + 1 < len(args) and args[i + 1] not in valued:
            out.append(f"{a}={args[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def parse_args(argv) -> RunPlan:
    """Validate ``argv`` into a :class:`RunPlan` without running anything."""
    argv = list(argv)
    if not argv:
        raise MissingRequired("<subcommand>", f"choose one of {', '.join(SUBCOMMANDS)}")
    sub = argv[0]
    if sub not in SUBCOMMANDS:
        raise UnknownSubcommand(sub, f"choose one of {', '.join(SUBCOMMANDS)}")
    kernel, measure, flags = SUBCOMMANDS[sub]
    valued = set(flags) | {"--out"} | ({"--kernel"} if kernel else set()) | ({"--measure"} if measure else set())
    ns, extra = _build_parser(sub).parse_known_args(_attach_values(argv[1:], valued))
    if extra:
        raise BadFlag(extra[0], f"not accepted by {sub}")
    raw = vars(ns)
    kernel = _kernel(raw["kernel"]) if raw.get("kernel") is not None else None
    params = dict(DEFAULTS.get(sub, {}))
    for flag in SUBCOMMANDS[sub][2]:
        text = raw.get(flag.lstrip("-").replace("-", "_"))
        if text is not None:
            key, conv = CONVERTERS[flag]
            params[key] = conv(text)
    if raw["no_timestamp"]:
        params["no_timestamp"] = True
    plan = RunPlan(sub, kernel, raw.get("measure"), params, raw["out"])
    _check_plan(plan)
    return plan


def _format_value(key, v) -> str:
    if key in ("triple", "grid"):
        return ",".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_plan(plan: RunPlan) -> list[str]:
    """Argument vector that parses back to ``plan``."""
    # flag=value keeps values that start with "-" attached to their flag
    argv = [plan.subcommand]
    if plan.kernel is not None:
        argv.append(f"--kernel={plan.kernel}")
    if plan.io is not None:
        argv.append(f"--measure={plan.io}")
    for key, v in plan.params.items():
        if key != "no_timestamp":
            argv.append(f"{FLAG_OF[key]}={_format_value(key, v)}")
    if plan.params.get("no_timestamp"):
        argv.append("--no-timestamp")
    if plan.output != "-":
        argv.append(f"--out={plan.output}")
    return argv


# ---------------------------------------------------------------------------
# execution


def _scan_config(p) -> ScanConfig:
    return ScanConfig(sampler=p["sampler"], samples=p["samples"], seed=p["seed"],
                      refine_steps=p["refine"], threads=p["threads"])


def _region(n, N) -> dict:
    big, small = omega_big_region(n, N), omega_region(n, N)
    return {
        "nonnegative_region": {"complement_of": [big.excluded_lo, big.excluded_hi],
                               "includes_zero": big.includes_zero, "sigma": big.sigma},
        "sign_change_interval": [small.lo, small.hi],
        "endpoints": [{"label": lab, "t": t} for lab, t in endpoint_ts(n, N)],
    }


def _lattice(mu, p):
    return build_lattice(mu, p["jmin"], p["jmax"], seed=p["seed"])


def _run(plan: RunPlan):
    sub, p = plan.subcommand, plan.params
    spec = parse_kernel(plan.kernel) if plan.kernel is not None else None
    if sub == "perm":
        t = Triple.of(*p["triple"])
        if isinstance(spec, Cauchy):
            return {"value": cauchy_permutation(t)}
        return {"value": permutation(spec, t)}
    if sub == "curvature":
        t = Triple.of(*p["triple"])
        c = menger_curvature(t)
        return {"curvature": c, "curvature_sq": c * c, "circumradius": circumradius(t)}
    if sub == "region":
        return _region(p["n"], p["N"])
    if sub == "ratio-search":
        return ratio_sup_search(p["n"], p["N"], _scan_config(p)).to_dict()
    if sub == "scan":
        cfg = _scan_config(p)
        if p["mode"] == "boundary":
            pts = region_boundary_scan(p["n"], p["N"], p["grid"], cfg)
            return {"config": cfg.echo(), "points": [b.to_dict() for b in pts]}
        if p["mode"] == "constrained":
            return constrained_inf_search(spec, p["alpha0"], p["tau"], cfg,
                                          clause=p.get("clause")).to_dict()
        return sign_change_search(spec, cfg).to_dict()

    mu = load_measure(plan.io)
    if sub == "measure-gen":
        return mu
    if sub == "mv-check":
        return mv_residual(spec, mu, p["eps"], threads=p["threads"]).as_dict()
    if sub == "op-norm":
        out = {}
        if spec is not None:
            out["norm"] = math.sqrt(t1_norm_sq(spec, mu, p["eps"]))
        if "t" in p:
            out["chain"] = norm_chain(mu, p["eps"], p["t"], threads=p["threads"]).as_dict()
        return out
    cubes = _lattice(mu, p)
    cls = classify_cubes(mu, cubes, p["eps"], p["eta1"])
    if sub == "beta":
        return {"cubes": cls.records}
    roots = [c for c in cubes if c.j == p["jmin"]]
    return {"roots": [{"j": r.j, "jx": r.jx, "jy": r.jy, "mass": r.mass,
                       "ratio": packing_ratio(mu, cls.bad, r)} for r in roots],
            "bad_count": len(cls.bad), "cube_count": len(cubes)}


def _clean(obj):
    """Replace non-finite floats by strings so the output is strict JSON."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _config_echo(plan: RunPlan) -> dict:
    cfg = {"subcommand": plan.subcommand, "kernel": plan.kernel, "measure": plan.io}
    cfg.update({k: v for k, v in plan.params.items() if k != "no_timestamp"})
    return cfg


def _emit(doc: dict, stream, timestamp: bool = True, path: str = "-") -> None:
    if timestamp:
        doc["timestamp"] = datetime.now(timezone.utc).isoformat()
    text = json.dumps(_clean(doc), sort_keys=True) + "\n"
    if path == "-":
        stream.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _error_doc(exc: Exception, kind: str) -> dict:
    err = {"kind": kind, "type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, UsageError):
        err["flag"] = exc.flag
    return {"error": err}


def execute(plan: RunPlan, stream=None) -> int:
    """Run ``plan``, write its report and return the exit status."""
    stream = stream or sys.stdout
    stamp = not plan.params.get("no_timestamp")
    try:
        result = _run(plan)
        if isinstance(result, DiscreteMeasure):
            # measure-gen writes the atoms as CSV
            if plan.output == "-":
                stream.write("# re,im,weight\n")
                for a, b, c in result.to_rows():
                    stream.write(f"{a!r},{b!r},{c!r}\n")
            else:
                write_csv(result, plan.output)
            return 0
        _emit({"config": _config_echo(plan), "result": result}, stream, stamp, plan.output)
        return 0
    except OSError as exc:
        print(f"curvkit: {exc}", file=sys.stderr)
        _emit(_error_doc(exc, "io"), stream, stamp)
        return 3
    except (ValueError, ArithmeticError) as exc:
        print(f"curvkit: {exc}", file=sys.stderr)
        _emit(_error_doc(exc, "domain"), stream, stamp)
        return 2


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        plan = parse_args(argv)
    except UsageError as exc:
        print(f"curvkit: {exc}", file=sys.stderr)
        _emit(_error_doc(exc, "usage"), sys.stdout, "--no-timestamp" not in argv)
        return 2
    return execute(plan)


if __name__ == "__main__":
    sys.exit(main())
