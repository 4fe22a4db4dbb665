"""Command line runner: ``geomtomo {list,run,all}``."""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor

from .scenarios import REGISTRY, list_scenarios, make_scenario, run_scenario
from .sphere import rng

# flag name -> scenario parameter name
_FLAGS = {
    "eps": "eps",
    "n": "n",
    "k": "k",
    "samples": "samples",
    "grid": "grid",
    "seed": "seed",
    "harmonic_degree": "L",
}


def read_config(path: str) -> dict:
    """Plain ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key = key.strip().replace("-", "_")
            out[_FLAGS.get(key, key)] = value.strip()
    return out


def _overrides(args, name: str) -> dict:
    """Config values, then flags; only keys the scenario accepts are kept for
    ``all``, while ``run`` reports unknown keys."""
    params = read_config(args.config) if args.config else {}
    for flag, key in _FLAGS.items():
        v = getattr(args, flag, None)
        if v is not None:
            params[key] = v
    if args.command == "all":
        params = {k: v for k, v in params.items() if k in REGISTRY[name].defaults}
    return params


def _run_one(name, params, out_dir, fmt):
    r = run_scenario(make_scenario(name, **params), out_dir, fmt)
    return r.to_dict()


def _report(d: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps({k: d[k] for k in ("scenario", "params", "metrics", "verdict", "files")},
                          sort_keys=True)
    rows = [f"{d['scenario']},{k},{v!r}" for k, v in d["metrics"].items()]
    rows.append(f"{d['scenario']},verdict,{d['verdict']}")
    return "\n".join(rows)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="geomtomo", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list registered scenarios with defaults")
    for cmd in ("run", "all"):
        s = sub.add_parser(cmd, help="run one scenario" if cmd == "run" else "run every scenario")
        if cmd == "run":
            s.add_argument("--scenario", required=True, choices=sorted(REGISTRY))
        else:
            s.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
        s.add_argument("--eps", type=float)
        s.add_argument("--n", type=int)
        s.add_argument("--k", type=int)
        s.add_argument("--samples", type=int)
        s.add_argument("--grid", type=int)
        s.add_argument("--seed", type=int)
        s.add_argument("--harmonic-degree", dest="harmonic_degree", type=int)
        s.add_argument("--out-dir", dest="out_dir")
        s.add_argument("--format", choices=("json", "csv"), default="json")
        s.add_argument("--config", help="key=value file, overridden by flags")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for s in list_scenarios():
            params = " ".join(f"{k}={v}" for k, v in s.params.items())
            print(f"{s.name}\t{params}\n    {s.description}")
        return 0
    try:
        if args.command == "run":
            jobs = [(args.scenario, _overrides(args, args.scenario))]
        else:
            jobs = []
            for name in REGISTRY:
                params = _overrides(args, name)
                if "seed" in params and "seed" in REGISTRY[name].defaults:
                    # independent per-scenario seeds from the master seed
                    params["seed"] = int(rng(int(params["seed"]), name).integers(2**31))
                jobs.append((name, params))
        for name, params in jobs:
            make_scenario(name, **params)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.command == "all" and args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            results = list(ex.map(_run_one, *zip(*jobs), [args.out_dir] * len(jobs),
                                  [args.format] * len(jobs)))
    else:
        results = [_run_one(n, p, args.out_dir, args.format) for n, p in jobs]
    for d in results:
        print(_report(d, args.format))
    return 0 if all(d["verdict"] == "pass" for d in results) else 1


if __name__ == "__main__":
    sys.exit(main())
