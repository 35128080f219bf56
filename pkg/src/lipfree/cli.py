"""Command line interface: ``lipfree <subcommand> ...``.

Exit status is 0 on success, 1 on a domain error (a JSON object on stderr)
and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys

import numpy as np

from . import __version__
from .daugavet import classify_all, classify_pair, find_daugavet_pair, threads_from_env
from .errors import BadSpec, LipFreeError, ParseError
from .free_space import Chain, kr_norm, molecule, tol_gap
from .gallery import KINDS, SpaceSpec, build
from .lipschitz import f_xy, mcshane_extend, whitney_extend
from .metric import Config, FiniteMetricSpace, space_diagnostics
from .spaceio import atomic_write, dumps_report, load_space, round_sig, save_space


class UsageError(Exception):
    pass


def _indices(text: str, what: str) -> list[int]:
    try:
        out = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"{what} must be comma-separated integers, got {text!r}") from None
    if not out:
        raise UsageError(f"{what} is empty")
    return out


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"{what} must be comma-separated numbers, got {text!r}") from None


def _pair(text: str) -> tuple[int, int]:
    idx = _indices(text, "pair")
    if len(idx) != 2:
        raise UsageError(f"a pair needs exactly two indices, got {text!r}")
    return idx[0], idx[1]


def parse_chain(M: FiniteMetricSpace, text: str, auto_balance: bool = False) -> Chain:
    """Parse ``"1:1,3:1,0:-2"``; with ``auto_balance`` the residual goes to the base."""
    weights: dict[int, float] = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            k, w = item.split(":")
            k, w = int(k), float(w)
        except ValueError:
            raise UsageError(f"bad chain term {item!r}; expected index:weight") from None
        if not 0 <= k < M.n:
            raise UsageError(f"chain index {k} out of range for n={M.n}")
        weights[k] = weights.get(k, 0.0) + w
    if auto_balance:
        weights[M.base] = weights.get(M.base, 0.0) - sum(weights.values())
    return Chain(M, weights)


def _coerce(value: str):
    try:
        return json.loads(value)
    except json.JSONDecodeError:
        return value


def _gallery_params(extra: list[str]) -> dict:
    params = {}
    it = iter(extra)
    for key in it:
        if not key.startswith("--"):
            raise UsageError(f"unexpected argument {key!r}")
        name, eq, val = key[2:].partition("=")
        if not eq:
            try:
                val = next(it)
            except StopIteration:
                raise UsageError(f"parameter --{name} needs a value") from None
        params[name.replace("-", "_")] = _coerce(val)
    return params


def _emit(doc: dict, out: str | None) -> None:
    text = dumps_report(doc)
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _norm_doc(M: FiniteMetricSpace, mu: Chain, certificate: bool) -> dict:
    flow, cert = kr_norm(M, mu)
    doc = {
        "chain": {str(k): w for k, w in mu.weights.items()},
        "primal_cost": flow.cost,
        "dual_value": cert.value,
        "gap": flow.cost - cert.value,
        "gap_tolerance": tol_gap(flow.cost),
    }
    if certificate:
        doc["flow"] = [[a, b, w] for a, b, w in flow.arcs]
        doc["certificate"] = cert.f.values
        doc["certificate_lipschitz_norm"] = cert.f.norm
    return doc


def build_report(M: FiniteMetricSpace, timestamp: bool = True, threads: int | None = None) -> dict:
    """Full pipeline: summary, diagnostics, classification and norm samples."""
    summary = classify_all(M, threads=threads)
    samples = []
    if M.n >= 2:
        D = M.dist
        far = np.unravel_index(int(np.argmax(D)), D.shape)
        probes = [tuple(int(i) for i in far)]
        probes += [tuple(p.as_list()) for p in summary.strongly_exposed_resolved[:4]]
        near = np.where(np.eye(M.n, dtype=bool), np.inf, D)
        probes.append(tuple(int(i) for i in np.unravel_index(int(np.argmin(near)), D.shape)))
        seen = set()
        for x, y in probes:
            key = (min(x, y), max(x, y))
            if key in seen:
                continue
            seen.add(key)
            flow, cert = kr_norm(M, molecule(M, x, y).chain)
            samples.append({"pair": [x, y], "distance": D[x, y], "primal_cost": flow.cost,
                            "dual_value": cert.value, "gap": flow.cost - cert.value})
    doc = {
        "tool": {"name": "lipfree", "version": __version__},
        "config": M.cfg.as_dict(),
        "space": {"name": M.name, "n": M.n, "base_point": M.base,
                  "diameter": M.diameter, "mesh": M.mesh},
        "diagnostics": space_diagnostics(M).as_dict(),
        "classification": summary.as_dict(include_records=False),
        "strongly_exposed_pairs": [r.as_dict() for r in summary.records
                                   if r.verdict.value == "StronglyExposedCandidate"],
        "norm_certificates": samples,
    }
    if timestamp:
        doc["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return doc


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lipfree", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"lipfree {__version__}")
    p.add_argument("--tol-triangle", type=float, default=1e-9)
    p.add_argument("--tol-eq", type=float, default=1e-9)
    p.add_argument("--tol-margin", type=float, default=1e-9)
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("validate", help="check a space file")
    s.add_argument("space")

    s = sub.add_parser("gallery", help="build an example space; extra --key value pairs are params")
    s.add_argument("kind", choices=KINDS)
    s.add_argument("--out", required=True)

    s = sub.add_parser("norm", help="free-space norm of a chain")
    s.add_argument("--space", required=True)
    s.add_argument("--chain", required=True)
    s.add_argument("--certificate", action="store_true")
    s.add_argument("--auto-balance", action="store_true")

    s = sub.add_parser("classify", help="classify molecules")
    s.add_argument("--space", required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--pair")
    g.add_argument("--all", action="store_true")
    s.add_argument("--records", action="store_true", help="include every pair record")
    s.add_argument("--out")

    s = sub.add_parser("daugavet", help="search for a Daugavet pair against f_xy of a probe pair")
    s.add_argument("--space", required=True)
    s.add_argument("--subset", required=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--probe", required=True)
    s.add_argument("--out")

    s = sub.add_parser("extend", help="McShane and Whitney extensions")
    s.add_argument("--space", required=True)
    s.add_argument("--subset", required=True)
    s.add_argument("--values", required=True)
    s.add_argument("--lipschitz-constant", type=float, required=True)
    s.add_argument("--out")

    s = sub.add_parser("report", help="full analysis report")
    s.add_argument("--space", required=True)
    s.add_argument("--out")
    s.add_argument("--no-timestamp", action="store_true")
    return p


def _run(args, extra: list[str]) -> int:
    cfg = Config(args.tol_triangle, args.tol_eq, args.tol_margin)
    if args.cmd == "gallery":
        M = build(SpaceSpec(args.kind, _gallery_params(extra)), cfg)
        save_space(M, args.out)
        _emit({"written": args.out, "name": M.name, "n": M.n}, None)
        return 0
    if extra:
        raise UsageError(f"unrecognized arguments: {' '.join(extra)}")

    M = load_space(args.space, cfg)
    if args.cmd == "validate":
        _emit({"valid": True, "name": M.name, "n": M.n, "base_point": M.base,
               "diameter": M.diameter, "mesh": M.mesh}, None)
    elif args.cmd == "norm":
        mu = parse_chain(M, args.chain, args.auto_balance)
        _emit(_norm_doc(M, mu, args.certificate), None)
    elif args.cmd == "classify":
        if args.all:
            doc = classify_all(M, threads=threads_from_env()).as_dict(args.records)
        else:
            doc = classify_pair(M, *_pair(args.pair)).as_dict()
        _emit(doc, args.out)
    elif args.cmd == "daugavet":
        x, y = _pair(args.probe)
        res = find_daugavet_pair(M, _indices(args.subset, "subset"), f_xy(M, x, y), args.eps)
        _emit({"probe": [x, y], **res.as_dict()}, args.out)
    elif args.cmd == "extend":
        N = _indices(args.subset, "subset")
        vals = _floats(args.values, "values")
        L = args.lipschitz_constant
        lo, hi = mcshane_extend(M, N, vals, L), whitney_extend(M, N, vals, L)
        _emit({"subset": N, "values": vals, "lipschitz_constant": L,
               "mcshane": lo.values, "whitney": hi.values,
               "mcshane_norm": lo.norm, "whitney_norm": hi.norm}, args.out)
    elif args.cmd == "report":
        doc = build_report(M, timestamp=not args.no_timestamp, threads=threads_from_env())
        _emit(doc, args.out)
    return 0


def run_cli(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args, extra = parser.parse_known_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.cmd != "gallery" and extra:
            parser.error(f"unrecognized arguments: {' '.join(extra)}")
        return _run(args, extra)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"lipfree: error: {exc}\n")
        return 2
    except (LipFreeError, OSError, IndexError, ValueError) as exc:
        if isinstance(exc, LipFreeError):
            payload = exc.to_dict()
        else:
            payload = {"error": type(exc).__name__, "message": str(exc)}
        sys.stderr.write(json.dumps(round_sig(payload), sort_keys=True, default=str) + "\n")
        return 1


def main() -> None:
    sys.exit(run_cli())


__all__ = ["run_cli", "main", "parse_chain", "build_report", "BadSpec", "ParseError"]
