"""Command-line entry point ``bbreg``.

Exit codes: 0 success, 1 a verified property failed, 2 usage error, 3 bad
input data (schema, missing coefficients, network).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import mockeuler as me
from . import newform as nf
from . import regulator as rg
from . import thetal as tl
from . import verify
from .coeffring import CoeffRing, ring_to_json
from .config import Config, load_config
from .errors import BBRegError, IndexNotInvertible, NetworkError, SchemaError, SizeCapExceeded
from .groupring import build_filtration, vanishing_order
from .groups import TowerGroup, TowerSpec, is_fundamental_discriminant

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3


class UsageError(Exception):
    """Arguments are individually valid but inconsistent."""


class DataError(Exception):
    """An input file or remote record is unusable."""


def _dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _emit(text: str, output: str | None) -> None:
    if output:
        nf._atomic_write(Path(output), text)
    else:
        sys.stdout.write(text)


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def _load_system(path: str) -> me.MockEulerSystem:
    return me.MockEulerSystem.from_json(_read_json(path))


def _parse_units(text: str | None) -> dict[int, int]:
    if not text:
        return {}
    out = {}
    for item in text.split(","):
        ell, _, u = item.partition(":")
        try:
            out[int(ell)] = int(u)
        except ValueError as exc:
            raise UsageError(f"bad unit spec {item!r}; expected l:u") from exc
    return out


def _parse_primes(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x)
    except ValueError as exc:
        raise UsageError(f"bad prime list {text!r}") from exc


# ---------------------------------------------------------------------------
# sparse dumps


def _coeff(v: np.ndarray):
    return str(int(v[0])) if v.shape[-1] == 1 else [str(int(c)) for c in v]


def dump_tensor(value: np.ndarray, group: TowerGroup) -> list:
    """Nonzero entries of a (rows..., |group|, d) array as [rows, exponents, coeff]."""
    lead = value.shape[:-2]
    flat = value.reshape(-1, value.shape[-1])
    out = []
    for k in np.nonzero(flat.any(axis=-1))[0]:
        *rows, g = np.unravel_index(int(k), lead + (group.size,))
        exps = [int(e) for e in np.unravel_index(int(g), group.orders)] if group.orders else []
        out.append([[int(r) for r in rows], exps, _coeff(flat[k])])
    return out


def _group_json(group: TowerGroup) -> dict:
    axes = [f"sigma_{ell}" for ell in group.primes]
    if group.has_gamma1:
        axes += [f"gamma1_{i}" for i in range(len(group.tower.gamma1_invariants))]
    return {"level": str(group.T), "axes": axes, "orders": [str(o) for o in group.orders]}


def _check_group_cap(cfg: Config, sys_: me.MockEulerSystem, S: int) -> None:
    size = TowerGroup(sys_.tower, S, "Gamma").size * sys_.ring.d
    if size > cfg.group_size_cap:
        raise SizeCapExceeded(f"|Gamma_{S}| * d = {size} exceeds group_size_cap = {cfg.group_size_cap}")


def _level_arg(sys_: me.MockEulerSystem, level: int | None) -> int:
    S = sys_.top if level is None else level
    if sys_.top % S or S not in sys_.levels():
        raise UsageError(f"level {S} is not a divisor of the system's top level {sys_.top}")
    return S


# ---------------------------------------------------------------------------
# commands


def cmd_sieve(args, cfg: Config) -> int:
    if args.p < 3 or args.p % 2 == 0:
        raise UsageError("--p must be an odd prime")
    if args.disc >= 0 or not is_fundamental_discriminant(args.disc):
        raise UsageError(f"--disc {args.disc} is not a negative fundamental discriminant")
    if args.m < 1 or args.max < 0:
        raise UsageError("--m must be >= 1 and --max >= 0")
    sources = [s for s in (args.newform, args.label, args.delta or None) if s]
    if len(sources) > 1:
        raise UsageError("give at most one of --newform, --label, --delta")
    if args.kolyvagin and not sources:
        raise UsageError("--kolyvagin needs a coefficient source (--newform, --label or --delta)")
    f = None
    if args.newform:
        f = nf.load_newform(args.newform)
    elif args.label:
        f = nf.fetch_newform(cfg.lmfdb_base_url, args.label, cfg.cache_dir)
    elif args.delta:
        if args.max > cfg.series_bound_cap:
            raise UsageError(f"--max {args.max} exceeds series_bound_cap = {cfg.series_bound_cap}")
        f = nf.delta_coefficients(max(args.max, 2))
    level = args.level
    if f is not None:
        if level is not None and level != f.N:
            raise UsageError(f"--level {level} differs from the newform level {f.N}")
        level = f.N
    if level is None or level < 1:
        raise UsageError("--level is required (or give a newform)")
    params = {
        "disc": str(args.disc),
        "level": str(level),
        "p": str(args.p),
        "m": str(args.m),
        "max": str(args.max),
        "kolyvagin": args.kolyvagin,
        "newform": f.label if f is not None else None,
    }
    key = hashlib.sha256(json.dumps(params, sort_keys=True).encode()).hexdigest()[:16]
    cache = Path(cfg.cache_dir) / f"sieve-{key}.json"
    record = None
    if not args.no_cache and cache.exists():
        try:
            record = json.loads(cache.read_text(encoding="utf-8"))
            if record.get("params") != params:
                record = None
        except (OSError, json.JSONDecodeError):
            record = None
    if record is None:
        if args.kolyvagin:
            primes = nf.sieve_kolyvagin(f, args.disc, args.p, args.m, args.max)
        else:
            primes = nf.sieve_S(args.disc, level, args.p, args.m, args.max)
        record = {
            "schema": nf.SCHEMA,
            "kind": "sieve_result",
            "params": params,
            "count": str(len(primes)),
            "primes": [str(ell) for ell in primes],
        }
        if not args.no_cache:
            try:
                nf._atomic_write(cache, _dumps(record))
            except OSError:
                pass
    if args.sidecar:
        nf._atomic_write(Path(args.sidecar), _dumps(record))
    sys.stdout.write("".join(f"{ell}\n" for ell in record["primes"]))
    return EXIT_OK


def cmd_verify(args, cfg: Config) -> int:
    seed = cfg.seed if args.seed is None else args.seed
    system = _load_system(args.system) if args.system else None
    suite = args.suite
    if system is not None and suite == "all":
        suite = "compat"
    try:
        report = verify.run(suite, seed, args.trials, system)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(_dumps(report), args.output)
    status = "PASS" if report["ok"] else "FAIL " + " ".join(report["failing"])
    print(f"verify {suite} seed={seed} trials={args.trials}: {status}", file=sys.stderr)
    return EXIT_OK if report["ok"] else EXIT_FAIL


def cmd_theta(args, cfg: Config) -> int:
    sys_ = _load_system(args.system)
    T = _level_arg(sys_, args.level)
    _check_group_cap(cfg, sys_, T)
    depth = args.depth or cfg.filtration_depth
    th = tl.theta(sys_, T)
    z = tl.zeta(sys_, T)
    filt = build_filtration(th.group, sys_.ring, depth)
    orders = {
        "theta": vanishing_order(th.value, filt),
        "zeta": vanishing_order(z.value, filt),
        "zeta_star": vanishing_order(tl.star(z).value, filt),
    }
    out = {
        "schema": nf.SCHEMA,
        "kind": "theta_report",
        "level": str(T),
        "ring": ring_to_json(sys_.ring),
        "depth": depth,
        "group": _group_json(th.group),
        "orders": orders,
        "theta": dump_tensor(th.value, th.group),
        "zeta": dump_tensor(z.value, z.group),
    }
    r = min(orders["theta"], orders["zeta"])
    if r < depth:
        lead = tl.leading_terms(sys_, T, r, depth=max(depth, r + 2))
        out["leading"] = {
            "r": r,
            "theta_class_zero": lead.theta.is_zero(),
            "zeta_class_zero": lead.zeta.is_zero(),
            "invariant_mod_p": {",".join(map(str, k)): v for k, v in sorted(lead.invariant.items())},
            "all_invariant": lead.all_invariant,
        }
    _emit(_dumps(out), args.output)
    return EXIT_OK


def _int_lift(u) -> str | list:
    return str(int(u.coeffs[0])) if len(u.coeffs) == 1 else [str(int(c)) for c in u.coeffs]


def cmd_lfunction(args, cfg: Config) -> int:
    sys_ = _load_system(args.system)
    S = _level_arg(sys_, args.level)
    _check_group_cap(cfg, sys_, S)
    depth = args.depth or cfg.filtration_depth
    report = tl.vanishing_report(sys_, S, rho=args.rho, depth=depth)
    q = sys_.ring.q
    factors = []
    ok = True
    for T in sys_.tower.divisors(S):
        exact = None
        if sys_.ring.d == 1:
            exact = 1
            for ell in sys_.tower.primes_of(S // T):
                u = int(sys_.units[ell].coeffs[0])
                exact *= (ell + 1 - u) * (ell + 1 + u)
        res = tl.compatibility_check(sys_, S, T)
        ok &= res.ok
        factors.append(
            {
                "T": str(T),
                "factor": str(exact) if exact is not None else None,
                "factor_mod_q": _int_lift(tl.euler_factor(sys_, S, T)),
                "compatible": res.ok,
            }
        )
    out = {
        "schema": nf.SCHEMA,
        "kind": "lfunction_report",
        "S": str(S),
        "ring": ring_to_json(sys_.ring),
        "q": str(q),
        "units": {str(ell): _int_lift(u) for ell, u in sorted(sys_.units.items())},
        "vanishing": report,
        "factors": factors,
        "compatible": ok,
    }
    if args.dump:
        L = tl.l_function(sys_, S)
        out["group"] = _group_json(L.group)
        out["L"] = dump_tensor(L.value, L.group)
    _emit(_dumps(out), args.output)
    return EXIT_OK if ok else EXIT_FAIL


def _graded_json(x) -> dict:
    zero = None
    if x.level + 1 <= x.filt.depth:
        zero = x.is_zero()
    return {
        "level": x.level,
        "is_zero": zero,
        "group": _group_json(x.filt.group),
        "rep": dump_tensor(x.rep, x.filt.group),
    }


def cmd_regulator(args, cfg: Config) -> int:
    rcfg = rg.RegulatorConfig.from_json(_read_json(args.input))
    pair, S = rcfg.pair, rcfg.S
    n = pair.rank
    primes = pair.tower.primes_of(S)
    lam = rg.lambda_S(n, rcfg.local, primes)
    reg = rg.regulator_S(pair, rcfg.lattice, rcfg.local, S)
    out = {
        "schema": nf.SCHEMA,
        "kind": "regulator_report",
        "S": str(S),
        "rank": n,
        "index_A": str(rcfg.lattice.index_A()),
        "index_B": str(rcfg.lattice.index_B(lam)),
        "B_S": str(rg.b_order(n, rcfg.local, primes)),
        "lambda_S": [[str(a) for a in row] for row in lam],
        "Reg_S": _graded_json(reg),
    }
    ok = True
    compat = []
    for T in pair.tower.divisors(S):
        if T == S:
            continue
        res = rg.regulator_compatibility_check(pair, rcfg.lattice, rcfg.local, S, T)
        ok &= res.ok
        compat.append({"T": str(T), "B_T": str(res.b_T), "factor": str(res.factor), "ok": res.ok})
    out["compatibility"] = compat
    if args.system:
        sys_ = _load_system(args.system)
        if sys_.tower != pair.tower or sys_.ring != pair.ring:
            raise DataError("system and regulator config use different towers or rings")
        rep = rg.leading_term_report(sys_, rcfg, sha_order=args.sha)
        out["comparison"] = {k: v for k, v in rep.items()}
    _emit(_dumps(out), args.output)
    return EXIT_OK if ok else EXIT_FAIL


def _tower_ring(args) -> tuple[TowerSpec, CoeffRing]:
    try:
        tower = TowerSpec(args.disc, _parse_primes(args.primes))
        ring = CoeffRing(args.p, args.m, args.d)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return tower, ring


def cmd_gen_system(args, cfg: Config) -> int:
    tower, ring = _tower_ring(args)
    seed = cfg.seed if args.seed is None else args.seed
    units = _parse_units(args.units)
    top = args.top or tower.top
    for ell in tower.primes_of(top):
        units.setdefault(ell, 0)
    try:
        system = me.gen_system(
            seed, tower, ring, args.eps, units, rank=args.rank, noise=not args.no_noise, top=top,
            vanishing_order=args.vanishing_order,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(_dumps(system.to_json()), args.output)
    return EXIT_OK


def cmd_gen_regulator(args, cfg: Config) -> int:
    tower, ring = _tower_ring(args)
    seed = cfg.seed if args.seed is None else args.seed
    S = args.level or tower.top
    try:
        rcfg = rg.random_configuration(seed, tower, ring, args.rank, S, _parse_units(args.units) or None)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(_dumps(rcfg.to_json()), args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bbreg", description="Exact checks for mock Euler systems and regulators.")
    parser.add_argument("--config", help="JSON config file (default: $BBREG_CONFIG)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sieve", help="list admissible auxiliary primes")
    p.add_argument("--disc", type=int, required=True, help="negative fundamental discriminant D")
    p.add_argument("--level", type=int, help="level N of the newform")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--max", type=int, required=True, help="upper bound for l")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--newform", help="newform coefficient file (bbreg/1 JSON)")
    src.add_argument("--label", help="LMFDB newform label, fetched or read from the cache")
    src.add_argument("--delta", action="store_true", help="use the level-1 weight-12 form computed locally")
    p.add_argument("--kolyvagin", action="store_true", help="also require p^m | a_l")
    p.add_argument("--sidecar", help="write the JSON record here as well")
    p.add_argument("--no-cache", action="store_true")
    p.set_defaults(func=cmd_sieve)

    p = sub.add_parser("verify", help="run randomised property suites")
    p.add_argument("--suite", choices=verify.SUITES + ("all",), default="all")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--system", help="check this mock system instead of random ones (compat suite)")
    p.add_argument("--output", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("theta", help="theta and zeta elements of a system")
    p.add_argument("--system", required=True)
    p.add_argument("--level", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--output")
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("lfunction", help="L-function orders and compatibility factors")
    p.add_argument("--system", required=True)
    p.add_argument("--level", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--rho", type=int)
    p.add_argument("--dump", action="store_true", help="include the full element")
    p.add_argument("--output")
    p.set_defaults(func=cmd_lfunction)

    p = sub.add_parser("regulator", help="regulator of a mock pairing configuration")
    p.add_argument("--input", required=True, help="regulator_config JSON")
    p.add_argument("--system", help="mock system for the leading-term comparison")
    p.add_argument("--sha", type=int, default=1, help="order used for the Sha factor")
    p.add_argument("--output")
    p.set_defaults(func=cmd_regulator)

    for name, func, helptext in (
        ("gen-system", cmd_gen_system, "generate a coherent mock Euler system"),
        ("gen-regulator", cmd_gen_regulator, "generate a random regulator configuration"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--disc", type=int, default=-163)
        p.add_argument("--primes", default="5,11", help="comma-separated tower primes")
        p.add_argument("--p", type=int, default=3)
        p.add_argument("--m", type=int, default=2)
        p.add_argument("--d", type=int, default=1)
        p.add_argument("--units", help="comma-separated l:u pairs")
        p.add_argument("--seed", type=int)
        p.add_argument("--output")
        if name == "gen-system":
            p.add_argument("--eps", type=int, choices=(1, -1), default=1)
            p.add_argument("--rank", type=int, default=1)
            p.add_argument("--top", type=int)
            p.add_argument("--vanishing-order", type=int)
            p.add_argument("--no-noise", action="store_true")
        else:
            p.add_argument("--rank", type=int, default=1)
            p.add_argument("--level", type=int)
        p.set_defaults(func=func)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
    except SchemaError as exc:
        print(f"bbreg: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args, cfg)
    except (UsageError, SizeCapExceeded) as exc:
        print(f"bbreg {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, SchemaError, NetworkError, IndexNotInvertible, BBRegError) as exc:
        print(f"bbreg {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
