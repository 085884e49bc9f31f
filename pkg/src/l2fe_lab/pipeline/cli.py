"""Command-line driver: ``l2fe-lab <command> [options]``.

Every command prints a small table to stdout; ``--out`` additionally
writes the same report as JSON.  Exit status is 0 on success, 2 on a
validation error and 1 on an I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .. import analysis
from ..attack import (
    PipeAdversary,
    center_guesser,
    far_adversary,
    noisy_oracle,
    oracle_adversary,
    random_guess_asr,
    reduction_adversary,
    reproduction_failure_rate,
    run_fe_game,
    run_ideal_primitive_game,
)
from ..core import (
    LabeledEmbedding,
    export_embeddings,
    first_per_user,
    load_embeddings,
    make_ball_distribution,
    normalize,
    sample_c_epsilon,
)
from ..errors import InvalidParameter, ValidationError
from ..schemes import jl_min_dimension
from . import service
from .store import StoreFile, load_store

log = logging.getLogger("l2fe_lab")

SCHEMES = ("mrp", "facialfe", "l2fe")


# --------------------------------------------------------------------------
# helpers


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidParameter(f"config {path}: {exc.msg} at line {exc.lineno}") from None
    if not isinstance(cfg, dict):
        raise InvalidParameter("config must be a JSON object")
    return cfg


def _scheme(args):
    cfg = _load_config(args.config)
    return service.build_scheme(args.scheme, cfg.get(args.scheme, {}))


def _need(args, name: str):
    v = getattr(args, name, None)
    if v is None:
        raise InvalidParameter(f"--{name.replace('_', '-')} is required for this command")
    return v


def _store(args) -> StoreFile:
    return load_store(_need(args, "store"))


def _clean(obj):
    if isinstance(obj, float):
        return None if math.isnan(obj) or math.isinf(obj) else obj
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)) and len(v) > 6:
        return f"[{len(v)} items]"
    return str(v)


def emit(report: dict, out) -> None:
    report = _clean(report)
    width = max((len(k) for k in report), default=0)
    for k, v in report.items():
        if isinstance(v, dict):
            print(f"{k}:")
            w2 = max((len(k2) for k2 in v), default=0)
            for k2, v2 in v.items():
                print(f"  {k2:<{w2}}  {_fmt(v2)}")
        else:
            print(f"{k:<{width}}  {_fmt(v)}")
    if out is not None:
        Path(out).write_text(json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _synth_distribution(args, dim: int):
    return make_ball_distribution(
        args.beta, dim, args.radius, bound=args.bound, seed=args.seed, layout=args.layout
    )


# --------------------------------------------------------------------------
# commands


def cmd_params(args) -> dict:
    scheme = _scheme(args)
    rep: dict = {"scheme": scheme.name, "params": scheme.params_dict()}
    rep["jl_min_dimension"] = {"k": args.k, "eps": args.jl_eps, "n": jl_min_dimension(args.k, args.jl_eps)}
    if scheme.name == "l2fe":
        p = scheme.params
        R = args.R if args.R is not None else analysis.min_radius(p.dim, p.secret_dim, p.modulus, args.alpha)
        sp = analysis.SecurityParams(
            m=p.dim, l=p.secret_dim, q=p.modulus, R=R, alpha=args.alpha,
            eps_fe=args.eps_fe, beta=args.beta, epsilon=args.epsilon,
        )
        er = analysis.certify_params(sp)
        rep["entropy"] = dict(er.to_dict(), R=R)
        rep["output_bits_within_bound"] = analysis.check_output_bits(p.out_bits, er)
    return rep


def cmd_synth(args) -> dict:
    spec = _synth_distribution(args, args.dim)
    rows = sample_c_epsilon(spec, args.per_ball)
    export_embeddings(rows, _need(args, "csv"))
    return {"users": spec.beta, "rows": len(rows), "dim": spec.dim, "radius": spec.radius, "csv": args.csv}


def cmd_ingest(args) -> dict:
    rows = load_embeddings(_need(args, "input"))
    if args.dim is not None and rows and rows[0].dim != args.dim:
        raise InvalidParameter(f"expected dimension {args.dim}, got {rows[0].dim}")
    if args.normalize:
        rows = [LabeledEmbedding(r.user_id, normalize(r.embedding)) for r in rows]
    export_embeddings(rows, _need(args, "csv"), dim=rows[0].dim if rows else args.dim)
    return {"rows": len(rows), "users": len(first_per_user(rows)), "normalized": bool(args.normalize), "csv": args.csv}


def cmd_enroll(args) -> dict:
    path = Path(_need(args, "store"))
    rows = first_per_user(load_embeddings(_need(args, "input")))
    if path.exists():
        store = load_store(path)
        if store.scheme != args.scheme:
            raise InvalidParameter(f"store holds {store.scheme!r} records, --scheme is {args.scheme!r}")
        for row in rows:
            service.enroll(row.user_id, row.embedding, store, args.seed, path)
    else:
        store = service.new_store(_scheme(args))
        for row in rows:
            service.enroll(row.user_id, row.embedding, store, args.seed)
        store.save(path)
    return {"scheme": store.scheme, "enrolled": len(rows), "total": len(store.records), "store": str(path)}


def cmd_auth(args) -> dict:
    store = _store(args)
    scheme = store.scheme_obj()
    rows = load_embeddings(_need(args, "input"))
    results = []
    for row in rows:
        uid = args.claim or row.user_id
        results.append({"probe": row.user_id, "claim": uid, "accept": service.authenticate(uid, row.embedding, store, scheme)})
    acc = sum(r["accept"] for r in results)
    return {"probes": len(results), "accepted": acc, "rejected": len(results) - acc, "results": results}


def cmd_breach(args) -> dict:
    dump = _need(args, "dump")
    service.breach_dump(_need(args, "store"), dump)
    return {"dump": dump, "bytes": Path(dump).stat().st_size}


def cmd_attack(args) -> dict:
    store = _store(args)
    scheme = store.scheme_obj()
    public = load_embeddings(args.public) if args.public else []
    if scheme.name != "mrp" and not public:
        raise InvalidParameter("--public embeddings are needed to fit the readout for FE schemes")
    readout = service.fit_public_readout(scheme, public, args.seed, args.ridge)
    recon = service.reconstruct(store, readout)
    rows = [LabeledEmbedding(u, v) for u, v in recon.items()]
    export_embeddings(rows, _need(args, "recon"))
    return {
        "scheme": scheme.name,
        "users": len(rows),
        "readout": "none" if readout is None else f"ridge({args.ridge:g})",
        "public_pairs": len(public) if readout is not None else 0,
        "recon": args.recon,
    }


def cmd_eval_accuracy(args) -> dict:
    store = _store(args)
    pairs = service.make_eval_pairs(load_embeddings(_need(args, "input")))
    return {"scheme": store.scheme, **service.eval_accuracy(pairs, store).to_dict()}


def cmd_eval_asr(args) -> dict:
    recon = {r.user_id: r.embedding for r in load_embeddings(_need(args, "recon"))}
    rep = service.attack_report(recon, load_embeddings(_need(args, "input")), args.t, args.trials, args.seed)
    d = rep.to_dict()
    d["baseline"] = "random guessing among enrolled users"
    return d


def cmd_eval_baseline(args) -> dict:
    users = first_per_user(load_embeddings(_need(args, "input")))
    mean, sd = random_guess_asr(users, args.t, args.trials, args.seed)
    return {"users": len(users), "t": args.t, "trials": args.trials, "baseline_asr_mean": mean, "baseline_asr_sd": sd}


def cmd_eval_leakage(args) -> dict:
    store = _store(args)
    scheme = store.scheme_obj()
    public = load_embeddings(args.public) if args.public else []
    readout = service.fit_public_readout(scheme, public, args.seed, args.ridge) if public or scheme.name == "mrp" else None
    if readout is None and scheme.name != "mrp":
        raise InvalidParameter("--public embeddings are needed to fit the readout for FE schemes")
    return service.leakage_report(store, readout, load_embeddings(_need(args, "input")), args.seed).to_dict()


def cmd_eval_game(args) -> dict:
    scheme = _scheme(args)
    dim = service.scheme_input_dim(scheme)
    dist = _synth_distribution(args, dim)
    t = args.t if args.t is not None else args.radius
    rep: dict = {"scheme": scheme.name, "adversary": args.adversary, "trials": args.trials, "t": t, "beta": args.beta}
    rep["baseline_adversary"] = "center of the first (most probable) ball"
    if args.adversary == "reduction":
        inner = noisy_oracle(args.noise)
        g1 = run_ideal_primitive_game(scheme, dist, inner, t, args.trials, args.seed, cheat=True)
        g0 = run_fe_game(scheme, dist, reduction_adversary(inner, scheme), args.trials, args.seed, cheat=True)
        delta = reproduction_failure_rate(scheme, dist, inner, args.trials, args.seed)
        rep.update(
            inner=g1.to_dict(), fe_game=g0.to_dict(), delta_hat=delta,
            predicted=(1 - delta) * g1.advantage, gap=g0.advantage - (1 - delta) * g1.advantage,
        )
        return rep
    cheat = args.adversary == "oracle"
    if args.adversary == "pipe":
        public = sample_c_epsilon(
            make_ball_distribution(args.beta, dim, args.radius, bound=args.bound, seed=args.seed + 1, layout=args.layout),
            max(1, args.public_size // args.beta),
        )
        adv = PipeAdversary(service.fit_public_readout(scheme, public, args.seed, args.ridge))
    else:
        adv = {"oracle": oracle_adversary, "far": far_adversary, "center": center_guesser}[args.adversary]
    rep.update(run_ideal_primitive_game(scheme, dist, adv, t, args.trials, args.seed, cheat=cheat).to_dict())
    return rep


# --------------------------------------------------------------------------
# parser


def _common(suppress: bool) -> argparse.ArgumentParser:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=d(0), help="master seed (u64)")
    p.add_argument("--scheme", choices=SCHEMES, default=d("l2fe"))
    p.add_argument("--config", default=d(None), help="JSON file with per-scheme overrides")
    p.add_argument("--store", default=d(None), help="store file (JSON lines)")
    p.add_argument("--out", default=d(None), help="write the report as JSON here")
    p.add_argument("-v", "--verbose", action="store_true", default=d(False))
    return p


def _synth_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--beta", type=int, default=20, help="number of balls (users)")
    p.add_argument("--dim", type=int, default=512)
    p.add_argument("--radius", type=float, default=0.3, help="ball radius eps")
    p.add_argument("--bound", type=int, default=1, help="box half-width R")
    p.add_argument("--layout", choices=("sphere", "box"), default="sphere")


def build_parser() -> argparse.ArgumentParser:
    common = _common(suppress=True)
    ap = argparse.ArgumentParser(prog="l2fe-lab", description=__doc__.splitlines()[0], parents=[_common(False)])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", parents=[common], help="show scheme parameters and entropy bounds")
    p.add_argument("--k", type=int, default=100, help="point count for the JL bound")
    p.add_argument("--jl-eps", type=float, default=0.5)
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--eps-fe", type=float, default=2.0**-40)
    p.add_argument("--beta", type=float, default=1000.0)
    p.add_argument("--epsilon", type=float, default=0.3)
    p.add_argument("--R", type=float, default=None, help="input box bound (default: the minimum admissible)")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("synth", parents=[common], help="sample a C_eps dataset to CSV")
    _synth_args(p)
    p.add_argument("--per-ball", type=int, default=2)
    p.add_argument("--csv", help="output CSV")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", parents=[common], help="validate an embedding CSV and write it canonically")
    p.add_argument("--input", help="input CSV (id,v0,...)")
    p.add_argument("--csv", help="output CSV")
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--normalize", action="store_true")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("enroll", parents=[common], help="enroll the first sample of each user")
    p.add_argument("--input")
    p.set_defaults(func=cmd_enroll)

    p = sub.add_parser("auth", parents=[common], help="authenticate every probe row")
    p.add_argument("--input")
    p.add_argument("--claim", default=None, help="claim this identity for every probe")
    p.set_defaults(func=cmd_auth)

    p = sub.add_parser("breach", parents=[common], help="dump the full store")
    p.add_argument("--dump")
    p.set_defaults(func=cmd_breach)

    p = sub.add_parser("attack", parents=[common], help="reconstruct embeddings from a breached store")
    p.add_argument("--public", default=None, help="public embeddings for fitting the readout")
    p.add_argument("--ridge", type=float, default=1.0)
    p.add_argument("--recon", help="output CSV of reconstructions")
    p.set_defaults(func=cmd_attack)

    ev = sub.add_parser("eval", help="evaluation reports").add_subparsers(dest="metric", required=True)
    p = ev.add_parser("accuracy", parents=[common])
    p.add_argument("--input")
    p.set_defaults(func=cmd_eval_accuracy)

    for name, func in (("asr", cmd_eval_asr), ("baseline", cmd_eval_baseline)):
        p = ev.add_parser(name, parents=[common])
        p.add_argument("--input", help="original embeddings CSV")
        p.add_argument("--t", type=float, default=1.103)
        p.add_argument("--trials", type=int, default=100)
        if name == "asr":
            p.add_argument("--recon", help="reconstructions CSV")
        p.set_defaults(func=func)

    p = ev.add_parser("leakage", parents=[common])
    p.add_argument("--input", help="original embeddings CSV")
    p.add_argument("--public", default=None)
    p.add_argument("--ridge", type=float, default=1.0)
    p.set_defaults(func=cmd_eval_leakage)

    p = ev.add_parser("game", parents=[common])
    _synth_args(p)
    p.add_argument("--adversary", choices=("pipe", "oracle", "far", "center", "reduction"), default="pipe")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--t", type=float, default=None, help="win radius (default: the ball radius)")
    p.add_argument("--noise", type=float, default=0.3, help="noisy-oracle offset for the reduction")
    p.add_argument("--public-size", type=int, default=1000)
    p.add_argument("--ridge", type=float, default=1.0)
    p.set_defaults(func=cmd_eval_game)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        report = args.func(args)
        emit(report, args.out)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
