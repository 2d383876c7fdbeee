"""``ltchain`` command line: encode/decode full nodes, cost studies and attack experiments."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import cost, experiments
from .adversary import best_point, sweep_attack
from .decoders import DECODERS, bp_decode, brh_decode, crh_decode, ofg_decode
from .lt import Epoch, build_rsd, generate_full_node, read_full_node, write_full_node
from .sim import ExperimentConfig, default_workers, load_config, run_experiment, to_csv


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"{self.prog}: error: {message}\n")


def _emit(rows: list[dict], args, header: list[str] | None = None) -> None:
    if args.format == "json":
        text = json.dumps(rows, indent=2, default=_json_default) + "\n"
    else:
        text = to_csv(rows, header)
    if getattr(args, "out", None) and args.out != "-":
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_default(v):
    if isinstance(v, np.generic):
        return v.item()
    raise TypeError(f"cannot serialize {type(v).__name__}")


def cmd_encode(args) -> None:
    rng = np.random.default_rng(args.seed)
    dist = build_rsd(args.k, args.c, args.delta)
    if args.epoch:
        with open(args.epoch, "rb") as fh:
            epoch = Epoch.from_bytes(fh.read(), args.k)
    elif args.random:
        epoch = Epoch.random(args.k, args.block_size, rng)
    else:
        epoch = None
    node = generate_full_node(epoch, args.S, dist, rng)
    if args.out and args.out != "-":
        with open(args.out, "w") as fh:
            write_full_node(node, fh)
    else:
        write_full_node(node, sys.stdout)


def cmd_decode(args) -> None:
    with open(args.node) as fh:
        node = read_full_node(fh)
    k = node.k
    rng = np.random.default_rng(args.seed)
    if args.decoder == "crh":
        if args.eta_c is None:
            raise ValueError("--eta-c is required for the crh decoder")
        out = crh_decode(node, args.eta_c, args.K_init, k, rng)
    else:
        K = node.S if args.K is None else args.K
        if not 1 <= K <= node.S:
            raise ValueError(f"--K must lie in [1, {node.S}]")
        picked = [node.droplets[i] for i in rng.choice(node.S, size=K, replace=False)]
        if args.decoder == "bp":
            out = bp_decode(picked, k)
        elif args.decoder == "ofg":
            out = ofg_decode(picked, k)
        else:
            out = brh_decode(picked, K, k)
    if args.recovered:
        if not (out.success and node.has_payloads()):
            raise ValueError("nothing to write: decoding failed or the node has no payloads")
        data = out.blocks().tobytes()
        with open(args.recovered, "wb") as fh:
            fh.write(data[: args.length] if args.length is not None else data)
    _emit([{
        "decoder": args.decoder, "success": out.success, "xor_count": out.xor_count,
        "droplets_used": out.droplets_used, "eta_b": out.eta_b,
    }], args)


def cmd_tradeoff(args) -> None:
    _emit(experiments.tradeoff(args.k, args.c, args.delta, args.trials, args.seed, args.S), args)


def cmd_optimize(args) -> None:
    rows = experiments.optimize_table(args.k, args.alpha, args.c, args.delta, args.trials, args.seed, args.S)
    _emit(rows, args, ["alpha", "K_min", "eta_min", "M_BR_min", "M_CR_min"])


def _sigma0(args) -> float | None:
    if args.sigma0 is not None and args.xi is not None:
        raise ValueError("give --sigma0 or --xi, not both")
    if args.xi is not None:
        return args.xi * args.sigma
    return args.sigma0


def cmd_attack(args) -> None:
    sigma0 = _sigma0(args)
    if sigma0 is None:
        if args.strategy != "blind":
            raise ValueError("--sigma0 or --xi is required for non-blind strategies")
        sigma0 = args.sigma
    cfg = ExperimentConfig(
        k=args.k, S=args.S, c=args.c, delta=args.delta, decoder=args.decoder, K=args.K,
        eta_c=args.eta_c, K_init=args.K_init, strategy=args.strategy, sigma=args.sigma,
        sigma0=sigma0, trials=args.trials, master_seed=args.seed, K_policy=args.K_policy,
    )
    res = run_experiment(cfg, workers=args.workers)
    _emit([{"sigma": args.sigma, "sigma0": sigma0, "failure_rate": res.failure_rate, "stderr": res.stderr}], args)


def cmd_attack_opt(args) -> None:
    dist = build_rsd(args.k, args.c, args.delta)
    sweep = sweep_attack(
        args.decoder, args.eta_c, args.k, args.S, args.nu, args.zeta, dist, args.trials,
        np.random.default_rng(args.seed), args.step, args.K, args.workers, args.K_policy,
    )
    best = best_point(sweep)
    rows = [{
        "sigma": p.sigma, "sigma0": p.sigma0, "failure_rate": p.failure_rate,
        "stderr": p.stderr, "argmax": p is best,
    } for p in sweep]
    _emit(rows, args)


def cmd_reproduce(args) -> None:
    rows = experiments.reproduce(args.target, args.trials, args.seed, args.k, args.workers)
    _emit(rows, args)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--config", help="flat key = value file supplying option defaults")
    p.add_argument("--seed", type=int, default=0)


def _code_params(p: argparse.ArgumentParser, k: int | None = None) -> None:
    p.add_argument("--k", type=int, default=k, required=k is None)
    p.add_argument("--c", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.1)


def _attack_params(p: argparse.ArgumentParser) -> None:
    _code_params(p, 20)
    p.add_argument("--S", type=int, default=60)
    p.add_argument("--decoder", choices=DECODERS, default="bp")
    p.add_argument("--K", type=int, help="droplets contacted (default: every survivor)")
    p.add_argument("--K-policy", dest="K_policy", choices=("strict", "cap"), default="strict")
    p.add_argument("--eta-c", dest="eta_c", type=int)
    p.add_argument("--K-init", dest="K_init", type=int)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--workers", type=int, default=default_workers())
    p.add_argument("--out", default="-")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ltchain", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("encode", help="write a full node of LT droplets")
    _common(p)
    _code_params(p)
    p.add_argument("--S", type=int, required=True)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--epoch", help="file whose bytes form the epoch")
    src.add_argument("--random", action="store_true", help="random epoch payloads")
    p.add_argument("--block-size", dest="block_size", type=int, default=8)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="rebuild an epoch from a full-node file")
    _common(p)
    p.add_argument("node", help="full-node file")
    p.add_argument("--decoder", choices=DECODERS, default="ofg")
    p.add_argument("--K", type=int)
    p.add_argument("--eta-c", dest="eta_c", type=int)
    p.add_argument("--K-init", dest="K_init", type=int)
    p.add_argument("--recovered", help="write recovered epoch bytes here")
    p.add_argument("--length", type=int, help="truncate recovered bytes to this length")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("tradeoff", help="overhead against XOR count for all decoders")
    _common(p)
    _code_params(p, 500)
    p.set_defaults(c=1.0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--S", type=int)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_tradeoff)

    p = sub.add_parser("optimize", help="mirroring-cost minimizers of the hybrid decoders")
    _common(p)
    _code_params(p, 10)
    p.add_argument("--alpha", type=float, nargs="+", default=[1, 2, 3, 4, 5])
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--S", type=int)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("attack", help="failure rate under one attack setting")
    _common(p)
    _attack_params(p)
    p.add_argument("--strategy", choices=("blind", "degree", "score", "minrank", "auto"), default="auto")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--sigma0", type=float)
    p.add_argument("--xi", type=float)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("attack-opt", help="budget-constrained attack sweep")
    _common(p)
    _attack_params(p)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--zeta", type=float, required=True)
    p.add_argument("--step", type=float, default=0.01)
    p.set_defaults(func=cmd_attack_opt)

    p = sub.add_parser("reproduce", help="run a named experiment grid")
    _common(p)
    p.add_argument("--target", choices=experiments.TARGETS, required=True)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--k", type=int)
    p.add_argument("--workers", type=int, default=default_workers())
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_reproduce)
    return parser


def _config_path(argv: list[str]) -> str | None:
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    """Install config-file values as defaults of the chosen subcommand."""
    path = _config_path(argv)
    command = next((t for t in argv if not t.startswith("-")), None)
    subs = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction)).choices
    if path is None or command not in subs:
        return
    sub = subs[command]
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in load_config(path).items():
        dest = key.replace("-", "_")
        action = actions.get(dest)
        if action is None or dest in ("help", "config"):
            raise ValueError(f"config key {key!r} is not an option of {command}")
        if action.nargs == "+":
            defaults[dest] = [action.type(v) for v in raw.replace(",", " ").split()]
        elif isinstance(action, argparse._StoreTrueAction):
            defaults[dest] = raw.lower() in ("1", "true", "yes")
        else:
            defaults[dest] = action.type(raw) if action.type else raw
        if action.choices is not None and defaults[dest] not in action.choices:
            raise ValueError(f"config value {raw!r} not allowed for {key}")
        action.required = False
    sub.set_defaults(**defaults)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        args.func(args)
    except (ValueError, OSError, cost.UnboundedError) as exc:
        print(f"ltchain: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
