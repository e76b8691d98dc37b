"""Command-line front end: ``lookahead <game> [options]``.

Each subcommand writes CSV (default) or JSON to ``--out`` or stdout and a
one-line summary to stderr. Exit status is 0 on success, 1 when a check
fails and 2 on bad input or when an enumeration cap is exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import cournot, gsp, routing, shapley, utility
from .engine import (
    Evaluator,
    LookaheadConfig,
    LookaheadError,
    enumerate_equilibria,
    random_walk,
    ratio_to_optimum,
)
from .oracle import selftest


@dataclass
class ExperimentConfig:
    game: str
    instance: str | None = None
    depth: int | None = None
    order: str | None = None
    model: str | None = None
    steps: int | None = None
    seed: int = 0
    out: str | None = None
    format: str = "csv"
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


@dataclass
class Result:
    columns: list
    rows: list
    summary: str = ""
    ok: bool = True
    meta: dict = field(default_factory=dict)


def _num(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    return x


def render(result: Result, fmt: str) -> str:
    if fmt == "json":
        rows = [{c: _num(v) for c, v in zip(result.columns, r)} for r in result.rows]
        payload = {"rows": rows, **{k: _num(v) for k, v in result.meta.items()}}
        return json.dumps(payload, indent=2, default=_num) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(result.columns)
    for r in result.rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


# -- subcommands -------------------------------------------------------------


def run_gsp(cfg: ExperimentConfig) -> Result:
    x = cfg.extra
    order = cfg.order or "average"
    depth = cfg.depth or 2
    include_self = not x.get("exclude_self", False)
    if x.get("random"):
        rng = np.random.default_rng(cfg.seed)
        instances = []
        for _ in range(x["random"]):
            n = int(rng.integers(1, x.get("max_bidders", 6) + 1))
            t = int(rng.integers(1, x.get("max_bidders", 6) + 1))
            instances.append(gsp.random_instance(rng, n, t))
        assignment = None
    else:
        data = _load(cfg.instance) if cfg.instance else gsp.BAD_EXAMPLE.to_json()
        instances = [gsp.GspInstance.from_json(data)]
        assignment = data.get("assignment")

    if x.get("check"):
        inst = instances[0]
        winners = assignment or list(range(min(inst.n, inst.slots)))
        bids = gsp.profile_for_assignment(inst, tuple(winners))
        game = gsp.GspGame(inst)
        lcfg = gsp.gsp_config(order, depth, include_self, cfg.model or "leaf")
        eq = Evaluator(game, lcfg).is_equilibrium(bids)
        truthful = gsp.is_output_truthful(inst, bids)
        cols = ["instance_id", "order_model", "bids", "equilibrium", "welfare", "opt_welfare",
                "output_truthful"]
        row = [0, order, " ".join(repr(b) for b in bids), eq, gsp.welfare(inst, bids),
               gsp.optimal_welfare(inst), truthful]
        summary = f"equilibrium={str(eq).lower()} output_truthful={str(truthful).lower()}"
        return Result(cols, [row], summary)

    rows = []
    for k, inst in enumerate(instances):
        report = gsp.gsp_equilibria(inst, order, depth, include_self, cfg.model or "leaf")
        rows.extend([list(r.values()) for r in report.rows(k)])
    cols = ["instance_id", "order_model", "equilibrium_id", "welfare", "opt_welfare",
            "output_truthful"]
    untruthful = sum(1 for r in rows if not r[-1])
    return Result(cols, rows, f"instances={len(instances)} equilibria={len(rows)} "
                  f"not_output_truthful={untruthful}")


def run_cournot(cfg: ExperimentConfig) -> Result:
    rows = cournot.foresight_curve(cfg.extra.get("k_max", 40))
    cols = list(cournot.CURVE_COLUMNS)
    data = [[r.k] + [float(getattr(r, c)) for c in cols[1:]] for r in rows]
    peak = max(rows, key=lambda r: r.output_gain_pct)
    return Result(cols, data, f"peak_output_gain_k={peak.k} limit_q={rows[-1].q!r}")


def run_routing(cfg: ExperimentConfig) -> Result:
    inst = routing.RoutingInstance.from_json(_load(cfg.instance)) if cfg.instance \
        else routing.example_instance()
    model = cfg.model or "leaf"
    mode = cfg.extra.get("mode", "lemmas")
    opt, _ = routing.optimum(inst)
    if mode == "lemmas":
        report = routing.verify_lemma_suite(inst, cfg.extra.get("trials", 50), cfg.seed, model)
        rows = [[r.trial, r.inequality_id, r.lhs, r.rhs, r.holds] for r in report.rows]
        bad = len(report.violations())
        return Result(["trial", "inequality_id", "lhs", "rhs", "holds"], rows,
                      f"rows={len(rows)} violations={bad}", ok=bad == 0, meta={"optimum": opt})
    if mode == "walk":
        game = routing.RoutingGame(inst)
        start = tuple(int(s) for s in np.random.default_rng(cfg.seed).integers(game.shape))
        steps = cfg.steps
        if steps is None:
            steps = routing.dynamics_length(inst, game.social_value(start), opt)
        traj = random_walk(game, start, steps, routing.routing_config(model), cfg.seed)
        rows = _walk_rows(traj, opt, maximize=False)
        return Result(["step", "mover", "social_value", "optimum", "ratio"], rows,
                      f"final_ratio={rows[-1][-1]!r}")
    if mode == "equilibria":
        game = routing.RoutingGame(inst)
        eqs = enumerate_equilibria(game, routing.routing_config(model))
        rows = [[k, game.social_value(s), opt, game.social_value(s) / opt if opt else math.inf]
                for k, s in enumerate(eqs)]
        worst = max((r[-1] for r in rows), default=math.nan)
        return Result(["equilibrium_id", "total_latency", "optimum", "ratio"], rows,
                      f"equilibria={len(rows)} worst_ratio={worst!r}")
    raise LookaheadError(f"unknown routing mode {mode!r}")


def run_utility(cfg: ExperimentConfig) -> Result:
    x = dict(cfg.extra)
    if cfg.instance:
        x.update(_load(cfg.instance))
    cols = ["step", "mover", "social_value", "optimum", "ratio"]
    if x.get("construction", "basic") == "basic":
        kappa = x.get("kappa", 120.0)
        lcfg = LookaheadConfig(depth=cfg.depth or 2, payoff_model=cfg.model or "leaf",
                               order=cfg.order or "average")
        report = utility.basic_utility_equilibria(kappa, lcfg)
        game = utility.BasicUtilityGame(kappa).as_game()
        labels = list(game.strategies[0])
        start = (labels.index("G"), labels.index("G"))
        traj = random_walk(game, start, cfg.steps if cfg.steps is not None else 20, lcfg, cfg.seed)
        rows = _walk_rows(traj, report.optimum, maximize=True)
        eqs = ";".join(",".join(s) for s in report.equilibria)
        return Result(cols, rows, f"equilibria={eqs} ratio={report.ratio!r}",
                      meta={"equilibria": [list(s) for s in report.equilibria],
                            "ratio": report.ratio})
    game = utility.SteinerGame(x.get("q", 2))
    traj = utility.steiner_walk(game, cfg.depth or game.k, cfg.steps if cfg.steps is not None else 300,
                                cfg.seed, order=cfg.order or "average")
    rows = _walk_rows(traj, game.optimum(), maximize=True)
    tail = traj.values[len(traj.values) // 3 :]
    ratio = game.optimum() / float(tail.mean())
    return Result(cols, rows, f"long_run_value={float(tail.mean())!r} ratio={ratio!r}",
                  meta={"long_run_ratio": ratio})


def run_shapley(cfg: ExperimentConfig) -> Result:
    inst = shapley.ShapleyInstance.from_json(_load(cfg.instance)) if cfg.instance \
        else shapley.default_instance()
    k = cfg.depth or inst.n
    run = shapley.shapley_dynamics(inst, k, cfg.order or "worst",
                                   steps=cfg.steps if cfg.steps is not None else 200,
                                   seed=cfg.seed, pool=cfg.extra.get("pool", "distinct"))
    rows = _walk_rows(run.trajectory, run.optimum, maximize=False)
    return Result(["step", "mover", "total_cost", "optimum", "ratio"], rows,
                  f"final_ratio={run.ratio!r} bound={inst.n / k!r}")


def run_selftest(cfg: ExperimentConfig) -> Result:
    trials = cfg.extra.get("trials", 1000)
    counts = selftest(trials, cfg.seed)
    ok = not any(counts.values())
    rows = [[name, trials, bad] for name, bad in counts.items()]
    return Result(["check", "trials", "mismatches"], rows,
                  ("PASS" if ok else "FAIL") + f" trials={trials}", ok=ok)


def _walk_rows(traj, optimum: float, maximize: bool) -> list:
    return [
        [t, "" if mover is None else mover, value, optimum,
         ratio_to_optimum(value, optimum, maximize)]
        for t, (_, mover, value) in enumerate(traj.steps)
    ]


def _load(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise LookaheadError(f"malformed instance file {path}: {exc}") from exc


RUNNERS = {
    "gsp": run_gsp,
    "cournot": run_cournot,
    "routing": run_routing,
    "utility": run_utility,
    "shapley": run_shapley,
    "engine-selftest": run_selftest,
}


def run(cfg: ExperimentConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    if cfg.game not in RUNNERS:
        print(f"error: unknown game {cfg.game!r}", file=stderr)
        return 2
    try:
        result = RUNNERS[cfg.game](cfg)
    except (LookaheadError, KeyError, TypeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    text = render(result, cfg.format)
    if cfg.out:
        with open(cfg.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if result.summary:
        print(result.summary, file=stderr)
    return 0 if result.ok else 1


# -- argument parsing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lookahead", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="game", required=True)

    def common(p, orders=("worst", "average", "fixed")):
        p.add_argument("--instance", help="JSON instance file")
        p.add_argument("--depth", type=int)
        p.add_argument("--order", choices=orders)
        p.add_argument("--model", choices=("leaf", "path"))
        p.add_argument("--steps", type=int)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        return p

    p = common(sub.add_parser("gsp", help="GSP auction equilibria"), ("worst", "average"))
    p.add_argument("--check", action="store_true",
                   help="test one balanced profile (the instance's 'assignment' or bidder order)")
    p.add_argument("--random", type=int, default=0, help="sweep N random instances instead")
    p.add_argument("--max-bidders", type=int, default=6)
    p.add_argument("--exclude-self", action="store_true",
                   help="next mover is never the player who just moved")

    p = common(sub.add_parser("cournot", help="Cournot foresight curve"))
    p.add_argument("--k-max", type=int, default=40)

    p = common(sub.add_parser("routing", help="selfish routing"), ("average",))
    p.add_argument("--mode", choices=("lemmas", "walk", "equilibria"), default="lemmas")
    p.add_argument("--trials", type=int, default=50)

    p = common(sub.add_parser("utility", help="basic-utility and Steiner games"),
               ("worst", "average"))
    p.add_argument("--construction", choices=("basic", "steiner"), default="basic")
    p.add_argument("--kappa", type=float, default=120.0)
    p.add_argument("--q", type=int, default=2)

    p = common(sub.add_parser("shapley", help="Shapley network design dynamics"),
               ("worst", "average"))
    p.add_argument("--pool", choices=("all", "distinct"), default="distinct")

    p = common(sub.add_parser("engine-selftest", help="engine vs brute force on random games"))
    p.add_argument("--trials", type=int, default=1000)
    return parser


BASE_FIELDS = {"game", "instance", "depth", "order", "model", "steps", "seed", "out", "format"}


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    values = vars(args)
    extra = {k: v for k, v in values.items() if k not in BASE_FIELDS}
    return ExperimentConfig(extra=extra, **{k: values[k] for k in BASE_FIELDS})


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(config_from_args(args))


if __name__ == "__main__":
    sys.exit(main())
