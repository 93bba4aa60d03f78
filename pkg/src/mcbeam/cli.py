"""Command line interface: gen / solve / experiment."""

import argparse
import sys

from . import channel, harness
from .baselines import equipartition, one_group
from .channel import ChannelGenConfig, generate, load
from .sca import sca_solve, write_trace
from .sdr import extract_schedule, randomize, ratio_bound, sdr_solve


def _cmd_gen(args):
    cfg = ChannelGenConfig(
        M=args.M, K=args.K, Q=args.Q, scenario=args.scenario,
        qos_target_db=args.qos_db, noise_variance=args.noise_var,
        shadow_sigma_db=args.shadow_db, seed=args.seed,
    )
    cs = generate(cfg)
    channel.save(cs, args.out)
    print(f"wrote {args.out}: M={cs.M} K={cs.K} Q={cs.Q} {cs.scenario} seed={cs.seed}")
    return 0


def _print_schedule(schedule):
    assign = ",".join(str(q + 1) for q in schedule.assign)
    print(f"assign={assign}")
    print(f"min_margin={schedule.margin.min():.12g}")


def _cmd_solve(args):
    cs = load(args.channels)
    if args.method == "sdr":
        sol = sdr_solve(cs, tol=args.tol)
        rr = randomize(sol, cs, L=args.L, seed=args.seed)
        print(f"v_sdr_lb={sol.value:.12g}")
        print(f"power={rr.best_power:.12g}")
        print(f"ratio={rr.best_power / sol.value:.12g}")
        print(f"ratio_bound={ratio_bound(cs):.12g}")
        print(f"admm_iterations={sol.iterations}")
        _print_schedule(extract_schedule(rr.best_W, cs))
    elif args.method == "sca":
        report = sca_solve(cs, seed=args.seed, inner_iters=args.inner_iters)
        if args.trace:
            write_trace(report, args.trace)
        print(f"power={report.power:.12g}")
        print(f"outer_iterations={report.outer_iters}")
        print(f"converged={report.converged}")
        _print_schedule(extract_schedule(report.final_W, cs))
    else:
        fn = one_group if args.method == "onegroup" else equipartition
        result = fn(cs, seed=args.seed, L=args.L, tol=args.tol)
        print(f"power={result.power:.12g}")
        _print_schedule(result.schedule)
    return 0


def _cmd_experiment(args):
    cfg = harness.load_config(args.config)
    harness.run_experiment(cfg, out_dir=args.out, jobs=args.jobs)
    print(f"wrote {args.out}/summary.csv")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="mcbeam",
        description="Joint multicast beamforming and user scheduling solvers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a channel file")
    p.add_argument("--M", type=int, required=True, help="antennas")
    p.add_argument("--K", type=int, required=True, help="users")
    p.add_argument("--Q", type=int, required=True, help="orthogonal channels")
    p.add_argument("--scenario", choices=channel.SCENARIOS, default="general")
    p.add_argument("--qos-db", type=float, default=3.0, dest="qos_db")
    p.add_argument("--noise-var", type=float, default=1.0, dest="noise_var")
    p.add_argument("--shadow-db", type=float, default=0.5, dest="shadow_db")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_gen)

    p = sub.add_parser("solve", help="solve one channel instance")
    p.add_argument("--channels", required=True)
    p.add_argument("--method", choices=harness.METHODS, default="sca")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--L", type=int, default=1000)
    p.add_argument("--inner-iters", type=int, default=400, dest="inner_iters")
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--trace", default=None, help="per-iteration trace CSV (sca only)")
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("experiment", help="run a Monte-Carlo sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(fn=_cmd_experiment)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
