#!/usr/bin/env python

__license__ = "GPL"
__version__ = "1.0.0"

import argparse
import sys

from wignerness import core
from wignerness.network import load_network
from wignerness.util import ConfigError, WignernessError, error

COMMANDS = ["ness", "evolve", "entropy", "profile", "sweep", "fock-check", "bench"]
METHODS = ["dense", "lyapunov", "jacobi"]


### LOAD ARGs ###

def build_parser():
    parser = argparse.ArgumentParser(prog="wignerness",
                                     description='Wigner entropy production in Gaussian bosonic networks')

    ### required args
    parser.add_argument('command', help='Command', choices=COMMANDS)
    parser.add_argument('--config', help='Network JSON File', required=True)

    ### optional args
    parser.add_argument('--out', help='Output Directory', required=False, default=".")
    parser.add_argument('--seed', help='Monte-Carlo Seed', required=False, type=int, default=None)
    parser.add_argument('--samples', help='Monte-Carlo Samples per Channel', required=False, type=int, default=None)
    parser.add_argument('--Ls', help='Chain Lengths (comma separated)', required=False, type=str, default=None)
    parser.add_argument('--t-final', help='Final Time', required=False, type=float, default=None)
    parser.add_argument('--dt', help='Time Step', required=False, type=float, default=None)
    parser.add_argument('--n-max', help='Fock Cutoff per Mode', required=False, type=int, default=None)
    parser.add_argument('--threads', help='Worker Processes for Sweep', required=False, type=int, default=None)
    parser.add_argument('--method', help='Steady-State Solver', required=False, choices=METHODS, default=None)
    return parser


def parse_Ls(text):
    try:
        values = [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError("--Ls must be a comma separated list of integers (got %r)" % text)
    if not values:
        raise ConfigError("--Ls is empty")
    return values


def _option(flag, options, key, default=None):
    ### command line flag > "options" object of the config > default
    if flag is not None:
        return flag
    return options.get(key, default)


def run(args):
    _, options = load_network(args.config)
    if not isinstance(options, dict):
        raise ConfigError("'options' must be a JSON object")

    method = _option(args.method, options, "method", "dense")
    if method not in METHODS:
        raise ConfigError("unknown method %r" % method)
    Ls = args.Ls if args.Ls is not None else options.get("Ls")
    LValues = None if Ls is None else (parse_Ls(Ls) if isinstance(Ls, str) else [int(L) for L in Ls])

    if args.command == "ness":
        core.cmd_ness(configFile=args.config, outDir=args.out, method=method)
    elif args.command == "entropy":
        core.cmd_entropy(configFile=args.config,
                         outDir=args.out,
                         samples=int(_option(args.samples, options, "samples", core.DEFAULT_SAMPLES)),
                         seed=int(_option(args.seed, options, "seed", core.DEFAULT_SEED)),
                         method=method)
    elif args.command == "evolve":
        core.cmd_evolve(configFile=args.config,
                        outDir=args.out,
                        tFinal=_option(args.t_final, options, "t_final"),
                        dt=_option(args.dt, options, "dt"))
    elif args.command == "profile":
        core.cmd_profile(configFile=args.config, outDir=args.out)
    elif args.command == "sweep":
        core.cmd_sweep(configFile=args.config,
                       outDir=args.out,
                       LValues=LValues,
                       threads=_option(args.threads, options, "threads"))
    elif args.command == "fock-check":
        core.cmd_fock_check(configFile=args.config,
                            outDir=args.out,
                            tFinal=_option(args.t_final, options, "t_final"),
                            dt=_option(args.dt, options, "dt"),
                            nMax=_option(args.n_max, options, "n_max"))
    elif args.command == "bench":
        core.cmd_bench(configFile=args.config, outDir=args.out, LValues=LValues)


def main(argv=None):
    '''
    Returns:
        exit code: 0 success, 1 bad input, 2 invalid model, 3 numerical failure
    '''
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 1
    try:
        run(args)
    except WignernessError as e:
        error(str(e))
        return e.exit_code
    return 0


if __name__ == "__main__": sys.exit(main())
