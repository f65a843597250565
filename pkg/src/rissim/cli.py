"""``rissim`` command line.

Exit codes: 0 success, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from rissim.config import PHASE_POLICIES, ConfigError, LinkConfig, load_config, parse_grid

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _pathloss(text):
    try:
        parts = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected d1,d2,freqGHz, got {text!r}") from None
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected d1,d2,freqGHz, got {text!r}")
    return parts


def _trials(text):
    return int(float(text))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rissim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sw = sub.add_parser("sweep", help="Monte Carlo BER sweep and/or theory curve")
    sw.add_argument("-v", "--verbose", action="store_true")
    sw.add_argument("--config", type=Path, help="flat TOML file with LinkConfig keys")
    sw.add_argument("--scheme", choices=("mimo", "sm"))
    sw.add_argument("--tx", type=int)
    sw.add_argument("--rx", type=int)
    sw.add_argument("--n-ris", type=int)
    sw.add_argument("--mod-order", type=int)
    sw.add_argument("--modulation", choices=("psk", "qam"))
    sw.add_argument("--variant", choices=PHASE_POLICIES)
    sw.add_argument("--quantize-levels", type=int)
    sw.add_argument("--sigma-e2", type=float)
    sw.add_argument("--pathloss", type=_pathloss, metavar="D1,D2,FREQ_GHZ")
    sw.add_argument("--esn0", metavar="START:STEP:STOP")
    sw.add_argument("--trials", type=_trials, help="maximum trials per point")
    sw.add_argument("--min-errors", type=int)
    sw.add_argument("--chunk-trials", type=int)
    sw.add_argument("--seed", type=int)
    sw.add_argument("--workers", type=int)
    sw.add_argument("--quadrature-order", type=int)
    sw.add_argument("--theory", action="store_true", default=None,
                    help="also evaluate the union-bound ABEP")
    sw.add_argument("--no-sim", action="store_true", help="theory curve only")
    sw.add_argument("--noiseless", action="store_true", default=None)
    sw.add_argument("--normalize-total-power", action="store_true", default=None)
    sw.add_argument("--out", type=Path, help="CSV path (default: stdout)")
    sw.add_argument("--plot", type=Path, help="also write a gnuplot script here")

    mu = sub.add_parser("mu", help="single-reflector channel mean versus the antenna-count formula")
    mu.add_argument("-v", "--verbose", action="store_true")
    mu.add_argument("--max-antennas", type=int, default=4)
    mu.add_argument("--trials", type=_trials, default=100_000)
    mu.add_argument("--seed", type=int, default=0)
    mu.add_argument("--variant", choices=("verbatim", "signed"), default="verbatim")
    mu.add_argument("--out", type=Path)
    return parser


def _sweep_config(args) -> LinkConfig:
    base = load_config(args.config) if args.config else LinkConfig(theory=bool(args.no_sim))
    overrides = dict(
        scheme=args.scheme, tx=args.tx, rx=args.rx, n_ris=args.n_ris, mod_order=args.mod_order,
        modulation=args.modulation, variant=args.variant, quantize_levels=args.quantize_levels,
        sigma_e2=args.sigma_e2, pathloss=args.pathloss,
        esn0_db=parse_grid(args.esn0) if args.esn0 else None,
        max_trials=args.trials, min_bit_errors=args.min_errors, chunk_trials=args.chunk_trials,
        seed=args.seed, workers=args.workers, quadrature_order=args.quadrature_order,
        theory=args.theory, noiseless=args.noiseless,
        normalize_total_power=args.normalize_total_power,
        out=str(args.out) if args.out else None,
    )
    if args.no_sim:
        overrides.update(simulate=False, theory=True)
    return base.with_overrides(**overrides)


def _cmd_sweep(args) -> int:
    from rissim.io import emit_csv, emit_gnuplot, emit_provenance, write_csv
    from rissim.sweep import run

    cfg = _sweep_config(args)
    result = run(cfg)
    if args.out:
        emit_csv(result, args.out)
        emit_provenance(result, args.out.with_name(args.out.name + ".meta.json"))
        if args.plot:
            emit_gnuplot(args.out, args.plot)
    else:
        write_csv(result, sys.stdout)
    return EXIT_OK


def _cmd_mu(args) -> int:
    from rissim.analysis import mu_formula, mu_statistics

    if args.max_antennas < 1 or args.trials < 1:
        raise ConfigError("max-antennas and trials must be positive")
    rng = np.random.default_rng(args.seed)
    lines = ["tx,rx,mu_formula,mu_estimate,mu_stderr,imag_estimate"]
    for tx in range(1, args.max_antennas + 1):
        for rx in range(1, args.max_antennas + 1):
            est = mu_statistics(tx, rx, args.trials, rng, args.variant)
            lines.append(f"{tx},{rx},{mu_formula(tx, rx):.9g},{est.mean.real:.9g},"
                         f"{est.stderr_real:.9g},{est.mean.imag:.9g}")
    text = "\n".join(lines) + "\n"
    if args.out:
        try:
            args.out.write_text(text)
        except OSError as exc:
            raise OSError(exc.errno, f"cannot write {args.out}: {exc.strerror}") from exc
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_mu(args)
    except ConfigError as exc:
        print(f"rissim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"rissim: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"rissim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
