"""
Main entry point for the Markovian stick-breaking toolkit.

Categories are 1-based on the command line and in every CSV file.
Exit codes: 0 success, 1 validation or parse error, 2 numerical-consistency
failure, 3 statistical-check failure.
"""
import os
import sys
import argparse
from pathlib import Path
from typing import List, Optional

import yaml
import pandas as pd
from dotenv import load_dotenv
from loguru import logger

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from generators import GeneratorMatrix, build, load_spec
from moments import MomentEngine, MomentQuery, QueryError
from numerics import MSBError, ValidationError
from posterior import PosteriorSmoother
from reports import (
    VerificationSuite, get_preset, smooth_preset, posterior_table, summary_table,
    read_counts, write_csv, write_svg
)
from sampler import MonteCarloSampler, RngStream, sample_msb, sample_data

DEFAULT_CONFIG = Path(__file__).parent / "config" / "config.yaml"


def setup_logging(config: dict, level: Optional[str] = None):
    """Configure logging"""
    settings = config.get('logging', {})
    level = level or os.getenv('MSB_LOG_LEVEL') or settings.get('level', 'INFO')
    log_file = os.getenv('MSB_LOG_FILE') or settings.get('file')

    # Remove default logger
    logger.remove()

    # Add console logger
    logger.add(
        sys.stderr,
        format=settings.get('console_format',
                            "<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | <level>{message}</level>"),
        level=level.upper()
    )

    # Add file logger
    if log_file:
        os.makedirs(os.path.dirname(log_file) or '.', exist_ok=True)
        logger.add(
            log_file,
            format=settings.get('format', "{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}"),
            level="DEBUG",
            rotation=settings.get('rotation', "10 MB"),
            retention=settings.get('retention', "7 days"),
            compression="zip"
        )


def load_config(config_path: Optional[str] = None) -> dict:
    """Load configuration from YAML file"""
    path = Path(config_path or os.getenv('MSB_CONFIG') or DEFAULT_CONFIG)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            config = yaml.safe_load(f) or {}
    except FileNotFoundError:
        raise ValidationError(f"config file not found: {path}")
    except yaml.YAMLError as e:
        raise ValidationError(f"cannot parse config file {path}: {e}")
    logger.debug(f"Configuration loaded from {path}")
    return config


def load_generator(path: str, config: dict) -> GeneratorMatrix:
    generator = build(load_spec(path), config)
    logger.info(f"Generator loaded from {path}: d={generator.dim}, theta^G={generator.theta_G:g}")
    return generator


def parse_category(token: str, generator: GeneratorMatrix) -> int:
    """1-based index or generator label -> 0-based category"""
    token = token.strip()
    if generator.labels and token in generator.labels:
        return generator.labels.index(token)
    if token.isdigit() and 1 <= int(token) <= generator.dim:
        return int(token) - 1
    raise QueryError(f"unknown category {token!r} (expected 1..{generator.dim} or a label)")


def _emit(frame: pd.DataFrame, out: Optional[str]):
    if out:
        write_csv(frame, out)
    else:
        frame.to_csv(sys.stdout, index=False, float_format='%.17g')


# ==================== COMMANDS ====================

def cmd_validate(args, config: dict) -> int:
    generator = load_generator(args.generator, config)
    print(f"d = {generator.dim}")
    print(f"theta_G = {generator.theta_G:.17g}")
    print("mu = " + ",".join(f"{m:.17g}" for m in generator.mu))
    print("irreducible = yes")
    return 0


def cmd_smooth(args, config: dict) -> int:
    generator = load_generator(args.generator, config)
    counts = read_counts(args.counts, generator.dim, generator.labels)
    smoother = PosteriorSmoother(config)
    if args.given_t1 is not None:
        x = parse_category(args.given_t1, generator)
        pmf = smoother.posterior_mean_pmf_given_t1(generator, counts, x)
    else:
        pmf = smoother.posterior_mean_pmf(generator, counts)
    sd = smoother.posterior_variance(generator, counts) ** 0.5 if args.variance else None
    frame = posterior_table(generator, counts, pmf, sd)
    _emit(frame, args.out)
    if args.svg:
        labels = [generator.label(x) for x in range(generator.dim)]
        write_svg(args.svg, pmf, labels, title=f"posterior mean, n={counts.n}", overlay=counts.empirical())
    return 0


def cmd_moments(args, config: dict) -> int:
    generator = load_generator(args.generator, config)
    query = MomentQuery.parse(args.query, generator.dim, generator.labels)
    x = parse_category(args.given_t1, generator) if args.given_t1 is not None else None
    engine = MomentEngine(config)
    method = args.method
    if method == 'dp':
        if x is None:
            value = engine.moment_unconditional(generator, query)
        else:
            value = engine.moment_conditional(generator, query, x)
    elif method == 'brute':
        value = engine.moment_bruteforce(generator, query, x)
    elif method.startswith('theta:'):
        try:
            theta = float(method.split(':', 1)[1])
        except ValueError:
            raise ValidationError(f"bad theta in method {method!r}")
        value = engine.moment_via_theta_recursion(generator, theta, query, x)
    else:
        raise ValidationError(f"unknown method {method!r} (dp, brute or theta:VALUE)")
    print(f"{value:.17g}")
    return 0


def cmd_sample(args, config: dict) -> int:
    generator = load_generator(args.generator, config)
    if args.n < 1:
        raise ValidationError(f"--n must be positive, got {args.n}")
    eps = args.eps if args.eps is not None else config.get('sampler', {}).get('eps', 1e-12)
    root = RngStream(args.seed)
    max_sticks = int(config.get('sampler', {}).get('max_sticks', 1_000_000))
    rows = []
    for draw in range(args.n):
        stream = root.for_batch(draw)
        measure = sample_msb(generator, stream, theta=args.theta, eps=eps, max_sticks=max_sticks)
        if args.data is not None:
            for i, y in enumerate(sample_data(measure, args.data, stream)):
                rows.append({'draw': draw + 1, 'index': i + 1, 'category': generator.label(y)})
        else:
            categories, weights = measure.atom_table()
            for j, (c, w) in enumerate(zip(categories, weights)):
                rows.append({'draw': draw + 1, 'atom': j + 1, 'category': generator.label(int(c)),
                             'weight': w})
    columns = ['draw', 'index', 'category'] if args.data is not None else ['draw', 'atom', 'category', 'weight']
    _emit(pd.DataFrame(rows, columns=columns), args.out)
    return 0


def cmd_verify(args, config: dict) -> int:
    spec = load_spec(args.generator)
    suite = VerificationSuite(config)
    samples = args.samples if args.samples is not None else config.get('verification', {}).get('samples', 100_000)
    report = suite.run(spec, samples, args.seed)
    print(report.render())
    report.raise_for_status()
    return 0


def cmd_figure(args, config: dict) -> int:
    preset = get_preset(args.preset)
    out_dir = Path(args.out or config.get('output', {}).get('directory', 'output'))
    svg = config.get('output', {}).get('svg', True)
    counts = preset.count_vector()
    results = smooth_preset(preset, PosteriorSmoother(config), config)

    for name, (generator, pmf) in results.items():
        write_csv(posterior_table(generator, counts, pmf), out_dir / f"{preset.name}_{name}.csv")
        if svg:
            labels = [generator.label(x) for x in range(generator.dim)]
            write_svg(out_dir / f"{preset.name}_{name}.svg", pmf, labels,
                      title=f"{preset.name}: {name}", overlay=counts.empirical())
    labels = [str(b) for b in range(1, preset.dim + 1)]
    write_csv(summary_table(labels, counts, {name: pmf for name, (_, pmf) in results.items()}),
              out_dir / f"{preset.name}_summary.csv")
    logger.info(f"Preset {preset.name} written to {out_dir}")
    return 0


COMMANDS = {
    'validate': cmd_validate,
    'smooth': cmd_smooth,
    'moments': cmd_moments,
    'sample': cmd_sample,
    'verify': cmd_verify,
    'figure': cmd_figure,
}


class CliParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with code 1"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(
        description="Markovian stick-breaking priors: moments, posterior smoothing and sampling. "
                    "Categories (bins) are numbered from 1."
    )
    parser.add_argument('--config', help='YAML config file (default: config/config.yaml or $MSB_CONFIG)')
    parser.add_argument('--log-level', help='Console log level (default from config)')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('validate', help='Validate a generator spec and print d, theta^G and mu')
    p.add_argument('--generator', required=True, help='Generator spec JSON file')

    p = sub.add_parser('smooth', help='Posterior mean pmf of counts under a generator')
    p.add_argument('--generator', required=True, help='Generator spec JSON file')
    p.add_argument('--counts', required=True, help='CSV with header "category,count"')
    p.add_argument('--given-t1', help='Condition on the first chain state (1-based or label)')
    p.add_argument('--out', help='Output CSV (default: stdout)')
    p.add_argument('--svg', help='Also write a bar chart')
    p.add_argument('--variance', action='store_true', help='Add a posterior_sd column')

    p = sub.add_parser('moments', help='Prior moment E[prod nu(A_j)^k_j]')
    p.add_argument('--generator', required=True, help='Generator spec JSON file')
    p.add_argument('--query', required=True, help='e.g. "3:2,5+7:1,10-12:1" (1-based categories)')
    p.add_argument('--given-t1', help='Condition on T_1 (1-based or label)')
    p.add_argument('--method', default='dp', help='dp, brute or theta:VALUE (default: dp)')

    p = sub.add_parser('sample', help='Draw truncated MSB measures or data from them')
    p.add_argument('--generator', required=True, help='Generator spec JSON file')
    p.add_argument('--n', type=int, default=1,
                   help='Number of measures to draw; draw i uses its own child stream, so the first '
                        'draws do not change when --n grows')
    p.add_argument('--eps', type=float, help='Truncation threshold (default from config)')
    p.add_argument('--seed', type=int, required=True, help='Root seed (64-bit unsigned)')
    p.add_argument('--theta', type=float, help='Strength theta >= theta^G (default theta^G)')
    p.add_argument('--data', type=int, help='Emit this many data draws per measure instead of atoms')
    p.add_argument('--out', help='Output CSV (default: stdout)')

    p = sub.add_parser('verify', help='Cross-check analytic moments against oracles and Monte Carlo')
    p.add_argument('--generator', required=True, help='Generator spec JSON file')
    p.add_argument('--samples', type=int,
                   help='Monte Carlo sample size (default from config); streams are split per batch of '
                        'sampler.batch_size, so results are reproducible for a fixed size and batch size')
    p.add_argument('--seed', type=int, required=True, help='Root seed (64-bit unsigned)')

    p = sub.add_parser('figure', help='Smooth a preset histogram under its four generators')
    p.add_argument('--preset', required=True, choices=['normal', 'gamma', 'wrapped'])
    p.add_argument('--out', help='Output directory (default from config)')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code"""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 1

    # Load environment variables
    load_dotenv()

    try:
        config = load_config(args.config)
        setup_logging(config, args.log_level)
        return COMMANDS[args.command](args, config)
    except MSBError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code


if __name__ == '__main__':
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        sys.exit(0)
    except Exception as e:
        logger.opt(exception=e).error(f"Fatal error: {e}")
        sys.exit(1)
