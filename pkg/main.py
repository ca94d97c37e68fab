#!/usr/bin/env python3
"""
MultiCoint - FM-OLS under multicointegration
Main entry point for the command-line tools

Version: 1.0.0
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, List, Optional, Sequence, Tuple

# Add the project root to Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

import numpy as np

from core.database import ResultsDatabase
from core.dgp import DgpSpec, population, preset, simulate
from core.errors import MultiCointError
from core.fiscal import (fiscal_series_table, format_quarter, load_fred_csv, parse_quarter,
                         sustainability_report, transform)
from core.fmols import FitSummary, fm_ols
from core.inference import parse_restriction, wald
from core.kernels import BandwidthRule, bandwidth, parse_bandwidth, parse_kernel
from core.localization import set_language, translate
from core.montecarlo import (McConfig, density_table, omega_cond_scaling, rate_check,
                             run_experiment, write_table_csv)
from core.series import SystemData, TimeSeriesMatrix, read_matrix_csv, write_matrix_csv
from core.settings import SettingsManager
from generators.report_generator import ReportGenerator

logger = logging.getLogger("multicoint")


def write_json(payload: Any, path: Optional[str]) -> None:
    """
    Write JSON to a file, or to stdout when no path is given
    """
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
        return
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding='utf-8')
    logger.info(translate('cli.written', path=out))


def parse_int_list(text: str) -> List[int]:
    return [int(item) for item in text.split(',') if item.strip()]


def parse_float_list(text: str) -> List[float]:
    return [float(item) for item in text.split(',') if item.strip()]


def parse_T_grid(text: str) -> List[int]:
    """
    "100:1600" doubles from 100 up to 1600; otherwise a comma list
    """
    if ':' in text:
        low, high = (int(part) for part in text.split(':'))
        grid = []
        T = low
        while T <= high:
            grid.append(T)
            T *= 2
        return grid
    return parse_int_list(text)


def resolve_columns(text: str, labels: Optional[Sequence[str]], m: int) -> List[int]:
    """
    Column positions from a comma list of header names or 0-based indices

    Args:
        text: e.g. "gexpnd" or "0,2"
        labels: CSV header, if any
        m: Number of columns

    Returns:
        Column positions in the order given
    """
    positions = []
    for item in (part.strip() for part in text.split(',')):
        if not item:
            continue
        if labels is not None and item in labels:
            positions.append(list(labels).index(item))
            continue
        try:
            index = int(item)
        except ValueError:
            raise MultiCointError(f"unknown column '{item}'")
        if not 0 <= index < m:
            raise MultiCointError(f"column index {index} out of range for {m} columns")
        positions.append(index)
    if len(set(positions)) != len(positions):
        raise MultiCointError(f"column repeated in '{text}'")
    return positions


def split_system(matrix: TimeSeriesMatrix, args) -> Tuple[List[int], List[int]]:
    """
    Regressand and regressor positions from --ycols/--xcols, else the --m0 split
    """
    if args.ycols:
        ycols = resolve_columns(args.ycols, matrix.labels, matrix.m)
        if args.xcols:
            xcols = resolve_columns(args.xcols, matrix.labels, matrix.m)
        else:
            xcols = [i for i in range(matrix.m) if i not in ycols]
    elif args.xcols:
        raise MultiCointError("--xcols needs --ycols")
    else:
        if not 0 < args.m0 < matrix.m:
            raise MultiCointError(f"--m0 must lie between 1 and {matrix.m - 1}")
        ycols, xcols = list(range(args.m0)), list(range(args.m0, matrix.m))
    if not xcols or set(ycols) & set(xcols):
        raise MultiCointError("regressand and regressor columns must be nonempty and disjoint")
    return ycols, xcols


def load_dgp(args) -> DgpSpec:
    if getattr(args, 'dgp_file', None):
        return DgpSpec.load(args.dgp_file)
    return preset(args.dgp, args.p)


def bandwidth_rules(args, settings: SettingsManager) -> List[BandwidthRule]:
    if getattr(args, 'bandwidth_const_list', None):
        return [BandwidthRule.fixed(value) for value in parse_float_list(args.bandwidth_const_list)]
    return [parse_bandwidth(args.bandwidth or settings.get('bandwidth'))]


def store_report(settings: SettingsManager, save) -> None:
    db = ResultsDatabase(settings.get('results_db'))
    try:
        db.initialize_database()
        row_id = save(db)
        logger.info(translate('cli.stored', path=db.db_path, id=row_id))
    finally:
        db.close()


# Commands
def cmd_estimate(args, settings: SettingsManager) -> None:
    matrix = read_matrix_csv(args.input)
    ycols, xcols = split_system(matrix, args)
    x0 = parse_float_list(args.x0) if args.x0 else None
    data = SystemData(y=matrix.columns(ycols), x=matrix.columns(xcols), x0=x0)
    kernel = parse_kernel(args.kernel or settings.get('kernel'))
    if args.bandwidth_const is not None:
        rule = BandwidthRule.fixed(args.bandwidth_const)
    else:
        rule = parse_bandwidth(args.bandwidth or settings.get('bandwidth'))
    fit = fm_ols(data, kernel, bandwidth(rule, data.T), intercept=args.intercept,
                 rcond=settings.get('solve_rcond'))
    report = fit.to_dict()
    write_json(report, args.out)
    if args.dump_lrcov:
        write_json(fit.lr.to_dict(), args.dump_lrcov)
    if args.report:
        ReportGenerator(language=settings.get('language')).write('fit_report.md.j2', args.report, fit=report)


def cmd_test(args, settings: SettingsManager) -> None:
    with open(args.fit, 'r', encoding='utf-8') as f:
        summary = FitSummary.from_dict(json.load(f))
    m0, mx = summary.A_plus.shape
    restriction = parse_restriction(args.restriction, m0, mx)
    result = wald(summary, restriction,
                  allow_degenerate=args.allow_degenerate or settings.get('allow_degenerate'),
                  tol=settings.get('rank_rel_tol'))
    write_json(result.to_dict(), args.out)


def cmd_simulate(args, settings: SettingsManager) -> None:
    spec = load_dgp(args)
    seed = settings.get('seed') if args.seed is None else args.seed
    data = simulate(spec, args.T, seed, args.replication)
    labels = [f"y{i + 1}" for i in range(data.m0)] + [f"x{i + 1}" for i in range(data.mx)]
    write_matrix_csv(TimeSeriesMatrix(np.hstack([data.y.data, data.x.data]), labels), args.out)
    logger.info(translate('cli.written', path=args.out))
    if args.spec_out:
        spec.save(args.spec_out)


def cmd_population(args, settings: SettingsManager) -> None:
    spec = load_dgp(args)
    pop = population(spec, settings.get('rank_rel_tol'), settings.get('rank_abs_floor'))
    payload = {'dgp': spec.to_dict(), 'population': pop.to_dict()}
    if args.kernel and pop.complete and pop.mc_rank:
        kernel = parse_kernel(args.kernel)
        payload['limit_constants'] = {key: value.tolist()
                                      for key, value in pop.limit_constants(kernel).items()}
    write_json(payload, args.out)


def _mc_configs(args, settings: SettingsManager, p_values: List[float]) -> List[McConfig]:
    kernel = parse_kernel(args.kernel or settings.get('kernel'))
    rules = bandwidth_rules(args, settings)
    seed = settings.get('seed') if args.seed is None else args.seed
    workers = settings.get('workers') if args.workers is None else args.workers
    return [McConfig(dgp=preset(args.dgp, p), T_list=tuple(parse_T_grid(args.T)), reps=args.reps,
                     kernel=kernel, bandwidths=tuple(rules), A0=args.A0, seed=seed,
                     workers=workers, p=p)
            for p in p_values]


def cmd_mc_table(args, settings: SettingsManager) -> None:
    reports = [run_experiment(config) for config in _mc_configs(args, settings, parse_float_list(args.p_list))]
    frame = write_table_csv(reports, args.out)
    logger.info(translate('cli.written', path=args.out))
    if args.markdown:
        config = reports[0].config
        notes = {'dgp': args.dgp, 'kernel': config.kernel.name, 'reps': config.reps, 'seed': config.seed,
                 'assumption_k': config.kernel.satisfies_assumption_k}
        generator = ReportGenerator(language=settings.get('language'))
        generator.write('mc_table.md.j2', args.markdown, columns=list(frame.columns),
                        rows=frame.to_dict('records'), notes=notes)
    if args.store:
        for report in reports:
            store_report(settings, lambda db, report=report: db.save_mc_report(report, 'mc-table'))


def cmd_mc_density(args, settings: SettingsManager) -> None:
    config = _mc_configs(args, settings, [args.p])[0]
    report = run_experiment(config)
    frame = density_table(report, args.points or settings.get('density_grid_points'))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out, index=False, float_format='%.8g')
    logger.info(translate('cli.written', path=out))
    if args.store:
        store_report(settings, lambda db: db.save_mc_report(report, 'mc-density'))


def cmd_rate_check(args, settings: SettingsManager) -> None:
    args.T = args.T_grid
    config = _mc_configs(args, settings, [args.p])[0]
    result = rate_check(config, wald=args.wald)
    if args.omega_scaling is not None:
        points = omega_cond_scaling(config.dgp, config.T_list, args.omega_scaling, args.seeds,
                                    config.kernel, seed=config.seed)
        result['omega_cond_scaling'] = [vars(point) for point in points]
    write_json(result, args.out)


def cmd_fiscal(args, settings: SettingsManager) -> None:
    ds = load_fred_csv(args.expenditures, args.receipts, args.deflator, args.population)
    start = parse_quarter(args.start) if args.start else None
    end = parse_quarter(args.end) if args.end else None
    data = transform(ds, args.mode, (start, end))
    mask = ds.window(start, end)
    window = (format_quarter(ds.dates[mask][0]), format_quarter(ds.dates[mask][-1]))

    kernel = parse_kernel(args.kernel or settings.get('kernel'))
    rule = parse_bandwidth(args.bandwidth)
    report = sustainability_report(data, kernel, rule, intercept=args.intercept,
                                   A0=args.A0, mode=args.mode, window=window).to_dict()
    write_json(report, args.out)

    if args.markdown:
        generator = ReportGenerator(language=settings.get('language'))
        generator.write('fiscal_report.md.j2', args.markdown, report=report, as_of=None)
    if args.series_out:
        base = 'real' if args.mode == 'real' else 'levels'
        fiscal_series_table(ds, base).to_csv(args.series_out, float_format='%.10g')
        logger.info(translate('cli.written', path=args.series_out))
    if args.store:
        store_report(settings, lambda db: db.save_fiscal_report(report))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='multicoint',
                                     description='FM-OLS estimation and testing under multicointegration')
    parser.add_argument('--settings', help='settings JSON (default data/settings.json)')
    parser.add_argument('--language', choices=['en', 'fr'], help='report language')
    parser.add_argument('-v', '--verbose', action='store_true', help='debug logging')
    sub = parser.add_subparsers(dest='command', required=True)

    def add_kernel(p, bandwidth_default=None):
        p.add_argument('--kernel', help='parzen, th, bartlett or qs')
        p.add_argument('--bandwidth', default=bandwidth_default, help='rule such as "3*T^0.2" or a constant')

    def add_dgp(p):
        p.add_argument('--dgp', default='dgp1', help='preset design (dgp1, dgp2)')
        p.add_argument('--dgp-file', help='JSON design instead of a preset')

    p = sub.add_parser('estimate', help='FM-OLS fit of a CSV system')
    p.add_argument('--input', '--data', dest='input', required=True, help='CSV of the observed system')
    p.add_argument('--ycols', help='regressand columns, names or 0-based indices (comma separated)')
    p.add_argument('--xcols', help='regressor columns (default: all columns not in --ycols)')
    p.add_argument('--m0', type=int, default=1, help='without --ycols, the first m0 columns are regressands')
    p.add_argument('--x0', help='initial regressor value, comma separated (default zeros)')
    p.add_argument('--intercept', action='store_true')
    p.add_argument('--out')
    p.add_argument('--report', help='Markdown report path')
    p.add_argument('--dump-lrcov', help='also write the long run covariance estimates as JSON')
    add_kernel(p)
    p.add_argument('--bandwidth-const', type=float, help='constant bandwidth K, overrides --bandwidth')
    p.set_defaults(handler=cmd_estimate)

    p = sub.add_parser('test', help='Wald test on a stored fit')
    p.add_argument('--fit', required=True)
    p.add_argument('--restriction', required=True, help='"A0=a11,a12;a21,a22" or "Q=...|r0=..."')
    p.add_argument('--allow-degenerate', action='store_true')
    p.add_argument('--out')
    p.set_defaults(handler=cmd_test)

    p = sub.add_parser('simulate', help='simulate one sample path')
    add_dgp(p)
    p.add_argument('--p', type=float, default=0.0)
    p.add_argument('--T', type=int, required=True)
    p.add_argument('--seed', type=int)
    p.add_argument('--replication', type=int, default=0)
    p.add_argument('--out', required=True)
    p.add_argument('--spec-out', help='also write the design as JSON')
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser('population', help='exact population quantities of a design')
    add_dgp(p)
    p.add_argument('--p', type=float, default=0.0)
    p.add_argument('--kernel', help='also report the w\'\'(0) limit constants for this kernel')
    p.add_argument('--out')
    p.set_defaults(handler=cmd_population)

    def add_mc(p):
        add_dgp(p)
        add_kernel(p)
        p.add_argument('--reps', type=int, default=10000)
        p.add_argument('--seed', type=int)
        p.add_argument('--workers', type=int)
        p.add_argument('--A0', type=float, help='null value (default: the true A)')
        p.add_argument('--bandwidth-const-list', help='constant bandwidths, one cell each')
        p.add_argument('--store', action='store_true', help='archive results in the database')

    p = sub.add_parser('mc-table', help='Monte Carlo table over design parameters and sample sizes')
    add_mc(p)
    p.add_argument('--p-list', required=True)
    p.add_argument('--T', required=True, help='comma list or low:high doubling grid')
    p.add_argument('--out', required=True)
    p.add_argument('--markdown')
    p.set_defaults(handler=cmd_mc_table)

    p = sub.add_parser('mc-density', help='kernel densities of the bias and t-statistic')
    add_mc(p)
    p.add_argument('--p', type=float, required=True)
    p.add_argument('--T', required=True)
    p.add_argument('--points', type=int)
    p.add_argument('--out', required=True)
    p.set_defaults(handler=cmd_mc_density)

    p = sub.add_parser('rate-check', help='empirical convergence rates')
    add_mc(p)
    p.add_argument('--p', type=float, required=True)
    p.add_argument('--T-grid', dest='T_grid', default='100:1600')
    p.add_argument('--wald', action='store_true', help='also report median W_I per T')
    p.add_argument('--omega-scaling', type=float, metavar='K_EXP',
                   help='average T^(2k) Omega_00.x-hat with K = T^k')
    p.add_argument('--seeds', type=int, default=20)
    p.add_argument('--out')
    p.set_defaults(handler=cmd_rate_check)

    p = sub.add_parser('fiscal', help='fiscal sustainability test on FRED series')
    p.add_argument('--expenditures', required=True)
    p.add_argument('--receipts', required=True)
    p.add_argument('--deflator')
    p.add_argument('--population')
    p.add_argument('--mode', choices=['levels', 'logs', 'real'], default='levels')
    p.add_argument('--from', dest='start')
    p.add_argument('--to', dest='end')
    p.add_argument('--kernel')
    p.add_argument('--bandwidth', default='3*T^0.2')
    p.add_argument('--intercept', action='store_true')
    p.add_argument('--A0', type=float, default=1.0)
    p.add_argument('--out')
    p.add_argument('--markdown')
    p.add_argument('--series-out', help='CSV of levels, logs and differences')
    p.add_argument('--store', action='store_true')
    p.set_defaults(handler=cmd_fiscal)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main application entry point
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)

    settings = SettingsManager(args.settings)
    if args.language:
        settings.set('language', args.language)
    set_language(settings.get('language'))

    try:
        args.handler(args, settings)
    except MultiCointError as e:
        logger.error(translate('cli.error', message=e))
        return 1
    except Exception:
        logger.exception("unexpected failure")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
