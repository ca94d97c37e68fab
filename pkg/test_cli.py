#!/usr/bin/env python3
"""
Test script for the command-line tools
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import json

import numpy as np
import pandas as pd
import pytest

from main import main, parse_T_grid


@pytest.fixture
def settings_file(tmp_path):
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"workers": 1, "results_db": str(tmp_path / "results.db")}),
                    encoding='utf-8')
    return str(path)


def _run(settings_file, *argv):
    return main(['--settings', settings_file] + list(argv))


def test_parse_T_grid():
    assert parse_T_grid("100:1600") == [100, 200, 400, 800, 1600]
    assert parse_T_grid("50,100") == [50, 100]


def test_simulate_estimate_test(tmp_path, settings_file):
    """simulate -> estimate -> test on the written files"""
    data = tmp_path / "sample.csv"
    assert _run(settings_file, 'simulate', '--dgp', 'dgp1', '--p', '0.5', '--T', '300',
                '--seed', '3', '--out', str(data), '--spec-out', str(tmp_path / "dgp.json")) == 0
    assert list(pd.read_csv(data).columns) == ['y1', 'x1']

    fit_path = tmp_path / "fit.json"
    report = tmp_path / "fit.md"
    assert _run(settings_file, 'estimate', '--data', str(data), '--out', str(fit_path),
                '--report', str(report)) == 0
    fit = json.loads(fit_path.read_text(encoding='utf-8'))
    assert abs(fit['A_plus'][0][0] - 2.0) < 0.05
    assert report.exists()

    wald_path = tmp_path / "wald.json"
    assert _run(settings_file, 'test', '--fit', str(fit_path), '--restriction', 'A0=2',
                '--out', str(wald_path)) == 0
    result = json.loads(wald_path.read_text(encoding='utf-8'))
    assert result['q_nominal'] == 1
    assert result['degenerate'] is False


def test_bad_restriction_exits_with_error(tmp_path, settings_file):
    data = tmp_path / "sample.csv"
    _run(settings_file, 'simulate', '--T', '100', '--out', str(data))
    fit_path = tmp_path / "fit.json"
    _run(settings_file, 'estimate', '--data', str(data), '--out', str(fit_path))
    assert _run(settings_file, 'test', '--fit', str(fit_path), '--restriction', 'A0=1,2') == 1


def test_estimate_column_selection(tmp_path, settings_file):
    """--ycols/--xcols by name or index pick the same system in any column order"""
    data = tmp_path / "sample.csv"
    assert _run(settings_file, 'simulate', '--dgp', 'dgp1', '--p', '0.5', '--T', '300',
                '--seed', '4', '--out', str(data)) == 0
    swapped = tmp_path / "swapped.csv"
    pd.read_csv(data)[['x1', 'y1']].to_csv(swapped, index=False)

    fits = []
    for source, columns in ((data, []), (swapped, ['--ycols', 'y1', '--xcols', 'x1']),
                            (swapped, ['--ycols', '1'])):
        out = tmp_path / f"fit{len(fits)}.json"
        assert _run(settings_file, 'estimate', '--input', str(source), '--out', str(out), *columns) == 0
        fits.append(json.loads(out.read_text(encoding='utf-8')))
    for fit in fits[1:]:
        np.testing.assert_allclose(fit['A_plus'], fits[0]['A_plus'], rtol=1e-12)
        assert fit['K'] == pytest.approx(fits[0]['K'])


def test_estimate_bad_columns(tmp_path, settings_file):
    data = tmp_path / "sample.csv"
    _run(settings_file, 'simulate', '--T', '100', '--out', str(data))
    assert _run(settings_file, 'estimate', '--input', str(data), '--ycols', 'z1') == 1
    assert _run(settings_file, 'estimate', '--input', str(data), '--ycols', '5') == 1
    assert _run(settings_file, 'estimate', '--input', str(data), '--xcols', 'x1') == 1
    assert _run(settings_file, 'estimate', '--input', str(data), '--ycols', 'y1',
                '--xcols', 'y1') == 1


def test_estimate_dump_lrcov_and_constant_bandwidth(tmp_path, settings_file):
    data = tmp_path / "sample.csv"
    _run(settings_file, 'simulate', '--dgp', 'dgp1', '--p', '0.5', '--T', '200',
         '--seed', '5', '--out', str(data))
    fit_path = tmp_path / "fit.json"
    lrcov_path = tmp_path / "lrcov.json"
    assert _run(settings_file, 'estimate', '--input', str(data), '--bandwidth-const', '7.5',
                '--out', str(fit_path), '--dump-lrcov', str(lrcov_path)) == 0
    fit = json.loads(fit_path.read_text(encoding='utf-8'))
    lrcov = json.loads(lrcov_path.read_text(encoding='utf-8'))
    assert fit['K'] == pytest.approx(7.5)
    assert lrcov['K'] == pytest.approx(7.5)
    assert lrcov['kernel'] == fit['kernel']
    assert len(lrcov['omega']) == 2 and len(lrcov['delta']) == 2
    np.testing.assert_allclose(lrcov['omega_cond'], fit['omega_cond'])
    np.testing.assert_allclose(lrcov['F'], fit['F'])

    assert _run(settings_file, 'estimate', '--input', str(data), '--bandwidth-const', '0') == 1


def test_population(tmp_path, settings_file):
    out = tmp_path / "pop.json"
    assert _run(settings_file, 'population', '--dgp', 'dgp2', '--p', '5.2', '--kernel', 'parzen',
                '--out', str(out)) == 0
    payload = json.loads(out.read_text(encoding='utf-8'))
    assert payload['population']['mc_rank'] == 1
    assert 'limit_constants' in payload


def test_mc_table(tmp_path, settings_file):
    out = tmp_path / "table.csv"
    markdown = tmp_path / "table.md"
    assert _run(settings_file, 'mc-table', '--dgp', 'dgp1', '--p-list', '0,-1', '--T', '50',
                '--reps', '20', '--out', str(out), '--markdown', str(markdown), '--store') == 0
    table = pd.read_csv(out)
    assert list(table['p']) == [0.0, -1.0]
    assert list(table.columns[:9]) == ['T', 'p', 'K', 'Bias-OLS', 'SD-OLS', 'Bias', 'SD',
                                       't-Bias', 't-SD']
    assert "# Monte Carlo results" in markdown.read_text(encoding='utf-8')
    assert (tmp_path / "results.db").exists()


def test_fiscal_command(tmp_path, settings_file):
    months = ('01', '04', '07', '10')
    dates = [f"{1960 + i // 4}-{months[i % 4]}-01" for i in range(60)]
    expenditures = tmp_path / "gexpnd.csv"
    receipts = tmp_path / "grecpt.csv"
    expenditures.write_text("DATE,GEXPND\n" + "".join(f"{d},{100 + 2 * i + (i % 3)}\n"
                                                      for i, d in enumerate(dates)), encoding='utf-8')
    receipts.write_text("DATE,GRECPT\n" + "".join(f"{d},{90 + 1.7 * i + (i % 2)}\n"
                                                   for i, d in enumerate(dates)), encoding='utf-8')
    out = tmp_path / "fiscal.json"
    markdown = tmp_path / "fiscal.md"
    series = tmp_path / "series.csv"
    assert _run(settings_file, 'fiscal', '--expenditures', str(expenditures), '--receipts',
                str(receipts), '--mode', 'logs', '--from', '1961Q1', '--out', str(out),
                '--markdown', str(markdown), '--series-out', str(series)) == 0
    report = json.loads(out.read_text(encoding='utf-8'))
    assert report['window'] == ['1961Q1', '1974Q4']
    assert report['T'] == 56
    assert report['mode'] == 'logs'
    assert markdown.exists()
    assert 'dlog_receipts' in pd.read_csv(series).columns


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
