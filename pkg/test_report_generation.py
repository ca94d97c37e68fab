#!/usr/bin/env python3
"""
Test script for Markdown report generation
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from datetime import date

import numpy as np
import pandas as pd
import pytest

from core.dgp import dgp1, simulate
from core.fmols import fm_ols
from core.kernels import parse_kernel
from generators.report_generator import ReportGenerator


def _fiscal_report(**overrides):
    report = {
        'schema_version': "1.0", 'mode': 'levels', 'window': ['1947Q1', '2019Q1'], 'T': 291,
        'kernel': 'parzen', 'bandwidth': '3*T^0.2', 'K': 9.35, 'intercept': False, 'A0': 1.0,
        'a_plus': 0.8312, 'a_ols': 0.8405, 'standard_error': 0.0099, 't': -17.05,
        'p_value': 0.0, 'reject_5pct': True, 'omega_00': 1234.5, 'omega_cond': 98.7,
        'omega_cond_eigenvalues': [98.7], 'singularity_ratio': 0.08, 'near_singular': True,
        'caveat': "conservative test", 'notes': ["close to multicointegrated"],
    }
    report.update(overrides)
    return report


def test_fiscal_report_english():
    generator = ReportGenerator(language='en')
    text = generator.render_fiscal_report(_fiscal_report(), as_of=date(2019, 11, 17))
    assert text.startswith("# Fiscal sustainability test")
    assert "1947Q1-2019Q1, T = 291" in text
    assert "0.8312" in text
    assert "-17.05" in text
    assert "< 0.0001" in text
    assert "is rejected at the 5% level" in text
    assert "November 17, 2019" in text
    assert "- close to multicointegrated" in text
    assert "> conservative test" in text


def test_fiscal_report_french():
    generator = ReportGenerator(language='fr')
    text = generator.render_fiscal_report(_fiscal_report(reject_5pct=False, notes=[]))
    assert text.startswith("# Test de soutenabilité budgétaire")
    assert "0,8312" in text
    assert "n'est pas rejetée" in text
    assert "Remarques" not in text


def test_number_formatting():
    generator = ReportGenerator(language='en')
    assert generator.format_number(1234.5) == "1,234.5000"
    assert generator.format_number(np.float64(0.25), 2) == "0.25"
    assert generator.format_number(np.int64(400)) == "400"
    assert generator.format_number(float('nan')) == "-"
    assert generator.format_number(None) == "-"
    assert generator.format_pvalue(0.04321) == "0.0432"
    assert "234,5000" in ReportGenerator(language='fr').format_number(1234.5)


def test_mc_table():
    frame = pd.DataFrame([[100, -1.0, 3.16, 0.01, 0.02, 0.001, 0.003, 0.1, 0.9, 0.08, 0.03, 0.004, 0],
                          [200, -1.0, 3.76, float('nan'), 0.01, 0.0005, 0.001, 0.05, 0.85, 0.07, 0.03, 0.003, 2]],
                         columns=['T', 'p', 'K', 'Bias-OLS', 'SD-OLS', 'Bias', 'SD', 't-Bias', 't-SD',
                                  '0.10', '0.05', '0.01', 'Degenerate'])
    generator = ReportGenerator(language='en')
    text = generator.render_mc_table(frame, notes={'dgp': 'dgp1', 'kernel': 'parzen', 'reps': 10000,
                                                    'seed': 42})
    lines = text.splitlines()
    assert lines[0] == "# Monte Carlo results"
    assert "| T | p | K | Bias-OLS | SD-OLS | Bias | SD | t-Bias | t-SD | 0.10 | 0.05 | 0.01 | Degenerate |" in lines
    assert any(line.startswith("| 200 | -1.00 | 3.76 | - |") for line in lines)
    assert "dgp1, Kernel: parzen, reps = 10000, seed = 42" in text
    # identical input renders identically
    assert generator.render_mc_table(frame, notes={'dgp': 'dgp1', 'kernel': 'parzen', 'reps': 10000,
                                                    'seed': 42}) == text

    plain = generator.render_mc_table(frame)
    assert "reps =" not in plain

    smooth = generator.render_mc_table(frame, notes={'dgp': 'dgp1', 'kernel': 'parzen', 'reps': 10,
                                                      'seed': 42, 'assumption_k': True})
    assert "dgp1, Kernel: parzen, smooth kernel class: yes, reps = 10, seed = 42" in smooth
    assert "comparison run" not in smooth
    rough = generator.render_mc_table(frame, notes={'dgp': 'dgp1', 'kernel': 'bartlett', 'reps': 10,
                                                     'seed': 42, 'assumption_k': False})
    assert "smooth kernel class: no" in rough
    assert "comparison run" in rough
    french = ReportGenerator(language='fr').render_mc_table(
        frame, notes={'dgp': 'dgp1', 'kernel': 'qs', 'reps': 10, 'seed': 42, 'assumption_k': False})
    assert "classe de noyaux lisses: non" in french


def test_fit_report(tmp_path):
    fit = fm_ols(simulate(dgp1(0.0), 200, 1), parse_kernel('parzen'), 200 ** 0.25)
    generator = ReportGenerator(language='en')
    path = generator.write('fit_report.md.j2', tmp_path / "out" / "fit.md", fit=fit.to_dict())
    text = path.read_text(encoding='utf-8')
    assert text.startswith("# FM-OLS estimate")
    assert "rank(Omega_00.x) = 1" in text


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
