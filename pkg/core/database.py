#!/usr/bin/env python3
"""
Results Database for MultiCoint
SQLite archive of Monte Carlo tables and fiscal reports

Version: 1.0.0
"""

import json
import logging
import math
import sqlite3
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

logger = logging.getLogger(__name__)


class ResultsDatabase:
    """
    Manages SQLite storage of experiment results
    """

    def __init__(self, db_path: Optional[Union[str, Path]] = None):
        """
        Initialize results database

        Args:
            db_path: Path to SQLite database file (":memory:" allowed)
        """
        if db_path is None:
            db_path = Path(__file__).parent.parent / "data" / "results.db"
        self.db_path = str(db_path)
        self.connection = None

    def connect(self) -> sqlite3.Connection:
        """
        Create database connection

        Returns:
            SQLite connection object
        """
        if self.connection is None:
            if self.db_path != ':memory:':
                Path(self.db_path).parent.mkdir(parents=True, exist_ok=True)
            self.connection = sqlite3.connect(self.db_path)
            self.connection.row_factory = sqlite3.Row
        return self.connection

    def close(self):
        """
        Close database connection
        """
        if self.connection:
            self.connection.close()
            self.connection = None

    def initialize_database(self):
        """
        Create database tables if they don't exist
        """
        conn = self.connect()
        cursor = conn.cursor()

        cursor.execute("""
            CREATE TABLE IF NOT EXISTS experiments (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                kind TEXT NOT NULL,
                kernel TEXT,
                assumption_k INTEGER, -- 1 when the kernel is in the class the singular-case theory covers
                config TEXT, -- JSON string
                created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
            )
        """)

        cursor.execute("""
            CREATE TABLE IF NOT EXISTS mc_cells (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                experiment_id INTEGER NOT NULL,
                T INTEGER NOT NULL,
                p REAL,
                K REAL NOT NULL,
                bandwidth TEXT,
                bias_ols_mean REAL,
                bias_ols_sd REAL,
                bias_mean REAL,
                bias_sd REAL,
                t_mean REAL,
                t_sd REAL,
                rejections TEXT, -- JSON string, level -> rate
                n_reps INTEGER,
                n_degenerate INTEGER,
                FOREIGN KEY (experiment_id) REFERENCES experiments (id)
            )
        """)

        cursor.execute("""
            CREATE TABLE IF NOT EXISTS fiscal_reports (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                mode TEXT,
                window TEXT,
                report TEXT, -- JSON string
                created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
            )
        """)

        conn.commit()
        logger.debug("results database ready at %s", self.db_path)

    def save_mc_report(self, report, kind: str = 'mc-table') -> int:
        """
        Store every cell of a Monte Carlo report

        Args:
            report: McReport
            kind: Experiment label (mc-table, mc-density, rate-check)

        Returns:
            ID of the created experiment
        """
        conn = self.connect()
        cursor = conn.cursor()
        kernel = report.config.kernel
        cursor.execute("INSERT INTO experiments (kind, kernel, assumption_k, config) VALUES (?, ?, ?, ?)",
                       (kind, kernel.name, int(kernel.satisfies_assumption_k),
                        json.dumps(report.config.to_dict(), sort_keys=True)))
        experiment_id = cursor.lastrowid

        for cell in report.cells:
            cursor.execute("""
                INSERT INTO mc_cells (
                    experiment_id, T, p, K, bandwidth,
                    bias_ols_mean, bias_ols_sd, bias_mean, bias_sd,
                    t_mean, t_sd, rejections, n_reps, n_degenerate
                ) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
            """, (
                experiment_id, cell.T, cell.p, cell.K, cell.bandwidth,
                cell.bias_ols_mean, cell.bias_ols_sd, cell.bias_mean, cell.bias_sd,
                _nullable(cell.t_mean), _nullable(cell.t_sd),
                json.dumps({f"{level:.2f}": _nullable(rate) for level, rate in cell.rejections.items()}),
                cell.n_reps, cell.n_degenerate
            ))

        conn.commit()
        return experiment_id

    def get_mc_cells(self, experiment_id: int) -> List[Dict[str, Any]]:
        """
        Retrieve the cells of an experiment in insertion order

        Args:
            experiment_id: Experiment ID

        Returns:
            List of cell dictionaries
        """
        conn = self.connect()
        cursor = conn.cursor()
        cursor.execute("SELECT * FROM mc_cells WHERE experiment_id = ? ORDER BY id",
                       (experiment_id,))
        cells = []
        for row in cursor.fetchall():
            cell = dict(row)
            cell['rejections'] = json.loads(cell['rejections'] or '{}')
            cells.append(cell)
        return cells

    def get_experiments(self, kind: Optional[str] = None) -> List[Dict[str, Any]]:
        """
        List stored experiments, newest first

        Args:
            kind: Optional filter on the experiment label

        Returns:
            List of experiment dictionaries
        """
        conn = self.connect()
        cursor = conn.cursor()
        if kind is None:
            cursor.execute("SELECT * FROM experiments ORDER BY id DESC")
        else:
            cursor.execute("SELECT * FROM experiments WHERE kind = ? ORDER BY id DESC", (kind,))
        experiments = []
        for row in cursor.fetchall():
            experiment = dict(row)
            experiment['config'] = json.loads(experiment['config'] or '{}')
            if experiment['assumption_k'] is not None:
                experiment['assumption_k'] = bool(experiment['assumption_k'])
            experiments.append(experiment)
        return experiments

    def save_fiscal_report(self, report: Dict[str, Any]) -> int:
        """
        Store a fiscal sustainability report

        Args:
            report: Report dictionary (SustainabilityReport.to_dict())

        Returns:
            ID of the created row
        """
        conn = self.connect()
        cursor = conn.cursor()
        window = report.get('window')
        cursor.execute("INSERT INTO fiscal_reports (mode, window, report) VALUES (?, ?, ?)", (
            report.get('mode'),
            '-'.join(window) if window else None,
            json.dumps(report, sort_keys=True)
        ))
        conn.commit()
        return cursor.lastrowid

    def get_fiscal_reports(self, mode: Optional[str] = None) -> List[Dict[str, Any]]:
        """
        Retrieve stored fiscal reports, newest first

        Args:
            mode: Optional filter on the transformation

        Returns:
            List of rows with the report decoded
        """
        conn = self.connect()
        cursor = conn.cursor()
        if mode is None:
            cursor.execute("SELECT * FROM fiscal_reports ORDER BY id DESC")
        else:
            cursor.execute("SELECT * FROM fiscal_reports WHERE mode = ? ORDER BY id DESC", (mode,))
        reports = []
        for row in cursor.fetchall():
            entry = dict(row)
            entry['report'] = json.loads(entry['report'] or '{}')
            reports.append(entry)
        return reports


def _nullable(value: float) -> Optional[float]:
    """NaN is stored as NULL"""
    return None if value is None or (isinstance(value, float) and math.isnan(value)) else value
