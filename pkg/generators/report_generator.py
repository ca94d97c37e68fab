#!/usr/bin/env python3
"""
Report Generator for MultiCoint
Renders fit, Monte Carlo and fiscal reports as Markdown from Jinja2 templates

Version: 1.0.0
"""

import logging
import math
import numbers
from datetime import date, datetime
from pathlib import Path
from typing import Any, Dict, Optional, Union

from babel.dates import format_date as babel_format_date
from babel.numbers import format_decimal
from jinja2 import Environment, FileSystemLoader, StrictUndefined

from core.localization import LocalizationManager

logger = logging.getLogger(__name__)

_BABEL_LOCALES = {'en': 'en_US', 'fr': 'fr_FR'}


class ReportGenerator:
    """
    Markdown report renderer with localized headings and number formatting
    """

    def __init__(self, templates_dir: Optional[Union[str, Path]] = None, language: str = 'en'):
        """
        Initialize report generator

        Args:
            templates_dir: Directory with *.md.j2 templates
            language: Report language ('en' or 'fr')
        """
        self.templates_dir = Path(templates_dir) if templates_dir else Path(__file__).parent / "templates"
        self.localization = LocalizationManager(language=language)
        self.language = self.localization.get_language()
        self.setup_jinja_environment()

    def setup_jinja_environment(self):
        """
        Setup Jinja2 template environment
        """
        self.jinja_env = Environment(
            loader=FileSystemLoader(str(self.templates_dir)),
            autoescape=False,
            trim_blocks=True,
            lstrip_blocks=True,
            keep_trailing_newline=True,
            undefined=StrictUndefined
        )

        self.jinja_env.filters['format_number'] = self.format_number
        self.jinja_env.filters['format_pvalue'] = self.format_pvalue
        self.jinja_env.filters['format_date'] = self.format_date
        self.jinja_env.globals['t'] = self.localization.translate

    def render(self, template_file: str, **template_data: Any) -> str:
        """
        Render one template

        Args:
            template_file: Template file name
            **template_data: Template context

        Returns:
            Rendered Markdown
        """
        return self.jinja_env.get_template(template_file).render(**template_data)

    def write(self, template_file: str, output_path: Union[str, Path], **template_data: Any) -> Path:
        """
        Render a template to a file

        Args:
            template_file: Template file name
            output_path: Destination path
            **template_data: Template context

        Returns:
            The written path
        """
        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        with open(output_path, 'w', encoding='utf-8') as f:
            f.write(self.render(template_file, **template_data))
        logger.debug("rendered %s to %s", template_file, output_path)
        return output_path

    def render_fiscal_report(self, report: Dict[str, Any], as_of: Optional[date] = None) -> str:
        return self.render('fiscal_report.md.j2', report=report, as_of=as_of)

    def render_mc_table(self, frame, notes: Optional[Dict[str, Any]] = None) -> str:
        """
        Table-1 style Markdown from a Monte Carlo frame

        Args:
            frame: DataFrame from McReport.to_frame (or several stacked)
            notes: Extra context such as the design and kernel

        Returns:
            Rendered Markdown
        """
        return self.render('mc_table.md.j2', columns=list(frame.columns),
                           rows=frame.to_dict('records'), notes=notes or {})

    def render_fit_report(self, fit: Dict[str, Any]) -> str:
        return self.render('fit_report.md.j2', fit=fit)

    # Template filters
    def format_number(self, value, digits: int = 4) -> str:
        """
        Format a number with the report locale's separators

        Args:
            value: Number (NaN and None print as a dash)
            digits: Digits after the decimal point

        Returns:
            str: Formatted number
        """
        if value is None or (isinstance(value, numbers.Real) and math.isnan(value)):
            return '-'
        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            return str(value)
        if isinstance(value, numbers.Integral):
            return format_decimal(value, format='#,##0', locale=self._locale)
        pattern = '#,##0.' + '0' * digits if digits > 0 else '#,##0'
        return format_decimal(value, format=pattern, locale=self._locale)

    def format_pvalue(self, value) -> str:
        """
        Format a p-value, small values as an inequality

        Args:
            value: Probability

        Returns:
            str: Formatted p-value
        """
        if value is None or (isinstance(value, float) and math.isnan(value)):
            return '-'
        if value < 1e-4:
            return '< ' + format_decimal(0.0001, format='0.0000', locale=self._locale)
        return format_decimal(value, format='0.0000', locale=self._locale)

    def format_date(self, value) -> str:
        """
        Format a date for display

        Args:
            value: date, datetime or ISO string

        Returns:
            str: Formatted date
        """
        try:
            if isinstance(value, str):
                value = datetime.fromisoformat(value)
            if isinstance(value, (date, datetime)):
                return babel_format_date(value, format='long', locale=self._locale)
        except ValueError:
            pass
        return str(value)

    @property
    def _locale(self) -> str:
        return _BABEL_LOCALES.get(self.language, 'en_US')
