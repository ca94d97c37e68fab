#!/usr/bin/env python3
"""
Generators Module for MultiCoint
Handles Markdown report generation

Version: 1.0.0
"""

from .report_generator import ReportGenerator

__all__ = ['ReportGenerator']
