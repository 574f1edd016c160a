# Report persistence for the Homodyne Super-Resolution Simulator

import os
import json
import logging
from datetime import datetime

from implementation.mcsim import McReport

logger = logging.getLogger(__name__)


def save_report(report: McReport, path: str) -> str:
    """Save a Monte Carlo report to a JSON file

    Args:
        report: The validation report
        path: Destination JSON path; parent directories are created

    Returns:
        The path written
    """
    report_dict = report.model_dump()
    report_dict['passed'] = report.passed()
    report_dict['last_updated'] = datetime.now().isoformat()

    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)

    with open(path, 'w') as f:
        json.dump(report_dict, f, indent=2)

    logger.info(f"Saved Monte Carlo report to {path}")
    return path


def load_report(path: str) -> McReport:
    """Load a Monte Carlo report saved by save_report"""
    with open(path, 'r') as f:
        report_dict = json.load(f)

    report_dict.pop('passed', None)
    report_dict.pop('last_updated', None)

    logger.info(f"Loaded Monte Carlo report from {path}")
    return McReport(**report_dict)
