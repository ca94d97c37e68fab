#!/usr/bin/env python3
"""
FRED Snapshot Fetcher for MultiCoint
Regenerates the frozen quarterly series used by the fiscal tests and the
`fiscal` command. Never called by the tests themselves.

Usage:
    FRED_API_KEY=... python scripts/fetch_fred_snapshot.py [--vintage 2019-11-17] [--out data/snapshots]

Version: 1.0.0
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Dict, Optional

import pandas as pd
import requests

logger = logging.getLogger("fetch_fred_snapshot")

FRED_URL = "https://api.stlouisfed.org/fred/series/observations"

# series id -> file name; the deflator and population feed the real per-capita mode
SERIES = {
    "GEXPND": "gexpnd.csv",
    "GRECPT": "grecpt.csv",
    "GDPDEF": "gdpdef.csv",
    "B230RC0Q173SBEA": "population.csv",
}


def fetch_series(series_id: str, api_key: str, vintage: Optional[str],
                 start: str, end: str) -> pd.DataFrame:
    """
    Download one series as of a real-time vintage

    Args:
        series_id: FRED series ID
        api_key: FRED API key
        vintage: YYYY-MM-DD real-time date, or None for the latest release
        start: First observation date
        end: Last observation date

    Returns:
        Frame with DATE and the series values (missing kept as '.')
    """
    params = {
        "series_id": series_id,
        "api_key": api_key,
        "file_type": "json",
        "observation_start": start,
        "observation_end": end,
        "frequency": "q",
        "aggregation_method": "avg",
    }
    if vintage:
        params["realtime_start"] = vintage
        params["realtime_end"] = vintage
    response = requests.get(FRED_URL, params=params, timeout=60)
    response.raise_for_status()
    rows = [(obs["date"], obs.get("value", ".")) for obs in response.json().get("observations", [])]
    return pd.DataFrame(rows, columns=["DATE", series_id])


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--vintage", default="2019-11-17", help="real-time date, or 'latest'")
    parser.add_argument("--start", default="1947-01-01")
    parser.add_argument("--end", default="2019-01-01")
    parser.add_argument("--out", default=str(Path(__file__).parent.parent / "data" / "snapshots"))
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")

    api_key = os.environ.get("FRED_API_KEY")
    if not api_key:
        logger.error("Set FRED_API_KEY to download from FRED")
        return 1

    vintage = None if args.vintage == "latest" else args.vintage
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: Dict[str, int] = {}
    for series_id, file_name in SERIES.items():
        try:
            frame = fetch_series(series_id, api_key, vintage, args.start, args.end)
        except requests.RequestException as e:
            logger.error("FRED request for %s failed: %s", series_id, e)
            return 1
        frame.to_csv(out_dir / file_name, index=False)
        written[series_id] = len(frame)
        logger.info("saved %s (%d rows)", out_dir / file_name, len(frame))

    (out_dir / "VINTAGE").write_text(f"{vintage or 'latest'}\n", encoding="utf-8")
    return 0


if __name__ == "__main__":
    sys.exit(main())
