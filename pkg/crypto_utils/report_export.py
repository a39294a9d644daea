"""
Report Export Utility for the key cracker

Turns crack reports and crack-time projections into pandas DataFrames, renders
them as fixed-column text tables and writes CSV, JSON and an HTML scaling chart.
"""

import logging

import pandas as pd
import plotly.graph_objects as go

from key_cracker import DES_COST_ESTIMATES, fit_scaling_law, format_in_unit, time_to_crack

# Configure logging
logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["bits", "keys_tried", "elapsed_s", "keys_per_sec", "projected_56bit_worst_s"]


def reports_to_frame(reports):
    """One row per CrackReport, in the order given."""
    rows = [{
        "bits": r.bits,
        "keys_tried": r.keys_tried,
        "elapsed_s": r.elapsed,
        "keys_per_sec": r.keys_per_sec,
        "projected_56bit_worst_s": r.projection().worst,
    } for r in reports]
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)


def projection_frame(bits, keys_per_sec):
    """Worst-case sweep of a ``bits``-bit keyspace at a given rate, in the report layout."""
    projection = time_to_crack(bits, keys_per_sec)
    return pd.DataFrame([{
        "bits": bits,
        "keys_tried": 1 << bits,
        "elapsed_s": projection.worst,
        "keys_per_sec": keys_per_sec,
        "projected_56bit_worst_s": time_to_crack(56, keys_per_sec).worst,
    }], columns=REPORT_COLUMNS)


def cost_estimates_frame():
    """Published 56-bit DES estimates with the rate each implies and the times recomputed from it."""
    rows = []
    for row in DES_COST_ESTIMATES:
        projection = time_to_crack(56, row.derived_rate)
        rows.append({
            "attacker": row.attacker,
            "budget_usd": row.budget_usd,
            "stated": f"{row.stated_time:g} {row.unit}",
            "keys_per_sec": row.derived_rate,
            "worst": format_in_unit(projection.worst, row.unit),
            "expected": format_in_unit(projection.expected, row.unit),
            "worst_s": projection.worst,
            "expected_s": projection.expected,
        })
    return pd.DataFrame(rows)


def format_table(df, float_format="{:.6g}".format):
    return df.to_string(index=False, float_format=float_format)


def export_frame(df, csv_path=None, json_path=None):
    """
    Write a DataFrame to CSV and/or JSON.

    Returns:
        tuple: (success, message)
    """
    try:
        written = []
        if csv_path:
            df.to_csv(csv_path, index=False)
            written.append(csv_path)
        if json_path:
            df.to_json(json_path, orient="records", indent=2)
            written.append(json_path)
        if written:
            logger.info(f"Exported {len(df)} rows to {', '.join(written)}")
        return True, f"Exported {len(df)} rows"
    except OSError as e:
        logger.error(f"Error exporting report: {e}", exc_info=True)
        return False, f"Error exporting report: {e}"


def write_scaling_plot(reports, path):
    """HTML chart of measured full-scan time against key bits, with the fitted doubling law."""
    df = reports_to_frame(reports)
    fig = go.Figure()
    fig.add_trace(go.Scatter(x=df["bits"], y=df["elapsed_s"], mode="markers+lines", name="measured"))
    if df["bits"].nunique() >= 2:
        slope, intercept = fit_scaling_law(reports)
        fitted = [2 ** (slope * b + intercept) for b in df["bits"]]
        fig.add_trace(go.Scatter(x=df["bits"], y=fitted, mode="lines", line={"dash": "dash"},
                                 name=f"fit: time x2^{slope:.2f} per bit"))
    fig.update_layout(
        title="Full keyspace scan time by key length",
        xaxis_title="effective key bits",
        yaxis_title="elapsed seconds",
        yaxis_type="log",
    )
    fig.write_html(path, include_plotlyjs="cdn")
    logger.info(f"Wrote scaling chart to {path}")
    return path
