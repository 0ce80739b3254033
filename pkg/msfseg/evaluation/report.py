"""
Score tables: per-image score CSVs with mean ± std summary rows, and the method x noise
comparison report built from them
"""
import logging
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..utils.config import SegmentMethods
from .metrics import METRIC_NAMES, ScoreReport, summarize

logger = logging.getLogger(__name__)

SUMMARY_ID = "mean ± std"
SCORE_COLUMNS = ["image_id", "method", "sigma_noise", "height", "width", "arand", "voi_split",
                 "voi_merge", "scored_nodes", "tolerance"]


def format_mean_std(mean: float, std: float, scale: float = 1.0, decimals: int = 1) -> str:
    """'5.8 ± 0.8' style cell"""
    return f"{mean * scale:.{decimals}f} ± {std * scale:.{decimals}f}"


def format_metric(name: str, mean: float, std: float) -> str:
    """ARAND in percent with one decimal, VOI terms with three decimals"""
    if name == "arand":
        return format_mean_std(mean, std, scale=100.0, decimals=1)
    return format_mean_std(mean, std, decimals=3)


def score_frame(rows: Sequence[Tuple[str, str, float, Tuple[int, int], ScoreReport, float]]) -> pd.DataFrame:
    """Per-image score rows (image_id, method, sigma_noise, shape, report, tolerance) plus one
    summary row per (method, sigma_noise)"""
    if not rows:
        raise ValueError("no scores to tabulate")
    records = [[image_id, method, sigma, shape[0], shape[1], r.arand, r.voi_split, r.voi_merge,
                r.scored_nodes, tolerance] for image_id, method, sigma, shape, r, tolerance in rows]
    frame = pd.DataFrame(records, columns=SCORE_COLUMNS)

    summaries = []
    for (method, sigma), group in frame.groupby(["method", "sigma_noise"], sort=True):
        reports = [r for _, m, s, _, r, _ in rows if m == method and s == sigma]
        stats = summarize(reports)
        first = group.iloc[0]
        summaries.append([SUMMARY_ID, method, sigma, first["height"], first["width"]]
                         + [format_metric(name, *stats[name]) for name in METRIC_NAMES]
                         + [int(group["scored_nodes"].sum()), first["tolerance"]])
    summary = pd.DataFrame(summaries, columns=SCORE_COLUMNS)
    return pd.concat([frame.astype(object), summary], ignore_index=True)


def write_scores(path: Union[str, Path], frame: pd.DataFrame) -> Path:
    path = Path(path)
    frame.to_csv(path, index=False, lineterminator="\n")
    logger.info(f"Wrote {len(frame)} score rows to {path}")
    return path


def read_scores(paths: Sequence[Union[str, Path]]) -> pd.DataFrame:
    """Per-image rows of one or more score CSVs; summary rows are dropped"""
    if not paths:
        raise ValueError("report needs at least one score CSV")
    frames = []
    for path in paths:
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"score CSV not found: {path}")
        frame = pd.read_csv(path, dtype={"image_id": str, "method": str})
        missing = set(SCORE_COLUMNS) - set(frame.columns)
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        frames.append(frame[frame["image_id"] != SUMMARY_ID])
    scores = pd.concat(frames, ignore_index=True)
    for column in ("sigma_noise", "arand", "voi_split", "voi_merge", "tolerance"):
        scores[column] = pd.to_numeric(scores[column])
    for column in ("height", "width", "scored_nodes"):
        scores[column] = pd.to_numeric(scores[column]).astype(np.int64)
    shapes = scores[["height", "width"]].drop_duplicates()
    if len(shapes) > 1:
        listed = ", ".join(f"{h}x{w}" for h, w in shapes.itertuples(index=False))
        raise ValueError(f"score CSVs mix image shapes: {listed}")
    return scores


def _method_order(methods) -> List[str]:
    known = [m for m in SegmentMethods.ALL if m in set(methods)]
    return known + sorted(set(methods) - set(known))


def comparison_tables(scores: pd.DataFrame) -> Dict[str, pd.DataFrame]:
    """'arand': method x noise table of ARAND cells; 'metrics': all three metrics per
    (method, noise)"""
    methods = _method_order(scores["method"].unique())
    sigmas = sorted(scores["sigma_noise"].unique())
    arand_rows, metric_rows = [], []
    for method in methods:
        row = {"method": method}
        for sigma in sigmas:
            group = scores[(scores["method"] == method) & (scores["sigma_noise"] == sigma)]
            if group.empty:
                row[f"sigma_noise={sigma:g}"] = ""
                continue
            std = group[list(METRIC_NAMES)].std(ddof=1).fillna(0.0)
            mean = group[list(METRIC_NAMES)].mean()
            row[f"sigma_noise={sigma:g}"] = format_metric("arand", mean["arand"], std["arand"])
            metric_rows.append({"method": method, "sigma_noise": f"{sigma:g}", "images": len(group),
                                **{name: format_metric(name, mean[name], std[name])
                                   for name in METRIC_NAMES}})
        arand_rows.append(row)
    return {"arand": pd.DataFrame(arand_rows), "metrics": pd.DataFrame(metric_rows)}


def render_report(tables: Dict[str, pd.DataFrame], tolerance: float) -> str:
    lines = [f"ARAND (%) by method and noise level, boundary tolerance {tolerance:g}",
             tables["arand"].to_string(index=False), "",
             "All metrics (ARAND in %, VOI in nats)",
             tables["metrics"].to_string(index=False)]
    return "\n".join(lines) + "\n"


def write_report(out_dir: Union[str, Path], score_paths: Sequence[Union[str, Path]]) -> List[Path]:
    """report.txt, report.csv (ARAND table) and report_metrics.csv"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    scores = read_scores(score_paths)
    tables = comparison_tables(scores)
    tolerances = sorted(scores["tolerance"].unique())
    if len(tolerances) > 1:
        logger.warning(f"Score CSVs were computed with different tolerances: {tolerances}")
    text_path = out_dir / "report.txt"
    text_path.write_text(render_report(tables, tolerances[0]), encoding="utf-8", newline="\n")
    table_path = out_dir / "report.csv"
    tables["arand"].to_csv(table_path, index=False, lineterminator="\n")
    metrics_path = out_dir / "report_metrics.csv"
    tables["metrics"].to_csv(metrics_path, index=False, lineterminator="\n")
    logger.info(f"Wrote comparison report for {len(tables['arand'])} method(s) to {out_dir}")
    return [text_path, table_path, metrics_path]
