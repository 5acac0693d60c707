"""Deterministic SVG renderings of the experiment CSV artifacts.

The renderer infers the plot from the column set: gradient curves
(t, C_hat, stderr) get a log-y line with an error band; decay trajectories
(t, entropy, fisher) get a log-y plot with the e^{-2·lambda·t} envelope
overlaid when the file carries a ``# lambda_hat=`` header; constant tables
(m, n, lambda_hat) get grouped bars.  Byte determinism comes from a fixed
svg.hashsalt and stripped date metadata.
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .errors import InvalidInput  # noqa: E402


def _read_table(path: str) -> tuple[dict, list[str], list[list[str]]]:
    comments: dict = {}
    rows: list[list[str]] = []
    header: list[str] | None = None
    if not Path(path).is_file():
        raise InvalidInput(f"results file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].strip().split():
                    if "=" in token:
                        k, v = token.split("=", 1)
                        comments[k] = v
                continue
            parsed = next(csv.reader(io.StringIO(line)))
            if header is None:
                header = parsed
            else:
                rows.append(parsed)
    if header is None or not rows:
        raise InvalidInput(f"no data rows in {path}")
    return comments, header, rows


def _columns(header: list[str], rows: list[list[str]]) -> dict:
    return {name: [float(r[i]) for r in rows] for i, name in enumerate(header)}


def _save(fig, out_path: Path) -> Path:
    plt.rcParams["svg.hashsalt"] = "hypolog"
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out_path


def render_csv(path: str, out_dir: str, svg: bool = True) -> list[str]:
    """Render one CSV artifact; returns the written plot paths.

    Raises InvalidInput naming the missing columns when the file matches
    no known schema.
    """
    comments, header, rows = _read_table(path)
    cols = set(header)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(path).stem
    if not svg:
        return []
    if {"t", "C_hat", "stderr"} <= cols:
        c = _columns(header, rows)
        fig, ax = plt.subplots(figsize=(6, 4))
        t, ch, se = c["t"], c["C_hat"], c["stderr"]
        ax.semilogy(t, ch, marker="o", ms=3, lw=1.2, label="C(t) estimate")
        lo = [max(v - e, 1e-300) for v, e in zip(ch, se)]
        hi = [v + e for v, e in zip(ch, se)]
        ax.fill_between(t, lo, hi, alpha=0.3, lw=0)
        ax.set_xlabel("t")
        ax.set_ylabel("C(t)")
        ax.legend()
        return [str(_save(fig, out / f"{stem}_curve.svg"))]
    if {"t", "entropy"} <= cols:
        c = _columns(header, rows)
        fig, ax = plt.subplots(figsize=(6, 4))
        floor = 1e-300
        ax.semilogy(c["t"], [max(v, floor) for v in c["entropy"]],
                    marker="o", ms=3, lw=1.2, label="relative entropy")
        if "fisher" in cols:
            ax.semilogy(c["t"], [max(v, floor) for v in c["fisher"]],
                        marker="s", ms=3, lw=1.0, label="Fisher information")
        if "lambda_hat" in comments:
            lam = float(comments["lambda_hat"])
            d0 = c["entropy"][0]
            ax.semilogy(c["t"], [max(d0 * math.exp(-2 * lam * t), floor)
                                 for t in c["t"]],
                        ls="--", lw=1.0,
                        label=f"envelope exp(-2·{lam:.3g}·t)")
        ax.set_xlabel("t")
        ax.legend()
        return [str(_save(fig, out / f"{stem}_decay.svg"))]
    if {"m", "n", "lambda_hat"} <= cols:
        c = _columns(header, rows)
        fig, ax = plt.subplots(figsize=(6, 4))
        ms = sorted(set(int(v) for v in c["m"]))
        width = 0.8 / max(len(ms), 1)
        for k, m in enumerate(ms):
            pairs = sorted((int(n), lam) for n, lam, mm in
                           zip(c["n"], c["lambda_hat"], c["m"]) if int(mm) == m)
            xs = [n + k * width for n, _ in pairs]
            ax.bar(xs, [lam for _, lam in pairs], width=width, label=f"m={m}")
        ax.set_xlabel("amplification n")
        ax.set_ylabel("lambda estimate")
        ax.legend()
        return [str(_save(fig, out / f"{stem}_table.svg"))]
    known = [{"t", "C_hat", "stderr"}, {"t", "entropy"}, {"m", "n", "lambda_hat"}]
    missing = min(known, key=lambda s: len(s - cols)) - cols
    raise InvalidInput(
        f"{path}: columns {sorted(cols)} match no plot schema; "
        f"closest schema is missing {sorted(missing)}")
