"""
Output tables and charts for smoothing runs.
CSV is the canonical output; the SVG bar chart (matplotlib) is a static preview.
"""
from pathlib import Path
from typing import Dict, Optional, Sequence, Union

import numpy as np
import pandas as pd
from loguru import logger
from matplotlib.figure import Figure

from generators import GeneratorMatrix
from posterior import CountVector

POSTERIOR_COLUMNS = ['category', 'prior_mean', 'empirical', 'posterior_mean']


def posterior_table(generator: GeneratorMatrix, counts: CountVector, posterior: np.ndarray,
                    posterior_sd: Optional[np.ndarray] = None) -> pd.DataFrame:
    """One row per category, 1-based indices (or labels)"""
    frame = pd.DataFrame({
        'category': [generator.label(x) for x in range(generator.dim)],
        'prior_mean': generator.mu,
        'empirical': counts.empirical(),
        'posterior_mean': posterior,
    }, columns=POSTERIOR_COLUMNS)
    if posterior_sd is not None:
        frame['posterior_sd'] = posterior_sd
    return frame


def summary_table(labels: Sequence[str], counts: CountVector,
                  posteriors: Dict[str, np.ndarray]) -> pd.DataFrame:
    """Empirical pmf plus one posterior column per named generator"""
    frame = pd.DataFrame({'category': list(labels), 'empirical': counts.empirical()})
    for name, pmf in posteriors.items():
        frame[name] = pmf
    return frame


def write_csv(frame: pd.DataFrame, path: Union[str, Path]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format='%.17g')
    logger.info(f"Wrote {len(frame)} rows to {path}")


def render_chart(values: Sequence[float], labels: Sequence[str], title: str = "",
                 overlay: Optional[Sequence[float]] = None) -> Figure:
    """
    Bar chart of `values` with optional overlay markers (e.g. the empirical pmf)

    Built on a bare Figure, so no pyplot state or display backend is involved.
    """
    fig = Figure(figsize=(9, 4))
    ax = fig.add_subplot(1, 1, 1)
    positions = np.arange(len(values))
    ax.bar(positions, values, width=0.8, color='#4a78b5', label='posterior mean')
    if overlay is not None:
        overlay = np.asarray(overlay, dtype=float)
        shown = overlay > 0
        ax.scatter(positions[shown], overlay[shown], color='#c0392b', zorder=3, s=14, label='empirical')
        ax.legend(loc='upper right', frameon=False)
    ax.set_xticks(positions)
    ax.set_xticklabels([str(label) for label in labels], fontsize=7)
    ax.set_xlabel('category')
    ax.set_ylabel('probability')
    ax.set_title(title)
    ax.set_ylim(bottom=0)
    fig.tight_layout()
    return fig


def write_svg(path: Union[str, Path], values: Sequence[float], labels: Sequence[str],
              title: str = "", overlay: Optional[Sequence[float]] = None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    render_chart(values, labels, title, overlay).savefig(path, format='svg')
    logger.info(f"Wrote chart to {path}")
