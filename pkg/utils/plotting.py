import logging

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from cps.diffraction import Spectrum

logger = logging.getLogger(__name__)


def stick_plot(spec: Spectrum, path: str, log_scale: bool = False, title: str = "") -> str:
    """
    Frequencies against intensity as vertical sticks, saved as SVG.
    Only the first physical coordinate is drawn when d = 2.
    """
    fig, ax = plt.subplots(1, 1, figsize=(8, 4))
    try:
        if len(spec):
            k = spec.frequencies[:, 0]
            intensity = spec.intensities
            floor = max(float(intensity[intensity > 0].min()) if np.any(intensity > 0) else 1e-12, 1e-300)
            base = floor / 10.0 if log_scale else 0.0
            ax.vlines(k, base, np.maximum(intensity, base), linewidth=1.0)
            if log_scale:
                ax.set_yscale('log')
        ax.set_xlabel('k')
        ax.set_ylabel('intensity')
        ax.set_title(title or f"R = {spec.R!r} ({spec.method})")
        # fixed hash salt keeps the SVG ids stable between runs
        matplotlib.rcParams['svg.hashsalt'] = 'modelsetlab'
        fig.savefig(path, format='svg', metadata={'Date': None})
        logger.info(f"Wrote stick plot of {len(spec)} peaks to {path}")
    finally:
        plt.close(fig)
    return path
