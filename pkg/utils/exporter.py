import csv
import logging
import os
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from cps.autocorrelation import CoefficientMap
from cps.combs import PointSetPatch, WeightedComb
from cps.diffraction import Spectrum
from cps.scheme import star_many

logger = logging.getLogger(__name__)


def _fmt(value) -> str:
    """repr for floats so reruns write identical bytes"""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


class CsvExporter:
    """Writes the CSV artifacts of a run into one output directory"""

    def __init__(self, output_dir: str) -> None:
        self.output_dir = output_dir
        os.makedirs(output_dir, exist_ok=True)
        self.written: List[str] = []

    def _write(self, filename: str, header: Sequence[str], rows: Iterable[Sequence]) -> str:
        path = os.path.join(self.output_dir, filename)
        count = 0
        with open(path, 'w', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
                count += 1
        self.written.append(path)
        logger.debug(f"Wrote {count} rows to {path}")
        return path

    def patch(self, comb: WeightedComb, filename: str = "patch.csv") -> str:
        """integer coords..., physical coords..., internal coords..., weight_re, weight_im"""
        patch: PointSetPatch = comb.patch
        scheme = patch.scheme
        header = ([f"z{j}" for j in range(scheme.n)] + [f"x{j}" for j in range(scheme.d)]
                  + [f"u{j}" for j in range(scheme.m)] + ["weight_re", "weight_im"])
        rows = (list(z) + list(x) + list(u) + [w.real, w.imag]
                for z, x, u, w in zip(patch.points, patch.physical, patch.internal, comb.weights))
        return self._write(filename, header, rows)

    def coefficients(self, coeffs: CoefficientMap, filename: str, scheme=None) -> str:
        """key..., physical..., internal..., re, im, abs"""
        if not len(coeffs):
            return self._write(filename, ["re", "im", "abs"], [])
        key_width = coeffs.keys.shape[1]
        positions = coeffs.positions
        internal = star_many(scheme, coeffs.keys) if scheme is not None else np.zeros((len(coeffs), 0))
        header = ([f"key{j}" for j in range(key_width)] + [f"x{j}" for j in range(positions.shape[1])]
                  + [f"u{j}" for j in range(internal.shape[1])] + ["re", "im", "abs"])
        order = np.lexsort(coeffs.keys.T[::-1]) if coeffs.keys.dtype != object else range(len(coeffs))
        rows = (list(coeffs.keys[i]) + list(positions[i]) + list(internal[i])
                + [coeffs.values[i].real, coeffs.values[i].imag, abs(coeffs.values[i])] for i in order)
        return self._write(filename, header, rows)

    def null_means(self, radii: Sequence[float], values: Sequence[float], filename: str = "null_mean.csv") -> str:
        return self._write(filename, ["n", "R_n", "value"],
                           ((n, r, v) for n, (r, v) in enumerate(zip(radii, values))))

    def spectrum(self, spec: Spectrum, filename: str = "spectrum.csv") -> str:
        """k..., intensity, method, R"""
        d = spec.frequencies.shape[1] if len(spec) else 1
        header = [f"k{j}" for j in range(d)] + ["intensity", "method", "R"]
        rows = (list(e.frequency) + [e.intensity, spec.method, spec.R] for e in spec.entries)
        return self._write(filename, header, rows)

    def table(self, filename: str, header: Sequence[str], rows: Iterable[Tuple]) -> str:
        return self._write(filename, header, rows)
