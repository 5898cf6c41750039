"""Plain SVG line plots

Each plot is written next to a CSV holding exactly the plotted data, one
row per point, with columns `series,x,y` (horizontal lines are stored as
their two end points).

>>> p = Plot("band", "tau", "s")
>>> p.curve("s", [0, 1, 2], [1.0, 0.5, 0.8])
>>> p.hline("sigma+", 0.9)
>>> [n for n, *_ in p.series]
['s', 'sigma+']
"""

import csv
import math
import logging

from dataclasses import dataclass, field
from pathlib import Path

from .band import fmt

logger = logging.getLogger(__name__)

WIDTH, HEIGHT, PAD = 640, 420, 60
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
TICKS = 5


@dataclass
class Plot:
    title: str
    xlabel: str
    ylabel: str
    series: list = field(default_factory=list)

    def curve(self, name: str, xs, ys, dashed: bool = False):
        pts = [(float(x), float(y)) for x, y in zip(xs, ys) if math.isfinite(y)]
        self.series.append((name, pts, dashed))

    def hline(self, name: str, y: float):
        if not math.isfinite(y):
            logger.debug("skipping infinite line %s", name)
            return
        lo, hi = self._xrange()
        self.series.append((name, [(lo, float(y)), (hi, float(y))], True))

    def _xrange(self):
        xs = [x for _, pts, _ in self.series for x, _ in pts]
        return (min(xs), max(xs)) if xs else (0.0, 1.0)

    def _box(self):
        xs = [x for _, pts, _ in self.series for x, _ in pts] or [0.0, 1.0]
        ys = [y for _, pts, _ in self.series for _, y in pts] or [0.0, 1.0]
        xmin, xmax, ymin, ymax = min(xs), max(xs), min(ys), max(ys)
        xd = (xmax - xmin) or 1.0
        yd = (ymax - ymin) or 1.0
        return xmin, xd, ymin - 0.05 * yd, 1.1 * yd

    def _svg(self):
        xmin, xd, ymin, yd = self._box()
        w, h = WIDTH - 2 * PAD, HEIGHT - 2 * PAD

        def px(x, y):
            return PAD + (x - xmin) / xd * w, HEIGHT - PAD - (y - ymin) / yd * h

        yield (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
               f'height="{HEIGHT}" font-family="sans-serif" font-size="12">')
        yield f'<text x="{WIDTH / 2:.1f}" y="20" text-anchor="middle">{self.title}</text>'
        yield (f'<rect x="{PAD}" y="{PAD}" width="{w}" height="{h}" '
               'fill="none" stroke="black"/>')
        for i in range(TICKS + 1):
            x = xmin + i * xd / TICKS
            y = ymin + i * yd / TICKS
            tx, _ = px(x, ymin)
            _, ty = px(xmin, y)
            yield (f'<text x="{tx:.1f}" y="{HEIGHT - PAD + 16}" '
                   f'text-anchor="middle">{x:.3g}</text>')
            yield (f'<text x="{PAD - 6}" y="{ty + 4:.1f}" '
                   f'text-anchor="end">{y:.3g}</text>')
        yield (f'<text x="{WIDTH / 2:.1f}" y="{HEIGHT - 16}" '
               f'text-anchor="middle">{self.xlabel}</text>')
        yield (f'<text x="16" y="{HEIGHT / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {HEIGHT / 2:.1f})">{self.ylabel}</text>')
        for k, (name, pts, dashed) in enumerate(self.series):
            color = COLORS[k % len(COLORS)]
            coords = " ".join("%.2f,%.2f" % px(x, y) for x, y in pts)
            dash = ' stroke-dasharray="6 4"' if dashed else ""
            yield (f'<polyline points="{coords}" fill="none" stroke="{color}"'
                   f'{dash}/>')
            yield (f'<text x="{WIDTH - PAD + 4}" y="{PAD + 14 * (k + 1)}" '
                   f'fill="{color}" font-size="10">{name}</text>')
        yield "</svg>"

    def write(self, path) -> tuple[Path, Path]:
        """write `path` (SVG) and its sidecar `path` with suffix `.csv`"""
        path = Path(path)
        data = path.with_suffix(".csv")
        with open(path, "w") as out:
            for line in self._svg():
                out.write(line + "\n")
        with open(data, "w", newline="") as out:
            writer = csv.writer(out, lineterminator="\n")
            writer.writerow(("series", "x", "y"))
            for name, pts, _ in self.series:
                for x, y in pts:
                    writer.writerow((name, fmt(x), fmt(y)))
        logger.info("plot written to %s", path)
        return path, data
