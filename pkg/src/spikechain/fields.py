"""Space-time spike configurations on finite windows, with sparse CSV IO."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

__all__ = ["SpikeField"]


@dataclass
class SpikeField:
    """A 0/1 configuration on ``neurons x [t_start, t_end)``.

    ``data[a, b]`` is the value of ``neurons[a]`` at time ``t_start + b``.
    """

    neurons: tuple
    t_start: int
    t_end: int
    data: np.ndarray

    def __post_init__(self):
        self.neurons = tuple(int(i) for i in self.neurons)
        self.data = np.asarray(self.data, dtype=np.int8)
        if self.data.shape != (len(self.neurons), self.t_end - self.t_start):
            raise ValueError("data shape does not match the declared window")

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.t_start, self.t_end)

    def value(self, neuron: int, t: int) -> int:
        return int(self.data[self.neurons.index(neuron), t - self.t_start])

    def column(self, neuron: int) -> np.ndarray:
        return self.data[self.neurons.index(neuron)]

    def rate(self, neuron: int | None = None) -> float:
        if neuron is None:
            return float(self.data.mean()) if self.data.size else 0.0
        col = self.column(neuron)
        return float(col.mean()) if col.size else 0.0

    def spike_pairs(self) -> list:
        """(neuron, time) pairs of all spikes, sorted by time then neuron."""
        out = []
        for b in range(self.data.shape[1]):
            t = self.t_start + b
            for a in np.nonzero(self.data[:, b])[0]:
                out.append((self.neurons[a], t))
        return out

    # -- CSV raster -----------------------------------------------------------

    def to_csv(self) -> str:
        """Sparse raster: one ``neuron,time`` row per spike, sorted by time
        then neuron, plus a header carrying the window so empty rasters stay
        round-trippable."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["neuron", "time"])
        w.writerow(["#window", f"{min(self.neurons)}..{max(self.neurons)}|{self.t_start}..{self.t_end}"])
        for neuron, t in self.spike_pairs():
            w.writerow([neuron, t])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "SpikeField":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["neuron", "time"]:
            raise ValueError("not a spike raster")
        meta = rows[1]
        if meta[0] != "#window":
            raise ValueError("missing window header")
        neuron_part, time_part = meta[1].split("|")
        n_lo, n_hi = (int(v) for v in neuron_part.split(".."))
        t_lo, t_hi = (int(v) for v in time_part.split(".."))
        neurons = tuple(range(n_lo, n_hi + 1))
        data = np.zeros((len(neurons), t_hi - t_lo), dtype=np.int8)
        for row in rows[2:]:
            if not row:
                continue
            j, t = int(row[0]), int(row[1])
            data[neurons.index(j), t - t_lo] = 1
        return cls(neurons, t_lo, t_hi, data)

    @classmethod
    def read_csv(cls, path) -> "SpikeField":
        with open(path) as fh:
            return cls.from_csv(fh.read())
