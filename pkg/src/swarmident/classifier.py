"""Elman-network classifier judging speed samples as genuine or counterfeit."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels as kernels

# Input scaling for classifier judging: linear speed is divided by the top
# wheel speed and angular speed by the top turn rate, mapping both channels
# into [-1, 1]. Pass scaled=False to judge() to feed raw values instead.
DEFAULT_SPEED_SCALE = 12.8
DEFAULT_TURN_SCALE = 2.0 * 12.8 / 5.1


class Judgment(Enum):
    AGENT = "agent"
    MODEL = "model"


class Provenance(Enum):
    GENUINE = "genuine"
    COUNTERFEIT = "counterfeit"


@dataclass
class SpeedSample:
    """A (linear, angular) speed time series — all a classifier ever sees."""

    pairs: np.ndarray  # (T, 2)
    provenance: Provenance
    individual_id: int = 0


def sigmoid(x: float) -> float:
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@dataclass
class ElmanNet:
    """Recurrent network with logistic-sigmoid hidden and output units.

    ``w_in`` is (n_in+1, n_hidden) with the bias weights in the last row,
    ``w_rec`` is (n_hidden, n_hidden), ``w_out`` is (n_hidden+1, n_out) with
    the bias weights in the last row.
    """

    w_in: np.ndarray
    w_rec: np.ndarray
    w_out: np.ndarray
    hidden: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.w_in = np.ascontiguousarray(self.w_in, dtype=np.float64)
        self.w_rec = np.ascontiguousarray(self.w_rec, dtype=np.float64)
        self.w_out = np.ascontiguousarray(self.w_out, dtype=np.float64)
        if self.hidden is None:
            self.hidden = np.zeros(self.n_hidden, dtype=np.float64)
        if self.w_in.shape[1] != self.n_hidden or \
                self.w_rec.shape != (self.n_hidden, self.n_hidden) or \
                self.w_out.shape[0] != self.n_hidden + 1:
            raise ValueError("inconsistent weight shapes")

    @property
    def n_in(self) -> int:
        return self.w_in.shape[0] - 1

    @property
    def n_hidden(self) -> int:
        return self.w_rec.shape[0]

    @property
    def n_out(self) -> int:
        return self.w_out.shape[1]

    @staticmethod
    def n_params(n_in: int, n_hidden: int, n_out: int) -> int:
        return (n_in + 1) * n_hidden + n_hidden * n_hidden + (n_hidden + 1) * n_out

    @classmethod
    def zeros(cls, n_in: int, n_hidden: int, n_out: int) -> "ElmanNet":
        return cls(np.zeros((n_in + 1, n_hidden)),
                   np.zeros((n_hidden, n_hidden)),
                   np.zeros((n_hidden + 1, n_out)))

    @classmethod
    def from_flat(cls, flat, n_in: int, n_hidden: int, n_out: int) -> "ElmanNet":
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != cls.n_params(n_in, n_hidden, n_out):
            raise ValueError(
                f"expected {cls.n_params(n_in, n_hidden, n_out)} weights, "
                f"got {flat.size}")
        a = (n_in + 1) * n_hidden
        b = a + n_hidden * n_hidden
        return cls(flat[:a].reshape(n_in + 1, n_hidden).copy(),
                   flat[a:b].reshape(n_hidden, n_hidden).copy(),
                   flat[b:].reshape(n_hidden + 1, n_out).copy())

    def to_flat(self) -> np.ndarray:
        return np.concatenate([self.w_in.ravel(), self.w_rec.ravel(),
                               self.w_out.ravel()])

    def reset(self) -> None:
        self.hidden[:] = 0.0

    def copy(self) -> "ElmanNet":
        return ElmanNet(self.w_in.copy(), self.w_rec.copy(),
                        self.w_out.copy(), self.hidden.copy())

    def forward_step(self, inputs) -> np.ndarray:
        """One recurrent step; updates the hidden state, returns the outputs."""
        inputs = np.asarray(inputs, dtype=float)
        if inputs.shape != (self.n_in,):
            raise ValueError(f"expected {self.n_in} inputs")
        h = self.n_hidden
        new = np.empty(h)
        for k in range(h):
            acc = self.w_in[self.n_in, k]
            for i in range(self.n_in):
                acc += inputs[i] * self.w_in[i, k]
            for m in range(h):
                acc += self.hidden[m] * self.w_rec[m, k]
            new[k] = sigmoid(acc)
        self.hidden[:] = new
        out = np.empty(self.n_out)
        for o in range(self.n_out):
            acc = self.w_out[h, o]
            for m in range(h):
                acc += self.hidden[m] * self.w_out[m, o]
            out[o] = sigmoid(acc)
        return out


def classifier_net(flat=None) -> ElmanNet:
    """The 2-input, 5-hidden, 1-output judging network (46 weights)."""
    if flat is None:
        return ElmanNet.zeros(2, 5, 1)
    return ElmanNet.from_flat(flat, 2, 5, 1)


def scale_pairs(pairs, speed_scale: float = DEFAULT_SPEED_SCALE,
                turn_scale: float = DEFAULT_TURN_SCALE) -> np.ndarray:
    scaled = np.array(pairs, dtype=np.float64, copy=True)
    scaled[..., 0] /= speed_scale
    scaled[..., 1] /= turn_scale
    return scaled


def final_outputs(net: ElmanNet, samples: np.ndarray) -> np.ndarray:
    """Final-step network output for each (T, 2) sample in a (S, T, 2) batch."""
    samples = np.ascontiguousarray(samples, dtype=np.float64)
    out = np.empty(samples.shape[0], dtype=np.float64)
    kernels.elman_final_outputs(net.w_in, net.w_rec, net.w_out, samples, out)
    return out


def judge(net: ElmanNet, sample, scaled: bool = True,
          speed_scale: float = DEFAULT_SPEED_SCALE,
          turn_scale: float = DEFAULT_TURN_SCALE) -> Judgment:
    """Judge one speed sample: output < 0.5 means MODEL, otherwise AGENT.

    The hidden state is reset before the sample is fed and again afterwards,
    so the judgment is a pure function of (weights, sample).
    """
    pairs = sample.pairs if isinstance(sample, SpeedSample) else np.asarray(sample)
    if len(pairs) == 0:
        raise ValueError("cannot judge an empty sample")
    x = scale_pairs(pairs, speed_scale, turn_scale) if scaled \
        else np.asarray(pairs, dtype=np.float64)
    out = final_outputs(net, x[None, :, :])
    net.reset()
    return Judgment.MODEL if out[0] < 0.5 else Judgment.AGENT


def net_to_json(net: ElmanNet) -> dict:
    return {"n_in": net.n_in, "n_hidden": net.n_hidden, "n_out": net.n_out,
            "weights": [float(v) for v in net.to_flat()]}


def net_from_json(obj: dict) -> ElmanNet:
    return ElmanNet.from_flat(obj["weights"], int(obj["n_in"]),
                              int(obj["n_hidden"]), int(obj["n_out"]))
