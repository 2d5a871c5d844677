"""Discrete memoryless channels and capacity solvers.

Capacity is computed by Blahut-Arimoto with a certified stopping rule: the
iteration stops when the standard upper bound (max over inputs of the
divergence D(p(y|x) || q(y))) and the achieved mutual information differ by
at most tol, so the returned gap is a real bound, not a heuristic.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Union

import numpy as np

from .errors import ValidationError, ConfigError, ConvergenceError
from .info import JointDist, ProbVector, MASS_TOL, mutual_information

# Probability floor applied during Blahut-Arimoto updates; at tolerances of
# 1e-12 bits and above the floor is numerically invisible.
PROB_FLOOR = 1e-300


@dataclass(frozen=True)
class Dmc:
    """A discrete memoryless channel: row-stochastic matrix p(y|x)."""

    input_labels: tuple[str, ...]
    output_labels: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self):
        ins = tuple(str(l) for l in self.input_labels)
        outs = tuple(str(l) for l in self.output_labels)
        if not ins or not outs:
            raise ValidationError("Dmc: alphabets must be non-empty")
        if len(set(ins)) != len(ins) or len(set(outs)) != len(outs):
            raise ValidationError("Dmc: duplicate labels")
        m = np.array(self.matrix, dtype=float)
        if m.shape != (len(ins), len(outs)):
            raise ValidationError(
                f"Dmc: matrix shape {m.shape}, want {(len(ins), len(outs))}"
            )
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise ValidationError("Dmc: matrix entries must be finite and >= 0")
        rows = m.sum(axis=1)
        bad = np.where(np.abs(rows - 1.0) > MASS_TOL)[0]
        if bad.size:
            i = int(bad[0])
            raise ValidationError(
                f"Dmc: row {i} ({ins[i]!r}) sums to {rows[i]!r}, not 1"
            )
        dead = np.where(m.sum(axis=0) == 0.0)[0]
        if dead.size:
            names = [outs[int(j)] for j in dead]
            warnings.warn(
                f"Dmc: outputs {names} are unreachable from every input",
                RuntimeWarning,
                stacklevel=2,
            )
        m.setflags(write=False)
        object.__setattr__(self, "input_labels", ins)
        object.__setattr__(self, "output_labels", outs)
        object.__setattr__(self, "matrix", m)

    @property
    def num_inputs(self) -> int:
        return len(self.input_labels)

    @property
    def num_outputs(self) -> int:
        return len(self.output_labels)

    @classmethod
    def identity(cls, labels) -> "Dmc":
        labels = tuple(labels)
        return cls(labels, labels, np.eye(len(labels)))

    @classmethod
    def from_json(cls, source: Union[str, Path, Mapping]) -> "Dmc":
        """Load from a mapping or JSON file/string with keys
        "inputs", "outputs", "matrix"."""
        from .semantics import load_json_doc

        doc = load_json_doc(source, "channel")
        missing = {"inputs", "outputs", "matrix"} - set(doc)
        if missing:
            raise ConfigError(f"channel document missing keys {sorted(missing)}")
        return cls(tuple(doc["inputs"]), tuple(doc["outputs"]), doc["matrix"])

    def to_dict(self) -> dict:
        return {
            "inputs": list(self.input_labels),
            "outputs": list(self.output_labels),
            "matrix": self.matrix.tolist(),
        }


@dataclass(frozen=True)
class CapacityResult:
    """Certified capacity estimate: the achieved lower bound and its gap."""

    capacity: float
    optimal_input: ProbVector
    iterations: int
    gap: float


def mutual_information_for_input(ch: Dmc, px: ProbVector) -> float:
    """I(X; Y) in bits for a fixed input distribution over ch's inputs."""
    if px.labels != ch.input_labels:
        raise ValidationError(
            f"mutual_information_for_input: input alphabets differ, "
            f"{px.labels} vs {ch.input_labels}"
        )
    joint = JointDist.from_input_and_kernel(px, ch.matrix, ch.output_labels)
    return mutual_information(joint)


def _divergence_terms(matrix: np.ndarray, p: np.ndarray) -> np.ndarray:
    """D(p(y|x) || q(y)) in bits per input symbol, with q = p @ matrix."""
    q = p @ matrix
    # Wherever matrix[x, y] > 0 and p has support, q[y] > 0, so the masked
    # ratio is always finite.
    ratio = np.zeros_like(matrix)
    pos = matrix > 0.0
    ratio[pos] = matrix[pos] * np.log2(matrix[pos] / q[np.nonzero(pos)[1]])
    return ratio.sum(axis=1)


def blahut_arimoto(
    ch: Dmc,
    tol: float = 1e-9,
    max_iter: int = 100_000,
    start: ProbVector | None = None,
) -> CapacityResult:
    """Capacity of a DMC in bits per use, with a certified gap <= tol.

    Each iteration computes per-input divergences D_x = D(p(y|x) || q). Their
    expectation under the current input law is an achievable rate (lower
    bound) and their maximum is an upper bound on capacity; the loop stops
    when the two differ by at most tol and reports the lower bound.

    Raises ConvergenceError carrying the best-so-far CapacityResult when
    max_iter is exhausted.
    """
    if tol <= 0:
        raise ValidationError(f"blahut_arimoto: tol must be > 0, got {tol}")
    if max_iter < 1:
        raise ValidationError(f"blahut_arimoto: max_iter must be >= 1, got {max_iter}")
    m = ch.matrix
    if start is None:
        p = np.full(ch.num_inputs, 1.0 / ch.num_inputs)
    else:
        if start.labels != ch.input_labels:
            raise ValidationError("blahut_arimoto: start distribution alphabet mismatch")
        p = np.maximum(start.probs, PROB_FLOOR)
        p = p / p.sum()

    lower = 0.0
    gap = math.inf
    for it in range(1, max_iter + 1):
        d = _divergence_terms(m, p)
        upper = float(d.max())
        lower = float(np.dot(p, d))
        gap = upper - lower
        if gap <= tol:
            return CapacityResult(
                capacity=max(lower, 0.0),
                optimal_input=ProbVector(ch.input_labels, p),
                iterations=it,
                gap=gap,
            )
        # Multiplicative update p'(x) proportional to p(x) 2^{D_x}; subtract
        # the max exponent first so the powers stay in range.
        p = p * np.exp2(d - d.max())
        p = np.maximum(p, PROB_FLOOR)
        p = p / p.sum()

    best = CapacityResult(
        capacity=max(lower, 0.0),
        optimal_input=ProbVector(ch.input_labels, p),
        iterations=max_iter,
        gap=gap,
    )
    raise ConvergenceError(
        f"blahut_arimoto: gap {gap:.3e} > tol {tol:.3e} after {max_iter} iterations",
        best=best,
        gap=gap,
    )


def semantic_capacity(ch: Dmc, alpha: float, tol: float = 1e-9) -> float:
    """C_s = max_p I(X;Y) / alpha, in bits per channel use.

    alpha is the fraction of message bits that carry semantic content; it
    must lie in (0, 1]. alpha = 0 would make every rate achievable for the
    (empty) semantic content, so it is rejected as a distinguished
    "infinite semantic capacity" condition rather than returning a number.
    """
    if not (0.0 < alpha <= 1.0):
        if alpha == 0.0:
            raise ValidationError(
                "semantic_capacity: alpha = 0 means infinite semantic capacity "
                "(no semantic content to protect); choose alpha in (0, 1]"
            )
        raise ValidationError(
            f"semantic_capacity: alpha must be in (0, 1], got {alpha}"
        )
    return blahut_arimoto(ch, tol=tol).capacity / alpha


def awgn_capacity(snr: float) -> float:
    """Shannon capacity log2(1 + snr) of the scalar AWGN channel, in bits.

    snr is a linear power ratio, not dB.
    """
    if not math.isfinite(snr) or snr < 0:
        raise ValidationError(f"awgn_capacity: snr must be finite and >= 0, got {snr}")
    return math.log2(1.0 + snr)
