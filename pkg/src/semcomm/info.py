"""Probability containers and entropy primitives. All information is in bits.

Conventions: 0 * log2(0) = 0 throughout, probability masses must sum to one
within MASS_TOL, and alphabets are tuples of string labels with positions
doubling as integer symbol indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence as _Seq

import numpy as np

from .errors import ValidationError

MASS_TOL = 1e-12


def _check_labels(labels: Iterable, what: str) -> tuple[str, ...]:
    out = tuple(str(l) for l in labels)
    if not out:
        raise ValidationError(f"{what}: alphabet is empty")
    if len(set(out)) != len(out):
        dupes = sorted({l for l in out if out.count(l) > 1})
        raise ValidationError(f"{what}: duplicate labels {dupes}")
    return out


def _check_mass(arr: np.ndarray, what: str) -> np.ndarray:
    if arr.size == 0:
        raise ValidationError(f"{what}: empty mass array")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{what}: non-finite mass entries")
    if np.any(arr < 0):
        idx = np.unravel_index(int(np.argmin(arr)), arr.shape)
        raise ValidationError(f"{what}: negative mass {arr[idx]!r} at {idx}")
    total = float(arr.sum())
    if abs(total - 1.0) > MASS_TOL:
        raise ValidationError(
            f"{what}: mass sums to {total!r}, off by more than {MASS_TOL}"
        )
    return arr


def entropy_bits(mass: np.ndarray) -> float:
    """Shannon entropy in bits of any non-negative mass array (flattened)."""
    p = np.asarray(mass, dtype=float).ravel()
    nz = p[p > 0.0]
    return float(-np.dot(nz, np.log2(nz)))


@dataclass(frozen=True)
class ProbVector:
    """A probability distribution over a finite labeled alphabet."""

    labels: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self):
        labels = _check_labels(self.labels, "ProbVector")
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size != len(labels):
            raise ValidationError(
                f"ProbVector: {len(labels)} labels but mass shape {probs.shape}"
            )
        _check_mass(probs, "ProbVector")
        probs.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "probs", probs)

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValidationError(
                f"ProbVector: unknown label {label!r}, have {self.labels}"
            ) from None

    def prob(self, label: str) -> float:
        return float(self.probs[self.index(label)])

    @classmethod
    def uniform(cls, labels: Iterable) -> "ProbVector":
        labels = tuple(labels)
        n = len(labels)
        if n == 0:
            raise ValidationError("ProbVector.uniform: alphabet is empty")
        return cls(labels, np.full(n, 1.0 / n))

    @classmethod
    def from_weights(cls, labels: Iterable, weights) -> "ProbVector":
        """Normalize non-negative weights into a distribution."""
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValidationError("from_weights: weights must be finite and >= 0")
        total = w.sum()
        if total <= 0:
            raise ValidationError("from_weights: weights sum to zero")
        return cls(tuple(labels), w / total)


@dataclass(frozen=True)
class JointDist:
    """A joint distribution over two or three labeled axes.

    `table[i, j]` (or `table[i, j, k]`) is the joint mass of the i-th label
    on axis 0, j-th on axis 1, and so on.
    """

    axes: tuple[tuple[str, ...], ...]
    table: np.ndarray

    def __post_init__(self):
        axes = tuple(_check_labels(a, f"JointDist axis {i}")
                     for i, a in enumerate(self.axes))
        if len(axes) not in (2, 3):
            raise ValidationError(
                f"JointDist: need 2 or 3 axes, got {len(axes)}"
            )
        table = np.array(self.table, dtype=float)
        want = tuple(len(a) for a in axes)
        if table.shape != want:
            raise ValidationError(
                f"JointDist: table shape {table.shape} does not match axes {want}"
            )
        _check_mass(table, "JointDist")
        table.setflags(write=False)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "table", table)

    @property
    def ndim(self) -> int:
        return len(self.axes)

    def marginal_table(self, keep: tuple[int, ...]) -> np.ndarray:
        """Sum out every axis not listed in `keep` (kept axes stay in order)."""
        keep = tuple(keep)
        if len(set(keep)) != len(keep) or any(
            a < 0 or a >= self.ndim for a in keep
        ):
            raise ValidationError(f"marginal_table: bad axis list {keep}")
        drop = tuple(a for a in range(self.ndim) if a not in keep)
        out = self.table.sum(axis=drop) if drop else self.table
        if keep != tuple(sorted(keep)):
            sorted_keep = tuple(sorted(keep))
            out = np.transpose(out, tuple(sorted_keep.index(a) for a in keep))
        return out

    def marginal(self, axis: int) -> ProbVector:
        if axis < 0 or axis >= self.ndim:
            raise ValidationError(f"marginal: axis {axis} out of range")
        return ProbVector(self.axes[axis], self.marginal_table((axis,)))

    @classmethod
    def from_input_and_kernel(
        cls,
        px: ProbVector,
        kernel: np.ndarray,
        out_labels: Iterable,
    ) -> "JointDist":
        """Build p(x, y) = p(x) * kernel[x, y] from a row-stochastic kernel."""
        k = np.asarray(kernel, dtype=float)
        out_labels = tuple(out_labels)
        if k.shape != (len(px), len(out_labels)):
            raise ValidationError(
                f"from_input_and_kernel: kernel shape {k.shape}, "
                f"want {(len(px), len(out_labels))}"
            )
        if np.any(k < 0) or not np.all(np.isfinite(k)):
            raise ValidationError("from_input_and_kernel: kernel entries must be finite and >= 0")
        rows = k.sum(axis=1)
        bad = np.where(np.abs(rows - 1.0) > MASS_TOL)[0]
        if bad.size:
            i = int(bad[0])
            raise ValidationError(
                f"from_input_and_kernel: kernel row {i} ({px.labels[i]!r}) sums to {rows[i]!r}"
            )
        return cls((px.labels, out_labels), px.probs[:, None] * k)


@dataclass(frozen=True)
class Sequence:
    """A length-n word of symbol indices over an alphabet of known size."""

    symbols: np.ndarray
    alphabet_size: int

    def __post_init__(self):
        sym = np.asarray(self.symbols)
        if sym.ndim != 1 or sym.size == 0:
            raise ValidationError("Sequence: need a non-empty 1-D index array")
        if not np.issubdtype(sym.dtype, np.integer):
            if not np.all(sym == np.floor(sym)):
                raise ValidationError("Sequence: symbols must be integers")
            sym = sym.astype(np.int64)
        else:
            sym = sym.astype(np.int64)
        if self.alphabet_size < 1:
            raise ValidationError("Sequence: alphabet_size must be >= 1")
        if sym.min() < 0 or sym.max() >= self.alphabet_size:
            raise ValidationError(
                f"Sequence: symbol out of range for alphabet size {self.alphabet_size}"
            )
        sym.setflags(write=False)
        object.__setattr__(self, "symbols", sym)

    def __len__(self) -> int:
        return int(self.symbols.size)


def entropy(p: ProbVector) -> float:
    """H(X) in bits."""
    return entropy_bits(p.probs)


def joint_entropy(joint: JointDist) -> float:
    """H over all axes of the joint table, in bits."""
    return entropy_bits(joint.table)


def conditional_entropy(joint: JointDist, target: int, given: int | _Seq[int]) -> float:
    """H(target | given) in bits, computed as H(target, given) - H(given)."""
    giv = (given,) if isinstance(given, (int, np.integer)) else tuple(given)
    axes = (target, *giv)
    if len(set(axes)) != len(axes):
        raise ValidationError(f"conditional_entropy: axes {axes} overlap")
    both = joint.marginal_table(tuple(sorted(axes)))
    cond = joint.marginal_table(tuple(sorted(giv)))
    return entropy_bits(both) - entropy_bits(cond)


def mutual_information(joint: JointDist, a: int = 0, b: int = 1) -> float:
    """I(A; B) in bits between two axes of a joint distribution.

    Clamps the tiny negative values that cancellation can produce; a result
    below -1e-9 is treated as a real inconsistency and raises.
    """
    if a == b:
        raise ValidationError("mutual_information: axes must differ")
    ha = entropy_bits(joint.marginal_table((a,)))
    hb = entropy_bits(joint.marginal_table((b,)))
    hab = entropy_bits(joint.marginal_table(tuple(sorted((a, b)))))
    mi = ha + hb - hab
    if mi < -1e-9:
        raise ValidationError(f"mutual_information: got {mi}, table is inconsistent")
    return max(mi, 0.0)


def conditional_mutual_information(joint: JointDist, a: int, b: int, c: int) -> float:
    """I(A; B | C) = H(A|C) + H(B|C) - H(A,B|C), in bits."""
    if len({a, b, c}) != 3:
        raise ValidationError("conditional_mutual_information: axes must be distinct")
    hc = entropy_bits(joint.marginal_table((c,)))
    hac = entropy_bits(joint.marginal_table(tuple(sorted((a, c)))))
    hbc = entropy_bits(joint.marginal_table(tuple(sorted((b, c)))))
    habc = entropy_bits(joint.marginal_table(tuple(sorted((a, b, c)))))
    mi = (hac - hc) + (hbc - hc) - (habc - hc)
    if mi < -1e-9:
        raise ValidationError(
            f"conditional_mutual_information: got {mi}, table is inconsistent"
        )
    return max(mi, 0.0)


def empirical_rate_bits(probs: np.ndarray) -> float:
    """-(1/n) * sum(log2 probs); +inf if any entry is zero."""
    p = np.asarray(probs, dtype=float)
    if np.any(p <= 0.0):
        return float("inf")
    return float(-np.mean(np.log2(p)))


def is_jointly_typical(
    x: Sequence, y: Sequence, joint: JointDist, eps: float
) -> bool:
    """Weak joint typicality of (x, y) against a two-axis joint distribution.

    Checks all three empirical rates: the per-symbol surprisals of x, of y,
    and of the pair must each sit within eps of H(X), H(Y), H(X, Y). A pair
    that uses a zero-probability transition is never typical.
    """
    if joint.ndim != 2:
        raise ValidationError("is_jointly_typical: need a two-axis joint")
    if eps <= 0:
        raise ValidationError(f"is_jointly_typical: eps must be > 0, got {eps}")
    if len(x) != len(y):
        raise ValidationError(
            f"is_jointly_typical: length mismatch {len(x)} vs {len(y)}"
        )
    nx, ny = joint.table.shape
    if x.alphabet_size != nx or y.alphabet_size != ny:
        raise ValidationError(
            "is_jointly_typical: sequence alphabets do not match the joint table"
        )
    pxy = joint.table[x.symbols, y.symbols]
    if np.any(pxy <= 0.0):
        return False
    px = joint.marginal_table((0,))[x.symbols]
    py = joint.marginal_table((1,))[y.symbols]
    hx = entropy_bits(joint.marginal_table((0,)))
    hy = entropy_bits(joint.marginal_table((1,)))
    hxy = entropy_bits(joint.table)
    return (
        abs(empirical_rate_bits(px) - hx) <= eps
        and abs(empirical_rate_bits(py) - hy) <= eps
        and abs(empirical_rate_bits(pxy) - hxy) <= eps
    )
