"""Many-to-one semantic channel coding: partitions, codebooks, decoders,
Monte Carlo simulation, exact small-instance evaluation, and the semantic
Fano machinery.

Message counts are powers of two derived from (n, R, alpha) by ceilings, so
they can exceed what fits in memory by hundreds of orders of magnitude. Two
simulation regimes cover this:

- materialized: codewords live in arrays; the literal protocol runs.
- virtual: for fresh per-trial codebooks too large to hold, each trial
  draws only the true codeword and the channel output, then realizes the
  correct/incorrect outcome with the exact conditional probability that a
  maximum-likelihood decoder over the full random codebook would produce.
  The competitor codewords' score distribution given y is computed exactly
  (it depends on y only through its symbol counts), so the simulated error
  process is distributed identically to the literal one.

Determinism: all randomness flows through Philox keys (seed, stream_id).
Trials are processed in fixed batches of BATCH_TRIALS, batch b drawing from
stream b; shared codebooks use stream CODEBOOK_STREAM, seeded-random
partitions PARTITION_STREAM, and Fano campaign instance i stream
FANO_STREAM + i. Results are therefore bit-identical across runs and thread
counts.

Scores are canonical: every path computes sum over (a, b) in row-major
order of count(a, b) * log2 p(b|a), so equal empirical count matrices give
bit-equal floats and "exact tie" is well defined. Ties and all-impossible
likelihoods decode to the erasure mark.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from .capacity import CapacityResult, Dmc, blahut_arimoto
from .channels import ChannelRng, _row_cdfs
from .errors import ValidationError, ConfigError, BudgetError, ConvergenceError
from .info import JointDist, ProbVector, Sequence, entropy_bits

BATCH_TRIALS = 4096
FULL_CODEBOOK_CAP = 2**20
ENUM_BUDGET = 10**7
# Per-trial fresh codebooks are materialized only while count * n stays at or
# below this; beyond it the virtual regime takes over.
MATERIALIZE_LIMIT = 2048
# Cap on the support size of the virtual regime's competitor score grid.
DIST_BUDGET = 2 * 10**6

CODEBOOK_STREAM = 2**62
PARTITION_STREAM = 2**62 + 1
FANO_STREAM = 2**61

NEG = -1.0e30          # stand-in for log2(0); sums of these stay far below
NEG_THRESHOLD = -1.0e29  # any score at or below this is an impossible event

Z95 = 1.959963984540054  # two-sided 95% normal quantile


def _ceil_bits(value: float, what: str) -> int:
    """Smallest integer >= value, snapping values within 1e-9 of an integer."""
    nearest = round(value)
    if abs(value - nearest) < 1e-9:
        return int(nearest)
    out = math.ceil(value)
    if out < 0:
        raise ValidationError(f"{what}: negative bit count {value}")
    return int(out)


@dataclass(frozen=True)
class CodeConfig:
    """Blocklength, requested rate, and semantic fraction of a code.

    Counts are derived by ceilings: 2^ceil(nR) messages, 2^ceil(alpha n R)
    semantic classes. Both are exact Python integers; they routinely exceed
    2^60, so nothing here assumes they fit a machine word. The realized
    rates (ceil(nR)/n and ceil(alpha n R)/n) are what the code actually
    uses and are reported alongside the requested ones.
    """

    n: int
    rate: float
    alpha: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool) or self.n < 1:
            raise ValidationError(f"CodeConfig: n must be an integer >= 1, got {self.n!r}")
        if not math.isfinite(self.rate) or self.rate <= 0:
            raise ValidationError(f"CodeConfig: rate must be > 0, got {self.rate}")
        if not (0.0 < self.alpha <= 1.0):
            raise ValidationError(f"CodeConfig: alpha must be in (0, 1], got {self.alpha}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def message_bits(self) -> int:
        return max(_ceil_bits(self.n * self.rate, "message_bits"), 1)

    @property
    def semantic_bits(self) -> int:
        return max(_ceil_bits(self.alpha * self.n * self.rate, "semantic_bits"), 1)

    @property
    def message_count(self) -> int:
        return 1 << self.message_bits

    @property
    def semantic_count(self) -> int:
        return 1 << self.semantic_bits

    @property
    def realized_rate(self) -> float:
        return self.message_bits / self.n

    @property
    def realized_semantic_rate(self) -> float:
        return self.semantic_bits / self.n

    def describe(self) -> dict:
        return {
            "n": self.n,
            "rate": self.rate,
            "alpha": self.alpha,
            "message_bits": self.message_bits,
            "semantic_bits": self.semantic_bits,
            "realized_rate": self.realized_rate,
            "realized_semantic_rate": self.realized_semantic_rate,
        }


PARTITION_SCHEMES = ("contiguous", "interleaved", "seeded-random")


@dataclass(frozen=True)
class SemanticPartition:
    """Disjoint classes covering the message set [0, message_count).

    class_of[w] is the class index of message w; classes holds each class's
    sorted member indices. Messages and classes are 0-based throughout.
    """

    message_count: int
    classes: tuple[np.ndarray, ...]
    scheme: str = "explicit"

    def __post_init__(self):
        if self.message_count < 1:
            raise ValidationError("SemanticPartition: message_count must be >= 1")
        if not self.classes:
            raise ValidationError("SemanticPartition: no classes")
        classes = tuple(np.sort(np.asarray(c, dtype=np.int64)) for c in self.classes)
        sizes = np.array([c.size for c in classes], dtype=np.int64)
        if np.any(sizes == 0):
            raise ValidationError("SemanticPartition: empty class")
        allm = np.concatenate(classes)
        if allm.size != self.message_count or not np.array_equal(
            np.sort(allm), np.arange(self.message_count)
        ):
            raise ValidationError(
                "SemanticPartition: classes must disjointly cover the message set"
            )
        class_of = np.empty(self.message_count, dtype=np.int64)
        for m, members in enumerate(classes):
            class_of[members] = m
        class_of.setflags(write=False)
        for c in classes:
            c.setflags(write=False)
        object.__setattr__(self, "classes", classes)
        object.__setattr__(self, "_class_of", class_of)
        object.__setattr__(self, "_sizes", sizes)

    @property
    def class_count(self) -> int:
        return len(self.classes)

    @property
    def class_of(self) -> np.ndarray:
        return self._class_of

    @property
    def sizes(self) -> np.ndarray:
        return self._sizes

    @property
    def is_equal_sized(self) -> bool:
        return bool(np.all(self._sizes == self._sizes[0]))

    @property
    def representatives(self) -> np.ndarray:
        """Smallest member of each class; the class's canonical message."""
        return np.array([c[0] for c in self.classes], dtype=np.int64)

    @property
    def beta(self) -> float:
        """Largest class mass fraction max_m |class m| / message_count."""
        return float(self._sizes.max()) / self.message_count


def partition_from_counts(
    message_count: int,
    class_count: int,
    scheme: str,
    seed: int | None = None,
) -> SemanticPartition:
    """Partition [0, message_count) into class_count classes.

    When class_count does not divide message_count, the last class absorbs
    the remainder (contiguous and seeded-random) or sizes differ by one
    (interleaved); downstream reports flag the unequal sizes.
    """
    if scheme not in PARTITION_SCHEMES:
        raise ConfigError(
            f"partition scheme must be one of {PARTITION_SCHEMES}, got {scheme!r}"
        )
    if class_count > message_count:
        raise ConfigError(
            f"cannot split {message_count} messages into {class_count} classes"
        )
    if class_count < 1:
        raise ConfigError("class_count must be >= 1")
    if message_count > FULL_CODEBOOK_CAP:
        raise BudgetError(
            f"cannot materialize a partition of {message_count} messages "
            f"(cap {FULL_CODEBOOK_CAP}); large-message simulations use the "
            "virtual regime, which never builds one"
        )
    base = message_count // class_count
    if scheme == "interleaved":
        classes = [
            np.arange(m, message_count, class_count) for m in range(class_count)
        ]
    else:
        if scheme == "seeded-random":
            if seed is None:
                raise ConfigError("seeded-random partitions need a seed")
            order = ChannelRng(seed, PARTITION_STREAM).generator().permutation(
                message_count
            )
        else:
            order = np.arange(message_count)
        bounds = [m * base for m in range(class_count)] + [message_count]
        classes = [order[bounds[m]:bounds[m + 1]] for m in range(class_count)]
    return SemanticPartition(message_count, tuple(classes), scheme=scheme)


def make_partition(
    cfg: CodeConfig, scheme: str, seed: int | None = None
) -> SemanticPartition:
    """Partition cfg's message set into its semantic classes.

    Counts derived from CodeConfig are powers of two, so the classes always
    come out equal-sized here.
    """
    return partition_from_counts(cfg.message_count, cfg.semantic_count, scheme, seed)


def semantic_map(w: int, p: SemanticPartition) -> int:
    """The class index of message w."""
    if not (0 <= w < p.message_count):
        raise ValidationError(
            f"semantic_map: message {w} outside [0, {p.message_count})"
        )
    return int(p.class_of[w])


@dataclass(frozen=True)
class Codebook:
    """A matrix of codewords (one row each) over a channel input alphabet."""

    codewords: np.ndarray
    alphabet_size: int
    provenance: dict | None = None

    def __post_init__(self):
        cw = np.asarray(self.codewords)
        if cw.ndim != 2 or cw.size == 0:
            raise ValidationError("Codebook: need a non-empty (count, n) array")
        if not np.issubdtype(cw.dtype, np.integer):
            raise ValidationError("Codebook: codeword symbols must be integers")
        cw = cw.astype(np.int64)
        if self.alphabet_size < 1 or cw.min() < 0 or cw.max() >= self.alphabet_size:
            raise ValidationError("Codebook: symbol out of alphabet range")
        cw.setflags(write=False)
        object.__setattr__(self, "codewords", cw)

    @property
    def count(self) -> int:
        return int(self.codewords.shape[0])

    @property
    def n(self) -> int:
        return int(self.codewords.shape[1])

    def sequence(self, index: int) -> Sequence:
        if not (0 <= index < self.count):
            raise ValidationError(f"Codebook: index {index} outside [0, {self.count})")
        return Sequence(self.codewords[index], self.alphabet_size)


def _sample_symbols(gen: np.random.Generator, shape, cdf: np.ndarray) -> np.ndarray:
    u = gen.random(shape)
    return np.searchsorted(cdf, u, side="right").astype(np.int64)


def _codebook_from_px(
    count: int, n: int, px: ProbVector, rng: ChannelRng, note: str
) -> Codebook:
    cdf = np.cumsum(px.probs)
    cdf[-1] = 1.0
    symbols = _sample_symbols(rng.generator(), (count, n), cdf)
    return Codebook(
        symbols,
        len(px),
        provenance={
            "seed": rng.seed,
            "stream_id": rng.stream_id,
            "px": list(px.probs),
            "kind": note,
        },
    )


def generate_codebook(cfg: CodeConfig, px: ProbVector, rng: ChannelRng) -> Codebook:
    """One codeword per semantic class, symbols i.i.d. from px."""
    count = cfg.semantic_count
    if count * cfg.n > FULL_CODEBOOK_CAP * 64:
        raise BudgetError(
            f"generate_codebook: {count} codewords of length {cfg.n} cannot be "
            "materialized; use simulate(), whose virtual regime handles this size"
        )
    return _codebook_from_px(int(count), cfg.n, px, rng, "per-class")


def generate_full_codebook(cfg: CodeConfig, px: ProbVector, rng: ChannelRng) -> Codebook:
    """One codeword per message, symbols i.i.d. from px (cap 2^20 messages)."""
    if cfg.message_count > FULL_CODEBOOK_CAP:
        raise BudgetError(
            f"generate_full_codebook: {cfg.message_count} messages exceed the "
            f"{FULL_CODEBOOK_CAP} cap; use the per-class codebook instead"
        )
    return _codebook_from_px(int(cfg.message_count), cfg.n, px, rng, "full")


def encode(w: int, p: SemanticPartition, cb: Codebook) -> Sequence:
    """The semantic encoder: message w transmits its class's codeword."""
    if cb.count != p.class_count:
        raise ValidationError(
            f"encode: codebook has {cb.count} codewords but partition has "
            f"{p.class_count} classes"
        )
    return cb.sequence(semantic_map(w, p))


@dataclass(frozen=True)
class DecodeOutcome:
    """Either a decoded index or the erasure mark (index None)."""

    index: int | None

    @property
    def is_erasure(self) -> bool:
        return self.index is None


ERASURE = DecodeOutcome(None)


def _log_matrix(matrix: np.ndarray) -> np.ndarray:
    out = np.full(matrix.shape, NEG)
    pos = matrix > 0.0
    out[pos] = np.log2(matrix[pos])
    return out


def _scores_for_one(cw: np.ndarray, y: np.ndarray, logmat: np.ndarray) -> np.ndarray:
    """Canonical scores of each codeword row against a single y."""
    k = cw.shape[0]
    scores = np.zeros(k)
    a_count, b_count = logmat.shape
    for a in range(a_count):
        xa = cw == a
        for b in range(b_count):
            cnt = (xa & (y == b)).sum(axis=1).astype(float)
            scores += cnt * logmat[a, b]
    return scores


def _scores_shared(cw: np.ndarray, ys: np.ndarray, logmat: np.ndarray) -> np.ndarray:
    """Canonical scores, (trials, count), one shared codebook against many y."""
    a_count, b_count = logmat.shape
    scores = np.zeros((ys.shape[0], cw.shape[0]))
    for a in range(a_count):
        xa = (cw == a).astype(float)
        for b in range(b_count):
            yb = (ys == b).astype(float)
            cnt = yb @ xa.T
            scores += cnt * logmat[a, b]
    return scores


def _scores_per_trial(cws: np.ndarray, ys: np.ndarray, logmat: np.ndarray) -> np.ndarray:
    """Canonical scores, (trials, count), one codebook per trial."""
    a_count, b_count = logmat.shape
    scores = np.zeros(cws.shape[:2])
    for a in range(a_count):
        xa = cws == a
        for b in range(b_count):
            cnt = (xa & (ys == b)[:, None, :]).sum(axis=2).astype(float)
            scores += cnt * logmat[a, b]
    return scores


def _decide(scores: np.ndarray) -> np.ndarray:
    """Row-wise ML decision with erasures: -1 on ties or all-impossible."""
    best = scores.max(axis=1)
    is_best = scores == best[:, None]
    picks = np.argmax(is_best, axis=1).astype(np.int64)
    picks[(is_best.sum(axis=1) != 1) | (best <= NEG_THRESHOLD)] = -1
    return picks


def decode_ml(y: Sequence, cb: Codebook, ch: Dmc) -> DecodeOutcome:
    """Maximum-likelihood decoding; exact ties and impossible y erase."""
    if y.alphabet_size != ch.num_outputs:
        raise ValidationError("decode_ml: y alphabet does not match channel outputs")
    if cb.alphabet_size != ch.num_inputs:
        raise ValidationError("decode_ml: codebook alphabet does not match channel inputs")
    if cb.n != len(y):
        raise ValidationError(f"decode_ml: codeword length {cb.n} != len(y) {len(y)}")
    scores = _scores_for_one(cb.codewords, y.symbols, _log_matrix(ch.matrix))
    pick = _decide(scores[None, :])[0]
    return ERASURE if pick < 0 else DecodeOutcome(int(pick))


def _typicality_rates(
    cw_rows: np.ndarray, y: np.ndarray, joint: JointDist
) -> tuple[np.ndarray, float, np.ndarray]:
    """Per-row empirical surprisal rates (x-rate, y-rate, joint-rate)."""
    n = y.size
    lpx = _log_matrix(joint.marginal_table((0,))[None, :])[0]
    lpy = _log_matrix(joint.marginal_table((1,))[None, :])[0]
    lpxy = _log_matrix(joint.table)
    rx = -lpx[cw_rows].sum(axis=1) / n
    ry = -float(lpy[y].sum()) / n
    rxy = -lpxy[cw_rows, y[None, :]].sum(axis=1) / n
    return rx, ry, rxy


def _typical_mask(
    cw_rows: np.ndarray, y: np.ndarray, joint: JointDist, eps: float
) -> np.ndarray:
    hx = entropy_bits(joint.marginal_table((0,)))
    hy = entropy_bits(joint.marginal_table((1,)))
    hxy = entropy_bits(joint.table)
    rx, ry, rxy = _typicality_rates(cw_rows, y, joint)
    if abs(ry - hy) > eps:
        return np.zeros(cw_rows.shape[0], dtype=bool)
    return (np.abs(rx - hx) <= eps) & (np.abs(rxy - hxy) <= eps)


def decode_typicality(
    y: Sequence, cb: Codebook, joint: JointDist, eps: float
) -> DecodeOutcome:
    """Weak-joint-typicality decoding: a unique typical codeword, else erasure."""
    if joint.ndim != 2:
        raise ValidationError("decode_typicality: need a two-axis joint")
    if eps <= 0:
        raise ValidationError(f"decode_typicality: eps must be > 0, got {eps}")
    if cb.n != len(y):
        raise ValidationError(
            f"decode_typicality: codeword length {cb.n} != len(y) {len(y)}"
        )
    nx, ny = joint.table.shape
    if cb.alphabet_size != nx or y.alphabet_size != ny:
        raise ValidationError("decode_typicality: alphabets do not match the joint")
    mask = _typical_mask(cb.codewords, y.symbols, joint, eps)
    if mask.sum() != 1:
        return ERASURE
    return DecodeOutcome(int(np.argmax(mask)))


def wilson_interval(errors: int, trials: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1 or not (0 <= errors <= trials):
        raise ValidationError(f"wilson_interval: bad counts {errors}/{trials}")
    phat = errors / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    # At the boundary counts center - half is 0 or 1 exactly; don't let
    # floating residue move a zero-error lower bound off zero.
    lo = 0.0 if errors == 0 else max(0.0, center - half)
    hi = 1.0 if errors == trials else min(1.0, center + half)
    return (lo, hi)


@dataclass(frozen=True)
class SimulationReport:
    """Monte Carlo error-rate estimates with Wilson 95% intervals.

    Message errors for per-class codebooks use the representative
    convention: a message decode is counted correct only when the class is
    correct and the transmitted message is its class's canonical
    representative (the class's smallest index, a uniform-probability event
    of mass class_count/message_count). With singleton classes (alpha = 1)
    every message is its own representative, so the two counts coincide
    bit-for-bit.
    """

    trials: int
    semantic_errors: int
    message_errors: int
    p_sem: float
    p_sem_lo: float
    p_sem_hi: float
    p_msg: float
    p_msg_lo: float
    p_msg_hi: float
    seed: int
    config: dict

    def __post_init__(self):
        # Correct message implies correct class, so this ordering can never
        # break; if it does, the engine itself is wrong.
        if not (0 <= self.semantic_errors <= self.message_errors <= self.trials):
            raise AssertionError(
                f"impossible error counts: semantic {self.semantic_errors}, "
                f"message {self.message_errors}, trials {self.trials}"
            )
        for v in (self.p_sem, self.p_msg):
            if not (0.0 <= v <= 1.0):
                raise AssertionError(f"estimate {v} outside [0, 1]")

    @classmethod
    def from_counts(
        cls, trials: int, semantic_errors: int, message_errors: int,
        seed: int, config: dict,
    ) -> "SimulationReport":
        slo, shi = wilson_interval(semantic_errors, trials)
        mlo, mhi = wilson_interval(message_errors, trials)
        return cls(
            trials=trials,
            semantic_errors=semantic_errors,
            message_errors=message_errors,
            p_sem=semantic_errors / trials,
            p_sem_lo=slo,
            p_sem_hi=shi,
            p_msg=message_errors / trials,
            p_msg_lo=mlo,
            p_msg_hi=mhi,
            seed=seed,
            config=config,
        )

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "semantic_errors": self.semantic_errors,
            "message_errors": self.message_errors,
            "p_sem": self.p_sem,
            "p_sem_lo": self.p_sem_lo,
            "p_sem_hi": self.p_sem_hi,
            "p_msg": self.p_msg,
            "p_msg_lo": self.p_msg_lo,
            "p_msg_hi": self.p_msg_hi,
            "seed": self.seed,
            "config": self.config,
        }


def _batch_sizes(trials: int) -> list[int]:
    full, rem = divmod(trials, BATCH_TRIALS)
    return [BATCH_TRIALS] * full + ([rem] if rem else [])


def _run_batches(
    trials: int, threads: int, worker: Callable[[int, int], tuple[int, int]]
) -> tuple[int, int]:
    """Sum (semantic, message) error counts over fixed-size batches.

    worker(batch_index, batch_trials) must be a pure function of its
    arguments; integer sums make the reduction order irrelevant, so any
    thread count gives identical totals.
    """
    sizes = _batch_sizes(trials)
    if threads <= 1 or len(sizes) == 1:
        results = [worker(b, nb) for b, nb in enumerate(sizes)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(worker, range(len(sizes)), sizes))
    sem = sum(r[0] for r in results)
    msg = sum(r[1] for r in results)
    return sem, msg


class _VirtualScoreTable:
    """Exact conditional law of a random competitor codeword's score.

    Given y, a competitor's canonical score depends only on how many of its
    symbols sit opposite each output value, so the distribution is a product
    over output symbols of multinomial column contributions. Supports binary
    input alphabets (the count matrix is then a per-column scalar), which is
    what the virtual regime accepts.
    """

    def __init__(self, px: np.ndarray, logmat: np.ndarray):
        if px.size != 2:
            raise ConfigError(
                "virtual simulation requires a binary channel input alphabet; "
                "materialize the codebook for larger alphabets"
            )
        self.px = px
        self.logmat = logmat
        self._cache: dict[tuple[int, ...], tuple[np.ndarray, np.ndarray]] = {}

    def table(self, y_counts: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
        """(sorted score values, upper-tail probabilities) for a y type.

        tail[i] = P(score >= values[i]). The upper tail is the quantity that
        must survive float64: winning against 2^hundreds of competitors needs
        P(score >= s) resolved far below 1e-16, which a cdf near 1.0 cannot
        represent but a directly summed tail can.
        """
        hit = self._cache.get(y_counts)
        if hit is not None:
            return hit
        support = 1
        for c in y_counts:
            support *= c + 1
        if support > DIST_BUDGET:
            raise BudgetError(
                f"virtual score distribution support {support} exceeds "
                f"{DIST_BUDGET}; reduce the blocklength or output alphabet"
            )
        # k[b] = number of competitor symbols equal to input 0 among the
        # positions where y = b; each k[b] is Binomial(c_b, px[0]).
        grids = np.meshgrid(
            *[np.arange(c + 1, dtype=float) for c in y_counts], indexing="ij"
        )
        values = np.zeros(grids[0].shape)
        # Accumulate in the canonical (a, b) row-major order so these values
        # are bit-comparable with _scores_* outputs.
        for b, c in enumerate(y_counts):
            values = values + grids[b] * self.logmat[0, b]
        for b, c in enumerate(y_counts):
            values = values + (float(c) - grids[b]) * self.logmat[1, b]
        probs = np.ones(grids[0].shape)
        for b, c in enumerate(y_counts):
            probs = probs * _binomial_pmf(c, self.px[0])[grids[b].astype(int)]
        flat_v = values.ravel()
        flat_p = probs.ravel()
        order = np.argsort(flat_v, kind="stable")
        flat_v = flat_v[order]
        # Sum from the top so the far tail keeps full relative precision.
        tail = np.cumsum(flat_p[order][::-1])[::-1]
        tail = np.minimum(tail / tail[0], 1.0)
        out = (flat_v, tail)
        self._cache[y_counts] = out
        return out

    def prob_at_or_above(self, y_counts: tuple[int, ...], s: np.ndarray) -> np.ndarray:
        """P(competitor score >= s), elementwise over s."""
        values, tail = self.table(y_counts)
        idx = np.searchsorted(values, s, side="left")
        return np.where(idx < values.size, tail[np.minimum(idx, values.size - 1)], 0.0)


def _binomial_pmf(count: int, p: float) -> np.ndarray:
    k = np.arange(count + 1)
    if p == 0.0:
        out = np.zeros(count + 1)
        out[0] = 1.0
        return out
    if p == 1.0:
        out = np.zeros(count + 1)
        out[-1] = 1.0
        return out
    logs = (
        _log_gamma(count + 1)
        - _log_gamma(k + 1)
        - _log_gamma(count - k + 1)
        + k * math.log(p)
        + (count - k) * math.log1p(-p)
    )
    return np.exp(logs)


def _log_gamma(v) -> np.ndarray:
    from scipy import special

    return special.gammaln(v)


def _describe_channel(ch: Dmc) -> dict:
    return ch.to_dict()


def _simulation_config(
    cfg: CodeConfig, ch: Dmc, px: ProbVector, decoder: str, scheme: str,
    fresh: bool, regime: str, trials: int, seed: int, eps: float | None,
    notes: tuple[str, ...] = (),
) -> dict:
    out = cfg.describe()
    out.update(
        {
            "scheme": scheme,
            "decoder": decoder,
            "fresh_codebook": fresh,
            "regime": regime,
            "trials": trials,
            "seed": seed,
            "px": list(px.probs),
            "channel": _describe_channel(ch),
            "rng": "philox4x64",
            "batch_trials": BATCH_TRIALS,
        }
    )
    if eps is not None:
        out["eps"] = eps
    if notes:
        out["notes"] = list(notes)
    return out


def simulate(
    cfg: CodeConfig,
    scheme: str,
    ch: Dmc,
    px: ProbVector,
    decoder: str,
    trials: int,
    seed: int,
    *,
    fresh_codebook: bool = True,
    codebook: Codebook | None = None,
    partition: SemanticPartition | None = None,
    threads: int = 1,
    eps: float = 0.1,
) -> SimulationReport:
    """Monte Carlo semantic-error estimation with a per-class codebook.

    Per trial: draw (or reuse) a codebook of one codeword per semantic
    class, draw the message uniformly, transmit the class codeword, decode,
    and count a semantic error unless the decoder returns exactly the
    transmitted class. Message errors additionally require the transmitted
    message to be its class representative (see SimulationReport).

    The regime is chosen deterministically from the configuration: fresh
    codebooks whose (count x n) size exceeds MATERIALIZE_LIMIT switch to the
    virtual engine, which realizes each trial's outcome with the exact
    conditional correctness probability of ML decoding over the un-drawn
    competitor codewords. Reports are bit-identical across runs and thread
    counts for a fixed seed.
    """
    if px.labels != ch.input_labels:
        raise ValidationError("simulate: px alphabet does not match channel inputs")
    if decoder not in ("ml", "typicality"):
        raise ValidationError(f"simulate: unknown decoder {decoder!r}")
    if trials < 1:
        raise ValidationError(f"simulate: trials must be >= 1, got {trials}")
    if codebook is not None and fresh_codebook:
        raise ValidationError("simulate: an explicit codebook implies fresh_codebook=False")

    count = cfg.semantic_count
    mcount = cfg.message_count
    virtual = fresh_codebook and count * cfg.n > MATERIALIZE_LIMIT

    if virtual:
        if decoder != "ml":
            raise ConfigError(
                "virtual-regime simulation supports the ml decoder only; "
                "typicality decoding needs a materialized codebook"
            )
        if scheme not in PARTITION_SCHEMES:
            raise ConfigError(f"unknown partition scheme {scheme!r}")
        return _simulate_virtual(cfg, scheme, ch, px, trials, seed, threads)

    count = int(count)
    if codebook is not None:
        if codebook.count != count or codebook.n != cfg.n:
            raise ValidationError(
                f"simulate: codebook shape ({codebook.count}, {codebook.n}) does not "
                f"match config ({count}, {cfg.n})"
            )
        if codebook.alphabet_size != ch.num_inputs:
            raise ValidationError("simulate: codebook alphabet does not match channel")
        shared = codebook
    elif not fresh_codebook:
        shared = generate_codebook(cfg, px, ChannelRng(seed, CODEBOOK_STREAM))
    else:
        shared = None

    # Message bookkeeping: with a materializable message set the partition is
    # built and messages are drawn directly; otherwise the classes are
    # equal-sized by construction (power-of-two counts), so the class is
    # drawn uniformly and representative-ness is a Bernoulli(count/mcount).
    if partition is not None:
        if partition.message_count != mcount or partition.class_count != count:
            raise ValidationError("simulate: partition does not match config counts")
        part = partition
    elif mcount <= FULL_CODEBOOK_CAP:
        part = make_partition(cfg, scheme, seed)
    else:
        if scheme not in PARTITION_SCHEMES:
            raise ConfigError(f"unknown partition scheme {scheme!r}")
        part = None

    logmat = _log_matrix(ch.matrix)
    px_cdf = np.cumsum(px.probs)
    px_cdf[-1] = 1.0
    ch_cdf = _row_cdfs(ch.matrix)
    joint = (
        JointDist.from_input_and_kernel(px, ch.matrix, ch.output_labels)
        if decoder == "typicality"
        else None
    )
    rep_prob = 2.0 ** (cfg.semantic_bits - cfg.message_bits)

    if part is not None:
        class_of = part.class_of
        reps = part.representatives
        message_count_int = int(mcount)

    def worker(b: int, nb: int) -> tuple[int, int]:
        gen = ChannelRng(seed, b).generator()
        if shared is None:
            cws = _sample_symbols(gen, (nb, count, cfg.n), px_cdf)
        if part is not None:
            w = gen.integers(0, message_count_int, size=nb)
            m = class_of[w]
            rep_hit = w == reps[m]
        else:
            m = gen.integers(0, count, size=nb)
            rep_hit = gen.random(nb) < rep_prob
        u = gen.random((nb, cfg.n))
        if shared is None:
            x = cws[np.arange(nb), m, :]
        else:
            x = shared.codewords[m]
        y = np.minimum(
            (u[..., None] >= ch_cdf[x][...]).sum(axis=2), ch.num_outputs - 1
        )
        if decoder == "ml":
            if shared is None:
                scores = _scores_per_trial(cws, y, logmat)
            else:
                scores = _scores_shared(shared.codewords, y, logmat)
            picks = _decide(scores)
        else:
            picks = np.empty(nb, dtype=np.int64)
            rows = cws if shared is None else None
            for t in range(nb):
                cw_t = rows[t] if rows is not None else shared.codewords
                mask = _typical_mask(cw_t, y[t], joint, eps)
                picks[t] = int(np.argmax(mask)) if mask.sum() == 1 else -1
        sem_err = picks != m
        msg_err = sem_err | ~rep_hit
        return int(sem_err.sum()), int(msg_err.sum())

    sem, msg = _run_batches(trials, threads, worker)
    regime = "materialized-fresh" if shared is None else "materialized-shared"
    config = _simulation_config(
        cfg, ch, px, decoder, scheme, fresh_codebook, regime, trials, seed,
        eps if decoder == "typicality" else None,
        notes=() if (part is None or part.is_equal_sized) else ("unequal-partition",),
    )
    return SimulationReport.from_counts(trials, sem, msg, seed, config)


def _simulate_virtual(
    cfg: CodeConfig,
    scheme: str,
    ch: Dmc,
    px: ProbVector,
    trials: int,
    seed: int,
    threads: int,
) -> SimulationReport:
    """Fresh-codebook ML simulation without materializing the codebook.

    Conditioned on the transmitted codeword's score s against the received
    y, a trial is decoded correctly exactly when all count-1 competitor
    codewords score strictly below s (a tie erases, which is an error).
    Those scores are i.i.d. with an exactly computable distribution, so the
    outcome is Bernoulli(F(s-)^{count-1}); drawing that Bernoulli per trial
    reproduces the literal protocol's law without 2^hundreds of codewords.
    """
    logmat = _log_matrix(ch.matrix)
    table = _VirtualScoreTable(px.probs, logmat)
    px_cdf = np.cumsum(px.probs)
    px_cdf[-1] = 1.0
    ch_cdf = _row_cdfs(ch.matrix)
    competitors = cfg.semantic_count - 1
    rep_prob = 2.0 ** (cfg.semantic_bits - cfg.message_bits)
    n_out = ch.num_outputs

    def worker(b: int, nb: int) -> tuple[int, int]:
        gen = ChannelRng(seed, b).generator()
        x = _sample_symbols(gen, (nb, cfg.n), px_cdf)
        u = gen.random((nb, cfg.n))
        rep_hit = gen.random(nb) < rep_prob
        u_win = gen.random(nb)
        y = np.minimum((u[..., None] >= ch_cdf[x]).sum(axis=2), n_out - 1)
        own = np.zeros(nb)
        a_count, b_count = logmat.shape
        for a in range(a_count):
            xa = x == a
            for bb in range(b_count):
                cnt = (xa & (y == bb)).sum(axis=1).astype(float)
                own += cnt * logmat[a, bb]
        counts = np.stack([(y == bb).sum(axis=1) for bb in range(n_out)], axis=1)
        uniq, inverse = np.unique(counts, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        win_prob = np.empty(nb)
        for g_idx in range(uniq.shape[0]):
            sel = inverse == g_idx
            at_or_above = table.prob_at_or_above(
                tuple(int(c) for c in uniq[g_idx]), own[sel]
            )
            # P(all competitors strictly below) = (1 - T)^(count - 1); with T
            # down at 2^-hundreds and the exponent up at 2^+hundreds only the
            # log1p form keeps the product meaningful.
            win_prob[sel] = np.exp(
                float(competitors) * np.log1p(-at_or_above)
            )
        sem_ok = u_win < win_prob
        sem_err = ~sem_ok
        msg_err = sem_err | ~rep_hit
        return int(sem_err.sum()), int(msg_err.sum())

    sem, msg = _run_batches(trials, threads, worker)
    config = _simulation_config(
        cfg, ch, px, "ml", scheme, True, "virtual-fresh", trials, seed, None
    )
    return SimulationReport.from_counts(trials, sem, msg, seed, config)


def simulate_full_codebook(
    cfg: CodeConfig,
    partition: SemanticPartition,
    ch: Dmc,
    px: ProbVector,
    trials: int,
    seed: int,
    *,
    codebook: Codebook | None = None,
    decoder: str = "ml",
    threads: int = 1,
    eps: float = 0.1,
) -> SimulationReport:
    """Monte Carlo with one codeword per message (the converse setting).

    The decoder estimates the message index; a semantic error is an
    estimate outside the transmitted message's class (erasures count), a
    message error any estimate different from the message itself.
    """
    if px.labels != ch.input_labels:
        raise ValidationError("simulate_full_codebook: px alphabet mismatch")
    if decoder not in ("ml", "typicality"):
        raise ValidationError(f"simulate_full_codebook: unknown decoder {decoder!r}")
    if trials < 1:
        raise ValidationError("simulate_full_codebook: trials must be >= 1")
    if cfg.message_count > FULL_CODEBOOK_CAP:
        raise ConfigError(
            f"simulate_full_codebook: {cfg.message_count} messages exceed the "
            f"{FULL_CODEBOOK_CAP} cap; use simulate() with per-class codewords"
        )
    mcount = int(cfg.message_count)
    if partition.message_count != mcount:
        raise ValidationError(
            f"simulate_full_codebook: partition covers {partition.message_count} "
            f"messages, config has {mcount}"
        )
    if codebook is None:
        codebook = generate_full_codebook(cfg, px, ChannelRng(seed, CODEBOOK_STREAM))
    if codebook.count != mcount or codebook.n != cfg.n:
        raise ValidationError("simulate_full_codebook: codebook shape mismatch")
    if codebook.alphabet_size != ch.num_inputs:
        raise ValidationError("simulate_full_codebook: codebook alphabet mismatch")

    logmat = _log_matrix(ch.matrix)
    ch_cdf = _row_cdfs(ch.matrix)
    class_of = partition.class_of
    cw = codebook.codewords
    joint = (
        JointDist.from_input_and_kernel(px, ch.matrix, ch.output_labels)
        if decoder == "typicality"
        else None
    )

    # With the whole output space enumerable, precompute every decision once;
    # the decisions are bit-identical to direct scoring because both use the
    # same canonical score routine.
    use_table = (
        decoder == "ml"
        and ch.num_outputs ** cfg.n * mcount <= ENUM_BUDGET
        and trials >= 8 * BATCH_TRIALS
    )
    if use_table:
        decisions, _ = _decision_table(cw, ch)
        radix = ch.num_outputs ** np.arange(cfg.n - 1, -1, -1, dtype=np.int64)

    def worker(b: int, nb: int) -> tuple[int, int]:
        gen = ChannelRng(seed, b).generator()
        w = gen.integers(0, mcount, size=nb)
        u = gen.random((nb, cfg.n))
        x = cw[w]
        y = np.minimum((u[..., None] >= ch_cdf[x]).sum(axis=2), ch.num_outputs - 1)
        if decoder == "ml":
            if use_table:
                picks = decisions[y @ radix]
            else:
                picks = _decide(_scores_shared(cw, y, logmat))
        else:
            picks = np.empty(nb, dtype=np.int64)
            for t in range(nb):
                mask = _typical_mask(cw, y[t], joint, eps)
                picks[t] = int(np.argmax(mask)) if mask.sum() == 1 else -1
        msg_err = picks != w
        sem_err = msg_err & ((picks < 0) | (class_of[np.maximum(picks, 0)] != class_of[w]))
        return int(sem_err.sum()), int(msg_err.sum())

    sem, msg = _run_batches(trials, threads, worker)
    config = _simulation_config(
        cfg, ch, px, decoder, partition.scheme, False, "full-codebook",
        trials, seed, eps if decoder == "typicality" else None,
        notes=() if partition.is_equal_sized else ("unequal-partition",),
    )
    return SimulationReport.from_counts(trials, sem, msg, seed, config)


def _enumerate_outputs(n_out: int, n: int) -> np.ndarray:
    """All output words of length n, row i being the base-n_out digits of i."""
    return (
        np.indices((n_out,) * n).reshape(n, -1).T.astype(np.int64)
    )


def _decision_table(cw: np.ndarray, ch: Dmc) -> tuple[np.ndarray, np.ndarray]:
    """(decisions, scores) of the ML decoder for every possible output word."""
    n = cw.shape[1]
    yall = _enumerate_outputs(ch.num_outputs, n)
    scores = _scores_shared(cw, yall, _log_matrix(ch.matrix))
    return _decide(scores), scores


@dataclass(frozen=True)
class ExactEvaluation:
    """Exact error rates and information quantities of a fixed code.

    Computed by enumerating the whole output space. `regime` records
    whether the codebook indexed classes ("per-class") or messages
    ("full"). Entropies are in bits; h_w_given_y_err is H(W | Y^n, error),
    None when the error probability is 0.
    """

    regime: str
    p_sem: float
    p_msg: float
    h_w: float
    h_w_given_y: float
    i_w_y: float
    i_x_y: float
    h_w_given_y_err: float | None
    h_w_given_y_ok: float | None

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "p_sem": self.p_sem,
            "p_msg": self.p_msg,
            "h_w": self.h_w,
            "h_w_given_y": self.h_w_given_y,
            "i_w_y": self.i_w_y,
            "i_x_y": self.i_x_y,
            "h_w_given_y_err": self.h_w_given_y_err,
            "h_w_given_y_ok": self.h_w_given_y_ok,
        }


def exact_evaluate(
    cb: Codebook,
    partition: SemanticPartition,
    ch: Dmc,
    decoder: str = "ml",
    px: ProbVector | None = None,
    eps: float = 0.1,
) -> ExactEvaluation:
    """Exact P_e,s, P_e,msg and H(W|Y^n) for a fixed codebook and channel.

    Enumerates all |output|^n received words under a uniform message prior.
    The codebook may index semantic classes or whole messages; within-class
    message uncertainty is handled in closed form (messages of a class are
    uniform and conditionally independent of Y given the class), so the
    enumeration only ever scales with the codeword count.
    """
    if decoder not in ("ml", "typicality"):
        raise ValidationError(f"exact_evaluate: unknown decoder {decoder!r}")
    if cb.alphabet_size != ch.num_inputs:
        raise ValidationError("exact_evaluate: codebook alphabet mismatch")
    mcount = partition.message_count
    kcount = partition.class_count
    n = cb.n
    out_words = ch.num_outputs ** n  # exact integer, may be huge before the check
    if out_words * mcount > ENUM_BUDGET:
        raise BudgetError(
            f"exact_evaluate: |Y|^n * messages = {out_words * mcount} exceeds "
            f"budget {ENUM_BUDGET}"
        )
    if cb.count == kcount:
        regime = "per-class"
        owner_prior = partition.sizes.astype(float) / mcount
        owner_class = np.arange(kcount, dtype=np.int64)
        within_bits_each = np.log2(partition.sizes.astype(float))
    elif cb.count == mcount:
        regime = "full"
        owner_prior = np.full(mcount, 1.0 / mcount)
        owner_class = partition.class_of
        within_bits_each = np.zeros(mcount)
    else:
        raise ValidationError(
            f"exact_evaluate: codebook count {cb.count} matches neither the "
            f"class count {kcount} nor the message count {mcount}"
        )

    yall = _enumerate_outputs(ch.num_outputs, n)
    cw = cb.codewords

    if decoder == "ml":
        decisions, _ = _decision_table(cw, ch)
    else:
        if px is None:
            raise ValidationError("exact_evaluate: typicality decoding needs px")
        joint = JointDist.from_input_and_kernel(px, ch.matrix, ch.output_labels)
        decisions = np.empty(yall.shape[0], dtype=np.int64)
        for j in range(yall.shape[0]):
            mask = _typical_mask(cw, yall[j], joint, eps)
            decisions[j] = int(np.argmax(mask)) if mask.sum() == 1 else -1

    # p(y | owner) as an exact per-position product.
    pyo = np.ones((cb.count, yall.shape[0]))
    for i in range(n):
        pyo *= ch.matrix[cw[:, i]][:, yall[:, i]]

    joint_oy = owner_prior[:, None] * pyo
    py = joint_oy.sum(axis=0)
    h_oy = entropy_bits(joint_oy)
    h_y = entropy_bits(py)
    h_o = entropy_bits(owner_prior)
    within_bits = float(np.dot(owner_prior, within_bits_each))

    h_w = math.log2(mcount)
    h_w_given_y = h_oy - h_y + within_bits
    i_w_y = h_o + h_y - h_oy

    # Semantic error is a function of (owner, y): the decoded class differs
    # from the owner's class (erasure always errs).
    dec_class = np.where(decisions >= 0, owner_class[np.maximum(decisions, 0)], -1)
    err = dec_class[None, :] != owner_class[:, None]
    # Mass sums can land a few ulp outside [0, 1].
    p_sem = min(max(float((joint_oy * err).sum()), 0.0), 1.0)

    # Message success: the decoded owner must be the transmitted message. For
    # per-class codebooks that means the class is right and the message is
    # its representative (probability 1/|class| within the class).
    good = decisions >= 0
    if regime == "full":
        p_msg_correct = float(
            (pyo[decisions[good], np.nonzero(good)[0]] / mcount).sum()
        )
    else:
        rep_mass = 1.0 / mcount  # each representative carries prior 1/|messages|
        p_msg_correct = float(
            (pyo[decisions[good], np.nonzero(good)[0]] * rep_mass).sum()
        )
    p_msg = min(max(1.0 - p_msg_correct, 0.0), 1.0)

    def _conditional(mask: np.ndarray) -> float | None:
        mass = float((joint_oy * mask).sum())
        if mass <= 0.0:
            return None
        t = joint_oy * mask / mass
        h_cond = entropy_bits(t) - entropy_bits(t.sum(axis=0))
        owner_cond = t.sum(axis=1)
        return h_cond + float(np.dot(owner_cond, within_bits_each))

    h_err = _conditional(err)
    h_ok = _conditional(~err)

    # I(X^n; Y^n): owners sharing a codeword share an x, so group them.
    _, group_idx, group_inv = np.unique(
        cw, axis=0, return_index=True, return_inverse=True
    )
    group_inv = group_inv.reshape(-1)
    pxg = np.zeros(group_idx.size)
    np.add.at(pxg, group_inv, owner_prior)
    pyx = pyo[group_idx]
    joint_xy = pxg[:, None] * pyx
    i_x_y = entropy_bits(pxg) + h_y - entropy_bits(joint_xy)

    return ExactEvaluation(
        regime=regime,
        p_sem=p_sem,
        p_msg=p_msg,
        h_w=h_w,
        h_w_given_y=h_w_given_y,
        i_w_y=i_w_y,
        i_x_y=i_x_y,
        h_w_given_y_err=h_err,
        h_w_given_y_ok=h_ok,
    )


@dataclass
class FanoInstance:
    """A fixed (codebook, partition, channel) system with uniform messages.

    Carries the exact joint law of (W, Y^n) implicitly; evaluation() runs
    the exact evaluator once and caches it. beta is the largest class mass
    fraction; unequal-sized partitions still give a valid (weaker) bound
    via the largest class and are flagged in notes.
    """

    partition: SemanticPartition
    codebook: Codebook
    channel: Dmc
    decoder: str = "ml"
    px: ProbVector | None = None
    eps: float = 0.1
    label: str = ""
    _cached: ExactEvaluation | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.codebook.count not in (
            self.partition.class_count,
            self.partition.message_count,
        ):
            raise ValidationError(
                "FanoInstance: codebook count matches neither classes nor messages"
            )

    @property
    def n(self) -> int:
        return self.codebook.n

    @property
    def message_count(self) -> int:
        return self.partition.message_count

    @property
    def total_bits(self) -> float:
        """nR = log2(message count), the total message bits."""
        return math.log2(self.partition.message_count)

    @property
    def rate(self) -> float:
        return self.total_bits / self.n

    @property
    def alpha(self) -> float:
        return math.log2(self.partition.class_count) / self.total_bits

    @property
    def beta(self) -> float:
        return self.partition.beta

    @property
    def gamma(self) -> float:
        return math.log2(1.0 - self.beta) / self.total_bits + 1.0

    @property
    def notes(self) -> tuple[str, ...]:
        return () if self.partition.is_equal_sized else ("unequal-partition",)

    def evaluation(self) -> ExactEvaluation:
        if self._cached is None:
            self._cached = exact_evaluate(
                self.codebook, self.partition, self.channel,
                decoder=self.decoder, px=self.px, eps=self.eps,
            )
        return self._cached


def fano_bound(inst: FanoInstance, p_sem: float | None = None) -> float:
    """The semantic Fano right-hand side for this instance, in bits.

    1 + (1 - alpha + (gamma + alpha - 1) P_e,s) nR, with
    gamma = log2(1 - beta) / (nR) + 1. p_sem defaults to the instance's
    exact semantic error probability.
    """
    if inst.beta >= 1.0:
        raise ValidationError(
            f"fano_bound: beta = {inst.beta} puts log2(1 - beta) out of domain"
        )
    if p_sem is None:
        p_sem = inst.evaluation().p_sem
    if not (-1e-9 <= p_sem <= 1.0 + 1e-9):
        raise ValidationError(f"fano_bound: p_sem must be in [0, 1], got {p_sem}")
    p_sem = min(max(p_sem, 0.0), 1.0)
    nr = inst.total_bits
    return 1.0 + (1.0 - inst.alpha + (inst.gamma + inst.alpha - 1.0) * p_sem) * nr


@dataclass(frozen=True)
class FanoCheck:
    """Outcome of checking H(W|Y^n) against the semantic Fano bound.

    intermediate_holds tracks the proof's inner step
    H(W|Y^n, error) <= log2((1 - beta) |message set|); instances can violate
    it while the final bound still holds, and that discrepancy is worth
    recording separately. None when the error probability is zero.
    """

    holds: bool
    lhs: float
    rhs: float
    slack: float
    p_sem: float
    intermediate_holds: bool | None


def check_fano(inst: FanoInstance, tol: float = 1e-9) -> FanoCheck:
    """Exact H(W|Y^n) versus fano_bound at the instance's exact P_e,s."""
    ev = inst.evaluation()
    lhs = ev.h_w_given_y
    rhs = fano_bound(inst, p_sem=ev.p_sem)
    intermediate: bool | None = None
    if ev.h_w_given_y_err is not None:
        cap = math.log2((1.0 - inst.beta) * inst.message_count)
        intermediate = ev.h_w_given_y_err <= cap + tol
    return FanoCheck(
        holds=lhs <= rhs + tol,
        lhs=lhs,
        rhs=rhs,
        slack=rhs - lhs,
        p_sem=ev.p_sem,
        intermediate_holds=intermediate,
    )


@dataclass(frozen=True)
class ConverseChain:
    """Per-step values of the converse chain on an exact instance.

    nR = H(W) splits as H(W|Y^n) + I(W;Y^n); data processing bounds
    I(W;Y^n) by I(X^n;Y^n), which memorylessness bounds by n C.
    """

    h_w: float
    h_w_given_y: float
    i_w_y: float
    i_x_y: float
    capacity: float
    n_capacity: float
    identity_gap: float
    data_processing_ok: bool
    capacity_ok: bool

    @property
    def holds(self) -> bool:
        return (
            abs(self.identity_gap) <= 1e-9
            and self.data_processing_ok
            and self.capacity_ok
        )


def converse_chain(inst: FanoInstance, ch: Dmc | None = None) -> ConverseChain:
    """Verify the converse inequalities numerically on the exact joint law."""
    ev = inst.evaluation()
    channel = ch if ch is not None else inst.channel
    try:
        cap = blahut_arimoto(channel, tol=1e-9).capacity
    except ConvergenceError as e:
        # Near-degenerate channels can stall just above tol. The best
        # iterate still brackets capacity within e.gap; take the upper end
        # so the check never false-alarms, and only lean on it while the
        # bracket stays far inside the 1e-6 slack of capacity_ok.
        if not isinstance(e.best, CapacityResult) or e.gap is None or e.gap > 1e-7:
            raise
        cap = e.best.capacity + e.gap
    return ConverseChain(
        h_w=ev.h_w,
        h_w_given_y=ev.h_w_given_y,
        i_w_y=ev.i_w_y,
        i_x_y=ev.i_x_y,
        capacity=cap,
        n_capacity=inst.n * cap,
        identity_gap=ev.h_w - (ev.h_w_given_y + ev.i_w_y),
        data_processing_ok=ev.i_w_y <= ev.i_x_y + 1e-9,
        capacity_ok=ev.i_x_y <= inst.n * cap + 1e-6,
    )


def random_fano_instance(seed: int, index: int) -> FanoInstance:
    """Deterministic small random instance number `index` for a campaign.

    Blocklengths 2..4, binary/ternary alphabets, 4..16 messages, classes a
    power-of-two divisor of the message count (so beta <= 1/2 and the bound
    is defined), random row-stochastic channels, ML decoding, and a mix of
    per-class and full codebooks.
    """
    gen = ChannelRng(seed, FANO_STREAM + index).generator()
    n = int(gen.integers(2, 5))
    a_count = int(gen.integers(2, 4))
    b_count = int(gen.integers(2, 4))
    matrix = gen.dirichlet(np.ones(b_count), size=a_count)
    ch = Dmc(
        tuple(str(i) for i in range(a_count)),
        tuple(str(j) for j in range(b_count)),
        matrix,
    )
    message_bits = int(gen.integers(2, 5))
    semantic_bits = int(gen.integers(1, message_bits + 1))
    mcount = 1 << message_bits
    kcount = 1 << semantic_bits
    scheme = PARTITION_SCHEMES[int(gen.integers(0, len(PARTITION_SCHEMES)))]
    part_seed = int(gen.integers(0, 2**63))
    partition = partition_from_counts(mcount, kcount, scheme, part_seed)
    if gen.random() < 0.5:
        px = ProbVector.uniform(ch.input_labels)
    else:
        px = ProbVector(ch.input_labels, gen.dirichlet(np.ones(a_count)))
    full = bool(gen.random() < 0.5)
    cw_count = mcount if full else kcount
    cdf = np.cumsum(px.probs)
    cdf[-1] = 1.0
    symbols = _sample_symbols(gen, (cw_count, n), cdf)
    cb = Codebook(symbols, a_count, provenance={"seed": seed, "index": index})
    return FanoInstance(
        partition=partition,
        codebook=cb,
        channel=ch,
        px=px,
        label=f"campaign-{index}",
    )


@dataclass(frozen=True)
class CampaignReport:
    """Aggregate result of a seeded Fano/converse verification campaign."""

    instances: int
    seed: int
    fano_holds: int
    converse_holds: int
    worst_slack: float
    worst_index: int
    intermediate_violations: int
    failures: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "instances": self.instances,
            "seed": self.seed,
            "fano_holds": self.fano_holds,
            "converse_holds": self.converse_holds,
            "worst_slack": self.worst_slack,
            "worst_index": self.worst_index,
            "intermediate_violations": self.intermediate_violations,
            "failures": list(self.failures),
        }


def run_fano_campaign(
    instances: int, seed: int, include_converse: bool = True
) -> CampaignReport:
    """check_fano (and optionally converse_chain) over seeded random instances."""
    if instances < 1:
        raise ValidationError("run_fano_campaign: instances must be >= 1")
    fano_ok = 0
    conv_ok = 0
    worst = math.inf
    worst_idx = -1
    inter_viol = 0
    failures: list[int] = []
    for i in range(instances):
        inst = random_fano_instance(seed, i)
        chk = check_fano(inst)
        if chk.holds:
            fano_ok += 1
        else:
            failures.append(i)
        if chk.intermediate_holds is False:
            inter_viol += 1
        if chk.slack < worst:
            worst = chk.slack
            worst_idx = i
        if include_converse:
            if converse_chain(inst).holds:
                conv_ok += 1
            elif i not in failures:
                failures.append(i)
    return CampaignReport(
        instances=instances,
        seed=seed,
        fano_holds=fano_ok,
        converse_holds=conv_ok if include_converse else 0,
        worst_slack=worst,
        worst_index=worst_idx,
        intermediate_violations=inter_viol,
        failures=tuple(failures),
    )
