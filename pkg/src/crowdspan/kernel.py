"""Framework-free numerics for mask-based coarse-to-fine span training.

The mechanism: softmax start/end distributions x_hat, y_hat over token
positions; an attention mask cumsum(x_hat) * reverse-cumsum(y_hat) that
concentrates weight between the predicted endpoints; an L1 penalty keeping
the mask narrow; and a regression head that reads the coarse label off the
column-wise max of the masked hidden states.  The combined loss is

    - sum_i { x_i log x_hat_i + y_i log y_hat_i }  (when span targets exist)
    + (z_hat - z)^2                                (when a coarse label exists)
    + lam * ||mask||_1

All gradients are analytic; a toy linear scorer (start logits = H a, end
logits = H c) makes the whole path differentiable end to end, and the toy
trainer demonstrates span localization from coarse labels alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError

_LOG_FLOOR = 1e-12


def softmax(logits) -> np.ndarray:
    """Numerically stabilized softmax over a 1-D vector."""
    v = np.asarray(logits, dtype=float)
    if v.ndim != 1:
        raise ValidationError("softmax expects a 1-D vector")
    if not np.all(np.isfinite(v)):
        raise ValidationError("softmax expects finite logits")
    shifted = v - v.max()
    e = np.exp(shifted)
    return e / e.sum()


def _reverse_cumsum(v: np.ndarray) -> np.ndarray:
    return v[::-1].cumsum()[::-1]


def build_mask(x_hat, y_hat) -> np.ndarray:
    """mask_k = (sum_{i<=k} x_hat_i) * (sum_{i>=k} y_hat_i).

    For one-hot inputs with start <= end this is the exact binary indicator
    of the span; for valid probability vectors every entry lies in [0, 1].
    """
    x = np.asarray(x_hat, dtype=float)
    y = np.asarray(y_hat, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("mask inputs must be 1-D vectors of equal length")
    return np.cumsum(x) * _reverse_cumsum(y)


def l1_penalty(mask) -> float:
    return float(np.abs(np.asarray(mask, dtype=float)).sum())


@dataclass
class RegressionHead:
    w: np.ndarray
    b: float


def predict_coarse(mask, H, head: RegressionHead) -> float:
    """z_hat = w . colwise-max(mask * H) + b (max over token positions)."""
    m = np.asarray(mask, dtype=float)
    hidden = np.asarray(H, dtype=float)
    if hidden.ndim != 2 or hidden.shape[0] != m.shape[0]:
        raise ValidationError(
            f"mask length {m.shape[0]} does not match hidden states {hidden.shape}"
        )
    w = np.asarray(head.w, dtype=float)
    if w.shape != (hidden.shape[1],):
        raise ValidationError("regression weights do not match hidden width")
    pooled = (m[:, None] * hidden).max(axis=0)
    return float(w @ pooled + head.b)


@dataclass(frozen=True)
class SpanTargets:
    """One-hot start/end indicators; impossible answers sit at position 0."""

    x: np.ndarray
    y: np.ndarray

    @staticmethod
    def from_indices(start: int, end: int, n: int) -> "SpanTargets":
        if not (0 <= start <= end < n):
            raise ValidationError(f"bad span targets ({start}, {end}) for n={n}")
        x = np.zeros(n)
        y = np.zeros(n)
        x[start] = 1.0
        y[end] = 1.0
        return SpanTargets(x, y)

    @staticmethod
    def impossible(n: int) -> "SpanTargets":
        return SpanTargets.from_indices(0, 0, n)


@dataclass
class LossInputs:
    """Everything the combined loss consumes, in one record."""

    x_hat: np.ndarray
    y_hat: np.ndarray
    z_hat: float
    n: int
    targets: SpanTargets | None = None
    z: float | None = None
    lam: float = 0.0


def cross_entropy_terms(targets: SpanTargets, x_hat, y_hat) -> float:
    xh = np.clip(np.asarray(x_hat, dtype=float), _LOG_FLOOR, None)
    yh = np.clip(np.asarray(y_hat, dtype=float), _LOG_FLOOR, None)
    return float(-(targets.x @ np.log(xh)) - (targets.y @ np.log(yh)))


def total_loss(inputs: LossInputs, mask) -> float:
    """Unweighted cross-entropy + squared error, plus the L1 mask penalty.

    Either supervision side may be absent: coarse-only training drops the
    cross-entropy terms, span-only training drops the squared error.
    """
    loss = inputs.lam * l1_penalty(mask)
    if inputs.targets is not None:
        loss += cross_entropy_terms(inputs.targets, inputs.x_hat, inputs.y_hat)
    if inputs.z is not None:
        loss += (inputs.z_hat - inputs.z) ** 2
    return float(loss)


@dataclass
class ToyParams:
    """Linear scorer (start logits H a, end logits H c) plus regression head."""

    a: np.ndarray
    c: np.ndarray
    head: RegressionHead

    def copy(self) -> "ToyParams":
        return ToyParams(
            self.a.copy(),
            self.c.copy(),
            RegressionHead(self.head.w.copy(), float(self.head.b)),
        )


@dataclass
class Forward:
    x_hat: np.ndarray
    y_hat: np.ndarray
    mask: np.ndarray
    pooled: np.ndarray
    pool_rows: np.ndarray
    z_hat: float
    loss: float


@dataclass
class Gradients:
    a: np.ndarray
    c: np.ndarray
    w: np.ndarray
    b: float

    def __iadd__(self, other: "Gradients") -> "Gradients":
        self.a += other.a
        self.c += other.c
        self.w += other.w
        self.b += other.b
        return self

    def scaled(self, factor: float) -> "Gradients":
        return Gradients(self.a * factor, self.c * factor, self.w * factor, self.b * factor)


def forward(
    H,
    params: ToyParams,
    *,
    targets: SpanTargets | None = None,
    z: float | None = None,
    lam: float = 0.0,
) -> Forward:
    """Full forward pass of the toy model on one document."""
    hidden = np.asarray(H, dtype=float)
    x_hat = softmax(hidden @ params.a)
    y_hat = softmax(hidden @ params.c)
    mask = build_mask(x_hat, y_hat)
    masked = mask[:, None] * hidden
    pool_rows = masked.argmax(axis=0)  # first maximizing row on ties
    pooled = masked[pool_rows, np.arange(hidden.shape[1])]
    z_hat = float(params.head.w @ pooled + params.head.b)
    loss = total_loss(
        LossInputs(x_hat, y_hat, z_hat, hidden.shape[0], targets, z, lam), mask
    )
    return Forward(x_hat, y_hat, mask, pooled, pool_rows, z_hat, loss)


def gradients(
    H,
    params: ToyParams,
    *,
    targets: SpanTargets | None = None,
    z: float | None = None,
    lam: float = 0.0,
    fwd: Forward | None = None,
) -> Gradients:
    """Analytic partial derivatives of the combined loss.

    The max-pool subgradient follows the first maximizing row per column;
    the L1 subgradient at exactly zero is zero.
    """
    hidden = np.asarray(H, dtype=float)
    n, d = hidden.shape
    if fwd is None:
        fwd = forward(hidden, params, targets=targets, z=z, lam=lam)
    x_hat, y_hat, mask = fwd.x_hat, fwd.y_hat, fwd.mask

    dz = 2.0 * (fwd.z_hat - z) if z is not None else 0.0
    g_b = dz
    g_w = dz * fwd.pooled

    # dL/dmask: L1 term everywhere, squared-error term through the pooled
    # argmax rows only.
    g_mask = lam * np.sign(mask)
    if dz != 0.0:
        cols = np.arange(d)
        np.add.at(g_mask, fwd.pool_rows, dz * params.head.w * hidden[fwd.pool_rows, cols])

    # mask_k = C_k D_k with C = cumsum(x_hat), D = reverse-cumsum(y_hat):
    # dL/dx_hat_i = sum_{k>=i} g_k D_k, dL/dy_hat_i = sum_{k<=i} g_k C_k.
    cum_x = np.cumsum(x_hat)
    rev_y = _reverse_cumsum(y_hat)
    d_xhat = _reverse_cumsum(g_mask * rev_y)
    d_yhat = np.cumsum(g_mask * cum_x)

    ds = x_hat * (d_xhat - float(x_hat @ d_xhat))
    de = y_hat * (d_yhat - float(y_hat @ d_yhat))
    if targets is not None:
        ds = ds + (x_hat - targets.x)
        de = de + (y_hat - targets.y)

    return Gradients(a=hidden.T @ ds, c=hidden.T @ de, w=g_w, b=g_b)


def finite_difference_gradients(
    H,
    params: ToyParams,
    *,
    targets: SpanTargets | None = None,
    z: float | None = None,
    lam: float = 0.0,
    eps: float = 1e-5,
) -> Gradients:
    """Central-difference gradients, used by the self-check command."""

    def loss_now() -> float:
        return forward(H, params, targets=targets, z=z, lam=lam).loss

    def sweep(base: np.ndarray) -> np.ndarray:
        grad = np.zeros_like(base)
        for i in range(base.size):
            orig = base.flat[i]
            base.flat[i] = orig + eps
            up = loss_now()
            base.flat[i] = orig - eps
            down = loss_now()
            base.flat[i] = orig
            grad.flat[i] = (up - down) / (2 * eps)
        return grad

    g_a = sweep(params.a)
    g_c = sweep(params.c)
    g_w = sweep(params.head.w)
    b0 = params.head.b
    params.head.b = b0 + eps
    up = loss_now()
    params.head.b = b0 - eps
    down = loss_now()
    params.head.b = b0
    return Gradients(g_a, g_c, g_w, (up - down) / (2 * eps))


def max_relative_error(analytic: Gradients, numeric: Gradients) -> float:
    worst = 0.0
    for a, f in (
        (analytic.a, numeric.a),
        (analytic.c, numeric.c),
        (analytic.w, numeric.w),
        (np.array([analytic.b]), np.array([numeric.b])),
    ):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(f)), 1e-4)
        worst = max(worst, float((np.abs(a - f) / denom).max()))
    return worst


@dataclass(frozen=True)
class ToyDoc:
    """Unit-noise hidden states with a planted span along one direction.

    The planted rows carry the shared direction scaled by (coarse + 1), so
    the coarse label is only readable from hidden states inside the span.
    """

    H: np.ndarray
    coarse: int
    span_start: int
    span_end: int  # exclusive


def make_toy_dataset(
    n_docs: int,
    n: int,
    d: int,
    seed: int,
    *,
    span_min: int = 2,
    span_max: int = 5,
    signal: float = 2.0,
) -> list[ToyDoc]:
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(d)
    direction /= np.linalg.norm(direction)
    docs = []
    for _ in range(n_docs):
        coarse = int(rng.integers(0, 4))
        length = int(rng.integers(span_min, span_max + 1))
        start = int(rng.integers(0, n - length + 1))
        hidden = rng.standard_normal((n, d))
        hidden[start : start + length] += direction * signal * (coarse + 1)
        docs.append(ToyDoc(hidden, coarse, start, start + length))
    return docs


@dataclass
class TrainingTrace:
    losses: list[float]
    final_masks: list[np.ndarray]
    span_mass: list[float]
    params: ToyParams


def planted_mask_mass(mask: np.ndarray, doc: ToyDoc) -> float:
    total = float(mask.sum())
    if total == 0.0:
        return 0.0
    return float(mask[doc.span_start : doc.span_end].sum()) / total


def toy_fit(
    docs: Sequence[ToyDoc],
    steps: int,
    lr: float,
    lam: float,
    *,
    seed: int = 0,
    init_scale: float = 0.1,
) -> TrainingTrace:
    """Plain full-batch gradient descent on the coarse + L1 loss.

    Span targets are never shown; localization must come from the coarse
    labels through the mask.  Deterministic given the seed.  The returned
    losses have length steps + 1 (initial and final states included).
    """
    if not docs:
        raise ValidationError("toy_fit needs at least one document")
    d = docs[0].H.shape[1]
    rng = np.random.default_rng(seed)
    params = ToyParams(
        a=rng.standard_normal(d) * init_scale,
        c=rng.standard_normal(d) * init_scale,
        head=RegressionHead(rng.standard_normal(d) * init_scale, 0.0),
    )

    losses: list[float] = []
    for _ in range(steps):
        total = 0.0
        acc = Gradients(np.zeros(d), np.zeros(d), np.zeros(d), 0.0)
        for doc in docs:
            fwd = forward(doc.H, params, z=float(doc.coarse), lam=lam)
            acc += gradients(doc.H, params, z=float(doc.coarse), lam=lam, fwd=fwd)
            total += fwd.loss
        losses.append(total / len(docs))
        mean = acc.scaled(1.0 / len(docs))
        params.a -= lr * mean.a
        params.c -= lr * mean.c
        params.head.w -= lr * mean.w
        params.head.b -= lr * mean.b

    final_masks: list[np.ndarray] = []
    span_mass: list[float] = []
    total = 0.0
    for doc in docs:
        fwd = forward(doc.H, params, z=float(doc.coarse), lam=lam)
        total += fwd.loss
        final_masks.append(fwd.mask)
        span_mass.append(planted_mask_mass(fwd.mask, doc))
    losses.append(total / len(docs))
    return TrainingTrace(losses, final_masks, span_mass, params)


def property_checks(seed: int = 0) -> list[tuple[str, bool, str]]:
    """Self-contained mask and gradient suites for the check command."""
    results: list[tuple[str, bool, str]] = []

    n = 16
    failures = 0
    for start in range(n):
        for end in range(start, n):
            targets = SpanTargets.from_indices(start, end, n)
            mask = build_mask(targets.x, targets.y)
            want = np.zeros(n)
            want[start : end + 1] = 1.0
            if not np.array_equal(mask, want):
                failures += 1
    results.append(
        (
            "mask one-hot identity (n=16, 136 cases)",
            failures == 0,
            f"{failures} failures",
        )
    )

    uniform = np.full(4, 0.25)
    got = build_mask(uniform, uniform)
    want = np.array([0.25, 0.375, 0.375, 0.25])
    err = float(np.abs(got - want).max())
    results.append(("mask uniform closed form (n=4)", err <= 1e-12, f"max err {err:.2e}"))

    rng = np.random.default_rng(seed)
    logits = rng.standard_normal(32)
    drift = float(np.abs(softmax(logits) - softmax(logits + 7.5)).max())
    results.append(("softmax shift invariance", drift <= 1e-12, f"max drift {drift:.2e}"))

    worst = 0.0
    for case in range(100):
        lam = 0.0 if case % 2 == 0 else 0.01
        hidden = rng.standard_normal((16, 4))
        params = ToyParams(
            a=rng.standard_normal(4) * 0.5,
            c=rng.standard_normal(4) * 0.5,
            head=RegressionHead(rng.standard_normal(4) * 0.5, float(rng.standard_normal())),
        )
        start = int(rng.integers(0, 16))
        end = int(rng.integers(start, 16))
        targets = SpanTargets.from_indices(start, end, 16)
        z = float(rng.integers(0, 4))
        analytic = gradients(hidden, params, targets=targets, z=z, lam=lam)
        numeric = finite_difference_gradients(hidden, params, targets=targets, z=z, lam=lam)
        worst = max(worst, max_relative_error(analytic, numeric))
    results.append(
        ("gradient vs central differences (100 cases)", worst <= 1e-4, f"max rel err {worst:.2e}")
    )
    return results
