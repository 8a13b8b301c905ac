"""Optimization loop: Adam, cross-entropy, seeded batching, CSV logging.

Reproducibility contract: with a fixed seed and the strict sequential
mode, two runs of the same config produce bit-identical loss traces.
Per-step wall-clock is always measured into the trace; it is only
written into the CSV when ``log_timing`` is set, so the default log
stays byte-reproducible.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .autograd import Module, Tensor, as_tensor

TRAILING_WINDOW = 50


class TrainingAborted(RuntimeError):
    """Raised when a run hits a non-finite loss or gradient."""


@dataclass
class AdamState:
    """Moment estimates for one parameter block."""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.99
    epsilon: float = 1e-8
    t: int = 0
    m: np.ndarray | None = None
    v: np.ndarray | None = None


def adam_step(state: AdamState, params: np.ndarray, grads: np.ndarray) -> np.ndarray:
    """Textbook Adam with bias correction; mutates ``state``, returns new params."""
    params = np.asarray(params, dtype=np.float64)
    grads = np.asarray(grads, dtype=np.float64)
    if params.shape != grads.shape:
        raise ValueError(f"shape mismatch: params {params.shape} vs grads {grads.shape}")
    if not np.all(np.isfinite(grads)):
        raise TrainingAborted("non-finite gradient")
    if state.m is None:
        state.m = np.zeros_like(params)
        state.v = np.zeros_like(params)
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grads**2
    m_hat = state.m / (1.0 - state.beta1**state.t)
    v_hat = state.v / (1.0 - state.beta2**state.t)
    return params - state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)


class Adam:
    """Adam over a module's named parameter blocks."""

    def __init__(self, model: Module, lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.99, epsilon: float = 1e-8):
        self.blocks = list(model.named_parameters())
        self.states = {
            name: AdamState(lr=lr, beta1=beta1, beta2=beta2, epsilon=epsilon)
            for name, _ in self.blocks
        }

    def step(self):
        for name, p in self.blocks:
            grad = p.grad if p.grad is not None else np.zeros_like(p.data)
            try:
                updated = adam_step(self.states[name], p.data.reshape(-1), grad.reshape(-1))
            except TrainingAborted as exc:
                raise TrainingAborted(f"{exc} in parameter block {name!r}") from None
            p.data = updated.reshape(p.data.shape)


def cross_entropy(logits, labels) -> Tensor:
    """Mean -log softmax(logits)[label], max-shifted for stability.

    Differentiable in ``logits``; ``labels`` are integer class indices.
    """
    logits = as_tensor(logits)
    labels = np.asarray(labels)
    z = logits.data
    if z.ndim != 2:
        raise ValueError(f"logits must be (batch, classes), got {z.shape}")
    batch, n_classes = z.shape
    if labels.shape != (batch,):
        raise ValueError(f"labels must be ({batch},), got {labels.shape}")
    if labels.min() < 0 or labels.max() >= n_classes:
        raise ValueError(f"labels must lie in [0, {n_classes})")
    shifted = z - z.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    loss_val = -log_probs[np.arange(batch), labels].mean()

    out = Tensor(loss_val)
    out.requires_grad = logits.requires_grad
    if out.requires_grad:
        out._prev = (logits,)

        def _bw():
            probs = np.exp(log_probs)
            probs[np.arange(batch), labels] -= 1.0
            logits.accumulate(out.grad * probs / batch)

        out._backward = _bw
    return out


def stability(losses, window: int = TRAILING_WINDOW) -> float:
    """Std of the trailing ``window`` step losses (the loss-stability stat)."""
    tail = np.asarray(losses, dtype=np.float64)[-window:]
    return float(np.std(tail))


@dataclass
class StepRecord:
    step: int
    epoch: int
    loss: float
    wall_ms: float
    accuracy: float | None = None


@dataclass
class TrainTrace:
    """Per-step records plus the run summary."""

    seed: int
    records: list[StepRecord] = field(default_factory=list)
    epoch_accuracy: list[tuple[int, float]] = field(default_factory=list)
    total_s: float = 0.0
    final_accuracy: float | None = None

    @property
    def losses(self) -> np.ndarray:
        return np.array([r.loss for r in self.records])

    def final_loss(self) -> float:
        """Mean of the trailing-window losses."""
        if not self.records:
            return float("nan")
        return float(self.losses[-TRAILING_WINDOW:].mean())

    def stability(self) -> float:
        return stability(self.losses)

    def median_step_ms(self) -> float:
        if not self.records:
            return float("nan")
        return float(np.median([r.wall_ms for r in self.records]))

    def summary(self) -> dict:
        return {
            "steps": len(self.records),
            "final_loss": self.final_loss(),
            "stability": self.stability(),
            "median_step_ms": self.median_step_ms(),
            "train_accuracy": self.final_accuracy,
            "total_s": self.total_s,
        }


@dataclass
class TrainConfig:
    epochs: int = 10
    batch_size: int = 8
    lr: float = 1e-3
    seed: int = 0
    log_path: str | None = None
    max_steps: int | None = None
    log_timing: bool = False
    eval_each_epoch: bool = True


def evaluate_accuracy(model: Module, dataset) -> float:
    logits = model.forward(model.prepare(dataset.waveforms)).data
    return float((logits.argmax(axis=1) == dataset.labels).mean())


def _format_row(rec: StepRecord, log_timing: bool) -> str:
    wall = f"{rec.wall_ms:.3f}" if log_timing else ""
    acc = f"{rec.accuracy:.6f}" if rec.accuracy is not None else ""
    return f"{rec.step},{rec.epoch},{rec.loss:.12g},{wall},{acc}\n"


def train_loop(model: Module, dataset, config: TrainConfig) -> TrainTrace:
    """Shuffle-each-epoch minibatch Adam; writes the loss CSV incrementally."""
    if config.batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    n = dataset.waveforms.shape[0]
    if n == 0:
        raise ValueError("dataset is empty")
    rng = np.random.default_rng(config.seed)
    optimizer = Adam(model, lr=config.lr)
    trace = TrainTrace(seed=config.seed)

    log = open(config.log_path, "w", encoding="utf-8", newline="\n") if config.log_path else None
    if log:
        log.write("step,epoch,loss,wall_ms,accuracy\n")
    start = time.perf_counter()
    step = 0
    try:
        for epoch in range(config.epochs):
            order = rng.permutation(n)
            batches = [
                order[i : i + config.batch_size] for i in range(0, n, config.batch_size)
            ]
            for b, idx in enumerate(batches):
                t0 = time.perf_counter()
                batch = model.prepare(dataset.waveforms[idx])
                logits = model.forward(batch)
                loss = cross_entropy(logits, dataset.labels[idx])
                loss_val = loss.item()
                if not np.isfinite(loss_val):
                    raise TrainingAborted(f"non-finite loss at step {step}")
                model.zero_grad()
                loss.backward()
                try:
                    optimizer.step()
                except TrainingAborted as exc:
                    raise TrainingAborted(f"{exc} at step {step}") from None
                wall_ms = (time.perf_counter() - t0) * 1e3
                rec = StepRecord(step, epoch, loss_val, wall_ms)
                last_step = config.max_steps is not None and step + 1 >= config.max_steps
                if config.eval_each_epoch and (b == len(batches) - 1 or last_step):
                    rec.accuracy = evaluate_accuracy(model, dataset)
                    trace.epoch_accuracy.append((epoch, rec.accuracy))
                    trace.final_accuracy = rec.accuracy
                trace.records.append(rec)
                if log:
                    log.write(_format_row(rec, config.log_timing))
                    log.flush()
                step += 1
                if last_step:
                    trace.total_s = time.perf_counter() - start
                    return trace
    finally:
        trace.total_s = time.perf_counter() - start
        if log:
            log.close()
    return trace
