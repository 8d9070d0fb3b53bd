"""Fully connected networks with hand-derived backward passes and Adam.

Only what the GAN needs: affine layers, LeakyReLU hidden units and a
tanh / sigmoid / identity output. ``backward`` returns gradients for the
parameters *and* for the network input, the latter being what lets the DPP
loss gradient (taken with respect to generated designs) reach the generator
weights.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, TraceMismatch

OUTPUT_ACTIVATIONS = ("tanh", "sigmoid", "identity")


@dataclass(frozen=True)
class MlpSpec:
    layer_sizes: tuple
    output_activation: str = "identity"
    leaky_slope: float = 0.2

    def __post_init__(self):
        object.__setattr__(self, "layer_sizes", tuple(int(s) for s in self.layer_sizes))
        if len(self.layer_sizes) < 2 or min(self.layer_sizes) < 1:
            raise ValueError(f"need >= 2 positive layer sizes, got {self.layer_sizes}")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ValueError(f"unknown output activation {self.output_activation!r}")
        if not 0.0 < self.leaky_slope < 1.0:
            raise ValueError("LeakyReLU slope must lie in (0, 1)")

    @property
    def n_layers(self):
        return len(self.layer_sizes) - 1


@dataclass
class MlpParams:
    """Per-layer weights (out x in) and biases (out,)."""

    weights: list
    biases: list

    def tensors(self):
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def named_tensors(self, prefix=""):
        out = []
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            out += [(f"{prefix}W{i}", w), (f"{prefix}b{i}", b)]
        return out

    def copy(self):
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def zeros_like(self):
        return MlpParams([np.zeros_like(w) for w in self.weights],
                         [np.zeros_like(b) for b in self.biases])

    def map(self, fn, *others):
        ws = [fn(w, *(o.weights[i] for o in others)) for i, w in enumerate(self.weights)]
        bs = [fn(b, *(o.biases[i] for o in others)) for i, b in enumerate(self.biases)]
        return MlpParams(ws, bs)

    def n_params(self):
        return sum(t.size for t in self.tensors())

    def equals(self, other):
        return all(np.array_equal(a, b) for a, b in zip(self.tensors(), other.tensors()))


@dataclass
class AdamState:
    step_count: int
    first_moment: MlpParams
    second_moment: MlpParams

    @classmethod
    def zeros(cls, params):
        return cls(0, params.zeros_like(), params.zeros_like())


@dataclass
class ForwardTrace:
    layer_inputs: list = field(default_factory=list)
    pre_activations: list = field(default_factory=list)
    output: np.ndarray = None


def init_params(spec, seed):
    """He-style init: N(0, 2/fan_in) weights, zero biases."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(spec.layer_sizes[:-1], spec.layer_sizes[1:]):
        weights.append(rng.standard_normal((fan_out, fan_in)) * np.sqrt(2.0 / fan_in))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights, biases)


def _leaky(a, slope):
    return np.where(a > 0, a, slope * a)


def _output(a, kind):
    if kind == "tanh":
        return np.tanh(a)
    if kind == "sigmoid":
        # split form avoids overflow in exp for large |a|
        out = np.empty_like(a)
        pos = a >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-a[pos]))
        ea = np.exp(a[~pos])
        out[~pos] = ea / (1.0 + ea)
        return out
    return a


def forward(params, spec, inputs):
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != spec.layer_sizes[0]:
        raise DimensionMismatch(f"input width {x.shape[1]} != {spec.layer_sizes[0]}")
    trace = ForwardTrace()
    h = x
    last = spec.n_layers - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        trace.layer_inputs.append(h)
        a = h @ w.T + b
        trace.pre_activations.append(a)
        h = _output(a, spec.output_activation) if i == last else _leaky(a, spec.leaky_slope)
    trace.output = h
    return h, trace


def backward(params, spec, trace, output_grad):
    """Reverse-mode gradients of ``sum(output_grad * output)``.

    Returns ``(param_grads, input_grads)``.
    """
    if len(trace.pre_activations) != spec.n_layers or len(params.weights) != spec.n_layers:
        raise TraceMismatch("trace depth does not match the network")
    g = np.asarray(output_grad, dtype=np.float64)
    if g.shape != trace.output.shape:
        raise TraceMismatch(f"output_grad shape {g.shape} != output shape {trace.output.shape}")
    gw = [None] * spec.n_layers
    gb = [None] * spec.n_layers
    last = spec.n_layers - 1
    for i in range(last, -1, -1):
        a = trace.pre_activations[i]
        w = params.weights[i]
        if a.shape[1] != w.shape[0] or trace.layer_inputs[i].shape[1] != w.shape[1]:
            raise TraceMismatch(f"layer {i} trace shape does not match weights {w.shape}")
        if i == last:
            if spec.output_activation == "tanh":
                g = g * (1.0 - trace.output * trace.output)
            elif spec.output_activation == "sigmoid":
                g = g * trace.output * (1.0 - trace.output)
        else:
            g = g * np.where(a > 0, 1.0, spec.leaky_slope)
        gw[i] = g.T @ trace.layer_inputs[i]
        gb[i] = g.sum(axis=0)
        g = g @ w
    return MlpParams(gw, gb), g


def adam_step(params, grads, state, lr, beta1=0.5, beta2=0.999, eps=1e-8):
    """One bias-corrected Adam update. Inputs are not modified."""
    t = state.step_count + 1
    m = state.first_moment.map(lambda m_, g: beta1 * m_ + (1.0 - beta1) * g, grads)
    v = state.second_moment.map(lambda v_, g: beta2 * v_ + (1.0 - beta2) * (g * g), grads)
    bc1 = 1.0 - beta1**t
    bc2 = 1.0 - beta2**t
    new = params.map(
        lambda p, m_, v_: p - lr * (m_ / bc1) / (np.sqrt(v_ / bc2) + eps), m, v
    )
    return new, AdamState(t, m, v)


def relative_errors(analytic, numeric, floor=1e-10):
    """Elementwise ``|a - n| / max(|a|, |n|, floor * scale)``.

    ``scale`` is the largest gradient magnitude, so entries many orders below
    the dominant ones are compared on an absolute footing instead of blowing up.
    """
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = max(np.max(np.abs(analytic), initial=0.0), np.max(np.abs(numeric), initial=0.0))
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), max(floor * scale, 1e-300))
    return np.abs(analytic - numeric) / denom


def gradient_check(loss_and_grads, params, h=1e-5, max_params=10_000, seed=0, floor=1e-6):
    """Max relative error between analytic parameter gradients and central differences.

    ``loss_and_grads(params) -> (loss, MlpParams grads)``. Above ``max_params``
    parameters a seeded random subset of that size is probed.
    """
    _, analytic = loss_and_grads(params)
    flat_a = np.concatenate([t.ravel() for t in analytic.tensors()])
    sizes = [t.size for t in params.tensors()]
    offsets = np.cumsum([0] + sizes)
    idx = np.arange(offsets[-1])
    if len(idx) > max_params:
        idx = np.sort(np.random.default_rng(seed).choice(len(idx), max_params, replace=False))
    numeric = np.empty(len(idx))
    for k, flat in enumerate(idx):
        ti = int(np.searchsorted(offsets, flat, side="right") - 1)
        local = flat - offsets[ti]
        probe = params.copy()
        tensor = probe.tensors()[ti]
        orig = tensor.flat[local]
        tensor.flat[local] = orig + h
        up = loss_and_grads(probe)[0]
        tensor.flat[local] = orig - h
        down = loss_and_grads(probe)[0]
        numeric[k] = (up - down) / (2.0 * h)
    return float(np.max(relative_errors(flat_a[idx], numeric, floor), initial=0.0))


def finite_difference_check(params, spec, inputs, loss_fn, h=1e-5, max_params=10_000, seed=0):
    """Gradient check of ``loss_fn`` applied to the network output.

    ``loss_fn(output) -> (loss, d_loss/d_output)``.
    """
    def loss_and_grads(p):
        out, trace = forward(p, spec, inputs)
        loss, g_out = loss_fn(out)
        grads, _ = backward(p, spec, trace, g_out)
        return loss, grads

    return gradient_check(loss_and_grads, params, h, max_params, seed)
