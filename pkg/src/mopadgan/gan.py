"""Adversarial training with an optional performance-augmented DPP term.

With ``gamma1 == 0`` this is a plain GAN; otherwise each generator step adds
``gamma1 * pad_loss`` on the generated batch, its gradient flowing back to the
generator weights through the generated designs.
"""
import copy
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import dpp, nn
from .errors import EstimatorFailure, NotPositiveDefinite, TrainingDiverged

LOG_EPS = 1e-7
PROBE_SEED = 12345
PROBE_SIZE = 256
MAX_DEGENERATE_BATCHES = 10


@dataclass(frozen=True)
class TrainConfig:
    iterations: int = 10_000
    batch_size: int = 32
    lr: float = 1e-4
    beta1: float = 0.5
    beta2: float = 0.999
    adam_eps: float = 1e-8
    gamma0: float = 2.0
    gamma1_final: float = 0.5
    schedule_steepness: float = None  # None: constant gamma1
    d_steps_per_g_step: int = 1
    noise_dim: int = 2
    data_box: tuple = ((-0.5, 0.5), (-0.5, 0.5))
    seed: int = 0
    hidden_width: int = 128
    generator_hidden_layers: int = 3
    discriminator_hidden_layers: int = 2
    leaky_slope: float = 0.2
    bandwidth: float = 1.0
    quality_floor: float = 1e-6
    realisticity_weighting: bool = False
    saturating: bool = False
    log_every: int = 100

    def __post_init__(self):
        box = tuple((float(lo), float(hi)) for lo, hi in self.data_box)
        object.__setattr__(self, "data_box", box)
        if self.iterations < 0 or self.batch_size < 1:
            raise ValueError("iterations must be >= 0 and batch_size >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be > 0")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("Adam betas must lie in [0, 1)")
        if self.gamma1_final < 0 or self.gamma0 < 0:
            raise ValueError("gamma0 and gamma1 must be >= 0")
        if self.d_steps_per_g_step < 1 or self.noise_dim < 1:
            raise ValueError("d_steps_per_g_step and noise_dim must be >= 1")
        if any(lo >= hi for lo, hi in box):
            raise ValueError(f"empty data box {box}")
        if self.schedule_steepness is not None and self.schedule_steepness <= 0:
            raise ValueError("schedule_steepness must be > 0")

    @property
    def design_dim(self):
        return len(self.data_box)

    def generator_spec(self):
        sizes = [self.noise_dim] + [self.hidden_width] * self.generator_hidden_layers + [self.design_dim]
        return nn.MlpSpec(sizes, "tanh", self.leaky_slope)

    def discriminator_spec(self):
        sizes = [self.design_dim] + [self.hidden_width] * self.discriminator_hidden_layers + [1]
        return nn.MlpSpec(sizes, "sigmoid", self.leaky_slope)

    def gamma1_at(self, t):
        if self.schedule_steepness is None:
            return self.gamma1_final
        return dpp.gamma1_schedule(min(t, self.iterations), self.iterations,
                                   self.gamma1_final, self.schedule_steepness)

    def to_dict(self):
        d = asdict(self)
        d["data_box"] = [list(b) for b in self.data_box]
        return d


@dataclass
class TrainState:
    generator: nn.MlpParams
    generator_spec: nn.MlpSpec
    discriminator: nn.MlpParams
    discriminator_spec: nn.MlpSpec
    g_adam: nn.AdamState
    d_adam: nn.AdamState
    rng: np.random.Generator
    data_box: tuple
    iteration: int = 0
    pad_kernel_builds: int = 0
    last: dict = field(default_factory=dict)

    def copy(self):
        # parameter arrays are never mutated in place, so sharing them is safe
        return replace(self, rng=copy.deepcopy(self.rng), last=dict(self.last))


@dataclass
class HistoryRow:
    iteration: int
    d_loss: float
    g_adv_loss: float
    pad_loss: float
    gamma1: float
    mean_quality: float


@dataclass
class TrainHistory:
    rows: list = field(default_factory=list)

    COLUMNS = ("iteration", "d_loss", "g_adv_loss", "pad_loss", "gamma1", "mean_quality")

    def append(self, row):
        if self.rows and row.iteration <= self.rows[-1].iteration:
            raise ValueError("history iterations must be strictly increasing")
        self.rows.append(row)

    def as_array(self):
        return np.array([[getattr(r, c) for c in self.COLUMNS] for r in self.rows], dtype=np.float64).reshape(-1, 6)

    def __len__(self):
        return len(self.rows)


def init_state(cfg):
    g_seed, d_seed, run_seed = np.random.SeedSequence(cfg.seed).spawn(3)
    g_spec, d_spec = cfg.generator_spec(), cfg.discriminator_spec()
    g = nn.init_params(g_spec, g_seed)
    d = nn.init_params(d_spec, d_seed)
    return TrainState(g, g_spec, d, d_spec, nn.AdamState.zeros(g), nn.AdamState.zeros(d),
                      np.random.default_rng(run_seed), cfg.data_box)


def discriminator_loss(d_real, d_fake):
    r = np.clip(np.asarray(d_real, dtype=np.float64), LOG_EPS, 1.0 - LOG_EPS)
    f = np.clip(np.asarray(d_fake, dtype=np.float64), LOG_EPS, 1.0 - LOG_EPS)
    return float(-np.mean(np.log(r)) - np.mean(np.log1p(-f)))


def adversarial_generator_loss(d_fake, saturating=False):
    f = np.clip(np.asarray(d_fake, dtype=np.float64), LOG_EPS, 1.0 - LOG_EPS)
    if saturating:
        return float(np.mean(np.log1p(-f)))
    return float(-np.mean(np.log(f)))


def generator_loss(d_fake, pad_loss_value, gamma1, saturating=False):
    if gamma1 < 0:
        raise ValueError("gamma1 must be >= 0")
    return adversarial_generator_loss(d_fake, saturating) + gamma1 * pad_loss_value


def _box_arrays(box):
    box = np.asarray(box, dtype=np.float64)
    return 0.5 * (box[:, 0] + box[:, 1]), 0.5 * (box[:, 1] - box[:, 0])


def sample_noise(rng, n, dim):
    """Uniform prior on [-0.5, 0.5]^dim."""
    return rng.random((n, dim)) - 0.5


def generate(state, z):
    """Deterministic generator forward pass mapped into the data box."""
    out, _ = nn.forward(state.generator, state.generator_spec, z)
    center, half = _box_arrays(state.data_box)
    return center + half * out


def _generate_traced(params, spec, box, z):
    out, trace = nn.forward(params, spec, z)
    center, half = _box_arrays(box)
    return center + half * out, trace, half


def _clip_grad(d, eps=LOG_EPS):
    return (d > eps) & (d < 1.0 - eps)


def _discriminator_grads(state, real, fake):
    both = np.vstack([real, fake])
    out, trace = nn.forward(state.discriminator, state.discriminator_spec, both)
    n_real = len(real)
    d_real, d_fake = out[:n_real, 0], out[n_real:, 0]
    loss = discriminator_loss(d_real, d_fake)
    g = np.zeros_like(out)
    g[:n_real, 0] = np.where(_clip_grad(d_real), -1.0 / (n_real * d_real), 0.0)
    g[n_real:, 0] = np.where(_clip_grad(d_fake), 1.0 / (len(fake) * (1.0 - d_fake)), 0.0)
    grads, _ = nn.backward(state.discriminator, state.discriminator_spec, trace, g)
    return loss, grads


def generator_objective(g_params, state, z, cfg, gamma1, estimator, weights):
    """Generator loss and its gradient for a fixed noise batch and aggregation weights.

    Returns ``(loss, grads, info)``; ``info`` carries the adversarial and DPP
    parts, and ``kernel_built`` tells whether a DPP kernel was formed.
    """
    x, g_trace, half = _generate_traced(g_params, state.generator_spec, state.data_box, z)
    d_out, d_trace = nn.forward(state.discriminator, state.discriminator_spec, x)
    d_fake = d_out[:, 0]
    n = len(z)
    adv = adversarial_generator_loss(d_fake, cfg.saturating)
    ok = _clip_grad(d_fake)
    if cfg.saturating:
        g_d = np.where(ok, -1.0 / (n * (1.0 - d_fake)), 0.0)
    else:
        g_d = np.where(ok, -1.0 / (n * d_fake), 0.0)
    _, d_x = nn.backward(state.discriminator, state.discriminator_spec, d_trace, g_d[:, None])
    info = {"adv": adv, "pad": float("nan"), "mean_quality": float("nan"), "kernel_built": False}
    loss = adv
    if gamma1 > 0:
        try:
            perf, jac = estimator(x)
        except Exception as exc:  # noqa: BLE001 - any estimator failure is fatal for the step
            raise EstimatorFailure(f"performance estimator failed: {exc}") from exc
        perf = np.asarray(perf, dtype=np.float64)
        jac = np.asarray(jac, dtype=np.float64)
        if not (np.all(np.isfinite(perf)) and np.all(np.isfinite(jac))):
            raise EstimatorFailure("performance estimator returned non-finite values")
        w = np.asarray(weights)
        q_raw = perf @ w
        dq_dx = dpp.quality_gradients(jac, w)
        if cfg.realisticity_weighting:
            _, dd_dx = nn.backward(state.discriminator, state.discriminator_spec, d_trace,
                                   np.ones_like(d_out))
            dq_dx = q_raw[:, None] * dd_dx + d_fake[:, None] * dq_dx
            q_raw = dpp.realisticity_weighted_quality(q_raw, d_fake)
        qcfg = dpp.QualityConfig(cfg.gamma0, tuple(w), cfg.bandwidth, cfg.quality_floor,
                                 cfg.realisticity_weighting)
        clamped = q_raw < cfg.quality_floor
        q = np.maximum(q_raw, cfg.quality_floor)
        kernel = dpp.build_dpp_kernel(x, q, qcfg)
        info["kernel_built"] = True
        pad = dpp.pad_loss(kernel)
        pg = dpp.pad_loss_grads(x, q, dq_dx, kernel, qcfg, clamped=clamped)
        d_x = d_x + gamma1 * pg.d_loss_d_x
        loss = adv + gamma1 * pad
        info["pad"] = pad
        info["mean_quality"] = float(np.mean(perf.mean(axis=1)))
    grads, _ = nn.backward(g_params, state.generator_spec, g_trace, d_x * half)
    return loss, grads, info


def train_step(state, data_batch, estimator, cfg, gamma1=None):
    """One round of discriminator update(s) followed by one generator update.

    The input state is left untouched; a new state is returned.
    """
    data_batch = np.asarray(data_batch, dtype=np.float64)
    if data_batch.shape[0] != cfg.batch_size:
        raise ValueError(f"data batch has {data_batch.shape[0]} rows, expected {cfg.batch_size}")
    s = state.copy()
    n = cfg.batch_size
    if gamma1 is None:
        gamma1 = cfg.gamma1_at(s.iteration)
    for _ in range(cfg.d_steps_per_g_step):
        z = sample_noise(s.rng, n, cfg.noise_dim)
        fake = generate(s, z)
        d_loss, d_grads = _discriminator_grads(s, data_batch, fake)
        s.discriminator, s.d_adam = nn.adam_step(s.discriminator, d_grads, s.d_adam, cfg.lr,
                                                 cfg.beta1, cfg.beta2, cfg.adam_eps)
    z = sample_noise(s.rng, n, cfg.noise_dim)
    weights = None
    if gamma1 > 0:
        if estimator is None:
            raise ValueError("gamma1 > 0 needs a performance estimator")
        weights = dpp.sample_simplex_weights(getattr(estimator, "n_objectives", 2), s.rng)
    _, g_grads, info = generator_objective(s.generator, s, z, cfg, gamma1, estimator, weights)
    s.generator, s.g_adam = nn.adam_step(s.generator, g_grads, s.g_adam, cfg.lr,
                                         cfg.beta1, cfg.beta2, cfg.adam_eps)
    if info["kernel_built"]:
        s.pad_kernel_builds += 1
    s.iteration += 1
    s.last = {"d_loss": d_loss, "g_adv_loss": info["adv"], "pad_loss": info["pad"],
              "gamma1": float(gamma1), "mean_quality": info["mean_quality"]}
    return s


def probe_quality(state, estimator, z):
    """Mean equal-weight performance of generated designs for logging."""
    perf, _ = estimator(generate(state, z))
    return float(np.mean(np.asarray(perf).mean(axis=1)))


def train(cfg, dataset, estimator, state=None, callback=None):
    """Run ``cfg.iterations`` training steps on batches drawn with replacement.

    A step whose DPP kernel cannot be factored is redone without the DPP term;
    more than ``MAX_DEGENERATE_BATCHES`` such steps in a row raise
    :class:`TrainingDiverged`.
    """
    dataset = np.asarray(dataset, dtype=np.float64)
    if len(dataset) < cfg.batch_size:
        raise ValueError("dataset smaller than one batch")
    if state is None:
        state = init_state(cfg)
    history = TrainHistory()
    probe_z = sample_noise(np.random.default_rng(PROBE_SEED), PROBE_SIZE, cfg.noise_dim)
    degenerate = 0
    while state.iteration < cfg.iterations:
        batch = dataset[state.rng.integers(0, len(dataset), cfg.batch_size)]
        try:
            state = train_step(state, batch, estimator, cfg)
            degenerate = 0
        except NotPositiveDefinite:
            degenerate += 1
            if degenerate > MAX_DEGENERATE_BATCHES:
                raise TrainingDiverged(
                    f"DPP kernel degenerate for {degenerate} consecutive batches "
                    f"at iteration {state.iteration}") from None
            state = train_step(state, batch, estimator, cfg, gamma1=0.0)
        if state.iteration % cfg.log_every == 0 or state.iteration == cfg.iterations:
            mq = probe_quality(state, estimator, probe_z) if estimator is not None else float("nan")
            last = state.last
            history.append(HistoryRow(state.iteration, last["d_loss"], last["g_adv_loss"],
                                      last["pad_loss"], last["gamma1"], mq))
            if callback is not None:
                callback(state, history)
    return state, history
