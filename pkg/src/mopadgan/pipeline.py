"""Glue between trained generators, the benchmarks and the optimizer."""
import numpy as np

from . import gan, mobo
from .problems import BenchmarkId, make_estimator, nudge_off_singularity, objective

SAMPLE_SEED = 2024


def latent_problem(state, benchmark, bounds=None):
    """Optimize benchmark objectives over the generator's latent box.

    The box defaults to the noise prior's support, [-0.5, 0.5]^noise_dim.
    """
    bid = BenchmarkId.parse(benchmark)
    fn = objective(bid)
    noise_dim = state.generator_spec.layer_sizes[0]
    if bounds is None:
        bounds = [(-0.5, 0.5)] * noise_dim

    def evaluate(z):
        x = gan.generate(state, np.asarray(z, dtype=np.float64)[None, :])[0]
        x = nudge_off_singularity(bid, x)
        return x, fn(x)

    return mobo.OptimizationProblem(evaluate, bounds, 2, design_dim=state.generator_spec.layer_sizes[-1])


def identity_problem(benchmark, bounds=((-0.5, 0.5), (-0.5, 0.5))):
    """Optimize directly over the design box (no generator)."""
    bid = BenchmarkId.parse(benchmark)
    fn = objective(bid)

    def evaluate(z):
        x = nudge_off_singularity(bid, np.asarray(z, dtype=np.float64))
        return x, fn(x)

    return mobo.OptimizationProblem(evaluate, bounds, 2, design_dim=len(bounds))


def train_generator(benchmark, dataset, cfg, callback=None):
    return gan.train(cfg, dataset, make_estimator(benchmark), callback=callback)


def sample_designs(state, n=1000, seed=SAMPLE_SEED):
    z = gan.sample_noise(np.random.default_rng(seed), n, state.generator_spec.layer_sizes[0])
    return gan.generate(state, z)


def run_seeds(problem, seeds, n_init, n_iter, ref, n_candidates=1000, mc_samples=128, threads=None):
    return [mobo.optimize(problem, n_init, n_iter, ref, seed, n_candidates, mc_samples, threads)
            for seed in seeds]
