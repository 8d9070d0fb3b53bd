import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mopadgan import nn
from mopadgan.errors import DimensionMismatch, TraceMismatch


def mse(target):
    def loss_fn(out):
        r = out - target
        return 0.5 * float(np.sum(r * r)), r
    return loss_fn


def test_spec_validation():
    with pytest.raises(ValueError):
        nn.MlpSpec((2,))
    with pytest.raises(ValueError):
        nn.MlpSpec((2, 0, 1))
    with pytest.raises(ValueError):
        nn.MlpSpec((2, 3), output_activation="relu")


def test_init_is_seeded_and_he_scaled():
    spec = nn.MlpSpec((64, 256, 1))
    a, b = nn.init_params(spec, 7), nn.init_params(spec, 7)
    assert a.equals(b)
    assert not a.equals(nn.init_params(spec, 8))
    assert np.all(a.biases[0] == 0)
    assert np.std(a.weights[0]) == pytest.approx(np.sqrt(2 / 64), rel=0.05)


def test_forward_shapes_and_ranges():
    for act, lo, hi in [("tanh", -1, 1), ("sigmoid", 0, 1)]:
        spec = nn.MlpSpec((2, 8, 3), output_activation=act)
        p = nn.init_params(spec, 0)
        out, trace = nn.forward(p, spec, 100 * np.random.default_rng(0).standard_normal((50, 2)))
        assert out.shape == (50, 3)
        assert np.all((out >= lo) & (out <= hi))
        assert len(trace.layer_inputs) == spec.n_layers


def test_sigmoid_extremes_are_finite():
    spec = nn.MlpSpec((1, 1), output_activation="sigmoid")
    p = nn.MlpParams([np.array([[1.0]])], [np.zeros(1)])
    out, _ = nn.forward(p, spec, np.array([[-800.0], [800.0]]))
    assert np.all(np.isfinite(out))
    assert out[0, 0] == pytest.approx(0.0) and out[1, 0] == pytest.approx(1.0)


def test_forward_dimension_mismatch():
    spec = nn.MlpSpec((2, 4, 1))
    with pytest.raises(DimensionMismatch):
        nn.forward(nn.init_params(spec, 0), spec, np.zeros((3, 5)))


def test_backward_trace_mismatch():
    spec = nn.MlpSpec((2, 4, 1))
    p = nn.init_params(spec, 0)
    out, trace = nn.forward(p, spec, np.zeros((3, 2)))
    with pytest.raises(TraceMismatch):
        nn.backward(p, spec, trace, np.zeros((4, 1)))


def test_leaky_relu_single_layer_by_hand():
    spec = nn.MlpSpec((1, 1, 1), leaky_slope=0.2)
    p = nn.MlpParams([np.array([[2.0]]), np.array([[3.0]])], [np.zeros(1), np.zeros(1)])
    out, _ = nn.forward(p, spec, np.array([[1.0], [-1.0]]))
    np.testing.assert_allclose(out[:, 0], [6.0, -1.2])


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), width=st.integers(1, 16), depth=st.integers(1, 3),
       act=st.sampled_from(["identity", "tanh", "sigmoid"]))
def test_backward_matches_finite_differences(seed, width, depth, act):
    spec = nn.MlpSpec((3,) + (width,) * depth + (2,), output_activation=act)
    r = np.random.default_rng(seed)
    p = nn.init_params(spec, seed)
    x = r.standard_normal((5, 3))
    err = nn.finite_difference_check(p, spec, x, mse(r.standard_normal((5, 2))))
    assert err < 1e-5


def test_input_gradients_match_finite_differences():
    spec = nn.MlpSpec((2, 8, 8, 1), output_activation="sigmoid")
    p = nn.init_params(spec, 3)
    x = np.random.default_rng(3).standard_normal((4, 2))
    out, trace = nn.forward(p, spec, x)
    _, gx = nn.backward(p, spec, trace, np.ones_like(out))
    h = 1e-6
    for i in range(4):
        for j in range(2):
            e = np.zeros_like(x)
            e[i, j] = h
            num = (nn.forward(p, spec, x + e)[0].sum() - nn.forward(p, spec, x - e)[0].sum()) / (2 * h)
            assert gx[i, j] == pytest.approx(num, rel=1e-6, abs=1e-9)


def test_adam_first_step_moves_by_lr():
    spec = nn.MlpSpec((2, 3, 1))
    p = nn.init_params(spec, 0)
    g = p.map(lambda t: np.sign(t) + 0.5)
    new, st_ = nn.adam_step(p, g, nn.AdamState.zeros(p), lr=1e-3)
    assert st_.step_count == 1
    for a, b in zip(p.tensors(), new.tensors()):
        np.testing.assert_allclose(np.abs(a - b), 1e-3, rtol=1e-4)
    # functional: inputs untouched
    assert p.equals(nn.init_params(spec, 0))


def test_adam_minimizes_quadratic():
    p = nn.MlpParams([np.array([[3.0, -2.0]])], [np.array([1.0, 1.0])])
    s = nn.AdamState.zeros(p)
    for _ in range(3000):
        p, s = nn.adam_step(p, p.map(lambda t: 2 * t), s, lr=1e-2, beta1=0.9)
    assert max(np.max(np.abs(t)) for t in p.tensors()) < 1e-2


def test_named_tensors():
    spec = nn.MlpSpec((2, 3, 1))
    names = [n for n, _ in nn.init_params(spec, 0).named_tensors("g.")]
    assert names == ["g.W0", "g.b0", "g.W1", "g.b1"]
    assert nn.init_params(spec, 0).n_params() == 2 * 3 + 3 + 3 + 1


def test_relative_errors_floor():
    e = nn.relative_errors([1.0, 1e-12], [1.0, 2e-12], floor=1e-6)
    assert e[0] == 0.0 and e[1] < 1e-5
