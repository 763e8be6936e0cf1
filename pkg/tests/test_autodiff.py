import math

import pytest
import torch

from shapeshift.autodiff import AdamState, Graph, adam_step, apply, forward, gradient, no_record, ops
from shapeshift.autodiff.primitive import PRIMITIVE_FACTORY, PrimitiveFactory
from shapeshift.utils.errors import NonFiniteError, ShapeMismatchError


def test_scalar_product():
    with Graph() as graph:
        x = graph.input("x", 3.0)
        y = x * x
    assert y.item() == 9.0
    assert y.requires_grad


def test_leaky_relu_negative_side():
    y = ops.leaky_relu(-1.0, 0.02)
    assert y.item() == pytest.approx(-0.02)


def test_strided_conv_of_ones():
    x = torch.ones(1, 1, 4, 4)
    w = torch.ones(1, 1, 2, 2)
    y = ops.conv2d(x, w, stride=2)
    assert y.shape == [1, 1, 2, 2]
    assert torch.equal(y.data, torch.full((1, 1, 2, 2), 4.0))


def test_first_and_second_derivative():
    with Graph() as graph:
        x = graph.input("x", 3.0)
        y = x * x
        (dy,) = gradient(y, [x], as_graph=True)
        (d2y,) = gradient(dy, [x])
    assert dy.item() == pytest.approx(6.0)
    assert d2y.item() == pytest.approx(2.0)
    assert d2y.graph is None


def test_gradient_needs_scalar_output():
    with Graph() as graph:
        x = graph.input("x", torch.ones(3))
        with pytest.raises(ShapeMismatchError):
            gradient(ops.square(x), [x])


def test_unreachable_target_gets_zeros():
    with Graph() as graph:
        x = graph.input("x", 2.0)
        unused = graph.input("unused", torch.ones(2))
        (gx, gu) = gradient(ops.square(x), [x, unused])
    assert gx.item() == pytest.approx(4.0)
    assert torch.equal(gu.data, torch.zeros(2))


def _mse_conv(x, w):
    return ops.mean(ops.square(ops.conv2d(x, w, stride=2, padding=1)))


def test_conv_kernel_gradient_matches_finite_differences(float64):
    gen = torch.Generator().manual_seed(0)
    x = torch.randn(2, 3, 6, 6, generator=gen)
    w = torch.randn(4, 3, 4, 4, generator=gen)
    with Graph() as graph:
        wi = graph.input("w", w)
        (grad,) = gradient(_mse_conv(x, wi), [wi])

    h = 1e-4
    numeric = torch.zeros_like(w)
    for index in range(w.numel()):
        bump = torch.zeros(w.numel())
        bump[index] = h
        bump = bump.reshape(w.shape)
        numeric.view(-1)[index] = (_mse_conv(x, w + bump).item() - _mse_conv(x, w - bump).item()) / (2 * h)
    error = torch.linalg.norm(grad.data - numeric) / torch.linalg.norm(numeric)
    assert error.item() <= 1e-6


def test_conv3d_input_gradient_matches_finite_differences(float64):
    gen = torch.Generator().manual_seed(1)
    x = torch.randn(1, 2, 4, 4, 4, generator=gen)
    w = torch.randn(3, 2, 3, 3, 3, generator=gen)

    def loss(value):
        return ops.sum(ops.sigmoid(ops.conv3d(value, w, padding=1)))

    with Graph() as graph:
        xi = graph.input("x", x)
        (grad,) = gradient(loss(xi), [xi])
    h = 1e-5
    for index in (0, 17, 63, 100):
        bump = torch.zeros(x.numel())
        bump[index] = h
        bump = bump.reshape(x.shape)
        numeric = (loss(x + bump).item() - loss(x - bump).item()) / (2 * h)
        assert grad.data.reshape(-1)[index].item() == pytest.approx(numeric, rel=1e-6, abs=1e-9)


def test_matmul_and_broadcast_gradients(float64):
    a = torch.tensor([[1.0, 2.0], [3.0, 4.0]])
    b = torch.tensor([0.5, -1.0])
    with Graph() as graph:
        ai = graph.input("a", a)
        bi = graph.input("b", b)
        loss = ops.sum(ops.add(ops.matmul(ai, ai), bi))
        ga, gb = gradient(loss, [ai, bi])
    ones = torch.ones(2, 2)
    assert torch.allclose(ga.data, ones @ a.T + a.T @ ones)
    assert torch.equal(gb.data, torch.tensor([2.0, 2.0]))


def test_norm2_second_order(float64):
    v = torch.tensor([3.0, 4.0])
    with Graph() as graph:
        x = graph.input("x", v)
        (g,) = gradient(ops.norm2(x), [x], as_graph=True)
        (gg,) = gradient(ops.sum(ops.square(g)), [x])
    # |x / |x||^2 is constant, so its gradient vanishes
    assert torch.allclose(g.data, v / 5.0)
    assert torch.allclose(gg.data, torch.zeros(2), atol=1e-12)


def test_bilinear_sample_at_cell_center_returns_code():
    grid = torch.arange(2 * 2 * 3, dtype=torch.get_default_dtype()).reshape(1, 2, 2, 3)
    out = ops.bilinear_sample(grid, torch.tensor([[[0.25, 0.25]]]))
    assert torch.allclose(out.data[0, 0], grid[0, 0, 0])


def test_bilinear_sample_midpoint_averages_neighbours():
    grid = torch.arange(2 * 2 * 3, dtype=torch.get_default_dtype()).reshape(1, 2, 2, 3)
    out = ops.bilinear_sample(grid, torch.tensor([[[0.25, 0.5]]]))
    assert torch.allclose(out.data[0, 0], (grid[0, 0, 0] + grid[0, 0, 1]) / 2)


def test_trilinear_sample_of_constant_grid():
    code = torch.tensor([0.3, -1.5, 2.0, 7.0])
    grid = code.expand(1, 2, 2, 2, 4).clone()
    points = torch.tensor([[[0.0, 0.0, 0.0], [0.1, 0.9, 0.4], [1.0, 1.0, 1.0], [0.6, 0.2, 0.75]]])
    out = ops.trilinear_sample(grid, points)
    assert torch.allclose(out.data[0], code.expand(4, 4))


def test_sampling_gradient_reaches_grid_and_points(float64):
    gen = torch.Generator().manual_seed(2)
    grid = torch.randn(1, 4, 4, 2, generator=gen)
    points = torch.tensor([[[0.3, 0.55], [0.7, 0.2]]])
    with Graph() as graph:
        g = graph.input("grid", grid)
        p = graph.input("points", points)
        gg, gp = gradient(ops.sum(ops.bilinear_sample(g, p)), [g, p])
    assert gg.data.sum().item() == pytest.approx(4.0)  # interpolation weights sum to 1 per point and channel
    h = 1e-6
    bump = torch.zeros_like(points)
    bump[0, 0, 1] = h
    numeric = (ops.sum(ops.bilinear_sample(grid, points + bump)).item()
               - ops.sum(ops.bilinear_sample(grid, points - bump)).item()) / (2 * h)
    assert gp.data[0, 0, 1].item() == pytest.approx(numeric, rel=1e-6)


def test_adam_zero_gradient_leaves_params():
    params = {"w": torch.tensor([1.0, -2.0])}
    new_params, state = adam_step(params, {"w": torch.zeros(2)}, AdamState(), lr=0.1)
    assert torch.equal(new_params["w"], params["w"])
    assert state.step == 1


def test_adam_first_step_moves_by_lr():
    new_params, _ = adam_step({"w": torch.tensor(1.0)}, {"w": torch.tensor(1.0)}, AdamState(), lr=0.1)
    assert new_params["w"].item() == pytest.approx(0.9, abs=1e-6)


def test_adam_matches_scalar_trace(float64):
    beta1, beta2, eps, lr = 0.9, 0.999, 1e-8, 0.05
    p, m, v = 0.7, 0.0, 0.0
    params, state = {"w": torch.tensor(0.7)}, AdamState()
    for t, g in enumerate((0.3, 0.3), start=1):
        m = beta1 * m + (1 - beta1) * g
        v = beta2 * v + (1 - beta2) * g * g
        p = p - lr * (m / (1 - beta1 ** t)) / (math.sqrt(v / (1 - beta2 ** t)) + eps)
        params, state = adam_step(params, {"w": torch.tensor(g)}, state, lr)
        assert params["w"].item() == pytest.approx(p, abs=1e-12)


def test_adam_skips_group_with_nonfinite_gradient():
    params = {"a": torch.tensor(1.0), "b": torch.tensor(2.0)}
    state = AdamState()
    new_params, new_state = adam_step(params, {"a": torch.tensor(1.0), "b": torch.tensor(float("nan"))}, state, 0.1)
    assert new_params is params
    assert new_state is state


def test_replay_is_bit_identical():
    gen = torch.Generator().manual_seed(3)
    x = torch.randn(2, 1, 4, 4, generator=gen)
    w = torch.randn(2, 1, 2, 2, generator=gen)
    with Graph() as graph:
        xi, wi = graph.input("x", x), graph.input("w", w)
        y = graph.output("y", ops.sigmoid(ops.conv2d(xi, wi, stride=2)))
    replayed = forward(graph, {"x": x, "w": w})["y"]
    assert torch.equal(replayed.data, y.data)


def test_replay_rejects_missing_and_misshaped_inputs():
    with Graph() as graph:
        x = graph.input("x", torch.ones(3))
        graph.output("y", ops.square(x))
    with pytest.raises(ValueError):
        graph.replay({})
    with pytest.raises(ShapeMismatchError):
        graph.replay({"x": torch.ones(4)})


def test_no_record_yields_constants():
    with Graph() as graph:
        x = graph.input("x", 2.0)
        with no_record():
            y = ops.square(x)
        z = ops.square(x)
    assert y.graph is None
    assert z.graph is graph


def test_strict_graph_raises_on_nonfinite_value():
    with Graph(strict=True) as graph:
        x = graph.input("x", 0.0)
        with pytest.raises(NonFiniteError):
            ops.div(1.0, x)


def test_lenient_graph_records_nonfinite_nodes():
    with Graph() as graph:
        x = graph.input("x", 0.0)
        ops.div(1.0, x)
    assert graph.nonfinite_nodes


def test_shape_mismatch_is_reported():
    with pytest.raises(ShapeMismatchError):
        ops.matmul(torch.ones(2, 3), torch.ones(2, 3))


def test_dump_edges_lists_every_node(tmp_path):
    with Graph() as graph:
        x = graph.input("x", 1.0)
        ops.mul(x, x)
    text = graph.dump_edges(tmp_path / "graph.txt")
    assert "0 input [] x" in text
    assert "0 -> 1" in text
    assert (tmp_path / "graph.txt").read_text() == text


def _normal(*shape):
    return lambda gen: torch.randn(*shape, generator=gen)


def _away_from_zero(*shape, low=0.1):
    def make(gen):
        magnitude = low + (1 - low) * torch.rand(*shape, generator=gen)
        return torch.where(torch.rand(*shape, generator=gen) < 0.5, -magnitude, magnitude)
    return make


def _positive(*shape):
    return lambda gen: 0.5 + 1.5 * torch.rand(*shape, generator=gen)


def _off_clamp_bounds(*shape):
    # bands [-0.95, -0.55], [-0.2, 0.2], [0.55, 0.95] keep clear of the bounds +-0.5
    def make(gen):
        band = torch.randint(0, 3, shape, generator=gen)
        return torch.tensor([-0.95, -0.2, 0.55])[band] + 0.4 * torch.rand(*shape, generator=gen)
    return make


ROWS = torch.tensor([[0, 2], [2, 3]])
SLAB = (slice(1, 3), 2)

PRIMITIVE_CASES = [
    ("add", [_normal(2, 3), _normal(2, 3)], {}),
    ("sub", [_normal(2, 3), _normal(2, 3)], {}),
    ("mul", [_normal(2, 3), _normal(2, 3)], {}),
    ("div", [_normal(2, 3), _away_from_zero(2, 3, low=0.5)], {}),
    ("neg", [_normal(2, 3)], {}),
    ("scale", [_normal(2, 3)], dict(factor=1.7)),
    ("square", [_normal(2, 3)], {}),
    ("sqrt", [_positive(2, 3)], {}),
    ("abs", [_away_from_zero(2, 3)], {}),
    ("leaky_relu", [_away_from_zero(2, 3)], dict(slope=0.2)),
    ("sigmoid", [_normal(2, 3)], {}),
    ("clamp", [_off_clamp_bounds(2, 3)], dict(lo=-0.5, hi=0.5)),
    ("sum", [_normal(2, 3, 2)], dict(axis=1, keepdims=False)),
    ("norm2", [_normal(2, 3)], dict(axis=1, keepdims=False)),
    ("matmul", [_normal(2, 2, 3), _normal(3, 2)], {}),
    ("reshape", [_normal(2, 3)], dict(shape=[3, 2])),
    ("permute", [_normal(2, 3, 2)], dict(dims=[2, 0, 1])),
    ("broadcast_to", [_normal(1, 3)], dict(shape=[2, 3])),
    ("sum_to", [_normal(2, 3)], dict(shape=[1, 3])),
    ("concat", [_normal(2, 1), _normal(2, 2)], dict(axis=1)),
    ("getitem", [_normal(3, 4)], dict(index=SLAB)),
    ("embed", [_normal(2)], dict(shape=[3, 4], index=SLAB)),
    ("take_rows", [_normal(4, 3)], dict(index=ROWS)),
    ("scatter_rows", [_normal(2, 2, 3)], dict(index=ROWS, num_rows=4)),
    ("conv", [_normal(1, 1, 4, 4), _normal(2, 1, 3, 3)], dict(stride=2, padding=1, dims=2)),
    ("conv", [_normal(1, 1, 3, 3, 3), _normal(2, 1, 2, 2, 2)], dict(stride=1, padding=0, dims=3)),
    ("conv_input_grad", [_normal(1, 2, 2, 2), _normal(2, 1, 3, 3)],
     dict(input_shape=[1, 1, 4, 4], stride=2, padding=1, dims=2)),
    ("conv_weight_grad", [_normal(1, 1, 4, 4), _normal(1, 2, 2, 2)],
     dict(weight_shape=[2, 1, 3, 3], stride=2, padding=1, dims=2)),
]
TRIALS = 100


def _case_ids():
    return [f"{name}-{i}" for i, (name, _, _) in enumerate(PRIMITIVE_CASES)]


def _weighted_sum(name, attrs, weights, operands):
    return ops.sum(ops.mul(apply(name, *[ops.constant(o) for o in operands], **attrs), weights))


def _trial(name, makers, attrs, seed):
    gen = torch.Generator().manual_seed(seed)
    values = [make(gen) for make in makers]
    out_shape = PrimitiveFactory(name).forward(*values, **attrs).shape
    weights = torch.randn(*out_shape, generator=gen)
    directions = [torch.randn(*v.shape, generator=gen) for v in values]
    return values, weights, directions


def _shifted(values, directions, step):
    return [v + step * d for v, d in zip(values, directions)]


def _dot(arrays, tensors):
    return sum(float((a.data * t).sum()) for a, t in zip(arrays, tensors))


def test_every_registered_primitive_has_a_gradient_case():
    assert {name for name, _, _ in PRIMITIVE_CASES} == set(PRIMITIVE_FACTORY)


@pytest.mark.parametrize("name, makers, attrs", PRIMITIVE_CASES, ids=_case_ids())
def test_primitive_gradient_matches_finite_differences(name, makers, attrs, float64):
    h = 1e-5
    for seed in range(TRIALS):
        values, weights, directions = _trial(name, makers, attrs, seed)
        with Graph() as graph:
            inputs = [graph.input(f"x{i}", v) for i, v in enumerate(values)]
            grads = gradient(_weighted_sum(name, attrs, weights, inputs), inputs)
        numeric = (_weighted_sum(name, attrs, weights, _shifted(values, directions, h)).item()
                   - _weighted_sum(name, attrs, weights, _shifted(values, directions, -h)).item()) / (2 * h)
        assert _dot(grads, directions) == pytest.approx(numeric, rel=1e-6, abs=1e-8), f"seed {seed}"


def _gradient_projection(name, attrs, weights, values, cotangents):
    """<grad f(values), cotangents> as a recorded node, with its own gradient."""
    with Graph() as graph:
        inputs = [graph.input(f"x{i}", v) for i, v in enumerate(values)]
        grads = gradient(_weighted_sum(name, attrs, weights, inputs), inputs, as_graph=True)
        projection = 0.0
        for g, p in zip(grads, cotangents):
            projection = ops.add(projection, ops.sum(ops.mul(g, p)))
        second = gradient(projection, inputs)
    return projection.item(), second


@pytest.mark.parametrize("name, makers, attrs", PRIMITIVE_CASES, ids=_case_ids())
def test_primitive_second_derivative_matches_finite_differences(name, makers, attrs, float64):
    h = 1e-5
    for seed in range(TRIALS):
        values, weights, directions = _trial(name, makers, attrs, seed)
        gen = torch.Generator().manual_seed(10_000 + seed)
        cotangents = [torch.randn(*v.shape, generator=gen) for v in values]
        _, second = _gradient_projection(name, attrs, weights, values, cotangents)
        plus, _ = _gradient_projection(name, attrs, weights, _shifted(values, directions, h), cotangents)
        minus, _ = _gradient_projection(name, attrs, weights, _shifted(values, directions, -h), cotangents)
        assert _dot(second, directions) == pytest.approx((plus - minus) / (2 * h), rel=1e-6, abs=1e-8), \
            f"seed {seed}"


@pytest.mark.parametrize("dims", [2, 3])
def test_grid_sampling_is_linear_in_the_codes(dims, float64):
    sample = ops.bilinear_sample if dims == 2 else ops.trilinear_sample
    gen = torch.Generator().manual_seed(dims)
    for _ in range(20):
        z1 = torch.randn(2, *[3] * dims, 4, generator=gen)
        z2 = torch.randn(2, *[3] * dims, 4, generator=gen)
        points = torch.rand(2, 7, dims, generator=gen)
        a, b = torch.randn(2, generator=gen).tolist()
        mixed = sample(a * z1 + b * z2, points).data
        separate = a * sample(z1, points).data + b * sample(z2, points).data
        assert torch.allclose(mixed, separate, rtol=0, atol=1e-12)
