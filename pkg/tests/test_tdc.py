import numpy as np
import pytest
import torch
import torch.nn.functional as F

from autohr.errors import ShapeError
from autohr.tdc import TDCParams, TDConv3d, tdc_forward, tdc_forward_reparam


def naive_tdc(x, w, theta):
    """Literal loop over batch, output channel, input channel, t, h, w and kernel taps.

    Zero padding of 1 and stride 1. The center reference is the input voxel at
    the output location, used for both temporally adjacent slices.
    """
    x = np.asarray(x)
    w = np.asarray(w)
    B, Ci, T, H, W = x.shape
    Co = w.shape[0]
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1), (1, 1)))
    out = np.zeros((B, Co, T, H, W))
    for b in range(B):
        for o in range(Co):
            for i in range(Ci):
                for t in range(T):
                    for h in range(H):
                        for v in range(W):
                            center = xp[b, i, t + 1, h + 1, v + 1]
                            acc = 0.0
                            for dt in range(3):
                                for dh in range(3):
                                    for dw in range(3):
                                        val = xp[b, i, t + dt, h + dh, v + dw]
                                        if dt != 1:
                                            val = val - theta * center
                                        acc += w[o, i, dt, dh, dw] * val
                            out[b, o, t, h, v] += acc
    return out


def rand(*shape, seed=0):
    g = torch.Generator().manual_seed(seed)
    return torch.randn(*shape, generator=g, dtype=torch.float64)


@pytest.mark.parametrize("theta", [0.0, 0.2, 0.5, 1.0])
def test_direct_matches_naive_loops(theta):
    x, w = rand(1, 2, 4, 3, 3, seed=1), rand(2, 2, 3, 3, 3, seed=2)
    expected = naive_tdc(x.numpy(), w.numpy(), theta)
    got = tdc_forward(x, TDCParams(w, theta)).numpy()
    np.testing.assert_allclose(got, expected, atol=1e-12)


def test_impulse_input():
    x = torch.zeros(1, 1, 5, 5, 5, dtype=torch.float64)
    x[0, 0, 2, 2, 2] = 1.0
    w = rand(1, 1, 3, 3, 3, seed=3)
    expected = naive_tdc(x.numpy(), w.numpy(), 0.5)
    np.testing.assert_allclose(tdc_forward(x, TDCParams(w, 0.5)).numpy(), expected, atol=1e-12)
    np.testing.assert_allclose(tdc_forward_reparam(x, TDCParams(w, 0.5)).numpy(), expected, atol=1e-12)


def test_theta_zero_is_conv3d():
    x, w = rand(2, 3, 6, 7, 5, seed=4), rand(4, 3, 3, 3, 3, seed=5)
    ref = F.conv3d(x, w, padding=1)
    assert torch.allclose(tdc_forward(x, TDCParams(w, 0.0)), ref, atol=1e-12)
    assert torch.equal(tdc_forward_reparam(x, TDCParams(w, 0.0)), ref)


def test_theta_one_constant_input_interior():
    c = 0.7
    x = torch.full((1, 2, 6, 6, 6), c, dtype=torch.float64)
    w = rand(3, 2, 3, 3, 3, seed=6)
    out = tdc_forward(x, TDCParams(w, 1.0))
    expected = c * w[:, :, 1].sum(dim=(1, 2, 3))
    interior = out[0, :, 1:-1, 1:-1, 1:-1]
    assert torch.allclose(interior, expected.view(-1, 1, 1, 1).expand_as(interior), atol=1e-12)


@pytest.mark.parametrize("theta", [0.2, 0.5, 1.0])
@pytest.mark.parametrize("stride,padding", [((1, 1, 1), (1, 1, 1)), ((2, 1, 2), (1, 1, 1)),
                                            ((1, 2, 2), (0, 1, 0)), ((2, 2, 2), (0, 0, 0))])
def test_reparam_equivalence(theta, stride, padding):
    x, w = rand(2, 3, 7, 8, 9, seed=7), rand(4, 3, 3, 3, 3, seed=8)
    p = TDCParams(w, theta, stride, padding)
    d, r = tdc_forward(x, p), tdc_forward_reparam(x, p)
    assert d.shape == r.shape
    assert (d - r).abs().max() <= 1e-5


def test_reparam_equivalence_largest_shape():
    x = rand(4, 8, 16, 16, 16, seed=9)
    p = TDCParams(rand(8, 8, 3, 3, 3, seed=10), 0.2)
    assert (tdc_forward(x, p) - tdc_forward_reparam(x, p)).abs().max() <= 1e-5


def test_zero_adjacent_slices_ignore_theta():
    x = rand(1, 2, 5, 4, 4, seed=11)
    w = rand(2, 2, 3, 3, 3, seed=12)
    w[:, :, 0] = 0
    w[:, :, 2] = 0
    a = tdc_forward_reparam(x, TDCParams(w, 0.0))
    b = tdc_forward_reparam(x, TDCParams(w, 1.0))
    assert torch.equal(a, b)


def test_linearity():
    x1, x2 = rand(1, 2, 5, 5, 5, seed=13), rand(1, 2, 5, 5, 5, seed=14)
    w1, w2 = rand(3, 2, 3, 3, 3, seed=15), rand(3, 2, 3, 3, 3, seed=16)
    f = lambda x, w: tdc_forward(x, TDCParams(w, 0.2))  # noqa: E731
    assert torch.allclose(f(2 * x1 - 3 * x2, w1), 2 * f(x1, w1) - 3 * f(x2, w1), atol=1e-6)
    assert torch.allclose(f(x1, w1 + 0.5 * w2), f(x1, w1) + 0.5 * f(x1, w2), atol=1e-6)


def test_affine_in_theta():
    x, w = rand(1, 2, 5, 5, 5, seed=17), rand(2, 2, 3, 3, 3, seed=18)
    f = lambda t: tdc_forward(x, TDCParams(w, t))  # noqa: E731
    assert torch.allclose(f(0.5), 0.5 * (f(0.0) + f(1.0)), atol=1e-12)


def central_diff(fn, t, h=1e-3):
    g = torch.zeros_like(t)
    flat = t.view(-1)
    for k in range(flat.numel()):
        old = flat[k].item()
        flat[k] = old + h
        up = fn().item()
        flat[k] = old - h
        down = fn().item()
        flat[k] = old
        g.view(-1)[k] = (up - down) / (2 * h)
    return g


@pytest.mark.parametrize("theta", [0.0, 0.2, 1.0])
@pytest.mark.parametrize("impl", [tdc_forward, tdc_forward_reparam])
def test_gradients_vs_finite_differences(theta, impl):
    x = rand(1, 2, 4, 3, 3, seed=19).requires_grad_()
    w = rand(2, 2, 3, 3, 3, seed=20).requires_grad_()
    proj = rand(1, 2, 4, 3, 3, seed=21)

    def loss():
        return (impl(x, TDCParams(w, theta)) * proj).sum() + (impl(x, TDCParams(w, theta)) ** 2).sum()

    loss().backward()
    with torch.no_grad():
        gx = central_diff(loss, x.detach())
        gw = central_diff(loss, w.detach())
    for analytic, numeric in ((x.grad, gx), (w.grad, gw)):
        rel = (analytic - numeric).norm() / numeric.norm()
        assert rel <= 1e-3


def test_channel_mismatch():
    with pytest.raises(ShapeError):
        tdc_forward(rand(1, 3, 4, 4, 4), TDCParams(rand(2, 2, 3, 3, 3), 0.2))


def test_params_validation():
    with pytest.raises(ValueError):
        TDCParams(rand(2, 2, 3, 3, 3), 1.5)
    with pytest.raises(ShapeError):
        TDCParams(rand(2, 2, 5, 3, 3), 0.2)


def test_module_matches_functional():
    m = TDConv3d(2, 3, theta=0.2).double()
    x = rand(1, 2, 5, 6, 6, seed=22)
    ref = tdc_forward(x, TDCParams(m.conv.weight, 0.2))
    assert torch.allclose(m(x), ref, atol=1e-10)
