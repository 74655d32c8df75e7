import json
import math

import numpy as np
import pytest

from critineq import groups
from critineq.groups import (
    AccuracyError,
    GroupDescriptor,
    InvalidDescriptorError,
    dilate,
    euclidean,
    heisenberg1,
    homogeneous_dimension,
    sphere_measure,
)

import oracles


def test_homogeneous_dimension_values():
    assert homogeneous_dimension([1, 1]) == 2
    assert homogeneous_dimension([1, 1, 2]) == 4
    assert homogeneous_dimension([2]) == 2


def test_homogeneous_dimension_rejects_bad_weights():
    with pytest.raises(InvalidDescriptorError):
        homogeneous_dimension([])
    with pytest.raises(InvalidDescriptorError):
        homogeneous_dimension([1.0, -0.5])
    with pytest.raises(InvalidDescriptorError):
        homogeneous_dimension([0.0, 1.0])


def test_gamma_assignment():
    assert euclidean(3).gamma == 1.0
    assert heisenberg1().gamma == 1.0
    assert groups.anisotropic([1.0, 2.0]).gamma == 2.0


def test_descriptor_q_consistency():
    with pytest.raises(InvalidDescriptorError):
        GroupDescriptor(name="bad", weights=(1.0, 1.0), Q=3.0, gamma=1.0, quasi_norm="euclidean")


def test_dilate_identity_and_componentwise():
    d = groups.anisotropic([1.0, 2.0])
    x = np.array([1.0, 1.0])
    assert np.allclose(dilate(x, 1.0, d), x)
    assert np.allclose(dilate(x, 2.0, d), [2.0, 4.0])
    with pytest.raises(ValueError):
        dilate(x, -1.0, d)
    with pytest.raises(ValueError):
        dilate(x, 0.0, d)


@pytest.mark.parametrize("desc", [euclidean(2), euclidean(3), heisenberg1(), groups.anisotropic([1.0, 1.5, 3.0])])
def test_quasi_norm_homogeneity_and_symmetry(desc):
    rng = np.random.default_rng(5)
    x = rng.normal(size=(40, desc.n))
    base = desc.norm(x)
    for r in (0.3, 1.0, 2.0, 17.5):
        scaled = desc.norm(dilate(x, r, desc))
        assert np.max(np.abs(scaled - r * base) / (r * base)) <= 1e-12
    assert np.allclose(desc.norm(-x), base)
    assert desc.norm(np.zeros(desc.n)) == 0.0
    assert np.all(base > 0)


def test_sphere_measure_euclidean_values():
    assert sphere_measure(euclidean(2)) == pytest.approx(2 * math.pi, abs=1e-6)
    assert sphere_measure(euclidean(1)) == pytest.approx(2.0, abs=1e-9)
    assert sphere_measure(euclidean(3)) == pytest.approx(4 * math.pi, abs=1e-6)


def test_sphere_measure_heisenberg_vs_quadrature_oracle():
    # independent midpoint + Richardson oracle; pi^2/2 analytically
    oracle = oracles.koranyi_sphere_richardson()
    value = sphere_measure(heisenberg1())
    assert value == pytest.approx(oracle, rel=1e-4)
    assert value == pytest.approx(math.pi**2 / 2.0, rel=1e-10)


def test_sphere_measure_convergence_and_accuracy_error():
    v1, err1 = sphere_measure(heisenberg1(), nodes=24, return_error=True)
    v2, err2 = sphere_measure(heisenberg1(), nodes=48, return_error=True)
    assert abs(v2 - v1) <= max(err1, 1e-12)
    with pytest.raises(AccuracyError):
        sphere_measure(groups.anisotropic([1.0, 2.9]), nodes=4, tol=1e-14)


def test_dilation_volume_scaling_by_point_counts():
    desc = euclidean(2)
    N = 512
    ax = np.linspace(-4, 4, N, endpoint=False)
    xx, yy = np.meshgrid(ax, ax, indexing="ij")
    norm = np.sqrt(xx**2 + yy**2)
    r = 2.0
    counts1 = np.count_nonzero(norm <= 1.0)
    counts2 = np.count_nonzero(norm <= r)
    assert counts2 / counts1 == pytest.approx(r**desc.Q, rel=2 * desc.n * 2.0 / N)


def test_polar_identity_gaussian():
    # full-space quadrature of exp(-|x|^2) against |P| * int r^{Q-1} e^{-r^2} dr
    for n in (1, 2, 3):
        desc = euclidean(n)
        N, L = 128, 16.0
        ax = -L / 2 + (L / N) * np.arange(N)
        grids = np.meshgrid(*([ax] * n), indexing="ij")
        r2 = sum(g**2 for g in grids)
        quad_full = np.exp(-r2).sum() * (L / N) ** n
        radial = 0.5 * math.gamma(n / 2.0)  # int_0^inf e^{-r^2} r^{Q-1} dr
        assert quad_full == pytest.approx(sphere_measure(desc) * radial, rel=1e-6)


def test_sphere_measure_anisotropic_dirichlet_formula():
    # closed form vol{sum |x_i|^(a_i) <= 1} = 2^n prod Gamma(1+1/a_i) / Gamma(1+sum 1/a_i)
    desc = groups.anisotropic([1.0, 2.0])
    m = max(desc.weights)
    a = [2.0 * m / nu for nu in desc.weights]
    vol = 2.0**2 * math.prod(math.gamma(1 + 1 / ai) for ai in a) / math.gamma(1 + sum(1 / ai for ai in a))
    assert sphere_measure(desc) == pytest.approx(desc.Q * vol, rel=1e-10)


def test_descriptor_json_roundtrip():
    d = heisenberg1()
    d2 = GroupDescriptor.from_json(d.to_json())
    assert d2 == d
    doc = json.loads(d.to_json())
    assert set(doc) == {"name", "weights", "Q", "gamma", "quasi_norm", "koranyi_constant"}
