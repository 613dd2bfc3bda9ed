import math

import pytest
import torch
from scipy import linalg

from manifold_glow.utils.error_handler import ConditioningWarning
from manifold_glow.utils.linalg import (
    cayley,
    coords_to_sym,
    divided_differences,
    orthogonality_defect,
    side_from_dim,
    skew_from_raw,
    sym_expm,
    sym_logm,
    sym_to_coords,
)


def test_cayley_of_unit_generator() -> None:
    rotation = cayley(torch.tensor([1.0]), 2)
    assert torch.allclose(rotation, torch.tensor([[0.0, 1.0], [-1.0, 0.0]]))


def test_cayley_is_a_rotation() -> None:
    raw = torch.randn(5, 6, generator=torch.Generator().manual_seed(0))
    rotation = cayley(raw, 4)
    assert float(orthogonality_defect(rotation).max()) < 1e-12
    assert torch.allclose(torch.linalg.det(rotation), torch.ones(5))
    assert torch.equal(cayley(torch.zeros(3), 3), torch.eye(3))


def test_skew_layout_is_row_major() -> None:
    skew = skew_from_raw(torch.tensor([1.0, 2.0, 3.0]), 3)
    expected = torch.tensor([[0.0, 1.0, 2.0], [-1.0, 0.0, 3.0], [-2.0, -3.0, 0.0]])
    assert torch.equal(skew, expected)


def test_scaled_coords_preserve_frobenius_norm() -> None:
    mat = torch.tensor([[1.0, 2.0], [2.0, 3.0]])
    coords = sym_to_coords(mat)
    assert torch.allclose(coords, torch.tensor([1.0, 2.0 * math.sqrt(2.0), 3.0]))
    assert float(coords.norm()) == pytest.approx(float(torch.linalg.matrix_norm(mat)))
    assert torch.allclose(coords_to_sym(coords, 2), mat)
    assert torch.equal(sym_to_coords(mat, scaled=False), torch.tensor([1.0, 2.0, 3.0]))


def test_side_from_dim() -> None:
    assert [side_from_dim(m) for m in (1, 3, 6, 10)] == [1, 2, 3, 4]
    with pytest.raises(ValueError):
        side_from_dim(4)


def test_divided_differences_of_log() -> None:
    table = divided_differences(torch.tensor([1.0, math.e]), 'log')
    expected = torch.tensor(
        [[1.0, 1.0 / (math.e - 1.0)], [1.0 / (math.e - 1.0), 1.0 / math.e]]
    )
    assert torch.allclose(table, expected)


def test_repeated_eigenvalues_use_the_derivative() -> None:
    table = divided_differences(torch.tensor([2.0, 2.0]), 'log')
    assert torch.allclose(table, torch.full((2, 2), 0.5))


def test_near_degenerate_eigenvalues_warn() -> None:
    with pytest.warns(ConditioningWarning):
        divided_differences(torch.tensor([1.0, 1.0 + 1e-9]), 'exp')


def test_matrix_log_gradient_at_repeated_eigenvalues() -> None:
    x = (2.0 * torch.eye(3)).requires_grad_(True)
    torch.diagonal(sym_logm(x)).sum().backward()
    assert torch.allclose(x.grad, 0.5 * torch.eye(3))


def test_matrix_exp_inverts_log() -> None:
    a = torch.randn(4, 3, 3, generator=torch.Generator().manual_seed(1))
    spd = a @ a.transpose(-1, -2) + torch.eye(3)
    assert torch.allclose(sym_expm(sym_logm(spd)), spd, atol=1e-10)


def test_matrix_functions_agree_with_scipy() -> None:
    a = torch.randn(3, 3, generator=torch.Generator().manual_seed(2))
    spd = a @ a.T + 0.5 * torch.eye(3)
    expected = torch.from_numpy(linalg.logm(spd.numpy()).real)
    assert torch.allclose(sym_logm(spd), expected)
    sym = 0.5 * (a + a.T)
    assert torch.allclose(sym_expm(sym), torch.from_numpy(linalg.expm(sym.numpy())))
