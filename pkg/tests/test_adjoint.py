import pytest

from bbrecog.adjoint import (
    Matrix3K,
    adjoint_for,
    det3,
    diagonal,
    half_turn,
    identity_matrix,
    rho,
    rho_inverse,
    so3k_check,
    so3k_mul,
)
from bbrecog.errors import ValidationError
from bbrecog.pipeline import build_field

from conftest import enumerate_group


@pytest.fixture(scope="module")
def pgl7():
    s = build_field({"type": "PGL2", "field": {"p": 7, "k": 1}}, 1, 20)
    return s, adjoint_for(s.K)


@pytest.fixture(scope="module")
def lifted13():
    s = build_field({"type": "PSL2", "field": {"p": 13, "k": 1}}, 2, 20)
    return s, adjoint_for(s.K)


def test_frame_involutions_go_to_diagonals(pgl7):
    s, A = pgl7
    F = A.F
    assert rho(s.frame, s.K, s.frame.e1).eq(diagonal(F, (1, -1, -1)))
    assert A.rho(s.frame.e2).eq(diagonal(F, (-1, 1, -1)))
    assert A.rho(s.frame.e3).eq(diagonal(F, (-1, -1, 1)))
    assert A.rho(s.X.identity).eq(identity_matrix(F))


def test_injective_homomorphism_on_pgl2_7(pgl7):
    s, A = pgl7
    X = s.X
    elements = enumerate_group(X, 336)
    images = {}
    for x in elements:
        m = A.rho(x)
        assert so3k_check(m)
        images[m.keys()] = x
    assert len(images) == 336
    for _ in range(60):
        a, b = X.random(), X.random()
        assert so3k_mul(A.rho(a), A.rho(b)).eq(A.rho(X.mul(a, b)))


def test_round_trip_on_lifted_group(lifted13):
    s, A = lifted13
    for _ in range(25):
        x = s.X.random()
        assert s.X.eq(rho_inverse(s.frame, s.K, A.rho(x)), x)


def test_half_turn_is_an_involution_of_determinant_one(pgl7):
    _, A = pgl7
    F = A.F
    m = half_turn(F, (F.one, F.two, F.one))
    assert so3k_check(m)
    assert F.is_one(det3(m))
    assert so3k_mul(m, m).eq(identity_matrix(F))


def test_rejects_matrices_outside_so3(pgl7):
    s, A = pgl7
    F = A.F
    z, o = F.zero, F.one
    shear = Matrix3K((o, o, z, z, o, z, z, z, o), F)
    assert not so3k_check(shear)
    with pytest.raises(ValidationError):
        A.rho_inverse(shear)
    # orthogonal with determinant -1
    with pytest.raises(ValidationError):
        A.rho_inverse(diagonal(F, (-1, -1, -1)))


def test_rejects_foreign_frame(pgl7, lifted13):
    s, _ = pgl7
    other, _ = lifted13
    with pytest.raises(ValidationError):
        rho(other.frame, s.K, s.frame.e1)
