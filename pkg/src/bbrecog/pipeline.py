"""End-to-end stages shared by the command line and the acceptance tests."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .blackbox import BlackBox
from .errors import BudgetExhausted, ValidationError
from .frame import SpinorFrame, build_sym4
from .involutions import engine_for
from .kfield import BlackBoxFieldK
from .lift import LiftedBox, lift_psl2_to_so3
from .matrix_oracle import MatrixGroupBox, box_from_spec
from .serendipity import UnipotentCertificate, find_characteristic_and_unipotent

PIPELINE_ATTEMPTS = 3


@dataclass
class FieldSetup:
    Y: BlackBox
    X: BlackBox
    frame: SpinorFrame
    K: BlackBoxFieldK


def so3_box(Y: BlackBox, confidence: Optional[int] = None) -> BlackBox:
    """PGL2 oracles are used as they are; PSL2 is lifted first."""
    if isinstance(Y, MatrixGroupBox) and Y.kind == "PGL2":
        return Y
    X = lift_psl2_to_so3(Y)
    if confidence is not None:
        engine_for(X, confidence)
    return X


def require_odd(spec: dict) -> None:
    p = int(spec.get("field", {}).get("p", 0))
    if p == 2:
        raise ValidationError("odd characteristic required")


def build_field(spec: dict, seed: int, confidence: int) -> FieldSetup:
    require_odd(spec)
    Y = box_from_spec(spec, seed=seed)
    engine_for(Y, confidence)
    X = so3_box(Y, confidence)
    frame = build_sym4(X)
    q = Y.q if isinstance(Y, MatrixGroupBox) else None
    return FieldSetup(Y, X, frame, BlackBoxFieldK(X, frame, order=q))


def certificate_in_y(setup: FieldSetup, cert: UnipotentCertificate):
    """The certificate's element as a Y-string."""
    if isinstance(setup.X, LiftedBox):
        return setup.X.project(cert.u)
    return cert.u


def run_unipotent(spec: dict, seed: int, confidence: int, p_hint: Optional[int] = None):
    """(certificate, u as a Y-string, setup); retries the whole pipeline on
    budget exhaustion or a certificate that fails verification."""
    last: Exception = BudgetExhausted("no attempt made")
    for attempt in range(PIPELINE_ATTEMPTS):
        try:
            setup = build_field(spec, seed + attempt * 1_000_003, confidence)
            cert = find_characteristic_and_unipotent(setup.X, setup.K, p_hint)
        except BudgetExhausted as exc:
            last = exc
            continue
        u = certificate_in_y(setup, cert)
        Y = setup.Y
        if cert.verify(setup.X) and not Y.is_identity(u) and Y.is_identity(Y.power(u, cert.p)):
            return cert, u, setup
        last = BudgetExhausted("certificate failed verification")
    raise last
