"""Ernst potentials of the KN family and the SU(1,2) action on potential pairs."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .charts import RING_TOL, SpacetimeParams
from .metric import SingularMetricError


@dataclass(frozen=True)
class ErnstPair:
    e_pot: complex
    phi_pot: complex


@dataclass(frozen=True)
class SymmetryElement:
    """One element of the symmetry group acting on Ernst pairs.

    Build instances through the classmethods rather than the raw constructor.
    """

    kind: str
    z: complex = 0j
    gamma: float = 0.0
    beta: float = 0.0
    alpha: float = 0.0

    KINDS = ("translation", "scaling", "rotation", "inverted_translation", "conjugation", "inversion")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown symmetry kind {self.kind!r}")

    @classmethod
    def translation(cls, z: complex, gamma: float) -> "SymmetryElement":
        return cls("translation", z=complex(z), gamma=float(gamma))

    @classmethod
    def scaling(cls, beta: float) -> "SymmetryElement":
        return cls("scaling", beta=float(beta))

    @classmethod
    def rotation(cls, alpha: float) -> "SymmetryElement":
        return cls("rotation", alpha=float(alpha))

    @classmethod
    def inverted_translation(cls, z: complex, gamma: float) -> "SymmetryElement":
        return cls("inverted_translation", z=complex(z), gamma=float(gamma))

    @classmethod
    def conjugation(cls) -> "SymmetryElement":
        return cls("conjugation")

    @classmethod
    def inversion(cls) -> "SymmetryElement":
        return cls("inversion")


def ernst_kn(r: float, theta: float, params: SpacetimeParams) -> ErnstPair:
    """``Phi = q/(r - i a cos theta)``, ``E = 1 - 2 kappa m/(r - i a cos theta)``."""
    w = complex(r, -params.a * math.cos(theta))
    if abs(w) ** 2 <= RING_TOL * params.a**2:
        raise SingularMetricError("Ernst potentials evaluated on the ring")
    inv = 1.0 / w
    return ErnstPair(1.0 - 2.0 * params.kappa * params.m * inv, params.q * inv)


def complex_line_residual(pair: ErnstPair, params: SpacetimeParams) -> complex:
    if params.q == 0:
        raise ValueError("the complex line is defined for q != 0")
    return pair.e_pot + (2.0 * params.kappa * params.m / params.q) * pair.phi_pot - 1.0


def _invert(pair: ErnstPair) -> ErnstPair:
    if pair.e_pot == 0:
        raise ZeroDivisionError("inversion is undefined at E = 0")
    return ErnstPair(1.0 / pair.e_pot, pair.phi_pot / pair.e_pot)


def _translate(pair: ErnstPair, z: complex, gamma: float, kappa: float) -> ErnstPair:
    # conjugate on z so that Re E - (kappa/2)|Phi|^2 is invariant
    e = pair.e_pot + kappa * z.conjugate() * pair.phi_pot + 0.5 * kappa * abs(z) ** 2 + 1j * gamma
    return ErnstPair(e, pair.phi_pot + z)


def apply_symmetry(g: SymmetryElement, pair: ErnstPair, kappa: float = 2.0) -> ErnstPair:
    """Act with ``g`` on ``pair``.

    ``kappa`` enters only the translations; the default 2 gives the unit
    normalisation ``E + 2 conj(z) Phi + |z|^2 + i gamma``.
    """
    if g.kind == "translation":
        return _translate(pair, g.z, g.gamma, kappa)
    if g.kind == "scaling":
        return ErnstPair(math.exp(2.0 * g.beta) * pair.e_pot, math.exp(g.beta) * pair.phi_pot)
    if g.kind == "rotation":
        return ErnstPair(pair.e_pot, cmath.exp(1j * g.alpha) * pair.phi_pot)
    if g.kind == "inverted_translation":
        return _invert(_translate(_invert(pair), g.z, g.gamma, kappa))
    if g.kind == "conjugation":
        return ErnstPair(pair.e_pot.conjugate(), pair.phi_pot.conjugate())
    return _invert(pair)


def siegel_gap(pair: ErnstPair, kappa: float) -> float:
    """``Re E - (kappa/2)|Phi|^2``; nonnegative inside the Siegel domain."""
    return pair.e_pot.real - 0.5 * kappa * abs(pair.phi_pot) ** 2


def siegel_check(pair: ErnstPair, params: SpacetimeParams) -> bool:
    return siegel_gap(pair, params.kappa) >= 0.0
