"""Product quadrature on the unit sphere and compensated accumulation."""

from dataclasses import dataclass, field
import math

import numpy as np


@dataclass(frozen=True)
class SphereQuadrature:
    """Gauss-Legendre in cos(theta) times the uniform rule in phi.

    The rule integrates every spherical harmonic of degree
    ``<= min(2*n_theta - 1, n_phi - 1)`` exactly.  Nodes are ordered
    theta-major, which is also the accumulation order.
    """

    n_theta: int = 32
    n_phi: int = 64
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)
    theta: np.ndarray = field(init=False, repr=False, compare=False)
    phi: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_theta < 1 or self.n_phi < 1:
            raise ValueError("quadrature orders must be positive")
        mu, w_mu = np.polynomial.legendre.leggauss(self.n_theta)
        theta_1d = np.arccos(mu)
        phi_1d = 2.0 * np.pi * (np.arange(self.n_phi) + 0.5) / self.n_phi
        theta, phi = np.meshgrid(theta_1d, phi_1d, indexing="ij")
        weights = np.repeat(w_mu, self.n_phi) * (2.0 * np.pi / self.n_phi)
        st = np.sin(theta)
        nodes = np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)
        object.__setattr__(self, "nodes", nodes.reshape(-1, 3))
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "theta", theta.ravel())
        object.__setattr__(self, "phi", phi.ravel())

    @property
    def degree(self):
        return min(2 * self.n_theta - 1, self.n_phi - 1)

    def __len__(self):
        return self.weights.size

    def integrate(self, values):
        """Weighted sum of integrand values sampled at ``nodes``."""
        return compensated_sum(np.asarray(values, dtype=float) * self.weights)


def compensated_sum(terms):
    """Error-free accumulation in the given (deterministic) order."""
    return math.fsum(np.asarray(terms, dtype=float).ravel().tolist())


def gauss_legendre_interval(a, b, n):
    """Nodes and weights of the n-point Gauss-Legendre rule on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w
