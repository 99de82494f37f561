"""Euclidean gamma matrices in n = 2, 4 and the wall-adapted basis."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from math import factorial

import numpy as np

SIGMA = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
I2 = np.eye(2, dtype=complex)


def perm_sign(p) -> int:
    p = list(p)
    sign = 1
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def levi_civita_contract(mats) -> np.ndarray:
    """``eps_{i..k} M^i ... M^k`` summed over all permutations."""
    k = len(mats)
    out = np.zeros_like(mats[0])
    for p in permutations(range(k)):
        prod = mats[p[0]]
        for i in p[1:]:
            prod = prod @ mats[i]
        out = out + perm_sign(p) * prod
    return out


def chirality(gammas) -> np.ndarray:
    """``gamma_* = -(i^m / n!) eps_{mu..rho} gamma^mu ... gamma^rho``."""
    n = len(gammas)
    m = n // 2
    return -(1j**m) / factorial(n) * levi_civita_contract(list(gammas))


@dataclass(frozen=True)
class GammaRep:
    n: int
    gammas: np.ndarray = field(repr=False)
    gamma_star: np.ndarray = field(repr=False)
    wall_adapted: bool = False
    hat: np.ndarray | None = field(default=None, repr=False)

    @property
    def spinor_dim(self) -> int:
        return 2 ** (self.n // 2)

    @property
    def m(self) -> int:
        return self.n // 2

    def clifford_residual(self) -> float:
        g = self.gammas
        eye = np.eye(self.spinor_dim)
        res = 0.0
        for mu in range(self.n):
            for nu in range(self.n):
                r = g[mu] @ g[nu] + g[nu] @ g[mu] - 2 * (mu == nu) * eye
                res = max(res, np.abs(r).max())
        return res

    def chirality_residuals(self) -> dict:
        gs = self.gamma_star
        eye = np.eye(self.spinor_dim)
        return {
            "square": float(np.abs(gs @ gs - eye).max()),
            "hermitian": float(np.abs(gs - gs.conj().T).max()),
            "anticommute": float(max(np.abs(gs @ g + g @ gs).max() for g in self.gammas)),
            "gstar_formula": float(np.abs(gs - chirality(self.gammas)).max()),
        }

    def orientation_residual(self) -> float:
        """Residual of ``eps_{a..c n} hat^a..hat^c = -(n-1)! (-i)^(m-1)``."""
        if self.hat is None:
            raise ValueError("representation is not wall adapted")
        lhs = levi_civita_contract(list(self.hat))
        rhs = -factorial(self.n - 1) * (-1j) ** (self.m - 1) * np.eye(len(self.hat[0]))
        return float(np.abs(lhs - rhs).max())


def standard_rep(n: int) -> GammaRep:
    if n == 2:
        gammas = np.array([SIGMA[0], SIGMA[1]])
    elif n == 4:
        gammas = np.array([np.kron(SIGMA[0], SIGMA[a]) for a in range(3)] + [np.kron(SIGMA[1], I2)])
    else:
        raise ValueError(f"unsupported dimension {n}")
    return GammaRep(n, gammas, chirality(gammas))


def wall_hat_gammas(n: int) -> np.ndarray:
    # fixed by the orientation constraint with eps_{1..n} = +1
    if n == 2:
        return np.array([[[-1.0 + 0j]]])
    if n == 4:
        return SIGMA.copy()
    raise ValueError(f"unsupported dimension {n}")


def wall_adapt(rep: GammaRep) -> GammaRep:
    """Block form with ``gamma_* = diag(1, -1) x id`` and normal ``gamma^n = [[0, i], [-i, 0]] x id``."""
    if rep.wall_adapted:
        return rep
    n = rep.n
    hat = wall_hat_gammas(n)
    d = hat.shape[1]
    eye = np.eye(d, dtype=complex)
    offdiag = SIGMA[0]
    normal = np.array([[0, 1j], [-1j, 0]])
    gammas = np.array([np.kron(offdiag, h) for h in hat] + [np.kron(normal, eye)])
    gstar = np.kron(SIGMA[2], eye)
    out = GammaRep(n, gammas, gstar, wall_adapted=True, hat=hat)
    # must agree with the chirality formula for this ordering of the coordinates
    if np.abs(chirality(gammas) - gstar).max() > 1e-13:
        raise AssertionError("wall-adapted basis inconsistent with chirality formula")
    return out
