"""Operator algebra for registers of multi-level atoms.

Basis ordering is lexicographic over per-site level indices with site 0 the
most significant digit, so ``|g g g>`` is index 0 and a basis index decodes to
level labels by base-``d`` expansion.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

ATOL = 1e-12


@dataclass(frozen=True)
class LevelScheme:
    """Ordered local levels of one atom; a label's index is its basis index."""

    labels: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"duplicate level labels in {self.labels}")
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def d(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"unknown level {label!r}; have {self.labels}") from None

    def basis_state(self, word: Sequence[str] | str) -> np.ndarray:
        """Product state from a sequence of level labels, e.g. ``"grr"``."""
        idx = 0
        for lab in word:
            idx = idx * self.d + self.index(lab)
        vec = np.zeros(self.d ** len(word), dtype=complex)
        vec[idx] = 1.0
        return vec


GER = LevelScheme(("g", "e", "r"))
GR = LevelScheme(("g", "r"))
QUBIT_RP = LevelScheme(("0", "1", "r", "p"))


@dataclass(frozen=True)
class SiteOperator:
    local: np.ndarray
    site: int
    n_sites: int


def matrix_unit(d: int, x: int, y: int) -> np.ndarray:
    """``|x><y|`` on a ``d``-level site."""
    if not (0 <= x < d and 0 <= y < d):
        raise ValueError(f"level indices ({x}, {y}) out of range for d={d}")
    m = np.zeros((d, d), dtype=complex)
    m[x, y] = 1.0
    return m


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b)


def kron_all(factors: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, factors)


def embed_site(op: SiteOperator) -> np.ndarray:
    """Lift a local operator to the full register: ``I x .. x local x .. x I``."""
    if not 0 <= op.site < op.n_sites:
        raise ValueError(f"site {op.site} out of range for {op.n_sites} sites")
    d = op.local.shape[0]
    left = np.eye(d ** op.site)
    right = np.eye(d ** (op.n_sites - op.site - 1))
    return np.kron(np.kron(left, op.local), right)


def embed(local: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    return embed_site(SiteOperator(local, site, n_sites))


def sigma(scheme: LevelScheme, x: str, y: str, site: int, n_sites: int) -> np.ndarray:
    """Embedded ``|x>_site <y|``."""
    return embed(matrix_unit(scheme.d, scheme.index(x), scheme.index(y)), site, n_sites)


def neighbor_projector(scheme: LevelScheme, occupancy: int) -> np.ndarray:
    """Local projector onto the ground (0) or Rydberg (1) level of a neighbor.

    The ground level is the scheme's first label and the Rydberg level is the
    label ``"r"``.
    """
    if occupancy == 0:
        k = 0
    elif occupancy == 1:
        k = scheme.index("r")
    else:
        raise ValueError(f"neighbor occupancy must be 0 or 1, got {occupancy}")
    return matrix_unit(scheme.d, k, k)


def projected_transition(
    j: int,
    xy: tuple[str, str],
    m: int,
    n: int,
    scheme: LevelScheme,
    n_sites: int,
) -> np.ndarray:
    """``P_{j-1}^m |x>_j<y| P_{j+1}^n`` on a ring of ``n_sites`` atoms."""
    if n_sites < 3:
        raise ValueError("ring-projected transitions need at least 3 sites")
    if not 0 <= j < n_sites:
        raise ValueError(f"site {j} out of range for {n_sites} sites")
    d = scheme.d
    factors = [np.eye(d, dtype=complex) for _ in range(n_sites)]
    factors[(j - 1) % n_sites] = neighbor_projector(scheme, m)
    factors[(j + 1) % n_sites] = neighbor_projector(scheme, n)
    factors[j] = matrix_unit(d, scheme.index(xy[0]), scheme.index(xy[1]))
    return kron_all(factors)


def pair_interaction(
    scheme: LevelScheme, level: str, n_sites: int, pairs: Sequence[tuple[int, int]] | None = None
) -> np.ndarray:
    """``sum_{(j,k)} |ll>_jk <ll|`` over the given pairs (all pairs by default)."""
    if pairs is None:
        pairs = [(j, k) for j in range(n_sites) for k in range(j + 1, n_sites)]
    proj = [sigma(scheme, level, level, j, n_sites) for j in range(n_sites)]
    dim = scheme.d ** n_sites
    out = np.zeros((dim, dim), dtype=complex)
    for j, k in pairs:
        out += proj[j] @ proj[k]
    return out


def ring_pairs(n_sites: int) -> list[tuple[int, int]]:
    return [(j, (j + 1) % n_sites) for j in range(n_sites)]


def is_hermitian(a: np.ndarray, tol: float = ATOL) -> bool:
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def ket(vec: Sequence[complex]) -> np.ndarray:
    v = np.asarray(vec, dtype=complex)
    return v / np.linalg.norm(v)


def lift_state(vec: np.ndarray, n_sites: int, src: LevelScheme, dst: LevelScheme) -> np.ndarray:
    """Re-express a state given over ``src`` levels in the larger ``dst`` basis."""
    vec = np.asarray(vec, dtype=complex)
    if vec.shape != (src.d**n_sites,):
        raise ValueError(f"state of length {vec.size} is not over {n_sites} {src.labels} sites")
    out = np.zeros(dst.d**n_sites, dtype=complex)
    for i, amp in enumerate(vec):
        if amp == 0:
            continue
        digits = np.unravel_index(i, (src.d,) * n_sites)
        j = np.ravel_multi_index(tuple(dst.index(src.labels[k]) for k in digits), (dst.d,) * n_sites)
        out[j] = amp
    return out
