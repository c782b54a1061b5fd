"""Generalized geometric measure and the entropy/eigenvalue condition flags
relating it to the dense-coding bound."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qcore import (PureState, RegisterLayout, binary_entropy,
                    partial_trace_matrix, von_neumann_entropy)

TIE_ATOL = 1e-9


@dataclass(frozen=True)
class BipartitionScan:
    """Max squared Schmidt coefficient for every nonequivalent bipartition.

    ``entries`` maps a cut label (role tags of the smaller side, e.g. "R2"
    or "S1R1") to its largest squared Schmidt coefficient.
    """

    entries: tuple
    argmax_label: str
    max_lambda_sq: float


def _bipartitions(n: int):
    """Subsets A with 1 <= |A| <= n/2, one representative per cut
    (for |A| = n/2 only those containing qubit 0)."""
    cuts = []
    for mask in range(1, 1 << n):
        a = [q for q in range(n) if (mask >> q) & 1]
        if len(a) > n // 2:
            continue
        if 2 * len(a) == n and 0 not in a:
            continue
        cuts.append(a)
    cuts.sort(key=lambda a: (len(a), a))
    return cuts


def _max_schmidt_sq(amps: np.ndarray, cut, n: int) -> float:
    # coefficient matrix of the cut: rows = A bits, cols = complement bits
    rest = [q for q in range(n) if q not in cut]
    t = amps.reshape([2] * n).transpose(cut + rest)
    m = t.reshape(1 << len(cut), 1 << len(rest))
    s = np.linalg.svd(m, compute_uv=False)
    return float(s[0] ** 2)


def ggm(state: PureState):
    """Generalized geometric measure: 1 minus the largest squared Schmidt
    coefficient over all bipartitions.

    Returns:
        (value, BipartitionScan). The value is 0 exactly when some cut is a
        product, and at most 1/2 for qubit systems (every 1:(n-1) cut has a
        squared Schmidt coefficient of at least 1/2).
    """
    n = state.n_qubits
    if n < 2:
        raise ValueError("GGM needs at least two parties")
    entries = []
    best = -1.0
    best_label = ""
    for cut in _bipartitions(n):
        label = "".join(state.layout.roles[q] for q in cut)
        lam2 = _max_schmidt_sq(state.amplitudes, cut, n)
        entries.append((label, lam2))
        if lam2 > best:
            best, best_label = lam2, label
    scan = BipartitionScan(entries=tuple(entries), argmax_label=best_label,
                           max_lambda_sq=best)
    return 1.0 - best, scan


@dataclass(frozen=True)
class Theorem2Flags:
    """Condition flags for the capacity/entanglement ordering of a four-qubit
    state against the two-term reference family.

    cond_i: S(rho^{R1}) <= S(rho^{S1 R1});
    cond_ii: the bipartition scan's argmax is the R2 : rest cut;
    swapped_*: the same with S1,R1 and S2,R2 interchanged.
    Ties within 1e-9 count as satisfied.
    """

    cond_i: bool
    cond_ii: bool
    swapped_i: bool
    swapped_ii: bool

    @property
    def strict(self) -> bool:
        return self.cond_i and self.cond_ii

    @property
    def either(self) -> bool:
        return (self.cond_i and self.cond_ii) or (self.swapped_i and self.swapped_ii)


def theorem2_conditions(state: PureState,
                        layout: RegisterLayout | None = None) -> Theorem2Flags:
    """Evaluate the ordering conditions on a four-party state with roles
    S1, S2, R1, R2."""
    layout = (layout or state.layout).require_protocol()
    if layout.n_qubits != 4 or set(layout.roles) != {"S1", "S2", "R1", "R2"}:
        raise ValueError("theorem2_conditions needs the S1 S2 R1 R2 register")
    n = 4
    amps = state.amplitudes
    rho = np.outer(amps, amps.conj())
    idx = {tag: layout.index_of(tag) for tag in layout.roles}

    def s_of(tags) -> float:
        keep = sorted(idx[t] for t in tags)
        return von_neumann_entropy(partial_trace_matrix(rho, keep, n))

    _, scan = ggm(state)
    by_label = dict(scan.entries)

    cond_i = s_of(["R1"]) <= s_of(["S1", "R1"]) + TIE_ATOL
    cond_ii = by_label["R2"] >= scan.max_lambda_sq - TIE_ATOL
    swapped_i = s_of(["R2"]) <= s_of(["S2", "R2"]) + TIE_ATOL
    swapped_ii = by_label["R1"] >= scan.max_lambda_sq - TIE_ATOL
    return Theorem2Flags(cond_i=bool(cond_i), cond_ii=bool(cond_ii),
                         swapped_i=bool(swapped_i), swapped_ii=bool(swapped_ii))


def gghz_ggm_at_capacity(bound_bits: float) -> float:
    """GGM of the two-term (gGHZ-type) four-qubit state whose noiseless LOCC
    bound equals ``bound_bits``.

    Solves H(m) = bound - 2 for the larger marginal eigenvalue m in [1/2, 1]
    by bisection to 1e-10 and returns E = 1 - m; increasing in the bound.
    """
    if bound_bits < 2.0 - 1e-9 or bound_bits > 3.0 + 1e-9:
        raise ValueError(f"bound {bound_bits} outside [2, 3]")
    target = min(max(bound_bits - 2.0, 0.0), 1.0)
    lo, hi = 0.5, 1.0  # H decreasing on [1/2, 1]
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) > target:
            lo = mid
        else:
            hi = mid
    return 1.0 - 0.5 * (lo + hi)


def above_gghz_line(ggm_value: float, bound_bits: float,
                    atol: float = TIE_ATOL) -> bool:
    """Whether the point (bound, GGM) lies on or above the two-term reference
    curve in the noiseless plane.

    Uses the equivalent form bound <= 2 + H(1 - E), which is defined for
    every GGM value in [0, 1/2] (bounds above 3 bits fall below the line,
    which ends at (3, 1/2)).
    """
    e = min(max(ggm_value, 0.0), 0.5)
    return bound_bits <= 2.0 + binary_entropy(1.0 - e) + atol
