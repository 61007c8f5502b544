"""Exact finite-alphabet oracle and Monte Carlo cross-checks.

Everything the Gaussian path computes in closed form is recomputed here by
brute force: conditional mutual information by direct summation over a
joint pmf, factorization checks against each scheme's chain of
conditionals, and exact evaluation of all five schemes' constraint systems
(the all-splitting schemes are supported only here).  A Gaussian sampler
estimates any analytic information value with a standard error for
statistical agreement tests.

Unlike the Gaussian path, the time-share variable Q is an explicit
(possibly size-1) alphabet so genuine time-share conditioning is
exercised at least somewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from .constraints import ConstraintSystem, NumericSystem, build_system
from .gaussinfo import LN2, CovarianceTable, CovarianceError
from .model import Scheme

CELL_CAP = 10**7
PROB_TOL = 1e-12
FACTORIZATION_TOL = 1e-9


class PmfError(ValueError):
    pass


@dataclass(frozen=True)
class JointPmf:
    """Probability table over named finite-alphabet variables."""

    labels: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        if t.ndim != len(self.labels):
            raise PmfError(
                f"table has {t.ndim} axes for {len(self.labels)} labels"
            )
        if len(set(self.labels)) != len(self.labels):
            raise PmfError("duplicate labels")
        if t.size > CELL_CAP:
            raise PmfError(f"{t.size} cells exceed the {CELL_CAP} cap")
        if np.any(t < 0):
            raise PmfError("negative probability entries")
        if abs(float(t.sum()) - 1.0) > PROB_TOL:
            raise PmfError(f"probabilities sum to {t.sum()!r}, not 1")
        object.__setattr__(self, "table", t)
        object.__setattr__(
            self, "_axis", {lab: i for i, lab in enumerate(self.labels)}
        )

    @property
    def sizes(self) -> tuple[int, ...]:
        return self.table.shape

    def axes(self, labels: Iterable[str]) -> tuple[int, ...]:
        try:
            return tuple(self._axis[lab] for lab in labels)
        except KeyError as exc:
            raise PmfError(f"label {exc.args[0]!r} not in pmf") from None

    def marginal(self, labels: Sequence[str], keepdims: bool = False) -> np.ndarray:
        keep = set(self.axes(labels))
        drop = tuple(i for i in range(self.table.ndim) if i not in keep)
        return self.table.sum(axis=drop, keepdims=keepdims) if drop else (
            self.table if not keepdims else self.table)


def mi_discrete(pmf: JointPmf, a, b, c=()) -> float:
    """I(a; b | c) in bits by direct summation; 0 log 0 terms drop."""
    a, b, c = tuple(a), tuple(b), tuple(c)
    groups = a + b + c
    if len(set(groups)) != len(groups):
        raise PmfError(f"label groups overlap: a={a} b={b} c={c}")
    pmf.axes(groups)

    drop = tuple(
        i for i, lab in enumerate(pmf.labels) if lab not in set(groups)
    )
    q = pmf.table.sum(axis=drop) if drop else pmf.table
    kept = [lab for lab in pmf.labels if lab in set(groups)]
    pos = {lab: i for i, lab in enumerate(kept)}
    ax_a = tuple(pos[l] for l in a)
    ax_b = tuple(pos[l] for l in b)

    p_ac = q.sum(axis=ax_b, keepdims=True)
    p_bc = q.sum(axis=ax_a, keepdims=True)
    p_c = q.sum(axis=ax_a + ax_b, keepdims=True)

    mask = q > 0
    ratio = np.zeros_like(q)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio[mask] = (q * np.broadcast_to(p_c, q.shape))[mask] / (
            np.broadcast_to(p_ac, q.shape) * np.broadcast_to(p_bc, q.shape)
        )[mask]
    total = float(np.sum(q[mask] * np.log(ratio[mask])))
    return total / LN2


@dataclass(frozen=True)
class FactorizationSpec:
    """Ordered chain of conditional factors (targets | givens)."""

    factors: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]

    def __post_init__(self):
        targets = [lab for t, _ in self.factors for lab in t]
        if len(set(targets)) != len(targets):
            raise PmfError("a label appears as a target more than once")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for t, _ in self.factors for lab in t)


def _f(targets: str, givens: str = "") -> tuple[tuple[str, ...], tuple[str, ...]]:
    t = tuple(targets.split(","))
    g = tuple(givens.split(",")) if givens else ()
    return (t, g)


_CHANNEL = _f("Y1,Y2,Y3", "X1,X2,X3")

_FACTORIZATIONS = {
    Scheme.CUMS1: FactorizationSpec((
        _f("Q"), _f("W0,W1,X1", "Q"),
        _f("U0", "W0,W1,Q"), _f("U2", "W0,W1,Q"),
        _f("X2", "U0,U2,W0,W1,Q"),
        _f("V0", "U0,U2,W0,W1,Q"), _f("V3", "U0,U2,W0,W1,Q"),
        _f("X3", "V0,V3,U0,U2,W0,W1,Q"),
        _CHANNEL,
    )),
    Scheme.CUMS2: FactorizationSpec((
        _f("Q"), _f("W,X1", "Q"),
        _f("U1", "W,Q"), _f("U2", "W,Q"),
        _f("X2", "U1,U2,W,Q"),
        _f("V1", "U1,U2,W,Q"), _f("V3", "U1,U2,W,Q"),
        _f("X3", "V1,V3,U1,U2,W,Q"),
        _CHANNEL,
    )),
    Scheme.PRMS1: FactorizationSpec((
        _f("Q"), _f("W0,W1,X1", "Q"),
        _f("U0", "W0,W1,Q"), _f("U2", "W0,W1,Q"),
        _f("X2", "U0,U2,W0,W1,Q"),
        _f("V0", "W0,W1,Q"), _f("V3", "W0,W1,Q"),
        _f("X3", "V0,V3,W0,W1,Q"),
        _CHANNEL,
    )),
    Scheme.PRMS2: FactorizationSpec((
        _f("Q"), _f("W,X1", "Q"),
        _f("U1", "W,Q"), _f("U2", "W,Q"),
        _f("X2", "U1,U2,W,Q"),
        _f("V1", "W,Q"), _f("V3", "W,Q"),
        _f("X3", "V1,V3,W,Q"),
        _CHANNEL,
    )),
    Scheme.COMS: FactorizationSpec((
        _f("Q"), _f("W,X1", "Q"), _f("U,X2", "Q"),
        _f("V0", "W,U,Q"), _f("V3", "W,U,Q"),
        _f("X3", "V0,V3,U,W,Q"),
        _CHANNEL,
    )),
}


def scheme_factorization(scheme: Scheme) -> FactorizationSpec:
    return _FACTORIZATIONS[scheme]


def check_factorization(
    pmf: JointPmf, spec: FactorizationSpec
) -> tuple[bool, float]:
    """Rebuild the joint from the chain of empirical conditionals and
    report the largest absolute deviation on supported cells.

    Conditionals at zero-probability conditioning cells default to uniform
    and those cells are excluded from the deviation.
    """
    if set(spec.labels) != set(pmf.labels):
        raise PmfError(
            f"factorization labels {sorted(spec.labels)} do not match pmf "
            f"labels {sorted(pmf.labels)}"
        )
    full = pmf.table
    rebuilt = np.ones_like(full)
    supported = np.ones(full.shape, dtype=bool)
    for targets, givens in spec.factors:
        joint = pmf.marginal(targets + givens, keepdims=True)
        given = pmf.marginal(givens, keepdims=True) if givens else np.array(1.0)
        t_cells = int(np.prod([pmf.sizes[pmf.axes((lab,))[0]] for lab in targets]))
        safe = np.where(given > 0, given, 1.0)
        cond = np.where(given > 0, joint / safe, 1.0 / t_cells)
        rebuilt = rebuilt * cond
        supported &= np.broadcast_to(given > 0, full.shape)
    deviation = float(np.max(np.abs(rebuilt - full)[supported])) if np.any(
        supported) else 0.0
    return deviation <= FACTORIZATION_TOL, deviation


def evaluate_scheme_discrete(pmf: JointPmf, scheme: Scheme) -> NumericSystem:
    """Evaluate a scheme's constraint system exactly against a pmf.

    Every term is conditioned on the explicit Q alphabet.  All five
    schemes are supported; this is the only evaluation route for the
    all-splitting schemes.
    """
    system: ConstraintSystem = build_system(scheme)
    needed = set(system.labels) | {"Q"}
    missing = sorted(needed - set(pmf.labels))
    if missing:
        raise PmfError(f"pmf lacks labels {missing} needed by {scheme.value}")
    rhs = np.empty(len(system.inequalities))
    for i, ineq in enumerate(system.inequalities):
        total = 0.0
        for term in ineq.terms:
            value = mi_discrete(pmf, term.a, term.b, term.c + ("Q",))
            if -1e-9 < value < 0.0:  # roundoff below exact zero
                value = 0.0
            total += term.sign * value
        rhs[i] = total
    rhs = np.where((rhs > -1e-9) & (rhs < 0.0), 0.0, rhs)
    single = system.single_rate_rows()
    feasible = bool(np.all(np.isfinite(rhs)) and np.all(rhs[single] >= 0.0))
    return NumericSystem(
        scheme=scheme,
        rate_names=system.rate_names,
        a_matrix=system.coefficient_matrix(),
        rhs=rhs,
        feasible=feasible,
    )


def random_scheme_pmf(
    scheme: Scheme, seed: int = 0, alphabet: int = 2, q_size: int = 1,
    concentration: float = 1.0,
) -> JointPmf:
    """Random pmf drawn factor by factor along the scheme's chain, so it
    satisfies the factorization by construction."""
    spec = scheme_factorization(scheme)
    labels = spec.labels
    sizes = tuple(q_size if lab == "Q" else alphabet for lab in labels)
    rng = np.random.default_rng(seed)
    table = np.ones(sizes)
    axis = {lab: i for i, lab in enumerate(labels)}
    for targets, givens in spec.factors:
        shape = tuple(
            sizes[i] if labels[i] in set(targets) | set(givens) else 1
            for i in range(len(labels))
        )
        raw = rng.gamma(concentration, size=shape)
        t_axes = tuple(axis[lab] for lab in targets)
        norm = raw.sum(axis=t_axes, keepdims=True)
        table = table * (raw / norm)
    return JointPmf(labels=labels, table=table)


def gaussian_mi_mc(
    table: CovarianceTable,
    a, b, c=(),
    n: int = 10**6,
    seed: int = 0,
) -> tuple[float, float]:
    """Monte Carlo estimate of I(a; b | c) in bits for a Gaussian table.

    Samples the joint through its eigenfactorization and averages the
    log density ratio; returns (mean, standard error).  This is the
    independent statistical check on the log-determinant path.
    """
    a = tuple(dict.fromkeys(a))
    b = tuple(dict.fromkeys(b))
    c = tuple(dict.fromkeys(c))
    if set(a) & set(b):
        raise CovarianceError(f"sets a={a} and b={b} overlap")
    if n < 1000:
        raise CovarianceError(f"need at least 1000 samples, got {n}")
    labels = a + tuple(l for l in b if l not in a)
    labels += tuple(l for l in c if l not in labels)
    sigma = table.submatrix(labels)
    w, vecs = np.linalg.eigh(sigma)
    scale = max(float(w.max()), 1.0)
    if float(w.min()) < 1e-12 * scale:
        raise CovarianceError(
            f"degenerate covariance: min eigenvalue {w.min():.3e}"
        )
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, len(labels)))
    x = z @ (vecs * np.sqrt(w)).T

    pos = {lab: i for i, lab in enumerate(labels)}

    def loglik(group: tuple[str, ...]) -> np.ndarray:
        if not group:
            return np.zeros(n)
        idx = [pos[l] for l in group]
        sub = sigma[np.ix_(idx, idx)]
        chol = np.linalg.cholesky(sub)
        y = np.linalg.solve(chol, x[:, idx].T)
        quad = np.sum(y * y, axis=0)
        logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
        return -0.5 * (quad + logdet + len(idx) * math.log(2.0 * math.pi))

    ac = a + tuple(l for l in c if l not in a)
    bc = b + tuple(l for l in c if l not in b)
    abc = labels
    vals = (loglik(abc) + loglik(c) - loglik(ac) - loglik(bc)) / LN2
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(n))
    return est, se


# -- plain-text pmf format -----------------------------------------------
#
#   # comment lines allowed
#   labels: W:2 U1:2 Y2:3
#   0 0 0 0.125
#   ...
# Omitted index tuples are zero probability.


def save_pmf(pmf: JointPmf, stream: TextIO) -> None:
    head = " ".join(f"{lab}:{size}" for lab, size in zip(pmf.labels, pmf.sizes))
    stream.write(f"labels: {head}\n")
    for idx in np.ndindex(*pmf.sizes):
        p = float(pmf.table[idx])
        if p != 0.0:
            stream.write(" ".join(str(i) for i in idx) + f" {p!r}\n")


def load_pmf(stream: TextIO) -> JointPmf:
    labels: list[str] = []
    sizes: list[int] = []
    table = None
    for raw in stream:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("labels:"):
            if table is not None:
                raise PmfError("duplicate labels header")
            for part in line[len("labels:"):].split():
                name, _, size = part.partition(":")
                if not size.isdigit() or int(size) < 1:
                    raise PmfError(f"bad alphabet size in {part!r}")
                labels.append(name)
                sizes.append(int(size))
            table = np.zeros(tuple(sizes))
            continue
        if table is None:
            raise PmfError("probability row before the labels header")
        parts = line.split()
        if len(parts) != len(labels) + 1:
            raise PmfError(f"expected {len(labels)} indices + probability: {line!r}")
        idx = tuple(int(p) for p in parts[:-1])
        for i, size in zip(idx, sizes):
            if not 0 <= i < size:
                raise PmfError(f"index {i} out of range in {line!r}")
        table[idx] = float(parts[-1])
    if table is None:
        raise PmfError("missing labels header")
    return JointPmf(labels=tuple(labels), table=table)
