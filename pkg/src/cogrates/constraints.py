"""Symbolic achievable-rate inequality systems and their numeric evaluation.

Each scheme's region is a set of linear inequalities over split rates whose
right-hand sides are signed sums of conditional mutual informations between
auxiliary codeword variables and channel outputs.  The systems are stored
symbolically (term lists) so they can be dumped for golden-file comparison,
evaluated against a Gaussian covariance table, or evaluated exactly against
a discrete joint pmf.

All terms are conditioned on the time-share variable Q.  Q is degenerate in
the Gaussian evaluation (a constant, dropped); the discrete oracle keeps it
as an explicit alphabet.  A few lines carry transcription notes where the
printed notation was irregular; the normalized reading is used and the note
is preserved in the dump.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import numpy as np

from . import gaussinfo
from .gaussinfo import CovarianceTable, conditional_mi, entropies_batch, scheme_labels
from .model import ConfigError, Scheme

NEG_INF = float("-inf")


@dataclass(frozen=True)
class MiTerm:
    """One signed conditional mutual information I(a; b | c, Q)."""

    sign: int
    a: tuple[str, ...]
    b: tuple[str, ...]
    c: tuple[str, ...] = ()

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if not self.a or not self.b:
            raise ValueError("a and b must be nonempty")
        if set(self.a) & set(self.b):
            raise ValueError(f"a={self.a} and b={self.b} overlap")

    def text(self) -> str:
        cond = ",".join(self.c + ("Q",))
        return f"I({','.join(self.a)};{','.join(self.b)}|{cond})"


@dataclass(frozen=True)
class RateInequality:
    rates: tuple[str, ...]
    terms: tuple[MiTerm, ...]
    note: str | None = None

    def __post_init__(self):
        if not self.rates or not self.terms:
            raise ValueError("inequality needs at least one rate and one term")

    def text(self) -> str:
        lhs = " + ".join(self.rates)
        parts = []
        for i, t in enumerate(self.terms):
            if i == 0:
                parts.append(t.text() if t.sign > 0 else f"- {t.text()}")
            else:
                parts.append(("+ " if t.sign > 0 else "- ") + t.text())
        line = f"{lhs} <= " + " ".join(parts)
        if self.note:
            line += f"  # note: {self.note}"
        return line


@dataclass(frozen=True)
class ConstraintSystem:
    scheme: Scheme
    rate_names: tuple[str, ...]
    labels: tuple[str, ...]
    inequalities: tuple[RateInequality, ...]

    def coefficient_matrix(self) -> np.ndarray:
        a = np.zeros((len(self.inequalities), len(self.rate_names)))
        col = {name: j for j, name in enumerate(self.rate_names)}
        for i, ineq in enumerate(self.inequalities):
            for r in ineq.rates:
                a[i, col[r]] = 1.0
        return a

    def single_rate_rows(self) -> np.ndarray:
        return np.array([len(q.rates) == 1 for q in self.inequalities])

    def dump(self) -> str:
        head = (
            f"# {self.scheme.value}: {len(self.inequalities)} inequalities "
            f"over ({', '.join(self.rate_names)})\n"
        )
        return head + "\n".join(q.text() for q in self.inequalities) + "\n"


def _t(a, b, c=()) -> MiTerm:
    return MiTerm(1, tuple(a.split(",")), tuple(b.split(",")), tuple(c))


def _tm(a, b, c=()) -> MiTerm:
    return MiTerm(-1, tuple(a.split(",")), tuple(b.split(",")), tuple(c))


def _q(rates: str, *terms: MiTerm, note: str | None = None) -> RateInequality:
    return RateInequality(tuple(rates.split("+")), tuple(terms), note)


_NOTE_UNCONDITIONED = "printed without conditioning; read as conditioned on Q"
_NOTE_COMMA_WW = "printed as joint-style I(W0,W1|Q); read as I(W0;W1|Q)"
_NOTE_COMMA_WU = (
    "printed as joint-style I(W0,U0|Q) with a doubled minus ahead of the "
    "penalties; read as I(W0;U0|Q) with single minuses"
)
_NOTE_RATE_TYPO = "rate symbol printed with a dropped leading R; read as r20"


def _cums2_inequalities() -> tuple[RateInequality, ...]:
    return (
        _q("r11", _t("W", "U1,V1,Y1")),
        _q("r11+r21", _t("W,U1", "V1,Y1")),
        _q("r11+r31", _t("W,V1", "U1,Y1"), _t("W", "V1"), _tm("W,U1,U2", "V1")),
        _q("r11+r21+r31",
           _t("W,U1,V1", "Y1"), _t("W,U1", "V1"), _tm("W,U1,U2", "V1")),
        _q("r21", _t("U1", "U2,Y2"), _tm("W", "U1")),
        _q("r22", _t("U2", "U1,Y2"), _tm("W", "U2")),
        _q("r21+r22",
           _t("U1,U2", "Y2"), _t("U1", "U2"), _tm("W", "U1"), _tm("W", "U2")),
        _q("r31", _t("V1", "V3,Y3"), _tm("W,U1,U2", "V1")),
        _q("r33", _t("V3", "V1,Y3"), _tm("W,U1,U2", "V3")),
        _q("r31+r33",
           _t("V1,V3", "Y3"), _t("V1", "V3"),
           _tm("W,U1,U2", "V3"), _tm("W,U1,U2", "V1")),
    )


def _prms2_inequalities() -> tuple[RateInequality, ...]:
    return (
        _q("r11", _t("W", "U1,V1,Y1")),
        _q("r11+r21", _t("W,U1", "V1,Y1")),
        _q("r11+r31", _t("W,V1", "U1,Y1")),
        _q("r11+r21+r31",
           _t("W,U1,V1", "Y1"), _t("W,U1", "V1"), _tm("W", "V1")),
        _q("r21", _t("U1", "U2,Y2"), _tm("W", "U1")),
        _q("r22", _t("U2", "U1,Y2"), _tm("W", "U2")),
        _q("r21+r22",
           _t("U1,U2", "Y2"), _t("U1", "U2"), _tm("W", "U1"), _tm("W", "U2")),
        _q("r31", _t("V1", "V3,Y3"), _tm("W", "V1")),
        _q("r33", _t("V3", "V1,Y3"), _tm("W", "V3")),
        _q("r31+r33",
           _t("V1,V3", "Y3"), _t("V1", "V3"), _tm("W", "V3"), _tm("W", "V1")),
    )


def _coms_inequalities() -> tuple[RateInequality, ...]:
    return (
        _q("r1", _t("W", "V0,Y1")),
        _q("r1+r31", _t("W,V0", "Y1"), _t("W", "V0"), _tm("W,U", "V0")),
        _q("r2", _t("U", "V0,Y2")),
        _q("r2+r31", _t("U,V0", "Y2"), _t("U", "V0"), _tm("W,U", "V0")),
        _q("r31", _t("V0", "V3,Y3"), _tm("W,U", "V0")),
        _q("r33", _t("V3", "V0,Y3"), _tm("W,U", "V3")),
        _q("r31+r33",
           _t("V0,V3", "Y3"), _t("V0", "V3"), _tm("W,U", "V0"), _tm("W,U", "V3")),
    )


def _scheme1_inequalities(v_penalty: str, third_note: str | None
                          ) -> tuple[RateInequality, ...]:
    """The 36-inequality all-splitting system.

    ``v_penalty`` is the conditioning set of the binning penalty paid by
    sender 3's codewords: the cumulative scheme bins against
    (W0, W1, U0, U2), the primary-only scheme against (W0, W1) alone.
    That substitution is the only structural difference between the two
    printed lists; the notation quirks flagged below differ per list.
    """
    pv = v_penalty
    return (
        # decoded at receiver 1
        _q("r10", _t("W0", "W1,U0,V0,Y1")),
        _q("r11", _t("W1", "W0,U0,V0,Y1")),
        _q("r10+r11", _t("W0,W1", "U0,V0,Y1"), _t("W0", "W1"), note=third_note),
        _q("r10+r20",
           _t("W0,U0", "W1,V0,Y1"), _t("W0", "U0"), _tm("W0,W1", "U0")),
        _q("r10+r30",
           _t("W0,V0", "W1,U0,Y1"), _t("W0", "V0"), _tm(pv, "V0")),
        _q("r11+r20",
           _t("W1,U0", "W0,V0,Y1"), _t("W1", "U0"), _tm("W0,W1", "U0")),
        _q("r11+r30",
           _t("W1,V0", "W0,U0,Y1"), _t("W1", "V0"), _tm(pv, "V0")),
        _q("r10+r11+r20",
           _t("W0,W1,U0", "V0,Y1"), _t("W0,W1", "U0"), _t("W0", "W1"),
           _tm("W0,W1", "U0")),
        _q("r10+r11+r30",
           _t("W0,W1,V0", "U0,Y1"), _t("W0,W1", "V0"), _t("W0", "W1"),
           _tm(pv, "V0")),
        _q("r10+r20+r30",
           _t("W0,U0,V0", "W1,Y1"), _t("W0,U0", "V0"), _t("W0", "U0"),
           _tm("W0,W1", "U0"), _tm(pv, "V0")),
        _q("r11+r20+r30",
           _t("W1,U0,V0", "W0,Y1"), _t("W1,U0", "V0"), _t("W1", "U0"),
           _tm("W0,W1", "U0"), _tm(pv, "V0")),
        _q("r10+r11+r20+r30",
           _t("W0,W1,U0,V0", "Y1"), _t("W0,W1,U0", "V0"), _t("W0,W1", "U0"),
           _t("W0", "W1"), _tm("W0,W1", "U0"), _tm(pv, "V0"),
           note=_NOTE_COMMA_WW),
        # decoded at receiver 2
        _q("r20", _t("U0", "W0,U2,V0,Y2"), _tm("W0,W1", "U0")),
        _q("r22", _t("U2", "W0,U0,V0,Y2"), _tm("W0,W1", "U2")),
        _q("r20+r22",
           _t("U0,U2", "W0,V0,Y2"), _t("U0", "U2"),
           _tm("W0,W1", "U0"), _tm("W0,W1", "U2")),
        _q("r10+r20",
           _t("W0,U0", "U2,V0,Y2"), _t("W0", "U0"), _tm("W0,W1", "U0")),
        _q("r10+r22",
           _t("W0,U2", "U0,V0,Y2"), _t("W0", "U2"), _tm("W0,W1", "U2")),
        _q("r20+r30",
           _t("U0,V0", "W0,U2,Y2"), _t("U0", "V0"),
           _tm("W0,W1", "U0"), _tm(pv, "V0")),
        _q("r22+r30",
           _t("U2,V0", "W0,U0,Y2"), _t("U2", "V0"),
           _tm("W0,W1", "U2"), _tm(pv, "V0")),
        _q("r10+r20+r22",
           _t("W0,U0,U2", "V0,Y2"), _t("W0,U0", "U2"), _t("W0", "U0"),
           _tm("W0,W1", "U0"), _tm("W0,W1", "U2")),
        _q("r10+r20+r30",
           _t("W0,U0,V0", "U2,Y2"), _t("W0,U0", "V0"), _t("W0", "U0"),
           _tm("W0,W1", "U0"), _tm(pv, "V0")),
        _q("r10+r22+r30",
           _t("W0,U2,V0", "U0,Y2"), _t("W0,U2", "V0"), _t("W0", "U2"),
           _tm("W0,W1", "U2"), _tm(pv, "V0")),
        _q("r20+r22+r30",
           _t("U0,U2,V0", "W0,Y2"), _t("U0,U2", "V0"), _t("U0", "U2"),
           _tm("W0,W1", "U0"), _tm("W0,W1", "U2"), _tm(pv, "V0")),
        _q("r10+r20+r22+r30",
           _t("W0,U0,U2,V0", "Y2"), _t("W0,U0,U2", "V0"), _t("W0,U0", "U2"),
           _t("W0", "U0"), _tm("W0,W1", "U0"), _tm("W0,W1", "U2"),
           _tm(pv, "V0"), note=_NOTE_COMMA_WU),
        # decoded at receiver 3
        _q("r30", _t("V0", "W0,U0,V3,Y3"), _tm(pv, "V0")),
        _q("r33", _t("V3", "W0,U0,V0,Y3"), _tm(pv, "V3")),
        _q("r30+r33",
           _t("V0,V3", "W0,U0,Y3"), _t("V0", "V3"),
           _tm(pv, "V0"), _tm(pv, "V3")),
        _q("r10+r30",
           _t("W0,V0", "U0,V3,Y3"), _t("W0", "V0"), _tm(pv, "V0")),
        _q("r10+r33",
           _t("W0,V3", "U0,V0,Y3"), _t("W0", "V3"), _tm(pv, "V3")),
        _q("r20+r30",
           _t("U0,V0", "W0,V3,Y3"), _t("U0", "V0"),
           _tm("W0,W1", "U0"), _tm(pv, "V0")),
        _q("r20+r33",
           _t("U0,V3", "W0,V0,Y3"), _t("U0", "V3"),
           _tm("W0,W1", "U0"), _tm(pv, "V3"),
           note=_NOTE_RATE_TYPO if pv != "W0,W1" else None),
        _q("r10+r20+r30",
           _t("W0,U0,V0", "V3,Y3"), _t("W0,U0", "V0"), _t("W0", "U0"),
           _tm("W0,W1", "U0"), _tm(pv, "V0")),
        _q("r10+r20+r33",
           _t("W0,U0,V3", "V0,Y3"), _t("W0,U0", "V3"), _t("W0", "U0"),
           _tm("W0,W1", "U0"), _tm(pv, "V3")),
        _q("r10+r30+r33",
           _t("W0,V0,V3", "U0,Y3"), _t("W0,V0", "V3"), _t("W0", "V0"),
           _tm(pv, "V0"), _tm(pv, "V3")),
        _q("r20+r30+r33",
           _t("U0,V0,V3", "W0,Y3"), _t("U0,V0", "V3"), _t("U0", "V0"),
           _tm("W0,W1", "U0"), _tm(pv, "V0"), _tm(pv, "V3")),
        _q("r10+r20+r30+r33",
           _t("W0,U0,V0,V3", "Y3"), _t("W0,U0,V0", "V3"), _t("W0,U0", "V0"),
           _t("W0", "U0"), _tm("W0,W1", "U0"), _tm(pv, "V0"), _tm(pv, "V3")),
    )


_SYSTEM_LABELS = {
    Scheme.CUMS2: ("W", "U1", "U2", "V1", "V3", "Y1", "Y2", "Y3"),
    Scheme.PRMS2: ("W", "U1", "U2", "V1", "V3", "Y1", "Y2", "Y3"),
    Scheme.COMS: ("W", "U", "V0", "V3", "Y1", "Y2", "Y3"),
    Scheme.CUMS1: ("W0", "W1", "U0", "U2", "V0", "V3", "Y1", "Y2", "Y3"),
    Scheme.PRMS1: ("W0", "W1", "U0", "U2", "V0", "V3", "Y1", "Y2", "Y3"),
}


@lru_cache(maxsize=None)
def build_system(scheme: Scheme) -> ConstraintSystem:
    """Full symbolic inequality system for a scheme."""
    if scheme is Scheme.CUMS2:
        ineqs = _cums2_inequalities()
    elif scheme is Scheme.PRMS2:
        ineqs = _prms2_inequalities()
    elif scheme is Scheme.COMS:
        ineqs = _coms_inequalities()
    elif scheme is Scheme.CUMS1:
        ineqs = _scheme1_inequalities("W0,W1,U0,U2", _NOTE_UNCONDITIONED)
    elif scheme is Scheme.PRMS1:
        ineqs = _scheme1_inequalities("W0,W1", None)
    else:  # pragma: no cover
        raise ConfigError(f"unknown scheme {scheme!r}")
    return ConstraintSystem(
        scheme=scheme,
        rate_names=scheme.split_rate_names,
        labels=_SYSTEM_LABELS[scheme],
        inequalities=ineqs,
    )


@dataclass(frozen=True)
class NumericSystem:
    """Numeric image of a constraint system: A x <= rhs with x >= 0."""

    scheme: Scheme
    rate_names: tuple[str, ...]
    a_matrix: np.ndarray
    rhs: np.ndarray
    feasible: bool


def _check_labels(system: ConstraintSystem, available) -> None:
    missing = [lab for lab in system.labels if lab not in available]
    if missing:
        raise ConfigError(
            f"table labels {tuple(available)} do not cover system labels "
            f"{missing} for scheme {system.scheme.value}"
        )


def _clamp_dust(rhs: np.ndarray) -> np.ndarray:
    # cancelling information terms can leave sub-1e-9 negative dust on a
    # bound whose exact value is zero; genuine negatives stay negative
    with np.errstate(invalid="ignore"):
        return np.where((rhs > -gaussinfo.MI_CLAMP) & (rhs < 0.0), 0.0, rhs)


def _feasible(system: ConstraintSystem, rhs: np.ndarray) -> bool:
    if not np.all(np.isfinite(rhs)):
        return False
    single = system.single_rate_rows()
    return bool(np.all(rhs[single] >= 0.0))


def evaluate_system(system: ConstraintSystem, table: CovarianceTable) -> NumericSystem:
    """Evaluate every right-hand side against a Gaussian covariance table.

    The time-share variable is degenerate, so conditioning on it drops out.
    The system is flagged infeasible when any right-hand side fails to be
    finite or any single-rate bound is negative: binning penalties must be
    payable with nonnegative bin rates, so such draws prove nothing and are
    discarded rather than clamped.
    """
    if not system.scheme.gaussian_capable:
        raise ConfigError(
            f"scheme {system.scheme.value} is evaluated only against discrete "
            "pmf tables; no Gaussian parameterization exists"
        )
    _check_labels(system, table.labels)
    rhs = np.empty(len(system.inequalities))
    for i, ineq in enumerate(system.inequalities):
        total = 0.0
        for term in ineq.terms:
            total += term.sign * conditional_mi(table, term.a, term.b, term.c)
        rhs[i] = total
    rhs = _clamp_dust(rhs)
    return NumericSystem(
        scheme=system.scheme,
        rate_names=system.rate_names,
        a_matrix=system.coefficient_matrix(),
        rhs=rhs,
        feasible=_feasible(system, rhs),
    )


class BatchEvaluator:
    """Vectorized right-hand-side evaluation over stacked covariance tables.

    Matches the scalar path: the same submatrix entropies are combined in
    the same order per term, with the same near-zero clamping.  Tables with
    a zero-variance diagonal entry (possible only at degenerate configs)
    fall back to the scalar path so the constant-variable convention holds.
    """

    def __init__(self, scheme: Scheme):
        self.system = build_system(scheme)
        self.labels = scheme_labels(scheme)
        _check_labels(self.system, self.labels)
        index = {lab: i for i, lab in enumerate(self.labels)}

        registry: dict[tuple[int, ...], int] = {}

        def register(*groups) -> int:
            # index-sorted, mirroring the scalar path's canonical ordering
            key = tuple(sorted({index[l] for g in groups for l in g}))
            if key not in registry:
                registry[key] = len(registry)
            return registry[key]

        # per term: (sign, id(a+c), id(b+c), id(a+b+c), id(c)), grouped per row
        self.rows: list[list[tuple[int, int, int, int, int]]] = []
        for ineq in self.system.inequalities:
            row = []
            for t in ineq.terms:
                a, b, c = t.a, t.b, t.c
                row.append(
                    (t.sign, register(a, c), register(b, c),
                     register(a, b, c), register(c))
                )
            self.rows.append(row)
        self.subsets = list(registry.keys())
        self.a_matrix = self.system.coefficient_matrix()
        self.single = self.system.single_rate_rows()

    def evaluate(self, tables: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return (rhs (n, m), feasible (n,)) for stacked tables (n, k, k)."""
        n = tables.shape[0]
        m = len(self.rows)
        rhs = np.zeros((n, m))
        diag = np.einsum("nii->ni", tables)
        regular = np.all(diag > gaussinfo.VAR_FLOOR, axis=1)

        if np.any(regular):
            sub = tables[regular]
            ent = np.stack([entropies_batch(sub, s) for s in self.subsets], axis=1)
            vals = np.zeros((sub.shape[0], m))
            with np.errstate(invalid="ignore"):
                for i, row in enumerate(self.rows):
                    acc = np.zeros(sub.shape[0])
                    for sign, i_ac, i_bc, i_abc, i_c in row:
                        term = ent[:, i_ac] + ent[:, i_bc] - ent[:, i_abc] - ent[:, i_c]
                        term = np.where(
                            (term > -gaussinfo.MI_CLAMP) & (term < 0.0), 0.0, term
                        )
                        acc = acc + sign * term
                    vals[:, i] = acc
            rhs[regular] = vals

        for j in np.nonzero(~regular)[0]:
            table = CovarianceTable(labels=self.labels, matrix=tables[j])
            rhs[j] = evaluate_system(self.system, table).rhs

        rhs = _clamp_dust(rhs)
        with np.errstate(invalid="ignore"):
            feasible = np.all(np.isfinite(rhs), axis=1) & np.all(
                rhs[:, self.single] >= 0.0, axis=1
            )
        return rhs, feasible
