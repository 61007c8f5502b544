"""Joint Gaussian second moments and log-determinant information measures.

A scheme's auxiliary and output variables are linear maps of independent
zero-mean Gaussian latents (message carriers plus receiver noise), so the
full covariance is ``L D L^T`` for a coefficient matrix ``L`` and latent
variances ``D``.  Differential entropies are ``0.5 log2((2 pi e)^k det S)``
over submatrices and every mutual information reduces to four of them.

Rates are in bits per real channel use throughout; the time-share variable
is degenerate, so conditioning on it is a no-op here and is kept explicit
only in the discrete oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import ChannelConfig, ConfigError, GpParams, Scheme

LN2 = math.log(2.0)
HALF_LOG2_TWO_PI_E = 0.5 * math.log2(2.0 * math.pi * math.e)

DET_FLOOR = 1e-300
PSD_TOL = 1e-9          # relative to trace
SYM_TOL = 1e-12
MI_CLAMP = 1e-9
VAR_FLOOR = 1e-300      # below this a variable is treated as a constant

CUMS_LABELS = ("W", "U1", "U2", "V1", "V3", "Y1", "Y2", "Y3")
COMS_LABELS = ("W", "U", "V0", "V3", "Y1", "Y2", "Y3")

NEG_INF = float("-inf")


class CovarianceError(ValueError):
    """A covariance table or a requested submatrix is invalid."""


def scheme_labels(scheme: Scheme) -> tuple[str, ...]:
    """Gaussian variable labels available for a scheme's rate system."""
    if scheme in (Scheme.CUMS2, Scheme.PRMS2):
        return CUMS_LABELS
    if scheme is Scheme.COMS:
        return COMS_LABELS
    raise ConfigError(
        f"scheme {scheme.value} has no Gaussian parameterization; "
        "use the discrete oracle"
    )


@dataclass(frozen=True)
class CovarianceTable:
    """Symmetric second-moment matrix over named zero-mean variables."""

    labels: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        k = len(self.labels)
        if m.shape != (k, k):
            raise CovarianceError(f"matrix shape {m.shape} does not match {k} labels")
        scale = max(1.0, float(np.abs(m).max()))
        if not np.all(np.abs(m - m.T) <= SYM_TOL * scale):
            raise CovarianceError("matrix is not symmetric")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(self.labels)})

    def indices(self, labels: Iterable[str]) -> tuple[int, ...]:
        try:
            return tuple(self._index[lab] for lab in labels)
        except KeyError as exc:
            raise CovarianceError(f"label {exc.args[0]!r} not in table") from None

    def submatrix(self, labels: Sequence[str]) -> np.ndarray:
        idx = self.indices(labels)
        return self.matrix[np.ix_(idx, idx)]

    def variance(self, label: str) -> float:
        i = self.indices((label,))[0]
        return float(self.matrix[i, i])


def _latent_map(cfg: ChannelConfig, params: GpParams, scheme: Scheme):
    """Coefficient matrix and latent variances for a scheme.

    Latent order for the secondary-splitting schemes is
    (message carriers of senders 1..3 split in two where applicable,
    then the three receiver noises).
    """
    g = cfg.gains
    if scheme in (Scheme.CUMS2, Scheme.PRMS2):
        # latents: (W~, U1~, U2~, V1~, V3~, Z1, Z2, Z3)
        d = np.array([
            cfg.p1,
            params.tau * cfg.p2, (1.0 - params.tau) * cfg.p2,
            params.kappa * cfg.p3, (1.0 - params.kappa) * cfg.p3,
            cfg.q1, cfg.q2, cfg.q3,
        ])
        b1, b2 = params.beta1, params.beta2
        if scheme is Scheme.PRMS2:
            # sender 3 knows only message 1: no coupling against X2
            b1 = b2 = 0.0
        a1, a2, a3, a4 = params.alpha1, params.alpha2, params.alpha3, params.alpha4
        rows = {
            "W":  [1, 0, 0, 0, 0, 0, 0, 0],
            "U1": [a1, 1, 0, 0, 0, 0, 0, 0],
            "U2": [a2, 0, 1, 0, 0, 0, 0, 0],
            "V1": [a3, b1, b1, 1, 0, 0, 0, 0],
            "V3": [a4, b2, b2, 0, 1, 0, 0, 0],
            "Y1": [1, g.a12, g.a12, g.a13, g.a13, 1, 0, 0],
            "Y2": [g.a21, 1, 1, g.a23, g.a23, 0, 1, 0],
            "Y3": [g.a31, g.a32, g.a32, 1, 1, 0, 0, 1],
        }
        labels = CUMS_LABELS
    elif scheme is Scheme.COMS:
        # latents: (W~, U~, V0~, V3~, Z1, Z2, Z3); senders 1 and 2 do not
        # split, so their signals carry no binning coefficients
        d = np.array([
            cfg.p1, cfg.p2,
            params.kappa * cfg.p3, (1.0 - params.kappa) * cfg.p3,
            cfg.q1, cfg.q2, cfg.q3,
        ])
        a3, a4, b1, b2 = params.alpha3, params.alpha4, params.beta1, params.beta2
        rows = {
            "W":  [1, 0, 0, 0, 0, 0, 0],
            "U":  [0, 1, 0, 0, 0, 0, 0],
            "V0": [a3, b1, 1, 0, 0, 0, 0],
            "V3": [a4, b2, 0, 1, 0, 0, 0],
            "Y1": [1, g.a12, g.a13, g.a13, 1, 0, 0],
            "Y2": [g.a21, 1, g.a23, g.a23, 0, 1, 0],
            "Y3": [g.a31, g.a32, 1, 1, 0, 0, 1],
        }
        labels = COMS_LABELS
    else:
        raise ConfigError(
            f"scheme {scheme.value} has no Gaussian parameterization; "
            "use the discrete oracle"
        )
    load = np.array([rows[lab] for lab in labels], dtype=float)
    return labels, load, d


def assemble_covariance(
    cfg: ChannelConfig, params: GpParams, scheme: Scheme
) -> CovarianceTable:
    """Exact second moments implied by the scheme's generative equations."""
    labels, load, d = _latent_map(cfg, params, scheme)
    m = (load * d) @ load.T
    m = 0.5 * (m + m.T)
    return CovarianceTable(labels=labels, matrix=m)


def _entropy_from_submatrix(sub: np.ndarray) -> float:
    k = sub.shape[0]
    if k == 0:
        return 0.0
    if k == 1:
        v = float(sub[0, 0])
        if v <= DET_FLOOR:
            return NEG_INF
        return HALF_LOG2_TWO_PI_E + 0.5 * math.log2(v)
    sign, logdet = np.linalg.slogdet(sub)
    if sign <= 0 or logdet <= math.log(DET_FLOOR):
        return NEG_INF
    return HALF_LOG2_TWO_PI_E * k + 0.5 * logdet / LN2


def differential_entropy(table: CovarianceTable, labels: Sequence[str]) -> float:
    """Entropy of the named variables in bits; -inf once the submatrix is
    numerically singular (determinant at or below the floor)."""
    labels = tuple(dict.fromkeys(labels))
    sub = table.submatrix(labels)
    if len(labels) > 1:
        trace = float(np.trace(sub))
        min_eig = float(np.linalg.eigvalsh(sub)[0])
        if min_eig < -PSD_TOL * max(trace, 1.0):
            raise CovarianceError(
                f"submatrix for {labels} is not positive semidefinite "
                f"(min eigenvalue {min_eig:.3e})"
            )
    return _entropy_from_submatrix(sub)


def conditional_mi(
    table: CovarianceTable,
    a: Sequence[str],
    b: Sequence[str],
    c: Sequence[str] = (),
) -> float:
    """I(a; b | c) in bits via four entropies.

    Variables with zero variance are constants and are dropped, so
    degenerate channels yield zero information rather than NaN.  If any
    needed submatrix is singular the value is the -inf sentinel, which
    upstream evaluation treats as an infeasible parameterization.
    Results within -1e-9 of zero clamp to zero.
    """
    a = tuple(dict.fromkeys(a))
    b = tuple(dict.fromkeys(b))
    c = tuple(dict.fromkeys(c))
    if set(a) & set(b):
        raise CovarianceError(f"sets a={a} and b={b} overlap")
    table.indices(a + b + c)

    live = lambda labs: tuple(l for l in labs if table.variance(l) > VAR_FLOOR)
    a, b, c = live(a), live(b), live(c)
    if not a or not b:
        return 0.0

    # table-order canonicalization makes I(a;b|c) and I(b;a|c) hit
    # identical submatrices, so symmetry holds exactly
    canon = lambda *groups: tuple(
        l for l in table.labels if any(l in g for g in groups)
    )
    ac, bc, abc = canon(a, c), canon(b, c), canon(a, b, c)
    c = canon(c)

    h = lambda labs: _entropy_from_submatrix(table.submatrix(labs)) if labs else 0.0
    h_ac, h_bc, h_abc, h_c = h(ac), h(bc), h(abc), h(c)
    if NEG_INF in (h_ac, h_bc, h_abc, h_c):
        return NEG_INF
    value = h_ac + h_bc - h_abc - h_c
    if -MI_CLAMP < value < 0.0:
        return 0.0
    return value


# -- batched path ------------------------------------------------------------
#
# The region driver evaluates thousands of parameter draws; these helpers
# reproduce the scalar results bit for bit (same LAPACK kernels on the same
# submatrices, same summation order) while amortizing the Python overhead.


def assemble_covariance_batch(
    cfg: ChannelConfig, params_list: Sequence[GpParams], scheme: Scheme
) -> np.ndarray:
    """Stacked covariance matrices, one per parameter draw."""
    tables = [assemble_covariance(cfg, p, scheme).matrix for p in params_list]
    return np.stack(tables) if tables else np.zeros((0, 0, 0))


def entropies_batch(tables: np.ndarray, subset: tuple[int, ...]) -> np.ndarray:
    """Entropy of one index subset across stacked tables; -inf on
    singular submatrices."""
    n = tables.shape[0]
    k = len(subset)
    if k == 0:
        return np.zeros(n)
    idx = np.asarray(subset)
    sub = tables[:, idx[:, None], idx[None, :]]
    if k == 1:
        v = sub[:, 0, 0]
        out = np.where(v > DET_FLOOR, HALF_LOG2_TWO_PI_E + 0.5 * np.log2(
            np.maximum(v, DET_FLOOR)), NEG_INF)
        return out
    sign, logdet = np.linalg.slogdet(sub)
    out = HALF_LOG2_TWO_PI_E * k + 0.5 * logdet / LN2
    bad = (sign <= 0) | (logdet <= math.log(DET_FLOOR))
    out[bad] = NEG_INF
    return out
