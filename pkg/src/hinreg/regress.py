"""Least-squares fit of a target PCRW table on regressor tables, with
per-coefficient t-tests and greedy forward selection."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy import special

from .errors import EmptySubset, ShapeMismatch, Singular, Underdetermined
from .pcrw import PcrwResult

COND_LIMIT = 1e12
IMPROVE_TOL = 1e-12


def t_sf(t: float, dof: float) -> float:
    """Two-sided tail 2 P(T >= |t|) of Student's t with ``dof`` degrees of freedom."""
    if dof <= 0:
        raise ValueError("dof must be positive")
    if t == 0:
        return 1.0
    if math.isinf(t):
        return 0.0
    if math.isnan(t):
        return math.nan
    x = dof / (dof + t * t)
    return float(special.betainc(0.5 * dof, 0.5, x))


@dataclass
class DesignMatrix:
    y: np.ndarray
    X: np.ndarray
    names: list[str]
    intercept: bool
    row_index: np.ndarray  # (rows, 2): source node, target node

    @property
    def n_rows(self) -> int:
        return len(self.y)

    def subset(self, columns: Sequence[int]) -> "DesignMatrix":
        """Keep the given regressor columns (intercept kept implicitly)."""
        columns = list(columns)
        return DesignMatrix(self.y, self.X[:, columns], [self.names[c] for c in columns], self.intercept, self.row_index)

    def full_matrix(self) -> np.ndarray:
        if self.intercept:
            return np.column_stack([np.ones(self.n_rows), self.X])
        return self.X


def assemble_design(
    target: PcrwResult,
    regressors: Sequence[PcrwResult],
    source_subset=None,
    intercept: bool = True,
    drop_holes: bool = True,
) -> DesignMatrix:
    """Stack table entries source-major into a response vector and regressor columns.

    The hole source row never enters; the hole target column enters only when
    ``drop_holes`` is False.
    """
    shape = target.shape
    for r in regressors:
        if r.shape != shape:
            raise ShapeMismatch(f"regressor {r.name} has shape {r.shape}, target has {shape}")
    n_src, n_dst = shape
    if source_subset is None:
        sources = np.arange(n_src - 1)
    else:
        sources = np.asarray(source_subset, dtype=np.int64).ravel()
        if sources.size and (sources.min() < 0 or sources.max() >= n_src):
            raise ShapeMismatch("source index out of range")
        sources = sources[sources != n_src - 1]
    if sources.size == 0:
        raise EmptySubset("no real source rows selected")
    n_cols = n_dst - 1 if drop_holes else n_dst

    def stack(table: sp.csr_matrix) -> np.ndarray:
        return table[sources][:, :n_cols].toarray().ravel()

    y = stack(target.table)
    X = np.column_stack([stack(r.table) for r in regressors]) if regressors else np.empty((len(y), 0))
    row_index = np.column_stack([np.repeat(sources, n_cols), np.tile(np.arange(n_cols), len(sources))])
    return DesignMatrix(y, X, [r.name for r in regressors], intercept, row_index)


@dataclass
class FitResult:
    names: list[str]
    beta: np.ndarray          # intercept first when present
    se: np.ndarray
    p_values: np.ndarray      # regressors only
    r2: float
    rss: float
    tss: float
    dof: int
    intercept: bool
    cond: float = 1.0

    @property
    def coefficients(self) -> np.ndarray:
        return self.beta[1:] if self.intercept else self.beta

    @property
    def intercept_value(self) -> float:
        return float(self.beta[0]) if self.intercept else 0.0

    def predict(self, X: np.ndarray) -> np.ndarray:
        out = X @ self.coefficients if X.shape[1] else np.zeros(X.shape[0])
        return out + self.intercept_value

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "intercept": self.intercept_value if self.intercept else None,
            "coefficients": self.coefficients.tolist(),
            "std_errors": (self.se[1:] if self.intercept else self.se).tolist(),
            "p_values": self.p_values.tolist(),
            "r2": self.r2,
            "rss": self.rss,
            "tss": self.tss,
            "dof": self.dof,
            "cond": self.cond,
        }


def _r2(rss: float, tss: float) -> float:
    return 0.0 if tss == 0 else 1.0 - rss / tss


def ols(d: DesignMatrix) -> FitResult:
    """Ordinary least squares through a column-pivoted QR of the equilibrated design.

    Raises Singular when the Gram matrix condition estimate exceeds 1e12,
    naming the column found dependent.
    """
    A = d.full_matrix()
    n, p = A.shape
    y = d.y
    tss = float(np.sum((y - y.mean()) ** 2))
    if n <= p:
        raise Underdetermined(f"{n} rows for {p} coefficients")
    if p == 0:
        rss = float(y @ y)
        return FitResult([], np.empty(0), np.empty(0), np.empty(0), _r2(rss, tss), rss, tss, n, False)

    labels = (["(intercept)"] if d.intercept else []) + list(d.names)
    norms = np.linalg.norm(A, axis=0)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise Singular(f"column {labels[zero[0]]} is identically zero", column=labels[zero[0]])
    Q, R, piv = la.qr(A / norms, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    cond = float((diag[0] / diag[-1]) ** 2) if diag[-1] > 0 else math.inf
    if cond > COND_LIMIT:
        bad = int(np.argmax((diag[0] / np.maximum(diag, 1e-300)) ** 2 > COND_LIMIT))
        col = labels[piv[bad]]
        raise Singular(f"regressors are collinear (Gram condition {cond:.3g}); dependent column {col}", column=col)

    z = la.solve_triangular(R, Q.T @ y)
    scaled = np.empty(p)
    scaled[piv] = z
    beta = scaled / norms
    resid = y - A @ beta
    rss = float(resid @ resid)
    dof = n - p
    sigma2 = rss / dof
    Rinv = la.solve_triangular(R, np.eye(p))
    var_scaled = np.empty(p)
    var_scaled[piv] = np.sum(Rinv**2, axis=1)
    se = np.sqrt(sigma2 * var_scaled) / norms
    with np.errstate(divide="ignore", invalid="ignore"):
        tstat = np.where(se > 0, beta / np.where(se > 0, se, 1.0), np.where(beta == 0, 0.0, np.inf))
    pv = np.array([t_sf(float(t), dof) for t in tstat])
    if d.intercept and not d.names:
        rss = tss  # intercept-only model: r2 is 0 by definition, not by rounding
    return FitResult(
        names=list(d.names),
        beta=beta,
        se=se,
        p_values=pv[1:] if d.intercept else pv,
        r2=_r2(rss, tss),
        rss=rss,
        tss=tss,
        dof=dof,
        intercept=d.intercept,
        cond=cond,
    )


# ------------------------------------------------------------ selection

@dataclass
class SelectionStep:
    added: str | None
    fit: FitResult


@dataclass
class SelectionTrace:
    steps: list[SelectionStep]
    stop_reason: str
    selected: list[int] = field(default_factory=list)  # candidate indices, in order of entry

    @property
    def final(self) -> FitResult:
        return self.steps[-1].fit

    @property
    def selected_names(self) -> list[str]:
        return list(self.final.names)

    def r2_path(self) -> list[float]:
        return [s.fit.r2 for s in self.steps]

    def rows(self) -> list[dict]:
        """Long-format table: one row per (model step, coefficient)."""
        out = []
        for k, step in enumerate(self.steps):
            fit = step.fit
            if fit.intercept:
                out.append({"step": k, "metapath": "(intercept)", "coefficient": fit.intercept_value,
                            "p_value": "", "r2": fit.r2})
            for name, c, pv in zip(fit.names, fit.coefficients, fit.p_values):
                out.append({"step": k, "metapath": name, "coefficient": float(c), "p_value": float(pv), "r2": fit.r2})
            if not fit.intercept and not fit.names:
                out.append({"step": k, "metapath": "", "coefficient": "", "p_value": "", "r2": fit.r2})
        return out

    def to_dict(self) -> dict:
        return {
            "stop_reason": self.stop_reason,
            "selected": self.selected_names,
            "steps": [{"added": s.added, "fit": s.fit.to_dict()} for s in self.steps],
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["step", "metapath", "coefficient", "p_value", "r2"], lineterminator="\n")
            w.writeheader()
            w.writerows(self.rows())

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def select_from_design(d: DesignMatrix, alpha: float = 0.05) -> SelectionTrace:
    """Greedy forward selection over the columns of a prepared design.

    Each round adds the column giving the largest r² among those whose
    resulting model has every regressor p-value <= alpha.  Collinear
    additions are skipped.  Stops when nothing admissible improves r².
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    current: list[int] = []
    fit = ols(d.subset([]))
    steps = [SelectionStep(None, fit)]
    remaining = list(range(d.X.shape[1]))
    reason = "no-candidate"
    while True:
        if not remaining:
            reason = "no-candidate"
            break
        best = None
        tried = 0
        for c in remaining:
            try:
                trial = ols(d.subset(current + [c]))
            except (Singular, Underdetermined):
                continue
            tried += 1
            if np.all(trial.p_values <= alpha) and (best is None or trial.r2 > best[1].r2):
                best = (c, trial)
        if best is None:
            reason = "significance-violation" if tried else "no-candidate"
            break
        if best[1].r2 - fit.r2 < IMPROVE_TOL:
            reason = "no-improvement"
            break
        c, fit = best
        current.append(c)
        remaining.remove(c)
        steps.append(SelectionStep(d.names[c], fit))
    return SelectionTrace(steps, reason, current)


def forward_select(
    target: PcrwResult,
    candidates: Sequence[PcrwResult],
    alpha: float = 0.05,
    source_subset=None,
    intercept: bool = True,
    drop_holes: bool = True,
) -> SelectionTrace:
    """Forward selection of regressor tables explaining ``target``."""
    d = assemble_design(target, candidates, source_subset, intercept=intercept, drop_holes=drop_holes)
    return select_from_design(d, alpha)


def aggregate_features(groups: dict[str, Sequence[PcrwResult]], how: str = "mean") -> list[PcrwResult]:
    """Combine member tables into one regressor per group (entry-wise mean or sum)."""
    out = []
    for name, members in groups.items():
        members = list(members)
        if not members:
            raise ShapeMismatch(f"feature {name} has no members")
        shape = members[0].shape
        total = members[0].table.copy()
        for m in members[1:]:
            if m.shape != shape:
                raise ShapeMismatch(f"feature {name}: member {m.name} has shape {m.shape}, expected {shape}")
            total = total + m.table
        if how == "mean":
            total = total / len(members)
        elif how != "sum":
            raise ValueError(f"unknown aggregation {how!r}")
        out.append(PcrwResult(None, sp.csr_matrix(total), label=name))
    return out
