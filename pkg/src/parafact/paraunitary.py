"""Completion of a unit-norm analytic row to a square paraunitary matrix.

A matrix polynomial U(z) is paraunitary when U(z) U~(z) = I, which makes
U(z) a unitary matrix at every point of the unit circle.  Any analytic row
of unit norm on the circle is the first row of such a U of the same length
N and with monomial determinant c z^N: the remaining rows are the
transposed spectral factor of the rank-(m-1) deficiency spectrum
I - row^T (row^T)~, and that factor's uniqueness up to a constant right
unitary is exactly the completion's uniqueness up to a constant unitary
mixing of the added rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidComparisonError, NotParaunitaryError, NumericalFailureError
from .laurent import AnalyticPolyMatrix, LaurentMatrix, LaurentPoly
from .rankdef import Check, RankDefOptions, compare_factors, spectral_factor


def _next_pow2(n: int) -> int:
    m = 1
    while m < n:
        m *= 2
    return m


@dataclass(frozen=True)
class LosslessRow:
    """An analytic row vector of declared length N.

    entries are analytic Laurent polynomials of order at most N, and the
    coefficient vector at power N must not vanish entirely: the declared
    length is part of the analytic data (the determinant of the completed
    matrix is c z^N), so a row whose entries all stop short of N is
    rejected rather than silently reinterpreted at a smaller length.

    The unit-norm property sum_j u_j u_j~ = 1 is checked by
    check_unit_norm_row and by the operations that require it, not here:
    a LosslessRow is a shape-valid candidate, not yet a certified one.
    """

    entries: tuple
    length: int

    def __init__(self, entries, length: Optional[int] = None):
        entries = tuple(
            e if isinstance(e, LaurentPoly) else LaurentPoly.constant(e)
            for e in entries
        )
        if not entries:
            raise ValueError("a lossless row needs at least one entry")
        hi = max((e.hi for e in entries if not e.is_zero), default=0)
        if length is None:
            length = hi
        if length < 0:
            raise ValueError("length must be nonnegative")
        for e in entries:
            if not e.is_zero and e.lo < 0:
                raise ValueError("row entries must be analytic")
            if not e.is_zero and e.hi > length:
                raise ValueError(
                    "row entry order %d exceeds the declared length %d"
                    % (e.hi, length)
                )
        if all(abs(e.coeff(length)) == 0.0 for e in entries):
            raise ValueError(
                "declared length %d exceeds the row's actual order %d"
                % (length, hi)
            )
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "length", int(length))

    @property
    def width(self) -> int:
        return len(self.entries)

    def as_matrix(self) -> LaurentMatrix:
        """The row as a 1 x m Laurent matrix."""
        return LaurentMatrix.from_entries([list(self.entries)])


@dataclass
class ParaunitaryReport:
    """Verification outcome for a square matrix offered as paraunitary.

    deviation is the worst of the coefficientwise U U~ - I residual and the
    sampled unitarity defect; degree is the surviving power k of the
    monomial determinant c z^k and det_phase its raw leading coefficient
    (|c| = 1 when the matrix verifies; the phase itself is meaningful and
    never normalized away); length is the largest power carried by U.
    """

    is_paraunitary: bool
    deviation: float
    degree: Optional[int] = None
    det_phase: Optional[complex] = None
    length: int = 0
    verdicts: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.verdicts.values())

    def to_dict(self):
        return {
            "is_paraunitary": bool(self.is_paraunitary),
            "deviation": float(self.deviation),
            "degree": self.degree,
            "det_phase": (
                [self.det_phase.real, self.det_phase.imag]
                if self.det_phase is not None
                else None
            ),
            "length": self.length,
            "verdicts": {name: c.to_dict() for name, c in self.verdicts.items()},
        }


def check_unit_norm_row(row: LosslessRow, tol: float = 1e-9) -> bool:
    """Whether the row has unit norm identically on the unit circle.

    True iff the Laurent polynomial sum_j u_j u_j~ - 1 has every
    coefficient at most tol in magnitude.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    acc = LaurentPoly.zero()
    for e in row.entries:
        acc = acc + e * e.adjoint()
    return (acc - LaurentPoly.one()).max_abs <= tol


def deficiency_matrix(row: LosslessRow, tol: float = 1e-9) -> LaurentMatrix:
    """The spectrum I - row^T (row^T)~ left uncovered by a unit-norm row.

    At every circle point this is the projector complement I - v v^H for
    the unit vector v = row(z)^T: nonnegative definite with eigenvalues in
    [0, 1] and exactly one zero eigenvalue, hence rank m - 1.  Raises
    ValueError when the row is not unit-norm within tol, since the
    projector structure is what the downstream factorization relies on.
    """
    if not check_unit_norm_row(row, tol):
        raise ValueError("row is not unit-norm on the circle within %g" % tol)
    col = row.as_matrix().transpose()
    m = row.width
    return (LaurentMatrix.identity(m) - col @ col.adjoint()).trim(0.0)


def verify_paraunitary(U: LaurentMatrix, tol: float = 1e-9) -> ParaunitaryReport:
    """Check a square Laurent matrix for paraunitarity and a monomial det.

    Verifies U U~ = I coefficientwise, unitarity of the evaluations on a
    unit-circle grid, and that det U is a single monomial c z^k.  Nothing
    raises beyond shape validation; every measurement lands in the report's
    verdicts.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if U.rows != U.cols:
        raise ValueError("paraunitary verification needs a square matrix")
    m = U.rows
    verdicts = {}

    gram = U @ U.adjoint() - LaurentMatrix.identity(m)
    coeff_dev = gram.max_abs
    verdicts["coefficient_identity"] = Check(coeff_dev <= tol, coeff_dev, tol)

    span = (U.hi or 0) - (U.lo or 0)
    count = _next_pow2(max(64, 2 * span + 1))
    grid_dev = 0.0
    eye = np.eye(m)
    for M in U.eval_unit_grid(count):
        grid_dev = max(grid_dev, float(np.max(np.abs(M @ M.conj().T - eye))))
    verdicts["grid_unitarity"] = Check(grid_dev <= tol, grid_dev, tol)

    det = U.det()
    degree = None
    det_phase = None
    det_ok = False
    side_mass = np.inf
    if not det.is_zero:
        degree = max(range(det.lo, det.hi + 1), key=lambda n: abs(det.coeff(n)))
        det_phase = det.coeff(degree)
        side_mass = max(
            (abs(det.coeff(n)) for n in range(det.lo, det.hi + 1) if n != degree),
            default=0.0,
        ) / abs(det_phase)
        det_ok = side_mass <= tol
    verdicts["det_monomial"] = Check(det_ok, side_mass, tol)

    trimmed = U.trim(1e-12)
    length = trimmed.hi or 0
    return ParaunitaryReport(
        is_paraunitary=bool(coeff_dev <= tol and grid_dev <= tol and det_ok),
        deviation=float(max(coeff_dev, grid_dev)),
        degree=degree,
        det_phase=det_phase,
        length=int(length),
        verdicts=verdicts,
    )


def paraunitary_degree(U: LaurentMatrix, tol: float = 1e-9) -> int:
    """The determinant power k of a paraunitary matrix, with k >= length.

    For a paraunitary matrix polynomial of length N the determinant is a
    monomial c z^k with k >= N (k can exceed N only for special
    coefficient alignments; completions built here always have k = N).
    Raises NotParaunitaryError when the matrix fails verification or the
    degree bound, since both are consequences of genuine paraunitarity.
    """
    report = verify_paraunitary(U, tol)
    if not report.is_paraunitary or report.degree is None:
        raise NotParaunitaryError(
            "matrix is not paraunitary within %g (deviation %.3e)"
            % (tol, report.deviation)
        )
    if report.degree < report.length:
        raise NotParaunitaryError(
            "determinant power %d falls below the matrix length %d"
            % (report.degree, report.length)
        )
    return int(report.degree)


def _monomial_completion(row: LosslessRow, tol: float) -> AnalyticPolyMatrix:
    """The 1 x 1 case: a unit-norm scalar is the monomial c z^N itself."""
    u = row.entries[0]
    c = u.coeff(row.length)
    side = max(
        (abs(u.coeff(n)) for n in range(u.lo, u.hi + 1) if n != row.length),
        default=0.0,
    )
    if side > tol * abs(c):
        raise NumericalFailureError(
            "unit-norm scalar row is not a monomial (side mass %.3e)" % side
        )
    return LaurentMatrix.from_entries([[u]]).as_analytic(0.0)


def complete_to_paraunitary(
    row: LosslessRow, opts: RankDefOptions | None = None
):
    """Extend a unit-norm analytic row to a square paraunitary matrix.

    Returns (U, report): U is m x m analytic of length N with its first
    row equal to the input row coefficient for coefficient, U U~ = I
    within tol, and det U = c z^N with |c| = 1.  The added rows are the
    canonical spectral factor of the deficiency spectrum, transposed, so
    the completion is deterministic; any other valid completion differs
    from it by a constant unitary mixing of rows 2..m.

    Raises ValueError when the row is not unit-norm, propagates
    factorization failures, and raises NumericalFailureError if the
    verified determinant degree differs from N.
    """
    opts = opts or RankDefOptions()
    if not check_unit_norm_row(row, max(opts.tol, 1e-10)):
        raise ValueError("row is not unit-norm on the circle")
    m = row.width
    if m == 1:
        U = _monomial_completion(row, opts.tol)
    else:
        S = deficiency_matrix(row, max(opts.tol, 1e-10))
        factor, _ = spectral_factor(S, opts, rank=m - 1)
        U = LaurentMatrix.vstack([row.as_matrix(), factor.transpose()]).as_analytic(
            0.0
        )
    report = verify_paraunitary(U, opts.tol)
    if report.degree != row.length:
        raise NumericalFailureError(
            "completed determinant has degree %s instead of %d"
            % (report.degree, row.length),
            report=report,
        )
    if not report.is_paraunitary:
        raise NumericalFailureError(
            "completion failed paraunitarity at %g (deviation %.3e)"
            % (opts.tol, report.deviation),
            report=report,
        )
    return U, report


def compare_completions(
    U1: LaurentMatrix, U2: LaurentMatrix, tol: float = 1e-9
) -> Optional[np.ndarray]:
    """Constant unitary V with U2 = diag(1, V) U1, or None if there is none.

    Both inputs must be completions of the same first row; the lower blocks
    are compared as spectral factors of the shared deficiency spectrum (the
    mixing acts on the transposed blocks from the right).  Raises
    InvalidComparisonError when the first rows disagree beyond tol.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if U1.shape != U2.shape or U1.rows != U1.cols:
        raise ValueError("completions must be square matrices of one shape")
    m = U1.rows
    top1 = U1.submatrix([0], range(m))
    top2 = U2.submatrix([0], range(m))
    row_dev = (top1 - top2).max_abs
    row_scale = max(top1.max_abs, 1e-300)
    if row_dev > tol * max(1.0, row_scale):
        raise InvalidComparisonError(
            "first rows differ by %.3e beyond tolerance %g" % (row_dev, tol)
        )
    if m == 1:
        return np.zeros((0, 0), dtype=complex)
    lower1 = U1.submatrix(range(1, m), range(m)).transpose()
    lower2 = U2.submatrix(range(1, m), range(m)).transpose()
    W = compare_factors(lower1, lower2, RankDefOptions(tol=tol))
    if W is None:
        return None
    return W.T.copy()
