"""How well a fit recovers the parameters a synthetic course was drawn from."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import structlog

from diagnostics.correlation import pearson_with_se
from lognormal.params import PARAM_KINDS, ModelParams, normalize_identifiability
from rtmodel.exceptions import ConsistencyError, DiagnosticsError

from .generator import SynthTruth

logger = structlog.get_logger(__name__)


@dataclass(frozen=True, slots=True)
class Recovery:
    """Truth-vs-fit agreement for one parameter kind; ``r`` is None for a constant side."""

    kind: str
    n: int
    r: float | None
    rmse: float


def recovery_report(truth: SynthTruth, fitted: ModelParams) -> dict[str, Recovery]:
    """Pearson r and RMSE of zeta, beta and alpha between truth and a fit.

    Both sides are normalized to mean-zero slowness first, so a fit that
    differs from the truth only by the beta/zeta shift recovers it exactly.

    Raises:
        ConsistencyError: The fit does not cover every id of the truth.
    """
    missing_q = set(truth.params.question_ids) - set(fitted.question_ids)
    missing_u = set(truth.params.user_ids) - set(fitted.user_ids)
    if missing_q or missing_u:
        raise ConsistencyError(
            f"fit lacks {len(missing_q)} questions and {len(missing_u)} users of the truth"
        )
    expected = normalize_identifiability(truth.params)
    actual = normalize_identifiability(fitted)
    report: dict[str, Recovery] = {}
    for kind in reversed(PARAM_KINDS):
        want = expected.values(kind)
        got = actual.values(kind)
        ids = sorted(want)
        x = np.array([want[i] for i in ids])
        y = np.array([got[i] for i in ids])
        try:
            r: float | None = pearson_with_se(x, y).r
        except DiagnosticsError:
            r = None
        report[kind] = Recovery(kind, len(ids), r, float(np.sqrt(np.mean((x - y) ** 2))))
    logger.info(
        "synthetic.recovery",
        **{f"{kind}_r": rec.r for kind, rec in report.items()},
        **{f"{kind}_rmse": rec.rmse for kind, rec in report.items()},
    )
    return report
