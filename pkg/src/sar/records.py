"""Record types shared by the certifiers and the reporter."""

import math
from dataclasses import dataclass, field

#: records pass when ``margin >= -PASS_TOL`` (absorbs rounding in log space)
PASS_TOL = 1e-9


def safe_log(v):
    """``log(v)`` with ``log(0) = -inf``."""
    v = float(v)
    if v < 0:
        raise ValueError(f"log of negative value {v}")
    return math.log(v) if v > 0 else -math.inf


@dataclass
class CertRecord:
    """Outcome of one bound or Lipschitz comparison, in log domain.

    ``logLhs`` is the log of the measured quantity and ``logRhs`` the log of
    the claimed upper bound, so ``margin = logRhs - logLhs``.
    """

    lemmaId: str
    n: int
    d: int
    R: float
    logLhs: float = math.nan
    logRhs: float = math.nan
    margin: float = math.nan
    passed: bool = False
    skipped: bool = False
    reason: str = ""
    betaUsed: float = math.nan
    preconds: dict = field(default_factory=dict)

    @classmethod
    def compare(cls, lemma_id, n, d, R, log_lhs, log_rhs, beta=math.nan, preconds=None):
        log_lhs, log_rhs = float(log_lhs), float(log_rhs)
        if log_lhs == -math.inf:
            margin = math.inf
        else:
            margin = log_rhs - log_lhs
        return cls(
            lemmaId=lemma_id, n=int(n), d=int(d), R=float(R),
            logLhs=log_lhs, logRhs=log_rhs, margin=margin,
            passed=bool(margin >= -PASS_TOL), betaUsed=float(beta),
            preconds=dict(preconds or {}),
        )

    @classmethod
    def skip(cls, lemma_id, n, d, R, reason, preconds=None):
        return cls(lemmaId=lemma_id, n=int(n), d=int(d), R=float(R),
                   skipped=True, reason=reason, preconds=dict(preconds or {}))

    @property
    def failed(self):
        return not self.skipped and not self.passed

    def to_dict(self):
        """Fields in the fixed JSONL schema order."""
        return {
            "lemmaId": self.lemmaId,
            "n": self.n,
            "d": self.d,
            "R": self.R,
            "logLhs": self.logLhs,
            "logRhs": self.logRhs,
            "margin": self.margin,
            "pass": self.passed,
            "skipped": self.skipped,
            "reason": self.reason,
        }
