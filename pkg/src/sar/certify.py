"""Empirical certification of norm bounds and Lipschitz constants.

Each constant is kept symbolically as

    log C = log(coef) + a log n + b log d + c log R + e R^2 + f log(1/beta)

so comparisons never exponentiate ``exp(5 R^2)``-sized numbers. A record's
right side is ``log C + log(ref)``, where ``ref`` is the perturbation size the
lemma multiplies by (``||x - y||``, a block or global matrix gap, or another
measured difference such as ``||u(x)_j - u(y)_j||``).
"""

import math
from dataclasses import dataclass

import numpy as np

from .forward import (certify_forward_bounds, certify_vector_facts, forward,
                      forward_from)
from .gradients import grad_from_state
from .instance import (ENTROPY_RATIO, INF_GAP, random_system, sample_matrix_pair,
                       sample_x_pair, stream, _uniform_ball)
from .losses import KIND_TAG, LOSS_KINDS, loss_from_state
from .parallel import pmap
from .records import CertRecord, safe_log
from .tensor import spectral_norm

DX, DA_BLOCK, DA, DU, DALPHA, DF = "dx", "dA_block", "dA", "du", "dalpha", "df"
NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True)
class LogConst:
    lemmaId: str
    formula: str
    ref: str
    coef: float = 1.0
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    e: float = 0.0
    f: float = 0.0
    needs: tuple = ()

    def log_value(self, n, d, R, beta=1.0):
        out = math.log(self.coef) + self.e * R * R
        if self.a:
            out += self.a * math.log(n)
        if self.b:
            out += self.b * math.log(d)
        if self.c:
            out += self.c * math.log(R)
        if self.f:
            out += self.f * -math.log(beta)
        return out


R4, RATIO, BNORM = "R>4", "entropyRatio", "bNorm"


def _basic(side, ref_x, ref_a):
    s = side
    ref = ref_x if s == "x" else ref_a
    q_id = "lem:Lipschitz_q:x" if s == "x" else "lem:lipschitz_q:A"
    b_a = (BNORM,) if s == "A" else ()
    return [
        LogConst(f"lem:lipschitz_exp:{s}", "2 sqrt(n) R exp(R^2)", ref, 2, a=0.5, c=1, e=1),
        LogConst(f"lem:lipschitz_alpha:{s}", "sqrt(n)", DU, a=0.5),
        LogConst(f"lem:lipschitz_alpha_inverse:{s}", "beta^-2", DALPHA, f=2, needs=b_a),
        LogConst(f"lem:lipschitz_f:{s}", "4 beta^-2 n^1.5 R exp(2R^2)", ref, 4,
                 a=1.5, c=1, e=2, f=2, needs=b_a),
        LogConst(f"lem:lipschitz_h:{s}", "1", DF, needs=(RATIO,)),
        LogConst(f"lem:lipschitz_c:{s}", "4 beta^-2 n^1.5 R exp(2R^2)", ref, 4,
                 a=1.5, c=1, e=2, f=2, needs=b_a),
        LogConst(q_id, "4 n R exp(R^2)", ref, 4, a=1, c=1, e=1, needs=(BNORM,)),
    ]


def _losses(side):
    s = side
    ref = DX if s == "x" else DA
    loss = {
        "L_c": LogConst(f"lem:lipschitz_L_c:{s}", "n^2.5 exp(5R^2)", ref, a=2.5, e=5,
                        needs=(R4, BNORM)),
        "L_q": LogConst(f"lem:lipschitz_L_q:{s}", "n^3 exp(3R^2)", ref, a=3, e=3,
                        needs=(R4, BNORM)),
        "L_sparse": LogConst(f"lem:lipschitz_L_sparse:{s}", "2 n^2 R exp(R^2)", ref, 2,
                             a=2, c=1, e=1),
        "L_cent": LogConst(f"lem:lipschitz_L_cent:{s}", "4 n^2.5 R beta^-2 exp(2R^2)", ref, 4,
                           a=2.5, c=1, e=2, f=2, needs=(BNORM,)),
        "L_ent": LogConst(f"lem:lipschitz_L_ent:{s}", "n^3 beta^-2 exp(3R^2)", ref,
                          a=3, e=3, f=2, needs=(R4, RATIO)),
    }
    if s == "x":
        sparse_grad = [
            LogConst("lem:lipschitz_grad_L_sparse:x", "2 n d R exp(R^2)", ref, 2,
                     a=1, b=1, c=1, e=1),
            LogConst("lem:lipschitz_grad_L_sparse:x#proof", "2 d n R^2 exp(R^2)", ref, 2,
                     a=1, b=1, c=2, e=1),
        ]
        cent_grad = [LogConst("lem:lipschitz_grad_L_cent:x", "d n^2 exp(5R^2)", ref,
                              a=2, b=1, e=5, needs=(R4, BNORM))]
    else:
        sparse_grad = [LogConst("lem:lipschitz_grad_L_sparse:A", "d n exp(2R^2)", ref,
                                a=1, b=1, e=2, needs=(R4,))]
        cent_grad = [
            LogConst("lem:lipschitz_grad_L_cent:A", "d n^2 exp(5R^2)", ref,
                     a=2, b=1, e=5, needs=(R4, BNORM)),
            LogConst("lem:lipschitz_grad_L_cent:A#final", "n^2 exp(5R^2)", ref,
                     a=2, e=5, needs=(R4, BNORM)),
        ]
    grad = {
        "L_c": [LogConst(f"lem:lipschitz_grad_L_c:{s}", "d n^2 exp(5R^2)", ref,
                         a=2, b=1, e=5, needs=(R4, BNORM))],
        "L_q": [LogConst(f"lem:lipschitz_grad_L_q:{s}", "d n^2 exp(3R^2)", ref,
                         a=2, b=1, e=3, needs=(R4, BNORM))],
        "L_sparse": sparse_grad,
        "L_cent": cent_grad,
        "L_ent": [LogConst(f"lem:lipschitz_grad_L_ent:{s}", "d n^2.5 exp(5R^2)", ref,
                           a=2.5, b=1, e=5, needs=(R4, RATIO))],
    }
    return loss, grad


BASIC_X = _basic("x", DX, DA_BLOCK)
BASIC_A = _basic("A", DX, DA_BLOCK)
LOSS_X, GRAD_X = _losses("x")
LOSS_A, GRAD_A = _losses("A")

#: every certified constant keyed by lemma id
CONSTANTS = {c.lemmaId: c for c in BASIC_X + BASIC_A}
for _table in (LOSS_X, LOSS_A):
    CONSTANTS.update({c.lemmaId: c for c in _table.values()})
for _table in (GRAD_X, GRAD_A):
    for _cs in _table.values():
        CONSTANTS.update({c.lemmaId: c for c in _cs})

#: ids that are reported but do not count towards the pass/fail verdict
INFORMATIONAL = frozenset({"lem:lipschitz_grad_L_cent:A#final"})


def _gate(const, R, flags, b):
    """Reason string if a hypothesis of ``const`` is unmet, else ``""``."""
    for need in const.needs:
        if need == R4 and not R > 4:
            return f"requires R > 4, got R = {R}"
        if need == RATIO and not flags.get("entropyRatio", False):
            return f"entropy ratio ||1 - f(x)/f(y)||_inf exceeds {ENTROPY_RATIO}"
        if need == BNORM and np.max(np.linalg.norm(b, axis=1)) > 1 + 1e-12:
            return "some target block has ||b_j|| > 1"
    return ""


def _record(const, n, d, R, lhs, ref, beta, flags, b):
    reason = _gate(const, R, flags, b)
    if reason:
        return CertRecord.skip(const.lemmaId, n, d, R, reason, flags)
    log_rhs = const.log_value(n, d, R, beta) + safe_log(ref)
    return CertRecord.compare(const.lemmaId, n, d, R, safe_log(lhs), log_rhs,
                              beta=beta, preconds=flags)


def _basic_records(table, s0, s1, refs_block, beta, R, flags):
    """Per-block basic-lemma records between two forward states."""
    n, d = s0.n, s0.d
    recs = []
    for j in range(n):
        du = np.linalg.norm(s0.u[j] - s1.u[j])
        dal = abs(s0.alpha[j] - s1.alpha[j])
        dfj = np.linalg.norm(s0.f[j] - s1.f[j])
        lhs = {
            "exp": du,
            "alpha": dal,
            "alpha_inverse": abs(1.0 / s0.alpha[j] - 1.0 / s1.alpha[j]),
            "f": dfj,
            "h": np.linalg.norm(s0.h[j] - s1.h[j]),
            "c": np.linalg.norm(s0.c[j] - s1.c[j]),
            "q": np.linalg.norm(s0.q[j] - s1.q[j]),
        }
        refs = {DU: du, DALPHA: dal, DF: dfj, DX: refs_block[j], DA_BLOCK: refs_block[j]}
        for const in table:
            key = const.lemmaId.split(":")[1].split("_", 1)[1]
            recs.append(_record(const, n, d, R, lhs[key], refs[const.ref], beta, flags, s0.b))
    return recs


def _x_states(sys, pair):
    return forward(sys, pair.x), forward(sys, pair.y)


def _a_states(pair):
    sa = forward(pair.Asys, pair.x)
    sb = forward_from(pair.Bsys.A, pair.Bsys.b, pair.x, pair.Bsys.n)
    return sa, sb


def certify_basic_x(sys, pair):
    s0, s1 = _x_states(sys, pair)
    beta = min(s0.beta, s1.beta)
    dx = np.linalg.norm(pair.x - pair.y)
    return _basic_records(BASIC_X, s0, s1, [dx] * sys.n, beta, sys.R, pair.preconditionFlags)


def block_gaps(pair):
    n = pair.Asys.n
    diff = pair.Asys.A - pair.Bsys.A
    return [spectral_norm(diff[j * n:(j + 1) * n]) for j in range(n)]


def certify_basic_A(x, pair):
    s0, s1 = _a_states(pair)
    beta = min(s0.beta, s1.beta)
    return _basic_records(BASIC_A, s0, s1, block_gaps(pair), beta, pair.Asys.R,
                          pair.preconditionFlags)


def certify_loss_x(sys, pair, kind, states=None):
    s0, s1 = states or _x_states(sys, pair)
    lhs = abs(loss_from_state(s0, kind) - loss_from_state(s1, kind))
    const = LOSS_X[KIND_TAG[kind]]
    return _record(const, sys.n, sys.d, sys.R, lhs, np.linalg.norm(pair.x - pair.y),
                   min(s0.beta, s1.beta), pair.preconditionFlags, s0.b)


def certify_grad_x(sys, pair, kind, states=None):
    """Gradient-Lipschitz records; alternates (e.g. ``#proof``) come after the main one."""
    s0, s1 = states or _x_states(sys, pair)
    lhs = np.linalg.norm(grad_from_state(sys.A, s0, kind) - grad_from_state(sys.A, s1, kind))
    dx = np.linalg.norm(pair.x - pair.y)
    beta = min(s0.beta, s1.beta)
    return [_record(c, sys.n, sys.d, sys.R, lhs, dx, beta, pair.preconditionFlags, s0.b)
            for c in GRAD_X[KIND_TAG[kind]]]


def certify_loss_A(x, pair, kind, states=None, gap=None):
    s0, s1 = states or _a_states(pair)
    gap = max(block_gaps(pair)) if gap is None else gap
    lhs = abs(loss_from_state(s0, kind) - loss_from_state(s1, kind))
    const = LOSS_A[KIND_TAG[kind]]
    sysA = pair.Asys
    return _record(const, sysA.n, sysA.d, sysA.R, lhs, gap, min(s0.beta, s1.beta),
                   pair.preconditionFlags, s0.b)


def certify_grad_A(x, pair, kind, states=None, gap=None):
    s0, s1 = states or _a_states(pair)
    gap = max(block_gaps(pair)) if gap is None else gap
    lhs = np.linalg.norm(grad_from_state(pair.Asys.A, s0, kind)
                         - grad_from_state(pair.Bsys.A, s1, kind))
    sysA = pair.Asys
    beta = min(s0.beta, s1.beta)
    return [_record(c, sysA.n, sysA.d, sysA.R, lhs, gap, beta, pair.preconditionFlags, s0.b)
            for c in GRAD_A[KIND_TAG[kind]]]


def _draw_dims(rng, n_range, d_range):
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    d = int(rng.integers(d_range[0], d_range[1] + 1))
    return n, d


def lipschitz_sample(seed, k, R=4.5, n_range=(2, 5), d_range=(2, 4), kinds=LOSS_KINDS):
    """All Lipschitz records for sample ``k`` of a sweep (x-side then A-side)."""
    rng = stream(seed, k)
    n, d = _draw_dims(rng, n_range, d_range)
    sys = random_system(n, d, R, int(rng.integers(2**31)))
    xp = sample_x_pair(sys, rng)
    recs = certify_basic_x(sys, xp)
    states = _x_states(sys, xp)
    for kind in kinds:
        recs.append(certify_loss_x(sys, xp, kind, states))
        recs.extend(certify_grad_x(sys, xp, kind, states))
    ap = sample_matrix_pair(xp.x, sys, rng)
    recs.extend(certify_basic_A(ap.x, ap))
    states = _a_states(ap)
    gap = max(block_gaps(ap))
    for kind in kinds:
        recs.append(certify_loss_A(ap.x, ap, kind, states, gap))
        recs.extend(certify_grad_A(ap.x, ap, kind, states, gap))
    return recs


def certify_lipschitz(samples, seed, R=4.5, n_range=(2, 5), d_range=(2, 4),
                      kinds=LOSS_KINDS, workers=None):
    per = pmap(lambda k: lipschitz_sample(seed, k, R, n_range, d_range, kinds),
               range(samples), workers)
    return [r for rs in per for r in rs]


def normalization_record(state, R):
    dev = float(np.max(np.abs(state.f.sum(axis=1) - 1.0)))
    return CertRecord.compare("def:f#normalization", state.n, state.d, R,
                              safe_log(dev), math.log(NORMALIZATION_TOL))


def bounds_sample(seed, k, R=4.5, n_range=(2, 5), d_range=(2, 5)):
    """Forward bound records, normalization, and vector facts for one random state."""
    rng = stream(seed, k)
    n, d = _draw_dims(rng, n_range, d_range)
    sys = random_system(n, d, R, int(rng.integers(2**31)))
    x = _uniform_ball(rng, d * d, R)
    st = forward(sys, x)
    recs = certify_forward_bounds(st, R)
    recs.append(normalization_record(st, R))
    v = rng.standard_normal(n * n)
    w = v + INF_GAP * rng.uniform(-1.0, 1.0, n * n)
    recs.extend(certify_vector_facts(v, w))
    return recs


def certify_bounds(samples, seed, R=4.5, n_range=(2, 5), d_range=(2, 5), workers=None):
    per = pmap(lambda k: bounds_sample(seed, k, R, n_range, d_range), range(samples), workers)
    return [r for rs in per for r in rs]


def summarize(records):
    """Counts and the smallest margin per lemma id (skips excluded from margins)."""
    by = {}
    for r in records:
        e = by.setdefault(r.lemmaId, {"checks": 0, "passed": 0, "failed": 0, "skipped": 0,
                                      "minMargin": math.inf})
        e["checks"] += 1
        if r.skipped:
            e["skipped"] += 1
            continue
        e["passed" if r.passed else "failed"] += 1
        e["minMargin"] = min(e["minMargin"], r.margin)
    return by
