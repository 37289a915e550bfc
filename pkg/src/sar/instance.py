"""Random problem instances, their vectorized systems, and perturbation pairs.

Every sampler takes a numpy ``Generator``; :func:`stream` derives an
independent counter-based stream per ``(seed, index)`` so sweeps give the
same samples regardless of worker count or evaluation order.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .tensor import MAX_D, MAX_N, block_norms, blocks, kron, norm_inf2, vec_of

SPHERE = "SPHERE"
SIMPLEX = "SIMPLEX"
B_MODES = (SPHERE, SIMPLEX)

X_PAIR = "X_PAIR"
A_PAIR = "A_PAIR"

#: strict bound on the per-block sup-norm gap assumed by the Lipschitz lemmas
INF_GAP = 0.01
#: admissible ratio deviation ``||1 - f(x)/f(y)||_inf`` for the entropy lemmas
ENTROPY_RATIO = 0.1
#: hard cap on the radius
R_MAX = 8.0


class SamplerError(RuntimeError):
    """The shrink budget ran out before the pair invariants held."""


@dataclass(frozen=True)
class RegressionInstance:
    A1: np.ndarray
    A2: np.ndarray
    B: np.ndarray
    R: float
    seed: int = 0
    mode: str = SPHERE

    @property
    def n(self):
        return self.A1.shape[0]

    @property
    def d(self):
        return self.A1.shape[1]


@dataclass(frozen=True)
class VectorizedSystem:
    """``A`` is ``n^2 x d^2``; ``b`` has ``n^2`` entries; block norms are cached."""

    A: np.ndarray
    b: np.ndarray
    n: int
    d: int
    R: float
    blockNorms: np.ndarray = field(default=None)
    fromKron: bool = False

    def __post_init__(self):
        if self.blockNorms is None:
            object.__setattr__(self, "blockNorms", block_norms(self.A, self.n))
        for arr in (self.A, self.b, self.blockNorms):
            arr.setflags(write=False)

    def block(self, j):
        return self.A[j * self.n:(j + 1) * self.n]

    def with_matrix(self, A):
        """Same target and radius, free-form matrix ``A``."""
        return VectorizedSystem(np.array(A, dtype=np.float64), self.b, self.n, self.d, self.R)


@dataclass(frozen=True)
class PairSample:
    kind: str
    x: np.ndarray
    y: np.ndarray = None
    Asys: VectorizedSystem = None
    Bsys: VectorizedSystem = None
    eps: float = 0.0
    preconditionFlags: dict = field(default_factory=dict)


def stream(seed, index=0):
    """Counter-based generator for sample ``index`` of a sweep seeded by ``seed``."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFF, int(index)])
    return np.random.Generator(np.random.Philox(ss))


def _uniform_ball(rng, dim, radius):
    g = rng.standard_normal(dim)
    g /= np.linalg.norm(g)
    return radius * rng.random() ** (1.0 / dim) * g


def generate_instance(n, d, R, seed, bMode=SPHERE):
    """Random ``(A1, A2, B)`` with every Kronecker block norm at most ``R``.

    Block ``j`` of ``A1 (x) A2`` is ``A1[j] (x) A2`` whose spectral norm is
    ``||A1[j]||_2 * ||A2||``; ``A1`` is rescaled globally so the largest of
    these sits just below ``R``.
    """
    if n < 1 or d < 1:
        raise ValueError(f"n and d must be positive, got n={n}, d={d}")
    if not R > 0:
        raise ValueError(f"R must be positive, got {R}")
    if bMode not in B_MODES:
        raise ValueError(f"unknown bMode {bMode!r}")
    rng = stream(seed, 0)
    A1 = rng.standard_normal((n, d))
    A2 = rng.standard_normal((n, d))
    top = np.max(np.linalg.norm(A1, axis=1)) * np.linalg.norm(A2, 2)
    A1 *= R * (1 - 1e-9) / top
    if bMode == SPHERE:
        B = np.stack([_uniform_ball(rng, n, 1.0) for _ in range(n)])
    else:
        B = rng.dirichlet(np.ones(n), size=n)
    return RegressionInstance(A1, A2, B, float(R), int(seed), bMode)


def vectorize(inst, max_n=MAX_N, max_d=MAX_D):
    A = kron(inst.A1, inst.A2, max_n=max_n, max_d=max_d)
    return VectorizedSystem(A, vec_of(inst.B).copy(), inst.n, inst.d, inst.R, fromKron=True)


def random_system(n, d, R, seed, bMode=SPHERE):
    return vectorize(generate_instance(n, d, R, seed, bMode))


def _softmax_blocks(A, x, n):
    z = (A @ x).reshape(n, n)
    u = np.exp(z)
    return u / u.sum(axis=1, keepdims=True)


def entropy_ratio_gap(fx, fy):
    """``max_j ||1 - f(x)_j / f(y)_j||_inf`` for ``n x n`` softmax arrays."""
    return float(np.max(np.abs(1.0 - fx / fy)))


def sample_x_pair(sys, rng, maxShrink=60):
    """Draw ``x`` uniform in the ``R``-ball and a nearby ``y`` meeting the hypotheses."""
    dim = sys.d * sys.d
    x = _uniform_ball(rng, dim, sys.R)
    u = rng.standard_normal(dim)
    u /= np.linalg.norm(u)
    if x @ u > 0:
        u = -u
    eps = 0.005 / max(float(np.max(sys.blockNorms)), 1.0)
    for _ in range(maxShrink + 1):
        if eps == 0.0:
            break
        y = x + eps * u
        gap = np.max(np.abs(sys.A @ (y - x)))
        if gap < INF_GAP and np.linalg.norm(y) <= sys.R and np.any(y != x):
            ratio = entropy_ratio_gap(_softmax_blocks(sys.A, x, sys.n),
                                      _softmax_blocks(sys.A, y, sys.n))
            flags = {"infGap": True, "ballMembership": True,
                     "entropyRatio": ratio <= ENTROPY_RATIO}
            return PairSample(X_PAIR, x=x, y=y, Asys=sys, eps=eps, preconditionFlags=flags)
        eps *= 0.5
    raise SamplerError(f"x-pair shrink budget of {maxShrink} halvings exhausted")


def _clip_blocks(Bm, n, R):
    # the 1e-8 margin absorbs the power-iteration tolerance
    cap = R * (1 - 1e-8)
    out = blocks(Bm, n).copy()
    for j, nb in enumerate(block_norms(Bm, n)):
        if nb > cap:
            out[j] *= cap / nb
    return out.reshape(Bm.shape)


def sample_matrix_pair(x, template, rng, maxShrink=60, eps=None):
    """Perturb ``template.A`` into a free-form ``B`` near it at the fixed point ``x``.

    The direction ``P`` is standard normal with every block scaled to unit
    spectral norm. Blocks pushed over ``R`` are scaled back onto the cap.
    """
    x = np.asarray(x, dtype=np.float64)
    if np.linalg.norm(x) > template.R:
        raise ValueError("x lies outside the R-ball")
    n = template.n
    P = rng.standard_normal(template.A.shape)
    Pb = blocks(P, n)
    Pb /= block_norms(P, n)[:, None, None]
    eps = 0.005 / max(float(np.linalg.norm(x)), 1.0) if eps is None else float(eps)
    for _ in range(maxShrink + 1):
        if eps == 0.0:
            break
        Bm = _clip_blocks(template.A + eps * P, n, template.R)
        gap = np.max(np.abs((template.A - Bm) @ x)) if np.any(x) else 0.0
        if gap < INF_GAP and np.any(Bm != template.A):
            Bsys = template.with_matrix(Bm)
            if np.max(Bsys.blockNorms) <= template.R:
                fa = _softmax_blocks(template.A, x, n)
                fb = _softmax_blocks(Bm, x, n)
                flags = {"infGap": True, "ballMembership": True,
                         "entropyRatio": entropy_ratio_gap(fa, fb) <= ENTROPY_RATIO}
                return PairSample(A_PAIR, x=x, Asys=template, Bsys=Bsys, eps=eps,
                                  preconditionFlags=flags)
        eps *= 0.5
    raise SamplerError(f"A-pair shrink budget of {maxShrink} halvings exhausted")


def matrix_gap(pair):
    """``||A - B||_{inf,2}``: largest block spectral norm of the difference."""
    return norm_inf2(pair.Asys.A, pair.Bsys.A, pair.Asys.n)


def recheck_pair(pair):
    """Independent re-verification of a pair's hypotheses.

    Uses full SVDs and explicit loops only, so it shares no code with the
    samplers. Returns a dict of named booleans.
    """
    out = {}
    sysA = pair.Asys
    n, R = sysA.n, sysA.R

    def blk(M, j):
        return np.array([M[j * n + i] for i in range(n)])

    def top_sv(M):
        return float(np.linalg.svd(M, compute_uv=False)[0])

    def block_caps_ok(M):
        return all(top_sv(blk(M, j)) <= R * (1 + 1e-12) for j in range(n))

    def softmax_rows(M, v):
        rows = []
        for j in range(n):
            z = [float(np.dot(M[j * n + i], v)) for i in range(n)]
            e = [math.exp(t) for t in z]
            s = sum(e)
            rows.append([t / s for t in e])
        return np.array(rows)

    if pair.kind == X_PAIR:
        x, y = pair.x, pair.y
        out["ballMembership"] = (math.sqrt(sum(t * t for t in x)) <= R * (1 + 1e-12)
                                 and math.sqrt(sum(t * t for t in y)) <= R * (1 + 1e-12))
        gap = max(abs(float(np.dot(sysA.A[r], y - x))) for r in range(n * n))
        out["infGap"] = gap < INF_GAP
        out["distinct"] = any(a != b for a, b in zip(x, y))
        out["blockCaps"] = block_caps_ok(sysA.A)
        fx, fy = softmax_rows(sysA.A, x), softmax_rows(sysA.A, y)
    else:
        x = pair.x
        Bm = pair.Bsys.A
        out["ballMembership"] = math.sqrt(sum(t * t for t in x)) <= R * (1 + 1e-12)
        gap = max(abs(float(np.dot(sysA.A[r] - Bm[r], x))) for r in range(n * n))
        out["infGap"] = gap < INF_GAP
        out["distinct"] = bool(np.any(sysA.A != Bm))
        out["blockCaps"] = block_caps_ok(sysA.A) and block_caps_ok(Bm)
        fx, fy = softmax_rows(sysA.A, x), softmax_rows(Bm, x)
    ratio = max(abs(1.0 - a / b) for a, b in zip(fx.ravel(), fy.ravel()))
    out["entropyRatio"] = ratio <= ENTROPY_RATIO
    return out


def _fmt(v):
    return repr(float(v))


def format_instance(inst):
    """Flat text: header ``n d R seed mode`` then row-major A1, A2, B sections."""
    lines = [f"{inst.n} {inst.d} {_fmt(inst.R)} {inst.seed} {inst.mode}"]
    for M in (inst.A1, inst.A2, inst.B):
        lines.append("")
        lines.extend(" ".join(_fmt(v) for v in row) for row in M)
    return "\n".join(lines) + "\n"


def write_instance(inst, path):
    with open(path, "w") as fh:
        fh.write(format_instance(inst))


def read_instance(path):
    with open(path) as fh:
        rows = [ln.split() for ln in fh if ln.strip()]
    n, d = int(rows[0][0]), int(rows[0][1])
    R, seed, mode = float(rows[0][2]), int(rows[0][3]), rows[0][4]
    body = np.array([[float(v) for v in r] for r in rows[1:2 * n + 1]])
    B = np.array([[float(v) for v in r] for r in rows[2 * n + 1:3 * n + 1]])
    if body.shape != (2 * n, d) or B.shape != (n, n):
        raise ValueError(f"malformed instance file {path}")
    return RegressionInstance(body[:n], body[n:], B, R, seed, mode)
