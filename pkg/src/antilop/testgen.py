"""Random NNLS test cases in six families, T1 to T6.

Each family fixes a sign pattern for ``A`` and ``x*`` and a law for the
column lengths of ``A``:

====  ======  ============
kind  signs   lengths
====  ======  ============
T1    +       same (SAM)
T2    +/-     random (RAN)
T3    +       varied (VAR)
T4    +/-     same (SAM)
T5    +       random (RAN)
T6    +/-     varied (VAR)
====  ======  ============

The right-hand side is ``b = A x*``, so nonnegative families have optimal
value 0. Generation is deterministic in the seed: numpy's PCG64 is driven by
a ``SeedSequence`` spawned into one child stream per column of ``A``, one for
``x*`` and one for the column lengths.
"""

import json
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .mmio import read_matrix, read_vector, write_matrix, write_vector

__all__ = [
    "KINDS",
    "GENERATOR_ID",
    "LengthLaws",
    "TestCaseSpec",
    "TestInstance",
    "generate",
    "reference_fstar",
    "save_instance",
    "load_instance",
]

GENERATOR_ID = "numpy.random.PCG64/SeedSequence.spawn(n+2)"
MAX_SPARSITY = 0.4
MAX_COLUMN_RETRIES = 100

# kind -> (nonnegative?, length regime)
KINDS = {
    "T1": (True, "SAM"),
    "T2": (False, "RAN"),
    "T3": (True, "VAR"),
    "T4": (False, "SAM"),
    "T5": (True, "RAN"),
    "T6": (False, "VAR"),
}


@dataclass(frozen=True)
class LengthLaws:
    """Column-length distributions: RAN ~ U(ran_low, ran_high), VAR ~ 10**U(var_low, var_high)."""

    ran_low: float = 0.5
    ran_high: float = 2.0
    var_low: float = -2.0
    var_high: float = 2.0


@dataclass(frozen=True)
class TestCaseSpec:
    kind: str
    n: int = 400
    d: int = 600
    sparsity: float = 0.0
    seed: int = 0
    lengths: LengthLaws = field(default_factory=LengthLaws)

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; expected one of {sorted(KINDS)}")
        if self.n < 2 or self.d < self.n:
            raise ValueError(f"need d >= n >= 2, got n={self.n}, d={self.d}")
        if not 0.0 <= self.sparsity <= MAX_SPARSITY:
            raise ValueError(f"sparsity must lie in [0, {MAX_SPARSITY}], got {self.sparsity}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def nonnegative(self):
        return KINDS[self.kind][0]

    @property
    def length_regime(self):
        return KINDS[self.kind][1]


@dataclass
class TestInstance:
    A: np.ndarray
    x_star: np.ndarray
    b: np.ndarray
    spec: TestCaseSpec

    __test__ = False

    @property
    def kind(self):
        return self.spec.kind

    @property
    def f_star_known(self) -> Optional[float]:
        return 0.0 if self.spec.nonnegative else None


def _draw(rng, size, nonnegative):
    low = 0.0 if nonnegative else -1.0
    return rng.uniform(low, 1.0, size)


def _sparsify(rng, v, sparsity):
    k = int(round(sparsity * v.size))
    if k:
        v[rng.choice(v.size, size=k, replace=False)] = 0.0
    return v


def _column_lengths(rng, spec):
    laws = spec.lengths
    if spec.length_regime == "SAM":
        return np.ones(spec.n)
    if spec.length_regime == "RAN":
        return rng.uniform(laws.ran_low, laws.ran_high, spec.n)
    return 10.0 ** rng.uniform(laws.var_low, laws.var_high, spec.n)


def generate(spec: TestCaseSpec) -> TestInstance:
    """Build the instance described by `spec`; identical seeds give identical arrays."""
    children = np.random.SeedSequence(spec.seed).spawn(spec.n + 2)
    A = np.empty((spec.d, spec.n), order="F")
    for j in range(spec.n):
        rng = np.random.Generator(np.random.PCG64(children[j]))
        for _ in range(MAX_COLUMN_RETRIES):
            col = _sparsify(rng, _draw(rng, spec.d, spec.nonnegative), spec.sparsity)
            norm = np.linalg.norm(col)
            if norm > 0:
                break
        else:
            raise RuntimeError(f"column {j} stayed zero after {MAX_COLUMN_RETRIES} draws")
        A[:, j] = col / norm

    rng = np.random.Generator(np.random.PCG64(children[spec.n]))
    x_star = _sparsify(rng, _draw(rng, spec.n, spec.nonnegative), spec.sparsity)
    if spec.nonnegative:
        x_star = np.maximum(x_star, 0.0)

    rng = np.random.Generator(np.random.PCG64(children[spec.n + 1]))
    A *= _column_lengths(rng, spec)
    b = A @ x_star
    return TestInstance(A=A, x_star=x_star, b=b, spec=spec)


def reference_fstar(instance: TestInstance, candidate_objectives: Sequence[float]) -> float:
    """Optimal value used for scoring: 0 for nonnegative kinds, else the best candidate."""
    if instance.f_star_known is not None:
        return instance.f_star_known
    candidates = [float(c) for c in candidate_objectives]
    if not candidates:
        raise ValueError(f"{instance.kind} has no known optimum; need at least one candidate objective")
    return min(candidates)


def _meta(instance):
    s = instance.spec
    return {
        "kind": s.kind,
        "n": s.n,
        "d": s.d,
        "sparsity": s.sparsity,
        "seed": s.seed,
        "generator": GENERATOR_ID,
        "lengths": {
            "ran_low": s.lengths.ran_low,
            "ran_high": s.lengths.ran_high,
            "var_low": s.lengths.var_low,
            "var_high": s.lengths.var_high,
        },
        "f_star_known": instance.f_star_known,
    }


def save_instance(instance: TestInstance, out_dir):
    """Write ``A.mtx``, ``b.mtx``, ``xstar.mtx`` and ``meta.json`` into `out_dir`."""
    os.makedirs(out_dir, exist_ok=True)
    s = instance.spec
    header = f"generator: {GENERATOR_ID}; kind={s.kind} n={s.n} d={s.d} sparsity={s.sparsity} seed={s.seed}"
    write_matrix(os.path.join(out_dir, "A.mtx"), instance.A, comment=header)
    write_vector(os.path.join(out_dir, "b.mtx"), instance.b, comment=header)
    write_vector(os.path.join(out_dir, "xstar.mtx"), instance.x_star, comment=header)
    with open(os.path.join(out_dir, "meta.json"), "w") as fh:
        json.dump(_meta(instance), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_instance(in_dir) -> TestInstance:
    with open(os.path.join(in_dir, "meta.json")) as fh:
        meta = json.load(fh)
    spec = TestCaseSpec(
        kind=meta["kind"],
        n=meta["n"],
        d=meta["d"],
        sparsity=meta["sparsity"],
        seed=meta["seed"],
        lengths=LengthLaws(**meta.get("lengths", {})),
    )
    return TestInstance(
        A=np.asfortranarray(read_matrix(os.path.join(in_dir, "A.mtx"))),
        x_star=read_vector(os.path.join(in_dir, "xstar.mtx")),
        b=read_vector(os.path.join(in_dir, "b.mtx")),
        spec=spec,
    )
