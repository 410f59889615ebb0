"""Seeded Gaussian instances with planted signals and sparse corruption.

Every random draw comes from a Philox stream keyed by ``(seed, purpose)``, so
the matrix, signal, support and noise streams are independent and each is
reproducible on its own.
"""
import base64
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import as_matrix, as_signal, check_p

NOISE_MODELS = ("replace_zero", "additive_gaussian", "adversarial_large")

_STREAM_KEYS = {"matrix": 0, "signal": 1, "support": 2, "noise": 3}

INSTANCE_FORMAT = "robust-pr-instance/1"


def stream(seed, purpose):
    """Counter-based generator for one purpose of one seed."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(_STREAM_KEYS[purpose],))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class CorruptionSpec:
    """Which measurements are corrupted and how.

    ``fraction`` s gives ``floor(s*m)`` corrupted entries. ``support`` is either
    ``"uniform_random"`` or an explicit tuple of distinct indices, in which case
    its length must equal ``floor(s*m)``.
    """

    fraction: float = 0.0
    noise_model: str = "adversarial_large"
    scale: float = 10.0
    support: object = "uniform_random"

    def __post_init__(self):
        if not 0.0 <= self.fraction < 1.0:
            raise ValueError(f"corruption fraction must lie in [0, 1), got {self.fraction}")
        if self.noise_model not in NOISE_MODELS:
            raise ValueError(f"unknown noise model {self.noise_model!r}")
        if self.noise_model != "replace_zero" and not self.scale > 0:
            raise ValueError(f"noise scale must be positive, got {self.scale}")
        if self.support != "uniform_random":
            idx = tuple(int(i) for i in self.support)
            if len(set(idx)) != len(idx) or any(i < 0 for i in idx):
                raise ValueError("fixed support indices must be distinct and nonnegative")
            object.__setattr__(self, "support", idx)

    def count(self, m):
        # guard against s*m landing just below an integer, e.g. 0.29*100
        return math.floor(self.fraction * m + 1e-9)

    def to_dict(self):
        support = self.support if self.support == "uniform_random" else list(self.support)
        return {
            "fraction": self.fraction,
            "noise_model": self.noise_model,
            "scale": self.scale,
            "support": support,
        }

    @classmethod
    def from_dict(cls, d):
        support = d.get("support", "uniform_random")
        if support != "uniform_random":
            support = tuple(support)
        return cls(
            fraction=float(d.get("fraction", 0.0)),
            noise_model=d.get("noise_model", "adversarial_large"),
            scale=float(d.get("scale", 10.0)),
            support=support,
        )


@dataclass(eq=False)
class ProblemInstance:
    A: np.ndarray
    xstar: np.ndarray
    p: int
    b: np.ndarray
    support: np.ndarray
    noise_values: np.ndarray
    seed: int
    spec: CorruptionSpec = field(default_factory=CorruptionSpec)

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def n(self):
        return self.A.shape[1]

    @property
    def L(self):
        return int(self.support.shape[0])

    def fstar(self):
        """Objective value at the planted signal."""
        if self.xstar is None:
            raise ValueError("instance has no planted signal")
        return kernels.objective(self.A, self.b, self.xstar, self.p)

    def same_as(self, other):
        """Bit-exact equality of every array and parameter."""
        arrays = ("A", "xstar", "b", "support", "noise_values")
        return (
            self.p == other.p
            and self.seed == other.seed
            and self.spec == other.spec
            and all(
                getattr(self, k).dtype == getattr(other, k).dtype
                and getattr(self, k).shape == getattr(other, k).shape
                and getattr(self, k).tobytes() == getattr(other, k).tobytes()
                for k in arrays
            )
        )

    def to_json(self):
        return json.dumps(
            {
                "format": INSTANCE_FORMAT,
                "m": self.m,
                "n": self.n,
                "p": self.p,
                "seed": self.seed,
                "corruption": self.spec.to_dict(),
                "A": _encode(self.A),
                "xstar": _encode(self.xstar),
                "b": _encode(self.b),
                "support": self.support.tolist(),
                "noise_values": _encode(self.noise_values),
            },
            indent=1,
        )

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        if d.get("format") != INSTANCE_FORMAT:
            raise ValueError(f"not a problem instance document (format={d.get('format')!r})")
        m, n = int(d["m"]), int(d["n"])
        A = _decode(d["A"]).reshape(m, n)
        return cls(
            A=A,
            xstar=_decode(d["xstar"]),
            p=check_p(int(d["p"])),
            b=_decode(d["b"]),
            support=np.asarray(d["support"], dtype=np.int64),
            noise_values=_decode(d["noise_values"]),
            seed=int(d["seed"]),
            spec=CorruptionSpec.from_dict(d["corruption"]),
        )


def _encode(a):
    # little-endian float64, base64: exact round trip
    return base64.b64encode(np.ascontiguousarray(a, dtype="<f8").tobytes()).decode("ascii")


def _decode(s):
    return np.frombuffer(base64.b64decode(s), dtype="<f8").astype(np.float64)


def sample_matrix(m, n, seed):
    """``m x n`` matrix of i.i.d. standard normals."""
    if m < 1 or n < 1:
        raise ValueError(f"matrix dimensions must be positive, got {m}x{n}")
    return stream(seed, "matrix").standard_normal((m, n))


def sample_signal(n, norm, seed):
    """Uniformly random direction scaled to Euclidean norm ``norm``."""
    if n < 1:
        raise ValueError(f"signal length must be positive, got {n}")
    if not norm > 0:
        raise ValueError(f"signal norm must be positive, got {norm}")
    rng = stream(seed, "signal")
    while True:
        z = rng.standard_normal(n)
        nz = np.linalg.norm(z)
        if nz > 0:
            return z * (norm / nz)


def plant_instance(m, n, p, spec=None, seed=0, norm=1.0):
    """Gaussian ``A``, random ``x*``, and ``b = |Ax*|^p`` corrupted on a support ``T``.

    Noise models on ``T``: ``replace_zero`` sets ``b_i = 0``;
    ``additive_gaussian`` adds ``scale * N(0, 1)``; ``adversarial_large`` sets
    ``b_i = +-scale * ||x*||^p * U`` with ``U ~ Uniform[1, 2]`` and a random sign.
    """
    p = check_p(p)
    spec = CorruptionSpec() if spec is None else spec
    L = spec.count(m)
    if L >= m:
        raise ValueError(f"corruption count {L} must be below m={m}")
    A = sample_matrix(m, n, seed)
    xstar = sample_signal(n, norm, seed)
    clean = kernels.forward_map(A, xstar, p)

    if spec.support == "uniform_random":
        T = np.sort(stream(seed, "support").choice(m, size=L, replace=False)).astype(np.int64)
    else:
        T = np.sort(np.asarray(spec.support, dtype=np.int64))
        if T.shape[0] != L:
            raise ValueError(f"fixed support has {T.shape[0]} indices, expected floor(s*m)={L}")
        if L and T[-1] >= m:
            raise ValueError(f"fixed support index {int(T[-1])} out of range for m={m}")

    rng = stream(seed, "noise")
    b = clean.copy()
    if spec.noise_model == "replace_zero":
        b[T] = 0.0
    elif spec.noise_model == "additive_gaussian":
        b[T] = clean[T] + spec.scale * rng.standard_normal(L)
    else:
        mag = spec.scale * float(np.linalg.norm(xstar)) ** p * rng.uniform(1.0, 2.0, L)
        sgn = np.where(rng.random(L) < 0.5, -1.0, 1.0)
        b[T] = sgn * mag
    return ProblemInstance(
        A=A,
        xstar=xstar,
        p=p,
        b=b,
        support=T,
        noise_values=b[T] - clean[T],
        seed=int(seed),
        spec=spec,
    )


def instance_from_arrays(A, b, p, xstar=None):
    """Wrap user-supplied data; ``xstar`` may be omitted when unknown."""
    A = as_matrix(A)
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (A.shape[0],):
        raise ValueError(f"b must have shape ({A.shape[0]},)")
    x = as_signal(xstar) if xstar is not None else None
    return ProblemInstance(
        A=A, xstar=x, p=check_p(p), b=b,
        support=np.empty(0, dtype=np.int64), noise_values=np.empty(0), seed=-1,
    )
