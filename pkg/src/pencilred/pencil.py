"""Pencils, equivalence transforms and Kronecker block synthesis."""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError
from .subspace import DEFAULT_TOL, as_matrix, singular_values


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Pencil:
    """A pair ``(E, A)`` of same-shaped matrices acting from ``K^n`` to ``K^m``."""

    E: np.ndarray
    A: np.ndarray

    def __post_init__(self):
        E = as_matrix(self.E, "E")
        A = as_matrix(self.A, "A")
        if E.shape != A.shape:
            raise InputError(f"E has shape {E.shape} but A has shape {A.shape}")
        dtype = np.result_type(E.dtype, A.dtype, float)
        object.__setattr__(self, "E", _frozen(E.astype(dtype, copy=False)))
        object.__setattr__(self, "A", _frozen(A.astype(dtype, copy=False)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.E.shape

    @property
    def m(self) -> int:
        return self.E.shape[0]

    @property
    def n(self) -> int:
        return self.E.shape[1]

    @property
    def field(self) -> str:
        return "complex" if np.iscomplexobj(self.E) else "real"

    @property
    def is_square(self) -> bool:
        return self.m == self.n

    def norms(self) -> tuple[float, float]:
        return _norm2(self.E), _norm2(self.A)

    def transpose(self) -> "Pencil":
        return Pencil(self.E.conj().T, self.A.conj().T)

    def __eq__(self, other):
        if not isinstance(other, Pencil):
            return NotImplemented
        return (
            self.shape == other.shape
            and self.E.dtype == other.E.dtype
            and np.array_equal(self.E, other.E)
            and np.array_equal(self.A, other.A)
        )

    __hash__ = None

    def __repr__(self):
        return f"Pencil(shape={self.shape}, field={self.field!r})"

    @classmethod
    def empty(cls, m: int = 0, n: int = 0) -> "Pencil":
        return cls(np.zeros((m, n)), np.zeros((m, n)))


def _norm2(M: np.ndarray) -> float:
    return float(np.linalg.norm(M, 2)) if M.size else 0.0


@dataclass(frozen=True, eq=False)
class EquivalencePair:
    """Invertible changes of basis; acts as ``(E, A) -> (P E Q, P A Q)``."""

    P: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        P = as_matrix(self.P, "P")
        Q = as_matrix(self.Q, "Q")
        for name, M in (("P", P), ("Q", Q)):
            if M.shape[0] != M.shape[1]:
                raise InputError(f"{name} must be square, got {M.shape}")
            s = singular_values(M)
            if s.size and not s[-1] > DEFAULT_TOL.threshold(s[0], M.shape[0]):
                raise InputError(f"{name} is numerically singular")
        object.__setattr__(self, "P", _frozen(P))
        object.__setattr__(self, "Q", _frozen(Q))

    @property
    def cond_P(self) -> float:
        return _cond(self.P)

    @property
    def cond_Q(self) -> float:
        return _cond(self.Q)

    @classmethod
    def identity(cls, m: int, n: int) -> "EquivalencePair":
        return cls(np.eye(m), np.eye(n))


def _cond(M: np.ndarray) -> float:
    s = singular_values(M)
    return float(s[0] / s[-1]) if s.size else 1.0


def apply_equivalence(p: Pencil, t: EquivalencePair) -> Pencil:
    if t.P.shape[1] != p.m or t.Q.shape[0] != p.n:
        raise InputError(
            f"transform sizes ({t.P.shape[0]}, {t.Q.shape[0]}) do not match pencil {p.shape}"
        )
    return Pencil(t.P @ p.E @ t.Q, t.P @ p.A @ t.Q)


def _random_orthogonal(rng: np.random.Generator, n: int, complex_: bool) -> np.ndarray:
    if n == 0:
        return np.zeros((0, 0), dtype=complex if complex_ else float)
    Z = rng.standard_normal((n, n))
    if complex_:
        Z = Z + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    return Q * (d / np.abs(d))


def random_conditioned(
    rng: np.random.Generator, n: int, sv_range=(0.1, 10.0), complex_: bool = False
) -> np.ndarray:
    """Random ``n x n`` matrix with singular values log-uniform in ``sv_range``."""
    lo, hi = sv_range
    s = np.exp(rng.uniform(np.log(lo), np.log(hi), size=n))
    U = _random_orthogonal(rng, n, complex_)
    V = _random_orthogonal(rng, n, complex_)
    return (U * s) @ V.conj().T


def random_equivalence(
    m: int, n: int, seed=None, *, sv_range=(0.1, 10.0), complex_: bool = False
) -> EquivalencePair:
    rng = np.random.default_rng(seed)
    P = random_conditioned(rng, m, sv_range, complex_)
    Q = random_conditioned(rng, n, sv_range, complex_)
    return EquivalencePair(P, Q)


# -- Kronecker blocks ------------------------------------------------------

@dataclass(frozen=True)
class Block:
    """One Kronecker block: ``J`` (Jordan), ``N`` (nilpotent), ``L`` or ``LT`` (singular)."""

    kind: str
    size: int
    eigenvalue: complex | float | None = None

    def __post_init__(self):
        if self.kind not in ("J", "N", "L", "LT"):
            raise InputError(f"unknown block kind {self.kind!r}")
        if self.kind in ("J", "N") and self.size < 1:
            raise InputError(f"{self.kind} block needs size >= 1")
        if self.size < 0:
            raise InputError("block size must be nonnegative")
        if self.kind == "J" and self.eigenvalue is None:
            raise InputError("J block needs an eigenvalue")

    @property
    def shape(self) -> tuple[int, int]:
        k = self.size
        return {"J": (k, k), "N": (k, k), "L": (k, k + 1), "LT": (k + 1, k)}[self.kind]

    def matrices(self) -> tuple[np.ndarray, np.ndarray]:
        k = self.size
        if self.kind == "J":
            lam = complex(self.eigenvalue)
            if lam.imag == 0:
                return np.eye(k), lam.real * np.eye(k) + np.eye(k, k=1)
            return np.eye(k), lam * np.eye(k, dtype=complex) + np.eye(k, k=1)
        if self.kind == "N":
            return np.eye(k, k=1), np.eye(k)
        if self.kind == "L":
            return np.eye(k, k + 1), np.eye(k, k + 1, k=1)
        return np.eye(k + 1, k), np.eye(k + 1, k, k=-1)

    def __str__(self):
        if self.kind == "J":
            lam = complex(self.eigenvalue)
            lam_text = repr(lam.real) if lam.imag == 0 else repr(lam).strip("()")
            return f"J({self.size},{lam_text})"
        return f"{self.kind}({self.size})"


BlockSpec = Sequence[Block]

_BLOCK_RE = re.compile(r"\s*(LT|L|N|J)\s*\(\s*([^()]*?)\s*\)\s*")


def parse_blocks(text: str) -> list[Block]:
    """Parse the block grammar ``J(k,lam)|N(k)|L(e)|LT(e)``, comma separated."""
    blocks = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _BLOCK_RE.match(text, pos)
        if not m:
            raise InputError(f"cannot parse block list at {text[pos:]!r}")
        kind, args = m.group(1), [a.strip() for a in m.group(2).split(",")]
        try:
            if kind == "J":
                if len(args) != 2:
                    raise ValueError
                lam = complex(args[1].replace("i", "j"))
                blocks.append(Block("J", int(args[0]), lam.real if lam.imag == 0 else lam))
            else:
                if len(args) != 1:
                    raise ValueError
                blocks.append(Block(kind, int(args[0])))
        except ValueError:
            raise InputError(f"bad arguments in block {m.group(0).strip()!r}") from None
        pos = m.end()
        if pos < len(text):
            if text[pos] != ",":
                raise InputError(f"expected ',' at {text[pos:]!r}")
            pos += 1
    return blocks


def format_blocks(spec: Iterable[Block]) -> str:
    return ",".join(str(b) for b in spec)


def block_diag(mats: Sequence[np.ndarray]) -> np.ndarray:
    """Block diagonal assembly that respects zero-sized blocks."""
    rows = sum(M.shape[0] for M in mats)
    cols = sum(M.shape[1] for M in mats)
    dtype = np.result_type(float, *[M.dtype for M in mats]) if mats else float
    out = np.zeros((rows, cols), dtype=dtype)
    i = j = 0
    for M in mats:
        r, c = M.shape
        out[i:i + r, j:j + c] = M
        i, j = i + r, j + c
    return out


def synthesize(
    spec: BlockSpec,
    transform: EquivalencePair | None = None,
    *,
    scramble: bool = False,
    seed=None,
    sv_range=(0.1, 10.0),
) -> Pencil:
    """Block diagonal pencil from Kronecker blocks, optionally scrambled.

    ``transform`` takes precedence; otherwise ``scramble=True`` draws a random
    equivalence from ``seed`` whose factors have condition number at most
    ``sv_range[1] / sv_range[0]``.
    """
    spec = list(spec)
    if not spec:
        warnings.warn("empty block specification gives a 0x0 pencil", stacklevel=2)
    pairs = [b.matrices() for b in spec]
    p = Pencil(block_diag([e for e, _ in pairs]), block_diag([a for _, a in pairs]))
    if transform is None and scramble:
        transform = random_equivalence(p.m, p.n, seed, sv_range=sv_range, complex_=p.field == "complex")
    if transform is not None:
        p = apply_equivalence(p, transform)
    return p


def spec_shape(spec: BlockSpec) -> tuple[int, int]:
    m = sum(b.shape[0] for b in spec)
    n = sum(b.shape[1] for b in spec)
    return m, n


def random_pencil(
    rng: np.random.Generator, m: int, n: int, rank_E: int | None = None, rank_A: int | None = None
) -> Pencil:
    """Gaussian pencil whose factors have the requested ranks."""

    def low_rank(r):
        r = min(m, n) if r is None else r
        return rng.standard_normal((m, r)) @ rng.standard_normal((r, n))

    return Pencil(low_rank(rank_E), low_rank(rank_A))
