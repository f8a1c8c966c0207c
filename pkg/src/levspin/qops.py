"""Dense operator algebra on truncated Fock and spin product spaces.

Conventions
-----------
* Factor order in a product space follows the :class:`SpaceLayout`; kets are
  flattened row-major (first factor slowest).
* Spin-1/2 basis order is (|e>, |+>) = (up, down): sigma_z = diag(1, -1) and
  sigma_+ = |e><+|.
* Spin-1 basis order is (|+1>, |0>, |-1>).
* ``squeeze(r, N) = exp(r (a^2 - a^dag^2) / 2)`` so that
  ``S^dag a S = a cosh r - a^dag sinh r``. The Bogoliubov mode that some
  texts write as ``a^dag cosh r - a sinh r`` is the adjoint of this one;
  :func:`bogoliubov_mode` and :func:`adjoint_convention_mode` make the mapping
  explicit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np
import scipy.linalg as sla
from scipy.special import gammaln

from .errors import InvalidStateError, LayoutError, TruncationError

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class SpaceLayout:
    """Ordered tensor factors as (label, dimension) pairs; Fock factors listed in ``fock``."""

    factors: tuple[tuple[str, int], ...]
    fock: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        labels = [lab for lab, _ in self.factors]
        if len(set(labels)) != len(labels):
            raise LayoutError(f"duplicate factor labels in {labels}")
        for lab, dim in self.factors:
            if int(dim) < 1:
                raise LayoutError(f"factor {lab!r} has dimension {dim} < 1")
        if not set(self.fock) <= set(labels):
            raise LayoutError("fock labels must name existing factors")

    @classmethod
    def of(cls, *factors, fock=()) -> "SpaceLayout":
        return cls(tuple((str(lab), int(dim)) for lab, dim in factors), frozenset(fock))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.factors)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LayoutError(f"factor {label!r} not in layout {self.labels}") from None

    def dim(self, label: str) -> int:
        return self.dims[self.index(label)]

    def __add__(self, other: "SpaceLayout") -> "SpaceLayout":
        return SpaceLayout(self.factors + other.factors, self.fock | other.fock)


def spin_layout(label="spin") -> SpaceLayout:
    return SpaceLayout.of((label, 2))


def fock_layout(N: int, label="fock") -> SpaceLayout:
    return SpaceLayout.of((label, N), fock=(label,))


def _max_antihermitian(data: np.ndarray) -> float:
    return float(np.max(np.abs(data - data.conj().T))) if data.size else 0.0


class Operator:
    """Immutable dense matrix tied to a :class:`SpaceLayout`.

    If ``hermitian=True`` the matrix is checked: max|A - A^dag| must not exceed
    1e-12 times max(1, max|A|).
    """

    __slots__ = ("layout", "data", "hermitian")

    def __init__(self, data, layout: SpaceLayout | None = None, hermitian: bool = False):
        data = np.array(data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise LayoutError(f"operator must be a square matrix, got shape {data.shape}")
        if layout is None:
            layout = SpaceLayout.of(("h", data.shape[0]))
        if data.shape[0] != layout.total_dim:
            raise LayoutError(f"matrix dimension {data.shape[0]} does not match layout {layout.dims}")
        if hermitian:
            scale = max(1.0, float(np.max(np.abs(data))) if data.size else 1.0)
            dev = _max_antihermitian(data)
            if dev > HERMITIAN_TOL * scale:
                raise LayoutError(f"operator flagged Hermitian but max|A - A^dag| = {dev:.3g}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "hermitian", bool(hermitian))

    def __setattr__(self, name, value):
        raise AttributeError("Operator is immutable")

    def __repr__(self):
        return f"{type(self).__name__}(layout={self.layout.factors}, hermitian={self.hermitian})"

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def H(self) -> "Operator":
        return self.dag()

    def dag(self) -> "Operator":
        return Operator(self.data.conj().T, self.layout, self.hermitian)

    def _check(self, other: "Operator"):
        if self.layout.dims != other.layout.dims:
            raise LayoutError(f"layout mismatch: {self.layout.dims} vs {other.layout.dims}")

    def __add__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.data + other.data, self.layout, self.hermitian and other.hermitian)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.data - other.data, self.layout, self.hermitian and other.hermitian)
        return NotImplemented

    def __neg__(self):
        return Operator(-self.data, self.layout, self.hermitian)

    def __mul__(self, c):
        if isinstance(c, Operator):
            return NotImplemented
        c = complex(c)
        return Operator(c * self.data, self.layout, self.hermitian and c.imag == 0)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1 / complex(c))

    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.data @ other.data, self.layout)
        return self.data @ np.asarray(other)

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.data))))
        return _max_antihermitian(self.data) <= tol * scale

    def norm(self) -> float:
        """Spectral norm."""
        return float(np.linalg.norm(self.data, 2))

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def as_hermitian(self) -> "Operator":
        """Symmetrise and flag as Hermitian (for sums assembled from adjoint pairs)."""
        return Operator(0.5 * (self.data + self.data.conj().T), self.layout, True)


class DensityMatrix(Operator):
    """Hermitian, unit-trace, positive semidefinite operator."""

    __slots__ = ()

    def __init__(self, data, layout: SpaceLayout | None = None, validate: bool = True):
        super().__init__(data, layout, hermitian=False)
        if validate:
            self.validate()

    def validate(self, herm_tol=1e-10, trace_tol=1e-10, eig_tol=1e-8) -> "DensityMatrix":
        dev = _max_antihermitian(self.data)
        if dev > herm_tol:
            raise InvalidStateError(f"density matrix not Hermitian: max|rho - rho^dag| = {dev:.3g}")
        tr = np.trace(self.data).real
        if abs(tr - 1) > trace_tol:
            raise InvalidStateError(f"density matrix trace {tr!r} != 1")
        lo = float(np.linalg.eigvalsh(self.data)[0])
        if lo < -eig_tol:
            raise InvalidStateError(f"density matrix has negative eigenvalue {lo:.3g}")
        return self

    @classmethod
    def from_ket(cls, psi, layout: SpaceLayout | None = None) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), layout)


# -- constructors -------------------------------------------------------------

def fock_annihilation(N: int, label="fock") -> Operator:
    if N < 2:
        raise TruncationError(f"Fock truncation must be >= 2, got {N}")
    return Operator(np.diag(np.sqrt(np.arange(1, N)), 1), fock_layout(N, label))


def number(N: int, label="fock") -> Operator:
    return Operator(np.diag(np.arange(N, dtype=float)), fock_layout(N, label), hermitian=True)


def identity(layout: SpaceLayout | int) -> Operator:
    if isinstance(layout, int):
        layout = SpaceLayout.of(("h", layout))
    return Operator(np.eye(layout.total_dim), layout, hermitian=True)


def parity(N: int, label="fock") -> Operator:
    return Operator(np.diag((-1.0) ** np.arange(N)), fock_layout(N, label), hermitian=True)


class Spin1(NamedTuple):
    Sx: Operator
    Sy: Operator
    Sz: Operator


class Paulis(NamedTuple):
    sx: Operator
    sy: Operator
    sz: Operator
    sp: Operator
    sm: Operator


def spin1_operators(label="spin1") -> Spin1:
    lay = SpaceLayout.of((label, 3))
    Sp = np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0]]) * math.sqrt(2)
    Sx = 0.5 * (Sp + Sp.T)
    Sy = -0.5j * (Sp - Sp.T)
    Sz = np.diag([1.0, 0.0, -1.0])
    return Spin1(Operator(Sx, lay, True), Operator(Sy, lay, True), Operator(Sz, lay, True))


def spin_half_paulis(label="spin") -> Paulis:
    lay = spin_layout(label)
    sp = np.array([[0, 1], [0, 0]])
    return Paulis(
        Operator([[0, 1], [1, 0]], lay, True),
        Operator([[0, -1j], [1j, 0]], lay, True),
        Operator([[1, 0], [0, -1]], lay, True),
        Operator(sp, lay),
        Operator(sp.T, lay),
    )


def kron(*ops: Operator) -> Operator:
    """Tensor product in the given order; Hermitian if every factor is flagged Hermitian."""
    if len(ops) == 1 and not isinstance(ops[0], Operator):
        ops = tuple(ops[0])
    if not ops:
        raise LayoutError("kron needs at least one operator")
    data = ops[0].data
    layout = ops[0].layout
    for op in ops[1:]:
        data = np.kron(data, op.data)
        layout = layout + op.layout
    return Operator(data, layout, all(op.hermitian for op in ops))


def embed(op: Operator, layout: SpaceLayout, label: str) -> Operator:
    """Place a single-factor operator at ``label`` with identities elsewhere."""
    k = layout.index(label)
    if op.dim != layout.dims[k]:
        raise LayoutError(f"operator dim {op.dim} != factor {label!r} dim {layout.dims[k]}")
    left = math.prod(layout.dims[:k])
    right = math.prod(layout.dims[k + 1:])
    data = np.kron(np.kron(np.eye(left), op.data), np.eye(right))
    return Operator(data, layout, op.hermitian)


def expm(op: Operator, scale: complex = 1.0) -> Operator:
    """exp(scale * op).

    Hermitian and anti-Hermitian inputs go through an eigendecomposition;
    anything else uses scipy's scaling-and-squaring Pade algorithm.
    """
    A = op.data
    if not np.all(np.isfinite(A)):
        raise ValueError("expm: operator has non-finite entries")
    scale = complex(scale)
    herm_flag = False
    if op.hermitian or op.is_hermitian():
        w, V = np.linalg.eigh(0.5 * (A + A.conj().T))
        out = (V * np.exp(scale * w)) @ V.conj().T
        herm_flag = scale.imag == 0
    elif Operator(1j * A, op.layout).is_hermitian():
        G = 1j * A
        w, V = np.linalg.eigh(0.5 * (G + G.conj().T))
        out = (V * np.exp(-1j * scale * w)) @ V.conj().T
    else:
        out = sla.expm(scale * A)
    return Operator(out, op.layout, herm_flag)


def displacement(alpha: complex, N: int, label="fock") -> Operator:
    """D(alpha) = exp(alpha a^dag - alpha^* a) on Fock(N); requires |alpha|^2 <= N/4."""
    if abs(alpha) ** 2 > N / 4:
        raise TruncationError(f"|alpha|^2 = {abs(alpha)**2:.3g} exceeds N/4 = {N/4:.3g}")
    a = fock_annihilation(N, label).data
    G = alpha * a.conj().T - np.conj(alpha) * a
    return expm(Operator(G, fock_layout(N, label)))


def squeeze(r: float, N: int, label="fock") -> Operator:
    """S(r) = exp(r (a^2 - a^dag^2) / 2) on Fock(N); requires |r| <= ln(N)/2."""
    if abs(r) > 0.5 * math.log(N):
        raise TruncationError(f"|r| = {abs(r):.3g} exceeds ln(N)/2 = {0.5*math.log(N):.3g}")
    a = fock_annihilation(N, label).data
    G = 0.5 * r * (a @ a - a.conj().T @ a.conj().T)
    return expm(Operator(G, fock_layout(N, label)))


def bogoliubov_mode(a: Operator, r: float) -> Operator:
    """Canonical squeezed mode b = a cosh r - a^dag sinh r (= S^dag a S)."""
    return math.cosh(r) * a - math.sinh(r) * a.dag()


def adjoint_convention_mode(a: Operator, r: float) -> Operator:
    """The mode written as a^dag cosh r - a sinh r; equals bogoliubov_mode(a, r).dag()."""
    return bogoliubov_mode(a, r).dag()


# -- states -------------------------------------------------------------------

def basis(n: int, N: int) -> np.ndarray:
    if not 0 <= n < N:
        raise TruncationError(f"basis index {n} outside 0..{N-1}")
    v = np.zeros(N, dtype=complex)
    v[n] = 1
    return v


def coherent(alpha: complex, N: int, method: str = "displacement") -> np.ndarray:
    """Coherent-state ket: D(alpha)|0> (``displacement``) or truncated Poisson amplitudes (``analytic``)."""
    if method == "displacement":
        return displacement(alpha, N).data[:, 0].copy()
    if method == "analytic":
        n = np.arange(N)
        logmag = -0.5 * abs(alpha) ** 2 - 0.5 * gammaln(n + 1)
        if alpha == 0:
            return basis(0, N)
        return np.exp(logmag + n * np.log(abs(alpha))) * np.exp(1j * n * np.angle(alpha))
    raise ValueError(f"unknown coherent-state method {method!r}")


def ket_kron(*kets) -> np.ndarray:
    out = np.array([1.0 + 0j])
    for k in kets:
        out = np.kron(out, np.asarray(k, dtype=complex))
    return out


def partial_trace(rho: Operator, keep: str | Iterable[str]) -> DensityMatrix:
    """Reduce to the factor(s) named in ``keep`` (kept in layout order)."""
    keep = [keep] if isinstance(keep, str) else list(keep)
    lay = rho.layout
    idx = sorted(lay.index(k) for k in keep)
    dims = lay.dims
    n = len(dims)
    t = rho.data.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = list(letters[n:2 * n])
    for i in range(n):
        if i not in idx:
            col[i] = row[i]
    out = "".join(row[i] for i in idx) + "".join(col[i] for i in idx)
    red = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    d = math.prod(dims[i] for i in idx)
    sub = SpaceLayout(tuple(lay.factors[i] for i in idx),
                      frozenset(l for l in lay.fock if l in {lay.labels[i] for i in idx}))
    return DensityMatrix(red.reshape(d, d), sub, validate=False)


def expectation(rho: Operator, op: Operator) -> complex:
    """Tr(rho op)."""
    if rho.dim != op.dim:
        raise LayoutError(f"dimension mismatch: rho {rho.dim} vs op {op.dim}")
    return complex(np.einsum("ij,ji->", rho.data, op.data))


def state_fidelity(rho: Operator, psi) -> float:
    """<psi|rho|psi> for a pure target (normalised here)."""
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.size != rho.dim:
        raise LayoutError(f"target length {psi.size} != state dimension {rho.dim}")
    psi = psi / np.linalg.norm(psi)
    return float(np.real(psi.conj() @ rho.data @ psi))


def purity(rho: Operator) -> float:
    return float(np.real(np.einsum("ij,ji->", rho.data, rho.data)))
