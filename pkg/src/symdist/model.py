"""Small modeling layer over the interior-point solver.

Programs are written with PSD / free Hermitian / scalar variables and
affine matrix expressions; ``le``/``ge`` constraints get slack blocks, so a
program in the inequality standard form  max <A, X> : Phi(X) <= B, X >= 0
compiles directly to the solver's equality form.  Matrix equalities are
expanded over an orthonormal Hermitian basis of the constraint space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import sdp
from .exceptions import SolverError

Array = np.ndarray


def hermitian_basis(d: int, include_imag: bool = True) -> Array:
    """Orthonormal basis of d x d Hermitian matrices, deterministic order.

    With ``include_imag=False`` only the real symmetric part is returned;
    real-data programs stay real that way (their optimum is attained on
    real symmetric matrices, and imaginary-part rows would be identically
    zero for the real solver).
    """
    mats = []
    for i in range(d):
        m = np.zeros((d, d), dtype=complex)
        m[i, i] = 1.0
        mats.append(m)
    for i in range(d):
        for j in range(i + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[i, j] = m[j, i] = 1 / np.sqrt(2)
            mats.append(m)
            if include_imag:
                m = np.zeros((d, d), dtype=complex)
                m[i, j] = -1j / np.sqrt(2)
                m[j, i] = 1j / np.sqrt(2)
                mats.append(m)
    return np.stack(mats)


# --- linear operators (variable space -> expression space) -----------------

class LinOp:
    in_dim: int
    out_dim: int

    def adjoint_stack(self, e: Array) -> Array:
        """Apply the adjoint to a stack (r, out_dim, out_dim) of Hermitians."""
        raise NotImplementedError


@dataclass
class Scale(LinOp):
    alpha: float
    dim: int

    def __post_init__(self):
        self.in_dim = self.out_dim = self.dim

    def adjoint_stack(self, e):
        return self.alpha * e


@dataclass
class Inner(LinOp):
    """X -> [[<H, X>]] (scalar-valued)."""
    h: Array

    def __post_init__(self):
        self.in_dim = self.h.shape[0]
        self.out_dim = 1

    def adjoint_stack(self, e):
        return np.einsum("r,ij->rij", e[:, 0, 0], self.h)


@dataclass
class TimesMatrix(LinOp):
    """scalar t -> t * H."""
    h: Array

    def __post_init__(self):
        self.in_dim = 1
        self.out_dim = self.h.shape[0]

    def adjoint_stack(self, e):
        coef = np.einsum("ij,rij->r", self.h.conj(), e)
        return coef.reshape(-1, 1, 1)


@dataclass
class KronLeft(LinOp):
    """X -> K (x) X."""
    k: Array
    var_dim: int

    def __post_init__(self):
        self.in_dim = self.var_dim
        self.out_dim = self.k.shape[0] * self.var_dim

    def adjoint_stack(self, e):
        dk, dx = self.k.shape[0], self.var_dim
        e4 = e.reshape(-1, dk, dx, dk, dx)
        return np.einsum("ij,riajb->rab", self.k.conj(), e4)


@dataclass
class KronRight(LinOp):
    """X -> X (x) K."""
    k: Array
    var_dim: int

    def __post_init__(self):
        self.in_dim = self.var_dim
        self.out_dim = self.k.shape[0] * self.var_dim

    def adjoint_stack(self, e):
        dk, dx = self.k.shape[0], self.var_dim
        e4 = e.reshape(-1, dx, dk, dx, dk)
        return np.einsum("ij,raibj->rab", self.k.conj(), e4)


@dataclass
class ContractLeft(LinOp):
    """Omega on d1 (x) d2  ->  Tr_1[(K^T (x) I) Omega]  (a channel output)."""
    k: Array
    dims: tuple[int, int]

    def __post_init__(self):
        self.in_dim = self.dims[0] * self.dims[1]
        self.out_dim = self.dims[1]

    def adjoint_stack(self, e):
        d1, d2 = self.dims
        out = np.einsum("rab,ki->rkaib", e, self.k.conj())
        return out.reshape(-1, d1 * d2, d1 * d2)


@dataclass
class PTrace(LinOp):
    """Omega on d1 (x) d2 -> partial trace over the given axis."""
    dims: tuple[int, int]
    axis: int

    def __post_init__(self):
        self.in_dim = self.dims[0] * self.dims[1]
        self.out_dim = self.dims[1] if self.axis == 0 else self.dims[0]

    def adjoint_stack(self, e):
        d1, d2 = self.dims
        if self.axis == 0:
            out = np.einsum("rab,ij->riajb", e, np.eye(d1))
        else:
            out = np.einsum("rab,ij->raibj", e, np.eye(d2))
        return out.reshape(-1, d1 * d2, d1 * d2)


# --- expressions ------------------------------------------------------------

@dataclass
class Var:
    name: str
    dim: int
    kind: str  # "psd" | "free"

    def expr(self) -> "Expr":
        return Expr(self.dim, [(self.name, Scale(1.0, self.dim))])

    def __add__(self, other):
        return self.expr() + other

    def __radd__(self, other):
        return self.expr() + other

    def __sub__(self, other):
        return self.expr() - other

    def __rsub__(self, other):
        return (-self.expr()) + other

    def __neg__(self):
        return -self.expr()

    def __mul__(self, a):
        return self.expr() * a

    __rmul__ = __mul__


@dataclass
class Expr:
    dim: int
    terms: list[tuple[str, LinOp]]
    const: Array | None = None

    def _const(self) -> Array:
        if self.const is None:
            return np.zeros((self.dim, self.dim), dtype=complex)
        return self.const

    @staticmethod
    def wrap(x, dim=None) -> "Expr":
        if isinstance(x, Expr):
            return x
        if isinstance(x, Var):
            return x.expr()
        if np.isscalar(x):
            d = dim or 1
            return Expr(d, [], complex(x) * np.eye(d))
        arr = np.asarray(x, dtype=complex)
        return Expr(arr.shape[0], [], arr)

    def __add__(self, other):
        o = Expr.wrap(other, self.dim)
        if o.dim != self.dim:
            raise ValueError(f"dimension mismatch {self.dim} vs {o.dim}")
        return Expr(self.dim, self.terms + o.terms, self._const() + o._const())

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-Expr.wrap(other, self.dim))

    def __rsub__(self, other):
        return (-self) + Expr.wrap(other, self.dim)

    def __neg__(self):
        return self * (-1.0)

    def __mul__(self, a):
        a = float(a)
        terms = [(n, _scaled(op, a)) for n, op in self.terms]
        return Expr(self.dim, terms, a * self._const())

    __rmul__ = __mul__


def _scaled(op: LinOp, a: float) -> LinOp:
    if isinstance(op, _Chain):
        return _Chain(op.op, op.alpha * a)
    if isinstance(op, Scale):
        return Scale(op.alpha * a, op.dim)
    if isinstance(op, Inner):
        return Inner(a * op.h)
    if isinstance(op, TimesMatrix):
        return TimesMatrix(a * op.h)
    if isinstance(op, KronLeft):
        return KronLeft(a * op.k, op.var_dim)
    if isinstance(op, KronRight):
        return KronRight(a * op.k, op.var_dim)
    if isinstance(op, ContractLeft):
        return ContractLeft(a * op.k, op.dims)
    if isinstance(op, PTrace):
        return _Chain(op, a)
    raise TypeError(op)


@dataclass
class _Chain(LinOp):
    """alpha * PTrace (partial traces have no natural data to scale)."""
    op: PTrace
    alpha: float

    def __post_init__(self):
        self.in_dim = self.op.in_dim
        self.out_dim = self.op.out_dim

    def adjoint_stack(self, e):
        return self.alpha * self.op.adjoint_stack(e)


def inner(h, var: Var) -> Expr:
    return Expr(1, [(var.name, Inner(np.asarray(h, dtype=complex)))])


def trace(var: Var) -> Expr:
    return inner(np.eye(var.dim), var)


def times(var: Var, h) -> Expr:
    """Scalar variable times a fixed matrix."""
    h = np.asarray(h, dtype=complex)
    return Expr(h.shape[0], [(var.name, TimesMatrix(h))])


def kron_left(k, var: Var) -> Expr:
    k = np.asarray(k, dtype=complex)
    return Expr(k.shape[0] * var.dim, [(var.name, KronLeft(k, var.dim))])


def kron_right(var: Var, k) -> Expr:
    k = np.asarray(k, dtype=complex)
    return Expr(k.shape[0] * var.dim, [(var.name, KronRight(k, var.dim))])


def channel_output(k, choi_var: Var, dims: tuple[int, int]) -> Expr:
    """Tr_in[(K^T (x) I) Omega] for a Choi-matrix variable on in (x) out."""
    k = np.asarray(k, dtype=complex)
    return Expr(dims[1], [(choi_var.name, ContractLeft(k, dims))])


def ptrace_out(choi_var: Var, dims: tuple[int, int]) -> Expr:
    """Trace out the output factor (axis 1) of a Choi-matrix variable."""
    return Expr(dims[0], [(choi_var.name, PTrace(dims, 1))])


# --- model ------------------------------------------------------------------

@dataclass
class ModelSolution:
    status: sdp.SdpStatus
    value: float
    primal: dict[str, Array]
    gap: float
    iterations: int
    diagnostics: dict


class Model:
    def __init__(self):
        self._psd: list[Var] = []
        self._free: list[Var] = []
        self._cons: list[tuple[Expr, Array]] = []  # expr == const, const Hermitian
        self._obj: Expr | None = None
        self._sense = 1.0  # +1 minimize, -1 maximize
        self._slack_count = 0

    # variables ---------------------------------------------------------
    def psd_var(self, name: str, dim: int) -> Var:
        v = Var(name, dim, "psd")
        self._psd.append(v)
        return v

    def scalar(self, name: str) -> Var:
        """Nonnegative scalar (a 1 x 1 PSD block)."""
        return self.psd_var(name, 1)

    def free_herm(self, name: str, dim: int) -> Var:
        v = Var(name, dim, "free")
        self._free.append(v)
        return v

    def free_scalar(self, name: str) -> Var:
        return self.free_herm(name, 1)

    # constraints ---------------------------------------------------------
    def eq(self, a, b):
        ea = Expr.wrap(a)
        eb = Expr.wrap(b, ea.dim)
        diff = ea - eb
        self._cons.append((Expr(diff.dim, diff.terms), -diff._const()))

    def le(self, a, b):
        """a <= b via a slack PSD block: b - a - z = 0."""
        ea = Expr.wrap(a)
        eb = Expr.wrap(b, ea.dim)
        z = self.psd_var(f"_slack{self._slack_count}", ea.dim)
        self._slack_count += 1
        self.eq(eb - ea - z.expr(), np.zeros((ea.dim, ea.dim)))
        return z

    def ge(self, a, b):
        return self.le(b, a)

    def minimize(self, e):
        self._obj = Expr.wrap(e)
        self._sense = 1.0

    def maximize(self, e):
        self._obj = Expr.wrap(e)
        self._sense = -1.0

    def _data_is_real(self) -> bool:
        def op_real(op: LinOp) -> bool:
            payload = getattr(op, "h", None)
            if payload is None:
                payload = getattr(op, "k", None)
            if isinstance(op, _Chain):
                return True
            return payload is None or np.abs(np.imag(payload)).max(initial=0.0) < 1e-14

        exprs = [e for e, _ in self._cons] + [self._obj]
        consts = [c for _, c in self._cons]
        for e in exprs:
            if np.abs(np.imag(e._const())).max(initial=0.0) >= 1e-14:
                return False
            if not all(op_real(op) for _, op in e.terms):
                return False
        return all(np.abs(np.imag(c)).max(initial=0.0) < 1e-14 for c in consts)

    # compile and solve -----------------------------------------------------
    def compile(self) -> tuple[sdp.SdpProblem, float]:
        if self._obj is None:
            raise SolverError("objective not set")
        self._with_imag = not self._data_is_real()
        psd_index = {v.name: i for i, v in enumerate(self._psd)}
        free_offset: dict[str, int] = {}
        free_basis: dict[str, Array] = {}
        off = 0
        for v in self._free:
            free_offset[v.name] = off
            free_basis[v.name] = hermitian_basis(v.dim, self._with_imag)
            off += free_basis[v.name].shape[0]
        kfree = off
        blocks = [v.dim for v in self._psd]

        def accumulate(expr: Expr, e_stack: Array, rows_psd, rows_free):
            for name, op in expr.terms:
                coef = op.adjoint_stack(e_stack)
                coef = (coef + np.conj(np.transpose(coef, (0, 2, 1)))) / 2
                if name in psd_index:
                    rows_psd[psd_index[name]] += coef
                else:
                    basis = free_basis[name]
                    j0 = free_offset[name]
                    rows_free[:, j0:j0 + basis.shape[0]] += np.real(
                        np.einsum("kij,rij->rk", basis.conj(), coef))

        constraints: list[tuple[list[Array | None], float]] = []
        f_rows: list[Array] = []
        for expr, const in self._cons:
            d = expr.dim
            e_stack = hermitian_basis(d, self._with_imag) if d > 1 \
                else np.ones((1, 1, 1), dtype=complex)
            r = e_stack.shape[0]
            rows_psd = [np.zeros((r, v.dim, v.dim), dtype=complex) for v in self._psd]
            rows_free = np.zeros((r, kfree))
            accumulate(expr, e_stack, rows_psd, rows_free)
            bvals = np.real(np.einsum("rij,ij->r", e_stack.conj(), const))
            for ri in range(r):
                mats: list[Array | None] = []
                for bi, v in enumerate(self._psd):
                    mat = rows_psd[bi][ri]
                    mats.append(mat if np.abs(mat).max(initial=0.0) > 0 else None)
                if all(m is None for m in mats) and not rows_free[ri].any():
                    if abs(bvals[ri]) > 1e-12:
                        raise SolverError("inconsistent constant constraint row")
                    continue
                constraints.append((mats, float(bvals[ri])))
                f_rows.append(rows_free[ri])

        # objective
        e1 = np.ones((1, 1, 1), dtype=complex)
        obj_psd = [np.zeros((1, v.dim, v.dim), dtype=complex) for v in self._psd]
        obj_free = np.zeros((1, kfree))
        accumulate(self._obj, e1, obj_psd, obj_free)
        objective = [self._sense * m[0] for m in obj_psd]
        f_obj = self._sense * obj_free[0]
        obj_const = float(np.real(self._obj._const()[0, 0]))

        fc = np.array(f_rows) if kfree else None
        problem = sdp.SdpProblem(blocks, objective, constraints,
                                 kfree, f_obj if kfree else None, fc)
        return problem, obj_const

    def solve(self, options: sdp.SolverOptions | None = None) -> ModelSolution:
        problem, obj_const = self.compile()
        sol = sdp.solve(problem, options)
        value = self._sense * sol.value + obj_const if np.isfinite(sol.value) \
            else self._sense * sol.value
        primal: dict[str, Array] = {}
        if np.all(np.isfinite(sol.y)) and sol.x_blocks:
            for i, v in enumerate(self._psd):
                primal[v.name] = sol.x_blocks[i]
            off = 0
            for v in self._free:
                basis = hermitian_basis(v.dim, self._with_imag)
                coords = sol.free[off:off + basis.shape[0]]
                primal[v.name] = np.einsum("k,kij->ij", coords, basis)
                off += basis.shape[0]
        return ModelSolution(sol.status, value, primal, sol.gap,
                             sol.iterations, sol.residuals)


def require_optimal(res: ModelSolution, what: str) -> ModelSolution:
    if res.status is not sdp.SdpStatus.OPTIMAL:
        raise SolverError(f"{what}: solver returned {res.status.value} "
                          f"(gap={res.gap:.2e}, iters={res.iterations})")
    return res
