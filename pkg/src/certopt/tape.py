"""Lowering of expression trees to flat tapes and kernel backend selection.

The compiled Cython kernel is used when it can be imported; setting the
environment variable ``CERTOPT_PURE_PYTHON=1`` forces the pure-Python
kernel.  Both produce bit-identical results.
"""

from __future__ import annotations

import os

import numpy as np

from certopt import _pykernel
from certopt.expr import (ABS, ADD, CONST, COS, DIV, EXP, MUL, NEG, POW, SIN, SQRT,
                          SUB, VAR, Expr)

try:
    from certopt import _kernel as _ckernel
except ImportError:  # extension not built
    _ckernel = None

if _ckernel is not None and not os.environ.get("CERTOPT_PURE_PYTHON"):
    BACKEND = "cython"
else:
    BACKEND = "python"


def available_backends() -> list[str]:
    return ["python"] + (["cython"] if _ckernel is not None else [])


def kernel_class(backend: str | None = None):
    """Tape class of ``backend`` (default: the active backend)."""
    backend = backend or BACKEND
    if backend == "cython":
        if _ckernel is None:
            raise ImportError("the compiled kernel is not available")
        return _ckernel.Tape
    if backend == "python":
        return _pykernel.Tape
    raise ValueError(f"unknown backend {backend!r}")


def processor_class(backend: str | None = None):
    """Box-processing class (the IB&C inner step) of ``backend``."""
    backend = backend or BACKEND
    if backend == "cython":
        if _ckernel is None:
            raise ImportError("the compiled kernel is not available")
        return _ckernel.BoxProcessor
    if backend == "python":
        return _pykernel.BoxProcessor
    raise ValueError(f"unknown backend {backend!r}")


class CompiledExpr:
    """Flat program of an :class:`Expr` plus a kernel instance.

    Attributes
    ----------
    kernel : Tape
        Backend object exposing ``forward``, ``revise``, ``gradient`` and
        ``eval_float``.
    nodes : list of Expr
        Source node of every tape slot, used for error reporting.
    nvars : int
        One more than the largest variable index.
    """

    def __init__(self, nodes, ops, a, b, k, clo, chi, nvars, backend=None):
        self.nodes = nodes
        self.ops = ops
        self.a = a
        self.b = b
        self.k = k
        self.clo = clo
        self.chi = chi
        self.nvars = nvars
        self.kernel = kernel_class(backend)(ops, a, b, k, clo, chi, nvars)

    def __len__(self):
        return len(self.ops)

    def with_backend(self, backend: str) -> CompiledExpr:
        return CompiledExpr(self.nodes, self.ops, self.a, self.b, self.k,
                            self.clo, self.chi, self.nvars, backend)

    # thin forwards so callers need not reach into the kernel
    def forward(self, lo, hi):
        return self.kernel.forward(lo, hi)

    def revise(self, lo, hi, tlo, thi):
        return self.kernel.revise(lo, hi, tlo, thi)

    def gradient(self, lo, hi):
        return self.kernel.gradient(lo, hi)

    def eval_float(self, x):
        return self.kernel.eval_float(x)

    def first_empty_node(self, lo, hi) -> int | None:
        """Index of the first node whose enclosure is empty over the box."""
        vlo, vhi = _pykernel.Tape(self.ops, self.a, self.b, self.k, self.clo,
                                  self.chi, self.nvars).node_values(lo, hi)
        for i, (p, q) in enumerate(zip(vlo, vhi)):
            if p > q:
                return i
        return None

    def eval_batch(self, X: np.ndarray) -> np.ndarray:
        """Plain float values at each row of ``X`` (shape ``(m, nvars)``)."""
        X = np.asarray(X, dtype=float)
        m = X.shape[0]
        ops, A, B, K = self.ops, self.a, self.b, self.k
        v: list = [None] * len(ops)
        with np.errstate(all="ignore"):
            for i, op in enumerate(ops):
                if op == VAR:
                    v[i] = X[:, K[i]]
                elif op == CONST:
                    v[i] = np.full(m, 0.5 * (self.clo[i] + self.chi[i]))
                elif op == ADD:
                    v[i] = v[A[i]] + v[B[i]]
                elif op == SUB:
                    v[i] = v[A[i]] - v[B[i]]
                elif op == MUL:
                    v[i] = v[A[i]] * v[B[i]]
                elif op == DIV:
                    v[i] = v[A[i]] / v[B[i]]
                elif op == NEG:
                    v[i] = -v[A[i]]
                elif op == POW:
                    v[i] = v[A[i]] ** K[i]
                elif op == SIN:
                    v[i] = np.sin(v[A[i]])
                elif op == COS:
                    v[i] = np.cos(v[A[i]])
                elif op == EXP:
                    v[i] = np.exp(v[A[i]])
                elif op == SQRT:
                    v[i] = np.sqrt(v[A[i]])
                elif op == ABS:
                    v[i] = np.abs(v[A[i]])
        return np.asarray(v[-1], dtype=float)


def compile_expr(e: Expr, backend: str | None = None) -> CompiledExpr:
    """Lower ``e`` in postorder; a node object reached twice is emitted once."""
    index: dict[int, int] = {}
    nodes: list[Expr] = []
    ops: list[int] = []
    a: list[int] = []
    b: list[int] = []
    k: list[int] = []
    clo: list[float] = []
    chi: list[float] = []
    nvars = 0
    stack = [(e, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in index:
            continue
        if not expanded and node.args:
            stack.append((node, True))
            for child in reversed(node.args):
                if id(child) not in index:
                    stack.append((child, False))
            continue
        args = [index[id(c)] for c in node.args]
        index[id(node)] = len(ops)
        nodes.append(node)
        ops.append(node.op)
        a.append(args[0] if args else -1)
        b.append(args[1] if len(args) > 1 else -1)
        if node.op == VAR:
            k.append(node.payload)
            nvars = max(nvars, node.payload + 1)
        elif node.op == POW:
            k.append(node.payload)
        else:
            k.append(0)
        if node.op == CONST:
            clo.append(node.payload.lo)
            chi.append(node.payload.hi)
        else:
            clo.append(0.0)
            chi.append(0.0)
    return CompiledExpr(nodes, ops, a, b, k, clo, chi, nvars, backend)
