"""In-place BLAS/LAPACK calls on sub-blocks of a C-ordered square matrix.

scipy's f2py wrappers copy any non-contiguous operand, which for the
left-looking factorization means copying the whole leading triangle once per
block.  Here we call the Fortran routines exported by
``scipy.linalg.cython_blas`` / ``cython_lapack`` through ctypes and pass an
explicit leading dimension instead.

A C-ordered matrix whose *lower* triangle holds the data is, seen
column-major with ``lda = N``, the transpose: an *upper* triangle.  All
wrappers below take row-major coordinates and do the translation.
"""

from __future__ import annotations

import ctypes

import numpy as np
import scipy.linalg.cython_blas as _cython_blas
import scipy.linalg.cython_lapack as _cython_lapack

_get_pointer = ctypes.pythonapi.PyCapsule_GetPointer
_get_pointer.restype = ctypes.c_void_p
_get_pointer.argtypes = [ctypes.py_object, ctypes.c_char_p]
_get_name = ctypes.pythonapi.PyCapsule_GetName
_get_name.restype = ctypes.c_char_p
_get_name.argtypes = [ctypes.py_object]

_CHAR = ctypes.c_char_p
_INT = ctypes.POINTER(ctypes.c_int)
_PTR = ctypes.c_void_p


def _bind(module, name, *argtypes):
    capsule = module.__pyx_capi__[name]
    address = _get_pointer(capsule, _get_name(capsule))
    return ctypes.CFUNCTYPE(None, *argtypes)(address)


_dtrsm = _bind(_cython_blas, "dtrsm", _CHAR, _CHAR, _CHAR, _CHAR, _INT, _INT, _PTR, _PTR, _INT, _PTR, _INT)
_dtrsv = _bind(_cython_blas, "dtrsv", _CHAR, _CHAR, _CHAR, _INT, _PTR, _INT, _PTR, _INT)
_dgemm = _bind(_cython_blas, "dgemm", _CHAR, _CHAR, _INT, _INT, _INT, _PTR, _PTR, _INT, _PTR, _INT, _PTR, _PTR, _INT)
_dsyrk = _bind(_cython_blas, "dsyrk", _CHAR, _CHAR, _INT, _INT, _PTR, _PTR, _INT, _PTR, _PTR, _INT)
_dpotrf = _bind(_cython_lapack, "dpotrf", _CHAR, _INT, _PTR, _INT, _INT)

_ONE = ctypes.byref(ctypes.c_double(1.0))
_MINUS_ONE = ctypes.byref(ctypes.c_double(-1.0))

# Leaf size of the recursive panel solve; below it a plain trsm is used.
PANEL_LEAF = 64


def _int(value: int):
    return ctypes.byref(ctypes.c_int(value))


def check_matrix(a: np.ndarray) -> None:
    """Raise ``ValueError`` unless ``a`` can be handed to the wrappers."""
    if not isinstance(a, np.ndarray) or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square 2-D numpy array")
    if a.dtype != np.float64 or not a.flags.c_contiguous or not a.flags.writeable:
        raise ValueError("expected a writeable, C-contiguous float64 array")


class BlockView:
    """Row-major addressing of a square float64 matrix for BLAS calls.

    The view holds a reference to ``a`` so the buffer outlives every pointer
    handed out.
    """

    def __init__(self, a: np.ndarray):
        check_matrix(a)
        self.a = a
        self.n = a.shape[0]
        self._base = a.ctypes.data
        self._ld = ctypes.byref(ctypes.c_int(self.n))

    def addr(self, row: int, col: int):
        return ctypes.c_void_p(self._base + (row * self.n + col) * 8)

    def potrf(self, start: int, size: int) -> int:
        """Factor the diagonal block ``a[start:start+size, start:start+size]``.

        Returns LAPACK's ``info``: 0 on success, otherwise the 1-based
        position of the first non-positive pivot inside the block.
        """
        info = ctypes.c_int(0)
        _dpotrf(b"U", _int(size), self.addr(start, start), self._ld, ctypes.byref(info))
        return info.value

    def solve_row(self, j: int) -> None:
        """Overwrite ``a[j, :j]`` with ``C[:j, :j]^{-1} a[j, :j]``."""
        if j == 0:
            return
        _dtrsv(b"U", b"T", b"N", _int(j), self.addr(0, 0), self._ld, self.addr(j, 0), _int(1))

    def solve_panel(self, start: int, rows: int, lo: int, hi: int) -> None:
        """Overwrite the panel ``P = a[start:start+rows, lo:hi]`` with
        ``P C[lo:hi, lo:hi]^{-T}``, assuming columns ``< lo`` were already
        eliminated from it.

        Recursive halving keeps almost all work in large gemm calls.
        """
        width = hi - lo
        if width <= 0:
            return
        if width <= PANEL_LEAF:
            _dtrsm(b"L", b"U", b"T", b"N", _int(width), _int(rows), _ONE,
                   self.addr(lo, lo), self._ld, self.addr(start, lo), self._ld)
            return
        mid = lo + max(PANEL_LEAF, (width // 2) // PANEL_LEAF * PANEL_LEAF)
        self.solve_panel(start, rows, lo, mid)
        # P[:, mid:hi] -= P[:, lo:mid] @ C[mid:hi, lo:mid].T
        _dgemm(b"T", b"N", _int(hi - mid), _int(rows), _int(mid - lo), _MINUS_ONE,
               self.addr(mid, lo), self._ld, self.addr(start, lo), self._ld,
               _ONE, self.addr(start, mid), self._ld)
        self.solve_panel(start, rows, mid, hi)

    def schur_update(self, start: int, rows: int) -> None:
        """``a[s:e, s:e] -= a[s:e, :s] @ a[s:e, :s].T`` on the lower triangle."""
        if start == 0:
            return
        _dsyrk(b"U", b"T", _int(rows), _int(start), _MINUS_ONE, self.addr(start, 0), self._ld,
               _ONE, self.addr(start, start), self._ld)
