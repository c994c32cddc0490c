"""Dense complex tensors stored as separate real/imaginary planes.

Split storage (two real planes instead of interleaved pairs) lets the
convolution core expand a complex convolution into plain real convolutions
without strided access. Tensors are immutable after construction; every
operation returns a fresh tensor.
"""

from __future__ import annotations

import struct

import numpy as np

DTYPES = {"f32": np.float32, "f64": np.float64}
_DTYPE_CODE = {"f32": 0, "f64": 1}
_CODE_DTYPE = {0: "f32", 1: "f64"}

CTNS_MAGIC = b"CTNS"
CTNS_VERSION = 1


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


class ComplexTensor:
    """n-d complex array with row-major planes `re` and `im`.

    A tensor whose `im` plane is all zero behaves exactly like a real
    tensor under every operation here.
    """

    __slots__ = ("re", "im", "shape", "dtype")

    def __init__(self, re, im=None, dtype: str | None = None):
        if dtype is None:
            # f32 unless handed an explicit float64 ndarray (verification mode)
            dtype = "f64" if isinstance(re, np.ndarray) and re.dtype == np.float64 else "f32"
        re = np.asarray(re)
        if dtype not in DTYPES:
            raise ValueError(f"unsupported dtype {dtype!r}, expected 'f32' or 'f64'")
        nptype = DTYPES[dtype]
        re = np.array(re, dtype=nptype, order="C")
        if im is None:
            im = np.zeros_like(re)
        else:
            im = np.array(im, dtype=nptype, order="C")
        if re.shape != im.shape:
            raise ValueError(f"re shape {re.shape} != im shape {im.shape}")
        self.re = _freeze(re)
        self.im = _freeze(im)
        self.shape = re.shape
        self.dtype = dtype

    @classmethod
    def _wrap(cls, re: np.ndarray, im: np.ndarray) -> "ComplexTensor":
        """Adopt freshly computed planes without copying. Internal use only:
        the arrays must be same shape, f32 or f64, unaliased."""
        re = np.asarray(re)
        im = np.asarray(im)
        if not re.flags.c_contiguous:
            re = np.ascontiguousarray(re)
        if not im.flags.c_contiguous:
            im = np.ascontiguousarray(im)
        t = object.__new__(cls)
        t.re = _freeze(re)
        t.im = _freeze(im)
        t.shape = re.shape
        t.dtype = "f64" if re.dtype == np.float64 else "f32"
        return t

    @classmethod
    def zeros(cls, shape, dtype: str = "f32") -> "ComplexTensor":
        nptype = DTYPES[dtype]
        return cls._wrap(np.zeros(shape, nptype), np.zeros(shape, nptype))

    @classmethod
    def from_complex(cls, z, dtype: str = "f32") -> "ComplexTensor":
        z = np.asarray(z, dtype=np.complex128)
        nptype = DTYPES[dtype]
        return cls._wrap(z.real.astype(nptype), z.imag.astype(nptype))

    @property
    def np_dtype(self):
        return DTYPES[self.dtype]

    @property
    def size(self) -> int:
        return int(self.re.size)

    def to_complex(self) -> np.ndarray:
        return self.re.astype(np.complex128) + 1j * self.im.astype(np.complex128)

    def astype(self, dtype: str) -> "ComplexTensor":
        if dtype == self.dtype:
            return self
        nptype = DTYPES[dtype]
        return ComplexTensor._wrap(self.re.astype(nptype), self.im.astype(nptype))

    def _check_compatible(self, other: "ComplexTensor", op: str) -> None:
        if not isinstance(other, ComplexTensor):
            raise TypeError(f"{op}: expected ComplexTensor, got {type(other).__name__}")
        if self.shape != other.shape:
            raise ValueError(f"{op}: shape mismatch {self.shape} vs {other.shape}")
        if self.dtype != other.dtype:
            raise ValueError(f"{op}: dtype mismatch {self.dtype} vs {other.dtype}")

    def __add__(self, other):
        self._check_compatible(other, "add")
        return ComplexTensor._wrap(self.re + other.re, self.im + other.im)

    def __sub__(self, other):
        self._check_compatible(other, "sub")
        return ComplexTensor._wrap(self.re - other.re, self.im - other.im)

    def __mul__(self, other):
        """Elementwise complex product (aR+i aI)(bR+i bI)."""
        self._check_compatible(other, "mul")
        re = self.re * other.re - self.im * other.im
        im = self.re * other.im + self.im * other.re
        return ComplexTensor._wrap(re, im)

    def conj(self) -> "ComplexTensor":
        return ComplexTensor._wrap(self.re.copy(), -self.im)

    def abs(self) -> "ComplexTensor":
        """Magnitude as a real tensor (im plane zero)."""
        mag = np.hypot(self.re, self.im)
        return ComplexTensor._wrap(mag, np.zeros_like(mag))

    def arg(self) -> "ComplexTensor":
        """Phase in (-pi, pi] as a real tensor; arg(0) is defined as 0."""
        ph = np.arctan2(self.im, self.re)
        return ComplexTensor._wrap(ph, np.zeros_like(ph))

    def scale_by_real(self, factor: float) -> "ComplexTensor":
        f = self.np_dtype(factor)
        return ComplexTensor._wrap(self.re * f, self.im * f)

    def reshape(self, new_shape) -> "ComplexTensor":
        new_shape = tuple(int(e) for e in new_shape)
        if int(np.prod(new_shape, dtype=np.int64)) != self.size:
            raise ValueError(
                f"reshape: element count mismatch, {self.shape} has {self.size} "
                f"elements but {new_shape} needs {int(np.prod(new_shape, dtype=np.int64))}"
            )
        return ComplexTensor._wrap(
            self.re.reshape(new_shape), self.im.reshape(new_shape)
        )

    def allclose(self, other: "ComplexTensor", atol: float = 0.0, rtol: float = 1e-6) -> bool:
        return bool(
            np.allclose(self.re, other.re, rtol=rtol, atol=atol)
            and np.allclose(self.im, other.im, rtol=rtol, atol=atol)
        )

    def __repr__(self):
        return f"ComplexTensor(shape={self.shape}, dtype={self.dtype})"


def write_ctns(tensor: ComplexTensor, path) -> None:
    """Serialize to the CTNS container: magic, version, dtype code, rank,
    little-endian u32 extents, then the re plane followed by the im plane
    as little-endian IEEE-754."""
    rank = len(tensor.shape)
    if rank > 255:
        raise ValueError(f"CTNS rank limit is 255, got {rank}")
    for e in tensor.shape:
        if e >= 2**32:
            raise ValueError(f"CTNS extent {e} does not fit in u32")
    wire = "<f4" if tensor.dtype == "f32" else "<f8"
    with open(path, "wb") as fh:
        fh.write(CTNS_MAGIC)
        fh.write(bytes([CTNS_VERSION, _DTYPE_CODE[tensor.dtype], rank]))
        fh.write(struct.pack(f"<{rank}I", *tensor.shape))
        fh.write(tensor.re.astype(wire, copy=False).tobytes())
        fh.write(tensor.im.astype(wire, copy=False).tobytes())


def read_ctns(path) -> ComplexTensor:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != CTNS_MAGIC:
        raise ValueError(f"{path}: bad magic {raw[:4]!r}, expected {CTNS_MAGIC!r}")
    if len(raw) < 7:
        raise ValueError(f"{path}: truncated CTNS header")
    version, dtype_code, rank = raw[4], raw[5], raw[6]
    if version != CTNS_VERSION:
        raise ValueError(f"{path}: unsupported CTNS version {version}")
    if dtype_code not in _CODE_DTYPE:
        raise ValueError(f"{path}: unknown dtype code {dtype_code}")
    dtype = _CODE_DTYPE[dtype_code]
    header_end = 7 + 4 * rank
    if len(raw) < header_end:
        raise ValueError(f"{path}: truncated extent list")
    shape = struct.unpack(f"<{rank}I", raw[7:header_end])
    count = int(np.prod(shape, dtype=np.int64)) if rank else 1
    itemsize = 4 if dtype == "f32" else 8
    expected = header_end + 2 * count * itemsize
    if len(raw) != expected:
        raise ValueError(
            f"{path}: payload size mismatch, file has {len(raw)} bytes, "
            f"shape {shape} needs {expected}"
        )
    wire = "<f4" if dtype == "f32" else "<f8"
    plane = count * itemsize
    re = np.frombuffer(raw, dtype=wire, count=count, offset=header_end)
    im = np.frombuffer(raw, dtype=wire, count=count, offset=header_end + plane)
    nptype = DTYPES[dtype]
    return ComplexTensor._wrap(
        re.astype(nptype).reshape(shape), im.astype(nptype).reshape(shape)
    )
