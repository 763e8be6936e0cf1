import contextlib

import numpy as np
import torch

PRECISIONS = {"float32": torch.float32, "float64": torch.float64}


def as_tensor(value):
    if isinstance(value, DiffArray):
        return value.data
    if isinstance(value, torch.Tensor):
        return value
    if isinstance(value, np.ndarray):
        if np.issubdtype(value.dtype, np.floating) or value.dtype == bool:
            return torch.as_tensor(value, dtype=torch.get_default_dtype())
        return torch.as_tensor(value)
    return torch.as_tensor(value, dtype=torch.get_default_dtype())


@contextlib.contextmanager
def precision(name):
    """Run a block with 32-bit or 64-bit floating values."""
    if name not in PRECISIONS:
        raise ValueError(f"unknown precision {name!r}; expected one of {sorted(PRECISIONS)}")
    previous = torch.get_default_dtype()
    torch.set_default_dtype(PRECISIONS[name])
    try:
        yield
    finally:
        torch.set_default_dtype(previous)


def set_precision(name):
    if name not in PRECISIONS:
        raise ValueError(f"unknown precision {name!r}; expected one of {sorted(PRECISIONS)}")
    torch.set_default_dtype(PRECISIONS[name])


class DiffArray:
    """Immutable shaped array, optionally a node of a computation graph."""

    __slots__ = ("data", "node_id", "graph")
    __array_priority__ = 1000

    def __init__(self, data, node_id=None, graph=None):
        self.data = as_tensor(data)
        self.node_id = node_id
        self.graph = graph

    @property
    def shape(self):
        return list(self.data.shape)

    @property
    def ndim(self):
        return self.data.dim()

    @property
    def numel(self):
        return self.data.numel()

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def requires_grad(self):
        return self.graph is not None

    def item(self):
        return self.data.item()

    def numpy(self):
        return self.data.detach().cpu().numpy()

    def detach(self):
        return DiffArray(self.data)

    def __repr__(self):
        tag = f", node={self.node_id}" if self.node_id is not None else ""
        return f"DiffArray(shape={self.shape}{tag})"

    def __add__(self, other):
        return ops.add(self, other)

    def __radd__(self, other):
        return ops.add(other, self)

    def __sub__(self, other):
        return ops.sub(self, other)

    def __rsub__(self, other):
        return ops.sub(other, self)

    def __mul__(self, other):
        return ops.mul(self, other)

    def __rmul__(self, other):
        return ops.mul(other, self)

    def __truediv__(self, other):
        return ops.div(self, other)

    def __rtruediv__(self, other):
        return ops.div(other, self)

    def __neg__(self):
        return ops.neg(self)

    def __matmul__(self, other):
        return ops.matmul(self, other)

    def __getitem__(self, index):
        return ops.getitem(self, index)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (list, tuple)):
            shape = shape[0]
        return ops.reshape(self, shape)

    def sum(self, axis=None, keepdims=False):
        return ops.sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return ops.mean(self, axis=axis, keepdims=keepdims)


from . import ops  # noqa: E402  (ops needs DiffArray defined)
