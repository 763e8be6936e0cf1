"""Append-only computation graph with a tape-on-tape backward pass.

Operations on :class:`DiffArray` values record nodes on the active
:class:`Graph`. :func:`gradient` walks the nodes in reverse and evaluates
each primitive's vector-Jacobian product with ordinary DiffArray operations;
with ``as_graph=True`` those operations are recorded as further nodes, so the
result can be differentiated again (needed for the gradient penalty).
"""
import contextlib
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import torch

from ..utils.constants import DEBUG_GRAPH_ENV
from ..utils.errors import NonFiniteError, ShapeMismatchError
from .primitive import PrimitiveFactory

logger = logging.getLogger(__name__)

_GRAPH_STACK: List["Graph"] = []


@dataclass
class Node:
    op: str
    parents: Tuple[Optional[int], ...]
    constants: Tuple[Optional[torch.Tensor], ...]
    attrs: Dict[str, Any]
    value: torch.Tensor


@dataclass
class Graph:
    nodes: List[Node] = field(default_factory=list)
    inputs: Dict[str, int] = field(default_factory=dict)
    outputs: Dict[str, int] = field(default_factory=dict)
    check_finite: bool = True
    strict: bool = False
    nonfinite_nodes: List[int] = field(default_factory=list)
    recording: bool = True

    def __enter__(self):
        _GRAPH_STACK.append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        popped = _GRAPH_STACK.pop()
        assert popped is self, "graph contexts must be strictly nested"
        if os.environ.get(DEBUG_GRAPH_ENV):
            self.dump_edges(os.environ[DEBUG_GRAPH_ENV])
        return False

    def __len__(self):
        return len(self.nodes)

    def input(self, name, value):
        """Declare an entry point; the returned array is differentiable."""
        from .array import DiffArray, as_tensor

        if name in self.inputs:
            raise ValueError(f"input {name!r} already declared")
        value = as_tensor(value)
        node_id = self._append(Node("input", (), (), {"name": name}, value))
        self.inputs[name] = node_id
        return DiffArray(value, node_id, self)

    def bind(self, params, prefix=""):
        """Declare every tensor of a parameter dict as a named input."""
        return {name: self.input(prefix + name, value) for name, value in params.items()}

    def output(self, name, array):
        if array.graph is not self:
            raise ValueError(f"output {name!r} does not belong to this graph")
        self.outputs[name] = array.node_id
        return array

    def handle(self, node_id):
        from .array import DiffArray

        return DiffArray(self.nodes[node_id].value, node_id, self)

    def _append(self, node):
        node_id = len(self.nodes)
        self.nodes.append(node)
        if self.check_finite and node.value.is_floating_point() and not torch.isfinite(node.value).all():
            self.nonfinite_nodes.append(node_id)
            if self.strict:
                raise NonFiniteError(f"non-finite value produced by {node.op}", node_id=node_id)
            logger.warning(f"non-finite value produced by {node.op} at node {node_id}")
        return node_id

    def record(self, op, operands, attrs, value):
        parents = tuple(o.node_id if o.graph is self else None for o in operands)
        constants = tuple(None if o.graph is self else o.data for o in operands)
        return self._append(Node(op, parents, constants, dict(attrs), value))

    def replay(self, inputs):
        """Re-execute every recorded node with new input values.

        Recorded values are left untouched; the named outputs of the replay
        are returned as constants.
        """
        from .array import DiffArray, as_tensor

        missing = set(self.inputs) - set(inputs)
        if missing:
            raise ValueError(f"unbound graph inputs: {', '.join(sorted(missing))}")
        values = []
        for node_id, node in enumerate(self.nodes):
            if node.op == "input":
                value = as_tensor(inputs[node.attrs["name"]])
                if list(value.shape) != list(node.value.shape):
                    raise ShapeMismatchError(
                        f"input {node.attrs['name']!r} has shape {list(value.shape)}, "
                        f"recorded {list(node.value.shape)}", node_id=node_id)
            else:
                operands = [values[p] if p is not None else c for p, c in zip(node.parents, node.constants)]
                try:
                    value = PrimitiveFactory(node.op).forward(*operands, **node.attrs)
                except ShapeMismatchError as e:
                    raise ShapeMismatchError(str(e), node_id=node_id) from e
            values.append(value)
        return {name: DiffArray(values[node_id]) for name, node_id in self.outputs.items()}

    def dump_edges(self, path=None):
        lines = []
        for node_id, node in enumerate(self.nodes):
            label = node.attrs.get("name", "") if node.op == "input" else ""
            lines.append(f"{node_id} {node.op} {list(node.value.shape)} {label}".rstrip())
            for parent in node.parents:
                if parent is not None:
                    lines.append(f"{parent} -> {node_id}")
        text = "\n".join(lines) + "\n"
        if path:
            with open(path, "w") as f:
                f.write(text)
        return text


def current_graph():
    if _GRAPH_STACK and _GRAPH_STACK[-1].recording:
        return _GRAPH_STACK[-1]
    return None


@contextlib.contextmanager
def no_record():
    """Evaluate operations as constants even inside an active graph."""
    graph = _GRAPH_STACK[-1] if _GRAPH_STACK else None
    if graph is None:
        yield
        return
    previous = graph.recording
    graph.recording = False
    try:
        yield
    finally:
        graph.recording = previous


def apply(op, *operands, **attrs):
    """Evaluate primitive ``op`` and record it when any operand is tracked."""
    from .array import DiffArray

    primitive = PrimitiveFactory(op)
    graph = current_graph()
    for o in operands:
        if o.graph is not None and graph is not None and o.graph is not graph:
            raise ValueError(f"{op}: operand belongs to a different graph")
    try:
        value = primitive.forward(*[o.data for o in operands], **attrs)
    except ShapeMismatchError as e:
        node_id = len(graph.nodes) if graph is not None else None
        raise ShapeMismatchError(f"{op}: {e}", node_id=node_id) from e
    if graph is None or not any(o.graph is graph for o in operands):
        return DiffArray(value)
    return DiffArray(value, graph.record(op, operands, attrs, value), graph)


def forward(graph, inputs):
    """Evaluate ``graph`` on ``inputs`` (name -> array) and return its named outputs."""
    return graph.replay(inputs)


def gradient(output, wrt, as_graph=False):
    """Reverse-mode gradient of a scalar ``output`` with respect to ``wrt``.

    With ``as_graph=False`` the results are constants. With ``as_graph=True``
    the backward pass is recorded on the same graph and the returned arrays
    are nodes that can enter further losses.
    """
    from .array import DiffArray
    from . import ops

    if output.numel != 1:
        raise ShapeMismatchError(f"gradient needs a scalar output, got shape {output.shape}")
    wrt = list(wrt)
    graph = output.graph
    if graph is None:
        for w in wrt:
            logger.warning("gradient of a constant output; returning zeros")
        return [DiffArray(torch.zeros_like(w.data)) for w in wrt]

    targets = {w.node_id for w in wrt if w.graph is graph}
    relevant = set()
    for node_id in range(output.node_id + 1):
        node = graph.nodes[node_id]
        if node_id in targets or any(p is not None and p in relevant for p in node.parents):
            relevant.add(node_id)

    grads = {}
    if output.node_id in relevant:
        grads[output.node_id] = DiffArray(torch.ones_like(output.data))

    record_ctx = contextlib.nullcontext() if as_graph else no_record()
    if as_graph and current_graph() is not graph:
        raise ValueError("as_graph=True needs the output's graph to be the active recording graph")
    with record_ctx:
        for node_id in range(output.node_id, -1, -1):
            if node_id not in grads:
                continue
            node = graph.nodes[node_id]
            if node.op == "input":
                continue
            needs = tuple(p is not None and p in relevant for p in node.parents)
            if not any(needs):
                continue
            grad_out = grads[node_id] if node_id in targets else grads.pop(node_id)
            inputs = tuple(graph.handle(p) if p is not None else DiffArray(c)
                           for p, c in zip(node.parents, node.constants))
            parent_grads = PrimitiveFactory(node.op).vjp(
                grad_out, inputs, graph.handle(node_id), needs, **node.attrs)
            for parent, need, parent_grad in zip(node.parents, needs, parent_grads):
                if not need or parent_grad is None:
                    continue
                if parent in grads:
                    grads[parent] = ops.add(grads[parent], parent_grad)
                else:
                    grads[parent] = parent_grad

    results = []
    for w in wrt:
        if w.graph is graph and w.node_id in grads:
            g = grads[w.node_id]
            results.append(g if as_graph else DiffArray(g.data))
        else:
            logger.warning(f"gradient target (node {w.node_id}) is unreachable from the output; using zeros")
            results.append(DiffArray(torch.zeros_like(w.data)))
    return results
