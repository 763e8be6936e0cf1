from .array import DiffArray, as_tensor, precision, set_precision
from .graph import Graph, Node, apply, current_graph, forward, gradient, no_record
from . import ops
from .optim import AdamState, adam_step
