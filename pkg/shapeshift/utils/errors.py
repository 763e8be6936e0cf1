class ShapeshiftError(Exception):
    pass


class ShapeMismatchError(ShapeshiftError, ValueError):
    def __init__(self, message, node_id=None):
        if node_id is not None:
            message = f"node {node_id}: {message}"
        super().__init__(message)
        self.node_id = node_id


class NonFiniteError(ShapeshiftError, FloatingPointError):
    def __init__(self, message, node_id=None, component=None):
        if node_id is not None:
            message = f"node {node_id}: {message}"
        if component is not None:
            message = f"{component}: {message}"
        super().__init__(message)
        self.node_id = node_id
        self.component = component


class UnknownRecipeError(ShapeshiftError, KeyError):
    def __init__(self, name, known):
        super().__init__(f"unknown recipe {name!r}; known recipes: {', '.join(sorted(known))}")
        self.name = name
        self.known = sorted(known)

    def __str__(self):
        return self.args[0]


class DatasetError(ShapeshiftError, ValueError):
    def __init__(self, message, offenders=()):
        offenders = list(offenders)
        if offenders:
            message = f"{message}: {', '.join(map(str, offenders))}"
        super().__init__(message)
        self.offenders = offenders


class CheckpointError(ShapeshiftError, OSError):
    pass


class MemoryBudgetError(ShapeshiftError, MemoryError):
    pass
