import os

from ...utils import import_modules


PRIMITIVE_FACTORY = {}


def PrimitiveFactory(name):
    primitive = PRIMITIVE_FACTORY.get(name)
    if primitive is None:
        raise KeyError(f"{name} is not a registered primitive")
    return primitive


def register_primitive(name):
    def register_primitive_cls(cls):
        if name in PRIMITIVE_FACTORY:
            return PRIMITIVE_FACTORY[name]
        cls.name = name
        PRIMITIVE_FACTORY[name] = cls
        return cls
    return register_primitive_cls


# automatically import any Python files in the primitive/ directory
primitives_dir = os.path.dirname(__file__)
import_modules(primitives_dir, "shapeshift.autodiff.primitive")
