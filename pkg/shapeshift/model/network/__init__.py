import os

from ...utils import import_modules


NETWORK_FACTORY = {}

def NetworkFactory(role):
    network = NETWORK_FACTORY.get(role)
    assert network, f"{role} is not registered"
    return network


def register_network(role):
    def register_network_cls(cls):
        if role in NETWORK_FACTORY:
            return NETWORK_FACTORY[role]
        NETWORK_FACTORY[role] = cls
        return cls
    return register_network_cls


def build_network(spec, params=None):
    return NetworkFactory(spec.role)(spec, params)


# automatically import any Python files in the network/ directory
networks_dir = os.path.dirname(__file__)
import_modules(networks_dir, "shapeshift.model.network")
