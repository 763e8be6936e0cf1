from .configuration import *
from .network import NETWORK_FACTORY, NetworkFactory, build_network, register_network
from .latent import *
from .autoencoder import *
from .checkpoint import *
