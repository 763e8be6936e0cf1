from .losses import *
from .pretrain import *
from .ae_trainer import *
from .translator_trainer import *
from .train import *
