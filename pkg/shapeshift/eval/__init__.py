from .metrics import *
from .retrieval import *
from .evaluate import *
