from .arguments import *
from .constants import *
from .errors import *
from .import_module import *
from .logging import *
from .rng import *
from .run_record import *
