from .geometry import *
from .field import *
from .marching_squares import *
from .marching_cubes import *
from .surface import *
from .export import *
from .pipeline import *
