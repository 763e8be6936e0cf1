from .grids import *
from .grid_io import *
from .oracle import *
from .recipe import RECIPE_FACTORY, RecipeFactory, domain_oracle, register_recipe
from .dataset import *
