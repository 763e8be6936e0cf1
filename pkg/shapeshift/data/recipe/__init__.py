import os

from ...utils import import_modules
from ...utils.errors import UnknownRecipeError


RECIPE_FACTORY = {}

def RecipeFactory(recipe_name):
    recipe = RECIPE_FACTORY.get(recipe_name)
    if recipe is None:
        raise UnknownRecipeError(recipe_name, RECIPE_FACTORY)
    return recipe()


def register_recipe(name):
    def register_recipe_cls(cls):
        if name in RECIPE_FACTORY:
            return RECIPE_FACTORY[name]
        cls.name = name
        RECIPE_FACTORY[name] = cls
        return cls
    return register_recipe_cls


# automatically import any Python files in the recipe/ directory
recipes_dir = os.path.dirname(__file__)
import_modules(recipes_dir, "shapeshift.data.recipe")


def domain_oracle(shape, recipe_name):
    """"domain1", "domain2" or "uncertain" from the recipe's analytic measure."""
    cells = shape.cells if hasattr(shape, "cells") else shape
    return RecipeFactory(recipe_name).classify(cells)
