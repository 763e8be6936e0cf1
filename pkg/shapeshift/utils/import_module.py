import importlib
import os


def import_modules(modules_dir, namespace):
    for file in sorted(os.listdir(modules_dir)):
        path = os.path.join(modules_dir, file)
        if (
            not file.startswith("_")
            and not file.startswith(".")
            and file.endswith(".py")
        ):
            module_name = file[: file.find(".py")]
            importlib.import_module(namespace + "." + module_name)
        elif os.path.isdir(path) and os.path.exists(os.path.join(path, "__init__.py")) and not file.startswith("_"):
            importlib.import_module(namespace + "." + file)
