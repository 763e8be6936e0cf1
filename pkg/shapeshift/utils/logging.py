import logging
import os
import sys


root_logger = None

FORMAT = "%(asctime)s | %(levelname)s: %(message)s"


def logger_setting(save_dir=None):
    global root_logger
    if root_logger is None:
        root_logger = logging.getLogger()
        root_logger.setLevel(logging.INFO)
        ch = logging.StreamHandler(stream=sys.stdout)
        ch.setLevel(logging.INFO)
        ch.setFormatter(logging.Formatter(FORMAT))
        root_logger.addHandler(ch)

    if save_dir:
        os.makedirs(save_dir, exist_ok=True)
        save_file = os.path.abspath(os.path.join(save_dir, 'log.txt'))
        known = {getattr(h, 'baseFilename', None) for h in root_logger.handlers}
        if save_file not in known:
            fh = logging.FileHandler(save_file, mode='a')
            fh.setLevel(logging.INFO)
            fh.setFormatter(logging.Formatter(FORMAT))
            root_logger.addHandler(fh)
    return root_logger


def log(*args):
    (root_logger or logging.getLogger()).info(*args)


def log_trainable_params(network, name=None):
    total = network.num_parameters()
    log(f'{name or network.spec.role}: {total} parameters')
    for param_name, value in network.named_parameters():
        logging.getLogger(__name__).debug(f"{param_name}: {value.numel()} parameters")
