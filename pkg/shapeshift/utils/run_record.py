import json
import os
import platform
import subprocess
import sys
import time

import torch


def git_describe():
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            capture_output=True, text=True, timeout=10,
            cwd=os.path.dirname(os.path.abspath(__file__)),
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() or "unknown"


class RunRecord:
    """Context manager writing run_record.json next to a command's outputs."""

    def __init__(self, output_dir, command, args=None, config=None, seed=None):
        self.output_dir = output_dir
        self.command = command
        self.args = args or {}
        self.config = config
        self.seed = seed
        self.started = None
        self.extra = {}

    def __enter__(self):
        self.started = time.time()
        return self

    def __exit__(self, exc_type, exc, tb):
        record = {
            "command": self.command,
            "args": {k: (v if isinstance(v, (int, float, str, bool, type(None), list)) else str(v))
                     for k, v in self.args.items()},
            "config_hash": self.config.config_hash() if self.config is not None else None,
            "config": self.config.to_dict() if self.config is not None else None,
            "seed": self.seed,
            "git_describe": git_describe(),
            "wall_time_s": round(time.time() - self.started, 3),
            "status": "ok" if exc_type is None else f"failed: {exc_type.__name__}",
            "python": sys.version.split()[0],
            "torch": torch.__version__,
            "platform": platform.platform(),
        }
        record.update(self.extra)
        os.makedirs(self.output_dir, exist_ok=True)
        with open(os.path.join(self.output_dir, "run_record.json"), "w") as f:
            json.dump(record, f, indent=2, sort_keys=True)
        return False
