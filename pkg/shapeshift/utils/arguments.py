import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import List, Optional

import transformers

from .constants import MAX_POINTS_PER_SHAPE


@dataclass
class ModelArguments:
    dims: int = field(default=2, metadata={"help": "2 for images, 3 for voxel grids."})
    n: int = field(default=256, metadata={"help": "Input extent per axis."})
    k: int = field(default=2, metadata={"help": "Latent grid extent per axis."})
    m: int = field(default=64, metadata={"help": "Latent code length (channels)."})
    encoding: str = field(
        default='position-aware',
        metadata={"help": "position-aware (latent grid) or regular (flat code, baseline)."}
    )
    encoder_base_channels: int = field(default=16)
    decoder_hidden: List[int] = field(default_factory=lambda: [512, 256, 128])
    generator_channels: int = field(default=256)
    critic_channels: int = field(default=256)
    translator_kernel: int = field(
        default=3,
        metadata={"help": "Kernel of generator/critic convs; recorded in checkpoints."}
    )

    @property
    def encoder_depth(self):
        return int(round(math.log2(self.n / self.k)))


@dataclass
class DataArguments:
    recipe: Optional[str] = field(default='thick-thin', metadata={"help": "Synthetic recipe name."})
    data_path: Optional[str] = field(default=None, metadata={"help": "Root of a domain pair set on disk."})
    count: int = field(default=64, metadata={"help": "Shapes per domain for synthetic recipes."})
    extent: Optional[int] = field(default=None, metadata={"help": "Raster extent; defaults to n."})
    test_fraction: float = field(default=0.25)


@dataclass
class RunArguments:
    experiment_name: str = field(default='default')
    output_dir: str = field(default='runs/default')
    seed: int = field(default=0)
    precision: str = field(default='float32', metadata={"help": "float32 or float64."})
    deterministic: bool = field(default=False)
    num_workers: int = field(default=0, metadata={"help": "Sampling workers feeding the AE trainer."})
    preset: str = field(default='full', metadata={"help": "Label recorded in checkpoints."})


@dataclass
class AeConfig:
    epochs: int = field(default=800)
    batch_size: int = field(default=24)
    learning_rate: float = field(default=5e-5)
    lr_halving_epoch: int = field(default=400)
    resolution_schedule: List[int] = field(
        default_factory=lambda: [16, 32, 64, 256],
        metadata={"help": "Progressive sampling resolutions; epochs are split evenly."}
    )
    max_points_per_shape: int = field(default=MAX_POINTS_PER_SHAPE)
    boundary_fraction: float = field(default=0.5)
    save_every: int = field(default=100)


@dataclass
class TransConfig:
    epochs: int = field(default=1200)
    batch_size: int = field(default=128)
    learning_rate: float = field(default=2e-3)
    lr_halving_interval: int = field(default=100)
    lr_floor: float = field(default=5e-4)
    alpha: float = field(default=10.0, metadata={"help": "Gradient penalty weight."})
    beta: float = field(default=20.0, metadata={"help": "Feature preservation weight."})
    gamma: float = field(default=20.0, metadata={"help": "Cycle consistency weight."})
    n_critic: int = field(default=5)
    save_every: int = field(default=100)
    identity_warmup_steps: int = field(default=0)


CONFIG_SECTIONS = {
    "model": ModelArguments,
    "data": DataArguments,
    "run": RunArguments,
    "ae": AeConfig,
    "trans": TransConfig,
}


@dataclass
class RunConfig:
    model: ModelArguments = field(default_factory=ModelArguments)
    data: DataArguments = field(default_factory=DataArguments)
    run: RunArguments = field(default_factory=RunArguments)
    ae: AeConfig = field(default_factory=AeConfig)
    trans: TransConfig = field(default_factory=TransConfig)

    def __post_init__(self):
        self.validate()

    def validate(self):
        model = self.model
        if model.dims not in (2, 3):
            raise ValueError(f"dims must be 2 or 3, got {model.dims}")
        ratio = model.n / model.k
        if model.k < 1 or ratio < 1 or 2 ** model.encoder_depth != ratio:
            raise ValueError(f"n / 2**depth must equal k; got n={model.n}, k={model.k}")
        if model.encoding not in ('position-aware', 'regular'):
            raise ValueError(f"unknown encoding {model.encoding!r}")
        if model.encoding == 'regular' and (model.m % 4 or model.encoder_depth < 4):
            raise ValueError("regular encoding needs m divisible by 4 and at least four encoder stages")
        if self.run.precision not in ('float32', 'float64'):
            raise ValueError(f"precision must be float32 or float64, got {self.run.precision!r}")
        if not self.ae_resolutions():
            raise ValueError(f"no sampling resolution in {self.ae.resolution_schedule} fits n={model.n}")
        for res in self.ae_resolutions():
            if model.n % res:
                raise ValueError(f"sampling resolution {res} must divide n={model.n}")
        extent = self.data.extent or model.n
        if extent != model.n:
            raise ValueError(f"data extent {extent} must equal n={model.n}")

    def ae_resolutions(self):
        """Progressive schedule restricted to resolutions the input extent supports."""
        return [res for res in self.ae.resolution_schedule if res <= self.model.n]

    @classmethod
    def from_dict(cls, values):
        """Build from a nested dict: {"model": {...}, "data": {...}, ...}.

        Every section is parsed by HfArgumentParser so unknown keys are
        rejected the same way a command line would reject them.
        """
        unknown = set(values) - set(CONFIG_SECTIONS)
        if unknown:
            raise ValueError(f"unknown config sections: {', '.join(sorted(unknown))}")
        parts = {}
        for section, dtype in CONFIG_SECTIONS.items():
            parser = transformers.HfArgumentParser(dtype)
            (parts[section],) = parser.parse_dict(values.get(section, {}))
        return cls(**parts)

    @classmethod
    def from_json(cls, path):
        with open(path, "r") as f:
            return cls.from_dict(json.load(f))

    def to_dict(self):
        return {section: dataclasses.asdict(getattr(self, section)) for section in CONFIG_SECTIONS}

    def config_hash(self):
        payload = json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(payload).hexdigest()
