"""Flat JSON experiment configuration.

Example::

    {"P": [[1, 0], [0, 2]], "extent": 16, "points": 128, "seeds": 32,
     "eps": 0.125, "suites": ["T1.2", "T5.1"], "alpha": [0.5, 1.0],
     "p": [1.5, 2, 3], "k": [1, 2], "output_dir": "out"}

``alpha`` may be omitted (default cells per tag), a list applied to every
tag, or an object mapping tags to lists.  ``beta`` may be omitted (the
default weights per ``p``) or a list.
"""

import json
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .dilation import make_dilation_group
from .exceptions import AnisoLPError, ConfigError
from .fields import GridSpec
from .sobolev import DIAG12, TAGS, Family, check_params


@dataclass
class ExperimentConfig:
    P: list = field(default_factory=lambda: DIAG12.tolist())
    extent: float = 16.0
    points: int = 128
    seeds: int = 32
    eps: float = 0.125
    master_seed: int = 0
    suites: list = field(default_factory=lambda: list(TAGS))
    alpha: object = None
    p: list = field(default_factory=lambda: [1.5, 2.0, 3.0])
    beta: list = None
    k: list = field(default_factory=lambda: [1, 2])
    refine: bool = True
    output_dir: str = "aniso_lp_out"
    threads: int = None
    verify_points: int = 128

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigError("configuration must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                d = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
        return cls.from_dict(d)

    def to_dict(self):
        return asdict(self)

    # -- derived objects --------------------------------------------------

    @property
    def group(self):
        return make_dilation_group(np.asarray(self.P, dtype=float))

    @property
    def grid(self):
        return GridSpec.cube(self.group.dim, float(self.extent), int(self.points))

    @property
    def family(self):
        return Family(int(self.seeds), float(self.eps), self.grid, int(self.master_seed))

    def cells(self):
        """``(tag, alpha, k, construction)`` cells implied by the configuration."""
        from .suites import default_sweep_cells

        G = self.group
        if self.alpha is None:
            return [c for c in default_sweep_cells(G) if c[0] in self.suites]
        out = []
        for tag in self.suites:
            alphas = self.alpha.get(tag, []) if isinstance(self.alpha, dict) else self.alpha
            if tag == "T1.4":
                out.append(("T1.4", None, 1, "radial"))
            if tag == "T5.1":
                out.append(("T5.1", 2.0, 1, "kernel"))
                continue
            ks = self.k if tag in ("T4.1", "T4.2") else [1]
            for a in alphas:
                for k in ks:
                    out.append((tag, float(a), int(k), "kernel"))
        return out

    # -- validation -------------------------------------------------------

    def validate(self):
        try:
            self._validate()
        except ConfigError:
            raise
        except AnisoLPError as exc:
            raise type(exc)(f"invalid configuration: {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid configuration: {exc}") from exc

    def _validate(self):
        G = self.group
        if not isinstance(self.points, int) or not isinstance(self.verify_points, int):
            raise ConfigError("points must be integers")
        GridSpec.cube(G.dim, float(self.extent), self.points)
        GridSpec.cube(G.dim, float(self.extent), self.verify_points)
        if not isinstance(self.seeds, int) or self.seeds < 2:
            raise ConfigError("seeds must be an integer >= 2")
        if not 0 < float(self.eps) < 0.5:
            raise ConfigError("eps must lie in (0, 1/2)")
        if not isinstance(self.master_seed, int):
            raise ConfigError("master_seed must be an integer")
        bad = [t for t in self.suites if t not in TAGS]
        if bad:
            raise ConfigError(f"unknown suites {bad}; expected tags from {list(TAGS)}")
        if not self.p or any(not float(p) > 1 for p in self.p):
            raise ConfigError("every p must exceed 1")
        if self.beta is not None and not isinstance(self.beta, list):
            raise ConfigError("beta must be a list or null")
        if any(not isinstance(k, int) or k < 1 for k in self.k):
            raise ConfigError("k must be a list of positive integers")
        if self.threads is not None and (not isinstance(self.threads, int) or self.threads < 1):
            raise ConfigError("threads must be a positive integer")
        if self.alpha is not None and not isinstance(self.alpha, (list, dict)):
            raise ConfigError("alpha must be a list, an object keyed by tag, or null")
        if isinstance(self.alpha, dict):
            extra = sorted(set(self.alpha) - set(TAGS))
            if extra:
                raise ConfigError(f"alpha given for unknown tags {extra}")
        for tag, a, k, construction in self.cells():
            check_params(tag, G, a, k, construction)
