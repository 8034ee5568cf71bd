"""Experiment configuration: a YAML document over fixed defaults.

The default configuration reproduces the reference experiment exactly:
the bundled PCOS table, a stratified 55-row test split, five folds, the
four base learners with their published hyperparameters and a logistic
meta-learner. A config file supplies only the fields it wants to change;
unknown keys anywhere in the document are rejected before any work runs.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from importlib import resources

import yaml

from .errors import ConfigError
from .ingest import KINDS
from .learners import LearnerSpec
from .data import derive_seed
from .stacking import StackSpec

BUNDLED_DATA = "pcos_synthetic.csv"
DEFAULT_TARGET = "PCOS (Y/N)"
# the blood-group column is coded 11..18, which reads as plain numbers;
# it has to be declared nominal to get one-hot treatment
DEFAULT_OVERRIDES = (("Blood Group", "nominal_categorical"),)

# config learner sections -> algorithm registry names
LEARNER_SECTIONS = {
    "svm_rbf": "svm_rbf",
    "mlp": "mlp",
    "random_forest": "random_forest",
    "knn": "knn",
    "meta": "logistic",
}

_DISTANCES = ("euclidean", "manhattan", "minkowski3")

_TOP_KEYS = (
    "data",
    "target",
    "schema_overrides",
    "test_rows",
    "test_fraction",
    "n_folds",
    "seed",
    "stratify",
    "logit_meta_features",
    "distance",
    "out",
    "learners",
)


def _require(cond: bool, msg: str):
    if not cond:
        raise ConfigError(msg)


def _as_bool(name, v):
    _require(isinstance(v, bool), f"{name} must be true or false, got {v!r}")
    return v


def _as_int(name, v, minimum=None):
    _require(isinstance(v, int) and not isinstance(v, bool), f"{name} must be an integer, got {v!r}")
    if minimum is not None:
        _require(v >= minimum, f"{name} must be >= {minimum}, got {v}")
    return v


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated, normalized experiment settings.

    ``learners`` holds only the overrides given in the document; defaults
    are filled in when specs are built, and the resolved echo expands
    every hyperparameter explicitly.
    """

    data: str | None = None
    target: str = DEFAULT_TARGET
    schema_overrides: tuple = DEFAULT_OVERRIDES
    test_rows: int | None = 55
    test_fraction: float | None = None
    n_folds: int = 5
    seed: int = 0
    stratify: bool = True
    logit_meta_features: bool = False
    distance: str = "euclidean"
    out: str = "stackgen-run"
    learners: tuple = ()

    @classmethod
    def from_doc(cls, doc: dict | None) -> "ExperimentConfig":
        doc = {} if doc is None else doc
        _require(isinstance(doc, dict), f"config must be a mapping, got {type(doc).__name__}")
        unknown = sorted(set(doc) - set(_TOP_KEYS))
        _require(not unknown, f"unknown config keys {unknown}; valid: {sorted(_TOP_KEYS)}")

        data = doc.get("data")
        _require(data is None or isinstance(data, str), f"data must be a path string, got {data!r}")
        target = doc.get("target", DEFAULT_TARGET)
        _require(isinstance(target, str) and target.strip(), f"target must be a column name, got {target!r}")

        overrides = doc.get("schema_overrides", dict(DEFAULT_OVERRIDES))
        _require(isinstance(overrides, dict), "schema_overrides must be a mapping of column -> kind")
        for col, kind in overrides.items():
            _require(isinstance(col, str), f"schema_overrides keys must be column names, got {col!r}")
            _require(kind in KINDS, f"schema_overrides[{col!r}] must be one of {KINDS}, got {kind!r}")
        overrides = tuple(sorted(overrides.items()))

        test_rows = doc.get("test_rows")
        test_fraction = doc.get("test_fraction")
        _require(not (test_rows is not None and test_fraction is not None),
                 "give test_rows or test_fraction, not both")
        if test_rows is None and test_fraction is None:
            test_rows = 55
        if test_rows is not None:
            test_rows = _as_int("test_rows", test_rows, minimum=1)
        if test_fraction is not None:
            _require(isinstance(test_fraction, (int, float)) and not isinstance(test_fraction, bool)
                     and 0.0 < float(test_fraction) < 1.0,
                     f"test_fraction must be strictly between 0 and 1, got {test_fraction!r}")
            test_fraction = float(test_fraction)

        n_folds = _as_int("n_folds", doc.get("n_folds", 5), minimum=2)
        seed = _as_int("seed", doc.get("seed", 0))
        stratify = _as_bool("stratify", doc.get("stratify", True))
        logit_meta = _as_bool("logit_meta_features", doc.get("logit_meta_features", False))

        distance = doc.get("distance", "euclidean")
        _require(distance in _DISTANCES, f"distance must be one of {_DISTANCES}, got {distance!r}")

        out = doc.get("out", "stackgen-run")
        _require(isinstance(out, str) and out.strip(), f"out must be a directory path, got {out!r}")

        learners_doc = doc.get("learners", {})
        _require(isinstance(learners_doc, dict), "learners must be a mapping of learner -> hyperparameters")
        bad = sorted(set(learners_doc) - set(LEARNER_SECTIONS))
        _require(not bad, f"unknown learner sections {bad}; valid: {sorted(LEARNER_SECTIONS)}")
        norm = []
        for name in sorted(learners_doc):
            section = learners_doc[name]
            _require(isinstance(section, dict), f"learners.{name} must be a mapping of hyperparameters")
            if name == "knn" and "metric" in section:
                raise ConfigError("set the kNN distance through the top-level 'distance' key")
            params = tuple(sorted(section.items()))
            try:
                LearnerSpec(LEARNER_SECTIONS[name], params=_merged_params(name, params, distance))
            except ConfigError as exc:
                raise ConfigError(f"learners.{name}: {exc}") from None
            norm.append((name, params))

        return cls(
            data=data, target=target, schema_overrides=overrides,
            test_rows=test_rows, test_fraction=test_fraction,
            n_folds=n_folds, seed=seed, stratify=stratify,
            logit_meta_features=logit_meta, distance=distance,
            out=out, learners=tuple(norm),
        )

    # -- derived pieces ------------------------------------------------

    def data_path(self) -> str:
        """The CSV to load: the configured path, else the STACKGEN_PCOS_CSV
        environment variable (for pointing the default experiment at a
        locally downloaded copy of the original table), else the bundled
        synthetic stand-in."""
        if self.data is not None:
            return self.data
        env = os.environ.get("STACKGEN_PCOS_CSV")
        if env:
            return env
        return str(resources.files("stackgen").joinpath("datasets", BUNDLED_DATA))

    def overrides_dict(self) -> dict:
        return dict(self.schema_overrides)

    def fraction_for(self, n_rows: int) -> float:
        """Test fraction; exact row requests convert to a fraction whose
        ceiling lands on the requested count."""
        if self.test_fraction is not None:
            return self.test_fraction
        _require(self.test_rows < n_rows, f"test_rows={self.test_rows} but the table has {n_rows} rows")
        return (self.test_rows - 0.5) / n_rows

    def _learner_params(self, section: str) -> tuple:
        for name, params in self.learners:
            if name == section:
                return params
        return ()

    def stack_spec(self) -> StackSpec:
        """The experiment's stack: base specs in fixed order, seeds derived
        from the run seed so every fit is reproducible from the config."""
        stack_seed = derive_seed(self.seed, "stack")
        base = []
        for j, section in enumerate(("svm_rbf", "mlp", "random_forest", "knn")):
            algo = LEARNER_SECTIONS[section]
            params = _merged_params(section, self._learner_params(section), self.distance)
            base.append(LearnerSpec(algo, seed=derive_seed(stack_seed, f"base-{j}-{algo}"),
                                    params=params))
        meta = LearnerSpec("logistic", seed=derive_seed(stack_seed, "meta"),
                           params=self._learner_params("meta"))
        return StackSpec(base=tuple(base), meta=meta, n_folds=self.n_folds,
                         seed=stack_seed, logit_meta_inputs=self.logit_meta_features)

    # -- serialization -------------------------------------------------

    def to_doc(self) -> dict:
        return {
            "data": self.data,
            "target": self.target,
            "schema_overrides": dict(self.schema_overrides),
            "test_rows": self.test_rows,
            "test_fraction": self.test_fraction,
            "n_folds": self.n_folds,
            "seed": self.seed,
            "stratify": self.stratify,
            "logit_meta_features": self.logit_meta_features,
            "distance": self.distance,
            "out": self.out,
            "learners": {name: dict(params) for name, params in self.learners},
        }

    def resolved_doc(self) -> dict:
        """The config echo: every field explicit, every hyperparameter
        expanded to its effective value. Feeding this document back in
        reproduces the run."""
        doc = self.to_doc()
        spec = self.stack_spec()
        learners = {}
        for section, bspec in zip(("svm_rbf", "mlp", "random_forest", "knn"), spec.base):
            params = bspec.params_dict()
            if section == "knn":
                params.pop("metric")  # echoed via the distance key
            learners[section] = params
        learners["meta"] = spec.meta.params_dict()
        doc["learners"] = learners
        return doc


def _merged_params(section: str, params: tuple, distance: str) -> tuple:
    if section == "knn":
        return params + (("metric", distance),)
    return params


def load_config(path: str) -> ExperimentConfig:
    """Parse and validate a YAML config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from None
    return ExperimentConfig.from_doc(doc)


def default_config() -> ExperimentConfig:
    """The reproduction preset."""
    return ExperimentConfig.from_doc({})


def dump_config(doc: dict) -> str:
    return yaml.safe_dump(doc, sort_keys=True, default_flow_style=False)
