"""Experiment configuration stored as a YAML document."""

import copy
import os
from dataclasses import asdict, dataclass, field, fields

import yaml

from .errors import ConfigError
from .simdata import REFERENCE_BETA, REFERENCE_GAMMA, REFERENCE_PAIRS

ESTIMATOR_KINDS = {
    "independence": {"K"},
    "empirical": {"K", "bandwidth", "bandwidth_scale"},
    "gaussian": {"K", "jitter", "antithetic", "true_params"},
    "separate": {"family", "lam", "k", "weights", "degree"},
    "surrogate": {"family", "lam", "k", "weights", "degree", "coalitions_per_row"},
}


@dataclass
class EstimatorConfig:
    name: str
    kind: str
    options: dict = field(default_factory=dict)

    def validate(self):
        if self.kind not in ESTIMATOR_KINDS:
            raise ConfigError(f"estimator {self.name!r}: unknown kind {self.kind!r}")
        extra = set(self.options) - ESTIMATOR_KINDS[self.kind]
        if extra:
            raise ConfigError(f"estimator {self.name!r}: unsupported options {sorted(extra)}")
        if not self.name or "|" in self.name or "/" in self.name:
            raise ConfigError(f"bad estimator name {self.name!r}")
        K = self.options.get("K")
        if K is not None and (not isinstance(K, int) or K < 1):
            raise ConfigError(f"estimator {self.name!r}: K must be a positive integer")


def default_estimators():
    return [
        EstimatorConfig("independence", "independence", {"K": 1000}),
        EstimatorConfig("empirical", "empirical", {"K": 1000, "bandwidth_scale": 0.1}),
        EstimatorConfig("gaussian", "gaussian", {"K": 1000, "jitter": 1e-8}),
        EstimatorConfig("separate_poly", "separate", {"family": "poly", "degree": 2, "lam": 1e-4}),
        EstimatorConfig("separate_knn", "separate", {"family": "knn", "k": 25}),
        EstimatorConfig("surrogate_poly", "surrogate",
                        {"family": "poly", "degree": 2, "lam": 1e-4, "coalitions_per_row": 16}),
    ]


@dataclass
class ExperimentConfig:
    M: int = 8
    rho: float = 0.5
    n_train: int = 1000
    n_test: int = 250
    seed: int = 2024
    beta: list = field(default_factory=lambda: list(REFERENCE_BETA))
    gamma: list = field(default_factory=lambda: list(REFERENCE_GAMMA))
    pairs: list = field(default_factory=lambda: [list(p) for p in REFERENCE_PAIRS])
    noise_sd: float = 1.0
    model: str = "fitted-basis"
    model_lambda: float = 1e-6
    estimators: list = field(default_factory=default_estimators)
    truth_method: str = "auto"
    K_truth: int = 50_000
    top_k: int = 3
    relative_floor: float = 0.1
    permutation_shuffles: int = 10_000
    plots: bool = True
    output_dir: str = "out"

    def validate(self):
        if not isinstance(self.M, int) or not 2 <= self.M <= 20:
            raise ConfigError(f"M must be an integer in 2..20, got {self.M!r}")
        if not abs(self.rho) < 1:
            raise ConfigError(f"|rho| must be < 1, got {self.rho}")
        for key in ("n_train", "n_test", "K_truth", "top_k"):
            v = getattr(self, key)
            if not isinstance(v, int) or v < 1:
                raise ConfigError(f"{key} must be a positive integer, got {v!r}")
        if self.n_train < 2:
            raise ConfigError("n_train must be at least 2")
        if len(self.beta) != self.M + 1:
            raise ConfigError(f"beta needs M+1={self.M + 1} entries, got {len(self.beta)}")
        if len(self.gamma) != len(self.pairs):
            raise ConfigError("gamma and pairs must have equal length")
        for p in self.pairs:
            if len(p) != 2 or not all(1 <= j <= self.M for j in p) or p[0] == p[1]:
                raise ConfigError(f"bad interaction pair {p}")
        if not self.noise_sd > 0:
            raise ConfigError("noise_sd must be positive")
        if self.model not in ("fitted-basis", "analytic"):
            raise ConfigError(f"model must be 'fitted-basis' or 'analytic', got {self.model!r}")
        if self.truth_method not in ("auto", "exact", "mc"):
            raise ConfigError(f"truth_method must be auto, exact or mc, got {self.truth_method!r}")
        if not self.estimators:
            raise ConfigError("at least one estimator is required")
        names = [e.name for e in self.estimators]
        if len(set(names)) != len(names) or "truth" in names:
            raise ConfigError(f"estimator names must be unique and not 'truth': {names}")
        for e in self.estimators:
            e.validate()
        return self

    def to_dict(self):
        d = asdict(self)
        d["estimators"] = [
            {"name": e.name, "kind": e.kind, **copy.deepcopy(e.options)} for e in self.estimators
        ]
        return d

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigError("configuration must be a mapping")
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        d = copy.deepcopy(d)
        if "estimators" in d:
            ests = []
            for raw in d["estimators"]:
                if not isinstance(raw, dict) or "kind" not in raw:
                    raise ConfigError(f"estimator entry needs a 'kind': {raw!r}")
                raw = dict(raw)
                kind = raw.pop("kind")
                name = raw.pop("name", kind)
                ests.append(EstimatorConfig(str(name), str(kind), raw))
            d["estimators"] = ests
        try:
            cfg = cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        return cfg.validate()

    def dump(self):
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=None)


def load_config(path):
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    return ExperimentConfig.from_dict(data or {})


def parse_config(text):
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}") from exc
    return ExperimentConfig.from_dict(data or {})


CONFIG_TEMPLATE = """\
# condshap experiment configuration. Every value shown is the default.

# Data: x ~ N_M(0, Sigma) with Sigma[j,l] = rho^|j-l|
M: 8
rho: 0.5
n_train: 1000
n_test: 250
seed: 2024              # master seed; every random stream is derived from it

# Response: beta[0] + sum_j beta[j] cos(x_j) + sum_p gamma[p] g(x_a, x_b) + N(0, noise_sd^2)
beta: [1.0, 0.2, -0.8, 1.0, 0.5, -0.8, 0.6, -0.7, -0.6]
gamma: [0.8, -1.0]
pairs: [[1, 2], [3, 4]]   # 1-based interaction pairs (a, b)
noise_sd: 1.0

# Model being explained: fitted-basis (ridge on the true basis) or analytic (true mean)
model: fitted-basis
model_lambda: 1.0e-06

# Estimators. kinds and their options:
#   independence: K
#   empirical:    K, bandwidth (fixed) or bandwidth_scale (h = scale * sqrt(|S|))
#   gaussian:     K, jitter, antithetic, true_params (use the data-generating law)
#   separate:     family (poly | linear | knn), lam, degree, k, weights (distance | uniform)
#   surrogate:    same as separate plus coalitions_per_row
estimators:
- {name: independence, kind: independence, K: 1000}
- {name: empirical, kind: empirical, K: 1000, bandwidth_scale: 0.1}
- {name: gaussian, kind: gaussian, K: 1000, jitter: 1.0e-08}
- {name: separate_poly, kind: separate, family: poly, degree: 2, lam: 0.0001}
- {name: separate_knn, kind: separate, family: knn, k: 25}
- {name: surrogate_poly, kind: surrogate, family: poly, degree: 2, lam: 0.0001, coalitions_per_row: 16}

# Truth: exact (closed form, needs a basis or linear model), mc (antithetic Monte Carlo
# with K_truth draws per coalition) or auto (exact when available)
truth_method: auto
K_truth: 50000

# Evaluation
top_k: 3                    # rank agreement uses the top-k features by |phi|
relative_floor: 0.1         # floor on |f(x) - phi0| for the diagnostic relative MAE
permutation_shuffles: 10000 # shuffles for the MAE-vs-distance permutation p-value

plots: true
output_dir: out
"""


def default_threads():
    return os.cpu_count() or 1
