"""End-to-end benchmark: data, model, truth, estimators, report, files."""

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import svgplot
from .config import ExperimentConfig, default_threads
from .errors import ConfigError, PipelineError
from .evaluation import build_report, spearman_permutation_pvalue
from .mc_estimators import (
    EmpiricalSampler,
    GaussianSampler,
    IndependenceSampler,
    MonteCarloEstimator,
)
from .model import analytic_model, fit_basis_model
from .reg_estimators import fit_separate, fit_surrogate
from .rng import purpose_id, substream
from .shapley_engine import (
    ExactGaussianTruth,
    explain_many,
    true_shapley,
    write_explanations_csv,
)
from .simdata import (
    GaussianParams,
    ResponseCoefficients,
    make_ar_covariance,
    sample_dataset,
    write_dataset_csv,
)

log = logging.getLogger(__name__)


@dataclass
class ExperimentResult:
    report: object
    truth: list
    estimates: dict
    files: dict = field(default_factory=dict)
    pvalues: dict = field(default_factory=dict)
    truth_mean_se: float = 0.0


class _Stage:
    """Re-raise anything thrown inside as a PipelineError naming the stage."""

    def __init__(self, name):
        self.name = name

    def __enter__(self):
        log.info("stage %s", self.name)
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, PipelineError):
            raise PipelineError(self.name, exc) from exc
        return False


def dgp(config):
    params = GaussianParams(np.zeros(config.M), make_ar_covariance(config.M, config.rho))
    coef = ResponseCoefficients(config.beta, config.gamma, config.noise_sd,
                                [tuple(p) for p in config.pairs])
    return params, coef


def prepare(config):
    """Datasets and the fitted (or analytic) model."""
    params, coef = dgp(config)
    with _Stage("data"):
        train = sample_dataset(params, coef, config.n_train, config.seed, "train")
        test = sample_dataset(params, coef, config.n_test, config.seed, "test")
    with _Stage("model"):
        if config.model == "analytic":
            f = analytic_model(coef)
        else:
            f = fit_basis_model(train, coef.pairs, config.model_lambda)
    return params, train, test, f


def build_estimator(spec, train, f, params, seed):
    """Instantiate one configured estimator."""
    o = dict(spec.options)
    if spec.kind in ("independence", "empirical", "gaussian"):
        K = o.pop("K", 1000)
        empty = "train_mean"
        if spec.kind == "independence":
            sampler = IndependenceSampler(train)
        elif spec.kind == "empirical":
            sampler = EmpiricalSampler(train, o.get("bandwidth"), o.get("bandwidth_scale", 0.1))
        elif o.get("true_params", False):
            # knows the law, so v(empty) is sampled from it like the truth's
            sampler = GaussianSampler(params, antithetic=o.get("antithetic", False))
            empty = "sample"
        else:
            sampler = GaussianSampler.from_data(train, o.get("jitter", 1e-8),
                                                antithetic=o.get("antithetic", False))
        return MonteCarloEstimator(f, sampler, K, seed, name=spec.name, train=train,
                                   empty=empty)
    if spec.kind == "separate":
        est = fit_separate(train, f, **o)
    else:
        cpr = o.pop("coalitions_per_row", 16)
        rng = substream(seed, purpose_id("surrogate:" + spec.name))
        est = fit_surrogate(train, f, cpr, rng=rng, **o)
    est.name = spec.name
    return est


def compute_truth(config, params, f, X, obs_ids=None, threads=1):
    """Closed-form truth when the model allows it, antithetic Monte Carlo otherwise."""
    ids = list(range(len(X))) if obs_ids is None else list(obs_ids)
    method = config.truth_method
    if method == "auto":
        method = "exact" if getattr(f, "has_gaussian_expectation", False) else "mc"
    if method == "exact":
        return explain_many(f, ExactGaussianTruth(params, f), X, ids)

    def one(i):
        return true_shapley(X[i], params, f, config.K_truth, config.seed, ids[i])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, range(len(ids))))
    return [one(i) for i in range(len(ids))]


def run_experiment(config, out_dir=None, threads=None, write=True):
    """Run the full benchmark and write its artifacts.

    Files land in ``out_dir`` (default ``config.output_dir``): datasets,
    model coefficients, one explanation CSV per method, the per-instance CSV,
    the summary JSON and, last, the SVG plots.
    """
    if not isinstance(config, ExperimentConfig):
        raise ConfigError("run_experiment expects an ExperimentConfig")
    config.validate()
    threads = default_threads() if threads is None else max(1, int(threads))
    params, train, test, f = prepare(config)

    with _Stage("truth"):
        truth = compute_truth(config, params, f, test.features, threads=threads)
    estimates = {}
    for spec in config.estimators:
        with _Stage(f"estimator:{spec.name}"):
            est = build_estimator(spec, train, f, params, config.seed)
            estimates[spec.name] = explain_many(f, est, test.features, threads=threads)

    with _Stage("report"):
        pred = f.predict_batch(test.features)
        report = build_report(truth, estimates, train.features, test.features, pred,
                              config.top_k, config.relative_floor)
        pvalues = {
            m: spearman_permutation_pvalue(
                report.per_instance_mae[m], report.distance, config.permutation_shuffles,
                substream(config.seed, purpose_id("permutation:" + m)))
            for m in report.methods
        }
    ses = [e.phi_se for e in truth if e.phi_se is not None]
    truth_se = float(np.mean(ses)) if ses else 0.0
    result = ExperimentResult(report, truth, estimates, pvalues=pvalues, truth_mean_se=truth_se)
    if write:
        out = out_dir or config.output_dir
        with _Stage("write"):
            result.files = write_outputs(config, result, train, test, f, out)
        if config.plots:
            with _Stage("plots"):
                result.files.update(emit_plots(result, pred, out))
    return result


def write_outputs(config, result, train, test, f, out):
    os.makedirs(out, exist_ok=True)
    files = {}

    def path(name):
        files[name] = os.path.join(out, name)
        return files[name]

    with open(path("config.yaml"), "w") as fh:
        fh.write(config.dump())
    write_dataset_csv(train, path("train.csv"))
    write_dataset_csv(test, path("test.csv"))
    if hasattr(f, "to_json"):
        with open(path("model.json"), "w") as fh:
            fh.write(f.to_json() + "\n")
    write_explanations_csv(result.truth, path("explanations_truth.csv"))
    for m, exps in result.estimates.items():
        write_explanations_csv(exps, path(f"explanations_{m}.csv"))
    result.report.write_per_instance_csv(path("per_instance.csv"))
    summary = result.report.summary()
    summary["permutation_pvalue_mae_distance"] = {m: float(p) for m, p in result.pvalues.items()}
    summary["permutation_shuffles"] = config.permutation_shuffles
    summary["truth_mean_se"] = result.truth_mean_se
    summary["model_train_r2"] = getattr(f, "r2", None)
    with open(path("summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return files


def emit_plots(result, predictions, out):
    plot_dir = os.path.join(out, "plots")
    os.makedirs(plot_dir, exist_ok=True)
    rep = result.report
    positions = svgplot.select_observations(predictions, rep.phi0)
    return {
        "plots/mae_boxplot.svg": svgplot.mae_boxplot(rep, os.path.join(plot_dir, "mae_boxplot.svg")),
        "plots/mae_scatter.svg": svgplot.mae_scatter(rep, os.path.join(plot_dir, "mae_scatter.svg")),
        "plots/shapley_bars.svg": svgplot.shapley_bars(
            result.truth, result.estimates, positions, predictions,
            os.path.join(plot_dir, "shapley_bars.svg")),
    }


def explain_single(config, obs_id, method):
    """Explanation of one test observation by one configured method (or the truth)."""
    params, train, test, f = prepare(config)
    if not 0 <= obs_id < test.n:
        raise ConfigError(f"observation id {obs_id} outside 0..{test.n - 1}")
    x = test.features[obs_id]
    if method == "truth":
        with _Stage("truth"):
            return compute_truth(config, params, f, x[None, :], [obs_id])[0]
    specs = {e.name: e for e in config.estimators}
    if method not in specs:
        raise ConfigError(f"unknown method {method!r}; configured: {sorted(specs)} or 'truth'")
    with _Stage(f"estimator:{method}"):
        est = build_estimator(specs[method], train, f, params, config.seed)
        return explain_many(f, est, x[None, :], [obs_id])[0]
