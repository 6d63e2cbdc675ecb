"""Canned experiment suites over the synthetic manifolds.

Each suite trains per-seed models and emits a plain-text table with one
row per sweep value (mean +/- std over seeds, AUC scaled to 0-100).
The hyperparameters live in module-level spec builders so callers can
shrink them for smoke runs.
"""

from dataclasses import dataclass, replace

import numpy as np

from .config import (
    DatasetSpec,
    ExperimentConfig,
    ModelSpec,
    NegativesSpec,
    TrainerSpec,
    build_negatives,
    build_positives,
    _trainer_config,
)
from .datasets import TEST, TRAIN
from .errors import ConfigError
from .metrics import auroc, nearest_neighbor_scores
from .nn import MlpModel
from .training import score, train
from .training_lf import train_lf

SINE_DISPLACEMENTS = (0.2, 0.4, 0.6, 0.8, 1.0, 2.0)
SPHERE_RADII = (1.2, 1.4, 1.6, 1.8, 2.0)
SWEEP_RADIUS_FACTORS = (0.25, 0.5, 1.0, 2.0, 4.0)
SWEEP_ADV_WEIGHTS = (0.25, 0.5, 1.0, 2.0)
OCLN_DISPLACEMENT = 0.5

SUITES = (
    "sine_table",
    "sphere_table",
    "rand_ablation",
    "ocln_synthetic",
    "radius_sweep",
    "mu_sweep",
)


def sine_experiment(seeds=(0, 1, 2)) -> ExperimentConfig:
    return ExperimentConfig(
        dataset=DatasetSpec(kind="sine2d", n=1000),
        negatives=NegativesSpec(kind="sine_displaced", displacement=1.0),
        model=ModelSpec(hidden=(128,)),
        trainer=TrainerSpec(
            algorithm="drocc",
            epochs=60,
            warmup_steps=60,
            batch_size=256,
            learning_rate=1e-3,
        ),
        seeds=tuple(seeds),
    )


def sphere_experiment(seeds=(0, 1, 2)) -> ExperimentConfig:
    return ExperimentConfig(
        dataset=DatasetSpec(kind="ball", n=4000, dim=3),
        negatives=NegativesSpec(kind="sphere_surface", rho=1.2, dim=3),
        model=ModelSpec(hidden=(128,)),
        trainer=TrainerSpec(
            algorithm="drocc",
            epochs=60,
            warmup_steps=60,
            batch_size=256,
            learning_rate=1e-3,
        ),
        seeds=tuple(seeds),
    )


def ocln_experiment(seeds=(0, 1, 2, 3, 4)) -> ExperimentConfig:
    return ExperimentConfig(
        dataset=DatasetSpec(kind="noisy_sine10d", n=1024),
        negatives=NegativesSpec(
            kind="noisy_sine10d_displaced",
            displacement=OCLN_DISPLACEMENT,
            train_count=128,
        ),
        model=ModelSpec(hidden=(128,)),
        trainer=TrainerSpec(
            algorithm="drocc_lf",
            epochs=60,
            warmup_steps=60,
            batch_size=256,
            learning_rate=1e-3,
        ),
        seeds=tuple(seeds),
    )


@dataclass
class SuiteTable:
    name: str
    columns: list
    rows: list  # list of dicts keyed by column

    def to_text(self) -> str:
        widths = [
            max(len(c), max((len(str(r[c])) for r in self.rows), default=0))
            for c in self.columns
        ]
        lines = [f"# suite: {self.name}"]
        lines.append("  ".join(c.ljust(w) for c, w in zip(self.columns, widths)))
        for r in self.rows:
            lines.append("  ".join(str(r[c]).ljust(w) for c, w in zip(self.columns, widths)))
        return "\n".join(lines) + "\n"


def _fmt_auc(values) -> str:
    v = np.asarray(values) * 100.0
    return f"{v.mean():.2f} +/- {v.std():.2f}"


def _trained_models(cfg: ExperimentConfig):
    """One trained model per seed plus the per-seed datasets."""
    out = []
    for seed in cfg.seeds:
        ds = build_positives(cfg.dataset, seed)
        model = MlpModel.init([ds.dim, *cfg.model.hidden, 1], cfg.model.activation, seed=seed)
        tcfg = _trainer_config(cfg.trainer, seed)
        mask = (ds.split == TRAIN) & (ds.labels == 1)
        if cfg.trainer.algorithm == "drocc":
            train(model, ds.features[mask], tcfg)
        else:
            pos = ds.features[mask]
            neg = build_negatives(cfg.negatives, ds, cfg.negatives.train_count, seed + 3333)
            X = np.vstack([pos, neg])
            y = np.concatenate([np.ones(pos.shape[0]), -np.ones(neg.shape[0])])
            train_lf(model, X, y, tcfg)
        out.append((seed, ds, model))
    return out


def _row_auc(ds, model, negspec: NegativesSpec, seed: int):
    """(model AUC, nearest-neighbor AUC) for one negatives setting."""
    pos_test = ds.features[(ds.split == TEST) & (ds.labels == 1)]
    neg = build_negatives(negspec, ds, pos_test.shape[0], seed + 7777)
    labels = np.concatenate([np.ones(pos_test.shape[0]), -np.ones(neg.shape[0])])

    s_model = np.concatenate([score(model, pos_test), score(model, neg)])
    train_pos = ds.features[(ds.split == TRAIN) & (ds.labels == 1)]
    s_nn = np.concatenate(
        [nearest_neighbor_scores(train_pos, pos_test), nearest_neighbor_scores(train_pos, neg)]
    )
    return auroc(s_model, labels), auroc(s_nn, labels)


def suite_sine_table(seeds=(0, 1, 2), trainer_overrides=None) -> SuiteTable:
    cfg = sine_experiment(seeds)
    if trainer_overrides:
        cfg.trainer = replace(cfg.trainer, **trainer_overrides)
    models = _trained_models(cfg)
    rows = []
    for v in SINE_DISPLACEMENTS:
        negspec = replace(cfg.negatives, displacement=v)
        model_aucs, nn_aucs = zip(
            *[_row_auc(ds, m, negspec, seed) for seed, ds, m in models]
        )
        rows.append(
            {
                "displacement": f"{v:g}",
                "nearest_neighbor": _fmt_auc(nn_aucs),
                "drocc": _fmt_auc(model_aucs),
                "_model_aucs": list(model_aucs),
                "_nn_aucs": list(nn_aucs),
            }
        )
    return SuiteTable("sine_table", ["displacement", "nearest_neighbor", "drocc"], rows)


def suite_sphere_table(seeds=(0, 1, 2), trainer_overrides=None) -> SuiteTable:
    cfg = sphere_experiment(seeds)
    if trainer_overrides:
        cfg.trainer = replace(cfg.trainer, **trainer_overrides)
    models = _trained_models(cfg)
    rows = []
    for rho in SPHERE_RADII:
        negspec = replace(cfg.negatives, rho=rho)
        model_aucs, nn_aucs = zip(
            *[_row_auc(ds, m, negspec, seed) for seed, ds, m in models]
        )
        rows.append(
            {
                "radius": f"{rho:g}",
                "nearest_neighbor": _fmt_auc(nn_aucs),
                "drocc": _fmt_auc(model_aucs),
                "_model_aucs": list(model_aucs),
                "_nn_aucs": list(nn_aucs),
            }
        )
    return SuiteTable("sphere_table", ["radius", "nearest_neighbor", "drocc"], rows)


def suite_rand_ablation(seeds=(0, 1, 2), trainer_overrides=None) -> SuiteTable:
    """Adversarial search vs uniform annulus sampling on the sine rows."""
    cfg = sine_experiment(seeds)
    if trainer_overrides:
        cfg.trainer = replace(cfg.trainer, **trainer_overrides)
    ascent_models = _trained_models(cfg)
    cfg_rand = replace(cfg)
    cfg_rand.trainer = replace(cfg.trainer, mode="random")
    random_models = _trained_models(cfg_rand)
    rows = []
    for v in SINE_DISPLACEMENTS:
        negspec = replace(cfg.negatives, displacement=v)
        asc, _ = zip(*[_row_auc(ds, m, negspec, s) for s, ds, m in ascent_models])
        rnd, _ = zip(*[_row_auc(ds, m, negspec, s) for s, ds, m in random_models])
        rows.append(
            {
                "displacement": f"{v:g}",
                "drocc": _fmt_auc(asc),
                "drocc_rand": _fmt_auc(rnd),
                "_ascent_aucs": list(asc),
                "_random_aucs": list(rnd),
            }
        )
    return SuiteTable("rand_ablation", ["displacement", "drocc", "drocc_rand"], rows)


def suite_ocln_synthetic(seeds=(0, 1, 2, 3, 4), trainer_overrides=None) -> SuiteTable:
    """Euclidean one-class trainer vs limited-negatives trainer on the
    10-D noisy sine data, scored against close displaced negatives."""
    cfg = ocln_experiment(seeds)
    if trainer_overrides:
        cfg.trainer = replace(cfg.trainer, **trainer_overrides)
    negspec = cfg.negatives

    lf_models = _trained_models(cfg)
    cfg_plain = replace(cfg)
    cfg_plain.trainer = replace(cfg.trainer, algorithm="drocc")
    plain_models = _trained_models(cfg_plain)

    lf_aucs, _ = zip(*[_row_auc(ds, m, negspec, s) for s, ds, m in lf_models])
    plain_aucs, _ = zip(*[_row_auc(ds, m, negspec, s) for s, ds, m in plain_models])
    rows = [
        {
            "displacement": f"{OCLN_DISPLACEMENT:g}",
            "drocc": _fmt_auc(plain_aucs),
            "drocc_lf": _fmt_auc(lf_aucs),
            "_plain_aucs": list(plain_aucs),
            "_lf_aucs": list(lf_aucs),
        }
    ]
    return SuiteTable("ocln_synthetic", ["displacement", "drocc", "drocc_lf"], rows)


def suite_radius_sweep(seeds=(0, 1, 2), trainer_overrides=None) -> SuiteTable:
    """AUC against near-manifold negatives as the annulus radius grows."""
    base = sine_experiment(seeds)
    if trainer_overrides:
        base.trainer = replace(base.trainer, **trainer_overrides)
    negspec = replace(base.negatives, displacement=0.2)
    default_r = np.sqrt(2.0) / 2.0
    rows = []
    for factor in SWEEP_RADIUS_FACTORS:
        cfg = replace(base)
        cfg.trainer = replace(base.trainer, radius=default_r * factor)
        models = _trained_models(cfg)
        aucs, _ = zip(*[_row_auc(ds, m, negspec, s) for s, ds, m in models])
        rows.append(
            {
                "radius": f"{default_r * factor:.4f}",
                "auc_at_0.2": _fmt_auc(aucs),
                "_aucs": list(aucs),
            }
        )
    return SuiteTable("radius_sweep", ["radius", "auc_at_0.2"], rows)


def suite_mu_sweep(seeds=(0, 1, 2), trainer_overrides=None) -> SuiteTable:
    """AUC against near-manifold negatives as the negative-loss weight varies."""
    base = sine_experiment(seeds)
    if trainer_overrides:
        base.trainer = replace(base.trainer, **trainer_overrides)
    negspec = replace(base.negatives, displacement=0.2)
    rows = []
    for mu in SWEEP_ADV_WEIGHTS:
        cfg = replace(base)
        cfg.trainer = replace(base.trainer, adv_weight=mu)
        models = _trained_models(cfg)
        aucs, _ = zip(*[_row_auc(ds, m, negspec, s) for s, ds, m in models])
        rows.append(
            {
                "adv_weight": f"{mu:g}",
                "auc_at_0.2": _fmt_auc(aucs),
                "_aucs": list(aucs),
            }
        )
    return SuiteTable("mu_sweep", ["adv_weight", "auc_at_0.2"], rows)


def run_suite(name: str, seeds=None, trainer_overrides=None) -> SuiteTable:
    runners = {
        "sine_table": suite_sine_table,
        "sphere_table": suite_sphere_table,
        "rand_ablation": suite_rand_ablation,
        "ocln_synthetic": suite_ocln_synthetic,
        "radius_sweep": suite_radius_sweep,
        "mu_sweep": suite_mu_sweep,
    }
    if name not in runners:
        raise ConfigError(f"unknown suite {name!r}; choose from {SUITES}")
    kwargs = {}
    if seeds is not None:
        kwargs["seeds"] = tuple(seeds)
    if trainer_overrides:
        kwargs["trainer_overrides"] = trainer_overrides
    return runners[name](**kwargs)
