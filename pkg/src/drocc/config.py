"""Config-driven experiment harness.

An experiment is one flat INI-style file: [dataset], [negatives],
[model], [trainer], [eval], [run]. Parsing and serialization round-trip
exactly; ``drocc defaults`` prints the default file.

Pure-positive generator datasets pair with a companion negatives spec
used for evaluation (and optionally for limited-negatives training);
CSV datasets carry their own labels.
"""

import configparser
import io
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import __version__ as _version
from . import datasets, metrics
from .datasets import Dataset, TEST, TRAIN, VAL
from .errors import ConfigError
from .metrics import EvalReport
from .nn import MlpModel
from .training import DroccConfig, TrainReport, score, train
from .training_lf import LfConfig, train_lf

GENERATOR_KINDS = ("sine2d", "noisy_sine10d", "ball", "csv")
NEGATIVE_KINDS = ("none", "sine_displaced", "noisy_sine10d_displaced", "sphere_surface")
ALGORITHMS = ("drocc", "drocc_lf", "drocc_oe")

# seed offsets decoupling the random streams of one run
_SEED_SPLIT = 1009
_SEED_TRAIN_NEG = 3333
_SEED_EVAL_NEG = 7777


@dataclass
class DatasetSpec:
    kind: str = "sine2d"
    n: int = 1000
    dim: int = 3
    path: str = ""
    label_column: str = "label"
    positive_label: str = "1"
    normalize: bool = False
    ratios: tuple = (0.6, 0.2, 0.2)


@dataclass
class NegativesSpec:
    kind: str = "none"
    displacement: float = 1.0
    rho: float = 1.2
    dim: int = 3
    eval_count: int = 0  # 0 = match the positive test count
    train_count: int = 0  # >0 feeds labeled trainers


@dataclass
class ModelSpec:
    hidden: tuple = (128,)
    activation: str = "relu"


@dataclass
class TrainerSpec:
    algorithm: str = "drocc"
    radius: float | None = None  # None = sqrt(d)/2
    radius_ratio: float = 2.0
    adv_weight: float = 1.0
    weight_decay: float = 0.0
    ascent_step: float = 0.01
    ascent_steps: int = 10
    warmup_steps: int = 50
    epochs: int = 50
    batch_size: int = 256
    optimizer: str = "adam"
    learning_rate: float = 1e-3
    mode: str = "ascent"
    adv_period: int = 1
    grid_points: int = 256


@dataclass
class EvalSpec:
    fpr_targets: tuple = (0.03, 0.05)
    contamination: float | None = None  # None = anomaly fraction of eval set


@dataclass
class ExperimentConfig:
    dataset: DatasetSpec = field(default_factory=DatasetSpec)
    negatives: NegativesSpec = field(default_factory=NegativesSpec)
    model: ModelSpec = field(default_factory=ModelSpec)
    trainer: TrainerSpec = field(default_factory=TrainerSpec)
    eval: EvalSpec = field(default_factory=EvalSpec)
    seeds: tuple = (0, 1, 2)
    out_dir: str = "runs"


# ---------------------------------------------------------------------------
# parse / serialize
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(cfg: ExperimentConfig) -> str:
    sections = {
        "dataset": cfg.dataset,
        "negatives": cfg.negatives,
        "model": cfg.model,
        "trainer": cfg.trainer,
        "eval": cfg.eval,
    }
    out = io.StringIO()
    for name, spec in sections.items():
        out.write(f"[{name}]\n")
        for f in fields(spec):
            out.write(f"{f.name} = {_fmt(getattr(spec, f.name))}\n")
        out.write("\n")
    out.write("[run]\n")
    out.write(f"seeds = {_fmt(cfg.seeds)}\n")
    out.write(f"out_dir = {cfg.out_dir}\n")
    return out.getvalue()


def _convert(section: str, key: str, raw: str, kind):
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "optfloat":
            return None if raw.lower() == "auto" else float(raw)
        if kind == "bool":
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if kind == "ints":
            return tuple(int(x) for x in raw.split(",") if x.strip())
        if kind == "floats":
            return tuple(float(x) for x in raw.split(",") if x.strip())
        return raw
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r} as {kind}") from None


_FIELD_KINDS = {
    ("dataset", "n"): "int",
    ("dataset", "dim"): "int",
    ("dataset", "normalize"): "bool",
    ("dataset", "ratios"): "floats",
    ("negatives", "displacement"): "float",
    ("negatives", "rho"): "float",
    ("negatives", "dim"): "int",
    ("negatives", "eval_count"): "int",
    ("negatives", "train_count"): "int",
    ("model", "hidden"): "ints",
    ("trainer", "radius"): "optfloat",
    ("trainer", "radius_ratio"): "float",
    ("trainer", "adv_weight"): "float",
    ("trainer", "weight_decay"): "float",
    ("trainer", "ascent_step"): "float",
    ("trainer", "ascent_steps"): "int",
    ("trainer", "warmup_steps"): "int",
    ("trainer", "epochs"): "int",
    ("trainer", "batch_size"): "int",
    ("trainer", "adv_period"): "int",
    ("trainer", "grid_points"): "int",
    ("trainer", "learning_rate"): "float",
    ("eval", "fpr_targets"): "floats",
    ("eval", "contamination"): "optfloat",
    ("run", "seeds"): "ints",
}


def parse_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None

    cfg = ExperimentConfig()
    specs = {
        "dataset": cfg.dataset,
        "negatives": cfg.negatives,
        "model": cfg.model,
        "trainer": cfg.trainer,
        "eval": cfg.eval,
    }
    for section, spec in specs.items():
        if not parser.has_section(section):
            continue
        known = {f.name for f in fields(spec)}
        for key, raw in parser.items(section):
            if key not in known:
                raise ConfigError(f"[{section}] unknown key {key!r}")
            kind = _FIELD_KINDS.get((section, key), "str")
            setattr(spec, key, _convert(section, key, raw, kind))
    if parser.has_section("run"):
        for key, raw in parser.items("run"):
            if key == "seeds":
                cfg.seeds = _convert("run", "seeds", raw, "ints")
            elif key == "out_dir":
                cfg.out_dir = raw.strip()
            else:
                raise ConfigError(f"[run] unknown key {key!r}")
    validate_config(cfg)
    return cfg


def validate_config(cfg: ExperimentConfig) -> None:
    if cfg.dataset.kind not in GENERATOR_KINDS:
        raise ConfigError(f"[dataset] kind must be one of {GENERATOR_KINDS}")
    if cfg.negatives.kind not in NEGATIVE_KINDS:
        raise ConfigError(f"[negatives] kind must be one of {NEGATIVE_KINDS}")
    if cfg.trainer.algorithm not in ALGORITHMS:
        raise ConfigError(f"[trainer] algorithm must be one of {ALGORITHMS}")
    if cfg.dataset.kind == "csv" and not cfg.dataset.path:
        raise ConfigError("[dataset] csv kind needs a path")
    if cfg.dataset.kind != "csv" and cfg.negatives.kind == "none":
        raise ConfigError("[negatives] generator datasets need a negatives kind for evaluation")
    if len(cfg.dataset.ratios) != 3 or abs(sum(cfg.dataset.ratios) - 1.0) > 1e-9:
        raise ConfigError("[dataset] ratios must be three values summing to 1")
    if not cfg.seeds:
        raise ConfigError("[run] needs at least one seed")
    if cfg.trainer.algorithm in ("drocc_lf", "drocc_oe"):
        if cfg.dataset.kind != "csv" and cfg.negatives.train_count <= 0:
            raise ConfigError("[negatives] labeled trainers need train_count > 0 on generator data")
    _trainer_config(cfg.trainer, seed=0)  # surfaces trainer invariant violations


def default_config() -> ExperimentConfig:
    return ExperimentConfig()


# ---------------------------------------------------------------------------
# building runs
# ---------------------------------------------------------------------------

def _trainer_config(spec: TrainerSpec, seed: int):
    common = dict(
        radius=spec.radius,
        radius_ratio=spec.radius_ratio,
        adv_weight=spec.adv_weight,
        weight_decay=spec.weight_decay,
        ascent_step=spec.ascent_step,
        ascent_steps=spec.ascent_steps,
        warmup_steps=spec.warmup_steps,
        epochs=spec.epochs,
        batch_size=spec.batch_size,
        seed=seed,
        optimizer=spec.optimizer,
        learning_rate=spec.learning_rate,
        mode=spec.mode,
        adv_period=spec.adv_period,
    )
    if spec.algorithm == "drocc":
        return DroccConfig(**common)
    variant = "lf" if spec.algorithm == "drocc_lf" else "oe"
    return LfConfig(**common, grid_points=spec.grid_points, variant=variant)


def build_positives(spec: DatasetSpec, seed: int) -> Dataset:
    """Generate or load the base dataset, split it, maybe normalize it."""
    if spec.kind == "sine2d":
        ds = datasets.gen_sine2d(spec.n, seed=seed)
    elif spec.kind == "noisy_sine10d":
        ds = datasets.gen_noisy_sine10d(spec.n, seed=seed)
    elif spec.kind == "ball":
        ds = datasets.gen_ball(spec.n, d=spec.dim, seed=seed)
    elif spec.kind == "csv":
        ds = datasets.load_csv(spec.path, spec.label_column, spec.positive_label)
    else:
        raise ConfigError(f"unknown dataset kind {spec.kind!r}")
    ds = datasets.split(ds, spec.ratios, seed=seed + _SEED_SPLIT)
    if spec.normalize:
        ds = datasets.normalize(ds)
    return ds


def build_negatives(negspec: NegativesSpec, base: Dataset, n: int, seed: int) -> np.ndarray:
    """Generated negative features, mapped into the base dataset's
    normalized coordinates when applicable."""
    if negspec.kind == "sine_displaced":
        neg = datasets.gen_sine_displaced(n, negspec.displacement, seed=seed)
    elif negspec.kind == "noisy_sine10d_displaced":
        neg = datasets.gen_noisy_sine10d_displaced(n, negspec.displacement, seed=seed)
    elif negspec.kind == "sphere_surface":
        neg = datasets.gen_sphere_surface(n, d=negspec.dim, rho=negspec.rho, seed=seed)
    else:
        raise ConfigError(f"unknown negatives kind {negspec.kind!r}")
    return datasets.apply_normalization(neg.features, base)


@dataclass
class SeedResult:
    seed: int
    model: MlpModel
    eval_report: EvalReport
    train_report: TrainReport


def run_single(cfg: ExperimentConfig, seed: int) -> SeedResult:
    """One full train+eval run for one seed."""
    ds = build_positives(cfg.dataset, seed)
    dim = ds.dim
    model = MlpModel.init([dim, *cfg.model.hidden, 1], cfg.model.activation, seed=seed)
    tcfg = _trainer_config(cfg.trainer, seed)

    train_mask = ds.split == TRAIN
    if cfg.trainer.algorithm == "drocc":
        report = train(model, ds.features[train_mask & (ds.labels == 1)], tcfg)
    elif cfg.dataset.kind == "csv":
        X = ds.features[train_mask]
        y = ds.labels[train_mask].astype(np.float64)
        report = train_lf(model, X, y, tcfg)
    else:
        pos = ds.features[train_mask & (ds.labels == 1)]
        neg = build_negatives(
            cfg.negatives, ds, cfg.negatives.train_count, seed + _SEED_TRAIN_NEG
        )
        X = np.vstack([pos, neg])
        y = np.concatenate([np.ones(pos.shape[0]), -np.ones(neg.shape[0])])
        report = train_lf(model, X, y, tcfg)

    eval_report = evaluate_run(cfg, ds, model, seed)
    return SeedResult(seed, model, eval_report, report)


def evaluate_run(cfg: ExperimentConfig, ds: Dataset, model: MlpModel, seed: int) -> EvalReport:
    """Score the test split; generator datasets get companion negatives."""
    test_mask = ds.split == TEST
    pos_X = ds.features[test_mask & (ds.labels == 1)]
    if cfg.dataset.kind == "csv":
        neg_X = ds.features[test_mask & (ds.labels == -1)]
        val_neg = ds.features[(ds.split == VAL) & (ds.labels == -1)]
    else:
        n_eval = cfg.negatives.eval_count or pos_X.shape[0]
        neg_X = build_negatives(cfg.negatives, ds, n_eval, seed + _SEED_EVAL_NEG)
        val_neg = np.empty((0, ds.dim))

    scores = np.concatenate([score(model, pos_X), score(model, neg_X)])
    labels = np.concatenate([np.ones(pos_X.shape[0]), -np.ones(neg_X.shape[0])])
    report = metrics.evaluate(
        scores,
        labels,
        fpr_targets=cfg.eval.fpr_targets,
        contamination=cfg.eval.contamination,
    )
    if val_neg.shape[0] > 0:
        # threshold picked on validation negatives instead of test negatives
        pos_scores = score(model, pos_X)
        vals = score(model, val_neg)
        report.threshold_source = "val"
        for fpr in cfg.eval.fpr_targets:
            r, t = metrics.recall_at_fpr(pos_scores, vals, fpr)
            report.recall_at_fpr[fpr] = r
            report.fpr_thresholds[fpr] = t
    return report


# ---------------------------------------------------------------------------
# run records
# ---------------------------------------------------------------------------

@dataclass
class RunRecord:
    config_text: str
    seeds: tuple
    reports: list
    wall_times: list
    library_version: str = _version

    def aggregates(self) -> dict:
        out = {}
        for key in ("auroc", "f1", "precision", "recall"):
            vals = np.array([getattr(r, key) for r in self.reports])
            out[f"{key}_mean"] = float(vals.mean())
            out[f"{key}_std"] = float(vals.std())
        targets = sorted({fpr for r in self.reports for fpr in r.recall_at_fpr})
        for fpr in targets:
            vals = np.array([r.recall_at_fpr[fpr] for r in self.reports])
            out[f"recall_at_fpr_{fpr:g}_mean"] = float(vals.mean())
            out[f"recall_at_fpr_{fpr:g}_std"] = float(vals.std())
        return out

    def to_text(self) -> str:
        out = io.StringIO()
        out.write("[record]\n")
        out.write(f"library_version = {self.library_version}\n")
        out.write(f"seeds = {', '.join(str(s) for s in self.seeds)}\n")
        for seed, rep, wt in zip(self.seeds, self.reports, self.wall_times):
            out.write(f"\n[seed.{seed}]\n")
            out.write(rep.to_text())
            out.write(f"wall_time_s = {wt:.3f}\n")
        out.write("\n[aggregate]\n")
        for key, val in self.aggregates().items():
            out.write(f"{key} = {val:.10f}\n")
        out.write("\n[config]\n")
        for line in self.config_text.rstrip().splitlines():
            out.write(f"# {line}\n")
        return out.getvalue()


def run_experiment(cfg: ExperimentConfig) -> tuple[RunRecord, list[SeedResult]]:
    results = [run_single(cfg, seed) for seed in cfg.seeds]
    record = RunRecord(
        config_text=serialize_config(cfg),
        seeds=tuple(cfg.seeds),
        reports=[r.eval_report for r in results],
        wall_times=[r.train_report.wall_time_s for r in results],
    )
    return record, results
