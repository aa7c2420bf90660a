"""End-to-end experiments: method variants, multi-run protocol, sweeps."""

from __future__ import annotations

import csv
import dataclasses
import io
import time
import warnings
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .classify import confusion_matrix, metrics, predict, predict_1nn, train_svm
from .datamodel import HyperCube, LabelGrid, SampleSet, SplitSpec, split_positions, standardize_cube
from .eig import Projection, project, solve_pencil
from .filter import FilterParams, filter_cube
from .graph import build_neighbors
from .scatter import RegularizationParams, fuse, regularize_spectral, spatial_scatter, spectral_scatter

METHODS = ("lsc", "rlsc", "nplsc", "ssrlsc")
CLASSIFIERS = ("svm", "1nn")
SWEEP_AXES = ("dim", "window", "alpha", "beta", "train_size")
CSV_HEADER = ("axis", "run", "dim", "oa", "aa", "kappa", "seconds")


class StageError(RuntimeError):
    """A pipeline stage failed; the message starts with the stage name."""

    def __init__(self, stage: str, run: int, cause: Exception):
        super().__init__(f"stage '{stage}' failed in run {run}: {cause}")
        self.stage = stage
        self.run = run


@dataclass(frozen=True)
class ExperimentConfig:
    """Every tunable of one experiment.

    ``lsc`` forces ``alpha=0, beta=1``, ``rlsc`` forces ``beta=1`` and
    ``nplsc`` forces ``beta=0``; the overrides are applied on construction.
    ``gamma=None`` means ``1 / bands``.
    """

    method: str = "ssrlsc"
    use_filter: bool = True
    alpha: float = 0.5
    beta: float = 0.3
    gamma: float | None = None
    k_w: int = 7
    k_b: int = 7
    window: int = 3
    filter_radius: int = 1
    filter_eps: float = 0.01
    dims: tuple = tuple(range(2, 51, 2))
    split: SplitSpec = field(default_factory=SplitSpec)
    classifier: str = "svm"
    svm_lambda: float = 0.01
    svm_epochs: int = 200
    n_jobs: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.classifier not in CLASSIFIERS:
            raise ValueError(f"classifier must be one of {CLASSIFIERS}, got {self.classifier!r}")
        forced = {"lsc": {"alpha": 0.0, "beta": 1.0}, "rlsc": {"beta": 1.0}, "nplsc": {"beta": 0.0}}
        for key, value in forced.get(self.method, {}).items():
            object.__setattr__(self, key, value)
        dims = tuple(sorted({int(d) for d in np.atleast_1d(self.dims)}))
        if not dims or dims[0] < 1:
            raise ValueError("dims must be a non-empty list of positive integers")
        object.__setattr__(self, "dims", dims)
        RegularizationParams(self.alpha, self.beta, self.gamma)
        FilterParams(self.filter_radius, self.filter_eps)
        if self.window < 1 or self.window % 2 == 0:
            raise ValueError(f"window must be odd and >= 1, got {self.window}")
        if self.k_w < 1 or self.k_b < 1:
            raise ValueError("k_w and k_b must be >= 1")
        if not self.svm_lambda > 0 or self.svm_epochs < 1:
            raise ValueError("svm_lambda must be > 0 and svm_epochs >= 1")

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class RunRecord:
    run: int
    dim: int
    oa: float
    aa: float
    kappa: float
    seconds: float = 0.0

    def metrics(self) -> tuple:
        return (self.run, self.dim, self.oa, self.aa, self.kappa)


@dataclass
class RunReport:
    config: ExperimentConfig
    records: list = field(default_factory=list)
    stage_seconds: list = field(default_factory=list)  # one {stage: seconds} per run
    jitter: list = field(default_factory=list)  # conditioning added per run
    projections: list = field(default_factory=list)

    @property
    def dims(self) -> tuple:
        return tuple(sorted({r.dim for r in self.records}))

    def metric_table(self) -> list:
        """Deterministic content of the report (timings excluded)."""
        return [r.metrics() for r in self.records]

    def mean_by_dim(self) -> dict:
        out = {}
        for d in self.dims:
            rows = [r for r in self.records if r.dim == d]
            out[d] = tuple(float(np.mean([getattr(r, k) for r in rows])) for k in ("oa", "aa", "kappa"))
        return out

    def best(self) -> tuple:
        """``(dim, oa, aa, kappa)`` at the dimension with the highest mean OA."""
        means = self.mean_by_dim()
        dim = max(means, key=lambda d: (means[d][0], -d))
        return (dim,) + means[dim]

    def only_dims(self, dims) -> "RunReport":
        keep = set(dims)
        return dataclasses.replace(self, records=[r for r in self.records if r.dim in keep])

    def summary(self) -> str:
        cfg = self.config
        lines = [
            f"method={cfg.method} filter={'on' if cfg.use_filter else 'off'} alpha={cfg.alpha} "
            f"beta={cfg.beta} window={cfg.window} k_w={cfg.k_w} k_b={cfg.k_b} "
            f"train/class={cfg.split.per_class_train} runs={cfg.split.runs} clf={cfg.classifier}",
            f"{'dim':>5} {'OA%':>8} {'AA%':>8} {'kappa%':>8}",
        ]
        for d, (oa, aa, k) in self.mean_by_dim().items():
            lines.append(f"{d:>5} {100 * oa:8.2f} {100 * aa:8.2f} {100 * k:8.2f}")
        d, oa, aa, k = self.best()
        lines.append(f"best: OA {100 * oa:.2f} ({d})  AA {100 * aa:.2f}  kappa {100 * k:.2f}")
        if self.jitter:
            lines.append("denominator jitter per run: " + ", ".join(f"{j:.3g}" for j in self.jitter))
        if self.stage_seconds:
            stages = self.stage_seconds[0].keys()
            lines.append(
                "mean stage seconds: "
                + ", ".join(f"{s}={np.mean([t[s] for t in self.stage_seconds]):.3f}" for s in stages)
            )
        return "\n".join(lines)


@contextmanager
def _stage(name: str, run: int, timings: dict):
    start = time.perf_counter()
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, run, exc) from exc
    finally:
        timings[name] = timings.get(name, 0.0) + time.perf_counter() - start


def learn_projection(train: SampleSet, cube: HyperCube, cfg: ExperimentConfig, d: int, timings=None, run=0):
    """Neighbors, scatter matrices, fusion and pencil solve for one training set.

    ``cube`` supplies the spatial patches and must share the training
    samples' feature space.
    """
    timings = {} if timings is None else timings
    with _stage("graph", run, timings):
        nbrs = build_neighbors(train, cfg.k_w, cfg.k_b)
    with _stage("spectral", run, timings):
        s_b, s_w = spectral_scatter(train, nbrs, cfg.n_jobs)
        rs_b, rs_w = regularize_spectral(s_b, s_w, train, cfg.alpha)
    with _stage("spatial", run, timings):
        if cfg.beta < 1.0:
            sp_b, sp_w = spatial_scatter(train, cube, nbrs, cfg.window, cfg.gamma, cfg.n_jobs)
        else:
            sp_b = sp_w = np.zeros_like(rs_b)
    with _stage("eig", run, timings):
        ss_b, t_ss = fuse(rs_b, rs_w, sp_b, sp_w, cfg.beta)
        return solve_pencil(ss_b, t_ss, d)


def prepare_run(cube: HyperCube, grid: LabelGrid, cfg: ExperimentConfig, run: int, timings=None):
    """Split, standardize with training statistics, and optionally filter.

    Returns ``(train, test, working_cube)``; both sample sets are drawn from
    ``working_cube``.
    """
    timings = {} if timings is None else timings
    with _stage("split", run, timings):
        grid.check_aligned(cube)
        (tr_pos, tr_lab), (te_pos, te_lab) = split_positions(grid, cfg.split, run)
        work, _, _ = standardize_cube(cube, tr_pos)
    with _stage("filter", run, timings):
        if cfg.use_filter:
            work = filter_cube(work, FilterParams(cfg.filter_radius, cfg.filter_eps))
    train = SampleSet.from_cube(work, tr_pos, tr_lab)
    test = SampleSet.from_cube(work, te_pos, te_lab)
    return train, test, work


def _evaluate(train, test, cfg, n_classes, seed):
    if cfg.classifier == "svm":
        model = train_svm(train, cfg.svm_lambda, cfg.svm_epochs, seed)
        pred = predict(model, test)
    else:
        pred = predict_1nn(train, test)
    return metrics(confusion_matrix(test.labels, pred, n_classes))


def run_experiment(
    cube: HyperCube,
    grid: LabelGrid,
    cfg: ExperimentConfig,
    projection: Projection | None = None,
) -> RunReport:
    """Run ``cfg.split.runs`` repetitions of the full protocol.

    Run ``r`` uses seed ``cfg.split.seed + r`` for its split and its
    classifier. The pencil is solved once per run at ``max(dims)`` and the
    basis truncated for smaller dimensions. A fixed ``projection`` skips
    the learning stages.
    """
    limit = projection.output_dim if projection is not None else cube.bands
    dims = [d for d in cfg.dims if d <= limit]
    if len(dims) < len(cfg.dims):
        dropped = [d for d in cfg.dims if d > limit]
        if not dims:
            raise ValueError(f"every requested dimension exceeds {limit}: {dropped}")
        warnings.warn(f"dropping dimensions above {limit}: {dropped}", RuntimeWarning, stacklevel=2)
    if projection is not None and projection.input_dim != cube.bands:
        raise ValueError(f"projection expects {projection.input_dim} bands, cube has {cube.bands}")

    report = RunReport(cfg)
    n_classes = grid.n_classes
    for run in range(cfg.split.runs):
        timings = {}
        train, test, work = prepare_run(cube, grid, cfg, run, timings)
        if projection is None:
            proj = learn_projection(train, work, cfg, max(dims), timings, run)
        else:
            proj = projection
        report.jitter.append(float(proj.jitter))
        report.projections.append(proj)
        for d in dims:
            start = time.perf_counter()
            with _stage("classify", run, timings):
                sub = proj.truncate(d)
                oa, aa, kappa = _evaluate(
                    project(train, sub), project(test, sub), cfg, n_classes, cfg.split.seed + run
                )
            report.records.append(RunRecord(run, d, oa, aa, kappa, time.perf_counter() - start))
        report.stage_seconds.append(timings)
    return report


def sweep(cube: HyperCube, grid: LabelGrid, base: ExperimentConfig, axis: str, values) -> list:
    """One experiment per value of ``axis``, all sharing the base seeds.

    Returns ``[(value, RunReport), ...]``. The ``dim`` axis is served by a
    single experiment because truncating the largest basis equals solving
    at each dimension.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}, got {axis!r}")
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one value")
    if axis == "dim":
        report = run_experiment(cube, grid, base.replace(dims=tuple(int(v) for v in values)))
        return [(int(v), report.only_dims([int(v)])) for v in values]
    out = []
    for v in values:
        if axis == "train_size":
            cfg = base.replace(split=dataclasses.replace(base.split, per_class_train=int(v)))
        elif axis == "window":
            cfg = base.replace(window=int(v))
        else:
            cfg = base.replace(**{axis: float(v)})
        out.append((v, run_experiment(cube, grid, cfg)))
    return out


def csv_rows(report: RunReport, axis_value="", timing=False) -> list:
    rows = []
    for r in report.records:
        secs = f"{r.seconds:.6f}" if timing else ""
        rows.append([str(axis_value), r.run, r.dim, repr(r.oa), repr(r.aa), repr(r.kappa), secs])
    return rows


def write_csv(results, path=None, timing=False) -> str:
    """Write ``[(axis_value, RunReport), ...]`` as CSV; returns the text.

    The ``seconds`` column is left empty unless ``timing`` is set, so that
    repeated runs produce identical files.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for value, report in results:
        writer.writerows(csv_rows(report, value, timing))
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text
