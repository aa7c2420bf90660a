"""Spatial-spectral regularized local scaling cut (SSRLSC) for hyperspectral
dimensionality reduction, with guided filtering and OA/AA/kappa evaluation."""

from ._backend import BACKEND
from .classify import LinearModel, confusion_matrix, metrics, predict, predict_1nn, train_svm
from .datamodel import (
    HyperCube,
    LabelGrid,
    SampleSet,
    SplitSpec,
    load_cube,
    load_labels,
    make_synthetic,
    split,
    write_cube,
    write_labels,
)
from .eig import Projection, project, solve_pencil, sym_eig
from .filter import FilterParams, filter_cube, guided_filter_band, pca_guidance
from .graph import NeighborLists, build_neighbors
from .pipeline import ExperimentConfig, RunReport, run_experiment, sweep
from .scatter import fuse, regularize_spectral, spatial_scatter, spectral_scatter

__version__ = "0.1.0"
