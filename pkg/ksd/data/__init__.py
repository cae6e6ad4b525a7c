""" Datasets, IDX Files and Subset Draws
"""

from .dataset import Dataset, Split, binarize
from .idx import load_idx, read_idx_images, read_idx_labels, save_idx_images, save_idx_labels
from .curves import generate_curves
from .subsets import SampleMode, SubsetPlan, draw_subsets

__all__ = [
    "Dataset",
    "SampleMode",
    "Split",
    "SubsetPlan",
    "binarize",
    "draw_subsets",
    "generate_curves",
    "load_idx",
    "read_idx_images",
    "read_idx_labels",
    "save_idx_images",
    "save_idx_labels",
]
