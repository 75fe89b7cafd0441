"""Event records, preprocessing, reference validation and synthetic data."""

from .pipeline import Dataset, StandardizationStats, SubsetFilter, build_dataset, preprocess, split, standardize
from .records import Disaster, EventRecord, Region, load_csv
from .reference import ValidationReport, validate_reference_counts

__all__ = [
    "Dataset",
    "Disaster",
    "EventRecord",
    "Region",
    "StandardizationStats",
    "SubsetFilter",
    "ValidationReport",
    "build_dataset",
    "load_csv",
    "preprocess",
    "split",
    "standardize",
    "validate_reference_counts",
]
