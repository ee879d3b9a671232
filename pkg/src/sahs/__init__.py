"""Airflow-based sleep apnea-hypopnea severity classification.

Reads polysomnography airflow from EDF files with XML scored events,
extracts 17 event-amplitude features per subject, and compares a deep
feed-forward network against a linear SVM and AdaBoost-CART under
stratified 10-fold cross-validation.
"""

__version__ = "0.1.0"

from .errors import SahsError  # noqa: E402

__all__ = ["SahsError", "__version__"]
