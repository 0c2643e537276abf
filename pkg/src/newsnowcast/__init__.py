"""News-based economic sentiment indicators and real-time forecast evaluation.

The package turns a news corpus into aspect-based sentiment time series,
aligns them with real-time macroeconomic data vintages, and measures their
incremental predictive content for quarterly GDP growth (and other targets)
through mixed-frequency regressions with double-lasso inference and
multi-horizon out-of-sample comparison tests.
"""

__version__ = "0.1.0"
