"""Iterative labeling harness for conversation summarization.

Runs confidence-ranked pseudo/expert labeling loops over labeled and
unlabeled conversation pools against black-box summarization models,
expands experiment grids, and scores results with concept F1,
affirmation F1, and ROUGE-L F1.
"""

__version__ = "0.1.0"
