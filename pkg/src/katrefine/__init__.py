"""Synthesis of trace-refinement relations between two program fragments.

The pipeline: parse both fragments, abstract them into KAT expressions,
compare the expressions symbolically, and repair counterexamples with
case splits and hypotheses until every class of traces is related.
"""

__version__ = "0.1.0"
