"""Splice-site classification with fuzzy multiple-attractor cellular automata.

Subpackages:

- seqio: sequence encoding, dataset parsing, FASTA input
- fca: the cellular-automaton core (rules, evolution, attractors, basins)
- classifier: basin-vote classifiers and the two-stage cascade
- clonal: clonal-selection trainer
- metrics: sensitivity/specificity accounting and reports
- cli: command-line entry points
"""

__version__ = "0.1.0"
