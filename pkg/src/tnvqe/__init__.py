"""Tensor-network initialized VQE for all-to-all random spin models.

Workflow: generate a two-body Hamiltonian (``hamiltonians``), optimize a
(branching) multiscale network by alternating isometric updates or BFGS
(``network``, ``optimizer``), encode the chi=2 result exactly into
two-qubit gates and embed it into a branching circuit (``circuits``), then
continue with statevector VQE (``sim``, ``vqe``).  ``experiments`` and the
``tnvqe`` command drive realization sweeps and aggregation.
"""

__version__ = "1.0.0"

__all__ = ["__version__"]
