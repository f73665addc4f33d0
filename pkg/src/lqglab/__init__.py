"""Desk-scale simulation lab for random planar maps and Liouville-type observables.

Subpackages cover: rooted planar maps (half-edge rotation systems), quadrant
lattice walks and their exact samplers, the tree/walk and percolation/walk
sewing bijections, crossing-event embeddings into the triangle, discrete
Gaussian free fields with multiplicative-chaos measures, the mated-CRT graph,
and exact/Monte-Carlo exponent computations.
"""

__version__ = "0.1.0"

from .rng import rng_stream

__all__ = ["rng_stream", "__version__"]
