"""barcodetrees: persistence barcodes of geometric trees.

Extraction of barcodes from rooted trees embedded in 3-space, stochastic
synthesis of trees from barcodes, the symmetric-group classification of
strict barcodes, exact tree-realization counting and enumeration, and a
reproducible experiment harness.
"""

__version__ = "0.1.0"

from . import barcodes, realization, tmd, tns, trees

__all__ = ["barcodes", "realization", "tmd", "tns", "trees", "__version__"]
