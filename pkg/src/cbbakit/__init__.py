"""Exact computations with bicomplexes over the rationals.

Modules:

* ``exactq``: rational matrices, subspaces and quotients.
* ``bicomplex``: bicomplexes, their seven cohomologies, truncations, shifts, sums and tensor products.
* ``morphism``: maps, induced maps on cohomology, mapping cones and connectivity.
* ``decomp``: decomposition into squares and zig-zags.
* ``hirsch``: truncated free cbba's, linear Hirsch extensions and their k-invariants.
* ``formats`` and ``cli``: JSON file formats and the ``cbbakit`` command.
"""

__version__ = "0.1.0"
