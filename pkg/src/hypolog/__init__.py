"""Desk-scale numerical laboratory for entropy decay of the hypoelliptic
heat flow on SU(2) and the quantum Markov semigroups it transfers to.

Layers, bottom up:

* ``numkit``   - dense Hermitian spectral toolkit.
* ``su2repr``  - su(2) irrep generators, group elements, Haar sampling.
* ``qms``      - transferred Lindblad generators and channels.
* ``entfun``   - relative entropy, Fisher information, divided-difference
                 kernels, weighted norms.
* ``pwfun``    - exact band-limited heat calculus on SU(2).
* ``gradest``  - empirical gradient-estimate constants C(t), their
                 integral kappa, and the entropy-decay rate 1/(2·kappa).
* ``mlsiopt``  - optimization-based entropy-decay constants for the
                 quantum semigroups.
* ``transfer`` - the coherent embedding intertwining both pictures.
* ``cli``      - reproducible experiment runner (CSV/JSON/SVG artifacts).
"""

__version__ = "0.1.0"

from . import (cli, entfun, errors, gradest, mlsiopt, numkit, pwfun, qms,
               serialize, su2repr, transfer)

__all__ = [
    "__version__", "cli", "entfun", "errors", "gradest", "mlsiopt",
    "numkit", "pwfun", "qms", "serialize", "su2repr", "transfer",
]
