"""Monte Carlo and quadrature toolkit for subordinators held above moving boundaries.

Subpackage map:

* :mod:`cslab.levy` -- subordinator models, boundary pairs, transience criterion.
* :mod:`cslab.paths` -- compound-Poisson path sampling and exact stable variates.
* :mod:`cslab.crossing` -- exact first-violation times and survival estimators.
* :mod:`cslab.conditioning` -- rejection conditioning, Doob identity checks,
  explosion-time machinery.
* :mod:`cslab.envelope` -- entropic repulsion envelope criterion and its
  empirical counterpart.
* :mod:`cslab.bounds` -- truncated-tail Chernoff bounds, distribution law tests,
  deterministic lemma checks.
* :mod:`cslab.cli` -- scenario configs, report writers, command line entry point.
"""

__version__ = "0.1.0"
