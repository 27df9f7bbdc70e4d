"""Stationary Gaussian state, energy transport and quantum correlations of a
three-oscillator chain coupled to independent (squeezed) thermal baths.

Internal units set hbar = k_B = m = Omega = 1.  The main entry points are

* :func:`heatchain.model.chain_config` / :func:`heatchain.model.validate` to
  build a :class:`~heatchain.model.SystemConfig`;
* :func:`heatchain.steady.covariance` and
  :func:`heatchain.steady.correlation_matrices` for the stationary state;
* :mod:`heatchain.transport` and :mod:`heatchain.measures` for observables.
"""

__version__ = "0.1.0"
