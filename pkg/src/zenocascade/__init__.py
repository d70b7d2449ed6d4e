"""Two-step cascade spontaneous decay in a three-level system.

Library layout:

* ``densities``  -- coupling spectral density families
* ``quadrature`` -- semi-infinite, principal-value, and line-factor integrals
* ``rates``      -- bare/perturbed complex decay constants, corrected energies
* ``kernels``    -- memory kernels, Volterra and exponential amplitude traces
* ``spectra``    -- joint/marginal/sum emission distributions and peak fits
* ``oracle``     -- discretized-continuum Schroedinger cross-check
* ``cli``        -- scenario-driven command line front end
"""

__version__ = "0.1.0"
