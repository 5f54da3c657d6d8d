"""Mountain-pass solver for quasilinear problems with gradient-dependent
nonlinearities, plus numerical audits of the structural hypotheses."""

__version__ = "0.1.0"
