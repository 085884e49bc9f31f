"""Biometric template protection toolkit.

Three protection schemes live in :mod:`l2fe_lab.schemes`; the breach-time
attack and the security-game harness used to compare them live in
:mod:`l2fe_lab.attack`.
"""

__version__ = "0.1.0"
