"""Compiled kernels.  Built from ``_lattice.pyx`` when Cython and a C compiler
are available; :mod:`kstab.kernels` falls back to pure Python otherwise."""
