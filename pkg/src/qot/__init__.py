"""Measurement scheduling and RDM reconstruction for quantum overlapping tomography."""

__version__ = "0.1.0"
