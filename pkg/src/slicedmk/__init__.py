"""Sliced (p,q)-Monge-Kantorovich metrics on discrete measures, with a verification suite."""

__version__ = "0.1.0"
