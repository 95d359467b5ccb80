"""Adaptive Lipschitz-free conditional-gradient methods."""
