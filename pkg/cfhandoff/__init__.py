"""Handoff management for user-centric cell-free massive MIMO with POMDP
policies.
"""

__version__ = '0.1.0.dev0'
