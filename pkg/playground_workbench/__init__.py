"""
Playground Workbench
Language-conditioned reinforcement learning on the Playground environment
"""

__version__ = "1.0.0"
__author__ = "Playground Workbench Team"
__description__ = "Modular-attention reward functions, policies and evaluation for the Playground world"
