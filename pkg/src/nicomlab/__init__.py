"""Online mechanisms that learn from reported types while keeping truthful
reporting an equilibrium for long-sighted agents."""

__version__ = "0.1.0"
