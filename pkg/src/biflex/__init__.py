"""Design and analysis tools for passive bimodal-stiffness (buckling honeycomb) robot wrists."""

__version__ = "0.1.0"
