"""Third-order NLS wave packets for non-vanishing 2D water waves: operators,
packet assembly, fixed-point initial data and order studies."""

__version__ = "0.1.0"
