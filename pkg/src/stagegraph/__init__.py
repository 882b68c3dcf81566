"""Knowledge-graph engine for breast cancer staging under AJCC 7th/8th edition guidelines."""

__version__ = "0.1.0"
