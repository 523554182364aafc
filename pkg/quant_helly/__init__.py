"""quant-helly: quantitative Helly and Tverberg theorems, computed."""
__version__ = "0.1.0"
