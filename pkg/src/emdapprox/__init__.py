"""
emdapprox - approximate Earth Mover's Distance under the l1 metric.

The pipeline reduces the aspect ratio of the input, embeds it in a randomly
shifted quadtree, and runs a multiplicative-weights solver whose distribution
over (pair, sign) constraints is either held explicitly or sampled through a
closest-pair oracle.
"""

__version__ = "0.3.0"

REPORT_SCHEMA_VERSION = 1
