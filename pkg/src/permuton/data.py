"""The city data set: the 16 largest German cities, in decreasing population.

Only the two rank orderings are used (west-east and south-north), so the
fixture reproduces every derived permutation exactly without geographic data.
"""
from __future__ import annotations

from .perm import BivariateSample, Permutation

LONGITUDE_RANKS = (15, 11, 13, 3, 7, 9, 2, 6, 4, 8, 16, 14, 10, 12, 1, 5)
LATITUDE_RANKS = (14, 16, 1, 5, 4, 2, 7, 12, 10, 15, 6, 8, 13, 3, 9, 11)

# published relating permutation, longitude rank -> latitude rank
CITY_PERMUTATION = (9, 7, 5, 10, 11, 12, 4, 15, 2, 13, 16, 3, 1, 8, 14, 6)

# published length-3 table, in lexicographic pattern order 123,132,213,231,312,321
TABLE1_COUNTS = (69, 57, 88, 61, 130, 50)
TABLE1_FREQUENCIES = (0.152, 0.125, 0.193, 0.134, 0.286, 0.110)
# the published number of concordant pairs out of 120
CONCORDANT_PAIRS = 61


def pi_long() -> Permutation:
    return Permutation(LONGITUDE_RANKS)


def pi_lat() -> Permutation:
    return Permutation(LATITUDE_RANKS)


def city_sample() -> BivariateSample:
    """Rows are cities by decreasing population; x = west-east rank, y = south-north rank."""
    return BivariateSample([float(v) for v in LONGITUDE_RANKS], [float(v) for v in LATITUDE_RANKS])
