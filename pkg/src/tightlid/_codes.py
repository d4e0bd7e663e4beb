# Integer codes shared by both kernel backends.

COINCIDENT = 0
STATIONARY = 1
TARGET_IS_QUERY = 2
BOUNDARY = 3
INTERIOR = 4
CLAMPED = 5

# relative tolerance for treating ||q - x|| as equal to r
BOUNDARY_RTOL = 1e-9
# clamp for degenerate adjusted / pairwise distances, relative to the scale
CLAMP_EPS = 1e-9
