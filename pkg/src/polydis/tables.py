"""Reference data: counting sequences, asymptotic constants, defining polynomials.

All values are external ground truth used by the verification commands and the
acceptance suite.  Dissection counts are indexed by vertex count n starting at
n = 2.  Constants carry the precision they are known to.
"""

from math import sqrt

# restricted dissection counts, n = 2..20
RESTRICTED_COUNTS = {
    "C3": [1, 0, 1, 1, 4, 8, 25, 64, 191, 540, 1616, 4785, 14512, 44084,
           135545, 418609, 1302340, 4070124, 12785859],
    "C4": [1, 1, 0, 1, 7, 22, 49, 130, 468, 1651, 5240, 16485, 55184, 190724,
           652359, 2213044, 7584939, 26346522, 91951596],
    "C5": [1, 1, 3, 0, 4, 8, 65, 229, 946, 2850, 9367, 28068, 97408, 339694,
           1276467, 4659990, 17107629, 61200635, 220323189],
    "C6": [1, 1, 3, 11, 0, 15, 37, 85, 651, 2498, 10556, 46112, 167100,
           621677, 2215039, 7524303, 26414280, 92579458, 332018450],
    "patternI": [1, 1, 1, 6, 19, 64, 251, 979, 3888, 15896, 65871, 276225,
                 1171838, 5016697, 21644451, 94033342, 410990601, 1805881012,
                 7972740040],
    "patternII": [1, 1, 3, 1, 10, 43, 181, 643, 2233, 8152, 31523, 125776,
                  502449, 2001773, 8002279, 32271594, 131355333, 538125069,
                  2213876868],
    "patternI&II": [1, 1, 1, 1, 10, 29, 101, 283, 1023, 3576, 13143, 46502,
                    169221, 618807, 2301983, 8576756, 32169753, 121134235,
                    458881370],
}

RESTRICTION_PATTERNS = {
    "C3": ["C3"],
    "C4": ["C4"],
    "C5": ["C5"],
    "C6": ["C6"],
    "patternI": ["patternI"],
    "patternII": ["patternII"],
    "patternI&II": ["patternI", "patternII"],
}

SUPER_CATALAN = [1, 1, 3, 11, 45, 197, 903, 4279, 20793, 103049, 518859,
                 2646723, 13648869]

# growth constants for restricted classes: dissections (r, 1/r, alpha) and
# labelled outerplanar graphs (rho, 1/rho, g)
GROWTH_CONSTANTS = {
    "C3": (0.29336, 3.40869, 0.02330, 0.20836, 4.79916, 0.01578),
    "C4": (0.26488, 3.77515, 0.02177, 0.18919, 5.28562, 0.01462),
    "C5": (0.25383, 3.93949, 0.02217, 0.18045, 5.54143, 0.01514),
    "C6": (0.24835, 4.02657, 0.02321, 0.17510, 5.71082, 0.01630),
    "patternI": (0.20867, 4.79214, 0.01592, 0.15895, 6.29100, 0.01050),
    "patternII": (0.22416, 4.46098, 0.01856, 0.16608, 6.02092, 0.01195),
    "patternI&II": (0.24332, 4.10977, 0.01987, 0.17751, 5.63345, 0.01351),
}

SQRT2 = sqrt(2.0)

# limit-law constants (mu, sigma^2) for dissections and outerplanar graphs
LIMIT_LAW = {
    "C3": {
        "dissection_mu": 0.5,
        "dissection_sigma2": (-13 + 9 * SQRT2) / (-12 + 8 * SQRT2),
        "outerplanar_mu": 0.34793,
        "outerplanar_sigma2": 0.40737,
    },
    "C4": {
        "dissection_mu": (-30 + 21 * SQRT2) / (-12 + 8 * SQRT2),
        "dissection_sigma2": (-24216 + 17123 * SQRT2) / (-32 * (-3 + 2 * SQRT2) ** 2),
        "outerplanar_mu": 0.33705,
        "outerplanar_sigma2": 0.36145,
    },
}

# unrestricted dissection singularity and its first u-derivatives when
# 3-cycles are marked
R1_EXACT = 3 - 2 * SQRT2
R1_PRIME_C3 = -1.5 + SQRT2          # r'(1), 3-cycle marking
R1_PPRIME_C3 = 0.75 * SQRT2 - 1     # r''(1)

# unrestricted outerplanar transfer values
TAU_UNRESTRICTED = 0.1707649868
RHO_UNRESTRICTED = 0.1365937336
D_AT_TAU = 0.04709517290
TAU_PRIME_C3 = -0.849388502
RHO_PRIME_C3 = -0.5564505691
RHO_PPRIME_C3 = 0.3078771691

# defining polynomials for the marked series, {(u_exp, z_exp, D_exp): coeff};
# the marked-4-cycle polynomial as printed has two dropped operators and two
# stray subscripts; the variant below is the unique sign completion that
# annihilates the solved series
DEFINING_POLY_C3 = {
    (1, 0, 3): -1, (1, 1, 2): 1, (0, 3, 1): -1, (0, 4, 0): 1,
    (0, 0, 3): 1, (0, 1, 2): 1, (0, 2, 1): -1,
}

DEFINING_POLY_C4 = {
    (4, 2, 6): 1, (4, 1, 7): -2, (4, 0, 8): 1, (3, 6, 3): 2, (3, 5, 4): -4,
    (3, 4, 5): 2, (2, 10, 0): 1, (2, 9, 1): -2, (2, 8, 2): 1, (3, 4, 4): -2,
    (3, 3, 5): 4, (3, 2, 6): -4, (3, 1, 7): 6, (3, 0, 8): -4, (2, 8, 1): -2,
    (2, 7, 2): 4, (2, 6, 3): -6, (2, 5, 4): 10, (2, 4, 5): -6, (1, 10, 0): -2,
    (1, 9, 1): 4, (1, 8, 2): -2, (2, 6, 2): 1, (2, 5, 3): -2, (2, 4, 4): 3,
    (2, 3, 5): -6, (2, 2, 6): 5, (2, 1, 7): -6, (2, 0, 8): 6, (1, 8, 1): 2,
    (1, 7, 2): -4, (1, 6, 3): 4, (1, 5, 4): -8, (1, 4, 5): 6, (0, 10, 0): 1,
    (0, 9, 1): -2, (0, 8, 2): 1, (1, 5, 3): 1, (1, 4, 4): -2, (1, 3, 5): 3,
    (1, 2, 6): -2, (1, 1, 7): 2, (1, 0, 8): -4, (0, 9, 0): 1, (0, 8, 1): -2,
    (0, 7, 2): 1, (0, 5, 4): 2, (0, 4, 5): -2, (0, 7, 1): -1, (0, 6, 2): 2,
    (0, 5, 3): -1, (0, 4, 4): 1, (0, 3, 5): -1, (0, 0, 8): 1,
}

FIXTURES = {"p3": DEFINING_POLY_C3, "p4": DEFINING_POLY_C4}

# expected composite-root catalog sizes
ROOT_COUNTS = {
    ("C4", "full"): 10,
    ("C5", "avoid"): 11,
    ("C6", "avoid"): 25,
    ("C3", "full"): 1,
}
